"""Tests for Bell-diagonal analytics and the golden coefficient maps."""

import numpy as np
import pytest

from mbqcomm import dense
from mbqcomm.belldiag import (
    BD_SIGMA_ORDER,
    BellDiagonalError,
    BellDiagonalState,
    apply_depolarizing,
    entropy_yield,
    fidelity_from_noise,
    generate_golden_maps,
    golden_maps_to_text,
    load_golden_maps,
    parse_golden_text,
    perfect_pair,
    recurrence_step,
    shannon_entropy,
    swap_pairs,
    werner,
)
from mbqcomm.noise import PauliChannel


def test_werner_basics():
    assert werner(1.0).coeffs == (1.0, 0.0, 0.0, 0.0)
    assert abs(fidelity_from_noise(1 / 3) - 0.5) < 1e-15
    assert abs(fidelity_from_noise(0.0) - 0.25) < 1e-15
    with pytest.raises(BellDiagonalError):
        werner(1.5)


def test_invalid_coefficients_rejected():
    with pytest.raises(BellDiagonalError):
        BellDiagonalState((0.5, 0.5, 0.5, -0.5))
    with pytest.raises(BellDiagonalError):
        BellDiagonalState((0.5, 0.1, 0.1, 0.1))


def test_apply_depolarizing_identity_and_uniform():
    w = werner(0.8)
    assert apply_depolarizing(w, "A", 1.0).coeffs == w.coeffs
    out = apply_depolarizing(w, "B", 0.0)
    assert np.allclose(out.coeffs, 0.25)


def test_two_sided_equals_one_sided_squared():
    # E_a(q) E_b(q) |phi+> = E_a(q^2) |phi+>
    q = 0.83
    both = apply_depolarizing(apply_depolarizing(perfect_pair(), "A", q), "B", q)
    one = apply_depolarizing(perfect_pair(), "A", q * q)
    assert np.allclose(both.coeffs, one.coeffs, atol=1e-15)


def test_apply_channel_matches_dense_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        c = rng.dirichlet(np.ones(4))
        state = BellDiagonalState(tuple(c))
        ch = PauliChannel(tuple(rng.dirichlet(np.ones(4))))
        side = "A" if rng.integers(2) else "B"
        out = __import__("mbqcomm.belldiag", fromlist=["apply_pauli_channel"]) \
            .apply_pauli_channel(state, side, ch)
        rho = state.to_dense().apply_pauli_channel(ch.as_dict, 0 if side == "A" else 1)
        assert np.allclose(out.as_array(), rho.bell_coeffs(), atol=1e-12)


def test_entropy_yield_extremes():
    assert entropy_yield(perfect_pair()) == 1.0
    assert entropy_yield(BellDiagonalState((0.25,) * 4)) == 0.0


def test_entropy_at_hashing_boundary():
    # F_min ~ 0.8107 is where the Werner entropy crosses one bit
    s = shannon_entropy(werner(0.8107))
    assert abs(s - 1.0) < 1e-3
    assert entropy_yield(werner(0.8107)) < 1e-3
    assert entropy_yield(werner(0.83)) > 0.0


def test_recurrence_noiseless_fixed_point():
    for variant in ("BBPSSW", "DEJMPS"):
        out, p = recurrence_step(perfect_pair(), perfect_pair(), variant)
        assert abs(p - 1.0) < 1e-12
        assert np.allclose(out.coeffs, (1, 0, 0, 0), atol=1e-12)


def test_recurrence_bbpssw_werner_07():
    # frozen from the dense oracle: F' = 25/34, p_success = 17/25
    out, p = recurrence_step(werner(0.7), werner(0.7), "BBPSSW")
    assert abs(out.fidelity - 25 / 34) < 1e-12
    assert abs(p - 0.68) < 1e-12


def test_recurrence_boundary_fixed_point():
    out, _ = recurrence_step(werner(0.5), werner(0.5), "BBPSSW")
    assert abs(out.fidelity - 0.5) < 1e-12


def test_recurrence_monotone_near_boundary():
    for variant in ("BBPSSW", "DEJMPS"):
        for f in (0.52, 0.55, 0.62):
            out, _ = recurrence_step(werner(f), werner(f), variant)
            assert out.fidelity > f, (variant, f)
        for f in (0.40, 0.45, 0.48):
            out, _ = recurrence_step(werner(f), werner(f), variant)
            assert out.fidelity < f, (variant, f)


def test_recurrence_invalid_variant():
    with pytest.raises(BellDiagonalError):
        recurrence_step(perfect_pair(), perfect_pair(), "NOPE")


def test_swap_identities():
    out = swap_pairs(perfect_pair(), perfect_pair())
    assert np.allclose(out.coeffs, (1, 0, 0, 0), atol=1e-15)
    w = werner(0.77)
    assert np.allclose(swap_pairs(w, perfect_pair()).coeffs, w.coeffs, atol=1e-15)
    assert np.allclose(swap_pairs(perfect_pair(), w).coeffs, w.coeffs, atol=1e-15)


def test_swap_werner_09():
    # frozen from the dense oracle: F = 0.81 + 0.01/3 = 61/75
    out = swap_pairs(werner(0.9), werner(0.9))
    assert abs(out.fidelity - 61 / 75) < 1e-12


def test_swap_fidelity_never_exceeds_min_for_werner():
    rng = np.random.default_rng(9)
    for _ in range(50):
        f1, f2 = rng.uniform(0.25, 1.0, size=2)
        out = swap_pairs(werner(f1), werner(f2))
        assert out.fidelity <= min(f1, f2) + 1e-12


def test_golden_maps_match_fresh_oracle():
    packaged = load_golden_maps(refresh=True)
    fresh = generate_golden_maps()
    for name, tensor in fresh.items():
        assert np.max(np.abs(packaged[name] - tensor)) < 1e-12, name


def test_golden_text_roundtrip_and_corruption():
    maps = load_golden_maps()
    text = golden_maps_to_text(maps)
    again = parse_golden_text(text)
    for name in maps:
        assert np.max(np.abs(maps[name] - again[name])) < 1e-12
    with pytest.raises(BellDiagonalError):
        parse_golden_text("0 0 0 1/2\n")
    broken = text.replace("map swap", "map swp", 1)
    with pytest.raises(BellDiagonalError):
        parse_golden_text(broken)


def _dense_recurrence_reference(rho1, rho2, variant):
    """Mixed-state dense reference for one 2->1 round (test-local oracle)."""
    from mbqcomm.pauli import PauliString

    mat = np.kron(rho1.to_dense().mat, rho2.to_dense().mat)
    dm = dense.DensityMatrix(mat)
    if variant == "BBPSSW":
        t1 = rho1.twirl_werner()
        t2 = rho2.twirl_werner()
        dm = dense.DensityMatrix(np.kron(t1.to_dense().mat, t2.to_dense().mat))
    else:
        minus = (dense.I2 - 1j * dense.X) / np.sqrt(2)
        plus = (dense.I2 + 1j * dense.X) / np.sqrt(2)
        for q, u in ((0, minus), (1, plus), (2, minus), (3, plus)):
            dm = dm.apply_unitary(u, [q])
    dm = dm.apply_unitary(dense.CNOT, [0, 2]).apply_unitary(dense.CNOT, [1, 3])
    za = PauliString.single(4, 2, "Z")
    zb = PauliString.single(4, 3, "Z")
    total = np.zeros(4)
    p_succ = 0.0
    for pa, oa, da in dm.measure_pauli(za):
        for pb, ob, db in da.measure_pauli(zb):
            if oa != ob:
                continue
            reduced = db.partial_trace([0, 1])
            coeffs = reduced.bell_coeffs()
            if variant == "BBPSSW":
                r = (1.0 - coeffs[0]) / 3.0
                coeffs = np.array([coeffs[0], r, r, r])
            total += pa * pb * coeffs
            p_succ += pa * pb
    return total / p_succ, p_succ


def test_recurrence_matches_dense_reference_on_random_states():
    rng = np.random.default_rng(10)
    for variant in ("BBPSSW", "DEJMPS"):
        for _ in range(6):
            c1 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
            c2 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
            got, p_got = recurrence_step(c1, c2, variant)
            want, p_want = _dense_recurrence_reference(c1, c2, variant)
            assert abs(p_got - p_want) < 1e-12
            assert np.allclose(got.as_array(), want, atol=1e-12)


def test_swap_matches_dense_reference_on_random_states():
    rng = np.random.default_rng(11)
    for _ in range(8):
        c1 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
        c2 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
        got = swap_pairs(c1, c2)
        dm = dense.DensityMatrix(np.kron(c1.to_dense().mat, c2.to_dense().mat))
        total = np.zeros(4)
        for prob, m, branch in dm.bell_measure(1, 2):
            if branch is None:
                continue
            sigma = dense.PAULI_MATS["IXYZ"[m]]
            corrected = branch.apply_unitary(sigma, [1])
            total += prob * corrected.bell_coeffs()
        assert np.allclose(got.as_array(), total, atol=1e-12)


def test_normalization_preserved():
    rng = np.random.default_rng(12)
    for _ in range(30):
        c1 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
        c2 = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
        out, _p = recurrence_step(c1, c2, "DEJMPS")
        assert abs(sum(out.coeffs) - 1.0) < 1e-12
        out2 = swap_pairs(c1, c2)
        assert abs(sum(out2.coeffs) - 1.0) < 1e-12
        out3 = apply_depolarizing(c1, "A", float(rng.uniform()))
        assert abs(sum(out3.coeffs) - 1.0) < 1e-12


def test_bd_dense_roundtrip():
    rng = np.random.default_rng(13)
    for _ in range(10):
        c = BellDiagonalState(tuple(rng.dirichlet(np.ones(4))))
        assert np.allclose(c.to_dense().bell_coeffs(), c.as_array(), atol=1e-12)
    assert BD_SIGMA_ORDER == (0, 3, 1, 2)
