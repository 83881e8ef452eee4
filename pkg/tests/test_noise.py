"""Tests for the depolarizing error model, both sampled and exact."""

import numpy as np
import pytest

from mbqcomm import dense
from mbqcomm.noise import (
    MoveNoiseReport,
    NoiseModel,
    NoiseParameterError,
    PauliChannel,
    compose_noise,
    depolarize_sample,
    move_noise_across_bell,
    noisy_bell_measure,
    noisy_state_trajectory,
)
from mbqcomm.pauli import PauliString, random_clifford
from mbqcomm.tableau import StabilizerState


def test_noise_model_validation():
    NoiseModel(0.9, 1.0, 0.5)
    with pytest.raises(NoiseParameterError):
        NoiseModel(p_resource=1.2)
    with pytest.raises(NoiseParameterError):
        NoiseModel(q_meas=-0.1)


def test_noise_model_folding():
    m = NoiseModel(p_resource=0.9, q_meas=0.8, q_channel=0.7)
    f = m.folded()
    assert f.q_meas == 1.0
    assert abs(f.p_resource - 0.9 * 0.64) < 1e-15
    assert f.q_channel == 0.7


def test_depolarize_sample_edge_cases():
    rng = np.random.default_rng(0)
    assert all(
        depolarize_sample(1, 0, 1.0, rng).is_identity for _ in range(50)
    )
    counts = {"I": 0, "X": 0, "Y": 0, "Z": 0}
    for _ in range(4000):
        counts[depolarize_sample(1, 0, 0.0, rng).unsigned().letter(0)] += 1
    for c in counts.values():
        assert 800 < c < 1200


def test_depolarize_weights():
    ch = PauliChannel.depolarizing(0.8)
    assert np.allclose(ch.weights, (0.85, 0.05, 0.05, 0.05))


def test_dephasing_reparameterization():
    ch = PauliChannel.dephasing(0.6)
    # p = q + (1-q)/2
    assert np.allclose(ch.weights, (0.8, 0.0, 0.0, 0.2))


def test_sampling_reproduces_exact_channel():
    # average sampled Pauli insertions on a random 2-qubit state vs E(p)
    rng = np.random.default_rng(42)
    n_samples = 100_000
    for p in (0.3, 0.8):
        ch = PauliChannel.depolarizing(p)
        state = StabilizerState.zero_state(2)
        state.apply_clifford(random_clifford(2, rng))
        rho = dense.DensityMatrix.from_vec(state.to_dense())
        counts = rng.multinomial(n_samples, ch.weights)
        avg = np.zeros_like(rho.mat)
        for k, letter in enumerate("IXYZ"):
            m = dense.pauli_matrix(PauliString.single(2, 0, letter))
            avg += (counts[k] / n_samples) * (m @ rho.mat @ m.conj().T)
        exact = rho.apply_pauli_channel(ch.as_dict, 0).mat
        tol = 3.0 * 0.5 / np.sqrt(n_samples)
        assert np.max(np.abs(avg - exact)) < tol


def test_compose_noise_values():
    assert compose_noise(1.0, 0.5) == 0.5
    assert abs(compose_noise(0.9, 0.9) - 0.81) < 1e-15


def test_compose_noise_matches_channel_composition():
    # E(p1) o E(p2) = E(p1 p2) as 4x4 transfer matrices, exactly
    for p1, p2 in [(0.7, 0.6), (1.0, 0.3), (0.0, 0.9), (0.5, 0.5)]:
        lhs = PauliChannel.depolarizing(p1).compose(PauliChannel.depolarizing(p2))
        rhs = PauliChannel.depolarizing(p1 * p2)
        assert np.allclose(lhs.transfer_matrix(), rhs.transfer_matrix(), atol=1e-15)
        assert np.allclose(lhs.weights, rhs.weights, atol=1e-15)


def _phi_plus_state():
    return StabilizerState.from_generators(
        [PauliString.from_string("XX"), PauliString.from_string("ZZ")]
    )


def test_noisy_bell_measure_ideal():
    rng = np.random.default_rng(1)
    for _ in range(30):
        s = _phi_plus_state()
        outcome, _ = noisy_bell_measure(s, 0, 1, 1.0, rng)
        assert outcome.index == 0


def test_noisy_bell_measure_fully_depolarized():
    # q=0: exact channel makes the pair maximally mixed -> uniform outcomes
    rho = dense.DensityMatrix.from_vec(_phi_plus_state().to_dense())
    noised = rho.depolarize(0, 0.0).depolarize(1, 0.0)
    for prob, _i, _ in noised.bell_measure(0, 1):
        assert abs(prob - 0.25) < 1e-12
    rng = np.random.default_rng(2)
    counts = {i: 0 for i in range(4)}
    for _ in range(2000):
        s = _phi_plus_state()
        outcome, _ = noisy_bell_measure(s, 0, 1, 0.0, rng)
        counts[outcome.index] += 1
    assert all(c > 400 for c in counts.values())


def test_noisy_bell_measure_partial_matches_exact_probability():
    q = 0.9
    rho = dense.DensityMatrix.from_vec(_phi_plus_state().to_dense())
    noised = rho.depolarize(0, q).depolarize(1, q)
    exact_p0 = noised.bell_measure(0, 1)[0][0]
    rng = np.random.default_rng(3)
    n = 40_000
    hits = 0
    for _ in range(n):
        s = _phi_plus_state()
        outcome, _ = noisy_bell_measure(s, 0, 1, q, rng)
        hits += outcome.index == 0
    sigma = np.sqrt(exact_p0 * (1 - exact_p0) / n)
    assert abs(hits / n - exact_p0) < 3.5 * sigma


def _ghz3():
    gens = [PauliString.from_string(t) for t in ("XXX", "ZZI", "IZZ")]
    return StabilizerState.from_generators(gens)


def test_noisy_resource_ideal_and_fully_mixed():
    rng = np.random.default_rng(4)
    base = _ghz3()
    traj = noisy_state_trajectory(base, 1.0, rng)
    assert traj.same_state(base)
    # p=0: averaging over the uniform Pauli twirl gives I/2^n
    avg = np.zeros((8, 8), dtype=complex)
    for _ in range(6000):
        t = noisy_state_trajectory(base, 0.0, rng)
        v = t.to_dense()
        avg += np.outer(v, v.conj())
    avg /= 6000
    assert np.max(np.abs(avg - np.eye(8) / 8)) < 0.02


def test_noisy_resource_fidelity_matches_insertion_average():
    # exact expectation over all 4^3 Pauli insertion patterns
    p = 0.85
    base = _ghz3()
    ideal = base.to_dense()
    w = PauliChannel.depolarizing(p).weights
    exact = 0.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                ins = PauliString.from_string("IXYZ"[a] + "IXYZ"[b] + "IXYZ"[c])
                v = dense.apply_pauli_vec(ins, ideal)
                exact += w[a] * w[b] * w[c] * abs(np.vdot(ideal, v)) ** 2
    rng = np.random.default_rng(5)
    n = 30_000
    acc = 0.0
    for _ in range(n):
        t = noisy_state_trajectory(base, p, rng)
        amp = abs(np.vdot(ideal, t.to_dense())) ** 2
        acc += amp
    sigma = np.sqrt(exact * (1 - exact) / n)
    assert abs(acc / n - exact) < 4 * sigma


def test_move_noise_trivially_holds_for_identity():
    rho = dense.DensityMatrix.from_vec(_phi_plus_state().to_dense())
    report = move_noise_across_bell(PauliChannel.depolarizing(1.0), rho, 0, 1)
    assert report.holds and report.max_deviation < 1e-15


def test_move_noise_on_random_stabilizer_states():
    rng = np.random.default_rng(6)
    for _ in range(25):
        s = StabilizerState.zero_state(3)
        s.apply_clifford(random_clifford(3, rng))
        rho = dense.DensityMatrix.from_vec(s.to_dense())
        report = move_noise_across_bell(PauliChannel.depolarizing(0.8), rho, 0, 2)
        assert isinstance(report, MoveNoiseReport)
        assert report.holds, report.counterexample
        assert report.max_deviation < 1e-12


def test_move_noise_on_random_mixed_states_and_channels():
    rng = np.random.default_rng(7)
    for _ in range(10):
        mats = []
        for _ in range(3):
            s = StabilizerState.zero_state(3)
            s.apply_clifford(random_clifford(3, rng))
            v = s.to_dense()
            mats.append(np.outer(v, v.conj()))
        weights = rng.dirichlet(np.ones(3))
        rho = dense.DensityMatrix(sum(w * m for w, m in zip(weights, mats)))
        ch_w = rng.dirichlet(np.ones(4))
        report = move_noise_across_bell(PauliChannel(tuple(ch_w)), rho, 1, 2)
        assert report.holds
        assert report.max_deviation < 1e-12
