"""Tests for resource construction, merging and teleportation."""

from itertools import product

import numpy as np
import pytest

from mbqcomm import dense
from mbqcomm.pauli import CliffordMap, PauliString, circuit_map, random_clifford
from mbqcomm.resources import (
    LabeledRegister,
    ResourceError,
    cj_state,
    merge,
    premeasure_outputs,
    teleport_in,
)
from mbqcomm.tableau import BellOutcome, StabilizerState, to_graph, is_connected

RNG = np.random.default_rng


def all_outcomes(k):
    for combo in product(range(4), repeat=k):
        yield [BellOutcome.from_index(i) for i in combo]


def random_host_state(n, rng):
    s = StabilizerState.zero_state(n)
    s.apply_clifford(random_clifford(n, rng))
    return s


def test_cj_identity_is_bell_pair():
    spec = cj_state(CliffordMap.identity(1), "id")
    assert spec.state.same_state(
        StabilizerState.from_generators(
            [PauliString.from_string("XX"), PauliString.from_string("ZZ")]
        )
    )
    for i in range(4):
        info = spec.byproduct([BellOutcome.from_index(i)])
        assert str(info.frame) == "+" + "IXYZ"[i]
        assert info.keep


def test_byproduct_table_is_complete():
    spec = cj_state(circuit_map(2, [("CNOT", 0, 1)]), "cnot")
    table = spec.byproduct_table()
    assert len(table) == 16
    assert all(len(k) == 2 for k in table)


def test_resource_invariant_inputs_plus_outputs():
    spec = cj_state(CliffordMap.identity(2), "id2")
    assert len(spec.inputs) + len(spec.outputs) == spec.n
    assert set(spec.inputs).isdisjoint(spec.outputs)


def test_teleport_identity_trivial():
    spec = cj_state(CliffordMap.identity(1), "id")
    host = LabeledRegister.from_state(StabilizerState.plus_state(1), ["psi"])
    res = teleport_in(spec, host, {"in0": "psi"},
                      forced=[BellOutcome.from_index(0)])
    assert str(res.frame) == "+I"
    assert str(host.state.stabs[0]) == "+X"


def test_teleport_through_hadamard_every_outcome():
    spec = cj_state(circuit_map(1, [("H", 0)]), "h")
    rng = RNG(0)
    for _ in range(5):
        base = random_host_state(1, rng)
        want = dense.apply_unitary_vec(base.to_dense(), dense.H, [0])
        for forced in all_outcomes(1):
            host = LabeledRegister.from_state(base.copy(), ["psi"])
            r = teleport_in(spec, host, {"in0": "psi"}, forced=forced,
                            apply_frame=True)
            assert r.branch_probability == 0.25
            assert dense.states_equal_up_to_phase(host.to_dense(), want, 1e-12)


def test_teleport_through_cnot_reproduces_cnot():
    spec = cj_state(circuit_map(2, [("CNOT", 0, 1)]), "cnot")
    rng = RNG(1)
    for _ in range(5):
        base = random_host_state(2, rng)
        want = dense.apply_unitary_vec(base.to_dense(), dense.CNOT, [0, 1])
        for forced in all_outcomes(2):
            host = LabeledRegister.from_state(base.copy(), ["a", "b"])
            r = teleport_in(spec, host, {"in0": "a", "in1": "b"},
                            forced=forced, apply_frame=True)
            assert abs(r.branch_probability - 1 / 16) < 1e-15
            assert dense.states_equal_up_to_phase(host.to_dense(), want, 1e-12)


def test_channel_identity_random_cliffords():
    # teleport_in through cj(C) with frame corrections equals channel C
    rng = RNG(2)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        c = random_clifford(n, rng)
        spec = cj_state(c, "rc")
        base = random_host_state(n, rng)
        for forced in all_outcomes(n):
            host = LabeledRegister.from_state(
                base.copy(), [f"q{k}" for k in range(n)]
            )
            teleport_in(
                spec, host, {f"in{k}": f"q{k}" for k in range(n)},
                forced=forced, apply_frame=True,
            )
            # resulting state must be stabilized by C g C^dagger
            for g in base.stabs:
                img = c.conjugate(g)
                v = host.to_dense()
                assert np.allclose(dense.apply_pauli_vec(img, v), v, atol=1e-10)


def test_teleport_cnot_on_bell_plus_zero_is_ghz_class():
    # host = |phi+> (x) |0>, teleport through cj(CNOT) wired to (pair half, fresh)
    spec = cj_state(circuit_map(2, [("CNOT", 0, 1)]), "cnot")
    gens = [PauliString.from_string(t) for t in ("XXI", "ZZI", "IIZ")]
    base = StabilizerState.from_generators(gens)
    want = base.to_dense()
    want = dense.apply_unitary_vec(want, dense.CNOT, [1, 2])
    for forced in all_outcomes(2):
        host = LabeledRegister.from_state(base.copy(), ["keep", "a", "b"])
        teleport_in(spec, host, {"in0": "a", "in1": "b"}, forced=forced,
                    apply_frame=True,
                    out_labels=["o0", "o1"])
        got = host.to_dense()  # order: keep, o0, o1
        assert dense.states_equal_up_to_phase(got, want, 1e-12)
        spec_g, _ = to_graph(host.state)
        assert is_connected(spec_g)


def test_premeasure_nothing_is_identity():
    spec = cj_state(circuit_map(2, [("CZ", 0, 1)]), "cz")
    same = premeasure_outputs(spec, [])
    assert same.state.same_state(spec.state)
    assert same.outputs == spec.outputs


def test_premeasure_equals_postselected_measurement():
    # pre-measured branch i == post-path branch (i, outcome +1), scaled by 2
    rng = RNG(3)
    for _ in range(6):
        c = random_clifford(2, rng)
        spec = cj_state(c, "rc")
        pre = premeasure_outputs(spec, [("out1", "Z")])
        base = random_host_state(2, rng)
        wiring = {"in0": "a", "in1": "b"}
        m_wire = spec.output_wires[spec.outputs.index("out1")]
        m_op = PauliString.single(spec.n_wires, m_wire, "Z")
        for forced in all_outcomes(2):
            host_pre = LabeledRegister.from_state(base.copy(), ["a", "b"])
            r_pre = teleport_in(pre, host_pre, wiring, forced=forced)
            host_post = LabeledRegister.from_state(base.copy(), ["a", "b"])
            r_post = teleport_in(spec, host_post, wiring, forced=forced)
            sink: list = []
            try:
                host_post.measure(
                    PauliString.single(1, 0, "Z"), ["out1"], force=+1,
                    prob_sink=sink,
                )
                post_prob = r_post.branch_probability * sink[0]
            except Exception:
                post_prob = 0.0
            assert abs(r_pre.branch_probability - 2 * post_prob) < 1e-12
            if post_prob > 0:
                host_post.remove(["out1"])
                assert dense.states_equal_up_to_phase(
                    host_pre.to_dense(), host_post.to_dense(), 1e-12
                )
                # the virtual bit equals the frame commutation flag
                pushed = spec.circuit.conjugate(
                    _sigma_of(forced, spec)
                )
                want_bit = 0 if pushed.commutes(m_op) else 1
                assert r_pre.bits["meas[out1]"] == want_bit


def _sigma_of(forced, spec):
    sigma = PauliString.identity(spec.n_wires)
    for outcome, wire in zip(forced, spec.input_wires):
        sigma = sigma * outcome.byproduct().embed(spec.n_wires, [wire])
    return sigma


def test_premeasure_impossible_projection_raises():
    # measuring X after Z on the same wire is random, hence allowed
    spec = cj_state(CliffordMap.identity(1), "id")
    twice = premeasure_outputs(spec, [("out0", "Z"), ("out0", "X")])
    assert twice.n == 1
    # an ancilla |0> flipped to |1> cannot be projected onto Z=+1
    flip = cj_state(circuit_map(1, [("X", 0)]), "flip", ancilla_init=[(0, "Z")])
    assert flip.inputs == ()
    with pytest.raises(ResourceError):
        premeasure_outputs(flip, [("out0", "Z")])


def test_merge_identity_resources():
    ida = cj_state(CliffordMap.identity(1), "ida")
    idb = cj_state(CliffordMap.identity(1), "idb")
    merged = merge(ida, idb, [("out0", "in0")])
    assert merged.n == 2
    assert len(merged.inputs) == 1 and len(merged.outputs) == 1
    base = StabilizerState.from_generators(
        [PauliString.from_string("XX"), PauliString.from_string("ZZ")]
    )
    assert merged.state.same_state(base)
    for i in range(4):
        info = merged.byproduct([BellOutcome.from_index(i)])
        assert str(info.frame) == "+" + "IXYZ"[i]


def test_merge_matches_sequential_teleport():
    rng = RNG(4)
    for _ in range(5):
        c1 = random_clifford(2, rng)
        c2 = random_clifford(2, rng)
        r1 = cj_state(c1, "r1")
        r2 = cj_state(c2, "r2")
        merged = merge(r1, r2, [("out0", "in0"), ("out1", "in1")])
        assert merged.n == 4
        base = random_host_state(2, rng)
        want = base.copy()
        want.apply_clifford(c2 @ c1)
        for forced in all_outcomes(2):
            host = LabeledRegister.from_state(base.copy(), ["a", "b"])
            teleport_in(
                merged, host,
                {"r1/in0": "a", "r1/in1": "b"}, forced=forced, apply_frame=True,
            )
            assert dense.states_equal_up_to_phase(
                host.to_dense(), want.to_dense(), 1e-12
            )


def test_merge_associativity_as_channels():
    rng = RNG(5)
    c1, c2, c3 = (random_clifford(1, rng) for _ in range(3))
    a = cj_state(c1, "a")
    b = cj_state(c2, "b")
    c = cj_state(c3, "c")
    left = merge(merge(a, b, [("out0", "in0")]), c, [("b/out0", "in0")])
    right = merge(a, merge(b, c, [("out0", "in0")]), [("out0", "b/in0")])
    assert left.state.same_state(right.state)
    for i in range(4):
        fl = left.byproduct([BellOutcome.from_index(i)]).frame
        fr = right.byproduct([BellOutcome.from_index(i)]).frame
        assert fl.x == fr.x and fl.z == fr.z


def test_merge_rejects_bad_connections():
    ida = cj_state(CliffordMap.identity(1), "ida")
    idb = cj_state(CliffordMap.identity(1), "idb")
    with pytest.raises(ResourceError):
        merge(ida, idb, [("nope", "in0")])
    with pytest.raises(ResourceError):
        merge(ida, idb, [("out0", "nope")])


def test_teleport_requires_full_wiring():
    spec = cj_state(CliffordMap.identity(2), "id2")
    host = LabeledRegister.from_state(StabilizerState.zero_state(2), ["a", "b"])
    with pytest.raises(ResourceError):
        teleport_in(spec, host, {"in0": "a"})


def test_labeled_register_bookkeeping():
    reg = LabeledRegister.from_state(StabilizerState.zero_state(3), ["a", "b", "c"])
    reg.relabel("b", "mid")
    assert reg.index("mid") == 1
    reg.remove(["a"])
    assert reg.labels == ["mid", "c"]
    assert reg.n == 2
    with pytest.raises(ResourceError):
        reg.index("a")
    with pytest.raises(ResourceError):
        reg.add(StabilizerState.zero_state(1), ["c"])
