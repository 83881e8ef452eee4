"""Minimal measurement-based resource states and teleportation into them.

A resource is the entangled state obtained by applying a Clifford wire
circuit to halves of maximally entangled pairs (plus fixed ancilla
feeds), optionally with some output wires pre-measured in a Pauli basis.
Bell measurements couple host qubits into the inputs; the byproduct
Pauli on the outputs and the virtual outcomes of pre-measured wires are
reconstructed from the Bell outcomes by conjugating through the circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .noise import NoiseModel, apply_sampled_noise
from .pauli import CliffordMap, PauliString
from .tableau import BellOutcome, InconsistentProjection, StabilizerState

_ANCILLA_LETTERS = ("Z", "X")  # |0> and |+>


class ResourceError(ValueError):
    """Raised for malformed resources, wirings or connections."""


@dataclass(frozen=True)
class VirtualMeasurement:
    """A pre-measured Pauli on the circuit's output wire space."""

    name: str
    operator: PauliString  # on the wire space


@dataclass(frozen=True)
class ByproductInfo:
    """Interpretation of one Bell-outcome tuple."""

    keep: bool
    frame: PauliString  # on the outputs, in output order
    bits: dict
    info: dict


@dataclass(frozen=True)
class ResourceSpec:
    """Stabilizer resource state with labeled inputs/outputs.

    The state qubits are ordered inputs first (matching `inputs`), then
    the surviving outputs (matching `outputs`). `circuit` acts on the
    wire space; `input_wires[k]` is the wire fed by input k and
    `output_wires[k]` the wire of output k.
    """

    name: str
    state: StabilizerState
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    circuit: CliffordMap
    input_wires: tuple[int, ...]
    output_wires: tuple[int, ...]
    ancilla_init: tuple[tuple[int, str], ...] = ()
    virtual_meas: tuple[VirtualMeasurement, ...] = ()
    interpretation: Callable[[dict], tuple[bool, dict]] | None = None
    sites: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        if set(self.inputs) & set(self.outputs):
            raise ResourceError("inputs and outputs must be disjoint")
        if len(self.inputs) + len(self.outputs) != self.state.n:
            raise ResourceError("resource must contain exactly inputs + outputs")

    @property
    def n(self) -> int:
        return self.state.n

    @property
    def n_wires(self) -> int:
        return self.circuit.n

    def site_sizes(self) -> dict[str, int]:
        return {site: len(labels) for site, labels in self.sites}

    def qubit_of(self, label: str) -> int:
        if label in self.inputs:
            return self.inputs.index(label)
        if label in self.outputs:
            return len(self.inputs) + self.outputs.index(label)
        raise ResourceError(f"unknown label {label!r}")

    # -- outcome interpretation ---------------------------------------

    def byproduct(self, outcomes: Sequence[BellOutcome]) -> ByproductInfo:
        """Interpret one in-coupling outcome tuple.

        Conjugates the byproduct Pauli through the circuit; its
        restriction to surviving output wires is the frame, and its
        anticommutation with each pre-measured operator flips that
        virtual outcome bit.
        """
        if len(outcomes) != len(self.inputs):
            raise ResourceError("need one Bell outcome per input")
        w = self.n_wires
        sigma = PauliString.identity(w)
        for outcome, wire in zip(outcomes, self.input_wires):
            sigma = sigma * outcome.byproduct().embed(w, [wire])
        pushed = self.circuit.conjugate(sigma)
        frame = pushed.restrict(list(self.output_wires))
        bits = {
            vm.name: 0 if pushed.commutes(vm.operator) else 1
            for vm in self.virtual_meas
        }
        if self.interpretation is not None:
            keep, info = self.interpretation(bits)
        else:
            keep, info = True, {}
        return ByproductInfo(keep, frame, bits, info)

    def byproduct_table(self) -> dict[tuple[int, ...], ByproductInfo]:
        """Full outcome table over all 4^{n_inputs} tuples (small n only)."""
        from itertools import product

        table = {}
        for combo in product(range(4), repeat=len(self.inputs)):
            outs = [BellOutcome.from_index(i) for i in combo]
            table[combo] = self.byproduct(outs)
        return table


def _build_resource(name: str, circuit: CliffordMap,
                    input_wires: Sequence[int],
                    ancilla_init: Sequence[tuple[int, str]],
                    premeasured: Sequence[VirtualMeasurement] = (),
                    interpretation=None,
                    input_labels: Sequence[str] | None = None,
                    output_labels: dict[int, str] | None = None,
                    sites=()) -> ResourceSpec:
    """Construct the resource state for a wire circuit.

    Every non-ancilla wire is entangled with one fresh input qubit, the
    circuit images give the stabilizers on the wire side, pre-measured
    operators are projected onto +1 and their fully determined qubits
    dropped.
    """
    w = circuit.n
    anc = dict(ancilla_init)
    if any(l not in _ANCILLA_LETTERS for l in anc.values()):
        raise ResourceError("ancilla feeds must be 'Z' (|0>) or 'X' (|+>)")
    wires_in = list(input_wires)
    if sorted(wires_in + list(anc)) != list(range(w)):
        raise ResourceError("every wire needs exactly one role (input or ancilla)")
    n_in = len(wires_in)
    n = n_in + w
    gens = []
    for k, wire in enumerate(wires_in):
        for letter, image in (("X", circuit.image_x[wire]), ("Z", circuit.image_z[wire])):
            g = PauliString.single(n, k, letter) * image.embed(n, list(range(n_in, n)))
            gens.append(g)
    for wire, letter in anc.items():
        image = circuit.conjugate(PauliString.single(w, wire, letter))
        gens.append(image.embed(n, list(range(n_in, n))))
    state = StabilizerState.from_generators(gens)

    # project the pre-measured operators onto +1 and drop dead qubits
    drop: list[int] = []
    for vm in premeasured:
        embedded = vm.operator.embed(n, list(range(n_in, n)))
        try:
            state.measure(embedded, force=+1)
        except InconsistentProjection as exc:
            raise ResourceError(
                f"pre-measurement {vm.name} has projection probability zero"
            ) from exc
        for q in vm.operator.support():
            drop.append(n_in + q)
    drop = sorted(set(drop))
    if drop:
        state.remove_qubits(drop)

    surviving = [wire for wire in range(w) if (n_in + wire) not in drop]
    in_labels = tuple(input_labels) if input_labels else tuple(
        f"in{k}" for k in range(n_in)
    )
    out_names = output_labels or {}
    out_labels = tuple(
        out_names.get(wire, f"out{idx}") for idx, wire in enumerate(surviving)
    )
    return ResourceSpec(
        name=name,
        state=state,
        inputs=in_labels,
        outputs=out_labels,
        circuit=circuit,
        input_wires=tuple(wires_in),
        output_wires=tuple(surviving),
        ancilla_init=tuple(sorted(anc.items())),
        virtual_meas=tuple(premeasured),
        interpretation=interpretation,
        sites=tuple(sites),
    )


def cj_state(circuit: CliffordMap, name: str = "cj",
             ancilla_init: Sequence[tuple[int, str]] = (),
             input_labels: Sequence[str] | None = None,
             output_labels: dict[int, str] | None = None,
             sites=()) -> ResourceSpec:
    """Choi-Jamiolkowski resource of a Clifford circuit.

    The circuit acts on halves of maximally entangled pairs; wires
    listed in `ancilla_init` are fed fixed stabilizer states instead and
    get no input qubit.
    """
    anc_wires = {wire for wire, _ in ancilla_init}
    input_wires = [wire for wire in range(circuit.n) if wire not in anc_wires]
    return _build_resource(
        name, circuit, input_wires, ancilla_init,
        input_labels=input_labels, output_labels=output_labels, sites=sites,
    )


def premeasure_outputs(spec: ResourceSpec,
                       measurements: Sequence[tuple[str, str]],
                       name: str | None = None) -> ResourceSpec:
    """Pre-measure listed output qubits in a Pauli basis (+1 branch).

    measurements: list of (output label, Pauli letter). The virtual
    outcome of each dropped qubit stays reconstructable from the
    in-coupling Bell outcomes.
    """
    vms = list(spec.virtual_meas)
    for label, letter in measurements:
        if label not in spec.outputs:
            raise ResourceError(f"{label!r} is not an output of {spec.name}")
        wire = spec.output_wires[spec.outputs.index(label)]
        op = PauliString.single(spec.n_wires, wire, letter)
        vms.append(VirtualMeasurement(f"meas[{label}]", op))
    return _rebuild(spec, vms, name or f"{spec.name}+premeasured",
                    spec.interpretation)


def premeasure_joint(spec: ResourceSpec,
                     measurements: Sequence[tuple[dict[str, str], str]],
                     name: str | None = None) -> ResourceSpec:
    """Pre-measure joint (commuting) Paulis over output qubits (+1 branch).

    measurements: list of ({output label: Pauli letter}, virtual name).
    """
    vms = list(spec.virtual_meas)
    for labels_letters, vm_name in measurements:
        op = PauliString.identity(spec.n_wires)
        for label, letter in labels_letters.items():
            if label not in spec.outputs:
                raise ResourceError(f"{label!r} is not an output of {spec.name}")
            wire = spec.output_wires[spec.outputs.index(label)]
            op = op * PauliString.single(spec.n_wires, wire, letter)
        vms.append(VirtualMeasurement(vm_name, op))
    return _rebuild(spec, vms, name or spec.name, spec.interpretation)


def _rebuild(spec: ResourceSpec, vms, name, interpretation) -> ResourceSpec:
    out_names = dict(zip(spec.output_wires, spec.outputs))
    return _build_resource(
        name, spec.circuit, spec.input_wires, spec.ancilla_init, vms,
        interpretation=interpretation, input_labels=spec.inputs,
        output_labels=out_names, sites=spec.sites,
    )


def product_spec(left: ResourceSpec, right: ResourceSpec, name: str,
                 interpretation=None) -> ResourceSpec:
    """Side-by-side combination of two resources (no connections)."""
    wl, wr = left.n_wires, right.n_wires
    circuit = _tensor_cliffords(left.circuit, right.circuit)
    lift = wl
    input_wires = list(left.input_wires) + [w + lift for w in right.input_wires]
    anc = list(left.ancilla_init) + [(w + lift, l) for w, l in right.ancilla_init]
    vms = [VirtualMeasurement(f"L/{vm.name}", vm.operator.embed(wl + wr, list(range(wl))))
           for vm in left.virtual_meas]
    vms += [VirtualMeasurement(f"R/{vm.name}",
                               vm.operator.embed(wl + wr, list(range(wl, wl + wr))))
            for vm in right.virtual_meas]
    in_labels = [f"L/{l}" for l in left.inputs] + [f"R/{l}" for l in right.inputs]
    out_names = {w: f"L/{l}" for w, l in zip(left.output_wires, left.outputs)}
    out_names.update(
        {w + lift: f"R/{l}" for w, l in zip(right.output_wires, right.outputs)}
    )
    sites = [(f"L/{s}", tuple(f"L/{l}" for l in ls)) for s, ls in left.sites]
    sites += [(f"R/{s}", tuple(f"R/{l}" for l in ls)) for s, ls in right.sites]
    return _build_resource(
        name, circuit, input_wires, anc, vms, interpretation,
        input_labels=in_labels, output_labels=out_names, sites=sites,
    )


def _tensor_cliffords(a: CliffordMap, b: CliffordMap) -> CliffordMap:
    n = a.n + b.n
    left = list(range(a.n))
    right = list(range(a.n, n))
    ix = [p.embed(n, left) for p in a.image_x] + [p.embed(n, right) for p in b.image_x]
    iz = [p.embed(n, left) for p in a.image_z] + [p.embed(n, right) for p in b.image_z]
    return CliffordMap(n, tuple(ix), tuple(iz))


def merge(r1: ResourceSpec, r2: ResourceSpec,
          connections: Sequence[tuple[str, str]],
          name: str | None = None) -> ResourceSpec:
    """Connect outputs of r1 to inputs of r2 by internal Bell measurements.

    The internal measurements are absorbed at preparation time (outcome
    fixed to 0), composing the two circuits into one; teleporting through
    the merged resource equals teleporting through r1 and then r2.
    """
    for o, i in connections:
        if o not in r1.outputs:
            raise ResourceError(f"{o!r} is not an output of {r1.name}")
        if i not in r2.inputs:
            raise ResourceError(f"{i!r} is not an input of {r2.name}")
    if len({o for o, _ in connections}) != len(connections) or \
       len({i for _, i in connections}) != len(connections):
        raise ResourceError("connection endpoints must be distinct")
    if r1.name == r2.name:
        r1 = replace(r1, name=f"{r1.name}#1")
        r2 = replace(r2, name=f"{r2.name}#2")
    w1, w2 = r1.n_wires, r2.n_wires
    w = w1 + w2
    c1 = _tensor_cliffords(r1.circuit, CliffordMap.identity(w2))
    c2 = _tensor_cliffords(CliffordMap.identity(w1), r2.circuit)
    route = CliffordMap.identity(w)
    connected_out_wires = []
    connected_in_wires = []
    for o, i in connections:
        wo = r1.output_wires[r1.outputs.index(o)]
        wi = r2.input_wires[r2.inputs.index(i)] + w1
        from .pauli import gate_map

        route = gate_map(w, "SWAP", wo, wi) @ route
        connected_out_wires.append(wo)
        connected_in_wires.append(wi)
    circuit = c2 @ route @ c1

    input_wires = list(r1.input_wires)
    input_wires += [
        wi + w1 for wi in r2.input_wires
        if (wi + w1) not in connected_in_wires
    ]
    in_labels = [f"{r1.name}/{l}" for l in r1.inputs]
    in_labels += [
        f"{r2.name}/{l}" for l in r2.inputs
        if r2.input_wires[r2.inputs.index(l)] + w1 not in connected_in_wires
    ]
    anc = list(r1.ancilla_init)
    anc += [(wi + w1, l) for wi, l in r2.ancilla_init]
    # a connected r2 input wire becomes a |0> feed whose content parks on
    # the matching r1 output wire; pre-measure that wire away
    vms = [VirtualMeasurement(f"{r1.name}/{vm.name}", vm.operator.embed(w, list(range(w1))))
           for vm in r1.virtual_meas]
    vms += [VirtualMeasurement(f"{r2.name}/{vm.name}",
                               vm.operator.embed(w, list(range(w1, w))))
            for vm in r2.virtual_meas]
    for wo, wi in zip(connected_out_wires, connected_in_wires):
        anc.append((wi, "Z"))
        vms.append(
            VirtualMeasurement(f"link[{wo}]", PauliString.single(w, wo, "Z"))
        )

    interp1, interp2 = r1.interpretation, r2.interpretation

    def interpretation(bits: dict) -> tuple[bool, dict]:
        keep = True
        info: dict = {}
        for tag, interp in ((r1.name, interp1), (r2.name, interp2)):
            if interp is None:
                continue
            local = {
                k.split("/", 1)[1]: v for k, v in bits.items()
                if k.startswith(f"{tag}/")
            }
            k_ok, i_local = interp(local)
            keep = keep and k_ok
            info.update({f"{tag}/{k}": v for k, v in i_local.items()})
        return keep, info

    out_names = {
        w_: f"{r1.name}/{l}" for w_, l in zip(r1.output_wires, r1.outputs)
        if w_ not in connected_out_wires
    }
    out_names.update(
        {w_ + w1: f"{r2.name}/{l}" for w_, l in zip(r2.output_wires, r2.outputs)}
    )
    has_interp = interp1 is not None or interp2 is not None
    return _build_resource(
        name or f"merge({r1.name},{r2.name})", circuit, input_wires, anc, vms,
        interpretation=interpretation if has_interp else None,
        input_labels=in_labels, output_labels=out_names,
    )


# -- host register and teleportation ---------------------------------------


class LabeledRegister:
    """A stabilizer state whose qubits are addressed by symbolic labels.

    Qubit removal after Bell measurements renumbers positions; labels
    stay stable, which is what every protocol layer uses.
    """

    def __init__(self):
        self.state = StabilizerState([], [])
        self.labels: list[str] = []

    @classmethod
    def from_state(cls, state: StabilizerState, labels: Sequence[str]) -> "LabeledRegister":
        reg = cls()
        reg.add(state, labels)
        return reg

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ResourceError(f"no qubit labeled {label!r}") from None

    def add(self, state: StabilizerState, labels: Sequence[str]):
        labels = list(labels)
        if len(labels) != state.n:
            raise ResourceError("label count must match qubit count")
        if set(labels) & set(self.labels):
            raise ResourceError("duplicate labels in register")
        self.state = self.state.tensor(state) if self.labels else state.copy()
        self.labels.extend(labels)

    def embed_pauli(self, p: PauliString, on: Sequence[str]) -> PauliString:
        return p.embed(self.n, [self.index(l) for l in on])

    def apply_pauli(self, p: PauliString, on: Sequence[str]):
        self.state.apply_pauli(self.embed_pauli(p, on))

    def depolarize(self, labels: Sequence[str], p: float, rng):
        apply_sampled_noise(self.state, [self.index(l) for l in labels], p, rng)

    def measure(self, p: PauliString, on: Sequence[str], rng=None, force=None,
                prob_sink: list | None = None) -> int:
        return self.state.measure(self.embed_pauli(p, on), rng, force,
                                  prob_sink=prob_sink)

    def bell_measure(self, la: str, lb: str, rng=None,
                     force: BellOutcome | None = None,
                     prob_sink: list | None = None) -> BellOutcome:
        a, b = self.index(la), self.index(lb)
        outcome, _keep = self.state.bell_measure(a, b, rng, force,
                                                 prob_sink=prob_sink)
        self.labels = [l for l in self.labels if l not in (la, lb)]
        return outcome

    def remove(self, labels: Sequence[str]):
        idx = [self.index(l) for l in labels]
        self.state.remove_qubits(idx)
        self.labels = [l for l in self.labels if l not in set(labels)]

    def relabel(self, old: str, new: str):
        if new in self.labels:
            raise ResourceError(f"label {new!r} already in use")
        self.labels[self.index(old)] = new

    def to_dense(self):
        return self.state.to_dense()

    def copy(self) -> "LabeledRegister":
        reg = LabeledRegister()
        reg.state = self.state.copy()
        reg.labels = list(self.labels)
        return reg


@dataclass
class TeleportResult:
    """Everything observable from one in-coupling round."""

    outcomes: tuple[BellOutcome, ...]
    frame: PauliString  # on resource outputs, in output order
    keep: bool
    bits: dict
    info: dict
    out_labels: tuple[str, ...]
    branch_probability: float = 1.0


def teleport_in(resource: ResourceSpec, host: LabeledRegister,
                wiring: dict[str, str], noise: NoiseModel | None = None,
                rng=None, forced: Sequence[BellOutcome] | None = None,
                out_labels: Sequence[str] | None = None,
                apply_frame: bool = False) -> TeleportResult:
    """Couple host qubits into a resource by Bell measurements.

    wiring maps resource input label -> host label. The resource's
    output qubits join the host register. The byproduct frame is
    recorded (and only physically applied when apply_frame is set).
    """
    noise = noise or NoiseModel()
    if set(wiring) != set(resource.inputs):
        raise ResourceError("wiring must cover exactly the resource inputs")
    res_state = resource.state.copy()
    if noise.p_resource < 1.0:
        if rng is None:
            raise ResourceError("noisy teleport_in requires an rng")
        apply_sampled_noise(res_state, list(range(res_state.n)), noise.p_resource, rng)
    out_labels = tuple(out_labels) if out_labels is not None else resource.outputs
    if len(out_labels) != len(resource.outputs):
        raise ResourceError("out_labels must match the resource outputs")
    scratch = [f"!{resource.name}/{l}" for l in resource.inputs]
    host.add(res_state, scratch + list(out_labels))
    outcomes = []
    sink: list = []
    for k, in_label in enumerate(resource.inputs):
        host_label = wiring[in_label]
        res_label = scratch[k]
        if noise.q_meas < 1.0:
            host.depolarize([host_label, res_label], noise.q_meas, rng)
        force = forced[k] if forced is not None else None
        try:
            outcomes.append(
                host.bell_measure(host_label, res_label, rng, force, prob_sink=sink)
            )
        except InconsistentProjection:
            # forced enumeration hit a zero-probability branch
            return TeleportResult(
                outcomes=tuple(outcomes), frame=PauliString.identity(0),
                keep=False, bits={}, info={}, out_labels=(),
                branch_probability=0.0,
            )
    result = resource.byproduct(outcomes)
    if apply_frame and not result.frame.is_identity and result.keep:
        host.apply_pauli(result.frame, out_labels)
    prob = 1.0
    for p_branch in sink:
        prob *= p_branch
    return TeleportResult(
        outcomes=tuple(outcomes),
        frame=result.frame,
        keep=result.keep,
        bits=result.bits,
        info=result.info,
        out_labels=out_labels,
        branch_probability=prob,
    )
