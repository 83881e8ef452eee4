"""Named resource constructions: purification, codes, repeater stations.

Every entry is produced by the generic Choi-Jamiolkowski builder plus
pre-measurement and merging; nothing is transcribed from figures.
"""

from __future__ import annotations

from dataclasses import replace

from .codes import CodeSpec, repetition_code, ring5_code
from .pauli import CliffordMap, circuit_map, gate_map
from .resources import (
    ResourceSpec,
    cj_state,
    merge,
    premeasure_joint,
    premeasure_outputs,
    product_spec,
)

EPP_VARIANTS = ("DEJMPS", "BBPSSW")


class CatalogError(ValueError):
    """Raised for unknown catalog entries or bad parameters."""


def epp_site_circuit(rounds: int, role: str, variant: str = "DEJMPS"):
    """Local circuit of one party for `rounds` merged recurrence rounds.

    Wires are pair slots (2^rounds of them); each round rotates the
    active wires (DEJMPS only), then folds the upper half of every block
    into its lower half with CNOTs. Returns (gates, target wires).
    """
    if rounds < 1:
        raise CatalogError("need at least one purification round")
    if role not in ("A", "B"):
        raise CatalogError("role must be 'A' or 'B'")
    if variant.upper() not in EPP_VARIANTS:
        raise CatalogError(f"unknown purification variant {variant!r}")
    n = 1 << rounds
    rot = "SQX" if role == "A" else "SQXDG"
    gates = []
    targets = []
    active = list(range(n))
    for r in range(1, rounds + 1):
        if variant.upper() == "DEJMPS":
            gates.extend((rot, w) for w in active)
        step = 1 << r
        half = 1 << (r - 1)
        new_active = []
        for j in range(0, n, step):
            src, tgt = j, j + half
            gates.append(("CNOT", src, tgt))
            targets.append(tgt)
            new_active.append(src)
        active = new_active
    return gates, targets


def epp_site_resource(rounds: int, role: str, variant: str = "DEJMPS") -> ResourceSpec:
    """One party's purification resource: 2^m inputs, one output."""
    n = 1 << rounds
    gates, targets = epp_site_circuit(rounds, role, variant)
    circuit = circuit_map(n, gates)
    spec = cj_state(circuit, name=f"epp{role}")
    spec = premeasure_outputs(
        spec, [(f"out{t}", "Z") for t in targets], name=f"epp{role}{rounds}"
    )
    return spec


def epp_recurrence(rounds: int, variant: str = "DEJMPS") -> ResourceSpec:
    """Joint two-site recurrence resource (2^m + 1 qubits per site).

    Inputs L/in{k} and R/in{k} take the two halves of pair k; the kept
    pair appears on (L/out0, R/out0). One parity check per target wire:
    keep requires equal virtual outcomes at the two sites.
    """
    n = 1 << rounds
    _gates, targets = epp_site_circuit(rounds, "A", variant)
    site_a = epp_site_resource(rounds, "A", variant)
    site_b = epp_site_resource(rounds, "B", variant)

    def interpretation(bits: dict):
        parities = tuple(
            bits[f"L/meas[out{t}]"] ^ bits[f"R/meas[out{t}]"] for t in targets
        )
        return all(p == 0 for p in parities), {"parities": parities}

    joint = product_spec(site_a, site_b, f"epp_recurrence{rounds}", interpretation)
    sites = (
        ("A", tuple(l for l in joint.inputs + joint.outputs if l.startswith("L/"))),
        ("B", tuple(l for l in joint.inputs + joint.outputs if l.startswith("R/"))),
    )
    return replace(joint, sites=sites)


def code_encode(code: CodeSpec) -> ResourceSpec:
    """Encoding resource: GHZ-type state with 1 input and N block outputs."""
    anc = [(w, "Z") for w in range(1, code.n)]
    return cj_state(
        code.encoder,
        name=f"{code.name}_encode",
        ancilla_init=anc,
        input_labels=["in"],
        output_labels={w: f"b{w}" for w in range(code.n)},
    )


def code_decode_syndrome(code: CodeSpec) -> ResourceSpec:
    """Decode-with-syndrome resource: N block inputs, one data output.

    The ancilla outputs of the inverse encoder are pre-measured in Z;
    their virtual outcomes are exactly the code syndrome.
    """
    dec = code.encoder.inverse()
    out_names = {0: "out"}
    out_names.update({w: f"anc{w}" for w in range(1, code.n)})
    spec = cj_state(
        dec,
        name=f"{code.name}_decode",
        input_labels=[f"b{w}" for w in range(code.n)],
        output_labels=out_names,
    )
    spec = premeasure_outputs(
        spec, [(f"anc{w}", "Z") for w in range(1, code.n)],
        name=f"{code.name}_decode_syndrome",
    )

    def interpretation(bits: dict):
        syndrome = tuple(bits[f"meas[anc{w}]"] for w in range(1, code.n))
        return True, {"syndrome": syndrome}

    return replace(spec, interpretation=interpretation)


def code_correct(code: CodeSpec) -> ResourceSpec:
    """Syndrome readout + re-encoding: the 2N-qubit correction resource."""
    dec = code_decode_syndrome(code)
    enc = code_encode(code)
    spec = merge(dec, enc, [("out", "in")], name=f"{code.name}_correct")

    def interpretation(bits: dict):
        syndrome = tuple(
            bits[f"{dec.name}/meas[anc{w}]"] for w in range(1, code.n)
        )
        return True, {"syndrome": syndrome}

    return replace(spec, interpretation=interpretation)


def code_encode_decode_combined(code: CodeSpec) -> ResourceSpec:
    """Combined encode/syndrome/decode state of N+2 qubits.

    Wire layout: 0..N-1 hold the encoded block, wire N the read-out
    qubit, entangled with the logical qubit before encoding.
    """
    n = code.n
    copy_out = gate_map(n + 1, "CNOT", 0, n)
    enc = _embed_clifford(code.encoder, n + 1, list(range(n)))
    circuit = enc @ copy_out
    anc = [(w, "Z") for w in range(1, n + 1)]
    out_names = {w: f"b{w}" for w in range(n)}
    out_names[n] = "out"
    return cj_state(
        circuit,
        name=f"{code.name}_combined",
        ancilla_init=anc,
        input_labels=["in"],
        output_labels=out_names,
    )


def _embed_clifford(c: CliffordMap, n: int, wires: list[int]) -> CliffordMap:
    ident = CliffordMap.identity(n)
    ix, iz = list(ident.image_x), list(ident.image_z)
    for k, w in enumerate(wires):
        ix[w] = c.image_x[k].embed(n, wires)
        iz[w] = c.image_z[k].embed(n, wires)
    return CliffordMap(n, tuple(ix), tuple(iz))


def repeater_station(rounds: int, variant: str = "DEJMPS") -> ResourceSpec:
    """Input-only station resource: purify left and right, then swap.

    The two purified output particles are virtual (pre-measured as a
    Bell pair), so the resource has 2^(rounds+1) input qubits and no
    outputs; the reconstructed swap outcome is exported as side info.
    """
    left = epp_site_resource(rounds, "B", variant)   # Bob side of left segment
    right = epp_site_resource(rounds, "A", variant)  # Alice side of right segment
    spec = product_spec(left, right, f"station{rounds}")
    spec = premeasure_joint(
        spec,
        [({"L/out0": "X", "R/out0": "X"}, "swap_xx"),
         ({"L/out0": "Z", "R/out0": "Z"}, "swap_zz")],
        name=f"repeater_station{rounds}",
    )
    _gates, targets = epp_site_circuit(rounds, "A", variant)

    def interpretation(bits: dict):
        info = {
            "swap": (bits["swap_xx"], bits["swap_zz"]),
            "left_bits": tuple(bits[f"L/meas[out{t}]"] for t in targets),
            "right_bits": tuple(bits[f"R/meas[out{t}]"] for t in targets),
        }
        return True, info

    return replace(spec, interpretation=interpretation)


_CODE_NAMES = {"ring5": ring5_code}


def code_by_name(name: str) -> CodeSpec:
    """Parse 'ring5', 'repetition3' or 'repetition5-phase' style names."""
    if name in _CODE_NAMES:
        return _CODE_NAMES[name]()
    if name.startswith("repetition"):
        rest = name[len("repetition"):]
        basis = "bit"
        if rest.endswith("-phase"):
            basis = "phase"
            rest = rest[: -len("-phase")]
        try:
            m = int(rest)
        except ValueError:
            raise CatalogError(f"unknown code {name!r}") from None
        return repetition_code(m, basis)
    raise CatalogError(f"unknown code {name!r}")


def catalog(name: str, **params):
    """Named resource/code lookup; the CLI's protocol vocabulary."""
    builders = {
        "epp_recurrence": lambda: epp_recurrence(
            params.get("rounds", 1), params.get("variant", "DEJMPS")
        ),
        "repetition_code": lambda: repetition_code(
            params.get("m", 3), params.get("basis", "bit")
        ),
        "ring5_code": ring5_code,
        "code_encode": lambda: code_encode(_code_param(params)),
        "code_decode_syndrome": lambda: code_decode_syndrome(_code_param(params)),
        "code_correct": lambda: code_correct(_code_param(params)),
        "code_encode_decode_combined": lambda: code_encode_decode_combined(
            _code_param(params)
        ),
        "repeater_station": lambda: repeater_station(
            params.get("rounds", 1), params.get("variant", "DEJMPS")
        ),
    }
    if name not in builders:
        raise CatalogError(f"unknown catalog entry {name!r}")
    return builders[name]()


def _code_param(params) -> CodeSpec:
    code = params.get("code", "ring5")
    if isinstance(code, CodeSpec):
        return code
    return code_by_name(code)
