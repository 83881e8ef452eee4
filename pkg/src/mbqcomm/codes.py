"""Stabilizer code descriptions: repetition codes and the 5-qubit ring code.

Each CodeSpec carries its stabilizer generators, logical operators, an
encoding Clifford (wire 0 = logical qubit, other wires ancilla |0>) and
a syndrome lookup table built by enumeration, never transcribed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from . import gf2
from .pauli import CliffordMap, PauliString
from .tableau import ring_graph


class CodeError(ValueError):
    """Raised for malformed codes or syndrome lookups."""


@dataclass(frozen=True)
class CodeSpec:
    """One logical qubit in n physical qubits."""

    name: str
    n: int
    stabilizers: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    encoder: CliffordMap
    syndrome_table: dict
    correctable_weight: int

    def __post_init__(self):
        for i, g in enumerate(self.stabilizers):
            for h in self.stabilizers[i + 1:]:
                if not g.commutes(h):
                    raise CodeError("stabilizer generators must commute")
            if not self.logical_x.commutes(g) or not self.logical_z.commutes(g):
                raise CodeError("logicals must commute with the stabilizer group")
        if self.logical_x.commutes(self.logical_z):
            raise CodeError("logical X and Z must anticommute")

    def syndrome_of(self, error: PauliString) -> tuple[int, ...]:
        return tuple(0 if error.commutes(g) else 1 for g in self.stabilizers)

    def correctable(self, syndrome: tuple[int, ...]) -> bool:
        entry = self.syndrome_table.get(syndrome)
        return entry is not None and entry.weight <= self.correctable_weight

    def correction_for(self, syndrome: tuple[int, ...]) -> PauliString:
        """Lookup correction; falls back to best-effort minimum weight."""
        entry = self.syndrome_table.get(syndrome)
        if entry is None:
            raise CodeError(f"syndrome {syndrome} missing from lookup table")
        return entry


def _min_weight_table(n: int, stabilizers, candidates) -> dict:
    """Syndrome -> lowest-weight candidate error, ties broken lexically."""
    table: dict = {}
    ranked = sorted(candidates, key=lambda p: (p.weight, str(p)))
    for err in ranked:
        syn = tuple(0 if err.commutes(g) else 1 for g in stabilizers)
        table.setdefault(syn, err)
    return table


def _complete_clifford(partial_x: dict[int, PauliString],
                       partial_z: dict[int, PauliString], n: int) -> CliffordMap:
    """Fill in unconstrained generator images by symplectic completion."""
    known: dict[tuple[str, int], PauliString] = {}
    for k, p in partial_x.items():
        known[("x", k)] = p
    for k, p in partial_z.items():
        known[("z", k)] = p

    def symp_row(p: PauliString) -> np.ndarray:
        row = np.zeros(2 * n, dtype=np.uint8)
        for j in range(n):
            row[j] = p.z_bit(j)       # functional v -> <p, v>
            row[n + j] = p.x_bit(j)
        return row

    order = [("x", k) for k in range(n)] + [("z", k) for k in range(n)]
    for key in order:
        if key in known:
            continue
        kind, k = key
        partner = ("z", k) if kind == "x" else ("x", k)
        rows, rhs = [], []
        for other, img in known.items():
            rows.append(symp_row(img))
            rhs.append(1 if other == partner else 0)
        sol = gf2.solve(np.array(rows), np.array(rhs, dtype=np.uint8))
        if sol is None:
            raise CodeError("symplectic completion failed")
        x = z = 0
        for j in range(n):
            if sol[j]:
                x |= 1 << j
            if sol[n + j]:
                z |= 1 << j
        known[key] = PauliString(n, x, z, 0).unsigned()
    return CliffordMap.from_images(
        [known[("x", k)] for k in range(n)],
        [known[("z", k)] for k in range(n)],
    )


def encoder_from_code(stabilizers, logical_x, logical_z) -> CliffordMap:
    """Clifford taking |x, 0...0> to the codeword |x_L>.

    Wire 0 carries the logical qubit: Z_0 -> logical Z, X_0 -> logical X
    and Z_k -> generator k-1; the remaining images are completed.
    """
    n = logical_x.n
    partial_x = {0: logical_x}
    partial_z = {0: logical_z}
    for k, g in enumerate(stabilizers, start=1):
        partial_z[k] = g
    return _complete_clifford(partial_x, partial_z, n)


def repetition_code(m: int, basis: str = "bit") -> CodeSpec:
    """m-qubit repetition code; corrects up to (m-1)//2 flips.

    basis="bit" protects against X errors (|0_L> = |0...0>);
    basis="phase" is the Hadamard-rotated variant protecting against Z.
    """
    if m < 2:
        raise CodeError("repetition code needs at least 2 qubits")
    if basis not in ("bit", "phase"):
        raise CodeError("basis must be 'bit' or 'phase'")
    stabs = [
        PauliString.single(m, k, "Z") * PauliString.single(m, k + 1, "Z")
        for k in range(m - 1)
    ]
    logical_x = PauliString(m, (1 << m) - 1, 0, 0)  # X...X
    logical_z = PauliString.single(m, 0, "Z")
    # enumerate every X pattern: that is the full correctable error basis
    candidates = [
        PauliString(m, bits, 0, 0) for bits in range(1 << m)
    ]
    if basis == "phase":
        stabs = [_hadamard_all(g) for g in stabs]
        logical_x, logical_z = _hadamard_all(logical_x), _hadamard_all(logical_z)
        candidates = [_hadamard_all(c) for c in candidates]
    table = _min_weight_table(m, stabs, candidates)
    encoder = encoder_from_code(stabs, logical_x, logical_z)
    return CodeSpec(
        name=f"repetition{m}" + ("-phase" if basis == "phase" else ""),
        n=m,
        stabilizers=tuple(stabs),
        logical_x=logical_x,
        logical_z=logical_z,
        encoder=encoder,
        syndrome_table=table,
        correctable_weight=(m - 1) // 2,
    )


def _hadamard_all(p: PauliString) -> PauliString:
    return PauliString(p.n, p.z, p.x, p.phase).unsigned()


def ring5_code() -> CodeSpec:
    """Five-qubit ring (cluster) code correcting any single-qubit error.

    |0_L> is the 5-cycle graph state; |1_L> = Z^(x5) |0_L>. The code
    stabilizers are products of adjacent graph generators, the logical X
    is Z^(x5) and logical Z a single graph generator.
    """
    n = 5
    k_ops = []
    g = ring_graph(n)
    for a in range(n):
        row = PauliString.single(n, a, "X")
        for b in g.neighbors(a):
            row = row * PauliString.single(n, b, "Z")
        k_ops.append(row)
    stabs = [k_ops[i] * k_ops[i + 1] for i in range(4)]
    logical_x = PauliString(n, 0, (1 << n) - 1, 0)  # Z...Z flips 0_L <-> 1_L
    logical_z = k_ops[0]
    singles = [
        PauliString.single(n, q, c) for q in range(n) for c in "XYZ"
    ]
    doubles = [
        a * b for a, b in combinations(singles, 2)
        if (a.x | a.z) & (b.x | b.z) == 0
    ]
    table = _min_weight_table(n, stabs, [PauliString.identity(n)] + singles + doubles)
    syndromes = {tuple(0 if e.commutes(s) else 1 for s in stabs) for e in singles}
    if len(syndromes) != 15 or (0, 0, 0, 0) in syndromes:
        raise CodeError("ring5 single-qubit errors do not have distinct syndromes")
    encoder = encoder_from_code(stabs, logical_x, logical_z)
    return CodeSpec(
        name="ring5",
        n=n,
        stabilizers=tuple(stabs),
        logical_x=logical_x,
        logical_z=logical_z,
        encoder=encoder,
        syndrome_table=table,
        correctable_weight=1,
    )


def all_single_qubit_errors(n: int) -> list[PauliString]:
    return [PauliString.single(n, q, c) for q in range(n) for c in "XYZ"]
