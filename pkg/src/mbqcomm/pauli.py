"""Phased Pauli operators and Clifford maps in the binary symplectic picture.

A Pauli operator on n qubits is stored as two bit vectors (packed into
Python integers, bit j = qubit j) plus a global phase tracked as a power
of i modulo 4:

    P = i^phase * prod_j X_j^{x_j} * prod_j Z_j^{z_j}

With this convention Y = i*X*Z, so the canonical "+Y" has phase 1.
Clifford maps are stored by the images of the generators X_k, Z_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}
_PHASE_STR = {0: "+", 1: "i", 2: "-", 3: "-i"}


class PauliError(ValueError):
    """Raised for malformed Pauli strings or mismatched qubit counts."""


@dataclass(frozen=True)
class PauliString:
    """Phased n-qubit Pauli operator.

    Attributes
    ----------
    n : int
        Number of qubits.
    x, z : int
        Bit-packed X/Z components; bit j refers to qubit j.
    phase : int
        Global phase as a power of i, modulo 4.
    """

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise PauliError("qubit count must be nonnegative")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise PauliError("x/z bits outside qubit range")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """Single-qubit Pauli `letter` on `qubit`, identity elsewhere."""
        if not 0 <= qubit < n:
            raise PauliError(f"qubit {qubit} out of range for n={n}")
        xb, zb = _LETTER_TO_BITS[letter]
        phase = 1 if letter == "Y" else 0
        return cls(n, xb << qubit, zb << qubit, phase)

    @classmethod
    def from_string(cls, text: str) -> "PauliString":
        """Parse text like "XIZ", "-YY" or "i XZ" (qubit 0 leftmost)."""
        s = text.strip().replace(" ", "")
        phase = 0
        for prefix, ph in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if s.startswith(prefix):
                phase = ph
                s = s[len(prefix):]
                break
        if not s or any(c not in _LETTER_TO_BITS for c in s):
            raise PauliError(f"invalid Pauli string {text!r}")
        n = len(s)
        x = z = 0
        for j, c in enumerate(s):
            xb, zb = _LETTER_TO_BITS[c]
            x |= xb << j
            z |= zb << j
            if c == "Y":
                phase += 1
        return cls(n, x, z, phase % 4)

    @classmethod
    def from_letters(cls, letters: Sequence[str], sign: int = 1) -> "PauliString":
        p = cls.from_string("".join(letters))
        return p if sign == 1 else p.negate()

    # -- basic queries -------------------------------------------------

    def x_bit(self, qubit: int) -> int:
        return (self.x >> qubit) & 1

    def z_bit(self, qubit: int) -> int:
        return (self.z >> qubit) & 1

    def letter(self, qubit: int) -> str:
        return _BITS_TO_LETTER[(self.x_bit(qubit), self.z_bit(qubit))]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - self.y_count) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators; raises otherwise."""
        r = (self.phase - self.y_count) % 4
        if r == 0:
            return 1
        if r == 2:
            return -1
        raise PauliError("sign undefined for non-Hermitian phase")

    def support(self) -> list[int]:
        bits = self.x | self.z
        return [j for j in range(self.n) if (bits >> j) & 1]

    # -- algebra -------------------------------------------------------

    def multiply(self, other: "PauliString") -> "PauliString":
        """Phased product self * other."""
        if self.n != other.n:
            raise PauliError("length mismatch in Pauli product")
        # commuting Z^z1 past X^x2 contributes (-1)^{|z1 & x2|}
        extra = 2 * ((self.z & other.x).bit_count() & 1)
        return PauliString(
            self.n,
            self.x ^ other.x,
            self.z ^ other.z,
            (self.phase + other.phase + extra) % 4,
        )

    __mul__ = multiply

    def commutes(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise PauliError("length mismatch in commutator check")
        t = (self.x & other.z).bit_count() + (self.z & other.x).bit_count()
        return t % 2 == 0

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, (self.phase + 2) % 4)

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, phase % 4)

    def unsigned(self) -> "PauliString":
        """Same letters with canonical (+) sign."""
        return PauliString(self.n, self.x, self.z, self.y_count % 4)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Sub-Pauli on the listed qubits (in the given order), phase dropped."""
        x = z = 0
        for i, q in enumerate(qubits):
            x |= self.x_bit(q) << i
            z |= self.z_bit(q) << i
        p = PauliString(len(qubits), x, z, 0)
        return p.unsigned()

    def embed(self, n: int, positions: Sequence[int]) -> "PauliString":
        """Place this Pauli on `positions` of an n-qubit register."""
        if len(positions) != self.n:
            raise PauliError("positions length mismatch")
        x = z = 0
        for i, q in enumerate(positions):
            x |= self.x_bit(i) << q
            z |= self.z_bit(i) << q
        return PauliString(n, x, z, self.phase)

    def __str__(self) -> str:
        letters = "".join(self.letter(j) for j in range(self.n))
        return _PHASE_STR[(self.phase - self.y_count) % 4] + letters

    __repr__ = __str__


def multiply(p: PauliString, q: PauliString) -> PauliString:
    return p.multiply(q)


def commutes(p: PauliString, q: PauliString) -> bool:
    return p.commutes(q)


_SINGLE_GATE_IMAGES = {
    # gate: (image of X, image of Z) as strings on one qubit
    "I": ("+X", "+Z"),
    "H": ("+Z", "+X"),
    "S": ("+Y", "+Z"),
    "SDG": ("-Y", "+Z"),
    "X": ("+X", "-Z"),
    "Y": ("-X", "-Z"),
    "Z": ("-X", "+Z"),
    # sqrt(X) up to phase: used for DEJMPS-style rotations
    "SQX": ("+X", "-Y"),
    "SQXDG": ("+X", "+Y"),
}


@dataclass(frozen=True)
class CliffordMap:
    """Clifford unitary stored by the images of the Pauli generators.

    image_x[k] = C X_k C^dagger and image_z[k] = C Z_k C^dagger, with
    phases tracked so conjugation is exact including signs.
    """

    n: int
    image_x: tuple[PauliString, ...]
    image_z: tuple[PauliString, ...]

    def __post_init__(self):
        if len(self.image_x) != self.n or len(self.image_z) != self.n:
            raise PauliError("image table size mismatch")

    @classmethod
    def identity(cls, n: int) -> "CliffordMap":
        return cls(
            n,
            tuple(PauliString.single(n, k, "X") for k in range(n)),
            tuple(PauliString.single(n, k, "Z") for k in range(n)),
        )

    @classmethod
    def from_images(cls, image_x: Iterable[PauliString], image_z: Iterable[PauliString],
                    validate: bool = True) -> "CliffordMap":
        ix, iz = tuple(image_x), tuple(image_z)
        c = cls(len(ix), ix, iz)
        if validate and not c.is_valid():
            raise PauliError("images do not define a Clifford (symplectic check failed)")
        return c

    def is_valid(self) -> bool:
        imgs = self.image_x + self.image_z
        if any(not p.is_hermitian for p in imgs):
            return False
        for k in range(self.n):
            if self.image_x[k].commutes(self.image_z[k]):
                return False
            for j in range(k + 1, self.n):
                if not self.image_x[k].commutes(self.image_x[j]):
                    return False
                if not self.image_z[k].commutes(self.image_z[j]):
                    return False
            for j in range(self.n):
                if j != k and not self.image_x[k].commutes(self.image_z[j]):
                    return False
        return True

    def conjugate(self, p: PauliString) -> PauliString:
        """Return C p C^dagger."""
        if p.n != self.n:
            raise PauliError("length mismatch in conjugation")
        acc = PauliString(self.n, phase=p.phase)
        for k in range(self.n):
            if p.x_bit(k):
                acc = acc * self.image_x[k]
        for k in range(self.n):
            if p.z_bit(k):
                acc = acc * self.image_z[k]
        return acc

    def compose(self, first: "CliffordMap") -> "CliffordMap":
        """Map equal to applying `first`, then self (self o first)."""
        if first.n != self.n:
            raise PauliError("length mismatch in composition")
        return CliffordMap(
            self.n,
            tuple(self.conjugate(p) for p in first.image_x),
            tuple(self.conjugate(p) for p in first.image_z),
        )

    def __matmul__(self, first: "CliffordMap") -> "CliffordMap":
        return self.compose(first)

    # -- circuit-style construction -----------------------------------

    def then_gate(self, gate: str, *qubits: int) -> "CliffordMap":
        """Return the map with `gate` appended after the current circuit."""
        g = gate_map(self.n, gate, *qubits)
        return g.compose(self)

    def inverse(self) -> "CliffordMap":
        """Inverse Clifford, computed by inverting the image table."""
        # Solve for preimages: express X_k, Z_k in terms of the images.
        n = self.n
        ix, iz = [], []
        for k in range(n):
            ix.append(self._preimage(PauliString.single(n, k, "X")))
            iz.append(self._preimage(PauliString.single(n, k, "Z")))
        return CliffordMap(n, tuple(ix), tuple(iz))

    def _preimage(self, target: PauliString) -> PauliString:
        # The generator combination is fixed by commutation with the images:
        # the coefficient of X_k (resp. Z_k) in the preimage is the
        # anticommutation bit of `target` with image_z[k] (resp. image_x[k]).
        n = self.n
        x = z = 0
        for k in range(n):
            if not target.commutes(self.image_z[k]):
                x |= 1 << k
            if not target.commutes(self.image_x[k]):
                z |= 1 << k
        candidate = PauliString(n, x, z, 0).unsigned()
        image = self.conjugate(candidate)
        if image.x != target.x or image.z != target.z:
            raise PauliError("inverse lookup failed (map not symplectic)")
        diff = (target.phase - target.y_count - (image.phase - image.y_count)) % 4
        return candidate.with_phase((candidate.phase + diff) % 4)


def gate_map(n: int, gate: str, *qubits: int) -> CliffordMap:
    """CliffordMap of a named gate acting on the given qubits of n wires.

    Single-qubit gates: I, H, S, SDG, X, Y, Z, SQX, SQXDG.
    Two-qubit gates: CNOT(control, target), CZ(a, b), SWAP(a, b).
    """
    ident = CliffordMap.identity(n)
    ix, iz = list(ident.image_x), list(ident.image_z)
    gate = gate.upper()
    if gate in _SINGLE_GATE_IMAGES:
        (q,) = qubits
        sx, sz = _SINGLE_GATE_IMAGES[gate]
        ix[q] = _expand_single(n, q, sx)
        iz[q] = _expand_single(n, q, sz)
    elif gate == "CNOT":
        c, t = qubits
        ix[c] = PauliString.single(n, c, "X") * PauliString.single(n, t, "X")
        iz[t] = PauliString.single(n, c, "Z") * PauliString.single(n, t, "Z")
    elif gate == "CZ":
        a, b = qubits
        ix[a] = PauliString.single(n, a, "X") * PauliString.single(n, b, "Z")
        ix[b] = PauliString.single(n, b, "X") * PauliString.single(n, a, "Z")
    elif gate == "SWAP":
        a, b = qubits
        ix[a], ix[b] = ix[b], ix[a]
        iz[a], iz[b] = iz[b], iz[a]
    else:
        raise PauliError(f"unknown gate {gate!r}")
    return CliffordMap(n, tuple(ix), tuple(iz))


def _expand_single(n: int, qubit: int, text: str) -> PauliString:
    p1 = PauliString.from_string(text)
    return p1.embed(n, [qubit])


def circuit_map(n: int, gates: Iterable[tuple]) -> CliffordMap:
    """Compose a gate list [(name, qubits...), ...] applied left to right."""
    c = CliffordMap.identity(n)
    for name, *qs in gates:
        c = c.then_gate(name, *qs)
    return c


def random_clifford(n: int, rng, depth: int | None = None) -> CliffordMap:
    """Random Clifford from a random H/S/CNOT circuit (test utility)."""
    depth = depth if depth is not None else max(12, 6 * n)
    gates = []
    for _ in range(depth):
        kind = rng.integers(0, 3)
        if kind == 0:
            gates.append(("H", int(rng.integers(0, n))))
        elif kind == 1:
            gates.append(("S", int(rng.integers(0, n))))
        elif n >= 2:
            a = int(rng.integers(0, n))
            b = int(rng.integers(0, n - 1))
            b = b if b < a else b + 1
            gates.append(("CNOT", a, b))
        else:
            gates.append(("H", 0))
    return circuit_map(n, gates)


def random_pauli(n: int, rng, allow_identity: bool = True) -> PauliString:
    """Uniformly random Hermitian Pauli (test utility)."""
    while True:
        x = int(rng.integers(0, 1 << n))
        z = int(rng.integers(0, 1 << n))
        if allow_identity or x or z:
            break
    sign = int(rng.integers(0, 2))
    p = PauliString(n, x, z, 0).unsigned()
    return p.negate() if sign else p
