"""The error model: per-particle depolarizing noise, noisy Bell
measurements, noisy resource states and dephasing, in two forms that are
kept interchangeable by tests: trajectory sampling (Pauli insertion on
stabilizer states) and exact channel action (dense oracle).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import DensityMatrix, pauli_transfer_matrix
from .pauli import PauliString
from .tableau import BellOutcome, StabilizerState

_LETTERS = ("I", "X", "Y", "Z")


class NoiseParameterError(ValueError):
    """Raised for noise parameters outside [0, 1]."""


def _check_prob(value: float, name: str):
    if not 0.0 <= value <= 1.0:
        raise NoiseParameterError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class NoiseModel:
    """Error parameters of the simulation.

    p_resource: per-particle depolarizing parameter of resource states.
    q_meas: per-qubit depolarizing parameter of Bell measurements.
    q_channel: per-transmission/storage depolarizing parameter.

    All parameters are "keep" probabilities: 1.0 means noiseless.
    """

    p_resource: float = 1.0
    q_meas: float = 1.0
    q_channel: float = 1.0

    def __post_init__(self):
        _check_prob(self.p_resource, "p_resource")
        _check_prob(self.q_meas, "q_meas")
        _check_prob(self.q_channel, "q_channel")

    @property
    def is_ideal(self) -> bool:
        return self.p_resource == 1.0 and self.q_meas == 1.0 and self.q_channel == 1.0

    def folded(self) -> "NoiseModel":
        """Fold measurement noise into the resource parameter.

        A noisy Bell measurement is equivalent to a perfect one preceded
        by extra depolarization q_meas^2 on the measured resource
        particle, so q_meas can be normalized to 1.
        """
        return NoiseModel(self.p_resource * self.q_meas ** 2, 1.0, self.q_channel)


@dataclass(frozen=True)
class PauliChannel:
    """Single-qubit Pauli-diagonal channel as weights over I, X, Y, Z."""

    weights: tuple[float, float, float, float]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (4,):
            raise NoiseParameterError("need exactly four weights")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise NoiseParameterError("weights must be a probability distribution")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def depolarizing(cls, p: float) -> "PauliChannel":
        """White noise: keep with probability p, else uniformly randomize."""
        _check_prob(p, "p")
        r = (1.0 - p) / 4.0
        return cls((p + r, r, r, r))

    @classmethod
    def dephasing(cls, q: float) -> "PauliChannel":
        """Phase noise M(q) reparameterized as {I: p, Z: 1-p}, p=(1+q)/2."""
        _check_prob(q, "q")
        p = q + (1.0 - q) / 2.0
        return cls((p, 0.0, 0.0, 1.0 - p))

    @property
    def as_dict(self) -> dict[str, float]:
        return dict(zip(_LETTERS, self.weights))

    def sample_letter(self, rng) -> str:
        return _LETTERS[int(rng.choice(4, p=self.weights))]

    def sample(self, n: int, qubit: int, rng) -> PauliString:
        return PauliString.single(n, qubit, self.sample_letter(rng))

    def transfer_matrix(self) -> np.ndarray:
        return pauli_transfer_matrix(self.as_dict)

    def compose(self, other: "PauliChannel") -> "PauliChannel":
        """Sequential composition (Pauli channels commute)."""
        w = np.zeros(4)
        table = _letter_product_table()
        for i, wi in enumerate(self.weights):
            for j, wj in enumerate(other.weights):
                w[table[i][j]] += wi * wj
        return PauliChannel(tuple(w))

    def bd_weights(self) -> np.ndarray:
        """Weights re-indexed in Bell-diagonal order (I, Z, X, Y)."""
        wi, wx, wy, wz = self.weights
        return np.array([wi, wz, wx, wy])


def _letter_product_table():
    # index of sigma_i * sigma_j (sign ignored), sigma order I,X,Y,Z
    base = [PauliString.single(1, 0, c) for c in _LETTERS]
    table = []
    for a in base:
        row = []
        for b in base:
            ab = a * b
            row.append(_LETTERS.index(ab.unsigned().letter(0)))
        table.append(row)
    return table


def depolarize_sample(n: int, qubit: int, p: float, rng) -> PauliString:
    """Sample one Pauli insertion of the depolarizing channel E(p)."""
    return PauliChannel.depolarizing(p).sample(n, qubit, rng)


def apply_sampled_noise(state: StabilizerState, qubits: list[int], p: float, rng):
    """Insert i.i.d. depolarizing-sampled Paulis on the listed qubits."""
    if p >= 1.0:
        return
    for q in qubits:
        ins = depolarize_sample(state.n, q, p, rng)
        if not ins.is_identity:
            state.apply_pauli(ins)


def noisy_bell_measure(state: StabilizerState, a: int, b: int, q: float,
                       rng) -> tuple[BellOutcome, list[int]]:
    """Depolarize both measured qubits with parameter q, then Bell-measure."""
    _check_prob(q, "q")
    apply_sampled_noise(state, [a, b], q, rng)
    return state.bell_measure(a, b, rng)


def noisy_state_trajectory(state: StabilizerState, p: float, rng) -> StabilizerState:
    """One sampled noisy copy of a state: E(p) insertion on every particle."""
    _check_prob(p, "p")
    out = state.copy()
    apply_sampled_noise(out, list(range(out.n)), p, rng)
    return out


def compose_noise(p1: float, p2: float) -> float:
    """E(p1) o E(p2) = E(p1 * p2)."""
    _check_prob(p1, "p1")
    _check_prob(p2, "p2")
    return p1 * p2


@dataclass
class MoveNoiseReport:
    """Result of checking P_ab E_a(ch) rho = P_ab E_b(ch) rho exactly."""

    holds: bool
    max_deviation: float
    counterexample: dict = field(default_factory=dict)


def move_noise_across_bell(channel: PauliChannel, rho: DensityMatrix,
                           a: int, b: int, tol: float = 1e-12) -> MoveNoiseReport:
    """Verify the noise-moving identity on a concrete state.

    Compares the outcome-labeled ensembles (probability and conditional
    state for each of the four Bell outcomes) of noising qubit a versus
    qubit b before the Bell measurement on (a, b).
    """
    max_dev = 0.0
    side_a = rho.apply_pauli_channel(channel.as_dict, a).bell_measure(a, b)
    side_b = rho.apply_pauli_channel(channel.as_dict, b).bell_measure(a, b)
    for (pa, ia, da), (pb, ib, db) in zip(side_a, side_b):
        assert ia == ib
        max_dev = max(max_dev, abs(pa - pb))
        if da is not None and db is not None:
            max_dev = max(max_dev, float(np.max(np.abs(pa * da.mat - pb * db.mat))))
        elif (da is None) != (db is None):
            max_dev = max(max_dev, max(pa, pb))
        if max_dev > tol:
            return MoveNoiseReport(False, max_dev, {"outcome": ia})
    return MoveNoiseReport(True, max_dev)
