"""Domain model for detection-conditioned measurements.

A standard observable is kept in spectral form (distinct eigenvalues plus
orthogonal projectors). A generalized observable augments it with a
no-registration outcome ``a0`` reported when the measured object escapes
detection, and with a detection model giving the per-state probability of
being detected at all. That probability is event-independent, which is what
makes the construction below consistent.

Outcome events are finite sets of outcome values (the finite-dimensional
stand-in for Borel sets: only the intersection with the outcome set ever
matters). The effect attached to an event is a positive operator between 0
and the identity; its expectation value in the prepared state is the overall
probability of the event. Effects over events form, for each state, a
commutative positive-operator-valued measure, and with detection certain
they collapse to the usual projection-valued measure and Born rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatchError,
    EventContainsNoRegistrationError,
    NotNormalizedError,
    ProbabilityRangeError,
)

NORM_TOL = 1e-10
# Tolerated numerical overshoot before a computed probability is an error.
PROBABILITY_TOL = 1e-9
# Construction-time gate for effects and density operators. Deliberately
# coarser than the 1e-10 the verification suite asserts, so that slightly
# corrupted inputs surface as named check failures instead of exceptions.
OPERATOR_GATE_TOL = 1e-6
# Relative half-width of the window used to match quoted outcome values.
OUTCOME_MATCH_RTOL = 1e-9

#: An outcome event: a finite set of outcome values.
OutcomeEvent = frozenset


def as_event(values) -> frozenset:
    """Coerce a single value or an iterable of values to an outcome event."""
    if isinstance(values, (int, float, np.integer, np.floating)):
        return frozenset((float(values),))
    return frozenset(float(v) for v in values)


def _match_atol(value: float) -> float:
    return OUTCOME_MATCH_RTOL * (1.0 + abs(value))


def _nearest_index(sorted_values: np.ndarray, value: float) -> int | None:
    """Index of the entry matching ``value`` within tolerance, else None."""
    i = int(np.searchsorted(sorted_values, value))
    best, dist = None, np.inf
    for k in (i - 1, i):
        if 0 <= k < sorted_values.size:
            d = abs(float(sorted_values[k]) - value)
            if d < dist:
                best, dist = k, d
    if best is not None and dist <= _match_atol(value):
        return best
    return None


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector in an n-dimensional complex inner-product space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("amplitudes must form a nonempty 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"state norm is {norm!r}, expected 1")
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        """Normalize ``amplitudes`` and wrap them as a state."""
        v = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive Hermitian operator of unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.require_hermitian(linalg.as_matrix(self.matrix), rtol=OPERATOR_GATE_TOL)
        trace = float(np.trace(m).real)
        if abs(trace - 1.0) > OPERATOR_GATE_TOL:
            raise ValueError(f"trace is {trace!r}, expected 1")
        if float(np.linalg.eigvalsh(m)[0]) < -OPERATOR_GATE_TOL:
            raise ValueError("operator is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        """Trace of the squared operator; 1 exactly for pure states."""
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True, eq=False)
class QuantumObservable:
    """Hermitian operator in spectral form."""

    spectral: linalg.SpectralDecomposition

    @classmethod
    def from_matrix(cls, matrix, cluster_tol: float | None = None) -> "QuantumObservable":
        return cls(linalg.hermitian_eigendecompose(matrix, cluster_tol))

    @property
    def dim(self) -> int:
        return self.spectral.dim

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectral.eigenvalues

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return self.spectral.projectors

    def matrix(self) -> np.ndarray:
        return self.spectral.reconstruct()

    def is_nondegenerate(self, tol: float = 1e-6) -> bool:
        """True iff every spectral projector has rank 1."""
        return all(abs(float(np.trace(p).real) - 1.0) <= tol for p in self.projectors)


@dataclass(frozen=True)
class ConstantDetection:
    """State-independent detection probability."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"detection probability must lie in [0, 1], got {self.p!r}")

    def probability(self, psi: PureState) -> float:
        return float(self.p)


@dataclass(frozen=True, eq=False)
class ExpectationDetection:
    """Detection probability <psi|B|psi> for a Hermitian B with spectrum in [0, 1].

    Evaluations are clamped to [0, 1] to absorb roundoff at the spectrum's
    edges.
    """

    operator: np.ndarray

    def __post_init__(self):
        b = linalg.require_hermitian(linalg.as_matrix(self.operator))
        eigs = np.linalg.eigvalsh(b)
        if eigs[0] < -NORM_TOL or eigs[-1] > 1.0 + NORM_TOL:
            raise ValueError(
                f"operator spectrum [{eigs[0]:.3e}, {eigs[-1]:.3e}] must lie in [0, 1]")
        b.flags.writeable = False
        object.__setattr__(self, "operator", b)

    def probability(self, psi: PureState) -> float:
        if psi.dim != self.operator.shape[0]:
            raise DimensionMismatchError(
                f"state dim {psi.dim} != detection operator dim {self.operator.shape[0]}")
        value = float(np.vdot(psi.amplitudes, self.operator @ psi.amplitudes).real)
        return min(max(value, 0.0), 1.0)


DetectionModel = Union[ConstantDetection, ExpectationDetection]


def default_no_registration_outcome(observable: QuantumObservable) -> float:
    """Conventional no-registration value: one below the smallest eigenvalue."""
    return float(observable.eigenvalues[0]) - 1.0


@dataclass(frozen=True, eq=False)
class GeneralizedObservable:
    """Standard observable plus a no-registration outcome and detection model.

    The outcome set is the spectrum extended by ``a0``; ``a0`` must stay
    clear of every eigenvalue by more than both the clustering tolerance and
    the value-matching window, so that event membership is unambiguous.
    """

    base: QuantumObservable
    a0: float
    detection: DetectionModel

    def __post_init__(self):
        a0 = float(self.a0)
        eigs = self.base.eigenvalues
        separation = float(np.min(np.abs(eigs - a0)))
        floor = max(linalg.default_cluster_tol(eigs), 2.0 * _match_atol(a0))
        if separation <= floor:
            raise ValueError(
                f"no-registration outcome {a0!r} clashes with the spectrum "
                f"(separation {separation:.3e}, required > {floor:.3e})")
        object.__setattr__(self, "a0", a0)

    @classmethod
    def from_matrix(cls, matrix, detection: DetectionModel, a0: float | None = None,
                    cluster_tol: float | None = None) -> "GeneralizedObservable":
        base = QuantumObservable.from_matrix(matrix, cluster_tol)
        if a0 is None:
            a0 = default_no_registration_outcome(base)
        return cls(base, a0, detection)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def outcomes(self) -> np.ndarray:
        """All outcome values, the no-registration outcome first."""
        return np.concatenate(([self.a0], self.base.eigenvalues))


def canonical_outcome(gobs: GeneralizedObservable, value: float) -> float | None:
    """The outcome of ``gobs`` matching ``value`` within tolerance, else None."""
    value = float(value)
    if abs(value - gobs.a0) <= _match_atol(value):
        return gobs.a0
    k = _nearest_index(gobs.base.eigenvalues, value)
    if k is not None:
        return float(gobs.base.eigenvalues[k])
    return None


def split_event(gobs: GeneralizedObservable, event) -> tuple[bool, np.ndarray]:
    """Split an event into (contains a0, boolean mask over the eigenvalues).

    Values matching no outcome of the observable contribute nothing.
    """
    values = as_event(event)
    eigs = gobs.base.eigenvalues
    mask = np.zeros(eigs.size, dtype=bool)
    has_a0 = False
    for v in values:
        if abs(v - gobs.a0) <= _match_atol(v):
            has_a0 = True
            continue
        k = _nearest_index(eigs, v)
        if k is not None:
            mask[k] = True
    return has_a0, mask


def _masked_projector(observable: QuantumObservable, mask: np.ndarray) -> np.ndarray:
    out = np.zeros((observable.dim, observable.dim), dtype=complex)
    for selected, p in zip(mask, observable.projectors):
        if selected:
            out += p
    return out


def pv_projector(observable: QuantumObservable, event) -> np.ndarray:
    """Spectral projector of an event: the sum of P_k over eigenvalues in it.

    Event values matching no eigenvalue contribute nothing.
    """
    values = as_event(event)
    eigs = observable.eigenvalues
    mask = np.zeros(eigs.size, dtype=bool)
    for v in values:
        k = _nearest_index(eigs, v)
        if k is not None:
            mask[k] = True
    return _masked_projector(observable, mask)


def clamp_probability(value: float, tol: float = PROBABILITY_TOL) -> float:
    """Clamp roundoff overshoot into [0, 1]; larger excursions are errors."""
    if value < -tol or value > 1.0 + tol:
        raise ProbabilityRangeError(f"probability {value!r} outside [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


def _require_dim(gobs: GeneralizedObservable, psi: PureState) -> None:
    if gobs.dim != psi.dim:
        raise DimensionMismatchError(f"observable dim {gobs.dim} != state dim {psi.dim}")


def to_density(psi: PureState) -> DensityOperator:
    """Rank-1 density operator projecting onto the state."""
    v = psi.amplitudes
    return DensityOperator(np.outer(v, v.conj()))


def detection_probability(gobs: GeneralizedObservable, psi: PureState) -> float:
    """Probability that the measured object is detected at all.

    Depends on the observable and the state, never on the queried event.
    """
    _require_dim(gobs, psi)
    return gobs.detection.probability(psi)


def conditional_probability(gobs: GeneralizedObservable, psi: PureState, event) -> float:
    """Born-rule probability of the event, conditional on detection.

    Defined for events free of the no-registration outcome.
    """
    _require_dim(gobs, psi)
    has_a0, mask = split_event(gobs, event)
    if has_a0:
        raise EventContainsNoRegistrationError(
            "conditional probabilities are defined for detected outcomes only")
    p = _masked_projector(gobs.base, mask)
    return clamp_probability(float(np.vdot(psi.amplitudes, p @ psi.amplitudes).real))


@dataclass(frozen=True, eq=False)
class Effect:
    """Positive operator between 0 and the identity."""

    operator: np.ndarray

    def __post_init__(self):
        op = linalg.require_hermitian(linalg.as_matrix(self.operator), rtol=OPERATOR_GATE_TOL)
        eigs = np.linalg.eigvalsh(op)
        if eigs[0] < -OPERATOR_GATE_TOL or eigs[-1] > 1.0 + OPERATOR_GATE_TOL:
            raise ValueError(
                f"effect spectrum [{eigs[0]:.3e}, {eigs[-1]:.3e}] must lie in [0, 1]")
        op.flags.writeable = False
        object.__setattr__(self, "operator", op)

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    def expectation(self, psi: PureState) -> float:
        """Expectation value in the state, clamped as a probability."""
        if psi.dim != self.dim:
            raise DimensionMismatchError(f"state dim {psi.dim} != effect dim {self.dim}")
        return clamp_probability(
            float(np.vdot(psi.amplitudes, self.operator @ psi.amplitudes).real))


def _effect_operator(gobs: GeneralizedObservable, psi: PureState, event) -> np.ndarray:
    """Raw effect matrix, bypassing the Effect construction gate."""
    _require_dim(gobs, psi)
    has_a0, mask = split_event(gobs, event)
    pd = detection_probability(gobs, psi)
    op = pd * _masked_projector(gobs.base, mask)
    if has_a0:
        op += (1.0 - pd) * np.eye(gobs.dim)
    return op


def effect(gobs: GeneralizedObservable, psi: PureState, event) -> Effect:
    """Effect operator of an event for the given state.

    Without the no-registration outcome this is ``p_d * P(event)``; with it,
    ``(1 - p_d) * I + p_d * P(event minus a0)``.
    """
    return Effect(_effect_operator(gobs, psi, event))


def overall_probability(gobs: GeneralizedObservable, psi: PureState, event) -> float:
    """Overall probability that the measured value falls in the event."""
    return effect(gobs, psi, event).expectation(psi)


def overall_probability_density(gobs: GeneralizedObservable, psi: PureState, event) -> float:
    """Trace-form evaluation Tr[W T(event)]; agrees with the vector form."""
    t = effect(gobs, psi, event).operator
    w = to_density(psi).matrix
    return clamp_probability(float(np.trace(w @ t).real))


@dataclass(frozen=True)
class PovAxiomReport:
    """Worst-case deviations of a state's effect family from the POV axioms.

    All quantities are Frobenius norms except ``positivity``, which is the
    eigenvalue excursion below 0 or above 1.
    """

    normalization: float
    positivity: float
    additivity: float
    commutativity: float
    events_checked: int

    @property
    def max_deviation(self) -> float:
        return max(self.normalization, self.positivity, self.additivity, self.commutativity)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_deviation <= tol

    def as_dict(self) -> dict[str, float]:
        return {
            "normalization": self.normalization,
            "positivity": self.positivity,
            "additivity": self.additivity,
            "commutativity": self.commutativity,
        }


def _event_subsets(outcomes: np.ndarray, rng: np.random.Generator,
                   limit: int = 1024) -> list[np.ndarray]:
    """All subsets of the outcome set, or a random sample when too many."""
    n = outcomes.size
    if 2 ** n <= limit:
        return [outcomes[[bool(bits >> i & 1) for i in range(n)]]
                for bits in range(2 ** n)]
    picks = rng.integers(0, 2, size=(limit, n)).astype(bool)
    return [outcomes[row] for row in picks]


def verify_pov_axioms(gobs: GeneralizedObservable, psi: PureState,
                      partition_trials: int = 50, seed: int = 0) -> PovAxiomReport:
    """Measure how well the state's effect family satisfies the POV axioms.

    Checks normalization on the full outcome set, positivity and the upper
    bound on every enumerated event, additivity over ``partition_trials``
    random disjoint partitions of the outcome set, and pairwise
    commutativity of random event pairs. Deviations are reported, never
    raised, so a corrupted observable shows up as numbers.
    """
    _require_dim(gobs, psi)
    outcomes = gobs.outcomes
    rng = np.random.default_rng(seed)

    def op(values) -> np.ndarray:
        return _effect_operator(gobs, psi, values)

    identity = np.eye(gobs.dim)
    normalization = linalg.frobenius(op(outcomes) - identity)

    subsets = _event_subsets(outcomes, rng)
    positivity = 0.0
    for s in subsets:
        eigs = np.linalg.eigvalsh(op(s))
        positivity = max(positivity, -float(eigs[0]), float(eigs[-1]) - 1.0, 0.0)

    additivity = 0.0
    commutativity = 0.0
    n = outcomes.size
    for _ in range(partition_trials):
        labels = rng.integers(0, rng.integers(1, n + 1), size=n)
        parts = [outcomes[labels == g] for g in np.unique(labels)]
        total = sum(op(part) for part in parts)
        additivity = max(additivity, linalg.frobenius(total - op(outcomes)))
        # disjoint pair whose union need not cover the outcome set
        split = rng.integers(0, 3, size=n)
        x, y = outcomes[split == 0], outcomes[split == 1]
        additivity = max(additivity, linalg.frobenius(
            op(np.concatenate([x, y])) - op(x) - op(y)))
        x = outcomes[rng.integers(0, 2, size=n).astype(bool)]
        y = outcomes[rng.integers(0, 2, size=n).astype(bool)]
        tx, ty = op(x), op(y)
        commutativity = max(commutativity, linalg.frobenius(tx @ ty - ty @ tx))

    return PovAxiomReport(
        normalization=normalization,
        positivity=positivity,
        additivity=additivity,
        commutativity=commutativity,
        events_checked=len(subsets) + 3 * partition_trials,
    )
