"""Seeded Monte Carlo sampling of generalized measurements.

Sampling is two-stage, mirroring the probability law: a Bernoulli detection
draw first, then (if detected) a Born draw among the eigenvalues. Randomness
comes from the counter-based Philox generator, keyed by (seed, stream) and
offset per fixed-size trial block, so every block is a pure function of
(seed, stream, block index). Reports are therefore reproducible bit for bit
regardless of how many workers process the blocks.

Every trial consumes exactly two uniform draws.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementOutcomeRecord, fix_phase
from .model import (
    GeneralizedObservable,
    PureState,
    detection_probability,
)

# Trials per RNG counter block; fixed so reports never depend on worker count.
BLOCK_SIZE = 4096
DRAWS_PER_TRIAL = 2

RNG_ALGORITHM = "philox4x64"


@dataclass(frozen=True)
class RngSpec:
    """Deterministic random-stream identity: a (seed, stream) pair.

    Identical specs yield identical sample sequences.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= int(self.stream_id) < 2 ** 64:
            raise ValueError("stream_id must be a nonnegative 64-bit integer")

    def describe(self) -> str:
        """Algorithm identifier recorded in reports."""
        return f"{RNG_ALGORITHM}:seed={self.seed}:stream={self.stream_id}"

    def generator(self, counter: int = 0) -> np.random.Generator:
        """Fresh generator positioned at the given 256-bit counter offset."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def block_generator(self, block: int) -> np.random.Generator:
        """Independent generator for one block of trials."""
        return self.generator(counter=block << 192)


def born_probabilities(gobs: GeneralizedObservable, psi: PureState) -> np.ndarray:
    """Conditional (detected) outcome distribution over the eigenvalues."""
    v = psi.amplitudes
    p = np.array([float(np.vdot(v, proj @ v).real) for proj in gobs.base.projectors])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def predicted_probabilities(gobs: GeneralizedObservable, psi: PureState) -> np.ndarray:
    """Overall outcome distribution, no-registration outcome first."""
    pd = detection_probability(gobs, psi)
    born = born_probabilities(gobs, psi)
    return np.concatenate(([1.0 - pd], pd * born))


def _cumulative(born: np.ndarray) -> np.ndarray:
    cum = np.cumsum(born)
    cum[-1] = 1.0  # kill cumsum roundoff at the top end
    return cum


def _conditional_index(born: np.ndarray, cum: np.ndarray, u: float) -> int:
    k = int(np.searchsorted(cum, u, side="right"))
    if k >= born.size or born[k] <= 0.0:
        # roundoff landed on an empty bin
        k = int(np.argmax(born))
    return k


def _as_generator(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngSpec) else rng


def sample_measurement(gobs: GeneralizedObservable, psi: PureState,
                       rng) -> MeasurementOutcomeRecord:
    """Draw one measurement: detection Bernoulli, then a Born draw if detected.

    ``rng`` is either an :class:`RngSpec` (a fresh generator is derived, so
    the same spec always yields the same record) or a live numpy Generator
    whose state advances by exactly two uniforms. An undetected draw leaves
    the state object untouched; a detected one applies the Lüders update.
    """
    gen = _as_generator(rng)
    pd = detection_probability(gobs, psi)
    born = born_probabilities(gobs, psi)
    u = gen.random(DRAWS_PER_TRIAL)
    if u[0] >= pd:
        return MeasurementOutcomeRecord(
            outcome=gobs.a0, detected=False, pre_state=psi, post_state=psi,
            probability=1.0 - pd)
    k = _conditional_index(born, _cumulative(born), float(u[1]))
    v = gobs.base.projectors[k] @ psi.amplitudes
    post = PureState(fix_phase(v / np.linalg.norm(v)))
    return MeasurementOutcomeRecord(
        outcome=float(gobs.base.eigenvalues[k]), detected=True, pre_state=psi,
        post_state=post, probability=pd * float(born[k]))


def sample_sequence(gobs: GeneralizedObservable, psi: PureState, length: int,
                    rng) -> list[MeasurementOutcomeRecord]:
    """Chain measurements, feeding each post-state into the next draw."""
    if length < 1:
        raise ValueError("length must be at least 1")
    gen = _as_generator(rng)
    records = []
    state = psi
    for _ in range(length):
        record = sample_measurement(gobs, state, gen)
        records.append(record)
        state = record.post_state
    return records


@dataclass(frozen=True, eq=False)
class RunReport:
    """Aggregated frequencies vs predictions for repeated single measurements."""

    outcomes: np.ndarray
    counts: np.ndarray
    predicted: np.ndarray
    trials: int
    rng: str

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if int(counts.sum()) != self.trials:
            raise ValueError("per-outcome counts must sum to the trial count")
        for name in ("outcomes", "counts", "predicted"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.trials

    @property
    def standard_errors(self) -> np.ndarray:
        """Binomial sigma per outcome: sqrt(p (1 - p) / N)."""
        p = self.predicted
        return np.sqrt(p * (1.0 - p) / self.trials)

    @property
    def sigma_deviations(self) -> np.ndarray:
        """|frequency - prediction| in sigma units (inf where sigma is 0 yet off)."""
        diff = np.abs(self.frequencies - self.predicted)
        se = self.standard_errors
        out = np.zeros_like(diff)
        live = se > 0.0
        out[live] = diff[live] / se[live]
        out[~live & (diff > 0.0)] = np.inf
        return out

    @property
    def max_sigma_deviation(self) -> float:
        return float(np.max(self.sigma_deviations))

    def to_dict(self) -> dict:
        """JSON-ready content; non-finite sigma deviations map to None."""
        sigma = [float(s) if np.isfinite(s) else None for s in self.sigma_deviations]
        return {
            "trials": self.trials,
            "rng": self.rng,
            "outcomes": [float(v) for v in self.outcomes],
            "counts": [int(c) for c in self.counts],
            "frequencies": [float(f) for f in self.frequencies],
            "predicted": [float(p) for p in self.predicted],
            "standard_errors": [float(s) for s in self.standard_errors],
            "sigma_deviations": sigma,
        }


def run_experiment(gobs: GeneralizedObservable, psi: PureState, trials: int,
                   rng: RngSpec, workers: int = 1) -> RunReport:
    """Sample ``trials`` independent measurements of the same prepared state.

    Trials are processed in fixed blocks, each with its own counter-offset
    generator, so the report depends only on (scenario, rng, trials) and not
    on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pd = detection_probability(gobs, psi)
    born = born_probabilities(gobs, psi)
    cum = _cumulative(born)
    n_outcomes = born.size + 1
    blocks = range((trials + BLOCK_SIZE - 1) // BLOCK_SIZE)

    def count_block(block: int) -> np.ndarray:
        size = min(BLOCK_SIZE, trials - block * BLOCK_SIZE)
        u = rng.block_generator(block).random((size, DRAWS_PER_TRIAL))
        detected = u[:, 0] < pd
        counts = np.zeros(n_outcomes, dtype=np.int64)
        counts[0] = size - int(detected.sum())
        if counts[0] < size:
            idx = np.searchsorted(cum, u[detected, 1], side="right")
            bad = (idx >= born.size) | (born[np.minimum(idx, born.size - 1)] <= 0.0)
            if bad.any():
                idx = np.where(bad, int(np.argmax(born)), idx)
            counts[1:] = np.bincount(idx, minlength=born.size)
        return counts

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            totals = sum(pool.map(count_block, blocks))
    else:
        totals = sum(count_block(b) for b in blocks)

    return RunReport(
        outcomes=gobs.outcomes,
        counts=totals,
        predicted=predicted_probabilities(gobs, psi),
        trials=trials,
        rng=rng.describe(),
    )
