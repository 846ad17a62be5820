"""Object-apparatus compound model.

The measured object couples to a pointer whose basis states are "ready / not
detected" (index 0) plus one state per eigenvalue (indices 1..K). The
coupling sends the initial product state into a detected branch entangled
with the pointer plus an undisturbed no-detection branch. Branch weights
derive from the detection probability of the object's state, so the map is
nonlinear in that state (hence nonunitary), yet it preserves the norm for
every input. Tracing out the pointer reproduces the nonselective
post-measurement mixture, which is the consistency content of the model.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateSpectrumError,
    DimensionMismatchError,
    NotNormalizedError,
)
from .model import DensityOperator, GeneralizedObservable, PureState, detection_probability

NORM_TOL = 1e-10


@dataclass(frozen=True)
class ApparatusModel:
    """Pointer-space description: dimension and coupling phases (radians).

    The phases rotate the detected and undetected branch amplitudes; the
    object's reduced state after the coupling is independent of them.
    """

    dim_pointer: int
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.dim_pointer < 2:
            raise ValueError("pointer needs the ready state plus at least one outcome state")

    @classmethod
    def for_observable(cls, gobs: GeneralizedObservable, theta: float = 0.0,
                       phi: float = 0.0) -> "ApparatusModel":
        """Pointer dimension = number of distinct eigenvalues + 1."""
        return cls(gobs.base.eigenvalues.size + 1, float(theta), float(phi))

    def branch_amplitudes(self, detection_probability: float) -> tuple[complex, complex]:
        """(detected, undetected) branch weights; squared moduli sum to 1."""
        alpha = np.sqrt(detection_probability) * cmath.exp(1j * self.theta)
        beta = np.sqrt(1.0 - detection_probability) * cmath.exp(1j * self.phi)
        return alpha, beta


@dataclass(frozen=True, eq=False)
class CompoundState:
    """Unit vector on the object⊗pointer space, object index major."""

    amplitudes: np.ndarray
    dim_object: int
    dim_pointer: int

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size != self.dim_object * self.dim_pointer:
            raise DimensionMismatchError(
                f"amplitude count {v.size} != {self.dim_object} * {self.dim_pointer}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"compound norm is {norm!r}, expected 1")
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)


def couple_and_evolve(gobs: GeneralizedObservable, psi: PureState,
                      apparatus: ApparatusModel) -> CompoundState:
    """Couple the object to the ready pointer and apply the measurement evolution.

    Defined for nondegenerate spectra only, where the pointer registers one
    basis state per eigenvalue. The result is
    ``alpha * sum_k (P_k psi)⊗|k> + beta * psi⊗|0>`` with
    ``|alpha|^2 = p_d`` and ``|beta|^2 = 1 - p_d``; orthogonality of the
    pointer states makes the norm exactly 1.
    """
    if psi.dim != gobs.dim:
        raise DimensionMismatchError(f"state dim {psi.dim} != observable dim {gobs.dim}")
    if apparatus.dim_pointer != gobs.base.eigenvalues.size + 1:
        raise DimensionMismatchError(
            f"pointer dim {apparatus.dim_pointer} != "
            f"{gobs.base.eigenvalues.size} eigenvalues + 1")
    if not gobs.base.is_nondegenerate():
        raise DegenerateSpectrumError(
            "the coupling is defined for nondegenerate spectra only")
    alpha, beta = apparatus.branch_amplitudes(detection_probability(gobs, psi))
    grid = np.zeros((psi.dim, apparatus.dim_pointer), dtype=complex)
    grid[:, 0] = beta * psi.amplitudes
    for j, p in enumerate(gobs.base.projectors):
        grid[:, j + 1] = alpha * (p @ psi.amplitudes)
    return CompoundState(grid.reshape(-1), psi.dim, apparatus.dim_pointer)


def compound_density(cs: CompoundState) -> DensityOperator:
    """Rank-1 density operator of the compound state."""
    v = cs.amplitudes
    return DensityOperator(np.outer(v, v.conj()))


def reduced_object_state(cs: CompoundState, dim_object: int | None = None) -> DensityOperator:
    """Partial trace over the pointer: the object's reduced density operator."""
    if dim_object is None:
        dim_object = cs.dim_object
    if dim_object != cs.dim_object:
        raise DimensionMismatchError(
            f"requested object dim {dim_object} != compound object dim {cs.dim_object}")
    w = np.outer(cs.amplitudes, cs.amplitudes.conj())
    return DensityOperator(linalg.partial_trace_second(w, dim_object, cs.dim_pointer))
