"""Post-measurement states: the generalized update rule.

Observing "the value fell in event X" updates the state by applying X's
effect and renormalizing. An undetected object is untouched; a detected one
collapses by the Lüders rule; mixed events interpolate. The same content is
packaged as measurement operators M_0 (no registration) and M_k (outcomes).
"""

import numpy as np

from esrsim import (
    ConstantDetection,
    GeneralizedObservable,
    PureState,
    measurement_operators,
    nonselective_state,
    outcome_probability,
    post_measurement_state_no,
    post_measurement_state_yes,
    state_after_outcome,
)

gobs = GeneralizedObservable.from_matrix(
    np.diag([1.0, -1.0]), ConstantDetection(0.5), a0=0.0)
psi = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))

print("initial state:", np.round(psi.amplitudes.real, 6))

print("\nyes-branch updates")
print("  event {a0}      ->", np.round(
    post_measurement_state_yes(gobs, psi, (0.0,)).amplitudes.real, 6), "(unchanged)")
print("  event {+1}      ->", np.round(
    post_measurement_state_yes(gobs, psi, (1.0,)).amplitudes.real, 6), "(Lüders)")
print("  event {a0, +1}  ->", np.round(
    post_measurement_state_yes(gobs, psi, (0.0, 1.0)).amplitudes.real, 6),
    "(between the two)")

print("\nno-branch = yes-branch on the complement")
print("  no on {+1}      ->", np.round(
    post_measurement_state_no(gobs, psi, (1.0,)).amplitudes.real, 6))

family = measurement_operators(gobs, psi)
print("\nmeasurement operators (no-registration first), p_d = 0.5")
for k, (value, m) in enumerate(zip(family.outcomes, family.operators)):
    label = "a0" if k == 0 else f"{value:+g}"
    print(f"  outcome {label}: probability {outcome_probability(family, k):.3f}")
    print("   ", str(np.round(m.real, 4)).replace("\n", "\n    "))
print("family deviations:", family.deviations())

print("\npost-measurement states per outcome")
for k, value in enumerate(family.outcomes):
    post = state_after_outcome(family, k)
    label = "a0" if k == 0 else f"{value:+g}"
    print(f"  after {label}:", np.round(post.amplitudes.real, 6))

print("\nunread measurement leaves the nonselective mixture")
w = nonselective_state(family)
print(np.round(w.matrix.real, 4))
print("purity:", round(w.purity(), 4), "(< 1: decohered, but only halfway,")
print("since an undetected object keeps its coherence)")

print("\nrepeatability: once +1 is seen, -1 can never follow")
after_plus = state_after_outcome(family, int(np.where(family.outcomes == 1.0)[0][0]))
family_after = measurement_operators(gobs, after_plus)
for k, value in enumerate(family_after.outcomes):
    label = "a0" if k == 0 else f"{value:+g}"
    print(f"  p({label} | after +1) = {outcome_probability(family_after, k):.3f}")
