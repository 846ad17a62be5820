"""Probability rules for measurements that can fail to register.

A generalized observable is a standard observable plus an extra outcome a0
reported when the object is not detected. The overall probability of an
event factorizes into (detection probability) x (Born-rule conditional),
and the event's effect operator packages both pieces.
"""

import numpy as np

from esrsim import (
    ConstantDetection,
    ExpectationDetection,
    GeneralizedObservable,
    PureState,
    conditional_probability,
    detection_probability,
    effect,
    overall_probability,
    overall_probability_density,
    verify_pov_axioms,
)

# A qubit measured along z, detected 80% of the time, a0 = 0 reported otherwise.
gobs = GeneralizedObservable.from_matrix(
    np.diag([1.0, -1.0]), ConstantDetection(0.8), a0=0.0)
psi = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))

print("outcome set (a0 first):", gobs.outcomes)
print("detection probability :", detection_probability(gobs, psi))

print("\nthree kinds of events")
print("  detected event {+1}:      p =", overall_probability(gobs, psi, (1.0,)))
print("  no-registration {a0}:     p =", overall_probability(gobs, psi, (0.0,)))
print("  mixed event {a0, +1}:     p =", overall_probability(gobs, psi, (0.0, 1.0)))
print("  whole outcome set:        p =", overall_probability(gobs, psi, gobs.outcomes))

print("\nfactorization for detected events: overall = detection x conditional")
p_overall = overall_probability(gobs, psi, (1.0,))
p_cond = conditional_probability(gobs, psi, (1.0,))
print(f"  {p_overall:.3f} = {detection_probability(gobs, psi):.3f} x {p_cond:.3f}")

print("\neffect operators (positive, between 0 and I)")
print("  T({+1}) =\n", effect(gobs, psi, (1.0,)).operator.real)
print("  T({a0}) =\n", effect(gobs, psi, (0.0,)).operator.real)

print("\nvector form vs trace form agree:")
print("  <psi|T|psi> =", overall_probability(gobs, psi, (0.0, 1.0)))
print("  Tr[W T]     =", overall_probability_density(gobs, psi, (0.0, 1.0)))

# The effects over all events form a commutative POV measure for this state.
report = verify_pov_axioms(gobs, psi)
print("\nPOV axiom deviations:", report.as_dict())

# Detection may depend on the state: expectation-valued model.
state_dependent = ExpectationDetection(np.diag([0.2, 0.6]))
gobs2 = GeneralizedObservable.from_matrix(np.diag([1.0, -1.0]), state_dependent, a0=0.0)
for amplitudes in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0] / np.sqrt(2.0)):
    state = PureState(np.array(amplitudes))
    print("state", np.round(state.amplitudes.real, 3),
          "-> detection", detection_probability(gobs2, state))

# With certain detection the extra outcome disappears and the Born rule returns.
certain = GeneralizedObservable.from_matrix(np.diag([1.0, -1.0]),
                                            ConstantDetection(1.0), a0=0.0)
print("\ncertain detection: p({a0}) =", overall_probability(certain, psi, (0.0,)),
      " p({+1}) =", overall_probability(certain, psi, (1.0,)))
