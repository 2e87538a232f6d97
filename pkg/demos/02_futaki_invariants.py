"""Exact stability invariants from weight data.

The weight-sum polynomial tau_k of an equivariant degeneration determines
the leading coefficient I, the Chow numbers Ch_k, and their limit, the
Futaki invariant.  Everything here is exact rational arithmetic.
"""

from kstab.weights import (
    Geometry,
    I_coefficient,
    WeightSystem,
    chow_k,
    futaki,
    gap,
    induced_weights,
    tau_poly,
)

print("=== the conic degenerating to a pair of lines ===")
ws = WeightSystem(1, (0, 0, -1), Geometry("hypersurface", 2, -1))
tau = tau_poly(ws)
print("tau coefficients (ascending):", tau.coeffs)
print("section counts N(k)+1      :", tau.hilbert, "-> V =", tau.volume)
print("I  =", I_coefficient(tau))
print("Ch_k:", {k: str(chow_k(tau, k)) for k in (1, 2, 5, 10, 50)})
print("Futaki invariant:", futaki(tau), " (positive: the conic resists this degeneration)")

print()
print("=== product configurations have zero Futaki invariant ===")
for a, b in ((1, 0), (3, -2), (7, 7)):
    t = tau_poly(WeightSystem(1, (a, b), Geometry("projective")))
    print(f"weights ({a},{b}): futaki = {futaki(t)}")

print()
print("=== normalized nontrivial systems have I < 0 ===")
for gens, geo in (
    ((0, 1), Geometry("projective")),
    ((0, 1, 1), Geometry("projective")),
    ((1, 1, 0), Geometry("hypersurface", 2, 1)),
):
    ws = WeightSystem(len(gens) - (1 if geo.kind == "projective" else 2), gens, geo)
    print(f"generators {gens}: I = {I_coefficient(tau_poly(ws))}")

print()
print("=== the weight gap scales linearly with the level ===")
ws = WeightSystem(1, (0, 0, -1), Geometry("hypersurface", 2, -1))
for k in (1, 2, 5, 10):
    print(f"k = {k:2d}: gap = {gap(induced_weights(ws, k))}")
