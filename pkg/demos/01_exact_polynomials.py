"""Exact polynomial calculus: the substrate everything else runs on.

All coefficients are rationals, so equality of polynomials is equality of
term dictionaries and every identity below holds with zero tolerance.
"""

from fractions import Fraction

from courantlab import PolyMap, Polynomial, parse

# -- parsing ------------------------------------------------------------------
# The grammar covers sums, products, integer powers, parentheses, rational
# literals like 3/2, and unary minus.  Identifiers must be declared.

p = parse("3/2*x1^2*x2 + 1", ["x1", "x2"])
print("parsed:", p)
print("terms:", dict(p.terms))

# cancellation is forced by the ring structure, not by simplification passes
print("x1*x1 - x1^2 parses to:", parse("x1*x1 - x1^2", ["x1"]))

# printing is canonical, so parse(str(p)) round-trips
print("round trip:", parse(str(p), ["x1", "x2"]) == p)

# -- arithmetic ---------------------------------------------------------------

x1 = parse("x1", ["x1"])
print("\n(x1+1)*(x1-1) =", parse("x1+1", ["x1"]) * parse("x1-1", ["x1"]))
print("x1 + (-x1) =", x1 + (-x1))
print("(1/3) * 3*x1 =", Fraction(1, 3) * (3 * x1))

# -- calculus -----------------------------------------------------------------

q = parse("x1^2*x2", ["x1", "x2"])
print("\nd/dx1 of x1^2*x2 =", q.diff(0))
print("d/dx2 of x1^3     =", parse("x1^3", ["x1", "x2"]).diff(1))
print("eval x1^2+x2 at (2,3) =", parse("x1^2+x2", ["x1", "x2"]).eval([2, 3]))

# composition is exact substitution
outer = parse("y1^2", ["y1"])
inner = PolyMap.from_exprs(["x1+x2"], ["x1", "x2"])
print("(y1^2) o (x1+x2) =", outer.compose(inner))

# -- polynomial maps and Jacobians ---------------------------------------------

cusp = PolyMap.from_exprs(["x1^2", "x1^3"], ["x1"])
print("\nJacobian of x -> (x^2, x^3):")
for row in cusp.jacobian():
    print("  ", [str(entry) for entry in row])

# the product rule is an exact identity, not a numerical statement
a = parse("x1^2 - x2", ["x1", "x2"])
b = parse("x1*x2 + 1", ["x1", "x2"])
lhs = (a * b).diff(0)
rhs = a.diff(0) * b + a * b.diff(0)
print("product rule holds exactly:", lhs == rhs)
