"""Courant algebroid structures on trivial bundles, checked exactly.

A structure is frame data on a trivial bundle of rank k over R^n:

  * anchor: an n x k polynomial matrix A(x); sections act on functions
    through the vector field rho(f) = A(x) f(x),
  * metric: a constant symmetric invertible k x k rational matrix G,
  * structure functions c_ij^h(x): the frame brackets
    [[e_i, e_j]] = sum_h c_ij^h e_h.

The bracket of arbitrary polynomial sections is defined by the two-sided
Leibniz expansion

  [[sum_i f_i e_i, sum_j g_j e_j]] =
      sum_ij ( f_i g_j [[e_i, e_j]] + f_i rho(e_i)(g_j) e_j
               - g_j rho(e_j)(f_i) e_i + G_ij g_j D(f_i) )

where D(lam) = G^-1 A^T grad(lam) is the derived operator, the unique
section with <D(lam), s> = rho(s)(lam).  On the standard structure this
expansion is validated against an independent Cartan-calculus oracle
(`dorfman_bracket`).

Axiom checking is exact.  The three axioms are multilinear over R in their
section slots, so verifying them on every tuple drawn from the family of
monomial-coefficient frame sections up to a degree cap certifies them for
all sections of coefficient degree up to that cap.  The checker does this
without enumerating tuples: each open slot is filled with one generating
section whose basis summands are tagged by powers of a fresh inert
variable.  Distinct tuples land on distinct tag monomials, which cannot
cancel, so a single polynomial identity per axiom is equivalent to the full
enumeration, and a nonzero term decodes back into an explicit witness
tuple.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .bundles import LinearSubspace, Section, TrivialBundle
from .polyexpr import Polynomial, PolyMap, monomials_up_to

__all__ = [
    "CourantStructure",
    "standard_structure",
    "scaled_structure",
    "product_structure",
    "dorfman_bracket",
    "vf_bracket",
    "d_function",
    "d_oneform",
    "interior_oneform",
    "interior_twoform",
    "lie_derivative_oneform",
    "AxiomReport",
    "check_axioms",
    "LeibnizReport",
    "check_leibniz",
    "dirac_check",
    "random_section",
    "random_polynomial",
]


class CourantStructure:
    """Frame presentation (anchor, metric, structure functions) of a
    Courant algebroid structure on a trivial bundle."""

    __slots__ = ("bundle", "anchor", "metric", "structure_functions",
                 "metric_inverse", "_dual_anchor")

    def __init__(self, bundle: TrivialBundle, anchor, metric, structure_functions=None):
        n, k = bundle.base_dim, bundle.rank
        rows = [list(r) for r in anchor]
        if len(rows) != n or any(len(r) != k for r in rows):
            raise ValueError(f"anchor must be {n} x {k}")
        rows = [
            [p if isinstance(p, Polynomial) else Polynomial.constant(n, p) for p in r]
            for r in rows
        ]
        for r in rows:
            for p in r:
                if p.num_vars != n:
                    raise ValueError("anchor entries must use the base variables")
        g = linalg.mat(metric)
        if len(g) != k or any(len(r) != k for r in g):
            raise ValueError(f"metric must be {k} x {k}")
        if not linalg.is_symmetric(g):
            raise ValueError("metric must be symmetric")
        if k and linalg.det(g) == 0:
            raise ValueError("metric must have nonzero determinant")
        c: dict[tuple[int, int, int], Polynomial] = {}
        for (i, j, h), p in (structure_functions or {}).items():
            if not (0 <= i < k and 0 <= j < k and 0 <= h < k):
                raise ValueError(f"structure function index {(i, j, h)} out of range")
            if not isinstance(p, Polynomial):
                p = Polynomial.constant(n, p)
            if p.num_vars != n:
                raise ValueError("structure functions must use the base variables")
            if not p.is_zero():
                c[(i, j, h)] = p
        object.__setattr__(self, "bundle", bundle)
        object.__setattr__(self, "anchor", rows)
        object.__setattr__(self, "metric", g)
        object.__setattr__(self, "structure_functions", c)
        object.__setattr__(self, "metric_inverse", linalg.inverse(g) if k else [])
        # rows of G^-1 A^T: the derived operator D(lam)_h = sum_a dual[h][a] d_a lam
        dual = linalg.pmat_mul(
            linalg.pmat_constant(self.metric_inverse, n),
            linalg.pmat_transpose(rows) if rows else [[] for _ in range(k)],
        ) if k else []
        object.__setattr__(self, "_dual_anchor", dual)

    def __setattr__(self, name, value):
        raise AttributeError("CourantStructure is immutable")

    def __eq__(self, other):
        if not isinstance(other, CourantStructure):
            return NotImplemented
        return (
            self.bundle == other.bundle
            and self.anchor == other.anchor
            and self.metric == other.metric
            and self.structure_functions == other.structure_functions
        )

    def __repr__(self):
        return (
            f"CourantStructure({self.bundle.label}, rank {self.bundle.rank} "
            f"over R^{self.bundle.base_dim})"
        )

    # -- the triple (rho, <.,.>, [[.,.]]) ---------------------------------

    def pairing(self, f: Section, g: Section) -> Polynomial:
        """<f, g>(x) = f(x)^T G g(x), exact."""
        self._check_section(f)
        self._check_section(g)
        n = self.bundle.base_dim
        acc = Polynomial(n)
        for i, fi in enumerate(f):
            if fi.is_zero():
                continue
            for j, gj in enumerate(g):
                gij = self.metric[i][j]
                if gij and not gj.is_zero():
                    acc = acc + fi * gj * gij
        return acc

    def anchor_field(self, f: Section) -> PolyMap:
        """The vector field rho(f) = A(x) f(x) on the base."""
        self._check_section(f)
        return PolyMap(
            self.bundle.base_dim,
            linalg.pmat_vec(
                self.anchor, list(f.coeffs), num_vars=self.bundle.base_dim
            ),
        )

    def anchor_apply(self, f: Section, fn: Polynomial) -> Polynomial:
        """rho(f) acting as a derivation on a base function."""
        self._check_section(f)
        n = self.bundle.base_dim
        acc = Polynomial(n)
        field = self.anchor_field(f)
        for a in range(n):
            if not field[a].is_zero():
                acc = acc + field[a] * fn.diff(a)
        return acc

    def derived_operator(self, fn: Polynomial) -> Section:
        """D(fn): the unique section with <D(fn), s> = rho(s)(fn)."""
        n, k = self.bundle.base_dim, self.bundle.rank
        if fn.num_vars != n:
            raise ValueError("function must use the base variables")
        grad = fn.gradient()
        comps = []
        for h in range(k):
            acc = Polynomial(n)
            for a in range(n):
                entry = self._dual_anchor[h][a]
                if not (entry.is_zero() or grad[a].is_zero()):
                    acc = acc + entry * grad[a]
            comps.append(acc)
        return Section(self.bundle, PolyMap(n, comps))

    def frame_bracket(self, i: int, j: int) -> Section:
        """[[e_i, e_j]] = sum_h c_ij^h e_h."""
        n, k = self.bundle.base_dim, self.bundle.rank
        comps = [Polynomial(n)] * k
        for h in range(k):
            p = self.structure_functions.get((i, j, h))
            if p is not None:
                comps[h] = p
        return Section(self.bundle, PolyMap(n, comps))

    def bracket(self, f: Section, g: Section) -> Section:
        """The bracket of arbitrary sections via the Leibniz expansion."""
        self._check_section(f)
        self._check_section(g)
        n, k = self.bundle.base_dim, self.bundle.rank
        out = [Polynomial(n) for _ in range(k)]
        df = [[fi.diff(a) for a in range(n)] for fi in f]
        dg = [[gj.diff(a) for a in range(n)] for gj in g]
        for i, fi in enumerate(f):
            fi_zero = fi.is_zero()
            for j, gj in enumerate(g):
                gj_zero = gj.is_zero()
                if fi_zero and gj_zero:
                    continue
                if not fi_zero and not gj_zero:
                    prod = fi * gj
                    for h in range(k):
                        c = self.structure_functions.get((i, j, h))
                        if c is not None:
                            out[h] = out[h] + prod * c
                if not fi_zero:
                    # f_i rho(e_i)(g_j) e_j
                    acc = Polynomial(n)
                    for a in range(n):
                        entry = self.anchor[a][i]
                        if not (entry.is_zero() or dg[j][a].is_zero()):
                            acc = acc + entry * dg[j][a]
                    if not acc.is_zero():
                        out[j] = out[j] + fi * acc
                if not gj_zero:
                    # - g_j rho(e_j)(f_i) e_i
                    acc = Polynomial(n)
                    for a in range(n):
                        entry = self.anchor[a][j]
                        if not (entry.is_zero() or df[i][a].is_zero()):
                            acc = acc + entry * df[i][a]
                    if not acc.is_zero():
                        out[i] = out[i] - gj * acc
        # sum_ij G_ij g_j D(f_i)
        for i, fi in enumerate(f):
            if fi.is_zero():
                continue
            s = Polynomial(n)
            for j, gj in enumerate(g):
                gij = self.metric[i][j]
                if gij and not gj.is_zero():
                    s = s + gj * gij
            if s.is_zero():
                continue
            for h in range(k):
                acc = Polynomial(n)
                for a in range(n):
                    entry = self._dual_anchor[h][a]
                    if not (entry.is_zero() or df[i][a].is_zero()):
                        acc = acc + entry * df[i][a]
                if not acc.is_zero():
                    out[h] = out[h] + s * acc
        return Section(self.bundle, PolyMap(n, out))

    def _check_section(self, f: Section):
        if f.bundle != self.bundle:
            raise ValueError("section does not live on this structure's bundle")


# -- constructors -------------------------------------------------------------


def standard_structure(n: int) -> CourantStructure:
    """The standard structure on TM (+) T*M over R^n.

    Anchor [I | 0], hyperbolic pairing <(v,p),(v',p')> = p(v') + p'(v),
    vanishing frame brackets; the Dorfman bracket arises from the Leibniz
    expansion (see `dorfman_bracket` for the independent route).
    """
    bundle = TrivialBundle(n, 2 * n, label=f"P(R^{n})")
    anchor = [
        [Polynomial.constant(n, int(i == a)) for i in range(2 * n)]
        for a in range(n)
    ]
    metric = [
        [Fraction(int(abs(i - j) == n)) for j in range(2 * n)]
        for i in range(2 * n)
    ]
    return CourantStructure(bundle, anchor, metric)


def scaled_structure(base: CourantStructure, lam) -> CourantStructure:
    """Same anchor and brackets, metric scaled by a nonzero rational."""
    lam = Fraction(lam)
    if lam == 0:
        raise ValueError("metric scale must be nonzero")
    return CourantStructure(
        base.bundle,
        base.anchor,
        linalg.mat_scale(base.metric, lam),
        base.structure_functions,
    )


def product_structure(
    s1: CourantStructure, s2: CourantStructure, flip: bool = False
) -> CourantStructure:
    """Block structure on the product base with metric diag(G1, +-G2).

    With flip=True the second metric is negated, which is the product used
    to test graphs of morphisms for isotropy.
    """
    n1, k1 = s1.bundle.base_dim, s1.bundle.rank
    n2, k2 = s2.bundle.base_dim, s2.bundle.rank
    n, k = n1 + n2, k1 + k2
    bundle = TrivialBundle(n, k, label=f"{s1.bundle.label}x{s2.bundle.label}")
    zero = Polynomial(n)
    anchor = [[zero] * k for _ in range(n)]
    for a in range(n1):
        for i in range(k1):
            anchor[a][i] = s1.anchor[a][i].lift(n, 0)
    for a in range(n2):
        for i in range(k2):
            anchor[n1 + a][k1 + i] = s2.anchor[a][i].lift(n, n1)
    sign = Fraction(-1 if flip else 1)
    metric = linalg.zeros(k, k)
    for i in range(k1):
        for j in range(k1):
            metric[i][j] = s1.metric[i][j]
    for i in range(k2):
        for j in range(k2):
            metric[k1 + i][k1 + j] = sign * s2.metric[i][j]
    c: dict[tuple[int, int, int], Polynomial] = {}
    for (i, j, h), p in s1.structure_functions.items():
        c[(i, j, h)] = p.lift(n, 0)
    for (i, j, h), p in s2.structure_functions.items():
        c[(k1 + i, k1 + j, k1 + h)] = p.lift(n, n1)
    return CourantStructure(bundle, anchor, metric, c)


def lift_structure(s: CourantStructure, extra: int) -> CourantStructure:
    """The same structure over a base with `extra` inert variables appended.

    The anchor gains zero rows for the new variables, so nothing ever
    differentiates along them: coefficients may mention them as formal
    constants.  Used by the exact certification sweeps.
    """
    n, k = s.bundle.base_dim, s.bundle.rank
    nn = n + extra
    bundle = TrivialBundle(nn, k, label=s.bundle.label)
    anchor = [[p.lift(nn, 0) for p in row] for row in s.anchor]
    anchor += [[Polynomial(nn)] * k for _ in range(extra)]
    c = {key: p.lift(nn, 0) for key, p in s.structure_functions.items()}
    return CourantStructure(bundle, anchor, s.metric, c)


# -- Cartan calculus on R^n: the independent oracle for the standard bracket --


def vf_bracket(x: Sequence[Polynomial], y: Sequence[Polynomial]) -> list[Polynomial]:
    """Lie bracket of vector fields: [X,Y]_j = sum_i X_i d_i Y_j - Y_i d_i X_j."""
    n = len(x)
    out = []
    for j in range(n):
        acc = Polynomial(n)
        for i in range(n):
            acc = acc + x[i] * y[j].diff(i) - y[i] * x[j].diff(i)
        out.append(acc)
    return out


def d_function(fn: Polynomial) -> list[Polynomial]:
    """Exterior derivative of a function, as one-form components."""
    return fn.gradient()


def d_oneform(alpha: Sequence[Polynomial]) -> list[list[Polynomial]]:
    """Exterior derivative of a one-form: (d alpha)_ij = d_i a_j - d_j a_i."""
    n = len(alpha)
    return [[alpha[j].diff(i) - alpha[i].diff(j) for j in range(n)] for i in range(n)]


def interior_oneform(x: Sequence[Polynomial], alpha: Sequence[Polynomial]) -> Polynomial:
    """iota_X alpha = sum_i X_i a_i."""
    n = len(x)
    acc = Polynomial(n)
    for xi, ai in zip(x, alpha):
        acc = acc + xi * ai
    return acc


def interior_twoform(x: Sequence[Polynomial], omega) -> list[Polynomial]:
    """(iota_X omega)_j = sum_i X_i omega_ij."""
    n = len(x)
    out = []
    for j in range(n):
        acc = Polynomial(n)
        for i in range(n):
            acc = acc + x[i] * omega[i][j]
        out.append(acc)
    return out


def lie_derivative_oneform(
    x: Sequence[Polynomial], alpha: Sequence[Polynomial]
) -> list[Polynomial]:
    """Cartan's formula: L_X alpha = iota_X d(alpha) + d(iota_X alpha)."""
    contracted = interior_twoform(x, d_oneform(alpha))
    exact_part = d_function(interior_oneform(x, alpha))
    return [a + b for a, b in zip(contracted, exact_part)]


def dorfman_bracket(f: Section, g: Section) -> Section:
    """The Dorfman bracket on TM (+) T*M by explicit Cartan calculus.

    [[(X, alpha), (Y, beta)]] = ([X, Y], L_X beta - iota_Y d(alpha)).
    Sections are split into the first n (vector) and last n (covector)
    components.  This is computed step by step from the Cartan operators and
    never calls the structure-function expansion; it is the oracle the
    general bracket is tested against.
    """
    bundle = f.bundle
    if g.bundle != bundle or bundle.rank != 2 * bundle.base_dim:
        raise ValueError("dorfman_bracket needs two sections of TM (+) T*M")
    n = bundle.base_dim
    x, alpha = list(f)[:n], list(f)[n:]
    y, beta = list(g)[:n], list(g)[n:]
    vec = vf_bracket(x, y)
    lie = lie_derivative_oneform(x, beta)
    contraction = interior_twoform(y, d_oneform(alpha))
    form = [a - b for a, b in zip(lie, contraction)]
    return Section(bundle, PolyMap(n, vec + form))


# -- randomized sections -------------------------------------------------------


_COEFF_POOL = [
    Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(3),
    Fraction(-3), Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(2, 3),
]


def random_polynomial(rng: random.Random, num_vars: int, degree: int,
                      terms: int = 3) -> Polynomial:
    monos = monomials_up_to(num_vars, degree)
    chosen = {}
    for _ in range(terms):
        chosen[rng.choice(monos)] = rng.choice(_COEFF_POOL)
    return Polynomial(num_vars, chosen)


def random_section(rng: random.Random, bundle: TrivialBundle, degree: int,
                   terms: int = 2) -> Section:
    comps = [
        random_polynomial(rng, bundle.base_dim, degree, terms)
        for _ in range(bundle.rank)
    ]
    return Section(bundle, PolyMap(bundle.base_dim, comps))


# -- tagged generating sections -------------------------------------------------


def monomial_frame_basis(bundle: TrivialBundle, degree_cap: int):
    """All monomial-coefficient frame sections x^alpha e_i, deg <= cap."""
    monos = monomials_up_to(bundle.base_dim, degree_cap)
    return [(i, alpha) for i in range(bundle.rank) for alpha in monos]


def tagged_generating_section(
    bundle: TrivialBundle, degree_cap: int, extra: int, tag_var: int
) -> Section:
    """One section over the lifted base encoding the whole monomial family.

    Component i is sum_a t^(i*M + a) x^alpha_a where t is the tag variable;
    an R-multilinear identity evaluated on such sections holds iff it holds
    on every tuple of family members, since distinct tuples produce distinct
    tag monomials.
    """
    n, k = bundle.base_dim, bundle.rank
    nn = n + extra
    if not n <= tag_var < nn:
        raise ValueError("tag variable must be one of the appended variables")
    monos = monomials_up_to(n, degree_cap)
    big = TrivialBundle(nn, k, label=bundle.label)
    comps = []
    for i in range(k):
        terms = {}
        for a, alpha in enumerate(monos):
            exps = [0] * nn
            exps[:n] = alpha
            exps[tag_var] = i * len(monos) + a
            terms[tuple(exps)] = Fraction(1)
        comps.append(Polynomial(nn, terms))
    return Section(big, PolyMap(nn, comps))


def decode_tag(bundle: TrivialBundle, degree_cap: int, tag_exponent: int) -> Section:
    """Rebuild the family member a tag exponent refers to."""
    monos = monomials_up_to(bundle.base_dim, degree_cap)
    i, a = divmod(tag_exponent, len(monos))
    return Section.frame(
        bundle, i, Polynomial.monomial(bundle.base_dim, monos[a])
    )


# -- fast packed-exponent kernel for the certification sweep -------------------

# Exponents are packed into one int, eight bits per variable (x variables
# first, then tag variables).  Products add keys; only x variables are ever
# differentiated.  Degree budget per variable is 255, far above anything the
# sweeps produce; tag exponents are bounded by the family size, checked below.

_SHIFT = 8
_MASK = (1 << _SHIFT) - 1


def _pack(exps) -> int:
    key = 0
    for v, e in enumerate(exps):
        key |= e << (_SHIFT * v)
    return key


def _unpack(key: int, num_vars: int) -> tuple[int, ...]:
    return tuple((key >> (_SHIFT * v)) & _MASK for v in range(num_vars))


def _fp(poly: Polynomial) -> dict:
    out = {}
    for exps, coeff in poly.terms.items():
        out[_pack(exps)] = int(coeff) if coeff.denominator == 1 else coeff
    return out


def _fp_deriv(p: dict, var: int) -> dict:
    shift = _SHIFT * var
    dec = 1 << shift
    out = {}
    for key, c in p.items():
        e = (key >> shift) & _MASK
        if e:
            out[key - dec] = c * e
    return out


def _fp_accum(dst: dict, src: dict, scale=1) -> None:
    for key, c in src.items():
        val = c * scale
        cur = dst.get(key)
        if cur is None:
            dst[key] = val
        else:
            cur = cur + val
            if cur:
                dst[key] = cur
            else:
                del dst[key]


def _fp_mul(p: dict, q: dict) -> dict:
    if len(p) > len(q):
        p, q = q, p
    out = {}
    for kp, cp in p.items():
        for kq, cq in q.items():
            key = kp + kq
            val = cp * cq
            cur = out.get(key)
            if cur is None:
                out[key] = val
            else:
                cur = cur + val
                if cur:
                    out[key] = cur
                else:
                    del out[key]
    return out


def _fp_accum_mul(dst: dict, p: dict, q: dict, sign=1) -> None:
    if len(p) > len(q):
        p, q = q, p
    for kp, cp in p.items():
        cps = cp * sign
        for kq, cq in q.items():
            key = kp + kq
            val = cps * cq
            cur = dst.get(key)
            if cur is None:
                dst[key] = val
            else:
                cur = cur + val
                if cur:
                    dst[key] = cur
                else:
                    del dst[key]


class _FastStructure:
    """Packed-int copy of the frame data, for the certification sweep."""

    def __init__(self, s: CourantStructure, extra: int):
        self.n = s.bundle.base_dim
        self.k = s.bundle.rank
        self.num_vars = self.n + extra
        self.anchor_terms = [
            [
                (a, _fp(s.anchor[a][i]))
                for a in range(self.n)
                if not s.anchor[a][i].is_zero()
            ]
            for i in range(self.k)
        ]
        self.dual_rows = [
            [
                (a, _fp(s._dual_anchor[h][a]))
                for a in range(self.n)
                if not s._dual_anchor[h][a].is_zero()
            ]
            for h in range(self.k)
        ]
        self.metric = [
            [int(v) if v.denominator == 1 else v for v in row] for row in s.metric
        ]
        grouped: dict[tuple[int, int], list] = {}
        for (i, j, h), p in s.structure_functions.items():
            grouped.setdefault((i, j), []).append((h, _fp(p)))
        self.c_entries = [(i, j, hs) for (i, j), hs in grouped.items()]

    def section(self, f: Section) -> list[dict]:
        return [_fp(p) for p in f]

    def bracket(self, f: list[dict], g: list[dict]) -> list[dict]:
        out = [dict() for _ in range(self.k)]
        for i, fi in enumerate(f):
            if not fi:
                continue
            for a, entry in self.anchor_terms[i]:
                fie = _fp_mul(fi, entry)
                for j, gj in enumerate(g):
                    if not gj:
                        continue
                    d = _fp_deriv(gj, a)
                    if d:
                        _fp_accum_mul(out[j], fie, d)
        for j, gj in enumerate(g):
            if not gj:
                continue
            for a, entry in self.anchor_terms[j]:
                gje = _fp_mul(gj, entry)
                for i, fi in enumerate(f):
                    if not fi:
                        continue
                    d = _fp_deriv(fi, a)
                    if d:
                        _fp_accum_mul(out[i], gje, d, -1)
        for i, j, hs in self.c_entries:
            fi, gj = f[i], g[j]
            if fi and gj:
                prod = _fp_mul(fi, gj)
                for h, centry in hs:
                    _fp_accum_mul(out[h], prod, centry)
        for i, fi in enumerate(f):
            if not fi:
                continue
            s = {}
            grow = self.metric[i]
            for j, gj in enumerate(g):
                if grow[j] and gj:
                    _fp_accum(s, gj, grow[j])
            if not s:
                continue
            derivs = {}
            for h, alist in enumerate(self.dual_rows):
                for a, entry in alist:
                    if a not in derivs:
                        derivs[a] = _fp_deriv(fi, a)
                    if derivs[a]:
                        _fp_accum_mul(out[h], _fp_mul(s, entry), derivs[a])
        return out

    def pairing(self, f: list[dict], g: list[dict]) -> dict:
        out: dict = {}
        for i, fi in enumerate(f):
            if not fi:
                continue
            grow = self.metric[i]
            for j, gj in enumerate(g):
                if grow[j] and gj:
                    _fp_accum_mul(out, _fp_mul(fi, gj), {0: grow[j]})
        return out

    def anchor_apply(self, f: list[dict], p: dict) -> dict:
        out: dict = {}
        for i, fi in enumerate(f):
            if not fi:
                continue
            for a, entry in self.anchor_terms[i]:
                d = _fp_deriv(p, a)
                if d:
                    _fp_accum_mul(out, _fp_mul(fi, entry), d)
        return out

    def derived(self, p: dict) -> list[dict]:
        out = [dict() for _ in range(self.k)]
        derivs = {}
        for h, alist in enumerate(self.dual_rows):
            for a, entry in alist:
                if a not in derivs:
                    derivs[a] = _fp_deriv(p, a)
                if derivs[a]:
                    _fp_accum_mul(out[h], derivs[a], entry)
        return out


# -- axiom checking -------------------------------------------------------------


@dataclass
class AxiomCheck:
    passed: bool
    detail: str
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"status": "pass" if self.passed else "fail", "detail": self.detail}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class AxiomReport:
    """Exact verdicts for the three Courant axioms."""

    checks: dict[str, AxiomCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json(self) -> dict:
        return {name: check.to_json() for name, check in self.checks.items()}


def _axiom_defect_i(s: CourantStructure, f, g, h) -> Section:
    return (
        s.bracket(f, s.bracket(g, h))
        - s.bracket(s.bracket(f, g), h)
        - s.bracket(g, s.bracket(f, h))
    )


def _axiom_defect_ii(s: CourantStructure, f, g, h) -> Polynomial:
    return (
        s.anchor_apply(f, s.pairing(g, h))
        - s.pairing(s.bracket(f, g), h)
        - s.pairing(g, s.bracket(f, h))
    )


def _axiom_defect_iii(s: CourantStructure, f, g) -> Section:
    return s.bracket(f, g) + s.bracket(g, f) - s.derived_operator(s.pairing(f, g))


def _witness_from_tags(
    s: CourantStructure, degree_cap: int, axiom: str, slot_sections, defect_key,
    component: int | None,
):
    """Decode a nonzero sweep term into explicit sections and re-verify it."""
    n = s.bundle.base_dim
    exps = _unpack(defect_key, n + 2)
    resolved = []
    tag_pos = n
    for kind, payload in slot_sections:
        if kind == "fixed":
            resolved.append(payload)
        else:
            resolved.append(decode_tag(s.bundle, degree_cap, exps[tag_pos]))
            tag_pos += 1
    if axiom == "i":
        defect = _axiom_defect_i(s, *resolved)
        defect_str = defect.coeffs.to_strings()
        nonzero = not defect.is_zero()
    elif axiom == "ii":
        defect = _axiom_defect_ii(s, *resolved)
        defect_str = [defect.to_string()]
        nonzero = not defect.is_zero()
    else:
        defect = _axiom_defect_iii(s, *resolved)
        defect_str = defect.coeffs.to_strings()
        nonzero = not defect.is_zero()
    if not nonzero:
        raise RuntimeError(
            "internal inconsistency: tagged sweep flagged a tuple whose "
            "plain defect vanishes"
        )
    return {
        "sections": [sec.coeffs.to_strings() for sec in resolved],
        "defect": defect_str,
        "component": component,
    }


def _certify_axioms(s: CourantStructure, degree_cap: int) -> dict[str, AxiomCheck]:
    """Exact certification of all three axioms over the monomial family.

    Equivalent to enumerating every (ordered) tuple of monomial frame
    sections of coefficient degree <= degree_cap; see the module docstring.
    """
    n, k = s.bundle.base_dim, s.bundle.rank
    monos = monomials_up_to(n, degree_cap)
    family = k * len(monos)
    label = f"all {family}^t tuples of the {family} monomial frame sections, degree cap {degree_cap}"
    if k == 0:
        check = AxiomCheck(True, "rank-0 bundle: axioms hold vacuously")
        return {"i": check, "ii": check, "iii": check}
    if family - 1 > _MASK:
        raise ValueError(
            f"degree cap {degree_cap} gives a family of {family} sections, "
            f"beyond the packed-exponent budget; lower the cap"
        )
    fast = _FastStructure(s, extra=2)
    f2 = fast.section(tagged_generating_section(s.bundle, degree_cap, 2, n))
    f3 = fast.section(tagged_generating_section(s.bundle, degree_cap, 2, n + 1))
    basis = monomial_frame_basis(s.bundle, degree_cap)
    inner23 = fast.bracket(f2, f3)
    pair23 = fast.pairing(f2, f3)

    checks: dict[str, AxiomCheck] = {}

    # axiom (iii): two slots, fully tagged, one identity
    defect3 = fast.bracket(f2, f3)
    for comp, entry in enumerate(fast.bracket(f3, f2)):
        _fp_accum(defect3[comp], entry)
    for comp, entry in enumerate(fast.derived(pair23)):
        _fp_accum(defect3[comp], entry, -1)
    witness3 = None
    for comp, entry in enumerate(defect3):
        if entry:
            key = next(iter(entry))
            witness3 = _witness_from_tags(
                s, degree_cap, "iii",
                [("tag", None), ("tag", None)], key, comp,
            )
            break
    checks["iii"] = AxiomCheck(witness3 is None, f"certified over {label}", witness3)

    # axioms (i) and (ii): first slot enumerated, remaining two tagged
    witness1 = None
    witness2 = None
    for i, alpha in basis:
        mono_key = _pack(tuple(alpha) + (0, 0))
        ba = [dict() for _ in range(k)]
        ba[i] = {mono_key: 1}
        inner_a2 = fast.bracket(ba, f2)
        inner_a3 = fast.bracket(ba, f3)
        if witness1 is None:
            defect1 = fast.bracket(ba, inner23)
            for comp, entry in enumerate(fast.bracket(inner_a2, f3)):
                _fp_accum(defect1[comp], entry, -1)
            for comp, entry in enumerate(fast.bracket(f2, inner_a3)):
                _fp_accum(defect1[comp], entry, -1)
            for comp, entry in enumerate(defect1):
                if entry:
                    fixed = Section.frame(
                        s.bundle, i, Polynomial.monomial(n, alpha)
                    )
                    witness1 = _witness_from_tags(
                        s, degree_cap, "i",
                        [("fixed", fixed), ("tag", None), ("tag", None)],
                        next(iter(entry)), comp,
                    )
                    break
        if witness2 is None:
            defect2 = fast.anchor_apply(ba, pair23)
            _fp_accum(defect2, fast.pairing(inner_a2, f3), -1)
            _fp_accum(defect2, fast.pairing(f2, inner_a3), -1)
            if defect2:
                fixed = Section.frame(s.bundle, i, Polynomial.monomial(n, alpha))
                witness2 = _witness_from_tags(
                    s, degree_cap, "ii",
                    [("fixed", fixed), ("tag", None), ("tag", None)],
                    next(iter(defect2)), None,
                )
        if witness1 is not None and witness2 is not None:
            break
    checks["i"] = AxiomCheck(witness1 is None, f"certified over {label}", witness1)
    checks["ii"] = AxiomCheck(witness2 is None, f"certified over {label}", witness2)
    return checks


def check_axioms(
    s: CourantStructure,
    sections: Sequence[Section] = (),
    degree_cap: int = 3,
    n_random: int = 100,
    seed: int = 0,
) -> AxiomReport:
    """Exact pass/fail per axiom.

    (i)   [[f,[[g,h]]]] = [[[[f,g]],h]] + [[g,[[f,h]]]]
    (ii)  rho(f)<g,h> = <[[f,g]],h> + <g,[[f,h]]>
    (iii) [[f,g]] + [[g,f]] = D(<f,g>)

    Each axiom is certified over every tuple of monomial frame sections up
    to the degree cap (multilinearity makes that a certificate for all
    sections of coefficient degree <= cap), then spot-checked on seeded
    random tuples and on tuples drawn from any supplied section family.
    All comparisons are polynomial identities with zero tolerance.
    """
    checks = _certify_axioms(s, degree_cap)
    rng = random.Random(seed)
    pool: list[Section] = list(sections)
    for _ in range(n_random):
        pool.append(random_section(rng, s.bundle, degree_cap))
    samples = min(n_random, len(pool))
    for _ in range(samples):
        f, g, h = (pool[rng.randrange(len(pool))] for _ in range(3))
        if checks["i"].passed:
            d = _axiom_defect_i(s, f, g, h)
            if not d.is_zero():
                checks["i"] = AxiomCheck(
                    False, "random spot check failed",
                    {"sections": [x.coeffs.to_strings() for x in (f, g, h)],
                     "defect": d.coeffs.to_strings(), "component": None},
                )
        if checks["ii"].passed:
            d2 = _axiom_defect_ii(s, f, g, h)
            if not d2.is_zero():
                checks["ii"] = AxiomCheck(
                    False, "random spot check failed",
                    {"sections": [x.coeffs.to_strings() for x in (f, g, h)],
                     "defect": [d2.to_string()], "component": None},
                )
        if checks["iii"].passed:
            d3 = _axiom_defect_iii(s, f, g)
            if not d3.is_zero():
                checks["iii"] = AxiomCheck(
                    False, "random spot check failed",
                    {"sections": [x.coeffs.to_strings() for x in (f, g)],
                     "defect": d3.coeffs.to_strings(), "component": None},
                )
    for name, check in checks.items():
        if check.passed:
            check.detail += f"; {samples} random tuples"
    return AxiomReport(checks)


# -- Leibniz rules ---------------------------------------------------------------


@dataclass
class LeibnizReport:
    """Exact verdicts for the function-linearity rules of the bracket."""

    second_slot: AxiomCheck
    two_sided: AxiomCheck
    variant_falsified: bool
    variant_witness: dict | None

    @property
    def all_passed(self) -> bool:
        return self.second_slot.passed and self.two_sided.passed

    def to_json(self) -> dict:
        return {
            "second_slot_rule": self.second_slot.to_json(),
            "two_sided_rule": self.two_sided.to_json(),
            "final_slot_variant": {
                "status": "falsified" if self.variant_falsified else "not falsified",
                "witness": self.variant_witness,
            },
        }


def check_leibniz(
    s: CourantStructure,
    n_samples: int = 100,
    degree_cap: int = 2,
    seed: int = 0,
) -> LeibnizReport:
    """Verify the two Leibniz rules on seeded random data, exactly.

    Rule 1 (second slot):  [[f, lam g]] = lam [[f,g]] + rho(f)(lam) g.
    Rule 2 (two-sided):    [[lam f, mu g]] = lam mu [[f,g]] + lam rho(f)(mu) g
                           - mu rho(g)(lam) f + <f,g> mu D(lam).

    A falsified variant of rule 2 whose third term reads
    "- mu rho(g)(lam) g" is evaluated on the same data; the first sample on
    which it breaks is stored as a witness.  (Both rules and the variant
    coincide when the anchor vanishes, in which case nothing can be
    falsified and the report says so.)
    """
    rng = random.Random(seed)
    n = s.bundle.base_dim
    rule1 = AxiomCheck(True, f"{n_samples} random samples, exact")
    rule2 = AxiomCheck(True, f"{n_samples} random samples, exact")
    variant_witness = None
    for _ in range(n_samples):
        f = random_section(rng, s.bundle, degree_cap)
        g = random_section(rng, s.bundle, degree_cap)
        lam = random_polynomial(rng, n, degree_cap)
        mu = random_polynomial(rng, n, degree_cap)
        if rule1.passed:
            d = s.bracket(f, lam * g) - (lam * s.bracket(f, g) + s.anchor_apply(f, lam) * g)
            if not d.is_zero():
                rule1 = AxiomCheck(False, "second-slot rule failed", {
                    "f": f.coeffs.to_strings(), "g": g.coeffs.to_strings(),
                    "lam": lam.to_string(), "defect": d.coeffs.to_strings()})
        common = (
            (lam * mu) * s.bracket(f, g)
            + lam * s.anchor_apply(f, mu) * g
            + (s.pairing(f, g) * mu) * s.derived_operator(lam)
        )
        cross = mu * s.anchor_apply(g, lam)
        lhs = s.bracket(lam * f, mu * g)
        if rule2.passed:
            d = lhs - (common - cross * f)
            if not d.is_zero():
                rule2 = AxiomCheck(False, "two-sided rule failed", {
                    "f": f.coeffs.to_strings(), "g": g.coeffs.to_strings(),
                    "lam": lam.to_string(), "mu": mu.to_string(),
                    "defect": d.coeffs.to_strings()})
        if variant_witness is None:
            d = lhs - (common - cross * g)
            if not d.is_zero():
                variant_witness = {
                    "f": f.coeffs.to_strings(), "g": g.coeffs.to_strings(),
                    "lam": lam.to_string(), "mu": mu.to_string(),
                    "defect": d.coeffs.to_strings(),
                }
    return LeibnizReport(rule1, rule2, variant_witness is not None, variant_witness)


# -- linear Dirac structures ------------------------------------------------------


def dirac_check(s: CourantStructure, subspace: LinearSubspace) -> bool:
    """True iff the subspace is isotropic for the metric and of half rank.

    The fiber metric is constant, so the check is the same over every base
    point.  Raises for odd rank, where maximal isotropy is ill-posed for a
    split-signature pairing.
    """
    k = s.bundle.rank
    if subspace.ambient_dim != k:
        raise ValueError(
            f"subspace lives in R^{subspace.ambient_dim}, structure rank is {k}"
        )
    if k % 2:
        raise ValueError("maximal isotropy is undefined for odd rank")
    basis = [list(v) for v in subspace.basis]
    for u in basis:
        gu = linalg.mat_vec(s.metric, u)
        for v in basis:
            if sum((a * b for a, b in zip(gu, v)), Fraction(0)) != 0:
                return False
    return subspace.dim == k // 2
