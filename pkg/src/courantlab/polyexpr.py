"""Exact multivariate polynomials over the rationals.

Every symbolic object in this package (sections, anchors, brackets, base
maps) reduces to arithmetic here, so the representation is deliberately
simple and fully exact:

    Polynomial = number of variables + {exponent tuple -> Fraction}

The zero polynomial has an empty term map.  Two polynomials are equal iff
their variable counts and term maps are equal; all operations prune zero
coefficients, so structural equality is polynomial identity.  Coefficients
are `fractions.Fraction`, never floats.

A `PolyMap` is a tuple of polynomials sharing one input arity: a polynomial
map R^n -> R^k.  It serves both as the coefficient vector of a bundle
section and as a base map between bundle bases.

The text format accepted by `parse` (and produced by `Polynomial.__str__`):

    expr   := ['-'] term (('+'|'-') ['-'] term)*
    term   := factor ('*' factor)*
    factor := base ('^' nonneg-int)?
    base   := rational-literal | identifier | '(' expr ')'
    rational-literal := int ('/' positive-int)?

Whitespace is insignificant.  Identifiers must appear in the declared
variable list.  There is no general division: '/' only joins two integer
literals into a rational literal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[int, Fraction]

__all__ = ["Polynomial", "PolyMap", "ParseError", "parse", "monomials_up_to"]


def monomials_up_to(num_vars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples with total degree <= degree, graded lexicographic."""
    if num_vars == 0:
        return [()]
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, budget: int):
        if remaining == 1:
            for e in range(budget + 1):
                out.append(prefix + (e,))
            return
        for e in range(budget + 1):
            rec(prefix + (e,), remaining - 1, budget - e)

    by_degree: dict[int, list[tuple[int, ...]]] = {}
    rec((), num_vars, degree)
    for exps in out:
        by_degree.setdefault(sum(exps), []).append(exps)
    return [e for d in sorted(by_degree) for e in sorted(by_degree[d])]


class ParseError(ValueError):
    """Syntax or name error in a polynomial expression, with position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms=None):
        if num_vars < 0:
            raise ValueError("num_vars must be >= 0")
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in (terms.items() if hasattr(terms, "items") else terms):
                exps = tuple(exps)
                if len(exps) != num_vars:
                    raise ValueError(
                        f"exponent tuple {exps} has length {len(exps)}, expected {num_vars}"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                coeff = Fraction(coeff)
                if coeff:
                    acc = clean.get(exps)
                    coeff = coeff if acc is None else acc + coeff
                    if coeff:
                        clean[exps] = coeff
                    elif exps in clean:
                        del clean[exps]
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> "Polynomial":
        return cls(num_vars)

    @classmethod
    def constant(cls, num_vars: int, value: Scalar) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls(num_vars)
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Polynomial":
        if not 0 <= index < num_vars:
            raise ValueError(f"variable index {index} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, num_vars: int, exps: Sequence[int], coeff: Scalar = 1) -> "Polynomial":
        return cls(num_vars, {tuple(exps): Fraction(coeff)})

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (errors otherwise)."""
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"polynomial {self} is not constant")
        return next(iter(self.terms.values()))

    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=0)

    # -- ring arithmetic -------------------------------------------------

    def _check_arity(self, other: "Polynomial") -> None:
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"variable-count mismatch: {self.num_vars} vs {other.num_vars}"
            )

    def _coerce(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            self._check_arity(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.num_vars, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = out.get(exps)
            total = coeff if acc is None else acc + coeff
            if total:
                out[exps] = total
            elif exps in out:
                del out[exps]
        return _raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return _raw(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return Polynomial(self.num_vars)
            return _raw(self.num_vars, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_arity(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc = out.get(exps)
                total = c1 * c2 if acc is None else acc + c1 * c2
                if total:
                    out[exps] = total
                elif exps in out:
                    del out[exps]
        return _raw(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Polynomial.constant(self.num_vars, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.num_vars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    # -- calculus ---------------------------------------------------------

    def diff(self, var_index: int) -> "Polynomial":
        """Exact partial derivative with respect to variable `var_index`."""
        if not 0 <= var_index < self.num_vars:
            raise ValueError(
                f"variable index {var_index} out of range for {self.num_vars} variables"
            )
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[var_index]
            if e:
                lowered = exps[:var_index] + (e - 1,) + exps[var_index + 1:]
                acc = out.get(lowered)
                total = coeff * e if acc is None else acc + coeff * e
                if total:
                    out[lowered] = total
                elif lowered in out:
                    del out[lowered]
        return _raw(self.num_vars, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.num_vars)]

    def eval(self, point: Sequence[Scalar]) -> Fraction:
        """Exact evaluation by recursive Horner accumulation."""
        if len(point) != self.num_vars:
            raise ValueError(
                f"point has {len(point)} coordinates, expected {self.num_vars}"
            )
        point = [Fraction(v) for v in point]
        return _horner(list(self.terms.items()), point, 0)

    def compose(self, maps: "PolyMap | Sequence[Polynomial]") -> "Polynomial":
        """Substitute `maps[i]` for variable i; exact expansion.

        The result lives in the variables of the substituted maps.
        """
        outputs = maps.outputs if isinstance(maps, PolyMap) else tuple(maps)
        if len(outputs) != self.num_vars:
            raise ValueError(
                f"composition arity mismatch: {len(outputs)} maps for {self.num_vars} variables"
            )
        if self.num_vars == 0:
            inner_vars = maps.num_inputs if isinstance(maps, PolyMap) else 0
            return Polynomial(inner_vars, {(0,) * inner_vars: c for _, c in self.terms.items()})
        inner_vars = outputs[0].num_vars
        for q in outputs:
            if q.num_vars != inner_vars:
                raise ValueError("substituted maps disagree on variable count")
        # cache powers of each substituted polynomial
        powers: list[list[Polynomial]] = [[Polynomial.constant(inner_vars, 1)] for _ in outputs]
        result = Polynomial(inner_vars)
        for exps, coeff in self.terms.items():
            factor = Polynomial.constant(inner_vars, coeff)
            for i, e in enumerate(exps):
                while len(powers[i]) <= e:
                    powers[i].append(powers[i][-1] * outputs[i])
                if e:
                    factor = factor * powers[i][e]
            result = result + factor
        return result

    def lift(self, new_num_vars: int, offset: int = 0) -> "Polynomial":
        """Reinterpret in a larger variable set, variable i -> i + offset."""
        if offset < 0 or offset + self.num_vars > new_num_vars:
            raise ValueError("lift target does not fit")
        pre = (0,) * offset
        post = (0,) * (new_num_vars - offset - self.num_vars)
        return _raw(new_num_vars, {pre + e + post: c for e, c in self.terms.items()})

    # -- printing ----------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.num_vars)]
        elif len(names) != self.num_vars:
            raise ValueError("wrong number of variable names")
        if not self.terms:
            return "0"
        parts: list[str] = []
        for exps in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            coeff = self.terms[exps]
            factors = [
                names[i] if e == 1 else f"{names[i]}^{e}"
                for i, e in enumerate(exps)
                if e
            ]
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Polynomial({self.num_vars}, {self.to_string()!r})"


def _raw(num_vars: int, terms: dict) -> Polynomial:
    """Internal: wrap an already-canonical term dict without copying."""
    p = object.__new__(Polynomial)
    object.__setattr__(p, "num_vars", num_vars)
    object.__setattr__(p, "terms", terms)
    return p


def _horner(items, point, var: int):
    """Recursive Horner evaluation, grouping on the leading variable."""
    if not items:
        return Fraction(0)
    if var == len(point):
        return sum((c for _, c in items), Fraction(0))
    groups: dict[int, list] = {}
    for exps, coeff in items:
        groups.setdefault(exps[var], []).append((exps, coeff))
    x = point[var]
    acc = Fraction(0)
    prev = None
    for e in sorted(groups, reverse=True):
        if prev is not None:
            acc = acc * x ** (prev - e)
        acc = acc + _horner(groups[e], point, var + 1)
        prev = e
    if prev:
        acc = acc * x ** prev
    return acc


class PolyMap:
    """A polynomial map R^num_inputs -> R^k, one polynomial per output."""

    __slots__ = ("num_inputs", "outputs")

    def __init__(self, num_inputs: int, outputs: Iterable[Polynomial]):
        outputs = tuple(outputs)
        for p in outputs:
            if p.num_vars != num_inputs:
                raise ValueError(
                    f"component has {p.num_vars} variables, expected {num_inputs}"
                )
        object.__setattr__(self, "num_inputs", num_inputs)
        object.__setattr__(self, "outputs", outputs)

    def __setattr__(self, name, value):
        raise AttributeError("PolyMap is immutable")

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls(n, [Polynomial.variable(n, i) for i in range(n)])

    @classmethod
    def zero(cls, num_inputs: int, num_outputs: int) -> "PolyMap":
        return cls(num_inputs, [Polynomial(num_inputs)] * num_outputs)

    @classmethod
    def constant(cls, num_inputs: int, values: Sequence[Scalar]) -> "PolyMap":
        return cls(num_inputs, [Polynomial.constant(num_inputs, v) for v in values])

    @classmethod
    def from_exprs(cls, texts: Sequence[str], variables: Sequence[str]) -> "PolyMap":
        return cls(len(variables), [parse(t, variables) for t in texts])

    def __len__(self):
        return len(self.outputs)

    def __iter__(self):
        return iter(self.outputs)

    def __getitem__(self, i) -> Polynomial:
        return self.outputs[i]

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.num_inputs == other.num_inputs and self.outputs == other.outputs

    def __hash__(self):
        return hash((self.num_inputs, self.outputs))

    def eval(self, point: Sequence[Scalar]) -> tuple[Fraction, ...]:
        return tuple(p.eval(point) for p in self.outputs)

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """self after inner: (self . inner)(x) = self(inner(x))."""
        if inner.num_inputs < 0 or len(inner.outputs) != self.num_inputs:
            raise ValueError(
                f"composition arity mismatch: inner has {len(inner.outputs)} outputs, "
                f"outer expects {self.num_inputs}"
            )
        return PolyMap(inner.num_inputs, [p.compose(inner) for p in self.outputs])

    def jacobian(self) -> list[list[Polynomial]]:
        """Matrix of partials, entry (i, j) = d outputs[i] / d x_j."""
        return [[p.diff(j) for j in range(self.num_inputs)] for p in self.outputs]

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.outputs)

    def to_strings(self, names: Sequence[str] | None = None) -> list[str]:
        return [p.to_string(names) for p in self.outputs]

    def __repr__(self):
        body = ", ".join(self.to_strings())
        return f"PolyMap({self.num_inputs} -> {len(self.outputs)}: [{body}])"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        """(kind, value, position); kind in {int, ident, op, end}."""
        self._skip_ws()
        start = self.pos
        if start >= len(self.text):
            return ("end", "", start)
        ch = self.text[start]
        if ch.isdigit():
            end = start
            while end < len(self.text) and self.text[end].isdigit():
                end += 1
            return ("int", self.text[start:end], start)
        if ch.isalpha() or ch == "_":
            end = start
            while end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
                end += 1
            return ("ident", self.text[start:end], start)
        if ch in "+-*/^()":
            return ("op", ch, start)
        raise ParseError(f"unexpected character {ch!r}", start)

    def next(self):
        kind, value, start = self.peek()
        self.pos = start + len(value) if kind != "end" else start
        return (kind, value, start)


def parse(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse an expression over the named variables into a Polynomial.

    Raises ParseError on syntax errors (with position), unknown identifiers,
    and negative or malformed exponents.
    """
    names = list(variables)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable names in {names}")
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    lex = _Lexer(text)

    def parse_expr() -> Polynomial:
        acc = parse_signed_term()
        while True:
            kind, value, _ = lex.peek()
            if kind == "op" and value in "+-":
                lex.next()
                rhs = parse_signed_term()
                acc = acc + rhs if value == "+" else acc - rhs
            else:
                return acc

    def parse_signed_term() -> Polynomial:
        kind, value, _ = lex.peek()
        if kind == "op" and value == "-":
            lex.next()
            return -parse_term()
        return parse_term()

    def parse_term() -> Polynomial:
        acc = parse_factor()
        while True:
            kind, value, _ = lex.peek()
            if kind == "op" and value == "*":
                lex.next()
                acc = acc * parse_factor()
            else:
                return acc

    def parse_factor() -> Polynomial:
        base = parse_base()
        kind, value, pos = lex.peek()
        if kind == "op" and value == "^":
            lex.next()
            kind, value, pos = lex.next()
            if kind == "op" and value == "-":
                raise ParseError("negative exponent", pos)
            if kind != "int":
                raise ParseError("expected a non-negative integer exponent", pos)
            return base ** int(value)
        return base

    def parse_base() -> Polynomial:
        kind, value, pos = lex.next()
        if kind == "int":
            numerator = int(value)
            kind2, value2, pos2 = lex.peek()
            if kind2 == "op" and value2 == "/":
                lex.next()
                kind3, value3, pos3 = lex.next()
                if kind3 != "int" or int(value3) == 0:
                    raise ParseError("expected a positive integer denominator", pos3)
                return Polynomial.constant(n, Fraction(numerator, int(value3)))
            return Polynomial.constant(n, numerator)
        if kind == "ident":
            if value not in index:
                raise ParseError(f"unknown identifier {value!r}", pos)
            return Polynomial.variable(n, index[value])
        if kind == "op" and value == "(":
            inner = parse_expr()
            kind2, value2, pos2 = lex.next()
            if kind2 != "op" or value2 != ")":
                raise ParseError("expected ')'", pos2)
            return inner
        raise ParseError(f"expected a number, variable, or '('", pos)

    result = parse_expr()
    kind, value, pos = lex.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {value!r}", pos)
    return result
