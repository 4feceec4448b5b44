"""Exact multivariate polynomials over the rationals.

Polynomials are immutable sparse maps from exponent vectors to nonzero
``Fraction`` coefficients over an ordered tuple of variable names.  Rounding
only enters in :func:`eval_complex`; elimination (resultants, gcds, divided
differences) is exact.

>>> p = parse_poly("u*(u^2 - t)", ("u", "t"))
>>> str(p)
'u^3 - u*t'
>>> str(derivative(p, "u"))
'3*u^2 - t'
"""

from __future__ import annotations

import re
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InputError, PolyParseError

Exponent = tuple[int, ...]
Number = int | Fraction

UNIT_ROUNDOFF = 2.0**-53


def _grlex_key(exp: Exponent):
    return (sum(exp), exp)


class MultiPoly:
    """Sparse polynomial with rational coefficients.

    Two polynomials compare equal only if they share the same variable tuple;
    use :meth:`with_vars` to move a polynomial into a larger ring.
    """

    __slots__ = ("_vars", "_terms", "_hash", "_compiled")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exponent, Number] | None = None):
        self._vars = tuple(vars)
        if len(set(self._vars)) != len(self._vars):
            raise InputError(f"duplicate variable names in {self._vars}")
        n = len(self._vars)
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise InputError(f"bad exponent vector {exp} for variables {self._vars}")
            c = Fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = dict(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True))
        self._hash = None
        self._compiled = None

    # construction helpers

    @classmethod
    def constant(cls, value: Number, vars: Sequence[str]) -> MultiPoly:
        return cls(vars, {(0,) * len(vars): value})

    @classmethod
    def variable(cls, name: str, vars: Sequence[str]) -> MultiPoly:
        vars = tuple(vars)
        exp = tuple(1 if v == name else 0 for v in vars)
        if name not in vars:
            raise InputError(f"unknown variable {name!r}")
        return cls(vars, {exp: 1})

    # basic accessors

    @property
    def vars(self) -> tuple[str, ...]:
        return self._vars

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((0,) * len(self._vars), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def degree(self, var: str) -> int:
        """Degree in ``var``; ``-1`` for the zero polynomial."""
        i = self._index(var)
        return max((e[i] for e in self._terms), default=-1)

    def used_vars(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self._vars) if any(e[i] for e in self._terms))

    def leading_term(self) -> tuple[Exponent, Fraction]:
        if not self._terms:
            raise InputError("zero polynomial has no leading term")
        return next(iter(self._terms.items()))

    def _index(self, var: str) -> int:
        try:
            return self._vars.index(var)
        except ValueError:
            raise InputError(f"unknown variable {var!r} (variables are {self._vars})") from None

    # ring changes

    def with_vars(self, vars: Sequence[str]) -> MultiPoly:
        """Re-express in the variable tuple ``vars`` (a superset of the used variables)."""
        vars = tuple(vars)
        if vars == self._vars:
            return self
        missing = [v for v in self.used_vars() if v not in vars]
        if missing:
            raise InputError(f"variables {missing} are used but absent from {vars}")
        pos = {v: i for i, v in enumerate(self._vars)}
        new = {}
        for exp, c in self._terms.items():
            new[tuple(exp[pos[v]] if v in pos else 0 for v in vars)] = c
        return MultiPoly(vars, new)

    def _unify(self, other: MultiPoly | Number) -> tuple[MultiPoly, MultiPoly]:
        if not isinstance(other, MultiPoly):
            return self, MultiPoly.constant(other, self._vars)
        if other._vars == self._vars:
            return self, other
        vars = self._vars + tuple(v for v in other._vars if v not in self._vars)
        return self.with_vars(vars), other.with_vars(vars)

    # arithmetic

    def __add__(self, other):
        a, b = self._unify(other)
        terms = dict(a._terms)
        for exp, c in b._terms.items():
            terms[exp] = terms.get(exp, 0) + c
        return MultiPoly(a._vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self._vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiPoly) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = Fraction(other)
            return MultiPoly(self._vars, {e: c * v for e, v in self._terms.items()})
        a, b = self._unify(other)
        terms: dict[Exponent, Fraction] = {}
        for ea, ca in a._terms.items():
            for eb, cb in b._terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = terms.get(e, 0) + ca * cb
        return MultiPoly(a._vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InputError("exponent must be a non-negative integer")
        result = MultiPoly.constant(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._vars == other._vars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._vars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"MultiPoly({self._vars}, {str(self)!r})"

    def __str__(self):
        return serialize(self)

    # structure in one variable

    def coefficients_in(self, var: str) -> dict[int, MultiPoly]:
        """Coefficients of powers of ``var``, each free of ``var`` (same variable tuple)."""
        i = self._index(var)
        parts: dict[int, dict[Exponent, Fraction]] = {}
        for exp, c in self._terms.items():
            k = exp[i]
            parts.setdefault(k, {})[exp[:i] + (0,) + exp[i + 1 :]] = c
        return {k: MultiPoly(self._vars, t) for k, t in sorted(parts.items())}

    def leading_coefficient_in(self, var: str) -> MultiPoly:
        coeffs = self.coefficients_in(var)
        if not coeffs:
            return MultiPoly(self._vars)
        return coeffs[max(coeffs)]

    def substitute(self, values: Mapping[str, MultiPoly | Number]) -> MultiPoly:
        """Substitute polynomials (or numbers) for variables.

        The result lives over the remaining variables followed by any new
        variables introduced by the substituted polynomials.
        """
        keep = tuple(v for v in self._vars if v not in values)
        extra: list[str] = []
        for p in values.values():
            if isinstance(p, MultiPoly):
                extra.extend(v for v in p._vars if v not in keep and v not in extra)
        vars = keep + tuple(extra)
        subs = {}
        for v, p in values.items():
            self._index(v)
            subs[v] = p.with_vars(vars) if isinstance(p, MultiPoly) else MultiPoly.constant(p, vars)
        result = MultiPoly(vars)
        powers: dict[tuple[str, int], MultiPoly] = {}
        for exp, c in self._terms.items():
            term = MultiPoly(vars, {tuple(exp[self._vars.index(v)] if v in keep else 0 for v in vars): c})
            for v, e in zip(self._vars, exp):
                if e and v in subs:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = subs[v] ** e
                    term = term * powers[key]
            result = result + term
        return result

    # evaluation

    def eval_exact(self, point: Sequence[Number]) -> Fraction:
        if len(point) != len(self._vars):
            raise InputError("point length does not match number of variables")
        total = Fraction(0)
        for exp, c in self._terms.items():
            m = Fraction(c)
            for x, e in zip(point, exp):
                if e:
                    m *= Fraction(x) ** e
            total += m
        return total

    def _compile(self):
        if self._compiled is None:
            self._compiled = [
                (complex(float(c)), abs(float(c)), tuple((i, e) for i, e in enumerate(exp) if e))
                for exp, c in self._terms.items()
            ]
        return self._compiled


def eval_complex(p: MultiPoly, point: Sequence[complex]) -> tuple[complex, float]:
    """Evaluate ``p`` at a complex point.

    Returns ``(value, bound)`` where ``bound`` bounds the floating-point error:
    the sum of ``|coeff| * |monomial|`` scaled by the unit roundoff and by the
    number of roundings along the longest evaluation chain.
    """
    if len(point) != len(p.vars):
        raise InputError("point length does not match number of variables")
    value = 0j
    scale = 0.0
    for c, ac, factors in p._compile():
        m = c
        am = ac
        for i, e in factors:
            x = point[i]
            m *= x**e if e > 1 else x
            am *= abs(x) ** e
        value += m
        scale += am
    ops = len(p._terms) + 2 * max(p.total_degree(), 0) + 2
    return value, 4.0 * ops * UNIT_ROUNDOFF * scale


def evaluate(p: MultiPoly, point: Sequence[complex]) -> complex:
    """Value only; the hot path used by the Newton corrector."""
    value = 0j
    for c, _, factors in p._compile():
        m = c
        for i, e in factors:
            m *= point[i] ** e
        value += m
    return value


def derivative(p: MultiPoly, var: str) -> MultiPoly:
    i = p._index(var)
    terms = {}
    for exp, c in p.terms.items():
        if exp[i]:
            terms[exp[:i] + (exp[i] - 1,) + exp[i + 1 :]] = c * exp[i]
    return MultiPoly(p.vars, terms)


def divided_difference(p: MultiPoly, var: str, new_var: str) -> MultiPoly:
    """Return ``q`` with ``(var - new_var) * q == p(var) - p(new_var)``."""
    if new_var in p.vars:
        raise InputError(f"variable {new_var!r} already present in {p.vars}")
    i = p._index(var)
    vars = p.vars + (new_var,)
    terms: dict[Exponent, Fraction] = {}
    for exp, c in p.terms.items():
        k = exp[i]
        # (u^k - u'^k)/(u - u') = sum_{j<k} u^j u'^(k-1-j)
        for j in range(k):
            e = exp[:i] + (j,) + exp[i + 1 :] + (k - 1 - j,)
            terms[e] = terms.get(e, 0) + c
    return MultiPoly(vars, terms)


# exact division, gcd, resultant


def divide_exact(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Quotient ``a / b``; raises if ``b`` does not divide ``a``."""
    a, b = a._unify(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lb_exp, lb_c = b.leading_term()
    q: dict[Exponent, Fraction] = {}
    r = a
    while not r.is_zero():
        le, lc = r.leading_term()
        d = tuple(x - y for x, y in zip(le, lb_exp))
        if any(x < 0 for x in d):
            raise InputError("polynomial division is not exact")
        c = lc / lb_c
        q[d] = q.get(d, 0) + c
        r = r - MultiPoly(a.vars, {d: c}) * b
    return MultiPoly(a.vars, q)


def _monic(p: MultiPoly) -> MultiPoly:
    if p.is_zero():
        return p
    return p * (1 / p.leading_term()[1])


def pseudo_remainder(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    a, b = a._unify(b)
    n = b.degree(var)
    if n < 0:
        raise ZeroDivisionError("pseudo-division by zero")
    lc = b.leading_coefficient_in(var)
    x = MultiPoly.variable(var, a.vars)
    r = a
    e = max(a.degree(var) - n + 1, 0)
    while not r.is_zero() and r.degree(var) >= n:
        s = r.leading_coefficient_in(var) * x ** (r.degree(var) - n)
        r = lc * r - s * b
        e -= 1
    return (lc**e) * r if e > 0 else r


def content(p: MultiPoly, var: str) -> MultiPoly:
    """Gcd of the coefficients of ``p`` viewed as a polynomial in ``var``."""
    g = MultiPoly(p.vars)
    for c in p.coefficients_in(var).values():
        g = gcd(g, c)
        if g.is_constant() and not g.is_zero():
            break
    return g


def primitive_part(p: MultiPoly, var: str) -> MultiPoly:
    if p.is_zero():
        return p
    return divide_exact(p, content(p, var))


def gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Monic (in graded-lex leading coefficient) gcd over the rationals."""
    a, b = a._unify(b)
    if a.is_zero():
        return _monic(b)
    if b.is_zero():
        return _monic(a)
    used = set(a.used_vars()) | set(b.used_vars())
    main = next((v for v in a.vars if v in used), None)
    if main is None:
        return MultiPoly.constant(1, a.vars)
    da, db = a.degree(main), b.degree(main)
    if da == 0:
        return gcd(a, content(b, main))
    if db == 0:
        return gcd(content(a, main), b)
    c = gcd(content(a, main), content(b, main))
    pa, pb = primitive_part(a, main), primitive_part(b, main)
    if da < db:
        pa, pb = pb, pa
    while not pb.is_zero():
        r = pseudo_remainder(pa, pb, main)
        pa, pb = pb, (primitive_part(r, main) if not r.is_zero() else r)
    g = pa if pa.degree(main) > 0 else MultiPoly.constant(1, a.vars)
    return _monic(c * g)


def squarefree_part(p: MultiPoly, var: str) -> MultiPoly:
    """``p / gcd(p, dp/dvar)``: same roots in ``var``, all simple."""
    if p.is_zero():
        raise InputError("square-free part of the zero polynomial")
    dp = derivative(p, var)
    if dp.is_zero():
        return p
    return divide_exact(p, gcd(p, dp))


def sylvester_matrix(p: MultiPoly, q: MultiPoly, var: str) -> list[list[MultiPoly]]:
    p, q = p._unify(q)
    m, n = p.degree(var), q.degree(var)
    cp, cq = p.coefficients_in(var), q.coefficients_in(var)
    zero = MultiPoly(p.vars)
    size = m + n
    rows = []
    for i in range(n):
        rows.append([cp.get(m - (j - i), zero) if 0 <= j - i <= m else zero for j in range(size)])
    for i in range(m):
        rows.append([cq.get(n - (j - i), zero) if 0 <= j - i <= n else zero for j in range(size)])
    return rows


def bareiss_determinant(matrix: list[list[MultiPoly]]) -> MultiPoly:
    """Fraction-free determinant of a square matrix of polynomials."""
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        raise InputError("empty matrix")
    vars = a[0][0].vars
    sign = 1
    prev = MultiPoly.constant(1, vars)
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if swap is None:
                return MultiPoly(vars)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = divide_exact(a[k][k] * a[i][j] - a[i][k] * a[k][j], prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """Sylvester resultant in ``var``; the result drops ``var`` from the variable tuple."""
    if p.is_zero() or q.is_zero():
        raise InputError("resultant of a zero polynomial")
    p, q = p._unify(q)
    if p.degree(var) < 1 or q.degree(var) < 1:
        raise InputError(f"both polynomials must have positive degree in {var!r}")
    det = bareiss_determinant(sylvester_matrix(p, q, var))
    return det.with_vars(tuple(v for v in p.vars if v != var))


# text form

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise PolyParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vars: tuple[str, ...]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vars = vars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> MultiPoly:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise PolyParseError(f"unexpected {val!r}", pos)
        return p

    def expr(self) -> MultiPoly:
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            p = p + rhs if op == "+" else p - rhs
        return p

    def term(self) -> MultiPoly:
        p = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> MultiPoly:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if val == "-" else p
        return self.power()

    def power(self) -> MultiPoly:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.take()
            if kind == "op" and val == "-":
                raise PolyParseError("negative exponent", pos)
            if kind != "num":
                raise PolyParseError("exponent must be a non-negative integer literal", pos)
            base = base ** int(val)
            if self.peek()[:2] == ("op", "^"):
                raise PolyParseError("chained exponents need parentheses", self.peek()[2])
        return base

    def atom(self) -> MultiPoly:
        kind, val, pos = self.take()
        if kind == "num":
            value = Fraction(int(val))
            if self.peek()[:2] == ("op", "/"):
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "num":
                    raise PolyParseError("'/' is only allowed inside rational literals a/b", p2)
                if int(v2) == 0:
                    raise PolyParseError("zero denominator", p2)
                value = Fraction(int(val), int(v2))
            return MultiPoly.constant(value, self.vars)
        if kind == "name":
            if val not in self.vars:
                raise PolyParseError(f"unknown identifier {val!r}", pos)
            return MultiPoly.variable(val, self.vars)
        if kind == "op" and val == "(":
            p = self.expr()
            k2, v2, p2 = self.take()
            if (k2, v2) != ("op", ")"):
                raise PolyParseError("expected ')'", p2)
            return p
        if kind == "end":
            raise PolyParseError("unexpected end of expression", pos)
        if val == "/":
            raise PolyParseError("'/' is only allowed inside rational literals a/b", pos)
        raise PolyParseError(f"unexpected {val!r}", pos)


def parse_poly(text: str, vars: Iterable[str]) -> MultiPoly:
    """Parse an ASCII polynomial expression over the declared variables.

    Supports integers, rational literals ``a/b``, ``+ - * ^`` and parentheses.
    Implicit multiplication is not accepted.
    """
    vars = tuple(vars)
    if any(not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v) for v in vars):
        raise InputError(f"invalid variable names {vars}")
    return _Parser(text, vars).parse()


def _format_monomial(exp: Exponent, vars: tuple[str, ...]) -> str:
    parts = []
    for v, e in zip(vars, exp):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def serialize(p: MultiPoly) -> str:
    """Canonical text form, terms in graded-lex order (highest first)."""
    if p.is_zero():
        return "0"
    out = []
    for k, (exp, c) in enumerate(p.terms.items()):
        mono = _format_monomial(exp, p.vars)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)
