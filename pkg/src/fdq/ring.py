"""Exact rational polynomials over a declared variable context.

All polynomials of a context live in a single sympy `PolyRing` over `QQ` with
graded-lex order. The generators are laid out group by group::

    x1..xn | y1..yk | v1..vn | w1..wn | q1_1..q1_n | ... | qm_1..qm_n | t1..tm

Internal code works directly on `PolyElement` values of that ring. `Poly` is
the value type handed to users; it carries its context along.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Any, Callable, Iterable, Mapping, Sequence

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

import sympy as sp
from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing, ring as sympy_ring

import fdq.defaults as fd
from fdq.errors import ContextError, FdqDomainError, NotInvertibleError


logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]


##################################################
# RATIONALS
##################################################


def to_rational(value: Any) -> Any:
    """Reads ints, `Fraction`, sympy rationals, `"p/q"` strings and QQ elements."""
    match value:
        case bool():
            raise ContextError(f"Cannot read {value!r} as a rational")
        case int():
            return QQ(value)
        case Fraction():
            return QQ(value.numerator, value.denominator)
        case str():
            try:
                f = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise ContextError(f"Cannot read {value!r} as a rational") from e
            return QQ(f.numerator, f.denominator)
        case sp.Rational():
            return QQ(int(value.p), int(value.q))
        case _ if QQ.of_type(value):
            return value
        case _:
            raise ContextError(f"Cannot read {value!r} as a rational")


def format_rational(value: Any) -> str:
    num, den = int(value.numerator), int(value.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


##################################################
# MULTI-INDICES
##################################################


def norm(alpha: MultiIndex) -> int:
    return sum(alpha)


def grlex_key(alpha: MultiIndex) -> tuple[int, MultiIndex]:
    return (sum(alpha), alpha)


def add_indices(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def sub_indices_diff(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def leq(beta: MultiIndex, alpha: MultiIndex) -> bool:
    return all(b <= a for a, b in zip(alpha, beta))


def unit_index(n: int, i: int) -> MultiIndex:
    return tuple(int(j == i) for j in range(n))


@lru_cache(maxsize=None)
def multi_indices(n: int, max_order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length `n` with |α| ≤ `max_order`, graded-lex sorted."""
    if max_order < 0:
        return ()
    indices = [a for a in product(range(max_order + 1), repeat=n) if sum(a) <= max_order]
    return tuple(sorted(indices, key=grlex_key))


@lru_cache(maxsize=None)
def sub_indices(alpha: MultiIndex) -> tuple[MultiIndex, ...]:
    """All ν ≤ α componentwise, graded-lex sorted."""
    return tuple(sorted(product(*(range(a + 1) for a in alpha)), key=grlex_key))


def multi_binomial(alpha: MultiIndex, beta: MultiIndex) -> int:
    result = 1
    for a, b in zip(alpha, beta):
        result *= comb(a, b)
    return result


def multi_factorial(alpha: MultiIndex) -> int:
    result = 1
    for a in alpha:
        result *= factorial(a)
    return result


@lru_cache(maxsize=None)
def leibniz_splits(alpha: MultiIndex, parts: int) -> tuple[tuple[tuple[MultiIndex, ...], int], ...]:
    """All ways α = ν_1 + … + ν_parts with their multinomial coefficients.

    ∂^α(f_1⋯f_parts) = Σ coefficient·∂^{ν_1}f_1⋯∂^{ν_parts}f_parts.
    """
    if parts == 1:
        return (((alpha,), 1),)
    splits = []
    for nu in sub_indices(alpha):
        head = multi_binomial(alpha, nu)
        for rest, coefficient in leibniz_splits(sub_indices_diff(alpha, nu), parts - 1):
            splits.append(((nu,) + rest, head * coefficient))
    return tuple(splits)


def falling(e: int, a: int) -> int:
    """e(e-1)...(e-a+1), the factor produced by differentiating x^e a times."""
    result = 1
    for j in range(a):
        result *= e - j
    return result


##################################################
# VARIABLE CONTEXT
##################################################


@lru_cache(maxsize=None)
def _build_ring(n: int, k: int, m: int) -> PolyRing:
    names = (
        [f"x{i}" for i in range(1, n + 1)]
        + [f"y{j}" for j in range(1, k + 1)]
        + [f"v{i}" for i in range(1, n + 1)]
        + [f"w{i}" for i in range(1, n + 1)]
        + [f"q{j}_{i}" for j in range(1, m + 1) for i in range(1, n + 1)]
        + [f"t{j}" for j in range(1, m + 1)]
    )
    logger.debug("Building polynomial ring with %d generators", len(names))
    R, *_ = sympy_ring(names, QQ, grlex)
    return R


class VarContext(BaseModel):
    """Base dimension `n`, fiber dimension `k` and `m` auxiliary q/t groups."""

    model_config = ConfigDict(frozen=True)

    n: int
    k: int = 0
    m: int = fd.AUX_GROUPS

    @field_validator("n")
    @classmethod
    def check_n(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"Base dimension must be at least 1, got {value}")
        return value

    @field_validator("k")
    @classmethod
    def check_k(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"Fiber dimension must be nonnegative, got {value}")
        return value

    @field_validator("m")
    @classmethod
    def check_m(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"At least one auxiliary group is needed, got {value}")
        return value

    def __str__(self):
        return f"VarContext(n={self.n}, k={self.k}, m={self.m})"

    @property
    def ring(self) -> PolyRing:
        return _build_ring(self.n, self.k, self.m)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(str(s) for s in self.ring.symbols)

    @property
    def ngens(self) -> int:
        return 3 * self.n + self.k + self.m * (self.n + 1)

    # Generator indices, all 0-based

    def ix(self, i: int) -> int:
        return i

    def iy(self, j: int) -> int:
        return self.n + j

    def iv(self, i: int) -> int:
        return self.n + self.k + i

    def iw(self, i: int) -> int:
        return 2 * self.n + self.k + i

    def iq(self, group: int, i: int) -> int:
        if group >= self.m:
            raise ContextError(f"Context has {self.m} auxiliary groups, q{group + 1} requested")
        return 3 * self.n + self.k + group * self.n + i

    def it(self, group: int) -> int:
        if group >= self.m:
            raise ContextError(f"Context has {self.m} auxiliary groups, t{group + 1} requested")
        return 3 * self.n + self.k + self.m * self.n + group

    @property
    def x_indices(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def y_indices(self) -> tuple[int, ...]:
        return tuple(range(self.n, self.n + self.k))

    @property
    def xy_indices(self) -> tuple[int, ...]:
        return tuple(range(self.n + self.k))

    @property
    def v_indices(self) -> tuple[int, ...]:
        return tuple(self.iv(i) for i in range(self.n))

    @property
    def w_indices(self) -> tuple[int, ...]:
        return tuple(self.iw(i) for i in range(self.n))

    def q_indices(self, group: int) -> tuple[int, ...]:
        return tuple(self.iq(group, i) for i in range(self.n))

    @property
    def t_indices(self) -> tuple[int, ...]:
        return tuple(self.it(j) for j in range(self.m))

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ContextError(f"Unknown variable {name!r} in {self}") from None

    def gen(self, index: int) -> PolyElement:
        return self.ring.gens[index]

    def monomial(self, exponents: Mapping[int, int], coeff: Any = 1) -> PolyElement:
        """Builds coeff * prod gen_i^e_i from a sparse exponent map."""
        monom = [0] * self.ngens
        for index, e in exponents.items():
            monom[index] = e
        return self.ring.term_new(tuple(monom), to_rational(coeff))

    def x_monomial(self, alpha: MultiIndex) -> PolyElement:
        return self.monomial(dict(zip(self.x_indices, alpha)))

    def group_monomial(self, indices: Sequence[int], alpha: MultiIndex) -> PolyElement:
        return self.monomial(dict(zip(indices, alpha)))


##################################################
# RAW ELEMENT HELPERS
##################################################


def support(p: PolyElement) -> set[int]:
    """Indices of the generators that `p` depends on."""
    result = set()
    for monom in p.itermonoms():
        result.update(i for i, e in enumerate(monom) if e)
    return result


def depends_only_on(p: PolyElement, indices: Iterable[int]) -> bool:
    return support(p) <= set(indices)


def degree_in(p: PolyElement, indices: Sequence[int]) -> int:
    """Total degree of `p` in the given generators, -1 for zero."""
    if not p:
        return -1
    return max(sum(monom[i] for i in indices) for monom in p.itermonoms())


def derivative(p: PolyElement, indices: Sequence[int], alpha: MultiIndex) -> PolyElement:
    """∂^α p, where α_j counts derivatives in generator `indices[j]`."""
    if not any(alpha):
        return p
    out = p.ring.zero
    for monom, coeff in p.iterterms():
        factor = 1
        new = list(monom)
        for index, a in zip(indices, alpha):
            if a:
                e = monom[index]
                if e < a:
                    break
                factor *= falling(e, a)
                new[index] = e - a
        else:
            out[tuple(new)] = coeff * factor
    return out


def relabel(p: PolyElement, mapping: Mapping[int, int]) -> PolyElement:
    """Renames generators, adding exponents when two sources share a target."""
    if not mapping:
        return p
    R = p.ring
    out: dict = {}
    for monom, coeff in p.iterterms():
        new = list(monom)
        for src in mapping:
            new[src] = 0
        for src, dst in mapping.items():
            new[dst] += monom[src]
        key = tuple(new)
        out[key] = out[key] + coeff if key in out else coeff
    return R.from_dict(out)


def split_by(p: PolyElement, indices: Sequence[int]) -> dict[MultiIndex, PolyElement]:
    """Groups `p` by its exponents in `indices`: p = Σ g^e · rest_e."""
    R = p.ring
    parts: dict[MultiIndex, PolyElement] = {}
    for monom, coeff in p.iterterms():
        key = tuple(monom[i] for i in indices)
        rest = list(monom)
        for i in indices:
            rest[i] = 0
        part = parts.setdefault(key, R.zero)
        part[tuple(rest)] = coeff
    return parts


def sorted_terms(p: PolyElement) -> list[tuple[tuple[int, ...], Any]]:
    return sorted(p.iterterms(), key=lambda term: grlex_key(term[0]))


##################################################
# POLY
##################################################


class Poly(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "element")

    context: VarContext
    element: PolyElement

    @model_validator(mode="before")
    @classmethod
    def coerce_element(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        context = data.get("context")
        element = data.get("element")
        if not isinstance(context, VarContext):
            return data
        R = context.ring
        match element:
            case PolyElement() if element.ring == R:
                pass
            case PolyElement():
                raise ValueError(f"Element belongs to {element.ring}, not to {context}")
            case dict():
                element = R.from_dict({tuple(m): to_rational(c) for m, c in element.items()})
            case _:
                element = R.ground_new(to_rational(element))
        return {**data, "element": element}

    @classmethod
    def wrap(cls, context: VarContext, element: PolyElement) -> "Poly":
        return cls.model_construct(context=context, element=element)

    @classmethod
    def constant(cls, context: VarContext, value: Any) -> "Poly":
        return cls.wrap(context, context.ring.ground_new(to_rational(value)))

    @classmethod
    def var(cls, context: VarContext, name: str) -> "Poly":
        return cls.wrap(context, context.gen(context.index_of(name)))

    def __repr__(self):
        return f"Poly({self.element.as_expr()})"

    def __str__(self):
        return str(self.element.as_expr())

    def _coerce(self, other: Any) -> PolyElement:
        if isinstance(other, Poly):
            if other.context != self.context:
                raise ContextError(f"Cannot combine {self.context} with {other.context}")
            return other.element
        return self.context.ring.ground_new(to_rational(other))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.context == other.context and self.element == other.element
        try:
            return self.element == self._coerce(other)
        except ContextError:
            return NotImplemented

    def __hash__(self):
        return hash((self.context, self.element))

    def __add__(self, other):
        return Poly.wrap(self.context, self.element + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Poly.wrap(self.context, self.element - self._coerce(other))

    def __rsub__(self, other):
        return Poly.wrap(self.context, self._coerce(other) - self.element)

    def __neg__(self):
        return Poly.wrap(self.context, -self.element)

    def __mul__(self, other):
        return Poly.wrap(self.context, self.element * self._coerce(other))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return Poly.wrap(self.context, self.element**e)

    def __bool__(self):
        return bool(self.element)

    def diff(self, name: str) -> "Poly":
        return Poly.wrap(self.context, self.element.diff(self.context.index_of(name)))

    def terms(self) -> list[tuple[tuple[int, ...], Any]]:
        """Nonzero terms in canonical graded-lex order."""
        return sorted_terms(self.element)

    def is_zero(self) -> bool:
        return not self.element

    # Series coefficient protocol

    def is_unit(self) -> bool:
        return self.element == self.context.ring.one

    def zero_like(self) -> "Poly":
        return Poly.wrap(self.context, self.context.ring.zero)

    def one_like(self) -> "Poly":
        return Poly.wrap(self.context, self.context.ring.one)


##################################################
# SUBSTITUTION AND INTEGRATION
##################################################


def _target_index(context: VarContext, variable: Any) -> int:
    match variable:
        case str():
            return context.index_of(variable)
        case int() if 0 <= variable < context.ngens:
            return variable
        case Poly(_, element) if element in context.ring.gens:
            return context.ring.gens.index(element)
        case PolyElement() if variable in context.ring.gens:
            return context.ring.gens.index(variable)
        case _:
            raise ContextError(f"Unknown variable {variable!r} in {context}")


def substitute_affine(p: PolyElement, assignments: Mapping[int, PolyElement], t_indices: Iterable[int] = ()) -> PolyElement:
    """Simultaneous substitution on raw elements, targets affine outside `t_indices`."""
    if not assignments:
        return p
    t_set = set(t_indices)
    for index, target in assignments.items():
        for monom in target.itermonoms():
            if sum(e for i, e in enumerate(monom) if i not in t_set) > 1:
                raise FdqDomainError(f"Target of generator {index} is not affine")
    gens = p.ring.gens
    return p.compose([(gens[index], target) for index, target in sorted(assignments.items())])


def poly_substitute_affine(p: Poly, assignments: Mapping[Any, Poly]) -> Poly:
    """Substitutes every assigned variable simultaneously.

    Args:
        p: Polynomial to substitute into.
        assignments: Map from a variable (name, generator index or generator) to
            its replacement. Replacements are of degree at most one in the
            non-parameter variables; the simplex parameters t may appear to any
            degree, as in ``t*v + (1 - t)*w``.

    Returns:
        The composed polynomial.

    Raises:
        ContextError: unknown variable or foreign context.
        FdqDomainError: a replacement that is not affine.
    """
    context = p.context
    raw = {}
    for variable, target in assignments.items():
        if isinstance(target, Poly) and target.context != context:
            raise ContextError(f"Cannot substitute a polynomial of {target.context} into {context}")
        element = target.element if isinstance(target, Poly) else context.ring.ground_new(to_rational(target))
        raw[_target_index(context, variable)] = element
    return Poly.wrap(context, substitute_affine(p.element, raw, context.t_indices))


def integrate_simplex(p: PolyElement, params: Sequence[int]) -> PolyElement:
    """Raw iterated integral over 0 ≤ params[-1] ≤ ... ≤ params[0] ≤ 1."""
    R = p.ring
    result = p
    for depth in range(len(params) - 1, -1, -1):
        index = params[depth]
        upper = R.gens[params[depth - 1]] if depth > 0 else R.one
        antiderivative = R.zero
        for monom, coeff in result.iterterms():
            e = monom[index]
            new = list(monom)
            new[index] = e + 1
            antiderivative[tuple(new)] = coeff / (e + 1)
        result = antiderivative.compose(R.gens[index], upper)
    return result


def poly_integrate_simplex(p: Poly, params: Sequence[Any]) -> Poly:
    """Integrates over the simplex 0 ≤ t_m ≤ … ≤ t_1 ≤ 1, innermost first.

    `params` are ordered outermost first. The parameters no longer appear in the
    result.
    """
    indices = [_target_index(p.context, t) for t in params]
    if len(set(indices)) != len(indices):
        raise ContextError("Simplex parameters must be distinct")
    return Poly.wrap(p.context, integrate_simplex(p.element, indices))


##################################################
# TRUNCATED SERIES
##################################################


class Series(BaseModel):
    """Σ λ^r coeffs[r] for r = 0..order, truncated at λ^{order+1}.

    The coefficients share one type (`Poly`, `DiffOp`, `Cochain` or
    `BaseCochain`). They need `+`, `-`, scalar `*` and `zero_like`; products of
    series also use the coefficient product.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("order", "coeffs")

    order: int
    coeffs: tuple[Any, ...]

    @model_validator(mode="before")
    @classmethod
    def pad_coeffs(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        order, coeffs = data.get("order"), tuple(data.get("coeffs", ()))
        if order is None or order < 0:
            raise ValueError(f"Truncation order must be a nonnegative integer, got {order}")
        if not coeffs:
            raise ValueError("A series needs at least its order-0 coefficient")
        if len(coeffs) > order + 1:
            raise ValueError(f"{len(coeffs)} coefficients given for truncation order {order}")
        zero = coeffs[0].zero_like()
        return {**data, "coeffs": coeffs + (zero,) * (order + 1 - len(coeffs))}

    @classmethod
    def of(cls, coeffs: Sequence[Any], order: int) -> "Series":
        return cls(order=order, coeffs=tuple(coeffs))

    def __getitem__(self, r: int) -> Any:
        return self.coeffs[r]

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def _check_order(self, other: "Series") -> None:
        if not isinstance(other, Series):
            raise ContextError(f"Cannot combine a series with {type(other).__name__}")
        if other.order != self.order:
            raise ContextError(f"Cannot mix truncation orders {self.order} and {other.order}")

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.order == other.order and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __add__(self, other):
        self._check_order(other)
        return Series.model_construct(order=self.order, coeffs=tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check_order(other)
        return Series.model_construct(order=self.order, coeffs=tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return Series.model_construct(order=self.order, coeffs=tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        self._check_order(other)
        coeffs = []
        for r in range(self.order + 1):
            total = self.coeffs[0] * other.coeffs[r]
            for s in range(1, r + 1):
                total = total + self.coeffs[s] * other.coeffs[r - s]
            coeffs.append(total)
        return Series.model_construct(order=self.order, coeffs=tuple(coeffs))

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, scalar: Any) -> "Series":
        return Series.model_construct(order=self.order, coeffs=tuple(a * scalar for a in self.coeffs))

    def map(self, fn: Callable[[Any], Any]) -> "Series":
        return Series.model_construct(order=self.order, coeffs=tuple(fn(c) for c in self.coeffs))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)


def series_invert(S: Series) -> Series:
    """Inverse of a series whose order-0 coefficient is the unit.

    Raises:
        NotInvertibleError: the order-0 coefficient is not the unit.
    """
    unit = S.coeffs[0]
    if not unit.is_unit():
        raise NotInvertibleError("Order-0 coefficient is not the unit")
    inverse = [unit]
    for r in range(1, S.order + 1):
        total = S.coeffs[1] * inverse[r - 1]
        for s in range(2, r + 1):
            total = total + S.coeffs[s] * inverse[r - s]
        inverse.append(-total)
    return Series.model_construct(order=S.order, coeffs=tuple(inverse))
