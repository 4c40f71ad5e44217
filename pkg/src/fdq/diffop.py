"""Differential operators on V×G with polynomial coefficients.

An operator is stored as a map from a derivative multi-index d = (α, γ), where
α counts x-derivatives and γ counts y-derivatives, to its coefficient, a
polynomial in (x, y). The term (d, c) stands for c·∂_x^α∘∂_y^γ.
"""

import logging
from typing import Any, Iterator, Mapping

from pydantic import BaseModel, ConfigDict, model_validator
from sympy.polys.rings import PolyElement

import fdq.ring as fr
from fdq.errors import ContextError, FdqDomainError


logger = logging.getLogger(__name__)


def _clean(terms: Mapping[fr.MultiIndex, PolyElement]) -> dict[fr.MultiIndex, PolyElement]:
    return {d: c for d, c in terms.items() if c}


def _accumulate(terms: dict, key: fr.MultiIndex, coeff: PolyElement) -> None:
    if key in terms:
        terms[key] = terms[key] + coeff
    else:
        terms[key] = coeff


class DiffOp(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "terms")

    context: fr.VarContext
    terms: dict[fr.MultiIndex, PolyElement]

    @model_validator(mode="before")
    @classmethod
    def normalize_terms(cls, data: Any) -> Any:
        """Accepts flat (α+γ) keys or (α, γ) pairs and Poly, element or scalar coefficients."""
        if not isinstance(data, dict):
            return data
        context = data.get("context")
        if not isinstance(context, fr.VarContext):
            return data
        R, width = context.ring, context.n + context.k
        terms: dict = {}
        for key, coeff in dict(data.get("terms", {})).items():
            match key:
                case (tuple() as alpha, tuple() as gamma):
                    key = tuple(alpha) + tuple(gamma)
                case _:
                    key = tuple(key)
            if len(key) != width:
                raise ValueError(f"Derivative index {key} does not match {context}")
            match coeff:
                case fr.Poly(other, element):
                    if other != context:
                        raise ValueError(f"Coefficient from {other} in an operator on {context}")
                    coeff = element
                case PolyElement():
                    pass
                case _:
                    coeff = R.ground_new(fr.to_rational(coeff))
            if not fr.depends_only_on(coeff, context.xy_indices):
                raise ValueError("Operator coefficients may only depend on x and y")
            _accumulate(terms, key, coeff)
        return {**data, "terms": _clean(terms)}

    ##################################################
    # CONSTRUCTORS
    ##################################################

    @classmethod
    def build(cls, context: fr.VarContext, terms: Mapping[fr.MultiIndex, PolyElement]) -> "DiffOp":
        """Trusted constructor: flat keys, raw coefficients in x and y."""
        return cls.model_construct(context=context, terms=_clean(terms))

    @classmethod
    def zero(cls, context: fr.VarContext) -> "DiffOp":
        return cls.model_construct(context=context, terms={})

    @classmethod
    def identity(cls, context: fr.VarContext) -> "DiffOp":
        return cls.model_construct(context=context, terms={(0,) * (context.n + context.k): context.ring.one})

    @classmethod
    def multiplication(cls, context: fr.VarContext, f: Any) -> "DiffOp":
        """L_f, left multiplication by a function of (x, y)."""
        element = f.element if isinstance(f, fr.Poly) else f
        if not isinstance(element, PolyElement):
            element = context.ring.ground_new(fr.to_rational(element))
        if not fr.depends_only_on(element, context.xy_indices):
            raise FdqDomainError("Multiplication operators take functions of x and y")
        return cls.build(context, {(0,) * (context.n + context.k): element})

    @classmethod
    def dx(cls, context: fr.VarContext, i: int, times: int = 1) -> "DiffOp":
        d = [0] * (context.n + context.k)
        d[i] = times
        return cls.model_construct(context=context, terms={tuple(d): context.ring.one})

    @classmethod
    def dy(cls, context: fr.VarContext, j: int, times: int = 1) -> "DiffOp":
        d = [0] * (context.n + context.k)
        d[context.n + j] = times
        return cls.model_construct(context=context, terms={tuple(d): context.ring.one})

    @classmethod
    def from_terms(cls, context: fr.VarContext, terms: Mapping[Any, Any]) -> "DiffOp":
        return cls(context=context, terms=terms)

    ##################################################
    # ACCESSORS
    ##################################################

    def __repr__(self):
        return f"DiffOp({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.context.names
        parts = []
        for d, c in self.sorted_terms():
            derivative = "".join(f"∂{names[i]}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(d) if e)
            parts.append(f"({c.as_expr()})" + (f"·{derivative}" if derivative else ""))
        return " + ".join(parts)

    def split_key(self, d: fr.MultiIndex) -> tuple[fr.MultiIndex, fr.MultiIndex]:
        return d[: self.context.n], d[self.context.n :]

    def sorted_terms(self) -> list[tuple[fr.MultiIndex, PolyElement]]:
        return sorted(self.terms.items(), key=lambda term: fr.grlex_key(term[0]))

    def __iter__(self) -> Iterator[tuple[fr.MultiIndex, PolyElement]]:
        return iter(self.sorted_terms())

    def order(self) -> int:
        """Total operator order, -1 for the zero operator."""
        return max((sum(d) for d in self.terms), default=-1)

    def x_order(self) -> int:
        n = self.context.n
        return max((sum(d[:n]) for d in self.terms), default=-1)

    def fiber_degree(self) -> int:
        """Maximal y-degree of the coefficients, -1 for the zero operator."""
        return max((fr.degree_in(c, self.context.y_indices) for c in self.terms.values()), default=-1)

    def coefficient_degree(self) -> int:
        return max((fr.degree_in(c, self.context.xy_indices) for c in self.terms.values()), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_vertical(self) -> bool:
        n = self.context.n
        return all(not any(d[:n]) for d in self.terms)

    def is_identity(self) -> bool:
        return self == DiffOp.identity(self.context)

    # Series coefficient protocol

    def is_unit(self) -> bool:
        return self.is_identity()

    def zero_like(self) -> "DiffOp":
        return DiffOp.zero(self.context)

    def one_like(self) -> "DiffOp":
        return DiffOp.identity(self.context)

    ##################################################
    # LINEAR STRUCTURE
    ##################################################

    def _check_context(self, other: "DiffOp") -> None:
        if self.context != other.context:
            raise ContextError(f"Cannot combine operators on {self.context} and {other.context}")

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.context == other.context and self.terms == other.terms

    def __hash__(self):
        return hash((self.context, tuple(self.sorted_terms())))

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check_context(other)
        terms = dict(self.terms)
        for d, c in other.terms.items():
            _accumulate(terms, d, c)
        return DiffOp.build(self.context, terms)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __neg__(self) -> "DiffOp":
        return DiffOp.model_construct(context=self.context, terms={d: -c for d, c in self.terms.items()})

    def scale(self, scalar: Any) -> "DiffOp":
        scalar = fr.to_rational(scalar)
        if not scalar:
            return DiffOp.zero(self.context)
        return DiffOp.model_construct(context=self.context, terms={d: c * scalar for d, c in self.terms.items()})

    def __mul__(self, other: Any) -> "DiffOp":
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other: Any) -> "DiffOp":
        return self.scale(other)

    def left_mult(self, f: PolyElement) -> "DiffOp":
        """L_f∘D for a raw coefficient f in (x, y)."""
        if not f:
            return DiffOp.zero(self.context)
        return DiffOp.build(self.context, {d: f * c for d, c in self.terms.items()})

    def right_mult(self, f: PolyElement) -> "DiffOp":
        """D∘L_f for a raw coefficient f in (x, y)."""
        return compose(self, DiffOp.build(self.context, {(0,) * (self.context.n + self.context.k): f}))


class VerticalOp(DiffOp):
    """An operator without x-derivatives."""

    @model_validator(mode="after")
    def check_vertical(self) -> "VerticalOp":
        if not self.is_vertical():
            raise ValueError("Vertical operators have no x-derivative terms")
        return self

    @classmethod
    def of(cls, D: DiffOp) -> "VerticalOp":
        if not D.is_vertical():
            raise FdqDomainError(f"{D} is not vertical")
        return cls.model_construct(context=D.context, terms=dict(D.terms))


##################################################
# ALGEBRA
##################################################


def compose(D1: DiffOp, D2: DiffOp) -> DiffOp:
    """D1∘D2 by the generalized Leibniz rule in all of (x, y)."""
    D1._check_context(D2)
    indices = D1.context.xy_indices
    terms: dict = {}
    for d, a in D1.terms.items():
        nus = fr.sub_indices(d)
        for e, b in D2.terms.items():
            for nu in nus:
                db = fr.derivative(b, indices, nu)
                if not db:
                    continue
                key = fr.add_indices(fr.sub_indices_diff(d, nu), e)
                _accumulate(terms, key, a * db * fr.multi_binomial(d, nu))
    return DiffOp.build(D1.context, terms)


def apply_raw(D: DiffOp, f: PolyElement) -> PolyElement:
    indices = D.context.xy_indices
    result = D.context.ring.zero
    for d, c in D.terms.items():
        df = fr.derivative(f, indices, d)
        if df:
            result += c * df
    return result


def apply(D: DiffOp, f: fr.Poly) -> fr.Poly:
    """D(f) for a function f on V×G."""
    if f.context != D.context:
        raise ContextError(f"Cannot apply an operator on {D.context} to a function of {f.context}")
    return fr.Poly.wrap(D.context, apply_raw(D, f.element))


def deg_component(D: DiffOp, r: int) -> DiffOp:
    """The terms of D with exactly r x-derivatives."""
    n = D.context.n
    return DiffOp.build(D.context, {d: c for d, c in D.terms.items() if sum(d[:n]) == r})


def vertical_part(D: DiffOp) -> DiffOp:
    return deg_component(D, 0)


def complement_part(D: DiffOp) -> DiffOp:
    n = D.context.n
    return DiffOp.build(D.context, {d: c for d, c in D.terms.items() if any(d[:n])})


def right_mult_operators(D: DiffOp) -> dict[fr.MultiIndex, DiffOp]:
    """The operators D^β with D∘L_b = Σ_β L_{∂^β b}∘D^β for base functions b.

    D^β collects binom(α, β)·c·∂_x^{α−β}∂_y^γ over the terms c·∂_x^α∂_y^γ of D
    with β ≤ α.
    """
    n = D.context.n
    collected: dict[fr.MultiIndex, dict] = {}
    for d, c in D.terms.items():
        alpha, gamma = d[:n], d[n:]
        for beta in fr.sub_indices(alpha):
            key = fr.sub_indices_diff(alpha, beta) + gamma
            _accumulate(collected.setdefault(beta, {}), key, c * fr.multi_binomial(alpha, beta))
    return {beta: DiffOp.build(D.context, terms) for beta, terms in collected.items()}


def right_mult_expansion(D: DiffOp, b: fr.Poly) -> list[tuple[fr.Poly, DiffOp]]:
    """Pairs (∂^β b, D^β) with nonzero ∂^β b, graded-lex in β.

    Raises:
        FdqDomainError: b depends on anything but x.
    """
    if not fr.depends_only_on(b.element, D.context.x_indices):
        raise FdqDomainError("Right multiplication is expanded for base functions only")
    pairs = []
    for beta, Dbeta in sorted(right_mult_operators(D).items(), key=lambda item: fr.grlex_key(item[0])):
        db = fr.derivative(b.element, D.context.x_indices, beta)
        if db and not Dbeta.is_zero():
            pairs.append((fr.Poly.wrap(D.context, db), Dbeta))
    return pairs


def diagonal_to_x(context: fr.VarContext) -> dict[int, int]:
    """Relabeling v ↦ x, w ↦ x: restriction of an A^e element to the diagonal."""
    mapping = {context.iv(i): i for i in range(context.n)}
    mapping.update({context.iw(i): i for i in range(context.n)})
    return mapping


def ae_action_raw(a_hat: PolyElement, D: DiffOp, operators: Mapping[fr.MultiIndex, DiffOp] | None = None) -> DiffOp:
    context = D.context
    if operators is None:
        operators = right_mult_operators(D)
    to_x = diagonal_to_x(context)
    result: dict = {}
    for beta, Dbeta in operators.items():
        coeff = fr.derivative(a_hat, context.w_indices, beta)
        if not coeff:
            continue
        coeff = fr.relabel(coeff, to_x)
        for d, c in Dbeta.terms.items():
            _accumulate(result, d, coeff * c)
    return DiffOp.build(context, result)


def ae_action(a_hat: fr.Poly, D: DiffOp) -> DiffOp:
    """The A^e-module action â·D = Σ_β L_{(∂_w^β â)|_{w=v}}∘D^β, read in x.

    For â = a(v)·b(w) this is L_a∘D∘L_b.

    Raises:
        FdqDomainError: â depends on anything but v and w.
    """
    context = D.context
    if a_hat.context != context:
        raise ContextError(f"Cannot act with an element of {a_hat.context} on {context}")
    if not fr.depends_only_on(a_hat.element, context.v_indices + context.w_indices):
        raise FdqDomainError("A^e elements are functions of v and w only")
    return ae_action_raw(a_hat.element, D)
