"""Differential Hochschild cochains with operator values.

A k-cochain is stored in its normal form: a map from k x-multi-indices
(α_1, …, α_k) to operators, standing for

    φ(a_1, …, a_k) = Σ L_{∂^{α_1}a_1 ⋯ ∂^{α_k}a_k} ∘ op.

Base cochains have function values instead; the components of a star product
are base 2-cochains. The bimodule structure is a·D·b = L_a∘D∘L_b.
"""

import logging
from itertools import product
from typing import Any, Callable, Mapping, Sequence

from pydantic import BaseModel, ConfigDict, model_validator
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement

import fdq.diffop as fdo
import fdq.ring as fr
from fdq.errors import BoundViolationError, ContextError, FdqDomainError


logger = logging.getLogger(__name__)

Alphas = tuple[fr.MultiIndex, ...]


def alphas_key(alphas: Alphas) -> tuple[int, tuple[int, ...]]:
    """Graded-lex key on the concatenated multi-indices."""
    flat = tuple(e for alpha in alphas for e in alpha)
    return (sum(flat), flat)


def _add_op(terms: dict, key: Alphas, op: fdo.DiffOp) -> None:
    if op.is_zero():
        return
    terms[key] = terms[key] + op if key in terms else op


def _add_coeff(terms: dict, key: Alphas, coeff: PolyElement) -> None:
    if not coeff:
        return
    terms[key] = terms[key] + coeff if key in terms else coeff


##################################################
# COCHAINS
##################################################


class Cochain(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "arity", "terms")

    context: fr.VarContext
    arity: int
    terms: dict[Alphas, fdo.DiffOp]

    @model_validator(mode="before")
    @classmethod
    def normalize_terms(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not isinstance(data.get("context"), fr.VarContext):
            return data
        context, arity = data["context"], data.get("arity")
        terms: dict = {}
        for alphas, op in dict(data.get("terms", {})).items():
            alphas = tuple(tuple(alpha) for alpha in alphas)
            if len(alphas) != arity or any(len(alpha) != context.n for alpha in alphas):
                raise ValueError(f"Key {alphas} does not fit a {arity}-cochain on {context}")
            if not isinstance(op, fdo.DiffOp) or op.context != context:
                raise ValueError("Cochain values are operators on the same context")
            _add_op(terms, alphas, op)
        return {**data, "terms": {a: op for a, op in terms.items() if not op.is_zero()}}

    @classmethod
    def build(cls, context: fr.VarContext, arity: int, terms: Mapping[Alphas, fdo.DiffOp]) -> "Cochain":
        return cls.model_construct(context=context, arity=arity, terms={a: op for a, op in terms.items() if not op.is_zero()})

    @classmethod
    def zero(cls, context: fr.VarContext, arity: int) -> "Cochain":
        return cls.model_construct(context=context, arity=arity, terms={})

    @classmethod
    def multiplication(cls, context: fr.VarContext) -> "Cochain":
        """ρ₀: a ↦ L_a."""
        return cls.model_construct(context=context, arity=1, terms={((0,) * context.n,): fdo.DiffOp.identity(context)})

    @classmethod
    def from_diffop(cls, D: fdo.DiffOp) -> "Cochain":
        return cls.build(D.context, 0, {(): D})

    def as_diffop(self) -> fdo.DiffOp:
        if self.arity != 0:
            raise ContextError(f"A {self.arity}-cochain is not an operator")
        return self.terms.get((), fdo.DiffOp.zero(self.context))

    def __repr__(self):
        return f"Cochain({self.arity}, {len(self.terms)} terms)"

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{list(alphas)}: [{op}]" for alphas, op in self.sorted_terms())

    def sorted_terms(self) -> list[tuple[Alphas, fdo.DiffOp]]:
        return sorted(self.terms.items(), key=lambda term: alphas_key(term[0]))

    def multi_order(self) -> tuple[int, ...]:
        """Slotwise maximal |α_i|, 0 for an empty cochain."""
        orders = [0] * self.arity
        for alphas in self.terms:
            for i, alpha in enumerate(alphas):
                orders[i] = max(orders[i], sum(alpha))
        return tuple(orders)

    def value_order(self) -> int:
        """Maximal total order of the value operators, -1 for zero."""
        return max((op.order() for op in self.terms.values()), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def zero_like(self) -> "Cochain":
        return Cochain.zero(self.context, self.arity)

    def _check(self, other: "Cochain") -> None:
        if not isinstance(other, Cochain) or other.context != self.context or other.arity != self.arity:
            raise ContextError("Cochains must share context and arity")

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.context == other.context and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.context, self.arity, tuple(self.sorted_terms())))

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        terms = dict(self.terms)
        for alphas, op in other.terms.items():
            _add_op(terms, alphas, op)
        return Cochain.build(self.context, self.arity, terms)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __neg__(self) -> "Cochain":
        return Cochain.model_construct(context=self.context, arity=self.arity, terms={a: -op for a, op in self.terms.items()})

    def __mul__(self, scalar: Any) -> "Cochain":
        return self.map_ops(lambda op: op.scale(scalar))

    __rmul__ = __mul__

    def map_ops(self, fn: Callable[[fdo.DiffOp], fdo.DiffOp]) -> "Cochain":
        return Cochain.build(self.context, self.arity, {a: fn(op) for a, op in self.terms.items()})

    def transpose(self) -> "Cochain":
        """(a, b) ↦ φ(b, a)."""
        if self.arity != 2:
            raise ContextError("Only 2-cochains are transposed")
        return Cochain.build(self.context, 2, {(b, a): op for (a, b), op in self.terms.items()})

    def vertical_part(self) -> "Cochain":
        return self.map_ops(fdo.vertical_part)

    def complement_part(self) -> "Cochain":
        return self.map_ops(fdo.complement_part)


class BaseCochain(BaseModel):
    """Multidifferential operator on the base with function values."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "arity", "terms")

    context: fr.VarContext
    arity: int
    terms: dict[Alphas, PolyElement]

    @model_validator(mode="before")
    @classmethod
    def normalize_terms(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not isinstance(data.get("context"), fr.VarContext):
            return data
        context, arity = data["context"], data.get("arity")
        R = context.ring
        terms: dict = {}
        for alphas, coeff in dict(data.get("terms", {})).items():
            alphas = tuple(tuple(alpha) for alpha in alphas)
            if len(alphas) != arity or any(len(alpha) != context.n for alpha in alphas):
                raise ValueError(f"Key {alphas} does not fit a base {arity}-cochain on {context}")
            match coeff:
                case fr.Poly(_, element):
                    coeff = element
                case PolyElement():
                    pass
                case _:
                    coeff = R.ground_new(fr.to_rational(coeff))
            if not fr.depends_only_on(coeff, context.x_indices):
                raise ValueError("Base cochain coefficients are functions of x only")
            _add_coeff(terms, alphas, coeff)
        return {**data, "terms": {a: c for a, c in terms.items() if c}}

    @classmethod
    def build(cls, context: fr.VarContext, arity: int, terms: Mapping[Alphas, PolyElement]) -> "BaseCochain":
        return cls.model_construct(context=context, arity=arity, terms={a: c for a, c in terms.items() if c})

    @classmethod
    def zero(cls, context: fr.VarContext, arity: int) -> "BaseCochain":
        return cls.model_construct(context=context, arity=arity, terms={})

    @classmethod
    def pointwise(cls, context: fr.VarContext) -> "BaseCochain":
        zero = (0,) * context.n
        return cls.model_construct(context=context, arity=2, terms={(zero, zero): context.ring.one})

    def __repr__(self):
        return f"BaseCochain({self.arity}, {len(self.terms)} terms)"

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{list(alphas)}: {c.as_expr()}" for alphas, c in self.sorted_terms())

    def sorted_terms(self) -> list[tuple[Alphas, PolyElement]]:
        return sorted(self.terms.items(), key=lambda term: alphas_key(term[0]))

    def is_zero(self) -> bool:
        return not self.terms

    def zero_like(self) -> "BaseCochain":
        return BaseCochain.zero(self.context, self.arity)

    def _check(self, other: "BaseCochain") -> None:
        if not isinstance(other, BaseCochain) or other.context != self.context or other.arity != self.arity:
            raise ContextError("Base cochains must share context and arity")

    def __eq__(self, other):
        if not isinstance(other, BaseCochain):
            return NotImplemented
        return self.context == other.context and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.context, self.arity, tuple(self.sorted_terms())))

    def __add__(self, other: "BaseCochain") -> "BaseCochain":
        self._check(other)
        terms = dict(self.terms)
        for alphas, c in other.terms.items():
            _add_coeff(terms, alphas, c)
        return BaseCochain.build(self.context, self.arity, terms)

    def __sub__(self, other: "BaseCochain") -> "BaseCochain":
        return self + (-other)

    def __neg__(self) -> "BaseCochain":
        return BaseCochain.model_construct(context=self.context, arity=self.arity, terms={a: -c for a, c in self.terms.items()})

    def __mul__(self, scalar: Any) -> "BaseCochain":
        scalar = fr.to_rational(scalar)
        return BaseCochain.build(self.context, self.arity, {a: c * scalar for a, c in self.terms.items()})

    __rmul__ = __mul__

    def transpose(self) -> "BaseCochain":
        if self.arity != 2:
            raise ContextError("Only 2-cochains are transposed")
        return BaseCochain.build(self.context, 2, {(b, a): c for (a, b), c in self.terms.items()})


##################################################
# EVALUATION
##################################################


def _check_arguments(context: fr.VarContext, arity: int, args: Sequence[Any]) -> list[PolyElement]:
    if len(args) != arity:
        raise ContextError(f"{arity}-cochain evaluated on {len(args)} arguments")
    raw = []
    for a in args:
        element = a.element if isinstance(a, fr.Poly) else a
        if not isinstance(element, PolyElement):
            element = context.ring.ground_new(fr.to_rational(element))
        if element.ring != context.ring:
            raise ContextError("Argument from a different context")
        if not fr.depends_only_on(element, context.x_indices):
            raise FdqDomainError("Cochain arguments are base functions of x only")
        raw.append(element)
    return raw


def _argument_product(context: fr.VarContext, alphas: Alphas, args: Sequence[PolyElement]) -> PolyElement:
    product = context.ring.one
    for alpha, a in zip(alphas, args):
        factor = fr.derivative(a, context.x_indices, alpha)
        if not factor:
            return factor
        product = product * factor
    return product


def eval_raw(phi: Cochain, args: Sequence[PolyElement]) -> fdo.DiffOp:
    result: dict = {}
    for alphas, op in phi.terms.items():
        f = _argument_product(phi.context, alphas, args)
        if f:
            for d, c in op.terms.items():
                result[d] = result[d] + f * c if d in result else f * c
    return fdo.DiffOp.build(phi.context, result)


def eval(phi: Cochain, *args: Any) -> fdo.DiffOp:  # noqa: A001
    """φ(a_1, …, a_k) for base polynomials a_i.

    Raises:
        ContextError: wrong number of arguments.
        FdqDomainError: an argument depends on more than x.
    """
    return eval_raw(phi, _check_arguments(phi.context, phi.arity, args))


def eval_base_raw(C: BaseCochain, args: Sequence[PolyElement]) -> PolyElement:
    result = C.context.ring.zero
    for alphas, c in C.terms.items():
        f = _argument_product(C.context, alphas, args)
        if f:
            result += c * f
    return result


def eval_base(C: BaseCochain, *args: Any) -> fr.Poly:
    return fr.Poly.wrap(C.context, eval_base_raw(C, _check_arguments(C.context, C.arity, args)))


##################################################
# HOCHSCHILD DIFFERENTIAL
##################################################


def delta(phi: Cochain) -> Cochain:
    """δφ(a_1..a_{k+1}) = a_1·φ(a_2..) + Σ_i (−1)^i φ(.., a_i a_{i+1}, ..) + (−1)^{k+1} φ(a_1..a_k)·a_{k+1}."""
    context, k = phi.context, phi.arity
    zero = (0,) * context.n
    terms: dict = {}
    for alphas, op in phi.terms.items():
        _add_op(terms, (zero,) + alphas, op)
        for i in range(k):
            sign = -1 if i % 2 == 0 else 1
            for (nu, mu), coefficient in fr.leibniz_splits(alphas[i], 2):
                _add_op(terms, alphas[:i] + (nu, mu) + alphas[i + 1 :], op.scale(sign * coefficient))
        sign = -1 if k % 2 == 0 else 1
        for beta, op_beta in fdo.right_mult_operators(op).items():
            _add_op(terms, alphas + (beta,), op_beta.scale(sign))
    return Cochain.build(context, k + 1, terms)


def delta_diffop(D: fdo.DiffOp) -> Cochain:
    """δD(a) = L_a∘D − D∘L_a."""
    return delta(Cochain.from_diffop(D))


##################################################
# RECONSTRUCTION
##################################################


def _predicted(
    context: fr.VarContext, betas: Alphas, known: Mapping[Alphas, fdo.DiffOp], skip_self: bool
) -> fdo.DiffOp:
    """Σ_{α ≤ β} ∏ β_i!/(β_i−α_i)!·L_{x^{Σ(β_i−α_i)}}∘op_α over known terms."""
    total: dict = {}
    for alphas, op in known.items():
        if skip_self and alphas == betas:
            continue
        if not all(fr.leq(a, b) for a, b in zip(alphas, betas)):
            continue
        factor = 1
        rest = (0,) * context.n
        for a, b in zip(alphas, betas):
            for e, f in zip(b, a):
                factor *= fr.falling(e, f)
            rest = fr.add_indices(rest, fr.sub_indices_diff(b, a))
        coefficient = context.x_monomial(rest) * factor
        for d, c in op.terms.items():
            total[d] = total[d] + coefficient * c if d in total else coefficient * c
    return fdo.DiffOp.build(context, total)


def cochain_from_evaluations(
    evaluate: Callable[..., fdo.DiffOp],
    bound: Sequence[int],
    context: fr.VarContext,
    check: bool = True,
) -> Cochain:
    """Recovers the normal form of a cochain from its values on monomials.

    Args:
        evaluate: k-multilinear map taking raw x-monomials to operators.
        bound: Slotwise bound L_i on the multi-order of the cochain.
        context: Context of the cochain.
        check: Also evaluate on the shells |β_i| = L_i + 1 (other slots at 1)
            and require the recovered cochain to reproduce those values.

    Returns:
        The unique cochain within `bound` with the given values.

    Raises:
        BoundViolationError: the values are not those of a cochain within `bound`.
    """
    k = len(bound)
    slots = [fr.multi_indices(context.n, L) for L in bound]
    grid = sorted(product(*slots), key=alphas_key)
    logger.debug("Reconstructing a %d-cochain from %d evaluations, bound %s", k, len(grid), tuple(bound))
    known: dict[Alphas, fdo.DiffOp] = {}
    for betas in grid:
        value = evaluate(*(context.x_monomial(beta) for beta in betas))
        residual = value - _predicted(context, betas, known, skip_self=True)
        if residual.is_zero():
            continue
        divisor = 1
        for beta in betas:
            divisor *= fr.multi_factorial(beta)
        known[betas] = residual.scale(QQ(1, divisor))
    if check:
        zero = (0,) * context.n
        for i, L in enumerate(bound):
            for beta in fr.multi_indices(context.n, L + 1):
                if sum(beta) != L + 1:
                    continue
                betas = tuple(beta if j == i else zero for j in range(k))
                value = evaluate(*(context.x_monomial(b) for b in betas))
                if value != _predicted(context, betas, known, skip_self=False):
                    raise BoundViolationError(f"Evaluation at monomials {betas} exceeds the bound {tuple(bound)}")
    return Cochain.build(context, k, known)


##################################################
# INSERTIONS AND COMPOSITIONS
##################################################


def insert_base(rho: Cochain, C: BaseCochain, transpose: bool = False) -> Cochain:
    """(a, b) ↦ ρ(C(a, b)), or ρ(C(b, a)) when `transpose` is set."""
    context = rho.context
    x = context.x_indices
    terms: dict = {}
    for (gamma,), op in rho.terms.items():
        for (alpha, beta), c in C.terms.items():
            for (g1, g2, g3), coefficient in fr.leibniz_splits(gamma, 3):
                dc = fr.derivative(c, x, g1)
                if not dc:
                    continue
                key = (fr.add_indices(alpha, g2), fr.add_indices(beta, g3))
                if transpose:
                    key = key[::-1]
                _add_op(terms, key, op.left_mult(dc * coefficient))
    return Cochain.build(context, 2, terms)


def compose_pair(phi1: Cochain, phi2: Cochain) -> Cochain:
    """(a, b) ↦ φ1(a)∘φ2(b) for two 1-cochains."""
    context = phi1.context
    terms: dict = {}
    for (alpha,), op1 in phi1.terms.items():
        operators = fdo.right_mult_operators(op1)
        for (beta,), op2 in phi2.terms.items():
            for nu, op1_nu in operators.items():
                _add_op(terms, (alpha, fr.add_indices(beta, nu)), op1_nu * op2)
    return Cochain.build(context, 2, terms)


def compose_left(D: fdo.DiffOp, phi: Cochain) -> Cochain:
    """a ↦ D∘φ(a) for a 1-cochain φ."""
    operators = fdo.right_mult_operators(D)
    terms: dict = {}
    for (alpha,), op in phi.terms.items():
        for nu, D_nu in operators.items():
            _add_op(terms, (fr.add_indices(alpha, nu),), D_nu * op)
    return Cochain.build(phi.context, 1, terms)


def compose_right(phi: Cochain, D: fdo.DiffOp) -> Cochain:
    """a ↦ φ(a)∘D."""
    return phi.map_ops(lambda op: op * D)


def insert(outer: BaseCochain, inner: BaseCochain, slot: int) -> BaseCochain:
    """outer(…, inner(…), …) with inner's arguments taking the place of `slot`."""
    context = outer.context
    x = context.x_indices
    q = inner.arity
    terms: dict = {}
    for outer_alphas, c_out in outer.terms.items():
        for inner_alphas, c_in in inner.terms.items():
            for split, coefficient in fr.leibniz_splits(outer_alphas[slot], q + 1):
                dc = fr.derivative(c_in, x, split[0])
                if not dc:
                    continue
                middle = tuple(fr.add_indices(a, nu) for a, nu in zip(inner_alphas, split[1:]))
                key = outer_alphas[:slot] + middle + outer_alphas[slot + 1 :]
                _add_coeff(terms, key, c_out * dc * coefficient)
    return BaseCochain.build(context, outer.arity + q - 1, terms)


def base_associator(C_s: BaseCochain, C_t: BaseCochain) -> BaseCochain:
    """(a, b, c) ↦ C_s(a, C_t(b, c)) − C_s(C_t(a, b), c)."""
    return insert(C_s, C_t, 1) - insert(C_s, C_t, 0)


##################################################
# OBSTRUCTIONS
##################################################


def _check_aligned(first: Sequence[Any], second: Sequence[Any], what: str) -> None:
    if len(first) != len(second):
        raise ContextError(f"Misaligned truncation orders in {what}: {len(first)} and {len(second)}")


def obstruction_R(rhos: Sequence[Cochain], Cs: Sequence[BaseCochain]) -> Cochain:
    """The cochain R_r whose δ-preimages extend a module structure one order further.

    With ρ_0..ρ_r and C_1..C_{r+1},

        R_r(a, b) = Σ_{s=0}^{r} ρ_s(C_{r+1−s}(b, a)) − Σ_{s=1}^{r} ρ_{r+1−s}(a)∘ρ_s(b),

    so that the module axiom holds at order r+1 iff δρ_{r+1} = R_r.
    """
    _check_aligned(rhos, Cs, "obstruction_R")
    r = len(rhos) - 1
    context = rhos[0].context
    R = Cochain.zero(context, 2)
    for s in range(r + 1):
        R = R + insert_base(rhos[s], Cs[r - s], transpose=True)
    for s in range(1, r + 1):
        R = R - compose_pair(rhos[r + 1 - s], rhos[s])
    logger.debug("R_%d has %d terms", r, len(R.terms))
    return R


def obstruction_E(rhos: Sequence[Cochain], rhos_tilde: Sequence[Cochain], Ts: Sequence[fdo.DiffOp]) -> Cochain:
    """The cochain E_r whose δ-preimages extend an intertwiner one order further.

    With ρ, ρ̃ known to order r+1 and T_0..T_r,

        E_r(a) = Σ_{s=0}^{r} T_s∘ρ_{r+1−s}(a) − ρ̃_{r+1−s}(a)∘T_s,

    so that T∘ρ(a) = ρ̃(a)∘T holds at order r+1 iff δT_{r+1} = E_r.
    """
    r = len(Ts) - 1
    if len(rhos) < r + 2 or len(rhos_tilde) < r + 2:
        raise ContextError(f"obstruction_E at order {r} needs both deformations to order {r + 1}")
    context = Ts[0].context
    E = Cochain.zero(context, 1)
    for s in range(r + 1):
        E = E + compose_left(Ts[s], rhos[r + 1 - s]) - compose_right(rhos_tilde[r + 1 - s], Ts[s])
    return E
