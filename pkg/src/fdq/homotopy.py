"""Bar and Koszul resolutions of the base algebra and the Hochschild homotopy.

Chains are polynomials in the auxiliary variable groups of a context:

- X_k, bar chains: polynomials in v, q_1..q_k, w (0-based groups q0..q(k-1) in
  code). A^e acts through v (left) and w (right).
- K_k, Koszul chains: maps from increasing index tuples I to polynomials in
  (v, w), standing for Σ ω_I ⊗ e^I.

Cochains on either resolution take operator values. The explicit homotopy
`delta_inv` combines the comparison maps F, G and the homotopy s with the
weighted Koszul homotopy.
"""

import logging
from functools import lru_cache
from itertools import combinations, permutations
from typing import Any, Mapping, Sequence

from pydantic import BaseModel, ConfigDict
from sympy.combinatorics import Permutation
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement

import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.ring as fr
from fdq.errors import ContextError, FdqDomainError


logger = logging.getLogger(__name__)

IndexSet = tuple[int, ...]


##################################################
# CHAIN TYPES
##################################################


class BarElement(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "degree", "element")

    context: fr.VarContext
    degree: int
    element: PolyElement

    @classmethod
    def of(cls, context: fr.VarContext, degree: int, element: Any) -> "BarElement":
        if isinstance(element, fr.Poly):
            element = element.element
        allowed = set(context.v_indices + context.w_indices)
        for group in range(degree):
            allowed.update(context.q_indices(group))
        if not fr.depends_only_on(element, allowed):
            raise FdqDomainError(f"Bar chains of degree {degree} depend on v, q1..q{degree} and w only")
        return cls.model_construct(context=context, degree=degree, element=element)

    def __eq__(self, other):
        if not isinstance(other, BarElement):
            return NotImplemented
        return (self.context, self.degree) == (other.context, other.degree) and self.element == other.element

    def __add__(self, other: "BarElement") -> "BarElement":
        _check_same(self, other)
        return BarElement.model_construct(context=self.context, degree=self.degree, element=self.element + other.element)

    def __sub__(self, other: "BarElement") -> "BarElement":
        _check_same(self, other)
        return BarElement.model_construct(context=self.context, degree=self.degree, element=self.element - other.element)

    def is_zero(self) -> bool:
        return not self.element


class KoszulElement(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "degree", "coeffs")

    context: fr.VarContext
    degree: int
    coeffs: dict[IndexSet, PolyElement]

    @classmethod
    def of(cls, context: fr.VarContext, degree: int, coeffs: Mapping[IndexSet, Any]) -> "KoszulElement":
        raw = {}
        allowed = context.v_indices + context.w_indices
        for I, c in coeffs.items():
            I = tuple(I)
            if len(I) != degree or list(I) != sorted(set(I)) or any(i >= context.n for i in I):
                raise ContextError(f"{I} is not an increasing index tuple of length {degree}")
            c = c.element if isinstance(c, fr.Poly) else c
            if not isinstance(c, PolyElement):
                c = context.ring.ground_new(fr.to_rational(c))
            if not fr.depends_only_on(c, allowed):
                raise FdqDomainError("Koszul coefficients are functions of v and w")
            _add_poly(raw, I, c)
        return cls.model_construct(context=context, degree=degree, coeffs=raw)

    @classmethod
    def basis(cls, context: fr.VarContext, I: IndexSet) -> "KoszulElement":
        """1 ⊗ e^I."""
        return cls.of(context, len(I), {tuple(I): 1})

    def __eq__(self, other):
        if not isinstance(other, KoszulElement):
            return NotImplemented
        return (self.context, self.degree) == (other.context, other.degree) and self.coeffs == other.coeffs

    def __add__(self, other: "KoszulElement") -> "KoszulElement":
        _check_same(self, other)
        coeffs = dict(self.coeffs)
        for I, c in other.coeffs.items():
            _add_poly(coeffs, I, c)
        return KoszulElement.model_construct(context=self.context, degree=self.degree, coeffs=coeffs)

    def __sub__(self, other: "KoszulElement") -> "KoszulElement":
        return self + KoszulElement.model_construct(
            context=other.context, degree=other.degree, coeffs={I: -c for I, c in other.coeffs.items()}
        )

    def is_zero(self) -> bool:
        return not self.coeffs


class BarCochain(BaseModel):
    """A^e-module maps X_k → operators, through derivatives at the diagonal.

    The term ((α_1..α_k), β) ↦ op evaluates χ to
    L_{(∂_q^α ∂_w^β χ)|_{q=w=v=x}}∘op.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "degree", "terms")

    context: fr.VarContext
    degree: int
    terms: dict[tuple[fh.Alphas, fr.MultiIndex], fdo.DiffOp]


class KoszulCochain(BaseModel):
    """A^e-linear maps K_k → operators, given by their values on the basis e^I."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("context", "degree", "values")

    context: fr.VarContext
    degree: int
    values: dict[IndexSet, fdo.DiffOp]

    @classmethod
    def build(cls, context: fr.VarContext, degree: int, values: Mapping[IndexSet, fdo.DiffOp]) -> "KoszulCochain":
        return cls.model_construct(context=context, degree=degree, values={I: op for I, op in values.items() if not op.is_zero()})

    def __eq__(self, other):
        if not isinstance(other, KoszulCochain):
            return NotImplemented
        return (self.context, self.degree) == (other.context, other.degree) and self.values == other.values

    def __add__(self, other: "KoszulCochain") -> "KoszulCochain":
        _check_same(self, other)
        values = dict(self.values)
        for I, op in other.values.items():
            values[I] = values[I] + op if I in values else op
        return KoszulCochain.build(self.context, self.degree, values)

    def __sub__(self, other: "KoszulCochain") -> "KoszulCochain":
        return self + other.scale(-1)

    def scale(self, scalar: Any) -> "KoszulCochain":
        return KoszulCochain.build(self.context, self.degree, {I: op.scale(scalar) for I, op in self.values.items()})

    def deg_component(self, r: int) -> "KoszulCochain":
        return KoszulCochain.build(self.context, self.degree, {I: fdo.deg_component(op, r) for I, op in self.values.items()})

    def value_x_order(self) -> int:
        return max((op.x_order() for op in self.values.values()), default=-1)

    def is_zero(self) -> bool:
        return not self.values


def _check_same(first: Any, second: Any) -> None:
    if type(first) is not type(second) or first.context != second.context or first.degree != second.degree:
        raise ContextError("Chains and cochains must share type, context and degree")


def _add_poly(coeffs: dict, I: IndexSet, c: PolyElement) -> None:
    total = coeffs[I] + c if I in coeffs else c
    if total:
        coeffs[I] = total
    else:
        coeffs.pop(I, None)


def increasing_tuples(n: int, k: int) -> list[IndexSet]:
    return list(combinations(range(n), k))


def wedge_sign(j: int, J: IndexSet) -> int:
    """Sign of e^j ∧ e^J against the sorted basis element, 0 when j ∈ J."""
    if j in J:
        return 0
    return -1 if sum(1 for i in J if i < j) % 2 else 1


##################################################
# BAR COMPLEX
##################################################


def _shift_groups(context: fr.VarContext, moves: Mapping[int, Any]) -> dict[int, int]:
    """Generator relabeling from group moves; targets are a q group index, "v" or "w"."""
    mapping = {}
    for source, target in moves.items():
        for c in range(context.n):
            match target:
                case "v":
                    mapping[context.iq(source, c)] = context.iv(c)
                case "w":
                    mapping[context.iq(source, c)] = context.iw(c)
                case int():
                    mapping[context.iq(source, c)] = context.iq(target, c)
    return mapping


@lru_cache(maxsize=None)
def bar_faces(context: fr.VarContext, k: int) -> tuple[tuple[int, dict[int, int]], ...]:
    """The signed relabelings whose sum is ∂_X on X_k."""
    faces = [(1, _shift_groups(context, {0: "v", **{j: j - 1 for j in range(1, k)}}))]
    for i in range(1, k):
        faces.append(((-1) ** i, _shift_groups(context, {j: j - 1 for j in range(i, k)})))
    faces.append(((-1) ** k, _shift_groups(context, {k - 1: "w"})))
    return tuple(faces)


def bar_boundary_raw(context: fr.VarContext, chi: PolyElement, k: int) -> PolyElement:
    result = context.ring.zero
    for sign, mapping in bar_faces(context, k):
        face = fr.relabel(chi, mapping)
        result = result + face if sign > 0 else result - face
    return result


def bar_boundary(chi: BarElement) -> BarElement:
    """∂_X: X_k → X_{k−1}, the alternating sum of diagonal insertions.

    Raises:
        ContextError: on X_0, whose boundary is the augmentation.
    """
    if chi.degree < 1:
        raise ContextError("Bar boundary is defined from degree 1 on")
    return BarElement.model_construct(
        context=chi.context, degree=chi.degree - 1, element=bar_boundary_raw(chi.context, chi.element, chi.degree)
    )


def augmentation(chi: BarElement) -> fr.Poly:
    """ε: X_0 → A, restriction to w = v; the result is read as a function of v."""
    if chi.degree != 0:
        raise ContextError("The augmentation is defined on degree 0")
    context = chi.context
    return fr.Poly.wrap(context, fr.relabel(chi.element, {context.iw(c): context.iv(c) for c in range(context.n)}))


def chain_hX_raw(context: fr.VarContext, chi: PolyElement, k: int) -> PolyElement:
    moved = fr.relabel(chi, {context.iw(c): context.iq(k, c) for c in range(context.n)})
    return moved if k % 2 else -moved


def chain_hX(chi: BarElement) -> BarElement:
    """h_X: X_k → X_{k+1}, χ ↦ (−1)^{k+1} χ with its w slot rebound to q_{k+1}."""
    return BarElement.model_construct(
        context=chi.context, degree=chi.degree + 1, element=chain_hX_raw(chi.context, chi.element, chi.degree)
    )


def bar_h_minus(a: fr.Poly) -> BarElement:
    """h_X^{−1}: A → X_0, a(v) read as a function of (v, w)."""
    return BarElement.of(a.context, 0, a.element)


##################################################
# KOSZUL COMPLEX
##################################################


def _xi(context: fr.VarContext, i: int) -> PolyElement:
    return context.gen(context.iv(i)) - context.gen(context.iw(i))


def koszul_boundary_raw(context: fr.VarContext, coeffs: Mapping[IndexSet, PolyElement]) -> dict[IndexSet, PolyElement]:
    result: dict = {}
    for I, c in coeffs.items():
        for l, i in enumerate(I):
            term = _xi(context, i) * c
            _add_poly(result, I[:l] + I[l + 1 :], term if l % 2 == 0 else -term)
    return result


def koszul_boundary(omega: KoszulElement) -> KoszulElement:
    """∂_K: contraction with v − w, e^I ↦ Σ_l (−1)^l (v^{i_l} − w^{i_l}) e^{I∖i_l}."""
    if omega.degree < 1:
        raise ContextError("Koszul boundary is defined from degree 1 on")
    return KoszulElement.model_construct(
        context=omega.context, degree=omega.degree - 1, coeffs=koszul_boundary_raw(omega.context, omega.coeffs)
    )


def koszul_augmentation(omega: KoszulElement) -> fr.Poly:
    if omega.degree != 0:
        raise ContextError("The augmentation is defined on degree 0")
    context = omega.context
    c = omega.coeffs.get((), context.ring.zero)
    return fr.Poly.wrap(context, fr.relabel(c, {context.iw(i): context.iv(i) for i in range(context.n)}))


def koszul_h_minus(a: fr.Poly) -> KoszulElement:
    """h_K^{−1}: A → K_0."""
    return KoszulElement.of(a.context, 0, {(): a.element})


def chain_hK_raw(context: fr.VarContext, coeffs: Mapping[IndexSet, PolyElement], k: int) -> dict[IndexSet, PolyElement]:
    R = context.ring
    t = R.gens[context.it(0)]
    segment = {context.iw(i): t * R.gens[context.iw(i)] + (1 - t) * R.gens[context.iv(i)] for i in range(context.n)}
    weight = t**k
    result: dict = {}
    for I, c in coeffs.items():
        for j in range(context.n):
            sign = wedge_sign(j, I)
            if not sign:
                continue
            dc = c.diff(context.iw(j))
            if not dc:
                continue
            integrand = fr.substitute_affine(dc, segment, context.t_indices) * weight
            integral = fr.integrate_simplex(integrand, [context.it(0)])
            _add_poly(result, tuple(sorted(I + (j,))), -integral if sign > 0 else integral)
    return result


def chain_hK(omega: KoszulElement) -> KoszulElement:
    """h_K: K_k → K_{k+1}, ω ↦ −Σ_j e^j ∧ ∫_0^1 t^k ∂ω/∂w^j(v, tw + (1−t)v) dt."""
    return KoszulElement.model_construct(
        context=omega.context, degree=omega.degree + 1, coeffs=chain_hK_raw(omega.context, omega.coeffs, omega.degree)
    )


##################################################
# COMPARISON MAPS
##################################################


@lru_cache(maxsize=None)
def _permutations_with_sign(k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    if k < 2:
        return ((tuple(range(k)), 1),)
    return tuple((sigma, Permutation(list(sigma)).signature()) for sigma in permutations(range(k)))


@lru_cache(maxsize=None)
def F_basis(context: fr.VarContext, I: IndexSet) -> PolyElement:
    """F(1 ⊗ e^I) = det[(q_j^{I_l} − v^{I_l})]_{j,l}."""
    R = context.ring
    result = R.zero
    for sigma, sign in _permutations_with_sign(len(I)):
        term = R.one
        for j, l in enumerate(sigma):
            term = term * (R.gens[context.iq(j, I[l])] - R.gens[context.iv(I[l])])
        result = result + term * sign
    return result


def chain_F_raw(context: fr.VarContext, coeffs: Mapping[IndexSet, PolyElement]) -> PolyElement:
    result = context.ring.zero
    for I, c in coeffs.items():
        result = result + c * F_basis(context, I)
    return result


def chain_F(omega: KoszulElement) -> BarElement:
    """F: K_k → X_k, (Fω)(v, q, w) = ω(v, w)(q_1 − v, …, q_k − v)."""
    return BarElement.model_construct(context=omega.context, degree=omega.degree, element=chain_F_raw(omega.context, omega.coeffs))


def chain_G_raw(context: fr.VarContext, chi: PolyElement, k: int) -> dict[IndexSet, PolyElement]:
    if k == 0:
        return {(): chi} if chi else {}
    R = context.ring
    segments = {}
    for j in range(k):
        t = R.gens[context.it(j)]
        for c in range(context.n):
            segments[context.iq(j, c)] = t * R.gens[context.iv(c)] + (1 - t) * R.gens[context.iw(c)]
    params = [context.it(j) for j in range(k)]
    result: dict = {}
    for J in increasing_tuples(context.n, k):
        integrand = R.zero
        for sigma, sign in _permutations_with_sign(k):
            d = chi
            for j, l in enumerate(sigma):
                d = d.diff(context.iq(j, J[l]))
                if not d:
                    break
            if d:
                integrand = integrand + d * sign
        if not integrand:
            continue
        restricted = fr.substitute_affine(integrand, segments, context.t_indices)
        _add_poly(result, J, fr.integrate_simplex(restricted, params))
    return result


def chain_G(chi: BarElement) -> KoszulElement:
    """G: X_k → K_k.

    The coefficient at e^J is the antisymmetrized derivative ∂^k χ/∂q_1^{j_1}⋯∂q_k^{j_k}
    restricted to q_j = t_j v + (1 − t_j) w and integrated over the simplex
    0 ≤ t_k ≤ … ≤ t_1 ≤ 1.
    """
    return KoszulElement.model_construct(
        context=chi.context, degree=chi.degree, coeffs=chain_G_raw(chi.context, chi.element, chi.degree)
    )


def theta_raw(context: fr.VarContext, chi: PolyElement, k: int) -> PolyElement:
    return chain_F_raw(context, chain_G_raw(context, chi, k))


def chain_theta(chi: BarElement) -> BarElement:
    """Θ = F∘G, a projection of X_k commuting with ∂_X."""
    return BarElement.model_construct(context=chi.context, degree=chi.degree, element=theta_raw(chi.context, chi.element, chi.degree))


##################################################
# HOMOTOPY BETWEEN id AND Θ
##################################################


def _split_ae(context: fr.VarContext, chi: PolyElement) -> dict[fr.MultiIndex, PolyElement]:
    """χ = Σ v^a w^c g_{a,c}(q), keyed by the (v, w) exponents."""
    return fr.split_by(chi, context.v_indices + context.w_indices)


@lru_cache(maxsize=None)
def _s_generator(context: fr.VarContext, k: int, monom: tuple[int, ...]) -> PolyElement:
    """s_k on a q-monomial g: h_k(g − Θ_k g − s_{k−1}(∂_X g)), with s_0 = 0."""
    R = context.ring
    if k == 0:
        return R.zero
    g = R.term_new(monom, QQ.one)
    x = g - theta_raw(context, g, k) - chain_s_raw(context, bar_boundary_raw(context, g, k), k - 1)
    return chain_hX_raw(context, x, k)


def chain_s_raw(context: fr.VarContext, chi: PolyElement, k: int) -> PolyElement:
    R = context.ring
    ae = context.v_indices + context.w_indices
    result = R.zero
    for exponents, g in _split_ae(context, chi).items():
        image = R.zero
        for monom, coeff in g.iterterms():
            image = image + _s_generator(context, k, monom) * coeff
        if image:
            result = result + image * context.group_monomial(ae, exponents)
    return result


def chain_s(chi: BarElement) -> BarElement:
    """The A^e-linear homotopy s: X_k → X_{k+1} with id − Θ = s∂_X + ∂_X s.

    Defined on q-only generators and extended A^e-linearly, so that pulling
    cochains back along it stays compatible with the bar/Hochschild
    isomorphism.
    """
    return BarElement.model_construct(context=chi.context, degree=chi.degree + 1, element=chain_s_raw(chi.context, chi.element, chi.degree))


def chain_s_explicit(chi: BarElement) -> BarElement:
    """(id − Θ_{k+1})∘h_X^k, a left-linear homotopy between id and Θ."""
    context, k = chi.context, chi.degree
    lifted = chain_hX_raw(context, chi.element, k)
    return BarElement.model_construct(context=context, degree=k + 1, element=lifted - theta_raw(context, lifted, k + 1))


##################################################
# COCHAINS ON THE RESOLUTIONS
##################################################


@lru_cache(maxsize=None)
def _diagonal(context: fr.VarContext) -> dict[int, int]:
    mapping = fdo.diagonal_to_x(context)
    for group in range(context.m):
        mapping.update({context.iq(group, c): c for c in range(context.n)})
    return mapping


def bar_eval_raw(psi: BarCochain, chi: PolyElement) -> fdo.DiffOp:
    context, k = psi.context, psi.degree
    indices = tuple(i for group in range(k) for i in context.q_indices(group)) + context.w_indices
    diagonal = _diagonal(context)
    result: dict = {}
    for (alphas, beta), op in psi.terms.items():
        flat = tuple(e for alpha in alphas for e in alpha) + beta
        d = fr.derivative(chi, indices, flat)
        if not d:
            continue
        coeff = fr.relabel(d, diagonal)
        for key, c in op.terms.items():
            result[key] = result[key] + coeff * c if key in result else coeff * c
    return fdo.DiffOp.build(context, result)


def bar_eval(psi: BarCochain, chi: BarElement) -> fdo.DiffOp:
    """ψ(χ) = Σ L_{(∂_q^α ∂_w^β χ)|_{q=w=v=x}}∘op."""
    if chi.degree != psi.degree or chi.context != psi.context:
        raise ContextError("Bar cochain and chain must share context and degree")
    return bar_eval_raw(psi, chi.element)


def xi(psi: BarCochain) -> fh.Cochain:
    """Ξ(ψ)(a_1..a_k) = ψ(1 ⊗ a_1 ⊗ … ⊗ a_k ⊗ 1); terms with w-derivatives drop."""
    zero = (0,) * psi.context.n
    return fh.Cochain.build(psi.context, psi.degree, {alphas: op for (alphas, beta), op in psi.terms.items() if beta == zero})


def xi_inverse(phi: fh.Cochain) -> BarCochain:
    """The section of Ξ without w-derivatives."""
    zero = (0,) * phi.context.n
    return BarCochain.model_construct(
        context=phi.context, degree=phi.arity, terms={(alphas, zero): op for alphas, op in phi.terms.items()}
    )


def F_pullback(psi: BarCochain) -> KoszulCochain:
    """(F^k)*ψ: the value at e^I is ψ(F(1 ⊗ e^I))."""
    context = psi.context
    values = {I: bar_eval_raw(psi, F_basis(context, I)) for I in increasing_tuples(context.n, psi.degree)}
    return KoszulCochain.build(context, psi.degree, values)


def koszul_eval(kappa: KoszulCochain, coeffs: Mapping[IndexSet, PolyElement]) -> fdo.DiffOp:
    """κ(Σ ω_I ⊗ e^I) = Σ ω_I·κ(e^I) through the A^e action on operators."""
    result = fdo.DiffOp.zero(kappa.context)
    for I, c in coeffs.items():
        value = kappa.values.get(I)
        if value is not None:
            result = result + fdo.ae_action_raw(c, value)
    return result


def koszul_delta(kappa: KoszulCochain) -> KoszulCochain:
    """δ_K κ = κ∘∂_K."""
    context, k = kappa.context, kappa.degree
    values = {}
    for I in increasing_tuples(context.n, k + 1):
        values[I] = koszul_eval(kappa, koszul_boundary_raw(context, {I: context.ring.one}))
    return KoszulCochain.build(context, k + 1, values)


def koszul_star(kappa: KoszulCochain) -> KoszulCochain:
    """δ_K^*κ(e^J) = −Σ_j κ(e^j ∧ e^J)∘∂/∂x^j."""
    context, k = kappa.context, kappa.degree
    if k < 1:
        raise ContextError("δ_K^* is defined from degree 1 on")
    values = {}
    for J in increasing_tuples(context.n, k - 1):
        total = fdo.DiffOp.zero(context)
        for j in range(context.n):
            sign = wedge_sign(j, J)
            value = kappa.values.get(tuple(sorted(J + (j,)))) if sign else None
            if value is None:
                continue
            total = total + (value * fdo.DiffOp.dx(context, j)).scale(-sign)
        values[J] = total
    return KoszulCochain.build(context, k - 1, values)


def koszul_anticommutator(kappa: KoszulCochain) -> KoszulCochain:
    """δ_K∘δ_K^* + δ_K^*∘δ_K, which equals Σ_r (r + k)·κ_r on the deg components κ_r."""
    if kappa.degree < 1:
        raise ContextError("δ_K^* is defined from degree 1 on")
    return koszul_delta(koszul_star(kappa)) + koszul_star(koszul_delta(kappa))


def koszul_weighted(kappa: KoszulCochain) -> KoszulCochain:
    """Σ_r (r + k)·κ_r."""
    result = KoszulCochain.build(kappa.context, kappa.degree, {})
    for r in range(kappa.value_x_order() + 1):
        result = result + kappa.deg_component(r).scale(r + kappa.degree)
    return result


def koszul_delta_inv(kappa: KoszulCochain) -> KoszulCochain:
    """Weighted homotopy: δ_K^* applied to each deg-r part of the values with weight 1/(k+r).

    Raises:
        ContextError: on 0-cochains.
    """
    k = kappa.degree
    if k < 1:
        raise ContextError("The Koszul homotopy is defined from degree 1 on")
    result = KoszulCochain.build(kappa.context, k - 1, {})
    for r in range(kappa.value_x_order() + 1):
        part = kappa.deg_component(r)
        if not part.is_zero():
            result = result + koszul_star(part).scale(QQ(1, k + r))
    return result


##################################################
# HOCHSCHILD HOMOTOPY
##################################################


def delta_inv_bound(phi: fh.Cochain) -> int:
    """Slot bound on the multi-order of δ⁻¹φ: max(l + 2, max_i L_i + 1)."""
    return max(phi.value_order() + 2, max(phi.multi_order(), default=0) + 1)


def delta_inv(phi: fh.Cochain) -> fh.Cochain:
    """The explicit homotopy δ⁻¹: k-cochains → (k−1)-cochains.

    δ⁻¹ = Ξ∘(G*∘δ_K⁻¹∘F* + s*)∘Ξ⁻¹, evaluated on monomial arguments and
    recovered in normal form. δδ⁻¹φ + δ⁻¹δφ = φ for k ≥ 1, so δ⁻¹φ is a
    primitive of every closed φ.

    Raises:
        ContextError: on 0-cochains, or when the context has fewer than k
            auxiliary groups.
    """
    context, k = phi.context, phi.arity
    if k < 1:
        raise ContextError("δ⁻¹ is defined from degree 1 on")
    if k > context.m:
        raise ContextError(f"δ⁻¹ on {k}-cochains needs {k} auxiliary groups, {context} has {context.m}")
    if phi.is_zero():
        return fh.Cochain.zero(context, k - 1)
    psi = xi_inverse(phi)
    kappa = koszul_delta_inv(F_pullback(psi))
    R = context.ring

    def evaluate(*args: PolyElement) -> fdo.DiffOp:
        g = R.one
        for group, a in enumerate(args):
            g = g * fr.relabel(a, {c: context.iq(group, c) for c in range(context.n)})
        koszul_leg = koszul_eval(kappa, chain_G_raw(context, g, k - 1))
        if k == 1:
            return koszul_leg
        return koszul_leg + bar_eval_raw(psi, chain_s_raw(context, g, k - 1))

    bound = delta_inv_bound(phi)
    logger.debug("δ⁻¹ on a %d-cochain with %d terms, slot bound %d", k, len(phi.terms), bound)
    return fh.cochain_from_evaluations(evaluate, [bound] * (k - 1), context)
