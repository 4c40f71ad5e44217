"""Star products, deformed module structures, equivalences and the commutant.

A module deformation is a series ρ of 1-cochains with f•a = Σ λ^r ρ_r(a)(f),
a right module over a star product ⋆ on the base:

    Σ_{s+t=r} ρ_t(b)∘ρ_s(a) = Σ_{s+t=r} ρ_s(C_t(a, b))   for every r.

Every construction here goes order by order through the homotopy δ⁻¹ and
asserts the closedness of each obstruction before inverting it.
"""

import logging
from itertools import product
from typing import Any, Optional, Sequence

from pydantic import BaseModel, ConfigDict, model_validator
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

import fdq.defaults as fd
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.homotopy as fhom
import fdq.ring as fr
from fdq.errors import (
    ContextError,
    FdqDomainError,
    InvalidModuleError,
    InvalidStarProductError,
    NotInCommutantError,
    ObstructionError,
)
from fdq.report import Report


logger = logging.getLogger(__name__)


##################################################
# DEFORMATION OBJECTS
##################################################


class _SeriesObject(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    __match_args__ = ("series",)

    series: fr.Series

    @property
    def context(self) -> fr.VarContext:
        return self.series[0].context

    @property
    def order(self) -> int:
        return self.series.order

    def __getitem__(self, r: int) -> Any:
        return self.series[r]

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.series == other.series


class StarProduct(_SeriesObject):
    """f⋆g = Σ λ^r C_r(f, g), with C_0 the pointwise product."""

    @model_validator(mode="after")
    def check_pointwise(self) -> "StarProduct":
        first = self.series[0]
        if not isinstance(first, fh.BaseCochain) or first != fh.BaseCochain.pointwise(first.context):
            raise ValueError("A star product starts with the pointwise product")
        if any(not isinstance(C, fh.BaseCochain) or C.arity != 2 for C in self.series):
            raise ValueError("Star product components are base 2-cochains")
        return self


class ModuleDeformation(_SeriesObject):
    """f•a = Σ λ^r ρ_r(a)(f), with ρ_0(a) = L_a."""

    @model_validator(mode="after")
    def check_multiplication(self) -> "ModuleDeformation":
        first = self.series[0]
        if not isinstance(first, fh.Cochain) or first != fh.Cochain.multiplication(first.context):
            raise ValueError("A module deformation starts with the multiplication cochain")
        if any(not isinstance(rho, fh.Cochain) or rho.arity != 1 for rho in self.series):
            raise ValueError("Module deformation components are 1-cochains")
        return self


class Equivalence(_SeriesObject):
    """A series of operators T = id + Σ λ^r T_r."""

    @model_validator(mode="after")
    def check_identity(self) -> "Equivalence":
        if not isinstance(self.series[0], fdo.DiffOp) or not self.series[0].is_identity():
            raise ValueError("An equivalence starts with the identity")
        return self

    def inverse(self) -> fr.Series:
        return fr.series_invert(self.series)


class CommutantElement(_SeriesObject):
    """A series of operators commuting with a deformed action, vertical at order 0."""

    @model_validator(mode="after")
    def check_vertical(self) -> "CommutantElement":
        if not isinstance(self.series[0], fdo.DiffOp) or not self.series[0].is_vertical():
            raise ValueError("The order-0 term of a commutant element is vertical")
        return self


def as_series(value: Any, order: int) -> fr.Series:
    """Accepts a series, a series object or a single operator (then constant in λ)."""
    match value:
        case fr.Series():
            if value.order != order:
                raise ContextError(f"Cannot mix truncation orders {value.order} and {order}")
            return value
        case _SeriesObject(series):
            return as_series(series, order)
        case fdo.DiffOp():
            return fr.Series.of([value], order)
        case _:
            raise ContextError(f"Expected a series of operators, got {type(value).__name__}")


##################################################
# WITNESSES
##################################################


def _format_args(args: Sequence[Any]) -> str:
    return "(" + ", ".join(str(a.as_expr()) for a in args) + ")"


def cochain_witness(defect: Any) -> Optional[str]:
    """Arguments x^{α_i} of the graded-lex minimal term and the defect value there."""
    if defect.is_zero():
        return None
    alphas, _ = defect.sorted_terms()[0]
    args = [defect.context.x_monomial(alpha) for alpha in alphas]
    if isinstance(defect, fh.BaseCochain):
        value = str(fh.eval_base_raw(defect, args).as_expr())
    else:
        value = str(fh.eval_raw(defect, args))
    return f"{_format_args(args)} -> {value}"


def witness_arguments(defect: Any) -> list[fr.Poly]:
    """The arguments named by `cochain_witness`, for replaying a failure."""
    alphas, _ = defect.sorted_terms()[0]
    return [fr.Poly.wrap(defect.context, defect.context.x_monomial(alpha)) for alpha in alphas]


##################################################
# STAR PRODUCTS
##################################################


def _check_pi(pi: Sequence[Sequence[Any]], n: int) -> list[list[Any]]:
    if len(pi) != n or any(len(row) != n for row in pi):
        raise FdqDomainError(f"Poisson matrix must be {n}x{n}")
    matrix = [[fr.to_rational(value) for value in row] for row in pi]
    for i in range(n):
        for j in range(n):
            if matrix[i][j] != -matrix[j][i]:
                raise FdqDomainError("Poisson matrix must be antisymmetric")
    return matrix


def moyal(context: fr.VarContext, pi: Sequence[Sequence[Any]], order: int) -> StarProduct:
    """Weyl-Moyal star product of a constant Poisson matrix π.

    C_r(a, b) = 1/(r!·2^r) Σ π^{i_1 j_1}⋯π^{i_r j_r} ∂_{i_1…i_r}a · ∂_{j_1…j_r}b.

    Raises:
        FdqDomainError: π is not an antisymmetric n×n matrix.
    """
    n = context.n
    matrix = _check_pi(pi, n)
    components = [fh.BaseCochain.pointwise(context)]
    factorial = 1
    for r in range(1, order + 1):
        factorial *= r
        coefficients: dict = {}
        for pairs in product(product(range(n), repeat=2), repeat=r):
            weight = QQ.one
            for i, j in pairs:
                weight *= matrix[i][j]
                if not weight:
                    break
            if not weight:
                continue
            alpha, beta = [0] * n, [0] * n
            for i, j in pairs:
                alpha[i] += 1
                beta[j] += 1
            key = (tuple(alpha), tuple(beta))
            coefficients[key] = coefficients.get(key, QQ.zero) + weight
        scale = QQ(1, factorial * 2**r)
        terms = {key: context.ring.ground_new(c * scale) for key, c in coefficients.items() if c}
        components.append(fh.BaseCochain.build(context, 2, terms))
    logger.info("Moyal star product up to order %d on %s", order, context)
    return StarProduct(series=fr.Series.of(components, order))


def pointwise(context: fr.VarContext, order: int) -> StarProduct:
    """The undeformed product, C_r = 0 for r ≥ 1."""
    return StarProduct(series=fr.Series.of([fh.BaseCochain.pointwise(context)], order))


def associativity_defect(star: StarProduct, r: int) -> fh.BaseCochain:
    """Σ_{s+t=r} C_s(a, C_t(b, c)) − C_s(C_t(a, b), c)."""
    defect = fh.BaseCochain.zero(star.context, 3)
    for s in range(r + 1):
        defect = defect + fh.base_associator(star[s], star[r - s])
    return defect


def verify_associativity(star: StarProduct) -> Report:
    report = Report(title="associativity")
    with report.timed():
        for r in range(1, star.order + 1):
            defect = associativity_defect(star, r)
            report.record("associativity", defect.is_zero(), order=r, witness=cochain_witness(defect))
        for r in range(1, star.order + 1):
            report.record("unit", _is_unital(star[r]), order=r)
    return report


def _is_unital(C: fh.BaseCochain) -> bool:
    """C(1, a) = C(a, 1) = 0: no term differentiates one slot zero times."""
    zero = (0,) * C.context.n
    return all(alpha != zero and beta != zero for alpha, beta in C.terms)


##################################################
# MODULE DEFORMATIONS
##################################################


def lifted_module(star: StarProduct) -> ModuleDeformation:
    """f•a = Σ λ^r C_r(f, a) with the base derivatives on f lifted to P.

    Every star product gives this module, the fiber variables entering as
    parameters only.
    """
    context = star.context
    y_zero = (0,) * context.k
    components = []
    for C in star.series:
        terms: dict = {}
        for (alpha, beta), c in C.terms.items():
            op = fdo.DiffOp.build(context, {alpha + y_zero: c})
            terms[(beta,)] = terms[(beta,)] + op if (beta,) in terms else op
        components.append(fh.Cochain.build(context, 1, terms))
    return ModuleDeformation(series=fr.Series.of(components, star.order))


def module_defect(rho: ModuleDeformation, star: StarProduct, r: int) -> fh.Cochain:
    """(a, b) ↦ Σ_{s+t=r} ρ_t(b)∘ρ_s(a) − ρ_s(C_t(a, b))."""
    context = rho.context
    composed = fh.Cochain.zero(context, 2)
    inserted = fh.Cochain.zero(context, 2)
    for s in range(r + 1):
        composed = composed + fh.compose_pair(rho[r - s], rho[s])
        inserted = inserted + fh.insert_base(rho[s], star[r - s])
    return composed.transpose() - inserted


def unit_defect(rho: ModuleDeformation, r: int) -> fdo.DiffOp:
    """ρ_r(1) − δ_{r0}·id."""
    value = fh.eval_raw(rho[r], [rho.context.ring.one])
    return value - fdo.DiffOp.identity(rho.context) if r == 0 else value


def verify_module(rho: ModuleDeformation, star: StarProduct) -> Report:
    """Structural check of the right-module axiom and of f•1 = f at every order."""
    if rho.order != star.order:
        raise ContextError(f"Cannot mix truncation orders {rho.order} and {star.order}")
    report = Report(title="module")
    with report.timed():
        for r in range(rho.order + 1):
            defect = module_defect(rho, star, r)
            report.record("module axiom", defect.is_zero(), order=r, witness=cochain_witness(defect))
        for r in range(rho.order + 1):
            defect = unit_defect(rho, r)
            report.record("unit", defect.is_zero(), order=r, witness=None if defect.is_zero() else f"(1) -> {defect}")
    return report


def build_module_deformation(star: StarProduct) -> ModuleDeformation:
    """ρ_{r+1} = δ⁻¹(R_r), order by order.

    Raises:
        InvalidStarProductError: some R_r is not closed.
        ObstructionError: δρ_{r+1} differs from R_r.
    """
    context = star.context
    rhos = [fh.Cochain.multiplication(context)]
    for r in range(star.order):
        R = fh.obstruction_R(rhos, [star[s] for s in range(1, r + 2)])
        if not fh.delta(R).is_zero():
            raise InvalidStarProductError(f"R_{r} is not closed, the star product is not associative at order {r + 1}")
        rho_next = fhom.delta_inv(R)
        if fh.delta(rho_next) != R:
            raise ObstructionError(f"δρ_{r + 1} differs from R_{r}")
        logger.info("Module deformation: order %d has %d terms", r + 1, len(rho_next.terms))
        rhos.append(rho_next)
    return ModuleDeformation(series=fr.Series.of(rhos, star.order))


##################################################
# EQUIVALENCES
##################################################


def gauge(rho: ModuleDeformation, T: Any) -> ModuleDeformation:
    """ρ̃(a) = T∘ρ(a)∘T⁻¹, the structure that T intertwines with ρ."""
    series = as_series(T, rho.order)
    inverse = fr.series_invert(series)
    components = []
    for r in range(rho.order + 1):
        total = fh.Cochain.zero(rho.context, 1)
        for a in range(r + 1):
            for b in range(r - a + 1):
                c = r - a - b
                if series[a].is_zero() or inverse[c].is_zero() or rho[b].is_zero():
                    continue
                total = total + fh.compose_right(fh.compose_left(series[a], rho[b]), inverse[c])
        components.append(total)
    return ModuleDeformation(series=fr.Series.of(components, rho.order))


def equivalence_defect(T: Equivalence, rho: ModuleDeformation, rho_tilde: ModuleDeformation, r: int) -> fh.Cochain:
    """a ↦ Σ_s T_s∘ρ_{r−s}(a) − ρ̃_{r−s}(a)∘T_s."""
    defect = fh.Cochain.zero(rho.context, 1)
    for s in range(r + 1):
        defect = defect + fh.compose_left(T[s], rho[r - s]) - fh.compose_right(rho_tilde[r - s], T[s])
    return defect


def verify_equivalence(T: Equivalence, rho: ModuleDeformation, rho_tilde: ModuleDeformation) -> Report:
    """Structural check of T(f•a) = T(f)•̃a."""
    report = Report(title="equivalence")
    with report.timed():
        for r in range(rho.order + 1):
            defect = equivalence_defect(T, rho, rho_tilde, r)
            report.record("intertwining", defect.is_zero(), order=r, witness=cochain_witness(defect))
    return report


def find_equivalence(rho: ModuleDeformation, rho_tilde: ModuleDeformation) -> Equivalence:
    """T with T∘ρ(a) = ρ̃(a)∘T, built from T_{r+1} = δ⁻¹(E_r) without vertical part.

    Raises:
        InvalidModuleError: some E_r is not closed, so the inputs are not
            modules over the same star product.
    """
    if rho.order != rho_tilde.order:
        raise ContextError(f"Cannot mix truncation orders {rho.order} and {rho_tilde.order}")
    Ts = [fdo.DiffOp.identity(rho.context)]
    for r in range(rho.order):
        E = fh.obstruction_E(list(rho.series), list(rho_tilde.series), Ts)
        if not fh.delta(E).is_zero():
            raise InvalidModuleError(f"E_{r} is not closed, the deformations are not modules over the same product")
        T_next = fdo.complement_part(fhom.delta_inv(E).as_diffop())
        logger.info("Equivalence: order %d has %d terms", r + 1, len(T_next.terms))
        Ts.append(T_next)
    return Equivalence(series=fr.Series.of(Ts, rho.order))


def fibration_defect(rho: ModuleDeformation, star: StarProduct, r: int) -> tuple[dict, dict]:
    """Terms of a ↦ ρ_r(a)(1) for r ≥ 1 and of (a, b) ↦ ρ_r(b)(a) − C_r(a, b).

    The second map is keyed by (α, β) with coefficients in (x, y).
    """
    n = rho.context.n
    on_one: dict = {}
    on_base: dict = {}
    for (beta,), op in rho[r].terms.items():
        for d, c in op.terms.items():
            if any(d[n:]):
                continue
            alpha = d[:n]
            if not any(alpha) and r > 0:
                on_one[(beta,)] = c
            key = (alpha, beta)
            on_base[key] = on_base[key] + c if key in on_base else c
    for key, c in star[r].terms.items():
        on_base[key] = on_base[key] - c if key in on_base else -c
    return on_one, {key: c for key, c in on_base.items() if c}


def verify_fibration(rho: ModuleDeformation, star: StarProduct) -> Report:
    """Structural check of 1•a = p*a and (p*a)•b = p*(a⋆b)."""
    report = Report(title="fibration")
    with report.timed():
        for r in range(rho.order + 1):
            on_one, on_base = fibration_defect(rho, star, r)
            report.record("unit action", not on_one, order=r, witness=_term_witness(on_one))
            report.record("base action", not on_base, order=r, witness=_term_witness(on_base))
    return report


def _term_witness(terms: dict) -> Optional[str]:
    if not terms:
        return None
    key = min(terms, key=fh.alphas_key)
    return f"{[list(alpha) for alpha in key]} -> {terms[key].as_expr()}"


def normalize_fibration(rho: ModuleDeformation) -> tuple[ModuleDeformation, Equivalence]:
    """A fibration-preserving structure equivalent to ρ.

    With S = id + Σ λ^r S_r, S_r = Σ_β c_β ∂_x^β where c_β is the constant
    term of the β-operator of ρ_r, one has S(p*a) = 1•a. The returned
    equivalence is T = S⁻¹ and the returned structure ρ̃(a) = T∘ρ(a)∘T⁻¹, so
    that 1•̃a = p*a.
    """
    context = rho.context
    n, k = context.n, context.k
    zero = (0,) * (n + k)
    S = [fdo.DiffOp.identity(context)]
    for r in range(1, rho.order + 1):
        terms: dict = {}
        for (beta,), op in rho[r].terms.items():
            c = op.terms.get(zero)
            if c:
                terms[beta + (0,) * k] = c
        S.append(fdo.DiffOp.build(context, terms))
    T = fr.series_invert(fr.Series.of(S, rho.order))
    logger.info("Fibration normalization: %d nontrivial orders", sum(not s.is_zero() for s in S[1:]))
    return gauge(rho, T), Equivalence(series=T)


##################################################
# COMMUTANT
##################################################


def commutant_defect(D: fr.Series, rho: ModuleDeformation, r: int) -> fh.Cochain:
    """a ↦ Σ_s D_s∘ρ_{r−s}(a) − ρ_{r−s}(a)∘D_s."""
    defect = fh.Cochain.zero(rho.context, 1)
    for s in range(r + 1):
        if not D[s].is_zero():
            defect = defect + fh.compose_left(D[s], rho[r - s]) - fh.compose_right(rho[r - s], D[s])
    return defect


def check_commutant_membership(D: Any, rho: ModuleDeformation) -> bool:
    """D∘ρ(a) = ρ(a)∘D modulo λ^{N+1}, as a cochain identity in a."""
    series = as_series(D, rho.order)
    return all(commutant_defect(series, rho, r).is_zero() for r in range(rho.order + 1))


def quantize_vertical(A: fdo.DiffOp, rho: ModuleDeformation, order: Optional[int] = None) -> CommutantElement:
    """ρ′(A) = A + Σ λ^r ρ′_r(A), the commutant element starting with A.

    Each correction is −δ⁻¹ of the commutation defect, with its vertical part
    removed.

    Raises:
        FdqDomainError: A is not vertical.
        InvalidModuleError: a defect is not closed.
    """
    if not A.is_vertical():
        raise FdqDomainError(f"{A} is not vertical")
    order = rho.order if order is None else order
    As = [A]
    for r in range(order):
        defect = fh.Cochain.zero(rho.context, 1)
        for s in range(r + 1):
            defect = defect + fh.compose_right(rho[r + 1 - s], As[s]) - fh.compose_left(As[s], rho[r + 1 - s])
        if defect.is_zero():
            As.append(fdo.DiffOp.zero(rho.context))
            continue
        if not fh.delta(defect).is_zero():
            raise InvalidModuleError(f"Commutation defect at order {r + 1} is not closed")
        As.append(fdo.complement_part(-fhom.delta_inv(defect).as_diffop()))
    return CommutantElement(series=fr.Series.of(As, order))


def rho_prime(A: Any, rho: ModuleDeformation) -> CommutantElement:
    """ρ′ on a series Σ λ^j A_j of vertical operators."""
    series = as_series(A, rho.order)
    total = [fdo.DiffOp.zero(rho.context) for _ in range(rho.order + 1)]
    for j in range(rho.order + 1):
        if series[j].is_zero():
            continue
        image = quantize_vertical(series[j], rho, order=rho.order - j)
        for i in range(rho.order - j + 1):
            total[i + j] = total[i + j] + image[i]
    return CommutantElement(series=fr.Series.of(total, rho.order))


def rho_prime_inverse(D: Any, rho: ModuleDeformation) -> fr.Series:
    """The vertical series A with ρ′(A) = D.

    Raises:
        NotInCommutantError: a residual leading term is not vertical.
    """
    residual = list(as_series(D, rho.order))
    As = []
    for r in range(rho.order + 1):
        lead = residual[r]
        if not lead.is_vertical():
            raise NotInCommutantError(f"Residual at order {r} is not vertical: {lead}")
        As.append(lead)
        if lead.is_zero():
            continue
        image = quantize_vertical(lead, rho, order=rho.order - r)
        for i in range(rho.order - r + 1):
            residual[r + i] = residual[r + i] - image[i]
    return fr.Series.of(As, rho.order)


def star_prime(A: Any, B: Any, rho: ModuleDeformation) -> fr.Series:
    """A⋆′B = ρ′⁻¹(ρ′(A)∘ρ′(B))."""
    product_series = rho_prime(A, rho).series * rho_prime(B, rho).series
    return rho_prime_inverse(product_series, rho)


def _check_vector_field(xi: fdo.DiffOp) -> None:
    n = xi.context.n
    if not xi.is_vertical() or any(sum(d[n:]) != 1 for d in xi.terms):
        raise FdqDomainError(f"{xi} is not a vertical vector field")


def gauge_commutator(xi: fdo.DiffOp, eta: fdo.DiffOp, rho: ModuleDeformation) -> fr.Series:
    """ξ⋆′η − η⋆′ξ; its order-0 term is the Lie bracket [ξ, η]."""
    _check_vector_field(xi)
    _check_vector_field(eta)
    return star_prime(xi, eta, rho) - star_prime(eta, xi, rho)


def _coefficients(obj: Any) -> tuple[Optional[fr.VarContext], list]:
    match obj:
        case fdo.DiffOp(context, terms):
            return context, list(terms.values())
        case fh.Cochain(context, _, terms):
            return context, [c for op in terms.values() for c in op.terms.values()]
        case fh.BaseCochain(context, _, terms):
            return context, list(terms.values())
        case fr.Series(_, coeffs):
            found = [_coefficients(coeff) for coeff in coeffs]
            return found[0][0], [c for _, cs in found for c in cs]
        case _SeriesObject(series):
            return _coefficients(series)
        case _:
            raise ContextError(f"No coefficients to inspect in {type(obj).__name__}")


def check_invariance(obj: Any) -> bool:
    """True iff no coefficient depends on the fiber variables."""
    context, coefficients = _coefficients(obj)
    return all(fr.degree_in(c, context.y_indices) <= 0 for c in coefficients)


def bounded_commutant(
    rho: ModuleDeformation, operator_order: int = fd.COMMUTANT_OPERATOR_ORDER, degree: int = fd.COMMUTANT_DEGREE
) -> list[fr.Series]:
    """Basis of the commutant elements with bounded operator order and coefficient degree.

    The commutation equations at every order are solved as one exact linear
    system over QQ.
    """
    context = rho.context
    N = rho.order
    width = n_vars = context.n + context.k
    unknowns = [
        (s, d, m)
        for s in range(N + 1)
        for d in fr.multi_indices(width, operator_order)
        for m in fr.multi_indices(n_vars, degree)
    ]
    logger.info("Bounded commutant: %d unknowns", len(unknowns))
    rows: dict = {}
    columns: dict[int, dict] = {}
    for column, (s, d, m) in enumerate(unknowns):
        E = fdo.DiffOp.build(context, {d: context.group_monomial(context.xy_indices, m)})
        entries: dict = {}
        for r in range(s, N + 1):
            defect = fh.compose_left(E, rho[r - s]) - fh.compose_right(rho[r - s], E)
            for alphas, op in defect.terms.items():
                for key, c in op.terms.items():
                    for monom, coeff in c.iterterms():
                        equation = rows.setdefault((r, alphas, key, monom), len(rows))
                        entries[equation] = coeff
        columns[column] = entries
    matrix: dict = {}
    for column, entries in columns.items():
        for row, coeff in entries.items():
            matrix.setdefault(row, {})[column] = coeff
    M = DomainMatrix.from_dod(matrix, (max(len(rows), 1), len(unknowns)), QQ)
    basis = []
    for vector in M.nullspace().to_list():
        coeffs = [dict() for _ in range(N + 1)]
        for (s, d, m), value in zip(unknowns, vector):
            if value:
                term = context.group_monomial(context.xy_indices, m) * value
                coeffs[s][d] = coeffs[s][d] + term if d in coeffs[s] else term
        basis.append(fr.Series.of([fdo.DiffOp.build(context, terms) for terms in coeffs], N))
    logger.info("Bounded commutant: dimension %d", len(basis))
    return basis


def verify_bounded_commutant(
    rho: ModuleDeformation, operator_order: int = fd.COMMUTANT_OPERATOR_ORDER, degree: int = fd.COMMUTANT_DEGREE
) -> Report:
    """Every bounded commutant element is ρ′ of its ρ′⁻¹ image."""
    report = Report(title="bounded commutant")
    with report.timed():
        for index, D in enumerate(bounded_commutant(rho, operator_order, degree)):
            try:
                A = rho_prime_inverse(D, rho)
            except NotInCommutantError as e:
                report.record("commutant image", False, witness=f"basis element {index}", detail=str(e))
                continue
            image = rho_prime(A, rho).series
            report.record("commutant image", image == D, witness=None if image == D else f"basis element {index}")
    return report
