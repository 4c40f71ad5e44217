import random
from typing import Optional, Sequence

import fdq.defaults as fd
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.homotopy as fhom
import fdq.ring as fr


class CochainGenerator:
    """Seeded random polynomials, operators, cochains and chains.

    Each generator owns its `random.Random`, so two generators with the same
    seed draw the same sequence whatever else runs in between.
    """

    def __init__(self, seed: Optional[int] = fd.SEED):
        self.rng = random.Random(seed)

    def random_rational(self, bound: int = 5, allow_zero: bool = True):
        """Includes both ends of [-bound, bound] for the numerator."""
        while True:
            num = self.rng.randint(-bound, bound)
            if num or allow_zero:
                return fr.to_rational(f"{num}/{self.rng.randint(1, 3)}")

    def random_element_from(self, elements: Sequence):
        return self.rng.choice(list(elements))

    def random_raw_poly(self, context: fr.VarContext, indices: Sequence[int], degree: int, terms: int = 3):
        """A sum of at most `terms` monomials in the given generators."""
        p = context.ring.zero
        exponents = fr.multi_indices(len(indices), degree)
        for _ in range(terms):
            alpha = self.random_element_from(exponents)
            p = p + context.group_monomial(indices, alpha) * self.random_rational()
        return p

    def random_poly(self, context: fr.VarContext, degree: int = fd.DEGREE_BOUND, fiber: bool = True) -> fr.Poly:
        indices = context.xy_indices if fiber else context.x_indices
        return fr.Poly.wrap(context, self.random_raw_poly(context, indices, degree))

    def random_diffop(
        self,
        context: fr.VarContext,
        order: int = 2,
        degree: int = 2,
        terms: int = 3,
        vertical: bool = False,
        invariant: bool = False,
    ) -> fdo.DiffOp:
        """Random operator; `vertical` keeps to ∂_y, `invariant` to x-dependent coefficients."""
        indices = context.x_indices if invariant else context.xy_indices
        derivatives = [
            d for d in fr.multi_indices(context.n + context.k, order) if not (vertical and any(d[: context.n]))
        ]
        result = {}
        for _ in range(terms):
            d = self.random_element_from(derivatives)
            c = self.random_raw_poly(context, indices, degree, terms=2)
            result[d] = result[d] + c if d in result else c
        return fdo.DiffOp.build(context, result)

    def random_vertical_op(self, context: fr.VarContext, order: int = 2, degree: int = 2) -> fdo.DiffOp:
        if context.k == 0:
            return fdo.DiffOp.multiplication(context, self.random_raw_poly(context, context.x_indices, degree))
        return self.random_diffop(context, order=order, degree=degree, vertical=True)

    def random_cochain(
        self,
        context: fr.VarContext,
        arity: int,
        multi_order: int = 2,
        value_order: int = 2,
        degree: int = 2,
        terms: int = 3,
    ) -> fh.Cochain:
        slots = fr.multi_indices(context.n, multi_order)
        result: dict = {}
        for _ in range(terms):
            alphas = tuple(self.random_element_from(slots) for _ in range(arity))
            op = self.random_diffop(context, order=value_order, degree=degree, terms=2)
            result[alphas] = result[alphas] + op if alphas in result else op
        return fh.Cochain(context=context, arity=arity, terms=result)

    def random_base_cochain(
        self, context: fr.VarContext, arity: int, multi_order: int = 2, degree: int = 2, terms: int = 3
    ) -> fh.BaseCochain:
        slots = fr.multi_indices(context.n, multi_order)
        result: dict = {}
        for _ in range(terms):
            alphas = tuple(self.random_element_from(slots) for _ in range(arity))
            c = self.random_raw_poly(context, context.x_indices, degree, terms=2)
            result[alphas] = result[alphas] + c if alphas in result else c
        return fh.BaseCochain(context=context, arity=arity, terms=result)

    def random_bar_element(self, context: fr.VarContext, degree: int, bound: int = fd.DEGREE_BOUND) -> fhom.BarElement:
        indices = context.v_indices + context.w_indices
        for group in range(degree):
            indices = indices + context.q_indices(group)
        return fhom.BarElement.of(context, degree, self.random_raw_poly(context, indices, bound))

    def random_koszul_element(self, context: fr.VarContext, degree: int, bound: int = 2) -> fhom.KoszulElement:
        indices = context.v_indices + context.w_indices
        coeffs = {I: self.random_raw_poly(context, indices, bound, terms=2) for I in fhom.increasing_tuples(context.n, degree)}
        return fhom.KoszulElement.of(context, degree, coeffs)

    def random_koszul_cochain(
        self, context: fr.VarContext, degree: int, order: int = 2, coefficient_degree: int = 2
    ) -> fhom.KoszulCochain:
        values = {
            I: self.random_diffop(context, order=order, degree=coefficient_degree, terms=2)
            for I in fhom.increasing_tuples(context.n, degree)
        }
        return fhom.KoszulCochain.build(context, degree, values)
