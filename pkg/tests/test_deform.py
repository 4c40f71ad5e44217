"""
Test suite for star products, module deformations, equivalences and the commutant.

This module tests:
- Weyl-Moyal products and the associativity check, with failure witnesses
- Construction and structural verification of deformed module structures
- Equivalences: gauging, fibration normalization, intertwiner construction
- The commutant: quantization of vertical operators, ρ′⁻¹, ⋆′ and gauge brackets
"""

import unittest

from pydantic import ValidationError

import fdq.defaults as fd
import fdq.deform as fdf
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.ring as fr
from fdq.errors import (
    ContextError,
    FdqDomainError,
    InvalidModuleError,
    InvalidStarProductError,
    NotInCommutantError,
)
from fdq.generator import CochainGenerator


STANDARD_PI = [[0, 1], [-1, 0]]


class TestMoyal(unittest.TestCase):
    """Test suite for the Weyl-Moyal star product."""

    def setUp(self):
        self.context = fr.VarContext(n=2)
        self.star = fdf.moyal(self.context, STANDARD_PI, 3)
        self.x1 = fr.Poly.var(self.context, "x1")
        self.x2 = fr.Poly.var(self.context, "x2")

    def test_first_order(self):
        """
        Validates:
        - C₁(x1, x2) = ½ and C₁(x2, x1) = −½
        - x1⋆x2 − x2⋆x1 = λ
        """
        C1 = self.star[1]
        self.assertEqual(fh.eval_base(C1, self.x1, self.x2), fr.Poly.constant(self.context, "1/2"))
        self.assertEqual(fh.eval_base(C1, self.x2, self.x1), fr.Poly.constant(self.context, "-1/2"))
        self.assertEqual(fh.eval_base(C1, self.x1, self.x2) - fh.eval_base(C1, self.x2, self.x1), 1)

    def test_second_order(self):
        """C₂(x1², x2²) = (1/8)·2·2."""
        self.assertEqual(fh.eval_base(self.star[2], self.x1**2, self.x2**2), fr.Poly.constant(self.context, "1/2"))

    def test_associative(self):
        report = fdf.verify_associativity(self.star)
        self.assertTrue(report.passed, report.summary())
        self.assertEqual(len(report.checks), 6)

    def test_pointwise(self):
        star = fdf.pointwise(self.context, 2)
        self.assertTrue(all(star[r].is_zero() for r in (1, 2)))
        self.assertTrue(fdf.verify_associativity(star).passed)

    def test_rejects_matrix(self):
        """π must be antisymmetric and n×n."""
        with self.assertRaises(FdqDomainError):
            fdf.moyal(self.context, [[0, 1], [1, 0]], 1)
        with self.assertRaises(FdqDomainError):
            fdf.moyal(self.context, [[0, 1]], 1)

    def test_rejects_non_pointwise_start(self):
        with self.assertRaises(ValidationError):
            fdf.StarProduct(series=fr.Series.of([self.star[1]], 1))


class TestBrokenProduct(unittest.TestCase):
    """A product with C₁(a, b) = a″b fails associativity at order 1."""

    def setUp(self):
        self.context = fr.VarContext(n=1)
        C1 = fh.BaseCochain(context=self.context, arity=2, terms={((2,), (0,)): 1})
        self.star = fdf.StarProduct(series=fr.Series.of([fh.BaseCochain.pointwise(self.context), C1], 1))

    def test_witness(self):
        """The minimal failing term names (x1, x1, 1) with defect value −2."""
        report = fdf.verify_associativity(self.star)
        self.assertFalse(report.passed)
        failure = report.first_failure()
        self.assertEqual((failure.name, failure.order), ("associativity", 1))
        self.assertEqual(failure.witness, "(x1, x1, 1) -> -2")

    def test_replay(self):
        """The witness arguments reproduce a nonzero defect."""
        defect = fdf.associativity_defect(self.star, 1)
        args = fdf.witness_arguments(defect)
        self.assertEqual(fh.eval_base(defect, *args), fr.Poly.constant(self.context, -2))

    def test_not_unital(self):
        checks = {check.name: check.passed for check in fdf.verify_associativity(self.star).checks}
        self.assertFalse(checks["unit"])

    def test_construction_fails(self):
        star = fdf.StarProduct(series=fr.Series.of(list(self.star.series) + [fh.BaseCochain.zero(self.context, 2)], 2))
        with self.assertRaises(InvalidStarProductError):
            fdf.build_module_deformation(star)


class TestModuleDeformation(unittest.TestCase):
    """Test suite for building and verifying deformed right-module structures."""

    @classmethod
    def setUpClass(cls):
        cls.context = fr.VarContext(n=2, k=1)
        cls.star = fdf.moyal(cls.context, STANDARD_PI, 2)
        cls.rho = fdf.build_module_deformation(cls.star)
        cls.lifted = fdf.lifted_module(cls.star)

    def test_constructed(self):
        report = fdf.verify_module(self.rho, self.star)
        self.assertTrue(report.passed, report.summary())

    def test_constructed_third_order(self):
        context = fr.VarContext(n=2)
        star = fdf.moyal(context, STANDARD_PI, 3)
        report = fdf.verify_module(fdf.build_module_deformation(star), star)
        self.assertTrue(report.passed, report.summary())

    def test_lifted(self):
        report = fdf.verify_module(self.lifted, self.star)
        self.assertTrue(report.passed, report.summary())

    def test_pointwise_gives_trivial_deformation(self):
        rho = fdf.build_module_deformation(fdf.pointwise(self.context, 2))
        self.assertTrue(all(rho[r].is_zero() for r in (1, 2)))

    def test_corrupted(self):
        """ρ₁(a) = L_a∘∂_y breaks the axiom at order 1; the witness replays to a nonzero value."""
        corrupted = fh.Cochain(
            context=self.context, arity=1, terms={((0, 0),): fdo.DiffOp.dy(self.context, 0)}
        )
        rho = fdf.ModuleDeformation(series=fr.Series.of([self.rho[0], corrupted, self.rho[2]], 2))
        report = fdf.verify_module(rho, self.star)
        self.assertFalse(report.passed)
        failure = report.first_failure()
        self.assertEqual((failure.name, failure.order), ("module axiom", 1))
        self.assertIsNotNone(failure.witness)
        defect = fdf.module_defect(rho, self.star, 1)
        self.assertFalse(fh.eval(defect, *fdf.witness_arguments(defect)).is_zero())

    def test_order_mismatch(self):
        with self.assertRaises(ContextError):
            fdf.verify_module(self.rho, fdf.moyal(self.context, STANDARD_PI, 1))

    def test_invariance(self):
        """
        Validates:
        - Structures built from a product on the base never involve y
        - An operator with a y coefficient is detected
        """
        self.assertTrue(fdf.check_invariance(self.rho))
        self.assertTrue(fdf.check_invariance(self.star))
        y = self.context.gen(self.context.iy(0))
        self.assertFalse(fdf.check_invariance(fdo.DiffOp.multiplication(self.context, y)))

    def test_rejects_wrong_start(self):
        with self.assertRaises(ValidationError):
            fdf.ModuleDeformation(series=fr.Series.of([self.rho[1]], 1))


class TestEquivalence(unittest.TestCase):
    """Test suite for gauging, normalization and the intertwiner construction."""

    @classmethod
    def setUpClass(cls):
        cls.context = fr.VarContext(n=2, k=1)
        cls.star = fdf.moyal(cls.context, STANDARD_PI, 2)
        cls.rho = fdf.build_module_deformation(cls.star)
        cls.lifted = fdf.lifted_module(cls.star)

    def test_gauge(self):
        """ρ gauged by T = id + λ∂_{x1} is intertwined with ρ by T."""
        T = fdf.Equivalence(
            series=fr.Series.of([fdo.DiffOp.identity(self.context), fdo.DiffOp.dx(self.context, 0)], 2)
        )
        rho_tilde = fdf.gauge(self.rho, T)
        self.assertTrue(fdf.verify_module(rho_tilde, self.star).passed)
        self.assertTrue(fdf.verify_equivalence(T, self.rho, rho_tilde).passed)
        found = fdf.find_equivalence(self.rho, rho_tilde)
        self.assertTrue(fdf.verify_equivalence(found, self.rho, rho_tilde).passed)

    def test_random_gauges(self):
        """
        Validates:
        - Gauging by a seeded random T = id + λT₁ + λ²T₂ gives a module structure
        - find_equivalence recovers an intertwiner that verify_equivalence accepts
        """
        for seed in range(3):
            gen = CochainGenerator(seed=seed)
            T = fdf.Equivalence(
                series=fr.Series.of(
                    [
                        fdo.DiffOp.identity(self.context),
                        gen.random_diffop(self.context, order=2, degree=2),
                        gen.random_diffop(self.context, order=2, degree=2),
                    ],
                    2,
                )
            )
            rho_tilde = fdf.gauge(self.rho, T)
            self.assertTrue(fdf.verify_module(rho_tilde, self.star).passed)
            found = fdf.find_equivalence(self.rho, rho_tilde)
            report = fdf.verify_equivalence(found, self.rho, rho_tilde)
            self.assertTrue(report.passed, report.summary())

    def test_inverse(self):
        T = fdf.Equivalence(
            series=fr.Series.of([fdo.DiffOp.identity(self.context), fdo.DiffOp.dy(self.context, 0)], 2)
        )
        unit = fr.Series.of([fdo.DiffOp.identity(self.context)], 2)
        self.assertEqual(T.series * T.inverse(), unit)

    def test_constructed_against_lifted(self):
        T = fdf.find_equivalence(self.rho, self.lifted)
        report = fdf.verify_equivalence(T, self.rho, self.lifted)
        self.assertTrue(report.passed, report.summary())

    def test_different_products(self):
        """Structures over different products have no intertwiner."""
        other_star = fdf.moyal(self.context, [[0, -1], [1, 0]], 2)
        with self.assertRaises(InvalidModuleError):
            fdf.find_equivalence(self.rho, fdf.lifted_module(other_star))

    def test_lifted_is_fibration(self):
        """The lifted structure already satisfies 1•a = p*a, so normalization is trivial."""
        self.assertTrue(fdf.verify_fibration(self.lifted, self.star).passed)
        rho_tilde, T = fdf.normalize_fibration(self.lifted)
        self.assertTrue(all(T[r].is_zero() for r in range(1, T.order + 1)))
        self.assertEqual(rho_tilde, self.lifted)

    def test_normalize_constructed(self):
        rho_tilde, T = fdf.normalize_fibration(self.rho)
        self.assertTrue(fdf.verify_fibration(rho_tilde, self.star).passed)
        self.assertTrue(fdf.verify_module(rho_tilde, self.star).passed)
        self.assertTrue(fdf.verify_equivalence(T, self.rho, rho_tilde).passed)

    def test_rejects_non_identity_start(self):
        with self.assertRaises(ValidationError):
            fdf.Equivalence(series=fr.Series.of([fdo.DiffOp.dx(self.context, 0)], 1))


class TestCommutant(unittest.TestCase):
    """Test suite for the commutant of the deformed action."""

    @classmethod
    def setUpClass(cls):
        cls.context = fr.VarContext(n=2, k=1)
        cls.star = fdf.moyal(cls.context, STANDARD_PI, 2)
        cls.rho = fdf.build_module_deformation(cls.star)
        cls.lifted = fdf.lifted_module(cls.star)
        context = cls.context
        cls.identity = fdo.DiffOp.identity(context)
        cls.dy = fdo.DiffOp.dy(context, 0)
        cls.Ly = fdo.DiffOp.multiplication(context, context.gen(context.iy(0)))
        cls.Lx1 = fdo.DiffOp.multiplication(context, context.gen(0))
        cls.Lx2 = fdo.DiffOp.multiplication(context, context.gen(1))

    def constant(self, D):
        return fr.Series.of([D], 2)

    def test_fiber_operators_commute(self):
        """ρ′ leaves id, L_y and ∂_y unchanged."""
        for A in (self.identity, self.Ly, self.dy, self.Ly * self.dy):
            self.assertEqual(fdf.quantize_vertical(A, self.rho).series, self.constant(A))

    def test_left_multiplication(self):
        """On the lifted structure ρ′(L_{x1}) is f ↦ x1⋆f = x1 f + ½λ∂_{x2}f."""
        D = fdf.quantize_vertical(self.Lx1, self.lifted)
        expected = fr.Series.of([self.Lx1, fdo.DiffOp.dx(self.context, 1).scale("1/2")], 2)
        self.assertEqual(D.series, expected)
        self.assertTrue(fdf.check_commutant_membership(D, self.lifted))

    def test_corrections_are_complementary(self):
        D = fdf.quantize_vertical(self.Lx2 * self.dy, self.rho)
        self.assertTrue(fdf.check_commutant_membership(D, self.rho))
        self.assertTrue(all(fdo.vertical_part(D[r]).is_zero() for r in (1, 2)))

    def test_rejects_non_vertical(self):
        with self.assertRaises(FdqDomainError):
            fdf.quantize_vertical(fdo.DiffOp.dx(self.context, 0), self.rho)

    def test_membership(self):
        self.assertTrue(fdf.check_commutant_membership(self.Ly, self.rho))
        self.assertFalse(fdf.check_commutant_membership(fdo.DiffOp.dx(self.context, 0), self.rho))

    def test_inverse_round_trip(self):
        A = fr.Series.of([self.Lx1, self.dy, self.Ly], 2)
        self.assertEqual(fdf.rho_prime_inverse(fdf.rho_prime(A, self.rho), self.rho), A)

    def test_not_in_commutant(self):
        with self.assertRaises(NotInCommutantError):
            fdf.rho_prime_inverse(fdo.DiffOp.dx(self.context, 0), self.rho)

    def test_star_prime(self):
        """
        Validates:
        - id is a unit for ⋆′
        - The order-0 term is the composition
        - L_{x1}⋆′L_{x2} = L_{x1⋆x2} = L_{x1x2} + ½λ on the lifted structure
        """
        A = fr.Series.of([self.Lx1 * self.dy, self.Ly], 2)
        self.assertEqual(fdf.star_prime(self.identity, A, self.rho), A)
        self.assertEqual(fdf.star_prime(self.Lx1, self.dy, self.rho)[0], self.Lx1 * self.dy)
        product = fdf.star_prime(self.Lx1, self.Lx2, self.lifted)
        self.assertEqual(product, fr.Series.of([self.Lx1 * self.Lx2, self.identity.scale("1/2")], 2))

    def test_star_prime_associative(self):
        A, B, C = self.Lx1, self.Lx2 * self.dy, self.Ly + self.Lx2
        left = fdf.star_prime(fdf.star_prime(A, B, self.rho), C, self.rho)
        right = fdf.star_prime(A, fdf.star_prime(B, C, self.rho), self.rho)
        self.assertEqual(left, right)

    def test_gauge_commutator(self):
        """[∂_y, y∂_y]⋆′ = ∂_y with no corrections."""
        result = fdf.gauge_commutator(self.dy, self.Ly * self.dy, self.rho)
        self.assertEqual(result, self.constant(self.dy))
        self.assertTrue(fdf.gauge_commutator(self.dy, self.dy, self.rho).is_zero())

    def test_gauge_commutator_domain(self):
        with self.assertRaises(FdqDomainError):
            fdf.gauge_commutator(self.dy * self.dy, self.dy, self.rho)
        with self.assertRaises(FdqDomainError):
            fdf.gauge_commutator(fdo.DiffOp.dx(self.context, 0), self.dy, self.rho)

    def test_fiber_family_round_trip(self):
        """ρ′⁻¹∘ρ′ is the identity on id, L_y, ∂_y, y∂_y, y² and y²∂_y, with no vertical corrections."""
        y2 = self.Ly * self.Ly
        for A in (self.identity, self.Ly, self.dy, self.Ly * self.dy, y2, y2 * self.dy):
            D = fdf.quantize_vertical(A, self.rho)
            self.assertTrue(all(fdo.vertical_part(D[r]).is_zero() for r in (1, 2)))
            self.assertEqual(fdf.rho_prime_inverse(D, self.rho), self.constant(A))

    def test_invariance(self):
        """Quantizations and ⋆′ products of y-free operators never involve y."""
        B = self.Lx2 * self.dy
        self.assertTrue(fdf.check_invariance(fdf.quantize_vertical(self.Lx1, self.rho)))
        self.assertTrue(fdf.check_invariance(fdf.quantize_vertical(B, self.rho)))
        self.assertTrue(fdf.check_invariance(fdf.star_prime(self.Lx1, B, self.rho)))

    def test_gauge_commutator_of_commuting_fields(self):
        """
        Validates:
        - [x1∂_y, x2∂_y] = 0, so the order-0 term vanishes
        - On the lifted structure the bracket is λ∂_y², from x1⋆x2 − x2⋆x1 = λ
        """
        xi, eta = self.Lx1 * self.dy, self.Lx2 * self.dy
        lifted = fdf.gauge_commutator(xi, eta, self.lifted)
        self.assertEqual(lifted, fr.Series.of([fdo.DiffOp.zero(self.context), self.dy * self.dy], 2))
        constructed = fdf.gauge_commutator(xi, eta, self.rho)
        self.assertTrue(constructed[0].is_zero())
        self.assertEqual(constructed.order, 2)

    def test_order_mismatch(self):
        with self.assertRaises(ContextError):
            fdf.rho_prime(fr.Series.of([self.Ly], 1), self.rho)


class TestThirdOrderCommutant(unittest.TestCase):
    """Test suite for ⋆′ on the constructed structure modulo λ⁴."""

    @classmethod
    def setUpClass(cls):
        context = cls.context = fr.VarContext(n=2, k=1)
        cls.rho = fdf.build_module_deformation(fdf.moyal(context, STANDARD_PI, 3))
        cls.identity = fdo.DiffOp.identity(context)
        cls.dy = fdo.DiffOp.dy(context, 0)
        cls.Ly = fdo.DiffOp.multiplication(context, context.gen(context.iy(0)))
        cls.Lx1 = fdo.DiffOp.multiplication(context, context.gen(0))
        cls.Lx2 = fdo.DiffOp.multiplication(context, context.gen(1))

    def assertAssociative(self, A, B, C):
        left = fdf.star_prime(fdf.star_prime(A, B, self.rho), C, self.rho)
        right = fdf.star_prime(A, fdf.star_prime(B, C, self.rho), self.rho)
        self.assertEqual(left, right)

    def test_associative_on_fiber_operators(self):
        self.assertAssociative(self.Ly, self.dy, self.Ly * self.dy)

    def test_associative_on_mixed_operators(self):
        self.assertAssociative(self.Lx1, self.Lx2 * self.dy, self.Ly)

    def test_unit(self):
        """id⋆′A = A⋆′id = A."""
        for A in (self.Ly * self.dy, self.Lx2 * self.dy):
            expected = fr.Series.of([A], 3)
            self.assertEqual(fdf.star_prime(self.identity, A, self.rho), expected)
            self.assertEqual(fdf.star_prime(A, self.identity, self.rho), expected)


class TestBoundedCommutant(unittest.TestCase):
    def test_small(self):
        """Every bounded commutant element is in the image of ρ′."""
        context = fr.VarContext(n=2, k=1)
        star = fdf.moyal(context, STANDARD_PI, 1)
        rho = fdf.lifted_module(star)
        basis = fdf.bounded_commutant(rho, 1, 1)
        self.assertGreaterEqual(len(basis), 4)
        for D in basis:
            self.assertTrue(fdf.check_commutant_membership(D, rho))
        report = fdf.verify_bounded_commutant(rho, 1, 1)
        self.assertTrue(report.passed, report.summary())

    def test_default_bounds_on_constructed(self):
        """
        Validates:
        - The default bounds are operator order 2 and coefficient degree 2
        - Every basis element commutes with the constructed structure and lies in the image of ρ′
        """
        context = fr.VarContext(n=2, k=1)
        rho = fdf.build_module_deformation(fdf.moyal(context, STANDARD_PI, 2))
        self.assertEqual((fd.COMMUTANT_OPERATOR_ORDER, fd.COMMUTANT_DEGREE), (2, 2))
        basis = fdf.bounded_commutant(rho)
        self.assertGreater(len(basis), 0)
        for D in basis:
            self.assertTrue(fdf.check_commutant_membership(D, rho))
        report = fdf.verify_bounded_commutant(rho)
        self.assertTrue(report.passed, report.summary())


if __name__ == "__main__":
    unittest.main()
