"""Seeded property battery for the resolutions and the Hochschild homotopy.

Every identity is exact: each case is checked by comparing normal forms, and
one report line is recorded per identity and degree with the first failing
case as witness.
"""

import logging
from typing import Callable, Optional

import fdq.defaults as fd
import fdq.hochschild as fh
import fdq.homotopy as fhom
import fdq.ring as fr
from fdq.generator import CochainGenerator
from fdq.report import Report


logger = logging.getLogger(__name__)


def _battery(report: Report, name: str, cases: int, check: Callable[[int], bool], degree: Optional[int] = None) -> None:
    label = name if degree is None else f"{name} (degree {degree})"
    for case in range(cases):
        if not check(case):
            report.record(label, False, witness=f"case {case}")
            return
    report.record(label, True)


def bar_identities(report: Report, gen: CochainGenerator, context: fr.VarContext, degree_bound: int, cases: int) -> None:
    def augmented(case: int) -> bool:
        chi = gen.random_bar_element(context, 0, degree_bound)
        lhs = fhom.bar_boundary(fhom.chain_hX(chi)).element + fhom.bar_h_minus(fhom.augmentation(chi)).element
        return lhs == chi.element

    _battery(report, "bar homotopy", cases, augmented, degree=0)
    for k in (1, 2):
        def homotopy(case: int, k: int = k) -> bool:
            chi = gen.random_bar_element(context, k, degree_bound)
            lhs = fhom.bar_boundary(fhom.chain_hX(chi)) + fhom.chain_hX(fhom.bar_boundary(chi))
            return lhs == chi

        _battery(report, "bar homotopy", cases, homotopy, degree=k)


def koszul_identities(report: Report, gen: CochainGenerator, context: fr.VarContext, degree_bound: int, cases: int) -> None:
    def augmented(case: int) -> bool:
        omega = gen.random_koszul_element(context, 0, degree_bound)
        lhs = fhom.koszul_boundary(fhom.chain_hK(omega)) + fhom.koszul_h_minus(fhom.koszul_augmentation(omega))
        return lhs == omega

    _battery(report, "koszul homotopy", cases, augmented, degree=0)
    for k in range(1, context.n + 1):
        def homotopy(case: int, k: int = k) -> bool:
            omega = gen.random_koszul_element(context, k, degree_bound)
            lhs = fhom.chain_hK(fhom.koszul_boundary(omega)) + fhom.koszul_boundary(fhom.chain_hK(omega))
            return lhs == omega

        _battery(report, "koszul homotopy", cases, homotopy, degree=k)


def comparison_identities(report: Report, gen: CochainGenerator, context: fr.VarContext, degree_bound: int, cases: int) -> None:
    for k in (1, 2):
        if k > context.n:
            break

        def f_chain(case: int, k: int = k) -> bool:
            omega = gen.random_koszul_element(context, k, degree_bound)
            return fhom.chain_F(fhom.koszul_boundary(omega)) == fhom.bar_boundary(fhom.chain_F(omega))

        def g_chain(case: int, k: int = k) -> bool:
            chi = gen.random_bar_element(context, k, degree_bound)
            return fhom.chain_G(fhom.bar_boundary(chi)) == fhom.koszul_boundary(fhom.chain_G(chi))

        def g_after_f(case: int, k: int = k) -> bool:
            omega = gen.random_koszul_element(context, k, degree_bound)
            return fhom.chain_G(fhom.chain_F(omega)) == omega

        def theta(case: int, k: int = k) -> bool:
            chi = gen.random_bar_element(context, k, degree_bound)
            once = fhom.chain_theta(chi)
            commutes = fhom.chain_theta(fhom.bar_boundary(chi)) == fhom.bar_boundary(once)
            return fhom.chain_theta(once) == once and commutes

        def s_homotopy(case: int, k: int = k) -> bool:
            chi = gen.random_bar_element(context, k, degree_bound)
            lhs = fhom.chain_s(fhom.bar_boundary(chi)) + fhom.bar_boundary(fhom.chain_s(chi))
            return lhs == chi - fhom.chain_theta(chi)

        _battery(report, "F chain map", cases, f_chain, degree=k)
        _battery(report, "G chain map", cases, g_chain, degree=k)
        _battery(report, "G after F", cases, g_after_f, degree=k)
        _battery(report, "theta projection", cases, theta, degree=k)
        _battery(report, "s homotopy", cases, s_homotopy, degree=k)


def hochschild_identities(
    report: Report, gen: CochainGenerator, context: fr.VarContext, order: int, degree_bound: int, cases: int
) -> None:
    for k in (1, 2):
        if k + 1 > context.m:
            break

        def homotopy(case: int, k: int = k) -> bool:
            phi = gen.random_cochain(context, k, multi_order=2, value_order=order, degree=degree_bound, terms=2)
            primitive = fhom.delta_inv(phi)
            lhs = fh.delta(primitive) + fhom.delta_inv(fh.delta(phi))
            bounded = all(l <= fhom.delta_inv_bound(phi) for l in primitive.multi_order())
            return lhs == phi and bounded

        _battery(report, "delta_inv homotopy", cases, homotopy, degree=k)

    def weighted(case: int) -> bool:
        phi = gen.random_cochain(context, 1, multi_order=2, value_order=order, degree=degree_bound, terms=2)
        kappa = fhom.F_pullback(fhom.xi_inverse(phi))
        for r in range(kappa.value_x_order() + 1):
            image = fhom.koszul_delta_inv(kappa.deg_component(r))
            if image.deg_component(r + 1) != image:
                return False
        return True

    _battery(report, "koszul degree shift", cases, weighted)

    for k in (1, 2):
        if k > context.n:
            break

        def anticommutator(case: int, k: int = k) -> bool:
            kappa = gen.random_koszul_cochain(context, k, order=order, coefficient_degree=degree_bound)
            return fhom.koszul_anticommutator(kappa) == fhom.koszul_weighted(kappa)

        def inverse(case: int, k: int = k) -> bool:
            kappa = gen.random_koszul_cochain(context, k, order=order, coefficient_degree=degree_bound)
            lhs = fhom.koszul_delta(fhom.koszul_delta_inv(kappa)) + fhom.koszul_delta_inv(fhom.koszul_delta(kappa))
            return lhs == kappa

        _battery(report, "koszul weighted homotopy", cases, anticommutator, degree=k)
        _battery(report, "koszul inverse", cases, inverse, degree=k)


def run_homotopy_suite(
    n: int,
    k: int = 0,
    seed: int = fd.SEED,
    order: int = 2,
    degree_bound: int = fd.DEGREE_BOUND,
    cases: int = fd.CASES,
) -> Report:
    """Runs the whole battery on the context (n, k) with seeded random inputs.

    Args:
        order: operator order bound of the random cochain values.
        degree_bound: total degree bound of random chains and coefficients.
        cases: random cases per identity.
    """
    context = fr.VarContext(n=n, k=k)
    gen = CochainGenerator(seed)
    report = Report(title=f"homotopy suite on {context}")
    with report.timed():
        bar_identities(report, gen, context, degree_bound, cases)
        koszul_identities(report, gen, context, degree_bound, cases)
        comparison_identities(report, gen, context, degree_bound, cases)
        hochschild_identities(report, gen, context, order, degree_bound, cases)
    logger.info("Homotopy suite: %d/%d checks in %.2fs", report.passed_count, len(report.checks), report.elapsed)
    return report
