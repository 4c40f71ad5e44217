"""Command-line driver.

Exit codes: 0 when every check passes, 1 on a verification failure (the
report is still written) and 2 on bad input, configuration or usage. A
non-associative star product or a pair of structures over different products
is bad input too. Any other obstruction is an internal failure of the
construction and exits with 3.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import click

import fdq.defaults as fd
import fdq.deform as fdf
import fdq.diffop as fdo
import fdq.ring as fr
import fdq.serialization as fs
from fdq.config import Config, parse_matrix
from fdq.errors import InvalidModuleError, InvalidStarProductError, ObstructionError
from fdq.report import Report
from fdq.suites import run_homotopy_suite


logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_OBSTRUCTION = 0, 1, 2, 3


def output_path(path: str) -> Path:
    """Relative output paths go under $FDQ_OUTPUT_DIR when it is set."""
    target = Path(path)
    root = os.environ.get(fd.OUTPUT_DIR_ENV)
    if root and not target.is_absolute():
        target = Path(root) / target
    return target


def _write(obj: Any, path: Optional[str]) -> None:
    if path is not None:
        fs.dump(obj, output_path(path))


def _finish(ctx: click.Context, report: Report) -> Report:
    click.echo(report.summary(), nl=False)
    if ctx.obj.get("report") is not None:
        target = output_path(ctx.obj["report"])
        target.write_text(report.to_json() + "\n", encoding="utf-8")
        logger.info("Report written to %s", target)
    return report


def _load_star(path: str) -> fdf.StarProduct:
    return fs.load(Path(path), "star")


def _load_module(path: str) -> fdf.ModuleDeformation:
    return fs.load(Path(path), "module")


def _load_vertical(path: str) -> Any:
    obj = fs.load(Path(path))
    if not isinstance(obj, (fdo.DiffOp, fr.Series)):
        raise click.BadParameter(f"{path} holds a {fs.kind_of(obj)}, expected an operator or a vseries")
    return obj


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log per-order progress and evaluation counts.")
@click.option("-q", "--quiet", is_flag=True, help="Only log failures.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here.")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool, report_path: Optional[str]) -> None:
    """Deformation quantization of V×G, order by order in λ."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("fdq").setLevel(level)
    ctx.ensure_object(dict)
    ctx.obj["report"] = report_path


@cli.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--k", "k", type=int, default=0, show_default=True)
@click.option("--pi", "pi", required=True, help='Rows separated by ";", e.g. "0 1; -1 0".')
@click.option("--order", type=int, default=fd.ORDER, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def moyal(ctx: click.Context, n: int, k: int, pi: str, order: int, output: str) -> Report:
    """Weyl-Moyal star product of a constant Poisson matrix."""
    star = fdf.moyal(fr.VarContext(n=n, k=k), parse_matrix(pi), order)
    _write(star, output)
    return _finish(ctx, fdf.verify_associativity(star))


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--star", "star_out", type=click.Path(dir_okay=False), default=None, help="Also write the star product.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def build(ctx: click.Context, config_path: str, star_out: Optional[str], output: str) -> Report:
    """Deformed right-module structure over the configured star product."""
    config: Config = fs.load(Path(config_path), "config")
    if config.pi is not None:
        star = fdf.moyal(config.context(), config.pi_matrix(), config.order)
    else:
        star = _load_star(str(config.star))
        if star.context.n != config.n or star.context.k != config.k or star.order != config.order:
            raise click.BadParameter(f"{config.star} does not match the configured dimensions and order")
    rho = fdf.build_module_deformation(star)
    _write(rho, output)
    _write(star, star_out)
    return _finish(ctx, fdf.verify_module(rho, star))


@cli.command()
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("star", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def verify(ctx: click.Context, module: str, star: str) -> Report:
    """Structural check of the module axioms."""
    return _finish(ctx, fdf.verify_module(_load_module(module), _load_star(star)))


@cli.command()
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("star", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--equivalence-out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def normalize(ctx: click.Context, module: str, star: str, output: str, equivalence_out: Optional[str]) -> Report:
    """Equivalent structure with 1•a = p*a."""
    rho, product = _load_module(module), _load_star(star)
    rho_tilde, T = fdf.normalize_fibration(rho)
    _write(rho_tilde, output)
    _write(T, equivalence_out)
    report = fdf.verify_fibration(rho_tilde, product)
    report.extend(fdf.verify_equivalence(T, rho, rho_tilde))
    return _finish(ctx, report)


@cli.command()
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("module2", type=click.Path(exists=True, dir_okay=False))
@click.argument("star", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def equiv(ctx: click.Context, module: str, module2: str, star: str, output: str) -> Report:
    """Intertwiner between two structures over the same star product."""
    rho, rho_tilde, product = _load_module(module), _load_module(module2), _load_star(star)
    report = fdf.verify_module(rho, product)
    report.extend(fdf.verify_module(rho_tilde, product))
    T = fdf.find_equivalence(rho, rho_tilde)
    _write(T, output)
    return _finish(ctx, report.extend(fdf.verify_equivalence(T, rho, rho_tilde)))


@cli.command()
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("op", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def commutant(ctx: click.Context, module: str, op: str, output: str) -> Report:
    """Commutant element ρ′(A) of a vertical operator A."""
    rho = _load_module(module)
    A = fs.load(Path(op), "diffop")
    D = fdf.quantize_vertical(A, rho)
    _write(D, output)
    report = Report(title="commutant")
    with report.timed():
        report.record("commutes", fdf.check_commutant_membership(D, rho))
        report.record("complement corrections", all(fdo.vertical_part(D[r]).is_zero() for r in range(1, D.order + 1)))
    return _finish(ctx, report)


@cli.command("bounded-commutant")
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.option("--operator-order", type=int, default=fd.COMMUTANT_OPERATOR_ORDER, show_default=True)
@click.option("--degree", type=int, default=fd.COMMUTANT_DEGREE, show_default=True, help="Coefficient degree bound.")
@click.pass_context
def bounded_commutant(ctx: click.Context, module: str, operator_order: int, degree: int) -> Report:
    """Basis of the commutant within an order and degree bound."""
    return _finish(ctx, fdf.verify_bounded_commutant(_load_module(module), operator_order, degree))


@cli.command("star-prime")
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("a", type=click.Path(exists=True, dir_okay=False))
@click.argument("b", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def star_prime(ctx: click.Context, module: str, a: str, b: str, output: str) -> Report:
    """Deformed product A⋆′B of vertical operator series."""
    rho = _load_module(module)
    A, B = _load_vertical(a), _load_vertical(b)
    result = fdf.star_prime(A, B, rho)
    _write(result, output)
    report = Report(title="star-prime")
    with report.timed():
        leading = fdf.as_series(A, rho.order)[0] * fdf.as_series(B, rho.order)[0]
        report.record("leading term is the composition", result[0] == leading, order=0)
    return _finish(ctx, report)


@cli.command()
@click.argument("module", type=click.Path(exists=True, dir_okay=False))
@click.argument("xi", type=click.Path(exists=True, dir_okay=False))
@click.argument("eta", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def gauge(ctx: click.Context, module: str, xi: str, eta: str, output: str) -> Report:
    """Deformed commutator ξ⋆′η − η⋆′ξ of two vertical vector fields."""
    rho = _load_module(module)
    X, Y = fs.load(Path(xi), "diffop"), fs.load(Path(eta), "diffop")
    result = fdf.gauge_commutator(X, Y, rho)
    _write(result, output)
    report = Report(title="gauge commutator")
    with report.timed():
        report.record("leading term is the Lie bracket", result[0] == X * Y - Y * X, order=0)
        for r in range(1, result.order + 1):
            report.record("correction", True, order=r, detail=str(result[r]))
    return _finish(ctx, report)


@cli.command("homotopy-test")
@click.option("--n", "n", type=int, required=True)
@click.option("--k", "k", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=fd.SEED, show_default=True)
@click.option("--order", type=int, default=2, show_default=True, help="Operator order of random cochain values.")
@click.option("--degree-bound", type=int, default=fd.DEGREE_BOUND, show_default=True)
@click.option("--cases", type=int, default=fd.CASES, show_default=True)
@click.pass_context
def homotopy_test(ctx: click.Context, n: int, k: int, seed: int, order: int, degree_bound: int, cases: int) -> Report:
    """Seeded battery of homotopy identities."""
    return _finish(ctx, run_homotopy_suite(n, k, seed=seed, order=order, degree_bound=degree_bound, cases=cases))


def run_command(argv: Sequence[str]) -> int:
    """Runs one command and maps its outcome to an exit code."""
    try:
        result = cli.main(args=list(argv), prog_name="fdq", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except (InvalidStarProductError, InvalidModuleError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_INPUT
    except ObstructionError as e:
        logger.error("Construction obstructed: %s", e)
        click.echo(f"Error: {e}", err=True)
        return EXIT_OBSTRUCTION
    except (ValueError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_INPUT
    if isinstance(result, Report):
        return EXIT_OK if result.passed else EXIT_FAILED
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
