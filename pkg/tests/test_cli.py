"""
Test suite for the command-line driver.

This module tests:
- Each command end to end on small inputs, through files
- Exit codes: 0 on success, 1 on a failed check, 2 on bad input or usage, 3 on an internal obstruction
- JSON reports and the output directory override
"""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path
from unittest import mock

import fdq.defaults as fd
import fdq.deform as fdf
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.ring as fr
import fdq.serialization as fs
from fdq.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OBSTRUCTION, EXIT_OK, run_command
from fdq.config import Config
from fdq.errors import ObstructionError


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()
        self.root = Path(self._directory.name)

    def tearDown(self):
        self._directory.cleanup()

    def path(self, name: str) -> str:
        return str(self.root / name)

    def run_cli(self, *argv: str) -> tuple[int, str]:
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = run_command(list(argv))
        return code, buffer.getvalue()


class TestStarProductCommands(CliTestCase):
    def test_moyal(self):
        code, output = self.run_cli("moyal", "--n", "2", "--pi", "0 1; -1 0", "--order", "2", "-o", self.path("star.txt"))
        self.assertEqual(code, EXIT_OK)
        self.assertIn("associativity: PASSED", output)
        star = fs.load(Path(self.path("star.txt")), "star")
        self.assertEqual(star, fdf.moyal(fr.VarContext(n=2), [[0, 1], [-1, 0]], 2))

    def test_moyal_invalid_matrix(self):
        code, _ = self.run_cli("moyal", "--n", "2", "--pi", "0 1; 1 0", "-o", self.path("star.txt"))
        self.assertEqual(code, EXIT_INPUT)


class TestModuleCommands(CliTestCase):
    """Test suite for build, verify, normalize and equiv."""

    def setUp(self):
        super().setUp()
        self.context = fr.VarContext(n=2, k=1)
        fs.dump(Config(n=2, k=1, order=2, pi="0 1; -1 0"), Path(self.path("run.cfg")))

    def build(self) -> tuple[str, str]:
        code, _ = self.run_cli(
            "build", "--config", self.path("run.cfg"), "--star", self.path("star.txt"), "-o", self.path("module.txt")
        )
        self.assertEqual(code, EXIT_OK)
        return self.path("module.txt"), self.path("star.txt")

    def test_build_and_verify(self):
        module, star = self.build()
        code, output = self.run_cli("verify", module, star)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("module: PASSED", output)

    def test_build_from_star_file(self):
        """A configuration may name a star product file instead of π."""
        fs.dump(fdf.moyal(self.context, [[0, 1], [-1, 0]], 2), Path(self.path("given.txt")))
        fs.dump(Config(n=2, k=1, order=2, star=Path("given.txt")), Path(self.path("file.cfg")))
        code, _ = self.run_cli("build", "--config", self.path("file.cfg"), "-o", self.path("module.txt"))
        self.assertEqual(code, EXIT_OK)

    def test_build_mismatched_star_file(self):
        fs.dump(fdf.moyal(self.context, [[0, 1], [-1, 0]], 1), Path(self.path("given.txt")))
        fs.dump(Config(n=2, k=1, order=2, star=Path("given.txt")), Path(self.path("file.cfg")))
        code, _ = self.run_cli("build", "--config", self.path("file.cfg"), "-o", self.path("module.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_corrupted_module(self):
        """A broken ρ₁ exits with 1 and the JSON report names order 1."""
        _, star = self.build()
        rho = fs.load(Path(self.path("module.txt")), "module")
        corrupted = fh.Cochain(context=self.context, arity=1, terms={((0, 0),): fdo.DiffOp.dy(self.context, 0)})
        fs.dump(fdf.ModuleDeformation(series=fr.Series.of([rho[0], corrupted, rho[2]], 2)), Path(self.path("bad.txt")))
        code, output = self.run_cli("--report", self.path("report.json"), "verify", self.path("bad.txt"), star)
        self.assertEqual(code, EXIT_FAILED)
        self.assertIn("FAIL", output)
        report = json.loads(Path(self.path("report.json")).read_text())
        self.assertEqual(report["status"], "failed")
        failed = [check for check in report["checks"] if check["status"] == "failed"]
        self.assertEqual(failed[0]["order"], 1)
        self.assertIsNotNone(failed[0]["witness"])

    def test_normalize(self):
        module, star = self.build()
        code, output = self.run_cli(
            "normalize", module, star, "-o", self.path("normal.txt"), "--equivalence-out", self.path("T.txt")
        )
        self.assertEqual(code, EXIT_OK, output)
        self.assertIsInstance(fs.load(Path(self.path("T.txt"))), fdf.Equivalence)

    def test_equiv(self):
        module, star = self.build()
        lifted = fdf.lifted_module(fs.load(Path(star), "star"))
        fs.dump(lifted, Path(self.path("lifted.txt")))
        code, output = self.run_cli("equiv", module, self.path("lifted.txt"), star, "-o", self.path("T.txt"))
        self.assertEqual(code, EXIT_OK, output)
        self.assertIn("intertwining", output)

    def test_non_associative_star_file(self):
        """A star product that fails associativity is bad input."""
        context = fr.VarContext(n=1)
        C1 = fh.BaseCochain(context=context, arity=2, terms={((2,), (0,)): 1})
        zero = fh.BaseCochain.zero(context, 2)
        broken = fdf.StarProduct(series=fr.Series.of([fh.BaseCochain.pointwise(context), C1, zero], 2))
        fs.dump(broken, Path(self.path("broken.txt")))
        fs.dump(Config(n=1, k=0, order=2, star=Path("broken.txt")), Path(self.path("broken.cfg")))
        code, _ = self.run_cli("build", "--config", self.path("broken.cfg"), "-o", self.path("module.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_internal_obstruction(self):
        """An obstruction raised inside the construction has its own exit code."""
        with mock.patch("fdq.deform.build_module_deformation", side_effect=ObstructionError("δρ_1 differs from R_0")):
            code, _ = self.run_cli("build", "--config", self.path("run.cfg"), "-o", self.path("module.txt"))
        self.assertEqual(code, EXIT_OBSTRUCTION)
        self.assertFalse(Path(self.path("module.txt")).exists())


class TestCommutantCommands(CliTestCase):
    """Test suite for commutant, bounded-commutant, star-prime and gauge."""

    def setUp(self):
        super().setUp()
        context = fr.VarContext(n=2, k=1)
        star = fdf.moyal(context, [[0, 1], [-1, 0]], 2)
        fs.dump(fdf.lifted_module(star), Path(self.path("module.txt")))
        y = context.gen(context.iy(0))
        self.dy = fdo.DiffOp.dy(context, 0)
        fs.dump(self.dy, Path(self.path("dy.txt")))
        fs.dump(fdo.DiffOp.multiplication(context, y) * self.dy, Path(self.path("ydy.txt")))
        fs.dump(fdo.DiffOp.multiplication(context, context.gen(0)), Path(self.path("x1.txt")))

    def test_commutant(self):
        code, output = self.run_cli("commutant", self.path("module.txt"), self.path("x1.txt"), "-o", self.path("D.txt"))
        self.assertEqual(code, EXIT_OK, output)
        self.assertIsInstance(fs.load(Path(self.path("D.txt"))), fdf.CommutantElement)

    def test_commutant_rejects_non_vertical(self):
        fs.dump(fdo.DiffOp.dx(fr.VarContext(n=2, k=1), 0), Path(self.path("dx.txt")))
        code, _ = self.run_cli("commutant", self.path("module.txt"), self.path("dx.txt"), "-o", self.path("D.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_star_prime(self):
        code, output = self.run_cli(
            "star-prime", self.path("module.txt"), self.path("x1.txt"), self.path("dy.txt"), "-o", self.path("AB.txt")
        )
        self.assertEqual(code, EXIT_OK, output)
        self.assertIsInstance(fs.load(Path(self.path("AB.txt"))), fr.Series)

    def test_gauge(self):
        code, output = self.run_cli(
            "gauge", self.path("module.txt"), self.path("dy.txt"), self.path("ydy.txt"), "-o", self.path("bracket.txt")
        )
        self.assertEqual(code, EXIT_OK, output)
        self.assertEqual(fs.load(Path(self.path("bracket.txt")))[0], self.dy)

    def test_bounded_commutant(self):
        """Explicit bounds on a first-order structure; every basis element lies in the image of ρ′."""
        context = fr.VarContext(n=2, k=1)
        fs.dump(fdf.lifted_module(fdf.moyal(context, [[0, 1], [-1, 0]], 1)), Path(self.path("first.txt")))
        code, output = self.run_cli("bounded-commutant", self.path("first.txt"), "--operator-order", "1", "--degree", "1")
        self.assertEqual(code, EXIT_OK, output)
        self.assertIn("bounded commutant: PASSED", output)
        self.assertIn("commutant image", output)


class TestUsage(CliTestCase):
    def test_unknown_command(self):
        code, _ = self.run_cli("quantize")
        self.assertEqual(code, EXIT_INPUT)

    def test_missing_option(self):
        code, _ = self.run_cli("moyal", "--n", "2", "-o", self.path("star.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_malformed_file(self):
        Path(self.path("bad.txt")).write_text("fdq/1\nkind module\nvars x:1\n")
        Path(self.path("star.txt")).write_text("not a file of ours\n")
        code, _ = self.run_cli("verify", self.path("bad.txt"), self.path("star.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_missing_file(self):
        code, _ = self.run_cli("verify", self.path("absent.txt"), self.path("absent.txt"))
        self.assertEqual(code, EXIT_INPUT)

    def test_homotopy_suite(self):
        code, output = self.run_cli(
            "homotopy-test", "--n", "1", "--seed", "3", "--order", "1", "--degree-bound", "1", "--cases", "1"
        )
        self.assertEqual(code, EXIT_OK, output)
        self.assertIn("PASSED", output)

    def test_output_directory(self):
        """Relative outputs go under the configured output directory."""
        with mock.patch.dict(os.environ, {fd.OUTPUT_DIR_ENV: str(self.root)}):
            code, _ = self.run_cli("moyal", "--n", "2", "--pi", "0 1; -1 0", "--order", "1", "-o", "relative.txt")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((self.root / "relative.txt").exists())


if __name__ == "__main__":
    unittest.main()
