"""
Test suite for the canonical text format and the run configuration.

This module tests:
- Exact file layout of small objects
- Reading back every persisted kind
- Canonical ordering of terms
- Rejection of foreign versions and malformed content
- Configuration files
"""

import tempfile
import unittest
from pathlib import Path

from pydantic import ValidationError

import fdq.deform as fdf
import fdq.diffop as fdo
import fdq.hochschild as fh
import fdq.ring as fr
import fdq.serialization as fs
from fdq.config import Config, parse_matrix
from fdq.errors import SerializationError


class TestLayout(unittest.TestCase):
    def test_poly(self):
        context = fr.VarContext(n=1, k=1)
        p = fr.Poly.var(context, "x1") * fr.Poly.var(context, "y1")
        self.assertEqual(fs.serialize(p), "fdq/1\nkind poly\nvars x:1 y:1\n[[1,1,[1,1]]]\n")

    def test_diffop(self):
        """Terms are [coefficient, α, γ]."""
        context = fr.VarContext(n=1, k=1)
        D = fdo.DiffOp.dx(context, 0).scale("-3/2")
        self.assertEqual(fs.serialize(D).splitlines()[-1], "[[[[-3,2,[0,0]]],[1],[0]]]")

    def test_star(self):
        """One `order r` line per coefficient; C₁ holds the term ½∂_{x1}a∂_{x2}b."""
        star = fdf.moyal(fr.VarContext(n=2), [[0, 1], [-1, 0]], 2)
        lines = fs.serialize(star).splitlines()
        self.assertEqual(lines[:4], ["fdq/1", "kind star", "vars x:2 y:0", "lambda 2"])
        self.assertEqual([line.split()[:2] for line in lines[4:]], [["order", "0"], ["order", "1"], ["order", "2"]])
        self.assertIn("[[[1,0],[0,1]],[[1,2,[0,0]]]]", lines[5])

    def test_cochain_header(self):
        context = fr.VarContext(n=2, k=1)
        phi = fh.Cochain(context=context, arity=2, terms={((1, 0), (0, 0)): fdo.DiffOp.dy(context, 0)})
        self.assertEqual(fs.serialize(phi).splitlines()[:4], ["fdq/1", "kind cochain", "vars x:2 y:1", "arity 2"])

    def test_auxiliary_variables_rejected(self):
        context = fr.VarContext(n=1)
        with self.assertRaises(SerializationError):
            fs.serialize(fr.Poly.var(context, "v1"))


class TestRoundTrip(unittest.TestCase):
    """Every kind reads back to an equal object."""

    @classmethod
    def setUpClass(cls):
        cls.context = fr.VarContext(n=2, k=1)
        cls.star = fdf.moyal(cls.context, [[0, 1], [-1, 0]], 2)
        cls.rho = fdf.lifted_module(cls.star)

    def assertRoundTrip(self, obj):
        self.assertEqual(fs.deserialize(fs.serialize(obj)), obj)

    def test_algebraic_kinds(self):
        context = self.context
        y = context.gen(context.iy(0))
        D = fdo.DiffOp.build(context, {(1, 0, 1): y * context.gen(0) * fr.to_rational("2/7"), (0, 0, 0): context.ring.one})
        self.assertRoundTrip(fr.Poly.var(context, "y1") ** 3 - fr.Poly.constant(context, "5/3"))
        self.assertRoundTrip(D)
        self.assertRoundTrip(fh.Cochain(context=context, arity=1, terms={((0, 2),): D}))
        self.assertRoundTrip(self.star[1])

    def test_series_kinds(self):
        identity = fdo.DiffOp.identity(self.context)
        dy = fdo.DiffOp.dy(self.context, 0)
        self.assertRoundTrip(self.star)
        self.assertRoundTrip(self.rho)
        self.assertRoundTrip(fdf.Equivalence(series=fr.Series.of([identity, fdo.DiffOp.dx(self.context, 1)], 2)))
        self.assertRoundTrip(fdf.quantize_vertical(dy, self.rho))
        self.assertRoundTrip(fr.Series.of([dy, identity], 2))

    def test_zero_objects(self):
        self.assertRoundTrip(fdo.DiffOp.zero(self.context))
        self.assertRoundTrip(fh.Cochain.zero(self.context, 3))

    def test_files(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "star.txt"
            fs.dump(self.star, path)
            self.assertEqual(fs.load(path, "star"), self.star)
            with self.assertRaises(SerializationError):
                fs.load(path, "module")
            with self.assertRaises(SerializationError):
                fs.load(Path(directory) / "missing.txt")


class TestCanonical(unittest.TestCase):
    def test_insertion_order(self):
        """Equal objects give byte-identical files whatever order their terms were added in."""
        context = fr.VarContext(n=2)
        x1, x2 = context.gen(0), context.gen(1)
        terms = {(2, 0): x1 + x2, (0, 1): x2**2 - 1, (0, 0): x1 * x2}
        forward = fdo.DiffOp.build(context, terms)
        backward = fdo.DiffOp.build(context, dict(reversed(list(terms.items()))))
        self.assertEqual(fs.serialize(forward), fs.serialize(backward))

    def test_graded_lex(self):
        context = fr.VarContext(n=1)
        x = fr.Poly.var(context, "x1")
        self.assertEqual(fs.serialize(x**2 + x + 1).splitlines()[-1], "[[1,1,[0]],[1,1,[1]],[1,1,[2]]]")


class TestMalformed(unittest.TestCase):
    """Test suite for rejected input."""

    def setUp(self):
        self.valid = fs.serialize(fdf.moyal(fr.VarContext(n=2), [[0, 1], [-1, 0]], 1))

    def assertRejected(self, text):
        with self.assertRaises(SerializationError):
            fs.deserialize(text)

    def test_version(self):
        self.assertRejected(self.valid.replace("fdq/1", "fdq/2", 1))
        self.assertRejected("")

    def test_header(self):
        """
        Validates:
        - Unknown kinds
        - Malformed variable declarations
        - Missing header lines
        """
        self.assertRejected(self.valid.replace("kind star", "kind stars"))
        self.assertRejected(self.valid.replace("vars x:2 y:0", "vars 2 0"))
        self.assertRejected("fdq/1\nkind poly\n")

    def test_body(self):
        """
        Validates:
        - Invalid JSON
        - Exponent vectors of the wrong length
        - Out-of-sequence and missing orders
        - A first coefficient that is not the pointwise product
        """
        self.assertRejected("fdq/1\nkind poly\nvars x:1 y:0\n[[1,1,[0]\n")
        self.assertRejected("fdq/1\nkind poly\nvars x:1 y:0\n[[1,1,[0,0]]]\n")
        self.assertRejected("fdq/1\nkind poly\nvars x:1 y:0\n[[1,0,[0]]]\n")
        self.assertRejected(self.valid.replace("order 1", "order 2"))
        self.assertRejected(self.valid.replace("lambda 1", "lambda 2"))
        self.assertRejected(self.valid.replace("order 0 [[[[0,0],[0,0]],[[1,1,[0,0]]]]]", "order 0 []"))

    def test_coefficients_outside_x(self):
        """Base cochain coefficients in y are refused."""
        text = "fdq/1\nkind basecochain\nvars x:1 y:1\narity 1\n[[[[0]],[[1,1,[0,1]]]]]\n"
        self.assertRejected(text)


class TestConfig(unittest.TestCase):
    """Test suite for run configurations."""

    def test_parse_matrix(self):
        self.assertEqual(parse_matrix("0 1/2; -1/2 0"), [["0", "1/2"], ["-1/2", "0"]])

    def test_round_trip(self):
        config = Config(n=2, k=1, order=2, pi="0 1; -1 0")
        text = fs.serialize(config)
        self.assertIn("pi 0 1; -1 0", text)
        self.assertEqual(fs.deserialize(text), config)
        self.assertEqual(config.context(), fr.VarContext(n=2, k=1))

    def test_star_path(self):
        """A relative star path is read against the configuration's directory."""
        text = "fdq/1\nkind config\nn 1\nstar product.txt\n"
        config = fs.deserialize(text, base=Path("/data/runs"))
        self.assertEqual(config.star, Path("/data/runs/product.txt"))
        self.assertEqual(config.order, 3)

    def test_invalid_models(self):
        """
        Validates:
        - Exactly one star product source
        - Square antisymmetric π of size n
        - Positive dimensions and order
        """
        with self.assertRaises(ValidationError):
            Config(n=2)
        with self.assertRaises(ValidationError):
            Config(n=2, pi="0 1; -1 0", star=Path("star.txt"))
        with self.assertRaises(ValidationError):
            Config(n=2, pi="0 1; 1 0")
        with self.assertRaises(ValidationError):
            Config(n=3, pi="0 1; -1 0")
        with self.assertRaises(ValidationError):
            Config(n=0, pi="")
        with self.assertRaises(ValidationError):
            Config(n=2, pi="0 1; -1 0", order=0)

    def test_invalid_files(self):
        """Unknown, repeated and invalid keys all surface as SerializationError."""
        with self.assertRaises(SerializationError):
            fs.deserialize("fdq/1\nkind config\nn 2\npi 0 1; -1 0\ncolour blue\n")
        with self.assertRaises(SerializationError):
            fs.deserialize("fdq/1\nkind config\nn 2\nn 2\npi 0 1; -1 0\n")
        with self.assertRaises(SerializationError):
            fs.deserialize("fdq/1\nkind config\nn two\npi 0 1; -1 0\n")


if __name__ == "__main__":
    unittest.main()
