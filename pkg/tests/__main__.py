import unittest

from tests.test_ring import *
from tests.test_diffop import *
from tests.test_hochschild import *
from tests.test_homotopy import *
from tests.test_deform import *
from tests.test_generator import *
from tests.test_report import *
from tests.test_serialization import *
from tests.test_cli import *


if __name__ == "__main__":
    unittest.main()
