SEED = 0

# Truncation order of the formal parameter
ORDER = 3

# Number of auxiliary q/t groups in a context, enough for 3-cochains
AUX_GROUPS = 4

# Property suites
DEGREE_BOUND = 3
CASES = 100

# Bounded commutant search
COMMUTANT_OPERATOR_ORDER = 2
COMMUTANT_DEGREE = 2

FORMAT_VERSION = "fdq/1"
OUTPUT_DIR_ENV = "FDQ_OUTPUT_DIR"
