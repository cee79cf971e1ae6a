ROTATION_TOL = 1e-9
UNIT_TOL = 1e-12
PARALLEL_TOL = 1e-6
SINGULAR_TOL = 1e-12
GN_STEP_TOL = 1e-12
GN_MAX_ITER = 50
MEDIAN_TOL = 1e-10

DEFAULT_ALPHA = 50.0
MIN_BASELINE = 0.1
MAX_LAG = 2.0
MAX_MATCH_GAP = 0.05

# Overlap fraction of the shorter trace required at every admissible lag
MIN_OVERLAP_FRACTION = 0.5
MAX_COVERAGE_DEFICIENCY = 0.9
MAX_GRAVITY_CONDITION = 1e3
DUPLICATE_TIME_TOL = 1e-6
