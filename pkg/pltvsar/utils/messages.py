# Error Messages
INVALID_OBJECT_ERR = "INVALID {} NAME: {}. AVAILABLE {}"
INVALID_GRID_ERR = "Lattice side length must be >= 2, got m={}"
ISOLATED_LOCATION_ERR = "Location {} has no neighbors; cannot row-standardize"
DIMENSION_ERR = "Dimension mismatch: expected {} but got {}"
NEGATIVE_WEIGHTS_ERR = "Spatial weights must be non-negative and finite"
DIAGONAL_NOT_ZERO_ERR = "Spatial weights diagonal must be zero; nonzero at rows {}"
NON_SQUARE_WEIGHTS_ERR = "Weights matrix in {} is not square: shape {}"
NON_RECTANGULAR_ERR = "File {} could not be parsed as a rectangular table! Exception: {}!"
MISSING_CELLS_ERR = "Panel in {} is missing {} (location, period) cells, e.g. {}"
MISSING_COLUMNS_ERR = "Panel in {} is missing required columns {}"
MISSING_KEYS_ERR = "Panel in {} has {} blank cell(s) in key column {}"
PANEL_TOO_SMALL_ERR = "Panel in {} has N={} locations and T={} periods; need at least 2 of each"
NON_FINITE_ERR = "{} contains NaN or infinite values in column(s) {}"
FILE_NOT_FOUND_ERR = "File {} does not exist!"
DEGENERATE_GRID_ERR = "ROT bandwidth needs at least 2 periods, got T={}"
SINGULAR_WEIGHTS_ERR = "Kernel weights sum to zero, period weights {}"
SINGULAR_LOCAL_ERR = "{}Local system at tau0={:.6g} is singular (rcond={:.3e} < {:.0e})"
INSUFFICIENT_REGRESSORS_ERR = "Instrument construction needs p >= 2 columns, got p={}"
INTERCEPT_ERR = "Column {} of the design is not an all-ones intercept"
COLLINEAR_CONSTANT_ERR = "Constant-coefficient block is collinear after profiling (rcond={:.3e})"
INVALID_RSS_ERR = "RSS_TV must be positive, got {}"
EXPLOSIVE_DGP_ERR = "I - rho_NT W is numerically singular at period {} (max |rho|={:.4f})"
DGP_SINGULAR_ERR = "DGP system I - rho_NT W is singular at period {} (max |rho|={:.4f})"
INVALID_SPEC_ERR = "Invalid model spec: {}"
PRECONDITION_ERR = "Precondition violated: {}"
REPLICATE_FAIL_MSG = "Replicate {} failed: {}"
CONFIG_NOT_FOUND_MSG = "ALERT! {} config {} file does not exist!"
CONFIG_PARSE_ERR = "Config {} could not be parsed at line {}, column {}: {}\n  > {}"
NONSTATIONARY_MSG = "Estimated spatial lag coefficient leaves (-1, 1): max |rho_hat| = {:.4f}"
