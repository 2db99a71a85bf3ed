# Configuration for field synthesis and PDE residuals

# --- Grids ---
# Default number of x samples on [0, 2 pi) for the field subcommand.
DEFAULT_X_SAMPLES = 64

# Every synthesized grid must hold at least this many points per unit of K.
ALIASING_FACTOR = 4

# --- Residual ---
# Minimum number of time samples for centered differences.
MIN_RESIDUAL_TIMES = 3
