# Configuration for the truncated mode systems and their integration

import math

# --- Integrator Parameters ---
# scipy.integrate.solve_ivp method (embedded Runge-Kutta 5(4), Dormand-Prince)
INTEGRATOR_METHOD = "RK45"

# Relative and absolute local error tolerances
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

# Largest step the integrator may take (inf = let the controller decide)
DEFAULT_MAX_STEP = math.inf

# Number of output samples written per trajectory
DEFAULT_SAMPLES = 101

# --- Boundary Condition at Large Time ---
# Default horizon where B(T_max) = alpha (+ tail) is imposed
DEFAULT_T_MAX = 100.0

# "coarse" starts from alpha, "refined" adds the integration-by-parts tail
DEFAULT_TAIL_MODE = "coarse"

TAIL_MODES = ("coarse", "refined")

# --- Energy ---
# Coefficient theta in E = 1/2 int |w_x|^2 - (theta / t) int (|w|^2 - c)^2
# for the lab-frame field of the B-system.
ENERGY_THETA = -1.0 / (32.0 * math.pi)

# --- Systems ---
SYSTEM_TAGS = ("A", "A_tilde", "B")

# Normalizing factor 1 / (8 pi) shared by every right-hand side
COUPLING = 1.0 / (8.0 * math.pi)
