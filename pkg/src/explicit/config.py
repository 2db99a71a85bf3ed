# Configuration for the constant-data phase integral

# --- Frequency Truncation ---
# Largest phase frequency m kept in the divisor sum
DEFAULT_M_MAX = 4096

# --- Remainder Quadrature ---
# Upper truncation of the 1/tau^2 remainder integral is T_MAX_FACTOR * t
# unless a fixed T_max is given.
T_MAX_FACTOR = 1e4

# Absolute tolerance on the certified remainder error
DEFAULT_QUAD_TOL = 1e-10

# Per-frequency quadrature targets, as a fraction of quad_tol and relative
QUAD_EPSABS_FRACTION = 1e-2
QUAD_EPSREL = 1e-12

# Subinterval limit passed to scipy.integrate.quad (QAWO)
QUAD_LIMIT = 200

# --- Scalar ODE Check ---
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
ODE_SAMPLES = 91

# --- Sweeps ---
# Default times for the decay fit
DECAY_FIT_TIMES = (10.0, 20.0, 40.0, 80.0)

# Accepted range of the log-log slope of |Phi| over DECAY_FIT_TIMES
DECAY_SLOPE_BAND = (-1.2, -0.8)
