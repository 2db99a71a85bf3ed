# Configuration for the windowed Fourier-Lebesgue norms

# --- Window Grids ---
# Samples per extended window I^e_nu (power of two, at least MIN_WINDOW_SAMPLES)
WINDOW_SAMPLES = 256
MIN_WINDOW_SAMPLES = 256

# --- Norm Parameters ---
DEFAULT_S = 0.75
DEFAULT_P = 2.0

# Extensions of f from I_nu to I^e_nu tried by hsp_norm_estimate
EXTENSIONS = ("reflect", "edge", "zero")

# --- Parallelism ---
# Worker threads for per-window evaluation (1 = sequential)
DEFAULT_THREADS = 1
