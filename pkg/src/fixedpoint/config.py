# Configuration for the fixed-point map and Picard iteration

# --- Mesh Parameters ---
# Gauss-Legendre nodes per panel
NODES_PER_PANEL = 16

# Upper bound on the panel length, also used when no frequency is present
MAX_PANEL = 0.5

# Panels in the first window [pi N, pi (N + 1)] are this many times shorter
FIRST_WINDOW_REFINEMENT = 4

# Products of three iterates oscillate up to this multiple of max |m|
OSCILLATION_FACTOR = 3

# Refuse meshes larger than this many nodes
MAX_NODES = 2_000_000

# Table entries evaluated together when summing over the mesh
ENTRY_CHUNK = 64

# --- Truncation at Large Time ---
DEFAULT_T_MAX = 60.0

# Largest accepted tail estimate beyond T_max, per mode
DEFAULT_TAIL_TOL = 1e-6

# --- Picard Iteration ---
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 60

# Abort after this many consecutive contraction ratios >= 1
DIVERGENCE_PATIENCE = 3

# Norm used for stopping: X^s_p surrogate
DEFAULT_S = 0.75
DEFAULT_P = 2.0

# --- Threshold Search ---
THRESHOLD_BISECTIONS = 12
