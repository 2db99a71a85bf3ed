# Configuration for the command line, run manifests and batch experiments

# --- Tool ---
TOOL_NAME = "comblab"
TOOL_VERSION = "0.1.0"

# --- Environment ---
# Read through python-dotenv, so a local .env file works as well.
OUTPUT_DIR_ENV = "COMBLAB_OUTPUT_DIR"
THREADS_ENV = "COMBLAB_THREADS"
DEFAULT_OUTPUT_DIR = "runs"

# --- Exit Codes ---
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

# --- Manifests ---
# Written next to the main output unless --manifest is given.
MANIFEST_SUFFIX = ".manifest.json"
DIGEST_CHUNK = 1 << 16

# --- Batch Experiments ---
EXPERIMENTS_FILE = "src/interface/experiments.yaml"
REGISTRY_FILE = "data/experiment_registry.json"

# --- CSV Headers ---
TRAJECTORY_HEADER = ("t", "k", "re", "im")
DIAGNOSTICS_HEADER = ("t", "mass", "energy")
EXPLICIT_HEADER = ("t", "re", "im", "phase", "tail_bound")
FIELD_HEADER = ("t", "x", "re", "im")
RESIDUAL_HEADER = ("t", "res_l2")
NORMS_HEADER = ("nu", "k", "norm")
PROFILE_HEADER = ("nu", "norm", "scaled")
DIVISOR_HEADER = ("M_max", "max_count", "argmax", "mean_count", "max_over_log")
