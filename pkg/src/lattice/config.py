# Configuration for the mode lattice and resonance tables

# --- Truncation Parameters ---
# Largest truncation radius accepted by build_table (modes |k| <= K).
MAX_TRUNCATION = 512

# --- Divisor Statistics ---
# Default upper bound for divisor_stats when run from the CLI.
DIVISOR_STATS_M_MAX = 4096

# --- Serialization ---
# Columns written for each table entry.
ENTRY_FIELDS = ("m", "z", "j1", "j2", "j3", "lambda")
