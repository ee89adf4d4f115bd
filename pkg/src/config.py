# src/config.py
# --------------------------------------------
# Environment-driven defaults shared by the CLI, the API and the experiments.
# Everything is read once at import; callers may still pass explicit values.

import os


def _int_env(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}.")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}.")
    return value


DEBUG_LOGS = os.getenv("DEBUG_LOGS", "0") == "1"

FIELD_BITS = _int_env("RTNC_FIELD_BITS", 8, minimum=1)
DELAY_BOUND = _int_env("RTNC_DELAY_BOUND", 2, minimum=1)
SEED = _int_env("RTNC_SEED", 0)

# binary-flow problems with more wired edges than this use the heuristic
EXACT_EDGE_BUDGET = _int_env("RTNC_EXACT_EDGE_BUDGET", 64, minimum=1)
EXACT_NODE_LIMIT = _int_env("RTNC_EXACT_NODE_LIMIT", 32, minimum=1)
RING_SEARCH_BUDGET = _int_env("RTNC_RING_SEARCH_BUDGET", 12, minimum=0)
# branch-and-bound node caps for the flow heuristic and the block packing
MILP_NODE_LIMIT = _int_env("RTNC_MILP_NODE_LIMIT", 2000, minimum=1)
PACKING_NODE_LIMIT = _int_env("RTNC_PACKING_NODE_LIMIT", 5000, minimum=1)

DATABASE_URL = os.getenv("DATABASE_URL") or "sqlite:///rtnc_runs.db"


def dbg(*args):
    if DEBUG_LOGS:
        print(*args)
