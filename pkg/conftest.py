import sys
from pathlib import Path

# `src` is imported as a top-level package, the same way uvicorn loads src.sim_api
sys.path.insert(0, str(Path(__file__).resolve().parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long randomized sweeps (deselect with -m 'not slow')")
