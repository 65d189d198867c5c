import functools
import time

import pytest

from lepoly.pipeline import RunConfig, run_pipeline


@functools.lru_cache(maxsize=None)
def _cached(f, g, seed, max_step_rel, oracle):
    start = time.perf_counter()
    report = run_pipeline(RunConfig(f=f, g=g, seed=seed, max_step_rel=max_step_rel, oracle=oracle))
    return report, time.perf_counter() - start


@pytest.fixture(scope="session")
def run():
    """``run(f, g="1", seed=0, max_step_rel=0.1, oracle=True)`` -> (report, seconds), cached per session."""
    def _run(f, g="1", seed=0, max_step_rel=0.1, oracle=True):
        return _cached(f, g, seed, max_step_rel, oracle)
    return _run
