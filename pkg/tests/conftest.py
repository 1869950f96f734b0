"""Shared fixtures.

The reference-configuration runs live in session scope because each one costs
a full dense eigendecomposition at dimension 3232 (tens of seconds); several
test modules read from the same trace.
"""

import pytest

import ionbattery as ib


@pytest.fixture(scope="session")
def fig2_config(tmp_path_factory):
    """Default five-ion configuration (lambda=0.25, J=0.2, p=3)."""
    out = tmp_path_factory.mktemp("reference_run")
    return ib.parse_config(f"out_dir = {out}")


@pytest.fixture(scope="session")
def fig2_trace(fig2_config):
    return ib.run_evolution(fig2_config)


@pytest.fixture(scope="session")
def fig4_traces():
    """Strong-coupling runs (lambda=0.5) at weak and strong hopping."""
    traces = {}
    for j in (0.1, 2.0):
        cfg = ib.parse_config(f"lambda = 0.5\nj_hop = {j}")
        traces[j] = ib.evaluate_trace(cfg)[0]
    return traces
