import numpy as np
import pytest

import sourcecond as sc
from sourcecond.experiments import shepp_logan


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def phantom64():
    return shepp_logan(64)


@pytest.fixture(scope="session")
def denoise_cert(phantom64):
    """Exact TV certificate for the 64x64 phantom with identity forward map.

    Shared by the round-trip and error-estimate tests; ``build_seconds``
    records the wall-clock cost so tests can account for it.
    """
    import time

    t0 = time.perf_counter()
    u = phantom64
    fwd = sc.IdentityMap(u.shape)
    a = sc.grad2(*u.shape)
    cfg = sc.SolveConfig(max_iters=200_000, grad_tol=1e-10, tau=1.0, sigma=1.0 / 9.0,
                         record_every=100)
    report = sc.solve_range_cd(u, fwd, a, sc.ProxFunctional("group_l21"), cfg)
    check = sc.verify_tv_subgradient(report.v, report.q, u, 1e-6)
    return {
        "u": u,
        "fwd": fwd,
        "grad_op": a,
        "report": report,
        "check": check,
        "build_seconds": time.perf_counter() - t0,
    }
