import math

import numpy as np
import pytest

from catforms.geometry import CurveState, FamilySpec

# one admissible sampling box per family (u, v ranges in the chart)
BOXES = {
    "euclidean": ((-3.0, 3.0), (0.2, 4.0)),
    "sphere": ((0.05, 1.5), (-3.0, 3.0)),
    "sphere-extrinsic": ((0.05, 1.5), (-3.0, 3.0)),
    "hyp-geodesic": ((0.1, 4.0), (0.1, 4.0)),
    "hyp-horodist": ((0.1, 4.0), (0.1, 4.0)),
    "horocycle": ((-3.0, 3.0), (1.1, 6.0)),
}


def random_states(kind: str, n: int, seed: int = 0) -> list[CurveState]:
    rng = np.random.default_rng(seed)
    (u0, u1), (v0, v1) = BOXES[kind]
    u = rng.uniform(u0, u1, n)
    v = rng.uniform(v0, v1, n)
    th = rng.uniform(-math.pi, math.pi, n)
    return [CurveState(a, b, c) for a, b, c in zip(u, v, th)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=list(BOXES))
def kind(request):
    return request.param


def family(kind: str, alpha: float = 1.0) -> FamilySpec:
    return FamilySpec(kind, alpha)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
