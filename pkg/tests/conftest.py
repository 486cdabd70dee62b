import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from teichlimit.config import RunConfig
from teichlimit.constructor import synthesize
from teichlimit.curves import constant, polyline, segment

ROOT = Path(__file__).resolve().parents[1]
CURVES = ROOT / "curves"

TARGETS = {
    "constant": lambda: constant((1 / 3, 1 / 3, 1 / 3)),
    "segment": lambda: segment((1, 0, 0), (0, 1, 0)),
    "triangle": lambda: polyline([(0.6, 0.2, 0.2), (0.2, 0.6, 0.2), (0.2, 0.2, 0.6)], closed=True),
}

_cache = {}


def certificate(name, K):
    key = (name, K)
    if key not in _cache:
        _cache[key] = synthesize(TARGETS[name](), K, RunConfig(K=K))
    return _cache[key]


@pytest.fixture(scope="session")
def cert_factory():
    return certificate
