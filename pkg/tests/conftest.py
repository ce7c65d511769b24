import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from tailflow.approx import ApproxOrbit, GalerkinConfig, bundled_seed, find_periodic_orbit
from tailflow.models import BrusselatorModel, BrusselatorParams, BrusselatorHeadField
from tailflow.tails import Parity

_CACHE = "/tmp/tailflow_test_cache"


@pytest.fixture(scope="session")
def b2_model():
    return BrusselatorModel(BrusselatorParams.make("0.2", "0.02", "1", "2"),
                            Parity.ODD)


@pytest.fixture(scope="session")
def b2_orbit():
    """Approximate B=2 orbit at head 59 (computed once, cached on disk)."""
    os.makedirs(_CACHE, exist_ok=True)
    path = os.path.join(_CACHE, "orbit_b2_n59.json")
    if os.path.exists(path):
        return ApproxOrbit.from_json(json.load(open(path)))
    params = BrusselatorParams.make("0.2", "0.02", "1", "2")
    orb = find_periodic_orbit(GalerkinConfig(params, n=59, transient=60.0),
                              bundled_seed("B2.0"))
    json.dump(orb.to_json(), open(path, "w"))
    return orb


@pytest.fixture(scope="session")
def b2_field(b2_model):
    return BrusselatorHeadField(b2_model, 59)
