"""Shared fixtures: one midsize identity-metric geometry reused across files."""

from __future__ import annotations

import numpy as np
import pytest

from wavecert.domains import influence_sets
from wavecert.metric import geodesic_distance, identity_metric

EXTENT = ((-2.0, 2.0), (-2.0, 2.0))
Z0 = (0.0, 0.0)
ELL, T, GAMMA = 0.1, 0.5, 0.15


@pytest.fixture(scope="session")
def ident_field_129():
    return identity_metric(EXTENT, 129, i0=0.9)


@pytest.fixture(scope="session")
def ident_geo_129(ident_field_129):
    return geodesic_distance(ident_field_129, Z0)


@pytest.fixture(scope="session")
def ident_sets_129(ident_geo_129):
    times = np.linspace(-T, T, 65)
    return influence_sets(ident_geo_129, times, ELL, T, GAMMA, enforce_small_cylinder=True)
