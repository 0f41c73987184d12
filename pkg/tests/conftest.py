"""Shared fixtures.

The identity-flux wave at a = 1/4 is the one moderately expensive object
several files need; find_speed runs once per session and the profile is
reused read-only.
"""

import pytest

from normstab import find_speed, wave_problem


@pytest.fixture(scope="session")
def identity_wave():
    wp = wave_problem(0.25)
    v_star, profile = find_speed(wp)
    return wp, v_star, profile
