import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

from oobcov.arrays import UlaGeometry, array_response, steering_matrix


def test_geometry_validation():
    with pytest.raises(ValueError):
        UlaGeometry(num_antennas=0)
    with pytest.raises(ValueError):
        UlaGeometry(num_antennas=-3)
    with pytest.raises(ValueError):
        UlaGeometry(num_antennas=4, spacing=0.0)
    with pytest.raises(ValueError):
        UlaGeometry(num_antennas=4, spacing=-0.5)
    geom = UlaGeometry(num_antennas=4)
    assert geom.num_antennas == 4
    assert geom.spacing == 0.5


def test_response_broadside():
    # At angle 0 every element sees the same phase.
    geom = UlaGeometry(num_antennas=4)
    npt.assert_allclose(array_response(geom, 0.0), 0.5 * np.ones(4), rtol=0, atol=1e-15)


def test_response_endfire():
    # Half-wavelength spacing at pi/2 flips the phase at every element.
    geom = UlaGeometry(num_antennas=2)
    expected = np.array([1.0, -1.0]) / math.sqrt(2.0)
    npt.assert_allclose(array_response(geom, math.pi / 2), expected, rtol=0, atol=1e-12)


def test_response_progressive_phase():
    geom = UlaGeometry(num_antennas=8)
    a = array_response(geom, 0.3)
    npt.assert_allclose(np.linalg.norm(a), 1.0, rtol=0, atol=1e-12)
    # Consecutive entries advance by exp(j*pi*sin(theta)).
    step = np.exp(1j * math.pi * math.sin(0.3))
    npt.assert_allclose(a[1:] / a[:-1], np.full(7, step), rtol=0, atol=1e-12)


def test_steering_matrix_stacks_responses():
    geom = UlaGeometry(num_antennas=6)
    angles = np.array([-0.4, 0.0, 0.7])
    mat = steering_matrix(geom, angles)
    assert mat.shape == (6, 3)
    for i, ang in enumerate(angles):
        npt.assert_allclose(mat[:, i], array_response(geom, ang), rtol=0, atol=1e-15)


@given(
    n=st.integers(min_value=1, max_value=32),
    angle=st.floats(min_value=-math.pi / 2, max_value=math.pi / 2,
                    allow_nan=False, allow_infinity=False),
)
def test_response_unit_norm(n, angle):
    a = array_response(UlaGeometry(num_antennas=n), angle)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
