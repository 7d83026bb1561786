import math

import numpy as np
import numpy.testing as npt
import pytest

from oobcov.arrays import UlaGeometry, array_response
from oobcov.covariance import CovarianceMatrix, subspace_decompose
from oobcov.precoding import (
    HybridPrecoder,
    PhaseCodebook,
    design_digital,
    design_hybrid,
    quantized_steering_atoms,
)


def _random_psd(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return CovarianceMatrix(mat=g @ g.conj().T / n)


def _subspace_overlap(r, precoder, n_streams):
    u = subspace_decompose(r, n_streams).signal_basis
    q, _ = np.linalg.qr(precoder.combined(0))
    return float(np.linalg.norm(u.conj().T @ q) ** 2) / n_streams


# ---------------------------------------------------------------- codebook


def test_codebook_phases():
    cb = PhaseCodebook(bits=2)
    assert len(cb.phases) == 4
    npt.assert_allclose(cb.phases, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2],
                        rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        PhaseCodebook(bits=0)


def test_codebook_snap_index_rounds_and_wraps():
    cb = PhaseCodebook(bits=2)
    assert cb.snap_index(0.1) == 0
    assert cb.snap_index(math.pi / 2 - 0.1) == 1
    assert cb.snap_index(2 * math.pi - 0.01) == 0
    assert cb.snap_index(-math.pi / 2) == 3


def test_quantized_atoms_live_on_the_codebook():
    cb = PhaseCodebook(bits=2)
    atoms = quantized_steering_atoms(8, cb, oversampling=2)
    assert atoms.shape == (8, 16)
    npt.assert_allclose(np.abs(atoms), 1.0 / math.sqrt(8), rtol=0, atol=1e-15)
    step = 2 * math.pi / len(cb.phases)
    offsets = np.mod(np.angle(atoms), step)
    offsets = np.minimum(offsets, step - offsets)
    assert np.max(offsets) < 1e-9


# ---------------------------------------------------------------- digital design


def test_design_digital_rank_one():
    a = array_response(UlaGeometry(8), 0.4)
    r = CovarianceMatrix(mat=3.0 * np.outer(a, a.conj()) + 0.1 * np.eye(8))
    f = design_digital(r, 1)
    assert f.shape == (8, 1)
    assert abs(np.vdot(f[:, 0], a)) == pytest.approx(1.0, abs=1e-10)


def test_design_digital_orthonormal_and_principal(rng):
    r = _random_psd(rng, 6)
    f = design_digital(r, 3)
    npt.assert_allclose(f.conj().T @ f, np.eye(3), rtol=0, atol=1e-10)
    dec = subspace_decompose(r, 3)
    npt.assert_allclose(f @ f.conj().T,
                        dec.signal_basis @ dec.signal_basis.conj().T,
                        rtol=0, atol=1e-10)


def test_design_digital_validation(rng):
    r = _random_psd(rng, 4)
    with pytest.raises(ValueError):
        design_digital(r, 0)
    with pytest.raises(ValueError):
        design_digital(r, 5)


# ---------------------------------------------------------------- hybrid design


def test_hybrid_reaches_representable_target():
    """A target that coincides with one RF atom is matched essentially exactly."""
    cb = PhaseCodebook(bits=2)
    atoms = quantized_steering_atoms(8, cb, oversampling=2)
    q = atoms[:, 3]
    r = CovarianceMatrix(mat=2.0 * np.outer(q, q.conj()) + 0.01 * np.eye(8))
    pre = design_hybrid(r, n_rf=1, n_streams=1, codebook=cb)
    combined = pre.combined(0)[:, 0]
    assert np.linalg.norm(combined) == pytest.approx(1.0, abs=1e-8)
    assert abs(np.vdot(q, combined)) == pytest.approx(1.0, abs=1e-8)


def test_hybrid_power_constraint_and_grid(rng):
    r = _random_psd(rng, 16)
    k = 4
    pre = design_hybrid(r, n_rf=4, n_streams=2, num_subcarriers=k)
    total = sum(np.linalg.norm(pre.combined(i)) ** 2 for i in range(k))
    assert total == pytest.approx(k * 2, rel=1e-8)
    npt.assert_allclose(np.abs(pre.rf), 0.25, rtol=0, atol=1e-12)
    assert pre.num_subcarriers == k
    # flat across subcarriers: the baseband refit is shared
    npt.assert_array_equal(pre.combined(0), pre.combined(k - 1))


def test_more_chains_never_hurt_subspace_overlap(rng):
    r = _random_psd(rng, 8)
    small = design_hybrid(r, n_rf=2, n_streams=2)
    large = design_hybrid(r, n_rf=8, n_streams=2)
    assert _subspace_overlap(r, large, 2) >= _subspace_overlap(r, small, 2) - 1e-9


def test_design_hybrid_validation(rng):
    r = _random_psd(rng, 8)
    with pytest.raises(ValueError, match="n_streams"):
        design_hybrid(r, n_rf=2, n_streams=3)
    with pytest.raises(ValueError, match="n_streams"):
        design_hybrid(r, n_rf=9, n_streams=1)


# ---------------------------------------------------------------- container


def test_hybrid_precoder_validation():
    cb = PhaseCodebook(bits=2)
    n, m, k = 4, 2, 1
    rf = np.exp(1j * np.zeros((n, m))) / 2.0
    bb = np.zeros((k, m, 1), dtype=complex)
    bb[:, 0, 0] = 1.0
    pre = HybridPrecoder(rf=rf, bb=bb, codebook=cb)
    npt.assert_allclose(np.linalg.norm(pre.combined(0)), 1.0, rtol=0, atol=1e-12)

    with pytest.raises(ValueError, match="magnitude"):
        HybridPrecoder(rf=2.0 * rf, bb=bb, codebook=cb)
    off_grid = np.exp(1j * np.full((n, m), 0.3)) / 2.0
    with pytest.raises(ValueError, match="codebook grid"):
        HybridPrecoder(rf=off_grid, bb=bb, codebook=cb)
    with pytest.raises(ValueError, match="power constraint"):
        HybridPrecoder(rf=rf, bb=3.0 * bb, codebook=cb)
    with pytest.raises(ValueError, match="rf must be"):
        HybridPrecoder(rf=rf, bb=np.zeros((k, m + 1, 1), dtype=complex), codebook=cb)
