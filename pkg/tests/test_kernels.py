"""Compiled kernels against their numpy twins and against direct sums."""
import os
import subprocess
import sys

import numpy as np
import pytest

from kink_spectra import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def _direct_reg(f, k, h):
    n = len(f)
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) * h
    if k == 0:
        ker = 0.5 * d
    else:
        ker = (1 - np.exp(-k * d)) / (2 * k)
    return h * ker @ f


def test_exp_sweep_matches_direct_sum(rng):
    F = rng.standard_normal((7, 53)) + 1j * rng.standard_normal((7, 53))
    ks = np.array([0.3, 1.0, 4.0, 20.0, 0.5 + 0.2j, 2j + 0.1, 0.05])
    np.testing.assert_allclose(K.exp_conv_sweep_numpy(F, ks, 0.1), K.exp_conv_numpy(F, ks, 0.1),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("k", [0.0, 1e-4, 0.02 + 0.01j, 0.7, 3.0 - 0.5j])
def test_reg_conv_matches_direct_sum(rng, k):
    f = rng.standard_normal(41) + 0j
    np.testing.assert_allclose(K.reg_conv_numpy(f, k, 0.2), _direct_reg(f, k, 0.2), rtol=1e-9, atol=1e-12)


@needs_numba
def test_numba_exp_conv_agrees(rng):
    F = rng.standard_normal((5, 80)) + 1j * rng.standard_normal((5, 80))
    ks = np.array([0.2, 1.5, 9.0, 0.3 + 0.4j, 1j + 0.01])
    np.testing.assert_allclose(K._exp_conv_numba_wrapper(F, ks, 0.05), K.exp_conv_sweep_numpy(F, ks, 0.05),
                               rtol=1e-12, atol=1e-13)


@needs_numba
@pytest.mark.parametrize("k", [0.0, 3e-3, 0.4 + 0.1j])
def test_numba_reg_conv_agrees(rng, k):
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    np.testing.assert_allclose(K._reg_conv_numba_wrapper(f, k, 0.1), K.reg_conv_numpy(f, k, 0.1),
                               rtol=1e-12, atol=1e-13)


@needs_numba
def test_numba_leapfrog_agrees(rng):
    shape = (21, 17)
    pot = rng.uniform(1, 3, shape)
    cg = rng.uniform(-0.2, 0.2, shape)
    cs = rng.uniform(0, 0.5, shape)
    phi0, v0 = rng.standard_normal(shape), rng.standard_normal(shape)
    a, va = phi0.copy(), v0.copy()
    b, vb = phi0.copy(), v0.copy()
    wa = K.leapfrog_numpy(a, va, pot, cg, cs, 0.02, 0.1, 0.12, 30)
    wb = K._leapfrog_numba(b, vb, pot, cg, cs, 0.02, 0.1, 0.12, 30)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(va, vb, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(wa, wb, rtol=1e-11)


def test_backend_flag_selects_numpy():
    env = {**os.environ, "KINK_SPECTRA_NO_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", "import kink_spectra._kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
