"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature.  The numpy path is
used when numba cannot be imported or when ``KINK_SPECTRA_NO_NUMBA`` is set to a
truthy value before the package is imported.  ``BACKEND`` records the choice.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("KINK_SPECTRA_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:  # pragma: no cover - exercised implicitly
    if _DISABLE:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# exponential convolution: out[j, m] = h * sum_n exp(-k_j |m - n| h) F[j, n]
# ---------------------------------------------------------------------------

def exp_conv_numpy(F, ks, h):
    F = np.asarray(F, dtype=np.complex128)
    ks = np.asarray(ks, dtype=np.complex128)
    n = F.shape[1]
    dist = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) * h
    out = np.empty_like(F)
    for j in range(F.shape[0]):
        out[j] = h * (np.exp(-ks[j] * dist) @ F[j])
    return out


def exp_conv_sweep_numpy(F, ks, h):
    # same two-sweep recursion as the compiled kernel, vectorized over channels
    F = np.asarray(F, dtype=np.complex128)
    ks = np.asarray(ks, dtype=np.complex128)
    nch, n = F.shape
    r = np.exp(-ks * h)
    fwd = np.empty_like(F)
    acc = np.zeros(nch, dtype=np.complex128)
    for m in range(n):
        acc = F[:, m] + r * acc
        fwd[:, m] = acc
    out = np.empty_like(F)
    bwd = np.zeros(nch, dtype=np.complex128)
    for m in range(n - 1, -1, -1):
        out[:, m] = h * (fwd[:, m] + bwd)
        bwd = r * (F[:, m] + bwd)
    return out



def _exp_conv_numba_wrapper(F, ks, h):
    F = np.ascontiguousarray(F, dtype=np.complex128)
    ks = np.ascontiguousarray(ks, dtype=np.complex128)
    return _exp_conv_numba_impl(F, ks, float(h))


@njit(cache=True, nogil=True)
def _exp_conv_numba_impl(F, ks, h):
    nch, n = F.shape
    out = np.empty_like(F)
    fwd = np.empty(n, dtype=np.complex128)
    for j in range(nch):
        r = np.exp(-ks[j] * h)
        acc = 0j
        for m in range(n):
            acc = F[j, m] + r * acc
            fwd[m] = acc
        bwd = 0j  # sum_{n > m} r^(n - m) F[n]
        for m in range(n - 1, -1, -1):
            out[j, m] = h * (fwd[m] + bwd)
            bwd = r * (F[j, m] + bwd)
    return out


# ---------------------------------------------------------------------------
# regularized star-channel kernel: K(d) = (1 - exp(-k d)) / (2 k), K -> d / 2
# ---------------------------------------------------------------------------

def _phi1_numpy(z):
    # (1 - exp(-z)) / z, with the removable singularity at z = 0
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[~small]
    out[~small] = -np.expm1(-zs) / zs
    zz = z[small]
    term = np.ones_like(zz)
    acc = np.ones_like(zz)
    for n in range(2, 12):
        term = -term * zz / n
        acc = acc + term
    out[small] = acc
    return out


def reg_conv_numpy(f, k, h):
    f = np.asarray(f, dtype=np.complex128)
    n = f.shape[0]
    dist = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) * h
    kern = 0.5 * dist * _phi1_numpy(complex(k) * dist)
    return h * (kern @ f)


@njit(cache=True, nogil=True)
def _phi1_scalar(z):
    if abs(z) < 1e-2:
        term = 1.0 + 0j
        acc = 1.0 + 0j
        for n in range(2, 12):
            term = -term * z / n
            acc += term
        return acc
    return (1.0 - np.exp(-z)) / z


@njit(cache=True, nogil=True)
def _reg_conv_numba_impl(f, k, h):
    n = f.shape[0]
    # the kernel depends only on |m - n|
    kern = np.empty(n, dtype=np.complex128)
    for d in range(n):
        dist = d * h
        kern[d] = 0.5 * dist * _phi1_scalar(k * dist)
    out = np.empty(n, dtype=np.complex128)
    for m in range(n):
        acc = 0j
        for q in range(n):
            acc += kern[abs(m - q)] * f[q]
        out[m] = h * acc
    return out


def _reg_conv_numba_wrapper(f, k, h):
    f = np.ascontiguousarray(f, dtype=np.complex128)
    return _reg_conv_numba_impl(f, complex(k), float(h))


# ---------------------------------------------------------------------------
# damped leapfrog for  u_tt = Lap u - V u - c u_t   (c = eps*gamma + sponge)
# velocity is staggered by dt/2; the damping term is averaged over the two
# half-step velocities, which makes the update pointwise semi-implicit.
# Returns the work done by the gamma term and by the sponge over nsteps.
# ---------------------------------------------------------------------------

def leapfrog_numpy(phi, v, pot, cg, cs, dt, hx, hy, nsteps):
    work_g = 0.0
    work_s = 0.0
    area = hx * hy
    a = 0.5 * dt * (cg + cs)
    for _ in range(nsteps):
        acc = -pot * phi
        lap = -2.0 * phi * (1.0 / hx**2 + 1.0 / hy**2)
        lap[1:, :] += phi[:-1, :] / hx**2
        lap[:-1, :] += phi[1:, :] / hx**2
        lap[:, 1:] += phi[:, :-1] / hy**2
        lap[:, :-1] += phi[:, 1:] / hy**2
        acc += lap
        v_new = ((1.0 - a) * v + dt * acc) / (1.0 + a)
        vbar = 0.5 * (v_new + v)
        work_g += dt * area * float(np.sum(cg * vbar * vbar))
        work_s += dt * area * float(np.sum(cs * vbar * vbar))
        v[...] = v_new
        phi += dt * v
    return work_g, work_s


@njit(cache=True, nogil=True)
def _leapfrog_numba(phi, v, pot, cg, cs, dt, hx, hy, nsteps):
    nx, ny = phi.shape
    ihx2 = 1.0 / (hx * hx)
    ihy2 = 1.0 / (hy * hy)
    area = hx * hy
    work_g = 0.0
    work_s = 0.0
    for _ in range(nsteps):
        # read phase: new velocities from the current field
        for i in range(nx):
            for j in range(ny):
                c = phi[i, j]
                lap = -2.0 * c * (ihx2 + ihy2)
                if i > 0:
                    lap += phi[i - 1, j] * ihx2
                if i < nx - 1:
                    lap += phi[i + 1, j] * ihx2
                if j > 0:
                    lap += phi[i, j - 1] * ihy2
                if j < ny - 1:
                    lap += phi[i, j + 1] * ihy2
                acc = lap - pot[i, j] * c
                a = 0.5 * dt * (cg[i, j] + cs[i, j])
                vold = v[i, j]
                vnew = ((1.0 - a) * vold + dt * acc) / (1.0 + a)
                vbar = 0.5 * (vnew + vold)
                work_g += dt * area * cg[i, j] * vbar * vbar
                work_s += dt * area * cs[i, j] * vbar * vbar
                v[i, j] = vnew
        # write phase
        for i in range(nx):
            for j in range(ny):
                phi[i, j] += dt * v[i, j]
    return work_g, work_s


if HAVE_NUMBA:
    exp_conv = _exp_conv_numba_wrapper
    reg_conv = _reg_conv_numba_wrapper
    leapfrog = _leapfrog_numba
else:  # pragma: no cover
    exp_conv = exp_conv_sweep_numpy
    reg_conv = reg_conv_numpy
    leapfrog = leapfrog_numpy
