"""Small dense eigenproblems: Hessenberg reduction and shifted QR.

Real input goes through the Francis double-shift iteration, so complex
eigenvalues come out as exact conjugate pairs.  Complex input uses a
single Wilkinson shift.  Eigenvectors are obtained by inverse iteration on
the Hessenberg form.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DenseCapExceeded, RankDeficientBasis

DENSE_CAP = 500
_EPS = np.finfo(float).eps


def hessenberg(a):
    """Householder reduction ``Q^H A Q = H``; returns ``(H, Q)``."""
    h = np.array(a, dtype=np.result_type(a, float), copy=True)
    n = h.shape[0]
    q = np.eye(n, dtype=h.dtype)
    for k in range(n - 2):
        x = h[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        v = x.copy()
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0
    return h, q


def _eig2x2_real(a, b, c, d):
    mid = 0.5 * (a + d)
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc >= 0:
        root = np.sqrt(disc)
        # avoid cancellation in the smaller root
        big = mid + root if mid >= 0 else mid - root
        small = (a * d - b * c) / big if big != 0 else mid - root
        return [complex(big), complex(small)]
    im = np.sqrt(-disc)
    return [complex(mid, im), complex(mid, -im)]


def _negligible(h, k):
    return abs(h[k, k - 1]) <= _EPS * (abs(h[k - 1, k - 1]) + abs(h[k, k]))


def _francis_real(h, maxit):
    """Eigenvalues of a real upper Hessenberg matrix (destroys ``h``)."""
    n = h.shape[0]
    eigs = []
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(h[0, 0]))
            break
        lo = hi
        while lo > 0 and not _negligible(h, lo):
            lo -= 1
        if lo > 0:
            h[lo, lo - 1] = 0.0
        if lo == hi:
            eigs.append(complex(h[hi, hi]))
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            eigs.extend(_eig2x2_real(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi]))
            hi -= 2
            its = 0
            continue
        its += 1
        total += 1
        if total > maxit:
            raise ConvergenceError(f"QR iteration did not converge in {maxit} sweeps")
        if its % 11 == 10:
            # exceptional shift
            w = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            s = 1.5 * w + h[hi, hi]
            t = w * w
        else:
            s = h[hi - 1, hi - 1] + h[hi, hi]
            t = h[hi - 1, hi - 1] * h[hi, hi] - h[hi - 1, hi] * h[hi, hi - 1]
        x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - s * h[lo, lo] + t
        y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - s)
        z = h[lo + 1, lo] * h[lo + 2, lo + 1]
        for k in range(lo, hi - 1):
            v = np.array([x, y, z])
            nv = np.linalg.norm(v)
            if nv != 0:
                v[0] += np.copysign(nv, v[0])
                v /= np.linalg.norm(v)
                q = max(lo, k - 1)
                blk = h[k : k + 3, q : hi + 1]
                blk -= 2.0 * np.outer(v, v @ blk)
                r = min(k + 3, hi)
                blk = h[lo : r + 1, k : k + 3]
                blk -= 2.0 * np.outer(blk @ v, v)
            x = h[k + 1, k]
            y = h[k + 2, k]
            if k < hi - 2:
                z = h[k + 3, k]
        v = np.array([x, y])
        nv = np.linalg.norm(v)
        if nv != 0:
            v[0] += np.copysign(nv, v[0])
            v /= np.linalg.norm(v)
            blk = h[hi - 1 : hi + 1, hi - 2 : hi + 1]
            blk -= 2.0 * np.outer(v, v @ blk)
            blk = h[lo : hi + 1, hi - 1 : hi + 1]
            blk -= 2.0 * np.outer(blk @ v, v)
    return eigs


def _wilkinson(a, b, c, d):
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4 - det)
    l1, l2 = tr / 2 + disc, tr / 2 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def _complex_qr(h, maxit):
    """Eigenvalues of a complex upper Hessenberg matrix (destroys ``h``)."""
    n = h.shape[0]
    eigs = []
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(h[0, 0]))
            break
        lo = hi
        while lo > 0 and not _negligible(h, lo):
            lo -= 1
        if lo > 0:
            h[lo, lo - 1] = 0
        if lo == hi:
            eigs.append(complex(h[hi, hi]))
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > maxit:
            raise ConvergenceError(f"QR iteration did not converge in {maxit} sweeps")
        if its % 11 == 10:
            mu = h[hi, hi] + abs(h[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        # implicit single-shift sweep by Givens rotations (bulge chase)
        x, y = h[lo, lo] - mu, h[lo + 1, lo]
        for k in range(lo, hi):
            r = np.hypot(abs(x), abs(y))
            if r == 0:
                c, s = 1.0, 0j
            else:
                c = abs(x) / r
                phase = x / abs(x) if x != 0 else 1.0
                s = phase * np.conj(y) / r
                c = c + 0j
            g = np.array([[np.conj(c), s], [-np.conj(s), c]])
            q = max(lo, k - 1)
            h[k : k + 2, q : hi + 1] = g @ h[k : k + 2, q : hi + 1]
            r_ = min(k + 2, hi)
            h[lo : r_ + 1, k : k + 2] = h[lo : r_ + 1, k : k + 2] @ g.conj().T
            if k < hi - 1:
                x, y = h[k + 1, k], h[k + 2, k]
    return eigs


def _inverse_iteration(h, lam, rng_state, steps=3):
    n = h.shape[0]
    scale = max(np.abs(h).max(), 1.0)
    shift = lam + 1e3 * _EPS * scale * (1 + 0.5j)
    m = h - shift * np.eye(n)
    x = np.ones(n, dtype=complex) + 0.1j * rng_state
    for _ in range(steps):
        x = np.linalg.solve(m, x)
        x /= np.linalg.norm(x)
    return x


def eigen(a, vectors=False, cap=DENSE_CAP, maxit=None):
    """Eigenvalues (and optionally unit-norm eigenvectors) of a square matrix.

    Returns ``vals`` or ``(vals, V)`` with ``A V[:, i] ~ vals[i] V[:, i]``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > cap:
        raise DenseCapExceeded(f"order {n} exceeds dense cap {cap}")
    if n == 0:
        return (np.zeros(0, complex), np.zeros((0, 0), complex)) if vectors else np.zeros(0, complex)
    maxit = 100 * n if maxit is None else maxit
    real = not np.iscomplexobj(a) or not np.any(np.imag(a))
    work = np.real(a).astype(float) if real else a.astype(complex)
    h, q = hessenberg(work)
    hh = h.copy()
    vals = np.asarray(_francis_real(hh, maxit) if real else _complex_qr(hh, maxit), dtype=complex)
    if not vectors:
        return vals
    vecs = np.empty((n, n), dtype=complex)
    jitter = np.linspace(0.0, 1.0, n)
    done = {}
    for i, lam in enumerate(vals):
        if real and lam.imag < 0 and complex(lam.real, -lam.imag) in done:
            vecs[:, i] = vecs[:, done[complex(lam.real, -lam.imag)]].conj()
            continue
        y = _inverse_iteration(h, lam, jitter)
        x = q @ y
        x /= np.linalg.norm(x)
        vecs[:, i] = x
        done[complex(lam)] = i
    return vals, vecs


def match_eigenvalues(a, b):
    """Greedy nearest matching of two multisets.

    Returns the largest scaled distance ``|a_i - b_j| / max(1, |b_j|)`` among
    matched pairs, or ``inf`` when sizes differ.  Pairs are taken closest
    first, so the result does not depend on input order.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    d = np.abs(a[:, None] - b[None, :]) / np.maximum(1.0, np.abs(b))[None, :]
    worst = 0.0
    free_a = np.ones(a.size, bool)
    free_b = np.ones(b.size, bool)
    for _ in range(a.size):
        masked = np.where(free_a[:, None] & free_b[None, :], d, np.inf)
        i, j = np.unravel_index(np.argmin(masked), masked.shape)
        worst = max(worst, masked[i, j])
        free_a[i] = False
        free_b[j] = False
    return float(worst)


def same_multiset(a, b, rtol=1e-8):
    return match_eigenvalues(a, b) <= rtol


def _ritz_key(z):
    return (-abs(z), -z.real, -z.imag)


def ritz_decompose(G, H, rcond=1e-13):
    """Eigen-decomposition of ``B = G^-1 H``, Ritz values by decreasing modulus.

    Ties are broken by decreasing real part, then decreasing imaginary part.
    """
    G = np.asarray(G, dtype=complex)
    H = np.asarray(H, dtype=complex)
    gh = 0.5 * (G + G.conj().T)
    w = np.linalg.eigvalsh(gh)
    if w.size and (w[0] <= rcond * max(w[-1], np.finfo(float).tiny)):
        raise RankDeficientBasis(f"Gram matrix is numerically singular (min/max = {w[0] / w[-1]:.2e})")
    B = np.linalg.solve(G, H)
    vals, vecs = eigen(B, vectors=True)
    order = sorted(range(vals.size), key=lambda i: _ritz_key(vals[i]))
    return vals[order], vecs[:, order]
