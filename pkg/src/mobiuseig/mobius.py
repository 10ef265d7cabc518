"""Moebius maps on scalars and their extensions to the pencil ``(J, L)``.

Every operator below costs exactly one solve with a cached factorization of
``J - aL`` for a suitable scalar ``a``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShift, SingularShift
from .sparse_core import factorize

DEGENERATE_TOL = 1e-12


class _Infinity:
    """The point at infinity of the extended complex plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_infinite(z):
    return z is INF


@dataclass(frozen=True)
class MobiusParams:
    """Parameters of ``s -> k (s + conj(beta)) / (s - alpha)``."""

    k: complex = 1.0
    alpha: complex = 1.0
    beta: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.k == 0:
            raise ValueError("k must be nonzero")
        if self.alpha + self.beta.conjugate() == 0:
            raise ValueError("alpha + conj(beta) must be nonzero")

    @classmethod
    def cayley(cls, sigma):
        return cls(1.0, sigma, sigma)

    @property
    def gain(self):
        """``alpha + conj(beta)``."""
        return self.alpha + self.beta.conjugate()


def mobius_map(p, s):
    if s is INF:
        return p.k
    s = complex(s)
    if s == p.alpha:
        return INF
    return p.k * (s + p.beta.conjugate()) / (s - p.alpha)


def mobius_inverse_map(p, mu):
    """Return the ``s`` with ``mobius_map(p, s) == mu``."""
    if mu is INF:
        return p.alpha
    mu = complex(mu)
    if mu == p.k:
        return INF
    return (p.k * p.beta.conjugate() + mu * p.alpha) / (mu - p.k)


def cayley_map(sigma, s):
    return mobius_map(MobiusParams.cayley(sigma), s)


def optimal_sigma(lam):
    """Real ``sigma`` maximizing ``|c_sigma(lam)|``, namely ``|lam|``."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("optimal sigma is undefined for lambda = 0")
    return abs(lam)


class FactorizationCache:
    """Append-only map from a complex shift ``a`` to the LU of ``J - aL``.

    Concurrent misses on the same shift may factorize twice; the first
    stored result wins and both are identical.
    """

    def __init__(self, pencil, ordering=None):
        self.pencil = pencil
        self.ordering = ordering
        self._store = {}
        self._lock = threading.Lock()
        self.misses = 0
        self.solves = 0

    def __len__(self):
        return len(self._store)

    def __contains__(self, a):
        return complex(a) in self._store

    def get(self, a):
        a = complex(a)
        fact = self._store.get(a)
        if fact is not None:
            return fact
        fact = factorize(self.pencil.assemble_shifted(a), shift=a, ordering=self.ordering)
        with self._lock:
            self.misses += 1
            return self._store.setdefault(a, fact)

    def solve(self, a, b):
        x = self.get(a).solve(b)
        with self._lock:
            self.solves += 1 if np.ndim(b) == 1 else np.shape(b)[1]
        return x

    def shifts(self):
        return list(self._store)


class MobiusOperator:
    """``C = k (J + conj(beta) L)(J - alpha L)^-1`` and its twin ``D`` on a pencil."""

    def __init__(self, pencil, params, cache=None):
        self.pencil = pencil
        self.params = params
        self.cache = cache if cache is not None else FactorizationCache(pencil)

    def apply_C(self, v):
        p = self.params
        w = self.cache.solve(p.alpha, v)
        return p.k * v + p.k * p.gain * self.pencil.apply_L(w)

    def apply_D(self, v):
        p = self.params
        w = self.cache.solve(p.alpha, self.pencil.apply_L(v))
        return p.k * v + p.k * p.gain * w


class CayleyOperator(MobiusOperator):
    """``C_sigma = (J + conj(sigma) L)(J - sigma L)^-1`` with ``Re sigma > 0``."""

    def __init__(self, pencil, sigma, cache=None):
        sigma = complex(sigma)
        if not sigma.real > 0:
            raise ValueError(f"sigma must have positive real part, got {sigma}")
        super().__init__(pencil, MobiusParams.cayley(sigma), cache)
        self.sigma = sigma

    @property
    def two_re_sigma(self):
        return 2.0 * self.sigma.real

    def apply_C_inv(self, v):
        """``C^-1 v = v - 2 Re(sigma) L (J + conj(sigma) L)^-1 v``."""
        w = self.cache.solve(-self.sigma.conjugate(), v)
        return v - self.two_re_sigma * self.pencil.apply_L(w)

    def _check_mu(self, mu):
        mu = complex(mu)
        if abs(mu - 1) < DEGENERATE_TOL:
            raise DegenerateShift(f"shift {mu} coincides with the spurious eigenvalue 1")
        return mu

    def inner_shift_C(self, mu):
        s = self.sigma
        return (s.conjugate() + mu * s) / (mu - 1)

    def inner_shift_C_inv(self, mu):
        s = self.sigma
        return -(s + mu * s.conjugate()) / (mu - 1)

    def shift_invert_C(self, mu, v):
        """``(C - mu I)^-1 v``."""
        mu = self._check_mu(mu)
        w = self.cache.solve(self.inner_shift_C(mu), v)
        return (v + (self.two_re_sigma / (mu - 1)) * self.pencil.apply_L(w)) / (1 - mu)

    def shift_invert_C_inv(self, mu, v):
        """``(C^-1 - mu I)^-1 v``."""
        mu = self._check_mu(mu)
        w = self.cache.solve(self.inner_shift_C_inv(mu), v)
        return (v - (self.two_re_sigma / (mu - 1)) * self.pencil.apply_L(w)) / (1 - mu)

    def apply_deflated(self, mu, xi, v):
        """``(C^-1 - xi I)(C^-1 - mu I)^-1 v`` through a single solve."""
        return v + (complex(mu) - complex(xi)) * self.shift_invert_C_inv(mu, v)

    def factorize_inner(self, mu, inverse=True):
        """Force the factorization used by a shift-invert step; raises SingularShift."""
        mu = self._check_mu(mu)
        a = self.inner_shift_C_inv(mu) if inverse else self.inner_shift_C(mu)
        return self.cache.get(a)


def recover_lambda(mu, sigma):
    """Pencil eigenvalue whose image under ``C_sigma^-1`` is ``mu``."""
    mu = complex(mu)
    sigma = complex(sigma)
    if mu == 1:
        return INF
    return (mu * sigma.conjugate() + sigma) / (1 - mu)


def inverse_cayley_image(lam, sigma):
    """``1 / c_sigma(lam)``, the eigenvalue of ``C_sigma^-1`` belonging to ``lam``."""
    if lam is INF:
        return 1 + 0j
    lam = complex(lam)
    sigma = complex(sigma)
    den = lam + sigma.conjugate()
    if den == 0:
        return INF
    return (lam - sigma) / den


# -- dense mirrors (oracle use only) ---------------------------------------


def explicit_C(pencil, params):
    J = pencil.J.toarray().astype(complex)
    L = np.diag(pencil.l_diag).astype(complex)
    p = params
    return p.k * (J + p.beta.conjugate() * L) @ np.linalg.inv(J - p.alpha * L)


def explicit_D(pencil, params):
    J = pencil.J.toarray().astype(complex)
    L = np.diag(pencil.l_diag).astype(complex)
    p = params
    return p.k * np.linalg.inv(J - p.alpha * L) @ (J + p.beta.conjugate() * L)


__all__ = [
    "INF",
    "CayleyOperator",
    "DegenerateShift",
    "FactorizationCache",
    "MobiusOperator",
    "MobiusParams",
    "SingularShift",
    "cayley_map",
    "explicit_C",
    "explicit_D",
    "inverse_cayley_image",
    "is_infinite",
    "mobius_inverse_map",
    "mobius_map",
    "optimal_sigma",
    "recover_lambda",
]
