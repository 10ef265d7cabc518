"""Shift-invert searches with the inverse Cayley transform, and a subspace baseline.

``algorithm_one`` preconditions a few vectors with ``C_sigma`` and then runs
one shift-invert trajectory with ``(C_sigma^-1 - mu I)^-1`` per initial shift,
updating the shift every ``t`` iterations.  ``algorithm_two`` does the same
but, after the first trajectory, multiplies by ``(C_sigma^-1 - xi I)`` to
inhibit the eigenvalue ``xi`` found last.  ``subspace_iteration`` is the
lopsided simultaneous iteration with Rayleigh-Ritz acceleration used as a
reference method.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dense_eig import ritz_decompose
from .errors import DegenerateShift, RankDeficientBasis, SingularShift
from .mobius import DEGENERATE_TOL, CayleyOperator, FactorizationCache, recover_lambda

log = logging.getLogger(__name__)

SINGULAR_NUDGE = 1e-8 * (1 + 1j)

RUNNING = "running"
CONVERGED = "converged"
STAGNATED = "stagnated"
DEGENERATE = "degenerate"
SINGULAR = "singular"


@dataclass(frozen=True)
class IterationConfig:
    r: int = 4
    s: int = 6
    p: int = 0
    t: int = 4
    eps: float = 1.0
    tol: float = 1e-4
    max_iter: int = 200
    dedupe_tol: float = 1e-6
    shifts: tuple | None = None
    shift_scheme: str = "endpoint"
    random_vectors: bool = False
    conjugate_pairs: bool = True
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.r < 1 or self.s < 1 or self.p < 0 or self.t < 1:
            raise ValueError("need r >= 1, s >= 1, p >= 0, t >= 1")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class Trajectory:
    index: int
    mu: complex
    w: np.ndarray
    alpha: np.ndarray | None = None
    j: int = 0
    shifts_used: list = field(default_factory=list)
    retries: int = 0
    status: str = RUNNING


@dataclass
class ConvergenceRecord:
    lam: complex
    mu: complex
    sigma: complex | None
    iterations: int
    lu_count: int
    residual_order: int
    shift_index: int
    status: str = CONVERGED
    xi: complex | None = None
    shift: complex | None = None
    vector: np.ndarray | None = field(default=None, repr=False)
    conjugate_of: int | None = None

    @property
    def converged(self):
        return self.status == CONVERGED

    def to_dict(self):
        d = asdict(self)
        for key in ("lam", "mu", "sigma", "xi", "shift"):
            z = d[key]
            d[key] = None if z is None else [float(complex(z).real), float(complex(z).imag)]
        v = d.pop("vector")
        d["vector"] = None if v is None else [[float(z.real), float(z.imag)] for z in np.asarray(v, complex)]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("lam", "mu", "sigma", "xi", "shift"):
            z = d.get(key)
            d[key] = None if z is None else complex(z[0], z[1])
        v = d.get("vector")
        d["vector"] = None if v is None else np.asarray([complex(a, b) for a, b in v], dtype=complex)
        return cls(**d)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def fourier_vectors(n, r):
    """Columns ``k = 1..r`` of the Fourier matrix ``F(j, k) = exp(2 pi i j k / n)``."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    j = np.arange(1, n + 1)[:, None]
    k = np.arange(1, r + 1)[None, :]
    # reduce j*k mod n before scaling to keep full periods exact
    return np.exp(2j * np.pi * ((j * k) % n) / n)


def initial_shifts(cfg):
    """Initial shifts on the upper half of the circle of radius ``eps``.

    ``"endpoint"``: ``-eps * exp(-i k pi / s)``, ``k = 0..s-1`` (angles from
    ``pi`` down to ``pi / s``; ``k = s`` would give the singular shift 1).
    ``"odd"``: ``eps * exp(i (2k+1) pi / (2s))``, which avoids both ``+eps``
    and ``-eps``.
    """
    if cfg.shifts is not None:
        return [complex(z) for z in cfg.shifts]
    k = np.arange(cfg.s)
    if cfg.shift_scheme == "endpoint":
        z = -cfg.eps * np.exp(-1j * k * np.pi / cfg.s)
    elif cfg.shift_scheme == "odd":
        z = cfg.eps * np.exp(1j * (2 * k + 1) * np.pi / (2 * cfg.s))
    else:
        raise ValueError(f"unknown shift scheme {cfg.shift_scheme!r}")
    return [complex(v) for v in z]


def normalize_max(u):
    """Divide each column by its coordinate of largest modulus (first on ties)."""
    u = np.asarray(u)
    idx = np.argmax(np.abs(u), axis=0)
    alpha = u[idx, np.arange(u.shape[1])] if u.ndim == 2 else u[idx]
    return u / alpha, alpha


def state_vectors(pencil, r, random=False, seed=0):
    """Fourier (or seeded random) columns placed on the state coordinates."""
    if random:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((pencil.n, r)) + 1j * rng.standard_normal((pencil.n, r))
    else:
        x = fourier_vectors(pencil.n, r)
    return pencil.embed_state(x.astype(complex))


def precondition(op, vectors, p):
    """Multiply ``p`` times by ``C_sigma``, projecting and normalizing after each."""
    pencil = op.pencil
    v, _ = normalize_max(pencil.project_state_space(np.asarray(vectors, dtype=complex)))
    for _ in range(p):
        v = pencil.project_state_space(op.apply_C(v))
        v, _ = normalize_max(v)
    return v


def residual_order(op, mu, x):
    """``floor(log10 ||(C^-1 - mu I) x||_2)`` for ``||x||_2 = 1``."""
    x = np.asarray(x, dtype=complex)
    x = x / np.linalg.norm(x)
    res = np.linalg.norm(op.apply_C_inv(x) - complex(mu) * x)
    return math.floor(math.log10(max(res, 1e-300)))


def conjugate_companions(op, records, rtol=1e-6):
    """Conjugate partners of converged complex eigenpairs.

    Valid only for a real pencil and real ``sigma``: then ``(conj mu, conj x)``
    is an eigenpair of ``C_sigma^-1`` whenever ``(mu, x)`` is.  The residual
    of each partner is recomputed, not copied.  Partners already present
    among ``records`` are skipped.
    """
    if op.sigma.imag != 0 or np.iscomplexobj(op.pencil.J.values):
        return []
    found = [r.lam for r in records if r.converged]
    out = []
    for rec in records:
        if not rec.converged or rec.vector is None:
            continue
        lam = rec.lam.conjugate()
        if abs(rec.lam.imag) <= rtol * (1 + abs(rec.lam)):
            continue
        if any(abs(lam - f) <= rtol * (1 + abs(f)) for f in found):
            continue
        x = rec.vector.conj()
        mu = rec.mu.conjugate()
        out.append(
            ConvergenceRecord(
                lam=lam,
                mu=mu,
                sigma=rec.sigma,
                iterations=0,
                lu_count=0,
                residual_order=residual_order(op, mu, x),
                shift_index=rec.shift_index,
                shift=None,
                vector=x,
                conjugate_of=rec.shift_index,
            )
        )
        found.append(lam)
    return out


def dedupe(records, rtol=1e-6):
    """Distinct converged eigenvalues, first occurrence kept."""
    out = []
    for rec in records:
        if not rec.converged:
            continue
        if all(abs(rec.lam - o.lam) > rtol * (1 + abs(o.lam)) for o in out):
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Shift-invert searches with shift updates
# ---------------------------------------------------------------------------


def _step(op, traj, xi, v_in):
    """One (possibly deflated) shift-invert application with singular retry."""
    pencil = op.pencil
    while True:
        try:
            if xi is None:
                u = op.shift_invert_C_inv(traj.mu, v_in)
            else:
                u = op.apply_deflated(traj.mu, xi, v_in)
            return pencil.project_state_space(u)
        except SingularShift:
            if traj.retries:
                raise
            log.debug("trajectory %d: singular shift %s, nudging", traj.index, traj.mu)
            traj.retries += 1
            traj.mu += SINGULAR_NUDGE
            traj.shifts_used.append(traj.mu)


def _update(mu, alpha_q, xi):
    if xi is None:
        return mu + 1.0 / alpha_q
    if abs(alpha_q - 1) < 1e-12:
        return None
    return (mu * alpha_q - xi) / (alpha_q - 1)


def run_trajectory(op, v0, mu0, cfg, index=0, xi=None):
    """Iterate one initial shift to convergence (or failure).

    Returns a :class:`ConvergenceRecord` whose ``status`` tells how the
    trajectory ended.
    """
    traj = Trajectory(index=index, mu=complex(mu0), w=np.array(v0, dtype=complex, copy=True))
    traj.shifts_used.append(traj.mu)
    q = 0
    try:
        while traj.j < cfg.max_iter:
            traj.j += 1
            u = _step(op, traj, xi, traj.w)
            w_new, alpha = normalize_max(u)
            diffs = np.max(np.abs(w_new - traj.w), axis=0)
            q = int(np.argmin(diffs))
            traj.w, traj.alpha = w_new, alpha
            converged = diffs[q] < cfg.tol
            if converged or traj.j % cfg.t == 0:
                new_mu = _update(traj.mu, alpha[q], xi)
                if new_mu is None:
                    traj.status = STAGNATED
                    break
                if abs(new_mu - 1) < DEGENERATE_TOL:
                    traj.status = DEGENERATE
                    break
                traj.mu = complex(new_mu)
                if converged:
                    traj.status = CONVERGED
                    break
                traj.shifts_used.append(traj.mu)
        else:
            traj.status = STAGNATED
    except DegenerateShift:
        traj.status = DEGENERATE
    except SingularShift:
        traj.status = SINGULAR

    x = traj.w[:, q]
    lam = recover_lambda(traj.mu, op.sigma) if traj.mu != 1 else complex("nan")
    try:
        order = residual_order(op, traj.mu, x)
    except SingularShift:
        order = 0
    return ConvergenceRecord(
        lam=complex(lam),
        mu=traj.mu,
        sigma=op.sigma,
        iterations=traj.j,
        lu_count=len(set(traj.shifts_used)),
        residual_order=order,
        shift_index=index,
        status=traj.status,
        xi=xi,
        shift=complex(mu0),
        vector=x / np.linalg.norm(x),
    )


def _setup(pencil, sigma, cfg, initial_vectors, cache):
    pencil.check_j4()
    op = CayleyOperator(pencil, sigma, cache=cache)
    if initial_vectors is None:
        v = state_vectors(pencil, cfg.r, random=cfg.random_vectors, seed=cfg.seed)
    else:
        v = np.asarray(initial_vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
    v = precondition(op, v, cfg.p)
    return op, v


def algorithm_one(pencil, sigma, cfg=IterationConfig(), initial_vectors=None, cache=None):
    """Preconditioned shift-invert search, one trajectory per initial shift.

    Trajectories are independent; with ``cfg.threads > 1`` they run in a
    thread pool and are merged by shift index.
    """
    op, v = _setup(pencil, sigma, cfg, initial_vectors, cache)
    shifts = initial_shifts(cfg)
    jobs = list(enumerate(shifts))
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(lambda job: run_trajectory(op, v, job[1], cfg, job[0]), jobs))
    else:
        records = [run_trajectory(op, v, mu0, cfg, k) for k, mu0 in jobs]
    if cfg.conjugate_pairs:
        records += conjugate_companions(op, records, cfg.dedupe_tol)
    return records


def algorithm_two(pencil, sigma, cfg=IterationConfig(), initial_vectors=None, cache=None):
    """Like :func:`algorithm_one`, with Moebius inhibition of the eigenvalue found last.

    The first trajectory is plain; each later one uses ``xi`` = the ``mu`` of
    the most recent converged record (plain again while none has converged).
    """
    op, v = _setup(pencil, sigma, cfg, initial_vectors, cache)
    records = []
    xi = None
    for k, mu0 in enumerate(initial_shifts(cfg)):
        rec = run_trajectory(op, v, mu0, cfg, k, xi=xi)
        records.append(rec)
        if rec.converged:
            xi = rec.mu
    if cfg.conjugate_pairs:
        records += conjugate_companions(op, records, cfg.dedupe_tol)
    return records


# ---------------------------------------------------------------------------
# subspace iteration baseline
# ---------------------------------------------------------------------------


def _drop_dependent(z, frozen_q):
    """Index of the first column numerically dependent on frozen and earlier columns."""
    basis = list(frozen_q.T)
    for i, col in enumerate(z.T):
        c = col.copy()
        for b in basis:
            c -= (b.conj() @ c) * b
        nrm = np.linalg.norm(c)
        if nrm <= 1e-8 * np.linalg.norm(col):
            return i
        basis.append(c / nrm)
    return z.shape[1] - 1


class _Deflation:
    """Orthonormal basis of the frozen (converged) vectors and ``Q^H A Q``."""

    def __init__(self, order, apply):
        self.apply = apply
        self.q = np.zeros((order, 0), dtype=complex)
        self.aq = np.zeros((order, 0), dtype=complex)

    def project(self, x):
        if self.q.shape[1] == 0:
            return x
        return x - self.q @ (self.q.conj().T @ x)

    def eigenvector(self, s, theta):
        """Lift a Schur vector ``s`` (orthogonal to the frozen space) to an eigenvector."""
        if self.q.shape[1] == 0:
            return s
        a11 = self.q.conj().T @ self.aq
        c = self.q.conj().T @ self.apply(s)
        d = np.linalg.solve(a11 - theta * np.eye(a11.shape[0]), -c)
        return s + self.q @ d

    def freeze(self, x):
        for col in x.T:
            c = self.project(col[:, None])[:, 0]
            c = c - self.q @ (self.q.conj().T @ c)
            nrm = np.linalg.norm(c)
            if nrm == 0:
                continue
            c = c / nrm
            self.q = np.hstack([self.q, c[:, None]])
            self.aq = np.hstack([self.aq, self.apply(c)[:, None]])


def subspace_iteration(pencil, a, block=8, ritz_period=4, tol=1e-5, max_cycles=100, cache=None):
    """Shift-invert simultaneous iteration with Rayleigh-Ritz every ``ritz_period`` steps.

    Iterates ``X = LZ`` under ``X -> L (J - aL)^-1 X``, whose eigenvalues are
    ``theta = 1 / (lambda - a)``.  A column has converged when its
    max-normalized Ritz vector and the next iterate differ by less than
    ``tol`` in the sup norm (both taken orthogonal to the frozen columns).
    Converged columns are frozen and the rest are orthogonalized against
    them at each Ritz step.  Records carry ``lam = a + 1/theta`` and keep
    ``theta`` in ``mu``.
    """
    pencil.check_j4()
    a = complex(a)
    if not 1 <= block <= pencil.n:
        raise ValueError(f"block must lie in 1..{pencil.n}")
    cache = cache if cache is not None else FactorizationCache(pencil)
    cache.get(a)

    def apply(x):
        return pencil.project_state_space(pencil.apply_L(cache.solve(a, x)))

    defl = _Deflation(pencil.order, apply)
    x, _ = normalize_max(state_vectors(pencil, block))
    theta = None
    records = []
    for cycle in range(1, max_cycles + 1):
        y = x
        for step in range(ritz_period):
            y, _ = normalize_max(apply(y))
            if step == 0 and theta is not None:
                xs, _ = normalize_max(defl.project(x))
                ys, _ = normalize_max(defl.project(y))
                done = np.max(np.abs(ys - xs), axis=0) < tol
                if np.any(done):
                    for i in np.flatnonzero(done):
                        s_i = defl.project(x[:, i])
                        v = defl.eigenvector(s_i / np.linalg.norm(s_i), theta[i])
                        records.append(_subspace_record(apply, a, theta[i], v, cycle - 1))
                    defl.freeze(x[:, done])
                    x, y, theta = x[:, ~done], y[:, ~done], theta[~done]
                    if x.shape[1] == 0:
                        return records
        z = defl.project(y)
        w = apply(z)
        while True:
            try:
                theta, vecs = ritz_decompose(z.conj().T @ z, z.conj().T @ w)
                break
            except RankDeficientBasis:
                drop = _drop_dependent(z, defl.q)
                z, w = np.delete(z, drop, axis=1), np.delete(w, drop, axis=1)
                if z.shape[1] == 0:
                    return records
        x, _ = normalize_max(w @ vecs)
    return records


def _subspace_record(apply, a, theta, v, cycle):
    v = v / np.linalg.norm(v)
    res = np.linalg.norm(apply(v) - theta * v)
    return ConvergenceRecord(
        lam=complex(a + 1.0 / theta),
        mu=complex(theta),
        sigma=None,
        iterations=cycle,
        lu_count=1,
        residual_order=math.floor(math.log10(max(res, 1e-300))),
        shift_index=0,
        shift=a,
        vector=v,
    )


__all__ = [
    "CONVERGED",
    "ConvergenceRecord",
    "IterationConfig",
    "Trajectory",
    "algorithm_one",
    "algorithm_two",
    "dedupe",
    "fourier_vectors",
    "initial_shifts",
    "normalize_max",
    "precondition",
    "recover_lambda",
    "residual_order",
    "run_trajectory",
    "state_vectors",
    "subspace_iteration",
]
