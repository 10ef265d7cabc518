"""Synthetic pencils with a planted, exactly known finite spectrum.

The state matrix is built as ``S K S^-1`` with ``K`` block diagonal (one
2x2 rotation-scaling block per conjugate pair, 1x1 blocks for real values)
and ``S`` a product of sparse elementary transforms.  The algebraic
coupling is then folded back into ``J1`` so that the Schur complement
``J1 - J2 J4^-1 J3`` reproduces ``S K S^-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pencil import Pencil, write_l_diag
from .sparse_core import SparseMatrix, write_matrix_market

REFERENCE_UNSTABLE = (0.1814 + 4.8323j, 0.0233 + 0j, 0.0004 + 0j)
DEFAULT_DENSITY = 0.08


@dataclass(frozen=True)
class PlantSpec:
    planted_eigenvalues: tuple = REFERENCE_UNSTABLE
    n_states: int = 60
    m_algebraic: int = 40
    density: float | None = 0.08
    seed: int = 0
    left_halfplane_fill: tuple = (-3.0, -0.3)
    imag_range: tuple = (0.5, 15.0)
    n_large_negative: int = 3
    large_negative_range: tuple = (-250.0, -80.0)
    n_similarity: int | None = None

    def __post_init__(self):
        if self.n_states < 1 or self.m_algebraic < 0:
            raise ValueError("need n_states >= 1 and m_algebraic >= 0")
        if self.density is not None and not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        lo, hi = self.left_halfplane_fill
        if not lo < hi < 0:
            raise ValueError("filler real parts must lie in a range below zero")
        if len(complete_conjugates(self.planted_eigenvalues)) > self.n_states:
            raise ValueError("more planted eigenvalues than state variables")


def complete_conjugates(values):
    """Append missing conjugates, keeping first-seen order."""
    out = []
    for z in values:
        z = complex(z)
        if z not in out:
            out.append(z)
        if z.imag != 0 and z.conjugate() not in out:
            out.append(z.conjugate())
    return out


def _filler(spec, count, rng):
    vals = []
    n_big = min(spec.n_large_negative, count)
    vals += [complex(v) for v in rng.uniform(*spec.large_negative_range, size=n_big)]
    left = count - n_big
    while left >= 2:
        re = rng.uniform(*spec.left_halfplane_fill)
        im = rng.uniform(*spec.imag_range)
        vals += [complex(re, im), complex(re, -im)]
        left -= 2
    if left:
        vals.append(complex(rng.uniform(*spec.left_halfplane_fill)))
    return vals


def _block_core(spectrum):
    n = len(spectrum)
    k = np.zeros((n, n))
    i = 0
    while i < n:
        z = spectrum[i]
        if z.imag == 0:
            k[i, i] = z.real
            i += 1
        else:
            a, b = z.real, abs(z.imag)
            k[i : i + 2, i : i + 2] = [[a, b], [-b, a]]
            i += 2
    return k


def _order_pairs(values):
    """Place each conjugate pair consecutively (positive imaginary part first)."""
    out = []
    for z in values:
        if z.imag > 0:
            out += [z, z.conjugate()]
        elif z.imag == 0:
            out.append(z)
    return out


def _sparse_random(rows, cols, count, rng, scale=1.0):
    out = np.zeros((rows, cols))
    if rows == 0 or cols == 0 or count <= 0:
        return out
    count = min(count, rows * cols)
    flat = rng.choice(rows * cols, size=count, replace=False)
    out.flat[flat] = rng.uniform(-scale, scale, size=count)
    return out


def planted_pencil(spec):
    """Build ``(pencil, true_spectrum)`` from a :class:`PlantSpec`.

    ``density=None`` means the default density, raised to the smallest
    feasible value when the pencil is too small for it.
    """
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n_states, spec.m_algebraic
    N = n + m
    planted = complete_conjugates(spec.planted_eigenvalues)
    spectrum = _order_pairs(planted + _filler(spec, n - len(planted), rng))

    core = _block_core(spectrum)
    n_sim = n // 2 if spec.n_similarity is None else spec.n_similarity
    for _ in range(n_sim):
        if n < 2:
            break
        i, j = rng.choice(n, size=2, replace=False)
        c = rng.uniform(-0.5, 0.5)
        core[i, :] += c * core[j, :]
        core[:, j] -= c * core[:, i]

    mandatory = int(np.count_nonzero(core)) + m
    if spec.density is None:
        budget = max(int(round(DEFAULT_DENSITY * N * N)), mandatory)
    else:
        budget = int(round(spec.density * N * N))
    if budget < mandatory:
        raise ValueError(
            f"density {spec.density} allows {budget} nonzeros but the planted core "
            f"and J4 diagonal already need {mandatory}"
        )
    spare = budget - mandatory
    n_j2 = n_j3 = (2 * spare) // 5 if m else 0
    n_j4 = spare - n_j2 - n_j3 if m else 0
    J2 = _sparse_random(n, m, n_j2, rng)
    J3 = _sparse_random(m, n, n_j3, rng)
    J4 = _sparse_random(m, m, min(n_j4, m * (m - 1)), rng, scale=0.5)
    np.fill_diagonal(J4, 0.0)
    if m:
        dom = np.abs(J4).sum(axis=1) + rng.uniform(1.0, 3.0, size=m)
        J4[np.diag_indices(m)] = dom * rng.choice([-1.0, 1.0], size=m)
        J1 = core + J2 @ np.linalg.solve(J4, J3)
    else:
        J1 = core

    perm = rng.permutation(N)
    state_pos, alg_pos = perm[:n], perm[n:]
    full = np.zeros((N, N))
    full[np.ix_(state_pos, state_pos)] = J1
    full[np.ix_(state_pos, alg_pos)] = J2
    full[np.ix_(alg_pos, state_pos)] = J3
    full[np.ix_(alg_pos, alg_pos)] = J4
    # sorted state_indices permute the core symmetrically: spectrum unchanged
    l_diag = np.zeros(N)
    l_diag[state_pos] = 1.0
    pencil = Pencil(SparseMatrix.from_dense(full), l_diag)
    return pencil, np.asarray(spectrum, dtype=complex)


def write_spectrum(spectrum, path):
    data = [[float(z.real), float(z.imag)] for z in np.asarray(spectrum, dtype=complex)]
    Path(path).write_text(json.dumps(data) + "\n")


def read_spectrum(path):
    data = json.loads(Path(path).read_text())
    return np.asarray([complex(re, im) for re, im in data], dtype=complex)


def write_case(pencil, spectrum, prefix):
    """Write ``<prefix>J.mtx``, ``<prefix>L.txt`` and ``<prefix>spectrum.json``."""
    prefix = str(prefix)
    paths = (Path(prefix + "J.mtx"), Path(prefix + "L.txt"), Path(prefix + "spectrum.json"))
    write_matrix_market(pencil.J, paths[0])
    write_l_diag(pencil.l_diag, paths[1])
    write_spectrum(spectrum, paths[2])
    return paths
