"""Spectrum reports: the records of one solver run, as JSON and CSV.

JSON floats are written with Python's shortest round-trip representation,
so reading a report back gives bit-identical numbers.  The CSV keeps one
row per record in the column layout ``converged_value_re,
converged_value_im, iter, lu, residual_order``, followed by a ``status``
column so that failed trajectories are not mistaken for eigenvalues.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigensolvers import ConvergenceRecord, residual_order
from .mobius import INF, CayleyOperator, FactorizationCache, inverse_cayley_image

CSV_COLUMNS = ("converged_value_re", "converged_value_im", "iter", "lu", "residual_order", "status")
FORMAT_VERSION = 1


def _pair(z):
    return None if z is None else [float(complex(z).real), float(complex(z).imag)]


def _unpair(v):
    return None if v is None else complex(v[0], v[1])


@dataclass
class SpectrumReport:
    """Records of a single run plus the parameters needed to re-check them.

    ``sigma`` is set for the Cayley-based algorithms and ``shift_a`` for
    the subspace iteration.
    """

    algorithm: str
    records: list
    sigma: complex | None = None
    shift_a: complex | None = None
    params: dict = field(default_factory=dict)

    @property
    def converged(self):
        return [r for r in self.records if r.converged]

    def to_dict(self):
        return {
            "format": FORMAT_VERSION,
            "algorithm": self.algorithm,
            "sigma": _pair(self.sigma),
            "shift_a": _pair(self.shift_a),
            "params": dict(self.params),
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            algorithm=d["algorithm"],
            records=[ConvergenceRecord.from_dict(r) for r in d["records"]],
            sigma=_unpair(d.get("sigma")),
            shift_a=_unpair(d.get("shift_a")),
            params=dict(d.get("params", {})),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, allow_nan=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def write_json(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def read_json(cls, path):
        return cls.from_json(Path(path).read_text())

    def csv_rows(self):
        rows = []
        for r in self.records:
            lam = complex(r.lam)
            rows.append(
                [
                    _fmt(lam.real),
                    _fmt(lam.imag),
                    str(r.iterations),
                    str(r.lu_count),
                    str(r.residual_order),
                    r.status,
                ]
            )
        return rows

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        return buf.getvalue()

    def write_csv(self, path):
        Path(path).write_text(self.to_csv())


def _fmt(x):
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


@dataclass(frozen=True)
class CheckResult:
    index: int
    lam: complex
    reported_order: int
    recomputed_order: int
    distance: float | None
    passed: bool

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        lam = complex(self.lam)
        txt = (
            f"{verdict} record {self.index}: lambda={lam.real:.10g}{lam.imag:+.10g}i "
            f"residual_order={self.recomputed_order} (reported {self.reported_order})"
        )
        if self.distance is not None:
            txt += f" dist_to_true={self.distance:.3g}"
        return txt


def recomputed_residual_order(pencil, report, rec, cache=None):
    """Residual order of ``rec`` rebuilt from its eigenvalue and vector alone.

    For Cayley-based reports ``mu`` is recomputed as ``1 / c_sigma(lambda)``;
    for subspace reports ``theta = 1 / (lambda - a)`` and the residual is
    that of ``L (J - aL)^-1`` on the state space.
    """
    cache = cache if cache is not None else FactorizationCache(pencil)
    x = np.asarray(rec.vector, dtype=complex)
    lam = complex(rec.lam)
    if report.sigma is not None:
        op = CayleyOperator(pencil, report.sigma, cache=cache)
        mu = inverse_cayley_image(lam, report.sigma)
        if mu is INF:
            return 0
        return residual_order(op, mu, x)
    a = complex(report.shift_a)
    theta = 1.0 / (lam - a)
    x = x / np.linalg.norm(x)
    y = pencil.project_state_space(pencil.apply_L(cache.solve(a, x)))
    res = np.linalg.norm(y - theta * x)
    return math.floor(math.log10(max(res, 1e-300)))


def check_report(pencil, report, spectrum=None, lam_rtol=1e-6):
    """Re-verify every converged record of ``report`` against ``pencil``.

    A record passes when its recomputed residual order is at most one above
    the reported one and, if ``spectrum`` is given, when some true
    eigenvalue lies within ``lam_rtol * (1 + |lambda|)``.
    """
    cache = FactorizationCache(pencil)
    truth = None if spectrum is None else np.asarray(spectrum, dtype=complex)
    out = []
    for i, rec in enumerate(report.records):
        if not rec.converged or rec.vector is None:
            continue
        order = recomputed_residual_order(pencil, report, rec, cache)
        ok = order <= rec.residual_order + 1
        dist = None
        if truth is not None and truth.size:
            dist = float(np.min(np.abs(truth - rec.lam)))
            ok = ok and dist <= lam_rtol * (1 + abs(rec.lam))
        out.append(CheckResult(i, complex(rec.lam), rec.residual_order, order, dist, ok))
    return out
