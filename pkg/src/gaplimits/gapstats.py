"""Gap statistics, chain points, difference hits, measure-bound arithmetic
and the empirical level-of-distribution error scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arith import PrimeStore, chebyshev_psi, is_squarefree, psi_residues
from .errors import ArgumentError

Normalizer = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GapRecord:
    n: int
    p_n: int
    p_next: int
    gap: int
    normalized: float


@dataclass(frozen=True)
class GapTable:
    """Column form of the gap stream; row i is the record with n = i + 1."""

    p: np.ndarray
    gap: np.ndarray
    normalized: np.ndarray

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, i: int) -> GapRecord:
        return GapRecord(i + 1, int(self.p[i]), int(self.p[i] + self.gap[i]), int(self.gap[i]), float(self.normalized[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def upto(self, x: int) -> "GapTable":
        """Records with p_n <= x."""
        m = int(np.searchsorted(self.p, x, side="right"))
        return GapTable(self.p[:m], self.gap[:m], self.normalized[:m])


def gap_stream(store: PrimeStore, normalizer: Normalizer | None = None) -> GapTable:
    """All consecutive prime pairs in the store.

    ``normalizer`` maps p_n to the scale of d_n (natural log by default).
    """
    if store.limit < 3:
        raise ArgumentError("gap stream needs limit >= 3")
    ps = store.primes.astype(np.int64)
    p = ps[:-1]
    gap = np.diff(ps)
    scale = np.log(p.astype(float)) if normalizer is None else np.asarray(normalizer(p), dtype=float)
    return GapTable(p, gap, gap / scale)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray  # last entry is the overflow bin (edges[-1], inf)
    total: int
    empirical: np.ndarray
    predicted: np.ndarray
    ks_discrepancy: float

    def rows(self):
        lo = self.edges.tolist()
        hi = lo[1:] + [math.inf]
        return list(zip(lo, hi, self.counts.tolist(), self.empirical.tolist(), self.predicted.tolist()))


def poisson_histogram(records: GapTable | np.ndarray, edges: Sequence[float]) -> Histogram:
    """Binned normalized gaps on (a, b] against e^-a - e^-b.

    The overflow bin (edges[-1], inf) is always present; the empirical
    column sums to exactly 1 over all bins (or is all zero when empty).
    """
    e = np.asarray(edges, dtype=float)
    if e.size < 1 or e[0] != 0 or np.any(np.diff(e) <= 0):
        raise ArgumentError("edges must start at 0 and increase strictly")
    vals = records.normalized if isinstance(records, GapTable) else np.asarray(records, dtype=float)
    idx = np.searchsorted(e, vals, side="left") - 1  # bin j holds (e_j, e_{j+1}]
    idx = np.clip(idx, 0, e.size - 1)
    counts = np.bincount(idx, minlength=e.size)
    total = int(vals.size)
    emp = counts / total if total else np.zeros(e.size)
    upper = np.append(e[1:], np.inf)
    pred = np.exp(-e) - np.exp(-upper)
    if total:
        srt = np.sort(vals)
        cdf_hi = np.arange(1, total + 1) / total
        cdf_lo = np.arange(total) / total
        model = -np.expm1(-srt)
        ks = float(max(np.max(np.abs(cdf_hi - model)), np.max(np.abs(model - cdf_lo))))
    else:
        ks = 0.0
    return Histogram(e, counts, total, emp, pred, ks)


def chain_points(records: GapTable | np.ndarray, m: int) -> np.ndarray:
    """Windows of m consecutive normalized gaps, one per row."""
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    vals = records.normalized if isinstance(records, GapTable) else np.asarray(records, dtype=float)
    if vals.size < m:
        return np.empty((0, m))
    return np.lib.stride_tricks.sliding_window_view(vals, m).copy()


def difference_hits(records: GapTable, betas: Sequence[float], tol: float) -> dict[tuple[int, int], np.ndarray]:
    """For each pair i < j (1-based), the indices n with |d_n/log p_n - (b_j - b_i)| <= tol."""
    b = [float(v) for v in betas]
    if any(u > v for u, v in zip(b, b[1:])):
        raise ArgumentError(f"betas must be nondecreasing: {tuple(b)}")
    if tol < 0:
        raise ArgumentError(f"tol must be nonnegative, got {tol}")
    out = {}
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            target = b[j] - b[i]
            out[(i + 1, j + 1)] = np.flatnonzero(np.abs(records.normalized - target) <= tol) + 1
    return out


@dataclass(frozen=True)
class MeasureBound:
    kappa: int
    asymptotic_density: Fraction
    effective_density: Fraction


def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))


def measure_bounds(kappa: int) -> MeasureBound:
    if kappa < 2:
        raise ArgumentError(f"kappa must be >= 2, got {kappa}")
    return MeasureBound(
        kappa,
        Fraction(1, kappa - 1),
        1 / ((kappa - 1) * harmonic(kappa - 1)),
    )


@dataclass(frozen=True)
class BVRow:
    q: int
    max_error: float
    argmax: int
    partition_rel_error: float


@dataclass(frozen=True)
class BVScan:
    N: int
    theta: float
    q0: int
    Z: int
    psi: float
    rows: tuple[BVRow, ...]

    @property
    def total(self) -> float:
        return math.fsum(r.max_error for r in self.rows)


def bv_error_scan(
    store: PrimeStore,
    N: int,
    theta: float,
    q0: int = 1,
    Z: int = 1,
    partition_tol: float = 1e-9,
) -> BVScan:
    """max_{(a,q)=1} |psi(N;q,a) - psi(N)/phi(q)| for q <= N^theta, q0 | q, (q, Z) = 1."""
    store.check(N, "N")
    if not 0 < theta < 1:
        raise ArgumentError(f"theta must lie in (0, 1), got {theta}")
    if q0 < 1 or not is_squarefree(q0):
        raise ArgumentError(f"q0 = {q0} must be a squarefree positive integer")
    if Z < 1:
        raise ArgumentError(f"Z must be positive, got {Z}")
    psi = chebyshev_psi(store, N)
    qmax = int(math.floor(N**theta + 1e-9))
    rows = []
    for q in range(q0, qmax + 1, q0):
        if math.gcd(q, Z) != 1:
            continue
        by_res = psi_residues(store, N, q)
        part = abs(math.fsum(by_res) - psi) / psi if psi else 0.0
        if part > partition_tol:
            raise ArgumentError(f"partition identity fails at q = {q}: relative error {part:g}")
        coprime = np.array([math.gcd(a, q) == 1 for a in range(q)])
        phi = int(coprime.sum())
        err = np.where(coprime, np.abs(by_res - psi / phi), -1.0)
        a = int(np.argmax(err))
        rows.append(BVRow(q, float(err[a]), a, part))
    return BVScan(N, theta, q0, Z, psi, tuple(rows))
