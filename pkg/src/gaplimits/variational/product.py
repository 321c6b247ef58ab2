"""The product test function prod g(k t_i) on the simplex and its functionals.

With the substitution u_i = k t_i, each of I, J, L becomes a power of
m2 = ∫_0^T g^2 times an expectation over i.i.d. u_i drawn from the density
g^2 / m2 on [0, T]:

    I = k^-k      m2^k     P(u_1 + ... + u_k <= k)
    J = k^-(k+1)  m2^(k-1) E[G(k - u_1 - ... - u_{k-1})^2]
    L = k^-(k+2)  m2^(k-2) E[H(k - u_1 - ... - u_{k-2})^2]

where G(x) = ∫_0^x g and H(R) = ∫∫_{v+w<=R} g(v) g(w).  The expectations
are estimated by seeded Monte Carlo or by FFT convolution of the density
on a grid.  Values are carried as logarithms since k^-k underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..errors import ArgumentError

DEFAULT_SEED = 20140101
DEFAULT_SAMPLES = 20000


@dataclass(frozen=True)
class ProductTestFunction:
    """F(t) = prod g(k t_i / (rho*delta)) on (rho*delta) R_k."""

    k: int
    rho: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ArgumentError(f"the product family needs k >= 2, got {self.k}")
        if self.A <= 0:
            raise ArgumentError(f"A = log k - 2 log log k = {self.A} is not positive")
        if not (self.rho > 0 and self.delta > 0):
            raise ArgumentError("rho and delta must be positive")

    @property
    def A(self) -> float:
        L = math.log(self.k)
        return L - 2 * math.log(L)

    @property
    def T(self) -> float:
        return math.expm1(self.A) / self.A

    @property
    def scale(self) -> float:
        return self.rho * self.delta

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t <= self.T), 1.0 / (1.0 + self.A * t), 0.0)

    def G(self, x):
        """∫_0^x g, closed form (equals 1 for x >= T)."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.T)
        return np.log1p(self.A * x) / self.A

    def G2(self, x):
        """∫_0^x g^2, closed form."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.T)
        return x / (1.0 + self.A * x)

    @property
    def m2(self) -> float:
        return float(self.G2(self.T))

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Inverse-CDF draws from the density g^2 / m2 on [0, T]."""
        w = self.m2 * rng.random(shape)
        return w / (1.0 - self.A * w)

    def H_table(self, n: int = 2001):
        """H on [0, 2T]; H(R) = 1 beyond 2T."""
        return _h_table(self.A, self.T, n)


@lru_cache(maxsize=16)
def _h_table(A: float, T: float, n: int):
    def g(v):
        return 1.0 / (1.0 + A * v)

    def G(x):
        return math.log1p(A * min(max(x, 0.0), T)) / A

    Rs = np.linspace(0.0, 2 * T, n)
    vals = np.zeros(n)
    for i, R in enumerate(Rs):
        hi = min(R, T)
        if hi <= 0:
            continue
        pts = [R - T] if 0 < R - T < hi else None
        vals[i] = integrate.quad(
            lambda v: g(v) * G(R - v), 0.0, hi, points=pts, epsabs=1e-13, epsrel=1e-12, limit=200
        )[0]
    Rs.setflags(write=False)
    vals.setflags(write=False)
    return Rs, vals


@dataclass(frozen=True)
class Estimate:
    log: float
    rel_stderr: float

    @property
    def value(self) -> float:
        return math.exp(self.log) if self.log > -745 else 0.0


@dataclass(frozen=True)
class ProductFunctionals:
    k: int
    method: str
    samples: int
    I: Estimate
    J: Estimate
    L: Estimate
    j_over_i: float
    j_over_i_stderr: float
    l_over_i: float
    l_over_i_stderr: float

    @property
    def j_reference(self) -> float:
        """(log k)/k, the benchmark for J/I of the unscaled family."""
        return math.log(self.k) / self.k

    @property
    def l_reference(self) -> float:
        return self.j_reference**2


def _ratio(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """mean(x)/mean(y) with a delta-method standard error."""
    mx, my = x.mean(), y.mean()
    r = mx / my
    n = len(x)
    se = math.sqrt(np.var(x - r * y, ddof=1) / n) / my if n > 1 else math.inf
    return float(r), float(se)


def _monte_carlo(F: ProductTestFunction, samples: int, seed: int, chunk: int = 2000):
    k = F.k
    rng = np.random.default_rng(seed)
    Rs, Hs = F.H_table()
    ind, gsq, hsq = [], [], []
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        u = F.sample(rng, (m, k))
        s_km2 = u[:, : k - 2].sum(axis=1)
        s_km1 = s_km2 + u[:, k - 2]
        s_k = s_km1 + u[:, k - 1]
        ind.append((s_k <= k).astype(float))
        gsq.append(np.where(k - s_km1 > 0, F.G(k - s_km1), 0.0) ** 2)
        hsq.append(np.interp(k - s_km2, Rs, Hs, left=0.0, right=1.0) ** 2)
        done += m
    return np.concatenate(ind), np.concatenate(gsq), np.concatenate(hsq)


def _grid_expectations(F: ProductTestFunction, h: float):
    k, T = F.k, F.T
    nb = int(math.ceil(T / h))
    edges = np.minimum(np.arange(nb + 1) * h, T)
    pmf = np.diff(F.G2(edges)) / F.m2
    mids = 0.5 * (edges[:-1] + edges[1:])
    # represent each bin by its conditional mean offset so sums stay unbiased
    offs = mids - np.arange(nb) * h
    mean_off = float(np.dot(pmf, offs))
    size = 1
    while size < k * nb + 1:
        size *= 2
    f = np.fft.rfft(pmf, size)

    def power(n):
        p = np.fft.irfft(f**n, size)[: n * (nb - 1) + 1]
        p = np.clip(p, 0.0, None)
        return p / p.sum(), np.arange(len(p)) * h + n * mean_off

    p_k, s_k = power(k)
    p1, s1 = power(k - 1)
    p2, s2 = power(k - 2)
    Rs, Hs = F.H_table()
    e_ind = float(np.dot(p_k, s_k <= k))
    e_g = float(np.dot(p1, np.where(k - s1 > 0, F.G(k - s1), 0.0) ** 2))
    e_h = float(np.dot(p2, np.interp(k - s2, Rs, Hs, left=0.0, right=1.0) ** 2))
    return e_ind, e_g, e_h


def product_functionals(
    F: ProductTestFunction,
    method: str = "mc",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    grid_step: float = 1e-2,
) -> ProductFunctionals:
    k = F.k
    lk, lm = math.log(k), math.log(F.m2)
    ls = math.log(F.scale)
    if method == "mc":
        ind, gsq, hsq = _monte_carlo(F, samples, seed)
        e = [ind.mean(), gsq.mean(), hsq.mean()]
        se = [
            float(np.std(a, ddof=1) / math.sqrt(len(a)) / m) if m > 0 else math.inf
            for a, m in zip((ind, gsq, hsq), e)
        ]
        jr, jse = _ratio(gsq, ind)
        lr, lse = _ratio(hsq, ind)
        n = samples
    elif method == "grid":
        e = _grid_expectations(F, grid_step)
        e_half = _grid_expectations(F, grid_step / 2)
        se = [abs(a - b) / b if b > 0 else math.inf for a, b in zip(e, e_half)]
        e = e_half
        jr, lr = e[1] / e[0], e[2] / e[0]
        jse, lse = jr * (se[0] + se[1]), lr * (se[0] + se[2])
        n = 0
    else:
        raise ArgumentError(f"unknown quadrature method {method!r}")
    if e[0] <= 0:
        raise ArgumentError("no probability mass inside the simplex; increase samples")
    logs = [
        -k * lk + k * lm + math.log(e[0]) + k * ls,
        -(k + 1) * lk + (k - 1) * lm + math.log(e[1]) + (k + 1) * ls,
        -(k + 2) * lk + (k - 2) * lm + math.log(e[2]) + (k + 2) * ls,
    ]
    # unscaled ratios: J/I = E[G^2]/(k m2 P), L/I = E[H^2]/(k^2 m2^2 P)
    j_over_i = jr / (k * F.m2) * F.scale
    l_over_i = lr / (k * F.m2) ** 2 * F.scale**2
    return ProductFunctionals(
        k=k,
        method=method,
        samples=n,
        I=Estimate(logs[0], se[0]),
        J=Estimate(logs[1], se[1]),
        L=Estimate(logs[2], se[2]),
        j_over_i=j_over_i,
        j_over_i_stderr=jse / (k * F.m2) * F.scale,
        l_over_i=l_over_i,
        l_over_i_stderr=lse / (k * F.m2) ** 2 * F.scale**2,
    )


@dataclass(frozen=True)
class PointwiseCheck:
    xs: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    quad_error: float

    @property
    def max_excess(self) -> float:
        return float(np.max(self.lhs - self.rhs))


def pointwise_check(F: ProductTestFunction, n: int = 1000, seed: int = DEFAULT_SEED) -> PointwiseCheck:
    """(∫_0^x g)^2 versus (log k) ∫_0^x g^2 at n seeded points of [0, T].

    Both integrals are computed by adaptive quadrature; the closed forms
    give the reported quadrature error.
    """
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(0.0, F.T, n))
    g = lambda t: 1.0 / (1.0 + F.A * t)
    q1 = np.array([integrate.quad(g, 0, x, epsabs=1e-14, epsrel=1e-13)[0] for x in xs])
    q2 = np.array([integrate.quad(lambda t: g(t) ** 2, 0, x, epsabs=1e-14, epsrel=1e-13)[0] for x in xs])
    err = max(np.max(np.abs(q1 - F.G(xs))), np.max(np.abs(q2 - F.G2(xs))))
    return PointwiseCheck(xs, q1**2, math.log(F.k) * q2, float(err))


@dataclass(frozen=True)
class ProductFamilyReport:
    k: int
    A: float
    T: float
    rho: float
    delta: float
    functionals: ProductFunctionals
    pointwise: PointwiseCheck

    @property
    def j_bound(self) -> float:
        """rho*delta*(log k)/k, the target for J/I."""
        return self.rho * self.delta * math.log(self.k) / self.k

    @property
    def l_bound(self) -> float:
        return self.j_bound**2


def lemma46_report(
    k: int,
    rho: float = 1.0,
    delta: float = 1.0,
    method: str = "mc",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    points: int = 1000,
) -> ProductFamilyReport:
    F = ProductTestFunction(k, rho, delta)
    return ProductFamilyReport(
        k=k,
        A=F.A,
        T=F.T,
        rho=rho,
        delta=delta,
        functionals=product_functionals(F, method, samples, seed),
        pointwise=pointwise_check(F, points, seed),
    )
