"""Residue covers: greedy selection, residual elimination and the staged
construction that leaves exactly an admissible tuple unsieved in (0, z].

Stages of :func:`construct_tuple`:

1. a_p = 0 for primes in (y1, y2];
2. a_p chosen greedily for odd primes p <= y1 (skipping ell and Z);
3. one prime h_i per window (u_i, u_i + Delta], u_i = beta_i x y + y, all in
   a single class A mod P1 that dodges every greedy class;
4. the remaining primes (2, ell, and (y2, y]) eliminate whatever else
   survived, never touching the h_i.

Asymptotic supply guarantees are not assumed: every stage checks what it
needs and raises :class:`InfeasibleError` with the failing stage or window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .arith import PrimeStore, factorize
from .errors import ArgumentError, InfeasibleError, PreconditionError
from .tuples import KTuple, admissible_residue, is_admissible


def crt(residues: Sequence[int], moduli: Sequence[int]) -> tuple[int, int] | None:
    """Solve n = r_i (mod m_i) for arbitrary (not necessarily coprime) moduli.

    Returns (r, lcm) or None when the system is inconsistent.
    """
    r, M = 0, 1
    for a, m in zip(residues, moduli):
        if m < 1:
            raise ArgumentError(f"modulus must be positive, got {m}")
        a %= m
        g = math.gcd(M, m)
        if (a - r) % g:
            return None
        # r + M t = a (mod m)  ->  t = (a - r)/g * inv(M/g) (mod m/g)
        mg = m // g
        t = ((a - r) // g * pow(M // g, -1, mg)) % mg if mg > 1 else 0
        r += M * t
        M *= mg
        r %= M
    return r, M


def _is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def log_iter(x: float, n: int) -> float:
    """Iterated logarithm with the floor log_1 x = max(1, log x)."""
    for _ in range(n):
        x = max(1.0, math.log(x))
    return x


@dataclass(frozen=True)
class ResidueCover:
    entries: Mapping[int, int]
    excluded: frozenset = frozenset()
    bound: int = 0
    interval_end: int | None = None

    def __post_init__(self):
        ent = {int(p): int(a) for p, a in self.entries.items()}
        for p, a in ent.items():
            if not 0 <= a < p:
                raise ArgumentError(f"residue a_{p} = {a} outside [0, {p})")
        exc = frozenset(int(p) for p in self.excluded)
        if exc & ent.keys():
            raise ArgumentError(f"primes {sorted(exc & ent.keys())} are both assigned and excluded")
        object.__setattr__(self, "entries", dict(sorted(ent.items())))
        object.__setattr__(self, "excluded", exc)

    def merged(self, other: Mapping[int, int]) -> "ResidueCover":
        both = dict(self.entries)
        for p, a in other.items():
            if p in both:
                raise ArgumentError(f"prime {p} assigned twice")
            both[p] = a
        return ResidueCover(both, self.excluded, self.bound, self.interval_end)

    def base_point(self, above: int | None = None) -> int:
        """Least n > ``above`` (default: bound) with n = -a_p (mod p) for every entry."""
        above = self.bound if above is None else above
        if not self.entries:
            return above + 1
        r, M = crt([-a for a in self.entries.values()], list(self.entries))
        return r if r > above else r + M * ((above - r) // M + 1)


# ---------------------------------------------------------------------------


def greedy_residue(S: Iterable[int], p: int) -> int:
    """Residue class mod p hit by the most elements of S (smallest on ties)."""
    arr = np.fromiter(S, dtype=np.int64)
    if arr.size == 0:
        raise ArgumentError("greedy_residue needs a nonempty set")
    counts = np.bincount(arr % p, minlength=p)
    return int(np.argmax(counts))


def sieve_set(S: Iterable[int], entries: Mapping[int, int]) -> np.ndarray:
    """Elements of S in no class a_p mod p."""
    arr = np.unique(np.fromiter(S, dtype=np.int64))
    keep = np.ones(arr.size, dtype=bool)
    for p, a in entries.items():
        keep &= arr % p != a
    return arr[keep]


def residual(z: int, cover: ResidueCover | Mapping[int, int]) -> np.ndarray:
    """{g in (0, z] : g != a_p (mod p) for every assigned p}."""
    entries = cover.entries if isinstance(cover, ResidueCover) else cover
    alive = np.ones(z, dtype=bool)  # index g - 1
    for p, a in entries.items():
        g0 = a if a >= 1 else p
        alive[g0 - 1 :: p] = False
    return np.flatnonzero(alive) + 1


@dataclass(frozen=True)
class Extension:
    entries: dict[int, int]
    rounds: int
    eliminating: tuple[int, ...]
    condition_holds: bool
    large_primes: int
    x: float


def extend_cover(
    t: KTuple,
    S: Iterable[int],
    primes: Iterable[int],
    x: float | None = None,
    *,
    strict: bool = True,
) -> Extension:
    """Assign a residue to every prime so that exactly the offsets of t survive in S.

    Each round picks, among unused primes, the class mod p avoiding every
    offset that removes the most survivors (smallest p on ties).  Unused
    primes then get the smallest class avoiding all offsets.

    With ``strict`` the counting hypothesis |{p > x}| > |S| + k is enforced
    up front (it guarantees success); otherwise the run simply fails if no
    prime can remove a survivor.
    """
    if not is_admissible(t):
        raise ArgumentError(f"tuple {t} is not admissible")
    S_arr = np.unique(np.fromiter(S, dtype=np.int64))
    offs = np.array(t.offsets, dtype=np.int64)
    if not np.isin(offs, S_arr).all():
        raise ArgumentError("offsets must be contained in S")
    P = sorted({int(p) for p in primes})
    top = int(S_arr.max()) if S_arr.size else 0
    if x is None:
        x = max(2.0, math.sqrt(top))
    large = sum(1 for p in P if p > x)
    condition = S_arr.min(initial=0) >= 0 and top <= x * x and large > S_arr.size + t.k
    if strict and not condition:
        if S_arr.min(initial=0) < 0 or top > x * x:
            raise PreconditionError(f"S must lie in [0, x^2] = [0, {x * x:g}]")
        raise PreconditionError(
            f"need more than |S| + k = {S_arr.size + t.k} primes above x = {x:g}, "
            f"have {large} (deficit {S_arr.size + t.k + 1 - large})"
        )

    forbidden = {p: np.unique(offs % p) for p in P}
    survivors = S_arr[~np.isin(S_arr, offs)]
    entries: dict[int, int] = {}
    order: list[int] = []
    available = list(P)
    rounds = 0
    while survivors.size:
        best = (0, 0, 0)  # hits, -p, residue
        for p in available:
            counts = np.bincount(survivors % p, minlength=p)
            counts[forbidden[p]] = 0
            a = int(np.argmax(counts))
            hits = int(counts[a])
            if hits > best[0]:
                best = (hits, -p, a)
                if hits == survivors.size:
                    break
        if best[0] == 0:
            raise InfeasibleError(
                f"residual elimination stalled after {rounds} round(s): {survivors.size} element(s) "
                f"left in [{int(survivors[0])}, {int(survivors[-1])}]; "
                + (
                    f"none of the {len(available)} unused primes can remove one without hitting the tuple"
                    if available
                    else "every prime is already used"
                ),
                stage="elimination",
                interval=(int(survivors[0]), int(survivors[-1])),
                survivors=survivors.tolist(),
            )
        p, a = -best[1], best[2]
        entries[p] = a
        order.append(p)
        available.remove(p)
        survivors = survivors[survivors % p != a]
        rounds += 1
    for p in available:
        entries[p] = admissible_residue(t.offsets, p)
    return Extension(entries, rounds, tuple(order), bool(condition), large, float(x))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionParams:
    k: int
    betas: tuple[float, ...]
    x: float
    y: int
    z: int
    y1: int
    y2: int
    delta: int
    excluded: frozenset = frozenset()
    ell: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "excluded", frozenset(int(p) for p in self.excluded))
        b = self.betas
        if self.k < 1 or len(b) != self.k:
            raise ArgumentError(f"need k >= 1 betas, got k = {self.k} and {len(b)} betas")
        if any(v < 0 for v in b) or any(u > v for u, v in zip(b, b[1:])):
            raise ArgumentError(f"betas must be nonnegative and nondecreasing: {b}")
        if self.x < 1:
            raise ArgumentError(f"x must be >= 1, got {self.x}")
        if not self.y1 < self.y2 < self.y < self.z:
            raise ArgumentError(
                f"need y1 < y2 < y < z, got {self.y1}, {self.y2}, {self.y}, {self.z}"
            )
        if 2 * self.y * (1 + (1 + b[-1]) * self.x) > 2 * self.z:
            raise ArgumentError(
                f"2y(1 + (1 + beta_k) x) = {2 * self.y * (1 + (1 + b[-1]) * self.x):g} exceeds 2z = {2 * self.z}"
            )
        if self.delta < 1:
            raise ArgumentError(f"Delta must be >= 1, got {self.delta}")
        if self.ell is not None:
            if self.ell % 2 == 0 or not _is_prime(self.ell):
                raise ArgumentError(f"ell must be an odd prime, got {self.ell}")
            if self.ell > self.y1:
                raise ArgumentError(f"ell = {self.ell} exceeds y1 = {self.y1}")
        if 2 in self.excluded:
            raise ArgumentError("2 may not be excluded")
        self.check_excluded()

    def check_excluded(self, constant: float = 2.0) -> None:
        """Sparseness of Z: tail sums of 1/p bounded by C/p', and 1/p' <= C/log z."""
        zs = sorted(self.excluded)
        for i, q in enumerate(zs):
            if not _is_prime(q):
                raise ArgumentError(f"excluded entry {q} is not prime")
            tail = sum(1.0 / p for p in zs[i:])
            if tail > constant / q:
                raise ArgumentError(f"excluded primes too dense at {q}: tail sum {tail:g} > {constant}/{q}")
            if 1.0 / q > constant / math.log(self.z):
                raise ArgumentError(f"excluded prime {q} too small for z = {self.z}")

    @staticmethod
    def schedule(y: int) -> dict[str, int]:
        """y1 = ceil((log y)^(1/4)), y2 = ceil(y / log_3 y), Delta = ceil(y exp(-(log y)^(1/4)))."""
        ly = math.log(y)
        return {
            "y1": math.ceil(ly**0.25),
            "y2": math.ceil(y / log_iter(y, 3)),
            "delta": math.ceil(y * math.exp(-(ly**0.25))),
        }

    @classmethod
    def build(cls, k, betas, x, y, z=None, y1=None, y2=None, delta=None, excluded=(), ell=None):
        """Fill unspecified y1/y2/Delta from :meth:`schedule`, z from the tight side of the bound."""
        s = cls.schedule(y)
        if z is None:
            z = math.ceil(y * (1 + (1 + max(betas)) * x))
        return cls(
            k=k,
            betas=tuple(betas),
            x=x,
            y=y,
            z=z,
            y1=s["y1"] if y1 is None else y1,
            y2=s["y2"] if y2 is None else y2,
            delta=s["delta"] if delta is None else delta,
            excluded=frozenset(excluded),
            ell=ell,
        )

    def positions(self) -> list[float]:
        return [b * self.x * self.y + self.y for b in self.betas]


@dataclass
class ConstructionResult:
    params: ConstructionParams
    tuple: KTuple
    cover: ResidueCover
    progression_residue: int
    P1: int
    stages: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v for k, v in self.checks.items() if isinstance(v, bool))


def _smooth_diff(d: int, y: int) -> bool:
    return d != 0 and max(factorize(abs(d)), default=1) <= y


def construct_tuple(store: PrimeStore, params: ConstructionParams) -> ConstructionResult:
    P = params
    store.check(P.z, "z")
    Z = P.excluded
    primes_y = [int(p) for p in store.primes_upto(P.y) if int(p) not in Z]
    stages: dict = {"excluded": sorted(Z), "ell": P.ell}

    # stage 1: zero classes on (y1, y2]
    stage1 = {p: 0 for p in primes_y if P.y1 < p <= P.y2}
    res1 = residual(P.z, stage1)
    stages["stage1_primes"] = len(stage1)
    stages["res1"] = int(res1.size)

    # stage 2: greedy on odd p <= y1
    greedy_primes = [p for p in primes_y if 2 < p <= P.y1 and p != P.ell]
    cur = res1
    greedy: dict[int, int] = {}
    trail = []
    for p in greedy_primes:
        before = cur.size
        a = greedy_residue(cur, p) if before else 0
        greedy[p] = a
        cur = cur[cur % p != a]
        trail.append((p, a, before, int(cur.size)))
        if before - cur.size < math.ceil(before / p):
            raise InfeasibleError(
                f"greedy step at p = {p} removed fewer than ceil({before}/{p})", stage="greedy"
            )
    res2 = cur
    P1 = math.prod(greedy_primes)
    stages["greedy"] = trail
    stages["res2"] = int(res2.size)
    stages["mertens_bound"] = float(res1.size * math.prod(1 - 1 / p for p in greedy_primes))

    # stage 3: the tuple, from primes = A (mod P1) in each window
    if P1 > 1:
        A, _ = crt([-1 if greedy[p] == 1 else 1 for p in greedy_primes], greedy_primes)
    else:
        A = 0
    chosen: list[int] = []
    windows = []
    for i, u in enumerate(P.positions(), start=1):
        lo, hi = math.floor(u), math.floor(u + P.delta)
        if hi > P.z:
            raise ArgumentError(f"window {i} ({u:g}, {u + P.delta:g}] leaves (y, z]")
        cands = [int(h) for h in store.primes_between(lo, hi) if P1 == 1 or int(h) % P1 == A]
        pick = None
        for h in cands:
            if h in chosen:
                continue
            if all(_smooth_diff(h - g, P.y) for g in chosen):
                pick = h
                break
        windows.append({"index": i, "lo": u, "hi": u + P.delta, "candidates": len(cands)})
        if pick is None:
            raise InfeasibleError(
                f"window {i} ({u:g}, {u + P.delta:g}] has {len(cands)} prime(s) = {A} mod {P1}, "
                f"none usable (need one distinct from {chosen} with y-smooth differences)",
                stage="windows",
                window=(i, u, u + P.delta),
            )
        chosen.append(pick)
    stages["windows"] = windows
    order = sorted(range(P.k), key=lambda i: chosen[i])
    tup = KTuple(tuple(sorted(chosen)))
    if not np.isin(np.array(tup.offsets), res2).all():
        raise InfeasibleError("a chosen prime is not in the stage-2 residual", stage="windows")

    # stage 4: eliminate the rest with 2, ell and (y2, y]
    rest = [p for p in primes_y if p not in stage1 and p not in greedy]
    try:
        ext = extend_cover(tup, res2, rest, x=math.sqrt(P.z), strict=False)
    except InfeasibleError as exc:
        raise InfeasibleError(
            f"stage 4 with tuple {tup}: {exc} (res2 = {res2.size}, {len(rest)} primes available)",
            stage="elimination",
            interval=exc.interval,
            survivors=exc.survivors,
        ) from exc
    stages["p3_available"] = sum(1 for p in rest if p > P.y2)
    stages["counting_condition"] = ext.condition_holds
    stages["extension_rounds"] = ext.rounds

    entries = {**stage1, **greedy, **ext.entries}
    cover = ResidueCover(entries, Z, P.y, P.z)
    result = ConstructionResult(P, tup, cover, int(A), int(P1), stages)

    # postconditions
    final = residual(P.z, cover)
    pos = P.positions()
    by_index = [chosen[i] for i in range(P.k)]
    errs = [abs(h - u) for h, u in zip(by_index, pos)]
    result.checks = {
        "residual_exact": bool(np.array_equal(final, np.array(tup.offsets))),
        "differences_smooth": all(
            _smooth_diff(b - a, P.y) for i, a in enumerate(tup.offsets) for b in tup.offsets[i + 1 :]
        ),
        "position_within_delta": all(e <= P.delta for e in errs),
        "position_error_max": max(errs),
        "admissible": is_admissible(tup),
    }
    stages["order"] = order
    if not result.ok:
        failed = [k for k, v in result.checks.items() if v is False]
        raise InfeasibleError(f"construction postconditions failed: {failed}", stage="postconditions")
    return result


def verify_sieved_interval(
    store: PrimeStore | None,
    t: KTuple,
    cover: ResidueCover,
    n: int,
    z: int | None = None,
) -> bool:
    """True iff every prime in (n, n + z] lies in n + t.

    Integers n + g with g uncovered by the cover and outside the tuple are
    looked up in the store when in range, else tested with a strong
    probable-prime test.  Covered g are composite outright: p | n + g and
    n + g > p because n > y >= p.
    """
    z = cover.interval_end if z is None else z
    if z is None:
        raise ArgumentError("interval length z is required")
    if n <= cover.bound:
        raise ArgumentError(f"base point {n} must exceed y = {cover.bound}")
    bad = [p for p, a in cover.entries.items() if (n + a) % p]
    if bad:
        raise ArgumentError(f"n = {n} is not = -a_p (mod p) for p in {bad[:5]}")
    offs = set(t.offsets)
    open_g = [int(g) for g in residual(z, cover) if int(g) not in offs]
    if store is not None and n + z <= store.limit:
        lo = n + 1
        window = np.flatnonzero(store.flags[lo : n + z + 1]) + lo
        return all(int(q) - n in offs for q in window)
    if not open_g:
        return True
    from sympy import isprime

    return not any(isprime(n + g) for g in open_g)


def scan_y(store: PrimeStore, ys: Iterable[int], make_params) -> tuple[ConstructionResult | None, list]:
    """Try ``make_params(y)`` for each y in order; stop at the first success.

    Returns (result or None, [(y, stage, message), ...] for the failures).
    """
    failures = []
    for y in ys:
        try:
            return construct_tuple(store, make_params(y)), failures
        except (InfeasibleError, ArgumentError) as exc:
            failures.append((y, getattr(exc, "stage", None) or "parameters", str(exc)))
    return None, failures
