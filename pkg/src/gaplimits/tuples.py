"""Admissible k-tuples, translates and equal-size partitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .arith import PrimeStore, _small_primes
from .errors import ArgumentError


@dataclass(frozen=True)
class KTuple:
    """Sorted distinct nonnegative offsets h_1 < ... < h_k.

    ``labels`` (when present) gives the part index of each offset, in
    offset order, and every part has the same size.
    """

    offsets: tuple[int, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        offs = tuple(int(h) for h in self.offsets)
        if not offs:
            raise ArgumentError("a k-tuple needs at least one offset")
        if any(h < 0 for h in offs):
            raise ArgumentError(f"offsets must be nonnegative: {offs}")
        if any(a >= b for a, b in zip(offs, offs[1:])):
            raise ArgumentError(f"offsets must be strictly increasing: {offs}")
        object.__setattr__(self, "offsets", offs)
        if self.labels is not None:
            labels = tuple(int(x) for x in self.labels)
            if len(labels) != len(offs):
                raise ArgumentError("every offset needs a part label")
            sizes = [labels.count(j) for j in sorted(set(labels))]
            if len(set(sizes)) != 1:
                raise ArgumentError(f"parts have unequal sizes {sizes}")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def of(cls, offsets: Iterable[int]) -> "KTuple":
        return cls(tuple(sorted(set(int(h) for h in offsets))))

    @classmethod
    def parse(cls, text: str) -> "KTuple":
        """Parse the CLI literal form, e.g. ``"0,2,6"``."""
        try:
            vals = [int(s) for s in text.replace(" ", "").split(",") if s]
        except ValueError as exc:
            raise ArgumentError(f"malformed tuple literal {text!r}") from exc
        return cls(tuple(vals))

    @property
    def k(self) -> int:
        return len(self.offsets)

    @property
    def parts(self) -> list[tuple[int, ...]]:
        if self.labels is None:
            return [self.offsets]
        out: dict[int, list[int]] = {}
        for h, j in zip(self.offsets, self.labels):
            out.setdefault(j, []).append(h)
        return [tuple(out[j]) for j in sorted(out)]

    def __str__(self) -> str:
        return ",".join(map(str, self.offsets))


def is_admissible(t: KTuple) -> bool:
    """True iff the offsets miss some residue class modulo every prime.

    Only primes p <= k need checking: k offsets cannot fill p > k classes.
    """
    for p in _small_primes(t.k):
        p = int(p)
        if len({h % p for h in t.offsets}) == p:
            return False
    return True


def translate(t: KTuple, n: int) -> tuple[int, ...]:
    return tuple(n + h for h in t.offsets)


def partition_equal(t: KTuple, parts: int) -> KTuple:
    """Label contiguous blocks of k/parts consecutive offsets."""
    if parts < 1 or t.k % parts:
        raise ArgumentError(f"{parts} parts do not divide k = {t.k}")
    size = t.k // parts
    return KTuple(t.offsets, tuple(i // size for i in range(t.k)))


def prime_pattern(store: PrimeStore, t: KTuple, n: int) -> list[int]:
    """|A_j(n) ∩ P| for each part j (a single part if unlabeled)."""
    store.check(n + t.offsets[-1], "largest translate")
    return [sum(store.is_prime(n + h) for h in part) for part in t.parts]


def admissible_residue(offsets: Sequence[int], p: int) -> int | None:
    """Smallest class b mod p with prod(b - h_i) != 0 (mod p), if any."""
    hit = {h % p for h in offsets}
    for b in range(p):
        if b not in hit:
            return b
    return None
