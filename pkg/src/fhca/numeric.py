"""Random streams, complex Gaussian sampling, special functions and ECDF tools."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar, Union

import numpy as np

Label = Union[str, int]
T = TypeVar("T")

_GAMMA_EPS = 1e-16
_GAMMA_MAX_ITER = 10_000
_TINY = 1e-300


@dataclass(frozen=True)
class RandomStream:
    """A reproducible random stream addressed by ``(master_seed, path)``.

    The Philox key is a hash of the seed and the path, so the sequence a
    stream produces depends on nothing but those two values: not on the
    order in which streams are created, nor on which thread consumes them.

    >>> root = RandomStream(7)
    >>> a = root.child("trial", 3, "h_AB").generator().standard_normal(2)
    >>> b = RandomStream(7, ("trial", 3, "h_AB")).generator().standard_normal(2)
    >>> bool((a == b).all())
    True
    """

    master_seed: int
    path: tuple[Label, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        for label in self.path:
            if not isinstance(label, (str, int)) or isinstance(label, bool):
                raise TypeError(f"stream labels must be str or int, got {label!r}")

    def child(self, *labels: Label) -> "RandomStream":
        return RandomStream(self.master_seed, self.path + tuple(labels))

    def key(self) -> int:
        blob = json.dumps([self.master_seed, list(self.path)], separators=(",", ":"))
        return int.from_bytes(hashlib.blake2b(blob.encode(), digest_size=16).digest(), "little")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key()))


def _as_generator(source: Union[RandomStream, np.random.Generator]) -> np.random.Generator:
    if isinstance(source, RandomStream):
        return source.generator()
    return source


def sample_circular_gaussian(
    source: Union[RandomStream, np.random.Generator],
    variance: float,
    size: Union[int, Sequence[int], None] = None,
):
    """Draw ``CN(0, variance)`` samples.

    Real and imaginary parts are i.i.d. ``N(0, variance / 2)``. With
    ``size=None`` a single Python ``complex`` is returned, otherwise a
    ``complex128`` array of the requested shape.
    """
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    gen = _as_generator(source)
    shape = () if size is None else (size,) if isinstance(size, int) else tuple(size)
    parts = gen.standard_normal((2,) + shape)
    scale = math.sqrt(variance / 2.0)
    out = scale * (parts[0] + 1j * parts[1])
    return complex(out) if size is None else out


def _lower_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_continued_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _check_gamma_args(shape: float, x: float) -> None:
    if not shape > 0:
        raise ValueError(f"shape must be positive, got {shape}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")


def regularized_lower_incomplete_gamma(shape: float, x: float) -> float:
    """P(shape, x) = gamma(shape, x) / Gamma(shape).

    Series expansion below ``x = shape + 1``, continued fraction above.
    """
    _check_gamma_args(shape, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < shape + 1.0:
        return min(1.0, _lower_series(shape, x))
    return max(0.0, 1.0 - _upper_continued_fraction(shape, x))


def regularized_upper_incomplete_gamma(shape: float, x: float) -> float:
    """Q(shape, x) = 1 - P(shape, x), computed without cancellation."""
    _check_gamma_args(shape, x)
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < shape + 1.0:
        return max(0.0, 1.0 - _lower_series(shape, x))
    return min(1.0, _upper_continued_fraction(shape, x))


def binary_entropy(p):
    """Entropy in bits of a Bernoulli(p) variable, with 0 log 0 = 0.

    Accepts a scalar or an array.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0) | (arr > 1)):
        raise ValueError("probability must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(arr > 0, arr * np.log2(arr), 0.0) + np.where(arr < 1, (1 - arr) * np.log2(1 - arr), 0.0))
    h = np.clip(h, 0.0, 1.0)
    return float(h) if h.ndim == 0 else h


class EmpiricalCDF:
    """Right-continuous empirical distribution function of a sample."""

    def __init__(self, samples) -> None:
        data = np.sort(np.asarray(samples, dtype=float).ravel())
        if data.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        self.samples = data

    def __len__(self) -> int:
        return self.samples.size

    def __call__(self, x):
        counts = np.searchsorted(self.samples, x, side="right")
        out = counts / self.samples.size
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q))


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


def ks_distance(samples, reference_cdf: Callable) -> float:
    """Kolmogorov-Smirnov sup distance between a sample and a reference CDF."""
    data = np.sort(np.asarray(samples, dtype=float).ravel())
    n = data.size
    if n == 0:
        raise ValueError("ks_distance needs at least one sample")
    ref = np.asarray(reference_cdf(data), dtype=float)
    upper = np.arange(1, n + 1) / n - ref
    lower = ref - np.arange(0, n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def run_blocks(
    stream: RandomStream,
    total: int,
    block_size: int,
    work: Callable[[RandomStream, int, int], T],
    threads: int = 1,
) -> list[T]:
    """Split ``total`` trials into fixed-size blocks and run ``work`` on each.

    Block ``b`` receives ``stream.child("block", b)``, its first trial index
    and its trial count. Results come back in block order, so the output is
    identical for every ``threads`` value.
    """
    if total < 0 or block_size < 1:
        raise ValueError("total must be >= 0 and block_size >= 1")
    starts = list(range(0, total, block_size))
    jobs = [(stream.child("block", b), s, min(block_size, total - s)) for b, s in enumerate(starts)]
    if threads <= 1 or len(jobs) <= 1:
        return [work(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: work(*job), jobs))
