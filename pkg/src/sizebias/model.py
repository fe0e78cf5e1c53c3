"""Exact finite distributions over nonnegative vectors and size biasing.

All arithmetic here is done in :class:`fractions.Fraction` so that oracle
checks can assert equality instead of closeness.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

from .errors import DegenerateCoordinate, InvalidPmf

Rational = Union[int, Fraction, str]
Vector = tuple[Fraction, ...]


def as_fraction(x: Any) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to an exact Fraction.

    Floats are read through their shortest decimal repr, so ``0.1`` becomes
    ``1/10`` rather than the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not valid rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidPmf(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _as_vector(x: Any) -> Vector:
    if isinstance(x, (list, tuple)):
        return tuple(as_fraction(c) for c in x)
    return (as_fraction(x),)


@dataclass(frozen=True)
class Pmf:
    """Exact joint law of a nonnegative random vector with finite support.

    ``atoms`` is canonicalized at construction: value vectors are merged,
    sorted lexicographically, and stored as ``((x_1, ..., x_k), p)`` pairs.
    Scalars are accepted as 1-vectors.
    """

    atoms: tuple[tuple[Vector, Fraction], ...]
    k: int = 0

    def __init__(self, atoms: Iterable[tuple[Any, Any]] | Mapping[Any, Any]):
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        merged: dict[Vector, Fraction] = defaultdict(Fraction)
        for x, p in items:
            merged[_as_vector(x)] += as_fraction(p)
        if not merged:
            raise InvalidPmf("a pmf needs at least one atom")
        dims = {len(x) for x in merged}
        if len(dims) != 1:
            raise InvalidPmf(f"value vectors have mixed dimensions {sorted(dims)}")
        (k,) = dims
        if k < 1:
            raise InvalidPmf("dimension must be >= 1")
        for x, p in merged.items():
            if p <= 0:
                raise InvalidPmf(f"atom {x} has non-positive probability {p}")
            if any(c < 0 for c in x):
                raise InvalidPmf(f"atom {x} has a negative coordinate")
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise InvalidPmf(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))
        object.__setattr__(self, "k", k)

    # convenience constructors -------------------------------------------------

    @classmethod
    def point(cls, x: Any) -> Pmf:
        return cls([(x, 1)])

    @classmethod
    def uniform(cls, values: Sequence[Any]) -> Pmf:
        p = Fraction(1, len(values))
        return cls([(v, p) for v in values])

    @classmethod
    def bernoulli(cls, p: Rational) -> Pmf:
        p = as_fraction(p)
        return cls([(x, q) for x, q in ((0, 1 - p), (1, p)) if q != 0])

    @classmethod
    def from_counts(cls, counts: Mapping[Any, int]) -> Pmf:
        """Law proportional to integer outcome counts (exact)."""
        total = sum(counts.values())
        return cls([(x, Fraction(c, total)) for x, c in counts.items()])

    @classmethod
    def product(cls, marginals: Sequence[Pmf]) -> Pmf:
        """Joint law of independent univariate coordinates."""
        atoms: list[tuple[Vector, Fraction]] = [((), Fraction(1))]
        for m in marginals:
            if m.k != 1:
                raise InvalidPmf("product() expects univariate marginals")
            atoms = [(x + y, p * q) for x, p in atoms for y, q in m.atoms]
        return cls(atoms)

    # queries -----------------------------------------------------------------

    @property
    def support(self) -> tuple[Vector, ...]:
        return tuple(x for x, _ in self.atoms)

    def as_dict(self) -> dict[Vector, Fraction]:
        return dict(self.atoms)

    def prob(self, x: Any) -> Fraction:
        return self.as_dict().get(_as_vector(x), Fraction(0))

    def marginal(self, i: int) -> Pmf:
        """Univariate law of coordinate ``i`` (1-based)."""
        _check_direction(i, self.k)
        return Pmf([((x[i - 1],), p) for x, p in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)

    # serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "atoms": [
                {"x": [str(c) for c in x], "p": str(p)} for x, p in self.atoms
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> Pmf:
        if set(obj) - {"k", "atoms"}:
            raise InvalidPmf(f"unknown pmf keys {sorted(set(obj) - {'k', 'atoms'})}")
        try:
            atoms = [(a["x"], a["p"]) for a in obj["atoms"]]
        except (KeyError, TypeError) as exc:
            raise InvalidPmf(f"malformed pmf object: {exc}") from exc
        pmf = cls(atoms)
        if "k" in obj and obj["k"] != pmf.k:
            raise InvalidPmf(f"declared k={obj['k']} but atoms have k={pmf.k}")
        return pmf


@dataclass(frozen=True)
class MomentSummary:
    mu: Vector
    sigma2: Vector

    @property
    def sigma_min2(self) -> Fraction:
        return min(self.sigma2)

    @property
    def k(self) -> int:
        return len(self.mu)


def _check_direction(i: int, k: int) -> None:
    if not isinstance(i, int) or not 1 <= i <= k:
        raise IndexError(f"direction {i} outside 1..{k}")


def moments(pmf: Pmf, *, check: bool = True) -> MomentSummary:
    """Exact means and variances of every coordinate.

    With ``check`` (the default) a coordinate with zero mean or zero
    variance raises :class:`DegenerateCoordinate`, since the tail bounds
    need both strictly positive.
    """
    mu = [Fraction(0)] * pmf.k
    m2 = [Fraction(0)] * pmf.k
    for x, p in pmf.atoms:
        for j, c in enumerate(x):
            mu[j] += p * c
            m2[j] += p * c * c
    sigma2 = [s - m * m for s, m in zip(m2, mu)]
    if check:
        for j in range(pmf.k):
            if mu[j] == 0:
                raise DegenerateCoordinate(j + 1, "mean")
            if sigma2[j] == 0:
                raise DegenerateCoordinate(j + 1, "variance")
    return MomentSummary(tuple(mu), tuple(sigma2))


def mean(pmf: Pmf, i: int) -> Fraction:
    _check_direction(i, pmf.k)
    return sum((p * x[i - 1] for x, p in pmf.atoms), Fraction(0))


def size_bias_exact(pmf: Pmf, i: int) -> Pmf:
    """Reweight ``pmf`` by its ``i``-th coordinate: p_i(x) = x_i p(x) / mu_i.

    Atoms with x_i = 0 carry no biased mass and are dropped.
    """
    mu_i = mean(pmf, i)
    if mu_i == 0:
        raise DegenerateCoordinate(i, "mean")
    return Pmf([(x, x[i - 1] * p / mu_i) for x, p in pmf.atoms if x[i - 1] != 0])


def expect(pmf: Pmf, f: Callable[[Vector], Any]):
    """E[f(W)]; exact whenever ``f`` returns rationals."""
    return sum((p * f(x) for x, p in pmf.atoms), Fraction(0))
