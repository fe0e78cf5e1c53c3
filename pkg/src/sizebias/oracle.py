"""Exact brute-force ground truth for small models.

Everything here enumerates the full outcome space and accumulates in exact
integers or Fractions; caps are hard errors.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Union

from . import bounds as _bounds
from .couplings import (
    IndependentModel,
    LocalDependenceModel,
    _biased_component,
    tilted_law,
)
from .errors import DegenerateCoordinate, StateSpaceTooLarge
from .model import Pmf, moments, size_bias_exact
from .patterns import PatternModel, count_vector, reorder

EnumerableModel = Union[PatternModel, LocalDependenceModel, IndependentModel]

PATTERN_MAX_N = 8
PRODUCT_CAP = 2**20


# permutations in lexicographic order --------------------------------------------


def next_permutation(a: list[int]) -> bool:
    """Advance ``a`` in place to its lexicographic successor; False at the end."""
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1 :] = reversed(a[i + 1 :])
    return True


def lex_permutations(n: int, first: int | None = None) -> Iterator[tuple[int, ...]]:
    """All of S_n in lexicographic order, or only the block starting with ``first``."""
    if first is None:
        a = list(range(1, n + 1))
    else:
        a = [first] + [v for v in range(1, n + 1) if v != first]
    while True:
        if first is not None and a[0] != first:
            return
        yield tuple(a)
        if not next_permutation(a):
            return


# state-space sizes ------------------------------------------------------------


def state_space_size(model: EnumerableModel) -> int:
    if isinstance(model, PatternModel):
        return math.factorial(model.n)
    return math.prod(len(c) for c in model.components)


def _check_caps(model: EnumerableModel) -> None:
    if isinstance(model, PatternModel):
        if model.n > PATTERN_MAX_N:
            raise StateSpaceTooLarge(math.factorial(model.n), math.factorial(PATTERN_MAX_N))
        return
    size = state_space_size(model)
    if size > PRODUCT_CAP:
        raise StateSpaceTooLarge(size, PRODUCT_CAP)


# pattern enumeration, one block of S_n per task ------------------------------------


def _pattern_block(model: PatternModel, i: int | None, first: int):
    """Integer outcome counts for permutations beginning with ``first``.

    Returns (law counts, biased counts, max squared radius, max gaps); the
    last three are empty/zero when ``i`` is None.
    """
    law: Counter = Counter()
    biased: Counter = Counter()
    r2 = 0
    gaps = [0] * model.k
    for pi in lex_permutations(model.n, first):
        w = count_vector(pi, model)
        law[w] += 1
        if i is None:
            continue
        for beta in range(1, model.n + 1):
            if model.coupling == "identity":
                wb = w
            else:
                wb = count_vector(reorder(pi, model.patterns[i - 1], beta), model)
            biased[wb] += 1
            diff = [abs(a - b) for a, b in zip(wb, w)]
            r2 = max(r2, sum(d * d for d in diff))
            gaps = [max(g, d) for g, d in zip(gaps, diff)]
    return law, biased, r2, gaps


def _pattern_reduce(model: PatternModel, i: int | None, workers: int):
    firsts = range(1, model.n + 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_pattern_block, [model] * model.n, [i] * model.n, firsts))
    else:
        parts = [_pattern_block(model, i, f) for f in firsts]
    law: Counter = Counter()
    biased: Counter = Counter()
    r2 = 0
    gaps = [0] * model.k
    for pl, pb, pr, pg in parts:
        law.update(pl)
        biased.update(pb)
        r2 = max(r2, pr)
        gaps = [max(a, b) for a, b in zip(gaps, pg)]
    return law, biased, r2, gaps


# public operations ----------------------------------------------------------------


def enumerate_law(model: EnumerableModel, *, workers: int = 1) -> Pmf:
    """Exact joint law of W."""
    _check_caps(model)
    if isinstance(model, PatternModel):
        law, _, _, _ = _pattern_reduce(model, None, workers)
        return Pmf.from_counts(law)
    if isinstance(model, IndependentModel):
        return Pmf.product(model.components)
    atoms = []
    for combo in product(*(c.atoms for c in model.components)):
        c = [x[0] for x, _ in combo]
        p = math.prod((q for _, q in combo), start=Fraction(1))
        atoms.append((model.statistics(c), p))
    return Pmf(atoms)


@dataclass(frozen=True)
class CouplingAudit:
    direction: int
    law: Pmf  # exact law of the constructed W^i
    max_radius_sq: Fraction  # max ||W^i - W||_2^2 over all coupled outcomes
    max_gap: tuple[Fraction, ...]  # per-coordinate max |W_j^i - W_j|

    @property
    def max_radius(self) -> float:
        return math.sqrt(self.max_radius_sq)

    def is_size_biased(self, law_of_w: Pmf) -> bool:
        return self.law == size_bias_exact(law_of_w, self.direction)


def exact_coupling_audit(model: EnumerableModel, i: int, *, workers: int = 1) -> CouplingAudit:
    """Enumerate every coupled outcome of the model's construction in direction i."""
    _check_caps(model)
    if not 1 <= i <= model.k:
        raise IndexError(f"direction {i} outside 1..{model.k}")
    if isinstance(model, PatternModel):
        _, biased, r2, gaps = _pattern_reduce(model, i, workers)
        return CouplingAudit(
            i, Pmf.from_counts(biased), Fraction(r2), tuple(Fraction(g) for g in gaps)
        )

    if isinstance(model, IndependentModel):
        replacement = [((x[0],), p) for x, p in _biased_component(model.components[i - 1], i).atoms]
        block = [i]
        stats = lambda c: tuple(c)  # noqa: E731
    else:
        replacement = list(tilted_law(model, i))
        block = list(model.neighborhoods[i - 1])
        stats = model.statistics

    outcomes = state_space_size(model) * len(replacement)
    if outcomes > PRODUCT_CAP:
        raise StateSpaceTooLarge(outcomes, PRODUCT_CAP)

    atoms = []
    r2 = Fraction(0)
    gaps = [Fraction(0)] * model.k
    for combo in product(*(comp.atoms for comp in model.components)):
        c = [x[0] for x, _ in combo]
        p = math.prod((q for _, q in combo), start=Fraction(1))
        w = stats(c)
        for vals, q in replacement:
            cb = list(c)
            for v, val in zip(block, vals):
                cb[v - 1] = val
            wb = stats(cb)
            atoms.append((wb, p * q))
            diff = [abs(a - b) for a, b in zip(wb, w)]
            r2 = max(r2, sum((d * d for d in diff), Fraction(0)))
            gaps = [max(g, d) for g, d in zip(gaps, diff)]
    return CouplingAudit(i, Pmf(atoms), r2, tuple(gaps))


@dataclass(frozen=True)
class ExactTailTable:
    grid: tuple[tuple[Fraction, ...], ...]
    lower: tuple[Fraction, ...]  # P((W - mu)/sigma <= -t)
    upper: tuple[Fraction, ...]  # P((W - mu)/sigma >= t)
    mu: tuple[Fraction, ...]
    sigma2: tuple[Fraction, ...]


def _beyond(d: Fraction, t: Fraction, s2: Fraction, sign: int) -> bool:
    """sign * d >= t * sigma with t >= 0, decided without square roots."""
    d = sign * d
    return d >= 0 and d * d >= t * t * s2


def exact_tails(law: Pmf, grid: Sequence[Sequence]) -> ExactTailTable:
    """Exact standardized tail probabilities at each t in ``grid``.

    Floats in ``grid`` are converted with ``Fraction(float)``, i.e. their
    exact binary value.
    """
    mom = moments(law, check=False)
    for j, s2 in enumerate(mom.sigma2, start=1):
        if s2 == 0:
            raise DegenerateCoordinate(j, "variance")
    ts = []
    for t in grid:
        tv = tuple(Fraction(x) for x in (t if isinstance(t, (list, tuple)) else [t] * law.k))
        if len(tv) != law.k:
            raise ValueError(f"t has length {len(tv)}, law has k={law.k}")
        if any(x < 0 for x in tv):
            raise _bounds.NegativeT(tv)
        ts.append(tv)
    lower, upper = [], []
    for tv in ts:
        lo = up = Fraction(0)
        for x, p in law.atoms:
            devs = [(c - m, t, s2) for c, m, t, s2 in zip(x, mom.mu, tv, mom.sigma2)]
            if all(_beyond(d, t, s2, -1) for d, t, s2 in devs):
                lo += p
            if all(_beyond(d, t, s2, +1) for d, t, s2 in devs):
                up += p
        lower.append(lo)
        upper.append(up)
    return ExactTailTable(tuple(ts), tuple(lower), tuple(upper), mom.mu, mom.sigma2)


@dataclass(frozen=True)
class BoundCheckRow:
    t: tuple[float, ...]
    exact_lower: Fraction
    bound_lower: float
    exact_upper: Fraction
    bound_upper: float

    @property
    def margin(self) -> float:
        """Smallest bound - exact over both tails (>= 0 when the bound holds)."""
        return min(
            self.bound_lower - float(self.exact_lower),
            self.bound_upper - float(self.exact_upper),
        )


@dataclass(frozen=True)
class BoundCheck:
    K: float
    params: _bounds.BoundParams
    audits: tuple[CouplingAudit, ...]
    rows: tuple[BoundCheckRow, ...]

    def holds(self, slack: float = 1e-12) -> bool:
        return all(r.margin >= -slack for r in self.rows)


def check_bounds(model: EnumerableModel, grid: Sequence, *, workers: int = 1) -> BoundCheck:
    """Exact tails against the tail bounds, with K the audited exact radius.

    K is the largest audited radius over all directions, since the bounds
    require one K valid for every direction.
    """
    law = enumerate_law(model, workers=workers)
    mom = moments(law)
    audits = tuple(exact_coupling_audit(model, i, workers=workers) for i in range(1, model.k + 1))
    K = math.sqrt(max(a.max_radius_sq for a in audits))
    params = _bounds.bound_params(
        [float(m) for m in mom.mu], [math.sqrt(s) for s in mom.sigma2], K
    )
    table = exact_tails(law, grid)
    rows = tuple(
        BoundCheckRow(
            tuple(float(x) for x in t),
            lo,
            _bounds.lower_tail_bound(params, [float(x) for x in t]),
            up,
            _bounds.upper_tail_bound(params, [float(x) for x in t]),
        )
        for t, lo, up in zip(table.grid, table.lower, table.upper)
    )
    return BoundCheck(K, params, audits, rows)
