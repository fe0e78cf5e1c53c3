"""Circular pattern occurrences in uniformly random permutations.

Permutations are tuples of the values ``pi(1), ..., pi(n)``; every public
index (locations, window offsets, directions) is 1-based and window
positions wrap around modulo n.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import MAX_PATTERN_LENGTH
from .couplings import SampledPair
from .errors import InvalidPatternDims
from .rng import index_from_uniform

Permutation = tuple[int, ...]


def as_permutation(seq: Sequence[int]) -> Permutation:
    perm = tuple(int(v) for v in seq)
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise ValueError(f"{list(seq)} is not a permutation of 1..{len(perm)}")
    return perm


def inverse(perm: Permutation) -> Permutation:
    inv = [0] * len(perm)
    for pos, val in enumerate(perm, start=1):
        inv[val - 1] = pos
    return tuple(inv)


def relative_order(values: Sequence) -> Permutation:
    """Ranks (1-based) of ``values`` among themselves, e.g. (2, 7, 5) -> (1, 3, 2)."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for r, idx in enumerate(order, start=1):
        ranks[idx] = r
    return tuple(ranks)


@dataclass(frozen=True)
class PatternModel:
    """Counts of k distinct length-m patterns in a uniform permutation of size n."""

    n: int
    patterns: tuple[Permutation, ...]
    # "standard" is the reordering coupling; "identity" sets W^i := W and
    # exists only as a known-bad fixture for the harness.
    coupling: str = "standard"

    def __post_init__(self):
        pats = tuple(as_permutation(p) for p in self.patterns)
        object.__setattr__(self, "patterns", pats)
        if not pats:
            raise InvalidPatternDims("need at least one pattern")
        if len({len(p) for p in pats}) != 1:
            raise InvalidPatternDims("patterns must share one length m")
        if len(set(pats)) != len(pats):
            raise InvalidPatternDims("patterns must be pairwise distinct")
        m = len(pats[0])
        if m < 3 or m > MAX_PATTERN_LENGTH:
            raise InvalidPatternDims(f"pattern length m={m} outside 3..{MAX_PATTERN_LENGTH}")
        if self.n < m:
            raise InvalidPatternDims(f"n={self.n} must be >= m={m}")
        if self.coupling not in ("standard", "identity"):
            raise ValueError(f"unknown coupling {self.coupling!r}")

    @property
    def m(self) -> int:
        return len(self.patterns[0])

    @property
    def k(self) -> int:
        return len(self.patterns)

    def window(self, s: int) -> tuple[int, ...]:
        """Positions V_s = {s, ..., s+m-1} reduced into 1..n."""
        return tuple((s - 1 + a) % self.n + 1 for a in range(self.m))

    @property
    def radius(self) -> float:
        """Almost-sure bound sqrt(k)(2m - 1) on ||W^i - W||_2."""
        return math.sqrt(self.k) * (2 * self.m - 1)

    def to_json(self) -> dict:
        out = {"type": "pattern", "n": self.n, "patterns": [list(p) for p in self.patterns]}
        if self.coupling != "standard":
            out["coupling"] = self.coupling
        return out


def _window_values(pi: Permutation, s: int, m: int) -> list[int]:
    n = len(pi)
    return [pi[(s - 1 + a) % n] for a in range(m)]


def appears(pi: Permutation, tau: Permutation, s: int) -> bool:
    return relative_order(_window_values(pi, s, len(tau))) == tuple(tau)


def appears_by_inverse(pi: Permutation, tau: Permutation, s: int) -> bool:
    """Same event read as: pi(tau^-1(v) + s - 1), v = 1..m, is increasing."""
    n = len(pi)
    seq = [pi[(t - 1 + s - 1) % n] for t in inverse(tuple(tau))]
    return all(a < b for a, b in zip(seq, seq[1:]))


def count(pi: Permutation, tau: Permutation) -> int:
    return sum(appears(pi, tau, s) for s in range(1, len(pi) + 1))


def count_vector(pi: Permutation, model: PatternModel) -> tuple[int, ...]:
    """All k counts in one scan over the n windows."""
    index = {tau: j for j, tau in enumerate(model.patterns)}
    out = [0] * model.k
    for s in range(1, len(pi) + 1):
        j = index.get(relative_order(_window_values(pi, s, model.m)))
        if j is not None:
            out[j] += 1
    return tuple(out)


def relative_order_indicator(tau: Permutation, j: int) -> int:
    """1 if tau(1..m-j) and tau(j+1..m) are in the same relative order."""
    m = len(tau)
    if not 1 <= j <= m - 1:
        raise ValueError(f"j={j} outside 1..{m - 1}")
    return int(relative_order(tau[: m - j]) == relative_order(tau[j:]))


def _check_dims(n: int, m: int) -> None:
    if m < 3 or n < m:
        raise InvalidPatternDims(f"need n >= m >= 3, got n={n}, m={m}")


def pattern_mean(n: int, m: int) -> Fraction:
    _check_dims(n, m)
    return Fraction(n, math.factorial(m))


def pattern_variance(n: int, tau: Permutation) -> Fraction:
    """Closed-form variance n(1/m! (1 - (2m-1)/m!) + 2 sum_j I_j / (m+j)!).

    The overlap term counts one joint arrangement per consistent shift,
    which is exact for monotone patterns only; other patterns can have
    several arrangements (see :func:`pattern_variance_exact`).
    """
    m = len(tau)
    _check_dims(n, m)
    f = math.factorial(m)
    overlap = sum(
        Fraction(relative_order_indicator(tau, j), math.factorial(m + j))
        for j in range(1, m)
    )
    return n * (Fraction(1, f) * (1 - Fraction(2 * m - 1, f)) + 2 * overlap)


def _two_chain_extensions(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of total orders on set(a) | set(b) extending both chains."""
    shared = set(a) & set(b)
    if [x for x in a if x in shared] != [x for x in b if x in shared]:
        return 0
    # states (i, j): prefixes a[:i], b[:j] placed; shared elements advance both
    ways = {(0, 0): 1}
    for _ in range(len(set(a) | set(b))):
        nxt: dict[tuple[int, int], int] = {}
        for (i, j), w in ways.items():
            x = a[i] if i < len(a) else None
            y = b[j] if j < len(b) else None
            moves = []
            if x is not None and x not in shared:
                moves.append((i + 1, j))
            if y is not None and y not in shared:
                moves.append((i, j + 1))
            if x is not None and x == y:
                moves.append((i + 1, j + 1))
            for st in moves:
                nxt[st] = nxt.get(st, 0) + w
        ways = nxt
    return sum(ways.values())


def joint_occurrence_probability(n: int, tau: Permutation, d: int) -> Fraction:
    """P(tau appears at locations 1 and 1+d) for a uniform pi in S_n."""
    m = len(tau)
    inv = inverse(tuple(tau))
    # each window as a chain of positions in increasing value order
    chain1 = [t - 1 for t in inv]
    chain2 = [(t - 1 + d) % n for t in inv]
    if d % n == 0:
        return Fraction(1, math.factorial(m))
    union = len(set(chain1) | set(chain2))
    return Fraction(_two_chain_extensions(chain1, chain2), math.factorial(union))


def pattern_variance_exact(n: int, tau: Permutation) -> Fraction:
    """Var of the circular count of tau, summing covariances over all shifts."""
    m = len(tau)
    _check_dims(n, m)
    p = Fraction(1, math.factorial(m))
    total = Fraction(0)
    for d in range(n):
        if m <= d <= n - m:
            continue  # disjoint windows are independent
        total += joint_occurrence_probability(n, tau, d) - p * p
    return n * total


def sort_window_perm(pi: Permutation, s: int, m: int) -> Permutation:
    """sigma_s with pi(sigma_s(1)+s-1) < ... < pi(sigma_s(m)+s-1)."""
    vals = _window_values(pi, s, m)
    return tuple(a + 1 for a in sorted(range(m), key=vals.__getitem__))


def reorder(pi: Permutation, tau: Permutation, beta: int) -> Permutation:
    """Rearrange the values on window V_beta so they follow pattern tau."""
    n, m = len(pi), len(tau)
    sigma = sort_window_perm(pi, beta, m)
    out = list(pi)
    for a in range(1, m + 1):
        src = (sigma[tau[a - 1] - 1] + beta - 2) % n
        out[(a + beta - 2) % n] = pi[src]
    return tuple(out)


def permutation_from_uniforms(u: Sequence[float], n: int) -> Permutation:
    """Fisher-Yates shuffle of (1..n) driven by n-1 uniforms."""
    arr = list(range(1, n + 1))
    for step, r in enumerate(range(n - 1, 0, -1)):
        j = index_from_uniform(u[step], r + 1)
        arr[r], arr[j] = arr[j], arr[r]
    return tuple(arr)


def pair_from_uniforms(model: PatternModel, i: int, u: Sequence[float]) -> SampledPair:
    """Coupled pair from n uniforms: u[0] picks beta, u[1:] shuffles."""
    n = model.n
    beta = index_from_uniform(u[0], n) + 1
    pi = permutation_from_uniforms(u[1:], n)
    w = count_vector(pi, model)
    if model.coupling == "identity":
        wb = w
    else:
        wb = count_vector(reorder(pi, model.patterns[i - 1], beta), model)
    return SampledPair(tuple(map(float, w)), tuple(map(float, wb)), i)


def sample_pattern_coupling(model: PatternModel, i: int, rng: np.random.Generator) -> SampledPair:
    if not 1 <= i <= model.k:
        raise IndexError(f"direction {i} outside 1..{model.k}")
    return pair_from_uniforms(model, i, rng.random(model.n))


# vectorized batch path used by the harness ------------------------------------


def _pattern_codes(tau_rows: np.ndarray, m: int) -> np.ndarray:
    weights = m ** np.arange(m, dtype=np.int64)
    return (tau_rows.astype(np.int64) - 1) @ weights


def batch_counts(perms: np.ndarray, model: PatternModel) -> np.ndarray:
    """Counts for a (B, n) array of permutations; returns (B, k) ints."""
    n, m = model.n, model.m
    idx = (np.arange(n)[:, None] + np.arange(m)[None, :]) % n
    vals = perms[:, idx]
    ranks = np.argsort(np.argsort(vals, axis=-1, kind="stable"), axis=-1, kind="stable")
    codes = ranks @ (m ** np.arange(m, dtype=np.int64))
    targets = _pattern_codes(np.array(model.patterns), m)
    return (codes[:, :, None] == targets[None, None, :]).sum(axis=1)


def batch_permutations(U: np.ndarray, n: int) -> np.ndarray:
    """Row-wise Fisher-Yates, identical to :func:`permutation_from_uniforms`."""
    B = U.shape[0]
    arr = np.tile(np.arange(1, n + 1, dtype=np.int64), (B, 1))
    rows = np.arange(B)
    for step, r in enumerate(range(n - 1, 0, -1)):
        j = index_from_uniform(U[:, step], r + 1)
        tmp = arr[rows, j].copy()
        arr[rows, j] = arr[:, r]
        arr[:, r] = tmp
    return arr


def batch_reorder(perms: np.ndarray, tau: Permutation, beta0: np.ndarray) -> np.ndarray:
    """Vectorized :func:`reorder` with 0-based window starts ``beta0``."""
    n = perms.shape[1]
    m = len(tau)
    rows = np.arange(perms.shape[0])[:, None]
    pos = (beta0[:, None] + np.arange(m)[None, :]) % n
    window_sorted = np.sort(perms[rows, pos], axis=1)
    out = perms.copy()
    out[rows, pos] = window_sorted[:, np.asarray(tau) - 1]
    return out


def batch_pairs(model: PatternModel, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """W of shape (B, k) and W^i for every direction, shape (B, k, k).

    Row b uses the uniforms U[b] exactly as :func:`pair_from_uniforms` does,
    so ``W_dirs[b, i-1]`` equals the scalar sampler's ``w_biased``.
    """
    n = model.n
    beta0 = index_from_uniform(U[:, 0], n)
    perms = batch_permutations(U[:, 1:], n)
    w = batch_counts(perms, model)
    dirs = np.empty((U.shape[0], model.k, model.k), dtype=np.int64)
    for i, tau in enumerate(model.patterns):
        if model.coupling == "identity":
            dirs[:, i, :] = w
        else:
            dirs[:, i, :] = batch_counts(batch_reorder(perms, tau, beta0), model)
    return w, dirs
