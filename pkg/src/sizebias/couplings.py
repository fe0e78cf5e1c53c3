"""Size-biased coupling constructions.

Two constructions live here:

* independent coordinates: replace coordinate i by an independent draw from
  its size-biased law and keep the rest;
* local dependence: W_i is a function of independent components C_v over a
  neighborhood V_i. Redraw the components on V_i from the W_i-tilted law,
  independently of everything else, and recompute every statistic.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any

import numpy as np

from .errors import DegenerateCoordinate, ModelSpecError, NeighborhoodTooLarge
from .model import Pmf, as_fraction, size_bias_exact
from .rng import categorical

DEFAULT_NEIGHBORHOOD_CAP = 2**20

STATISTIC_KINDS = ("window_product", "window_sum", "table")


@dataclass(frozen=True)
class SampledPair:
    w: tuple[float, ...]
    w_biased: tuple[float, ...]
    direction: int

    def distance(self) -> float:
        return math.dist(self.w, self.w_biased)


def _cdf(probs: Sequence[Fraction]) -> np.ndarray:
    return np.cumsum([float(p) for p in probs])


@functools.lru_cache(maxsize=None)
def _pmf_sampler(pmf: Pmf) -> tuple[tuple, np.ndarray]:
    return pmf.support, _cdf([p for _, p in pmf.atoms])


def draw(pmf: Pmf, u: float) -> tuple[Fraction, ...]:
    """Inverse-CDF draw of one atom of ``pmf`` from a uniform ``u``."""
    support, cdf = _pmf_sampler(pmf)
    return support[categorical(u, cdf)]


# independent coordinates --------------------------------------------------------


@dataclass(frozen=True)
class IndependentModel:
    components: tuple[Pmf, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ModelSpecError("need at least one component")
        if any(c.k != 1 for c in comps):
            raise ModelSpecError("independent components must be univariate")
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        return len(self.components)

    def to_json(self) -> dict:
        return {"type": "independent", "components": [c.to_json() for c in self.components]}


def _single_coordinate_radius(pmf: Pmf) -> Fraction:
    biased = size_bias_exact(pmf, 1).support
    return max(abs(a[0] - b[0]) for a in biased for b in pmf.support)


def coupling_radius_independent(components: Sequence[Pmf]) -> float:
    """Largest possible |W_i^i - W_i| over all directions with positive mean."""
    radii = [
        _single_coordinate_radius(c)
        for c in components
        if any(x[0] != 0 for x in c.support)
    ]
    return float(max(radii))


def sample_independent_coupling(
    components: Sequence[Pmf], i: int, rng: np.random.Generator
) -> SampledPair:
    k = len(components)
    if not 1 <= i <= k:
        raise IndexError(f"direction {i} outside 1..{k}")
    return independent_pair_from_uniforms(tuple(components), i, rng.random(k + 1))


def independent_pair_from_uniforms(
    components: tuple[Pmf, ...], i: int, u: Sequence[float]
) -> SampledPair:
    """u[0..k-1] draw W, u[k] draws the replacement for coordinate i."""
    biased = _biased_component(components[i - 1], i)
    w = [draw(c, u[j])[0] for j, c in enumerate(components)]
    wb = list(w)
    wb[i - 1] = draw(biased, u[len(components)])[0]
    return SampledPair(tuple(map(float, w)), tuple(map(float, wb)), i)


def independent_batch(
    components: tuple[Pmf, ...], U: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`independent_pair_from_uniforms` for all directions.

    Returns W of shape (B, k) and W^i of shape (B, k, k); row b matches the
    scalar construction on ``U[b]``.
    """
    k = len(components)
    w = np.empty((U.shape[0], k))
    for j, c in enumerate(components):
        w[:, j] = _draw_batch(c, U[:, j])
    dirs = np.repeat(w[:, None, :], k, axis=1)
    for i, c in enumerate(components, start=1):
        if any(x[0] != 0 for x in c.support):
            dirs[:, i - 1, i - 1] = _draw_batch(_biased_component(c, i), U[:, k])
        else:
            dirs[:, i - 1, i - 1] = np.nan
    return w, dirs


def _draw_batch(pmf: Pmf, u: np.ndarray) -> np.ndarray:
    support, cdf = _pmf_sampler(pmf)
    values = np.array([float(x[0]) for x in support])
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return values[idx]


@functools.lru_cache(maxsize=None)
def _biased_component(pmf: Pmf, i: int) -> Pmf:
    if all(x[0] == 0 for x in pmf.support):
        raise DegenerateCoordinate(i, "mean")
    return size_bias_exact(pmf, 1)


# local dependence ---------------------------------------------------------------


@dataclass(frozen=True)
class LocalDependenceModel:
    """Statistics W_i = W_i(C_v, v in V_i) of independent components.

    ``neighborhoods[i-1]`` lists V_i (1-based component indices) in the order
    the statistic reads them. For ``kind == "table"`` each entry of
    ``tables`` maps the tuple of component values on V_i to W_i.
    """

    components: tuple[Pmf, ...]
    neighborhoods: tuple[tuple[int, ...], ...]
    kind: str
    M: Fraction
    tables: tuple[tuple[tuple[tuple[Fraction, ...], Fraction], ...], ...] = ()
    cap: int = DEFAULT_NEIGHBORHOOD_CAP

    def __post_init__(self):
        comps = tuple(self.components)
        if any(c.k != 1 for c in comps):
            raise ModelSpecError("components must be univariate pmfs")
        hoods = tuple(tuple(int(v) for v in h) for h in self.neighborhoods)
        n = len(comps)
        for i, h in enumerate(hoods, start=1):
            if not h:
                raise ModelSpecError(f"neighborhood {i} is empty")
            if len(set(h)) != len(h) or not all(1 <= v <= n for v in h):
                raise ModelSpecError(f"neighborhood {i} = {h} is not a subset of 1..{n}")
        if self.kind not in STATISTIC_KINDS:
            raise ModelSpecError(f"unknown statistic kind {self.kind!r}")
        tables = tuple(
            tuple((tuple(as_fraction(c) for c in key), as_fraction(v)) for key, v in t)
            for t in self.tables
        )
        if self.kind == "table" and len(tables) != len(hoods):
            raise ModelSpecError("table statistic needs one table per neighborhood")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "neighborhoods", hoods)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "M", as_fraction(self.M))
        for i in range(1, len(hoods) + 1):
            try:
                space = list(neighborhood_space(self, i))
            except NeighborhoodTooLarge:
                continue  # reported when the coupling is actually requested
            for vals, _ in space:
                w = self.statistic(i, vals)
                if not 0 <= w <= self.M:
                    raise ModelSpecError(
                        f"W_{i}{tuple(map(str, vals))} = {w} outside [0, M={self.M}]"
                    )

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def k(self) -> int:
        return len(self.neighborhoods)

    def statistic(self, i: int, values: Sequence[Fraction]) -> Fraction:
        """W_i evaluated on the component values listed for V_i."""
        if self.kind == "window_product":
            return math.prod(values, start=Fraction(1))
        if self.kind == "window_sum":
            return sum(values, Fraction(0))
        table = _table_dict(self.tables[i - 1])
        try:
            return table[tuple(values)]
        except KeyError:
            raise ModelSpecError(f"table {i} has no entry for {tuple(map(str, values))}") from None

    def statistics(self, c: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """The full vector W for a complete component assignment c (0-based list)."""
        return tuple(
            self.statistic(i, [c[v - 1] for v in h])
            for i, h in enumerate(self.neighborhoods, start=1)
        )

    def to_json(self) -> dict:
        stat: dict[str, Any] = {"kind": self.kind}
        if self.kind == "table":
            stat["tables"] = [
                [{"c": [str(x) for x in key], "w": str(v)} for key, v in t]
                for t in self.tables
            ]
        return {
            "type": "local",
            "n": self.n,
            "components": [c.to_json() for c in self.components],
            "neighborhoods": [list(h) for h in self.neighborhoods],
            "statistic": stat,
            "M": str(self.M),
        }


@functools.lru_cache(maxsize=None)
def _table_dict(table) -> Mapping:
    return dict(table)


def neighborhood_space(model: LocalDependenceModel, i: int):
    """Every (values on V_i, probability) in the product space, exactly."""
    comps = [model.components[v - 1] for v in model.neighborhoods[i - 1]]
    size = math.prod(len(c) for c in comps)
    if size > model.cap:
        raise NeighborhoodTooLarge(i, size, model.cap)
    for combo in product(*(c.atoms for c in comps)):
        yield tuple(x[0] for x, _ in combo), math.prod((p for _, p in combo), start=Fraction(1))


def statistic_law(model: LocalDependenceModel, i: int) -> Pmf:
    """Exact law of W_i alone."""
    return Pmf([(model.statistic(i, vals), p) for vals, p in neighborhood_space(model, i)])


def statistic_mean(model: LocalDependenceModel, i: int) -> Fraction:
    return sum(
        (model.statistic(i, vals) * p for vals, p in neighborhood_space(model, i)),
        Fraction(0),
    )


@functools.lru_cache(maxsize=None)
def tilted_law(model: LocalDependenceModel, i: int) -> tuple[tuple[tuple[Fraction, ...], Fraction], ...]:
    """The W_i-tilted joint law of the components on V_i, exactly."""
    weighted = [(vals, model.statistic(i, vals) * p) for vals, p in neighborhood_space(model, i)]
    total = sum((w for _, w in weighted), Fraction(0))
    if total == 0:
        raise DegenerateCoordinate(i, "mean")
    return tuple((vals, w / total) for vals, w in weighted if w != 0)


@functools.lru_cache(maxsize=None)
def _tilted_sampler(model: LocalDependenceModel, i: int):
    law = tilted_law(model, i)
    return [vals for vals, _ in law], _cdf([p for _, p in law])


def local_pair_from_uniforms(
    model: LocalDependenceModel, i: int, u: Sequence[float]
) -> SampledPair:
    """u[0..n-1] draw the components, u[n] draws the tilted block on V_i."""
    c = [draw(comp, u[v])[0] for v, comp in enumerate(model.components)]
    support, cdf = _tilted_sampler(model, i)
    replacement = support[categorical(u[model.n], cdf)]
    c_biased = list(c)
    for v, val in zip(model.neighborhoods[i - 1], replacement):
        c_biased[v - 1] = val
    w = model.statistics(c)
    wb = model.statistics(c_biased)
    return SampledPair(tuple(map(float, w)), tuple(map(float, wb)), i)


@functools.lru_cache(maxsize=None)
def _statistic_table(model: LocalDependenceModel, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Mixed-radix strides over atom indices on V_i and float(W_i) per code."""
    sizes = [len(model.components[v - 1]) for v in model.neighborhoods[i - 1]]
    strides = np.array([math.prod(sizes[a + 1:]) for a in range(len(sizes))], dtype=np.int64)
    values = np.array([float(model.statistic(i, vals)) for vals, _ in neighborhood_space(model, i)])
    return strides, values


@functools.lru_cache(maxsize=None)
def _tilted_index_sampler(model: LocalDependenceModel, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Atom indices of every tilted-law outcome on V_i, with its CDF."""
    hood = model.neighborhoods[i - 1]
    position = [{x[0]: a for a, x in enumerate(model.components[v - 1].support)} for v in hood]
    support, cdf = _tilted_sampler(model, i)
    idx = np.array([[position[a][val] for a, val in enumerate(vals)] for vals in support])
    return idx, cdf


def _local_statistics(model: LocalDependenceModel, idx: np.ndarray) -> np.ndarray:
    w = np.empty((idx.shape[0], model.k))
    for i, hood in enumerate(model.neighborhoods, start=1):
        strides, values = _statistic_table(model, i)
        w[:, i - 1] = values[idx[:, [v - 1 for v in hood]] @ strides]
    return w


def local_batch(model: LocalDependenceModel, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`local_pair_from_uniforms` for all directions.

    Returns W of shape (B, k) and W^i of shape (B, k, k); row b matches the
    scalar construction on ``U[b]``.
    """
    idx = np.empty((U.shape[0], model.n), dtype=np.int64)
    for v, comp in enumerate(model.components):
        _, cdf = _pmf_sampler(comp)
        idx[:, v] = np.minimum(np.searchsorted(cdf, U[:, v], side="right"), len(cdf) - 1)
    w = _local_statistics(model, idx)
    dirs = np.empty((U.shape[0], model.k, model.k))
    for i, hood in enumerate(model.neighborhoods, start=1):
        choices, cdf = _tilted_index_sampler(model, i)
        r = np.minimum(np.searchsorted(cdf, U[:, model.n], side="right"), len(cdf) - 1)
        biased = idx.copy()
        biased[:, [v - 1 for v in hood]] = choices[r]
        dirs[:, i - 1] = _local_statistics(model, biased)
    return w, dirs


def sample_local_coupling(
    model: LocalDependenceModel, i: int, rng: np.random.Generator
) -> SampledPair:
    if not 1 <= i <= model.k:
        raise IndexError(f"direction {i} outside 1..{model.k}")
    return local_pair_from_uniforms(model, i, rng.random(model.n + 1))


def overlap_degree(model: LocalDependenceModel) -> int:
    """b = max_i #{j : V_j meets V_i}."""
    sets = [set(h) for h in model.neighborhoods]
    return max(sum(1 for other in sets if other & s) for s in sets)


def coupling_radius_local(model: LocalDependenceModel) -> float:
    return math.sqrt(overlap_degree(model)) * float(model.M)


def observed_statistic_max(model: LocalDependenceModel) -> Fraction:
    """Largest value any W_i actually takes; compare with the declared M."""
    return max(
        model.statistic(i, vals)
        for i in range(1, model.k + 1)
        for vals, _ in neighborhood_space(model, i)
    )


def window_model(
    n: int,
    width: int,
    component: Pmf,
    kind: str = "window_product",
    M: Any = None,
) -> LocalDependenceModel:
    """Cyclic model with V_i = {i, ..., i+width-1} (mod n) and shared components."""
    hoods = tuple(tuple((i - 1 + a) % n + 1 for a in range(width)) for i in range(1, n + 1))
    top = max(x[0] for x in component.support)
    if M is None:
        M = top**width if kind == "window_product" else top * width
    return LocalDependenceModel((component,) * n, hoods, kind, M)
