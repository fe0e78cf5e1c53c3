"""Seeded Monte Carlo checks of couplings and tail bounds.

Sample j is always generated from ``rng.stream(seed, j)``. Workers only
decide who computes which block of indices, and every statistic is computed
afterwards from the reassembled arrays in index order, so reports do not
depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from . import bounds as _bounds
from .couplings import (
    IndependentModel,
    LocalDependenceModel,
    coupling_radius_independent,
    coupling_radius_local,
    independent_batch,
    local_batch,
    statistic_law,
)
from .errors import DegenerateCoordinate
from .model import MomentSummary, moments
from .patterns import PatternModel, batch_pairs, pattern_mean, pattern_variance_exact
from .rng import check_seed, uniform_block

Model = Union[PatternModel, LocalDependenceModel, IndependentModel]

EXP_CAP = 1e6
RADIUS_SLACK = 1e-12  # relative float slack when comparing distances with K


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    workers: int = 1
    z_tol: float = 3.0
    block: int = 4096

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        check_seed(self.seed)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.z_tol > 0:
            raise ValueError("z_tol must be > 0")


# model-level exact quantities -----------------------------------------------------


def exact_moments(model: Model) -> MomentSummary:
    """Exact means and variances of every coordinate of W."""
    if isinstance(model, PatternModel):
        mu = pattern_mean(model.n, model.m)
        return MomentSummary(
            (mu,) * model.k,
            tuple(pattern_variance_exact(model.n, tau) for tau in model.patterns),
        )
    if isinstance(model, IndependentModel):
        per = [moments(c, check=False) for c in model.components]
        return MomentSummary(tuple(m.mu[0] for m in per), tuple(m.sigma2[0] for m in per))
    per = [moments(statistic_law(model, i), check=False) for i in range(1, model.k + 1)]
    return MomentSummary(tuple(m.mu[0] for m in per), tuple(m.sigma2[0] for m in per))


def coupling_radius(model: Model) -> float:
    """The almost-sure bound K on ||W^i - W||_2 guaranteed by the construction."""
    if isinstance(model, PatternModel):
        return model.radius
    if isinstance(model, IndependentModel):
        return coupling_radius_independent(model.components)
    return coupling_radius_local(model)


def model_bound_params(model: Model, mom: MomentSummary | None = None) -> _bounds.BoundParams:
    mom = mom or exact_moments(model)
    for j, (m, s2) in enumerate(zip(mom.mu, mom.sigma2), start=1):
        if m == 0 or s2 == 0:
            raise DegenerateCoordinate(j)
    return _bounds.bound_params(
        [float(m) for m in mom.mu],
        [math.sqrt(s2) for s2 in mom.sigma2],
        coupling_radius(model),
    )


# sampling -------------------------------------------------------------------------


def _uniform_width(model: Model) -> int:
    if isinstance(model, PatternModel):
        return model.n
    if isinstance(model, IndependentModel):
        return model.k + 1
    return model.n + 1


def _sample_block(model: Model, seed: int, start: int, stop: int):
    U = uniform_block(seed, start, stop, _uniform_width(model))
    if isinstance(model, PatternModel):
        w, dirs = batch_pairs(model, U)
        return w.astype(float), dirs.astype(float)
    if isinstance(model, IndependentModel):
        return independent_batch(model.components, U)
    return local_batch(model, U)


def draw_samples(model: Model, cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """W with shape (N, k) and W^i for all directions with shape (N, k, k)."""
    starts = list(range(0, cfg.samples, cfg.block))
    stops = [min(s + cfg.block, cfg.samples) for s in starts]
    if cfg.workers > 1 and len(starts) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(
                pool.map(
                    _sample_block,
                    [model] * len(starts),
                    [cfg.seed] * len(starts),
                    starts,
                    stops,
                )
            )
    else:
        parts = [_sample_block(model, cfg.seed, a, b) for a, b in zip(starts, stops)]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


# test functions ---------------------------------------------------------------------


@dataclass
class TestFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    capped: bool = False

    __test__ = False  # not a pytest class


def canonical_functions(W: np.ndarray, radius: float) -> list[TestFunction]:
    """Constant, projections, pairwise products, capped exponentials and
    upper-orthant indicators at the empirical quartiles of ``W``."""
    k = W.shape[1]
    out = [TestFunction("one", lambda x: np.ones(x.shape[0]))]
    for j in range(k):
        out.append(TestFunction(f"x{j + 1}", lambda x, j=j: x[:, j]))
    for j in range(k):
        for l in range(j, k):
            out.append(TestFunction(f"x{j + 1}*x{l + 1}", lambda x, j=j, l=l: x[:, j] * x[:, l]))
    c = radius if radius > 0 else 1.0
    for j in range(k):
        out.append(
            TestFunction(
                f"capexp(x{j + 1}/{c:.6g})",
                lambda x, j=j: np.minimum(np.exp(np.minimum(x[:, j] / c, 700.0)), EXP_CAP),
                capped=True,
            )
        )
    for q in (25, 50, 75):
        level = np.percentile(W, q, axis=0)
        label = ",".join(f"{v:.6g}" for v in level)
        out.append(
            TestFunction(
                f"orthant(q{q}=[{label}])",
                lambda x, level=level: np.all(x >= level, axis=1).astype(float),
            )
        )
    return out


def _cap_hits(x: np.ndarray, radius: float) -> int:
    c = radius if radius > 0 else 1.0
    return int(np.count_nonzero(x / c > math.log(EXP_CAP)))


# report pieces ------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityGap:
    direction: int
    function: str
    lhs: float  # mean(W_i f(W)) / mu_i
    rhs: float  # mean(f(W^i))
    gap: float
    se: float
    passed: bool


@dataclass(frozen=True)
class RadiusCheck:
    direction: int
    K: float
    max_observed: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class TailRow:
    t_norm: float
    emp_lower: float
    bound_lower: float
    emp_upper: float
    bound_upper: float
    se: float
    passed: bool


CSV_COLUMNS = ("t_norm", "emp_lower", "bound_lower", "emp_upper", "bound_upper", "se", "pass")


def identity_gaps(
    W: np.ndarray,
    Wi: np.ndarray,
    mu_i: float,
    i: int,
    functions: Sequence[TestFunction],
    z_tol: float,
) -> list[IdentityGap]:
    """Paired estimates of E[W_i f(W)]/mu_i - E[f(W^i)] for each f."""
    n = W.shape[0]
    out = []
    for f in functions:
        a = W[:, i - 1] * f.fn(W) / mu_i
        b = f.fn(Wi)
        d = a - b
        gap = float(np.mean(d))
        se = float(np.std(d, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        out.append(
            IdentityGap(i, f.name, float(np.mean(a)), float(np.mean(b)), gap, se, abs(gap) <= z_tol * se)
        )
    return out


def radius_check(W: np.ndarray, Wi: np.ndarray, K: float, i: int) -> RadiusCheck:
    dist = np.sqrt(np.sum((Wi - W) ** 2, axis=1))
    violations = int(np.count_nonzero(dist > K * (1 + RADIUS_SLACK)))
    return RadiusCheck(i, float(K), float(dist.max()), violations)


def _t_vector(t, k: int) -> np.ndarray:
    """A scalar grid entry is a norm spread evenly over k coordinates."""
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    if tv.size == 1:
        tv = np.full(k, float(tv[0]) / math.sqrt(k))
    return tv


def tail_rows(
    W: np.ndarray,
    mu: Sequence[float],
    sigma: Sequence[float],
    params: _bounds.BoundParams,
    grid: Sequence,
    z_tol: float,
) -> list[TailRow]:
    n, k = W.shape
    Z = (W - np.asarray(mu, dtype=float)) / np.asarray(sigma, dtype=float)
    rows = []
    for t in grid:
        tv = _t_vector(t, k)
        t_norm = float(t) if np.ndim(t) == 0 else float(np.linalg.norm(tv))
        low = int(np.count_nonzero(np.all(Z <= -tv, axis=1)))
        up = int(np.count_nonzero(np.all(Z >= tv, axis=1)))
        p_lo, p_up = low / n, up / n
        se = max(math.sqrt(p * (1 - p) / n) for p in (p_lo, p_up))
        b_lo = _bounds.lower_tail_bound(params, tv)
        b_up = _bounds.upper_tail_bound(params, tv)
        ok = p_lo <= b_lo + z_tol * se and p_up <= b_up + z_tol * se
        rows.append(TailRow(t_norm, p_lo, b_lo, p_up, b_up, se, ok))
    return rows


# public single-purpose runs ------------------------------------------------------------


def mc_verify_identity(
    model: Model,
    i: int,
    cfg: McConfig,
    functions: Sequence[TestFunction] | None = None,
) -> list[IdentityGap]:
    W, dirs = draw_samples(model, cfg)
    mu = exact_moments(model).mu
    if functions is None:
        functions = canonical_functions(W, coupling_radius(model))
    return identity_gaps(W, dirs[:, i - 1], float(mu[i - 1]), i, functions, cfg.z_tol)


def mc_verify_radius(model: Model, K: float, cfg: McConfig) -> list[RadiusCheck]:
    W, dirs = draw_samples(model, cfg)
    return [radius_check(W, dirs[:, i], K, i + 1) for i in range(model.k)]


def mc_tail_curves(
    model: Model, grid: Sequence, cfg: McConfig, params: _bounds.BoundParams | None = None
) -> list[TailRow]:
    mom = exact_moments(model)
    params = params or model_bound_params(model, mom)
    W, _ = draw_samples(model, cfg)
    return tail_rows(W, params.mu, params.sigma, params, grid, cfg.z_tol)


# full verification -------------------------------------------------------------------


DEFAULT_GRID = (0.0, 0.5, 1.0, 2.0, 4.0)


@dataclass
class VerificationReport:
    model: dict
    samples: int
    seed: int
    z_tol: float
    mu: tuple[Fraction, ...]
    sigma2: tuple[Fraction, ...]
    K: float
    identity: list[IdentityGap]
    radius: list[RadiusCheck]
    tails: list[TailRow]
    cap_events: int = 0
    bound_constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (
            all(g.passed for g in self.identity)
            and all(r.passed for r in self.radius)
            and all(t.passed for t in self.tails)
        )

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "samples": self.samples,
            "seed": self.seed,
            "z_tol": self.z_tol,
            "mu": [str(m) for m in self.mu],
            "sigma2": [str(s) for s in self.sigma2],
            "K": self.K,
            "bound_constants": self.bound_constants,
            "identity": [asdict(g) for g in self.identity],
            "radius": [dict(asdict(r), passed=r.passed) for r in self.radius],
            "tails": [asdict(t) for t in self.tails],
            "cap_events": self.cap_events,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.tails:
            writer.writerow(
                [_fmt(r.t_norm), _fmt(r.emp_lower), _fmt(r.bound_lower), _fmt(r.emp_upper),
                 _fmt(r.bound_upper), _fmt(r.se), "true" if r.passed else "false"]
            )
        return buf.getvalue()


def read_tail_csv(text: str) -> list[TailRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
    return [
        TailRow(
            float(r["t_norm"]), float(r["emp_lower"]), float(r["bound_lower"]),
            float(r["emp_upper"]), float(r["bound_upper"]), float(r["se"]),
            r["pass"] == "true",
        )
        for r in reader
    ]


def verify(model: Model, cfg: McConfig, grid: Sequence = DEFAULT_GRID,
           directions: Sequence[int] | None = None) -> VerificationReport:
    """One sampling run; identity, radius and tail checks for every direction."""
    mom = exact_moments(model)
    params = model_bound_params(model, mom)
    K = params.K
    W, dirs = draw_samples(model, cfg)
    functions = canonical_functions(W, K)
    directions = list(directions or range(1, model.k + 1))
    gaps: list[IdentityGap] = []
    radii: list[RadiusCheck] = []
    caps = 0
    for i in directions:
        Wi = dirs[:, i - 1]
        gaps.extend(identity_gaps(W, Wi, float(mom.mu[i - 1]), i, functions, cfg.z_tol))
        radii.append(radius_check(W, Wi, K, i))
        caps += _cap_hits(Wi, K)
    caps += _cap_hits(W, K) * len(directions)
    constants = {"K1": params.K1, "K2": params.K2}
    if isinstance(model, PatternModel):
        p1, p2 = _bounds.pattern_bound_params(model.n, model.m, model.k)
        d1, d2 = _bounds.pattern_bound_params_derived(model.n, model.m, model.k)
        constants.update(pattern_K1=p1, pattern_K2=p2, pattern_K1_derived=d1, pattern_K2_derived=d2)
    return VerificationReport(
        model=model.to_json(),
        samples=cfg.samples,
        seed=cfg.seed,
        z_tol=cfg.z_tol,
        mu=mom.mu,
        sigma2=mom.sigma2,
        K=K,
        identity=gaps,
        radius=radii,
        tails=tail_rows(W, params.mu, params.sigma, params, grid, cfg.z_tol),
        cap_events=caps,
        bound_constants=constants,
    )


# lossless JSON -----------------------------------------------------------------------


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with floats at 17 significant digits and Fractions as "num/den"."""
    return _encode(obj, indent, 0) + "\n"
