"""Chebyshev evaluation and the randomized experiment harness.

Test functions are random series with product weights: a keyed hash drives
both a permutation that shuffles coordinate importance and the signed
magnitudes of the coefficients, so every function is reproducible from
``(dimension, seed)`` alone, across platforms and process boundaries.  The
smoothness table is cut off at degree four, which keeps each function an
exactly representable polynomial: residual norms and grids of residual
values are computed from the full finite term set with no truncation error.

The harness runs the probe-and-infer pipeline per ``(dimension, tolerance,
seed)`` cell, measures true errors against the certified tolerance, and
emits CSV and JSON-lines rows in deterministic order.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .approximation import ApproxOutcome, DEFAULT_BUDGET_CAP
from .enumeration import WavenumberStream
from .inference import CandidateSets, approximate_with_inferred_weights
from .spaces import CoefficientOracle, SpaceConfig
from .weights import TableDecay, WeightModel

__all__ = [
    "RandomSeriesFunction",
    "make_random_function",
    "EvaluationGrid",
    "chebyshev_eval",
    "residual_terms",
    "grid_sup",
    "ExperimentConfig",
    "ExperimentRow",
    "run_experiment",
    "write_csv",
    "write_jsonl",
    "CSV_HEADER",
]

Wavenumber = Tuple[int, ...]

_SMOOTHNESS_TABLE = (1.0, 1.0 / 16.0, 1.0 / 81.0, 1.0 / 256.0)


def _unit_hash(key: bytes, message: str) -> float:
    """Deterministic uniform draw in [0, 1) from a keyed 64-bit hash."""
    digest = hashlib.blake2b(message.encode(), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "big") / 2.0 ** 64


@dataclass(frozen=True)
class RandomSeriesFunction:
    """Random polynomial with shuffled product weights and signed noise.

    ``model`` holds the generating weights; the coefficient at ``k`` is that
    weight times a uniform sign-and-magnitude draw in [-1, 1).  Weights are
    ``1 / rank**2`` with ranks given by a seeded permutation, and smoothness
    ``1 / degree**4`` up to degree four, zero beyond.
    """

    dimension: int
    seed: int
    permutation: tuple
    model: WeightModel = field(compare=False)

    def noise(self, k: Wavenumber) -> float:
        key = _seed_key(self.seed)
        u = _unit_hash(key, "coef:" + ",".join(map(str, k)))
        return 2.0 * u - 1.0

    def coefficient(self, k: Wavenumber) -> float:
        lam = self.model.weight(k)
        return self.noise(k) * lam if lam != 0.0 else 0.0

    def oracle(self) -> CoefficientOracle:
        return CoefficientOracle.from_function(self.coefficient)

    def support(self) -> List[Tuple[Wavenumber, float]]:
        """Every nonzero-coefficient wavenumber with its coefficient."""
        out = []
        for k, lam in WavenumberStream(self.model):
            c = self.noise(k) * lam
            if c != 0.0:
                out.append((k, c))
        return out


def _seed_key(seed: int) -> bytes:
    return hashlib.blake2b(f"series-seed:{seed}".encode(), digest_size=16).digest()


def make_random_function(dimension: int, seed: int) -> RandomSeriesFunction:
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    key = _seed_key(seed)
    ranks = list(range(1, dimension + 1))
    for i in range(dimension - 1, 0, -1):
        j = int(_unit_hash(key, f"perm:{i}") * (i + 1))
        ranks[i], ranks[j] = ranks[j], ranks[i]
    weights = tuple(1.0 / r ** 2 for r in ranks)
    model = WeightModel(
        dimension=dimension,
        coordinate_weights=weights,
        decay=TableDecay(_SMOOTHNESS_TABLE, 0.0),
    )
    return RandomSeriesFunction(dimension, seed, tuple(ranks), model)


def chebyshev_eval(terms: Iterable[Tuple[Wavenumber, float]], x: Sequence[float]) -> float:
    """Evaluate sum of coef * prod_l T_{k_l}(x_l) at one point in [-1, 1]^d."""
    point = [float(v) for v in x]
    if any(abs(v) > 1.0 for v in point):
        raise ValueError("evaluation point must lie in [-1, 1]^d")
    thetas = [math.acos(v) for v in point]
    total = 0.0
    for k, coef in terms:
        value = float(coef)
        for axis, degree in enumerate(k):
            if degree:
                value *= math.cos(degree * thetas[axis])
        total += value
    return total


def _first_primes(count: int) -> List[int]:
    primes: List[int] = []
    n = 2
    while len(primes) < count:
        if all(n % p for p in primes):
            primes.append(n)
        n += 1
    return primes


def _radical_inverse(base: int, index: int) -> float:
    inv, scale = 0.0, 1.0 / base
    while index:
        inv += scale * (index % base)
        index //= base
        scale /= base
    return inv


class EvaluationGrid:
    """Point set in [-1, 1]^d for residual evaluation.

    Tensor grids keep only the per-axis Chebyshev-extrema angles and exploit
    the product structure; scatter grids hold low-discrepancy points
    explicitly.  ``for_dimension`` picks tensor up to ``tensor_limit`` axes
    and scatter beyond, where a tensor grid would be astronomically large.
    """

    def __init__(self, dimension: int, kind: str, axis_angles=None, points=None):
        if kind not in ("tensor", "scatter"):
            raise ValueError("grid kind must be tensor or scatter")
        self.dimension = dimension
        self.kind = kind
        self.axis_angles = axis_angles
        self.points = points

    @classmethod
    def tensor(cls, dimension: int, axis_points: int = 33) -> "EvaluationGrid":
        if axis_points < 2:
            raise ValueError("tensor grid needs at least two points per axis")
        angles = np.pi * np.arange(axis_points) / (axis_points - 1)
        return cls(dimension, "tensor", axis_angles=angles)

    @classmethod
    def scatter(cls, dimension: int, count: int = 2 ** 14) -> "EvaluationGrid":
        if count < 1:
            raise ValueError("scatter grid needs at least one point")
        bases = _first_primes(dimension)
        pts = np.empty((count, dimension))
        for axis, base in enumerate(bases):
            pts[:, axis] = [2.0 * _radical_inverse(base, i) - 1.0 for i in range(1, count + 1)]
        return cls(dimension, "scatter", points=pts)

    @classmethod
    def for_dimension(
        cls,
        dimension: int,
        axis_points: int = 33,
        scatter_count: int = 2 ** 14,
        tensor_limit: int = 4,
    ) -> "EvaluationGrid":
        if dimension <= tensor_limit:
            return cls.tensor(dimension, axis_points)
        return cls.scatter(dimension, scatter_count)

    @property
    def count(self) -> int:
        if self.kind == "tensor":
            return len(self.axis_angles) ** self.dimension
        return self.points.shape[0]


def residual_terms(
    exact: Iterable[Tuple[Wavenumber, float]], approx: Iterable[Tuple[Wavenumber, float]]
) -> Dict[Wavenumber, float]:
    """Coefficients of (exact - approx), zeros dropped."""
    out: Dict[Wavenumber, float] = {}
    for k, c in exact:
        if c != 0.0:
            out[k] = out.get(k, 0.0) + float(c)
    for k, c in approx:
        v = out.get(k, 0.0) - float(c)
        if v == 0.0:
            out.pop(k, None)
        else:
            out[k] = v
    return {k: v for k, v in out.items() if v != 0.0}


def _dense_coefficients(terms: Dict[Wavenumber, float], dimension: int):
    degrees = [0] * dimension
    for k in terms:
        for axis, deg in enumerate(k):
            if deg > degrees[axis]:
                degrees[axis] = deg
    shape = tuple(deg + 1 for deg in degrees)
    dense = np.zeros(shape)
    for k, c in terms.items():
        dense[k] = c
    return dense


def grid_sup(terms: Dict[Wavenumber, float], grid: EvaluationGrid) -> float:
    """Max absolute value of the series over the grid.

    The term set is finite and evaluated exactly, so the only slack is the
    grid resolution itself; the result never exceeds the true sup norm.
    """
    if not terms:
        return 0.0
    dense = _dense_coefficients(terms, grid.dimension)
    if dense.size > 2 ** 24:
        raise ValueError("term set spans too broad a lattice for dense evaluation")
    if grid.kind == "tensor":
        tables = [
            np.cos(np.outer(np.arange(n), grid.axis_angles)) for n in dense.shape
        ]
        values = dense
        for table in tables:
            values = np.tensordot(values, table, axes=([0], [0]))
        return float(np.max(np.abs(values)))
    thetas = np.arccos(np.clip(grid.points, -1.0, 1.0))
    tables = [
        np.cos(np.outer(np.arange(n), thetas[:, axis]))
        for axis, n in enumerate(dense.shape)
    ]
    total = grid.points.shape[0]
    trailing = dense.size // dense.shape[0]
    chunk = max(16, min(total, 2 ** 22 // max(1, trailing)))
    best = 0.0
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        cur = np.einsum("ar,ap->rp", dense.reshape(dense.shape[0], -1), tables[0][:, start:stop])
        for axis in range(1, grid.dimension):
            n = dense.shape[axis]
            cur = np.einsum(
                "arp,ap->rp", cur.reshape(n, -1, stop - start), tables[axis][:, start:stop]
            )
        best = max(best, float(np.max(np.abs(cur))))
    return best


CSV_HEADER = "d,eps,seed,n_used,sup_error,ratio,g_norm_error,inferred_r,status,wall_ms"


@dataclass(frozen=True)
class ExperimentRow:
    d: int
    eps: float
    seed: int
    n_used: int
    sup_error: float
    ratio: float
    g_norm_error: float
    inferred_r: float
    status: str
    wall_ms: int

    def to_csv(self) -> str:
        return ",".join(
            [
                str(self.d),
                repr(self.eps),
                str(self.seed),
                str(self.n_used),
                repr(self.sup_error),
                repr(self.ratio),
                repr(self.g_norm_error),
                repr(self.inferred_r),
                self.status,
                str(self.wall_ms),
            ]
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "eps": self.eps,
                "seed": self.seed,
                "n_used": self.n_used,
                "sup_error": self.sup_error,
                "ratio": self.ratio,
                "g_norm_error": self.g_norm_error,
                "inferred_r": self.inferred_r,
                "status": self.status,
                "wall_ms": self.wall_ms,
            }
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """One harness invocation: the cross product of cells below."""

    dimensions: tuple
    tolerances: tuple
    seeds: tuple
    inflation: float = 1.1
    axis_degree_cap: int = 4
    budget_cap: int = DEFAULT_BUDGET_CAP
    axis_points: int = 33
    scatter_count: int = 2 ** 14
    timing: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(int(d) for d in self.dimensions))
        object.__setattr__(self, "tolerances", tuple(float(t) for t in self.tolerances))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.dimensions or not self.tolerances or not self.seeds:
            raise ValueError("dimensions, tolerances, and seeds must all be nonempty")
        if any(d < 1 for d in self.dimensions) or any(t <= 0 for t in self.tolerances):
            raise ValueError("dimensions must be positive and tolerances > 0")
        if self.inflation <= 1.0:
            raise ValueError("inflation must exceed 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "dimensions", "tolerances", "seeds", "inflation", "axis_degree_cap",
            "budget_cap", "axis_points", "scatter_count", "timing", "jobs",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        body = dict(data)
        seeds = body.get("seeds", 20)
        if isinstance(seeds, int):
            body["seeds"] = tuple(range(seeds))
        return cls(**body)


def _run_cell(args: tuple) -> ExperimentRow:
    (d, eps, seed, inflation, cap, budget, axis_points, scatter_count, timing) = args
    started = time.perf_counter() if timing else 0.0
    try:
        fn = make_random_function(d, seed)
        oracle = fn.oracle()
        space = SpaceConfig(math.inf, 1.0)
        # Candidate rates are trimmed to spaces with finite tail norms; a
        # rate at or below 1/tail_exponent could never certify anything.
        full = CandidateSets.default(weight_cap=1.0, axis_degree_cap=cap)
        rates = tuple(r for r in full.rate_grid if r * space.tail_exponent > 1.0)
        outcome = approximate_with_inferred_weights(
            oracle,
            d,
            CandidateSets(full.coordinate_grid, rates, cap),
            space,
            inflation=inflation,
            tolerance=eps,
            budget_cap=budget,
        )
        residual = residual_terms(fn.support(), outcome.terms)
        g_norm = math.fsum(abs(c) for c in residual.values())
        grid = EvaluationGrid.for_dimension(d, axis_points, scatter_count)
        sup = grid_sup(residual, grid)
        wall = int(round((time.perf_counter() - started) * 1000.0)) if timing else 0
        return ExperimentRow(
            d=d,
            eps=eps,
            seed=seed,
            n_used=outcome.n_used,
            sup_error=sup,
            ratio=sup / eps,
            g_norm_error=g_norm,
            inferred_r=float(outcome.inferred["r"]),
            status=outcome.stopped_by,
            wall_ms=wall,
        )
    except Exception as exc:  # noqa: BLE001 - a bad cell must not sink the run
        wall = int(round((time.perf_counter() - started) * 1000.0)) if timing else 0
        return ExperimentRow(
            d=d,
            eps=eps,
            seed=seed,
            n_used=0,
            sup_error=math.nan,
            ratio=math.nan,
            g_norm_error=math.nan,
            inferred_r=math.nan,
            status=f"failed:{type(exc).__name__}",
            wall_ms=wall,
        )


def run_experiment(config: ExperimentConfig) -> List[ExperimentRow]:
    """All cells in deterministic (dimension, tolerance, seed) order."""
    cells = [
        (
            d, eps, seed, config.inflation, config.axis_degree_cap,
            config.budget_cap, config.axis_points, config.scatter_count, config.timing,
        )
        for d in config.dimensions
        for eps in config.tolerances
        for seed in config.seeds
    ]
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(cell) for cell in cells]


def write_csv(rows: Sequence[ExperimentRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(CSV_HEADER + "\n")
        for row in rows:
            handle.write(row.to_csv() + "\n")


def write_jsonl(rows: Sequence[ExperimentRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(row.to_json() + "\n")
