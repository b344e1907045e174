"""Finite metric spaces, server configurations and matching distances.

Distances are exact nonnegative integers throughout.  The testbed checks
exact equalities, so nothing here ever goes through floating point.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

MIN_POINTS = 2
MAX_POINTS = 16

# k! matchings are enumerated up to this k; larger instances use the
# polynomial assignment solver.  Both routes agree and are cross-checked
# in the test suite.
PERMUTATION_MATCHING_LIMIT = 6

Configuration = tuple[int, ...]


class InputError(ValueError):
    """Structurally invalid input, distinct from a failed metric axiom."""


@dataclass(frozen=True)
class AxiomViolation:
    """One failed metric axiom with a witnessing index tuple."""

    axiom: str
    witness: tuple[int, ...]


@dataclass(frozen=True)
class MetricValidation:
    ok: bool
    violations: tuple[AxiomViolation, ...]


def validate_metric(dist: Sequence[Sequence[int]]) -> MetricValidation:
    """Check the three metric axioms on a square integer matrix.

    Structural problems (non-square shape, non-integer or negative entries)
    raise :class:`InputError`; axiom failures are reported in the result,
    one violation per witnessing index tuple.  Axiom names: ``identity``
    (zero diagonal, positive off-diagonal), ``symmetry``, ``triangle``.
    """
    n = len(dist)
    if n == 0:
        raise InputError("distance matrix is empty")
    for i, row in enumerate(dist):
        if len(row) != n:
            raise InputError(f"row {i} has length {len(row)}, expected {n}")
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, np.integer)):
                raise InputError(f"entry ({i},{j}) is not an integer: {entry!r}")
            if entry < 0:
                raise InputError(f"entry ({i},{j}) is negative: {entry}")

    violations: list[AxiomViolation] = []
    for i in range(n):
        if dist[i][i] != 0:
            violations.append(AxiomViolation("identity", (i, i)))
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] == 0 or dist[j][i] == 0:
                violations.append(AxiomViolation("identity", (i, j)))
            if dist[i][j] != dist[j][i]:
                violations.append(AxiomViolation("symmetry", (i, j)))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for mid in range(n):
                if mid == i or mid == j:
                    continue
                if dist[i][j] > dist[i][mid] + dist[mid][j]:
                    violations.append(AxiomViolation("triangle", (i, j, mid)))
    return MetricValidation(not violations, tuple(violations))


@dataclass(frozen=True)
class MetricSpace:
    """Finite metric on points 0..n-1 with an exact integer distance matrix.

    Immutable after construction; safe to share across threads.  Build
    through :meth:`from_matrix` to get validation, or trust the caller
    (the generators construct directly because closure guarantees the
    axioms).
    """

    dist: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.dist)

    @classmethod
    def from_matrix(
        cls, matrix: Sequence[Sequence[int]], labels: Sequence[str] | None = None
    ) -> "MetricSpace":
        result = validate_metric(matrix)
        if not result.ok:
            parts = ", ".join(f"{v.axiom} at {v.witness}" for v in result.violations[:5])
            raise InputError(f"matrix violates metric axioms: {parts}")
        n = len(matrix)
        if not MIN_POINTS <= n <= MAX_POINTS:
            raise InputError(f"point count {n} outside supported range [{MIN_POINTS}, {MAX_POINTS}]")
        if labels is not None and len(labels) != n:
            raise InputError(f"{len(labels)} labels for {n} points")
        rows = tuple(tuple(int(x) for x in row) for row in matrix)
        return cls(rows, tuple(labels) if labels is not None else None)

    @cached_property
    def matrix(self) -> np.ndarray:
        arr = np.asarray(self.dist, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def distance(self, x: int, y: int) -> int:
        return self.dist[x][y]

    def check_point(self, p: int) -> int:
        if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
            raise InputError(f"point identifier must be an integer, got {p!r}")
        if not 0 <= p < self.n:
            raise InputError(f"point {p} out of range [0, {self.n})")
        return int(p)


def canonical_configuration(points: Iterable[int], n: int | None = None) -> Configuration:
    """Sorted tuple of distinct point identifiers; the canonical encoding."""
    pts = []
    for p in points:
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
            raise InputError(f"point identifier must be an integer, got {p!r}")
        pts.append(int(p))
    if len(set(pts)) != len(pts):
        raise InputError(f"configuration has repeated points: {pts}")
    if n is not None:
        for p in pts:
            if not 0 <= p < n:
                raise InputError(f"point {p} out of range [0, {n})")
    if not pts:
        raise InputError("configuration is empty")
    return tuple(sorted(pts))


def matching_cost(
    sources: Sequence[int],
    targets: Sequence[int],
    metric: MetricSpace,
    method: str | None = None,
) -> int:
    """Minimum total distance of a bijection sources -> targets.

    Accepts repeated points on either side (server positions may stack
    mid-execution).  ``method`` forces ``"permutation"`` or ``"assignment"``
    for cross-checking; by default small inputs are enumerated exactly and
    larger ones go through the assignment solver.
    """
    if len(sources) != len(targets):
        raise InputError(f"matching sides differ: {len(sources)} vs {len(targets)}")
    k = len(sources)
    if method is None:
        method = "permutation" if k <= PERMUTATION_MATCHING_LIMIT else "assignment"
    dist = metric.dist
    if method == "permutation":
        best = None
        for perm in itertools.permutations(targets):
            cost = sum(dist[s][t] for s, t in zip(sources, perm))
            if best is None or cost < best:
                best = cost
        return best
    if method == "assignment":
        cost_matrix = np.array(
            [[dist[s][t] for t in targets] for s in sources], dtype=np.int64
        )
        rows, cols = linear_sum_assignment(cost_matrix)
        return int(cost_matrix[rows, cols].sum())
    raise InputError(f"unknown matching method {method!r}")


def matching_assignment(
    sources: Sequence[int], targets: Sequence[int], metric: MetricSpace
) -> tuple[int, ...]:
    """A minimum-weight bijection, returned as the target matched per source.

    For enumerable sizes the first permutation (in lexicographic order)
    achieving the strict minimum is returned, which makes downstream trace
    extraction deterministic.
    """
    if len(sources) != len(targets):
        raise InputError(f"matching sides differ: {len(sources)} vs {len(targets)}")
    k = len(sources)
    dist = metric.dist
    if k <= PERMUTATION_MATCHING_LIMIT:
        best = None
        best_perm = None
        for perm in itertools.permutations(targets):
            cost = sum(dist[s][t] for s, t in zip(sources, perm))
            if best is None or cost < best:
                best, best_perm = cost, perm
        return tuple(best_perm)
    cost_matrix = np.array(
        [[dist[s][t] for t in targets] for s in sources], dtype=np.int64
    )
    rows, cols = linear_sum_assignment(cost_matrix)
    out = [0] * k
    for r, c in zip(rows, cols):
        out[r] = targets[c]
    return tuple(out)


def configuration_distance(
    x: Iterable[int], y: Iterable[int], metric: MetricSpace
) -> int:
    """Weight of a minimum-weight matching between two k-configurations."""
    cx = canonical_configuration(x, metric.n)
    cy = canonical_configuration(y, metric.n)
    if len(cx) != len(cy):
        raise InputError(f"configuration sizes differ: {len(cx)} vs {len(cy)}")
    return matching_cost(cx, cy, metric)


def min_pairwise_distance(config: Iterable[int], metric: MetricSpace) -> int:
    """Smallest distance between two distinct points of a configuration."""
    pts = canonical_configuration(config, metric.n)
    if len(pts) < 2:
        raise InputError("minimum pairwise distance needs at least two points")
    return min(
        metric.dist[a][b] for a, b in itertools.combinations(pts, 2)
    )


def random_metric(
    n: int, seed: int, weight_range: tuple[int, int] = (1, 9)
) -> MetricSpace:
    """Random integer metric: complete-graph weights, shortest-path closure.

    The closure forces the triangle inequality; weights >= 1 force
    positivity.  Deterministic per seed (weights are drawn for i < j in
    row-major order from a SplitMix64 stream).
    """
    from .rng import SplitMix64

    if not MIN_POINTS <= n <= MAX_POINTS:
        raise InputError(f"point count {n} outside supported range [{MIN_POINTS}, {MAX_POINTS}]")
    lo, hi = weight_range
    if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 1 or hi < lo:
        raise InputError(f"weight range must be integers with 1 <= lo <= hi, got {weight_range}")
    stream = SplitMix64(seed)
    weights = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            w = stream.randint(lo, hi)
            weights[i, j] = w
            weights[j, i] = w
    closed = weights.copy()
    for mid in range(n):
        closed = np.minimum(closed, closed[:, mid : mid + 1] + closed[mid : mid + 1, :])
    rows = tuple(tuple(int(x) for x in row) for row in closed)
    return MetricSpace(rows)


@dataclass(frozen=True)
class Instance:
    """A k-server instance: metric, server count, start, request sequence."""

    metric: MetricSpace
    k: int
    initial: Configuration
    requests: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.metric.n

    @classmethod
    def build(
        cls,
        metric: MetricSpace,
        k: int,
        initial: Iterable[int],
        requests: Iterable[int],
    ) -> "Instance":
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise InputError(f"server count must be a positive integer, got {k!r}")
        if k > metric.n:
            raise InputError(f"k exceeds n (k={k}, n={metric.n})")
        start = canonical_configuration(initial, metric.n)
        if len(start) != k:
            raise InputError(f"initial configuration has {len(start)} points, expected k={k}")
        reqs = tuple(metric.check_point(r) for r in requests)
        return cls(metric, k, start, reqs)

    def with_requests(self, requests: Iterable[int]) -> "Instance":
        return replace(self, requests=tuple(self.metric.check_point(r) for r in requests))

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "dist": [list(row) for row in self.metric.dist],
            "initial": list(self.initial),
            "requests": list(self.requests),
        }
        if self.metric.labels is not None:
            out["labels"] = list(self.metric.labels)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        if not isinstance(data, dict):
            raise InputError(f"instance document must be an object, got {type(data).__name__}")
        required = {"n", "k", "dist", "initial", "requests"}
        allowed = required | {"labels"}
        missing = required - data.keys()
        if missing:
            raise InputError(f"missing instance fields: {sorted(missing)}")
        unknown = data.keys() - allowed
        if unknown:
            raise InputError(f"unknown instance fields: {sorted(unknown)}")
        metric = MetricSpace.from_matrix(data["dist"], data.get("labels"))
        if data["n"] != metric.n:
            raise InputError(f"declared n={data['n']} but matrix has {metric.n} rows")
        return cls.build(metric, data["k"], data["initial"], data["requests"])

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def instance_to_json(inst: Instance) -> str:
    return json.dumps(inst.to_dict(), sort_keys=True, indent=2) + "\n"


def instance_from_json(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"instance JSON does not parse: {exc}") from exc
    return Instance.from_dict(data)
