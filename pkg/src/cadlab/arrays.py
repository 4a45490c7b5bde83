"""Martingale array constructors, their compensators, and hypothesis checks.

Every array kind produces staircase trajectories on the grid k/n together
with closed-form compensator increments, so the compensator is never
estimated numerically:

* gamma-clock arrays: increments sqrt(xi_k) Z_k with xi_k ~ Gamma(1/n, 1)
  (or any subordinator's grid increments), compensator increment xi_k;
* the signed-harmonic (Polya-type) array: increments Y_i Z_{i-1}/sqrt(n)
  built from a Rademacher sequence, compensator increment Z_{i-1}^2/n,
  which here coincides exactly with the quadratic variation increment;
* the sparse two-point array: increments xi_k/a_n with
  P(xi_k = +-k^(alpha/2)) = 1/(2 k^beta), deterministic compensator
  increment k^(delta-1)/a_n^2 where delta = alpha - beta + 1;
* transforms: predictable weights Q_{n,k} multiply the base increments,
  compensator increments pick up the factor Q_{n,k}^2;
* drifted arrays add a predictable part O = mu * A on top of a base array.

Batch sampling is vectorized over replicates; single realizations are
materialized as exact :class:`~cadlab.paths.CadlagPath` staircases.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .levy import RngStream, SubordinatorSpec, spec_from_dict
from .paths import CadlagPath, PathDomainError, Segment, TimeGrid
from . import timechange

__all__ = [
    "WeightSpec",
    "deterministic_profile",
    "random_walk_profile",
    "ArraySpec",
    "LinnikArray",
    "PolyaArray",
    "LindebergArray",
    "SubordinatorArray",
    "TransformArray",
    "DriftedArray",
    "array_from_dict",
    "IncrementBatch",
    "ArrayRealization",
    "sample_increments",
    "realize",
    "marginal_samples",
    "HypEstimate",
    "check_hyp_c",
    "check_hyp_d",
    "LindebergReport",
    "check_lindeberg",
    "check_mcleish",
    "check_jump_decomposition",
]

_BATCH_CELLS = 20_000_000  # chunk size bound for vectorized sampling


# -- weight profiles -------------------------------------------------------

_PROFILES: dict[str, tuple[Callable[[float], float], float, float]] = {
    "one": (lambda u: 1.0, 1.0, 1.0),
    "two_plus_cos": (lambda u: 2.0 + math.cos(2.0 * math.pi * u), 1.0, 3.0),
}


@dataclass(frozen=True)
class WeightSpec:
    """Predictable weight description for martingale transforms.

    ``kind`` is "profile" (deterministic, Q_{n,k} = Q((k-1)/n)) or
    "random_walk" (Q_{n,k} = Q(sigma * S_{k-1} / sqrt(n)) for a standard
    random walk S independent of the base array).  The profile function
    must stay inside bounds 0 < lo <= hi < inf.
    """

    kind: str
    name: str = "one"
    const: Optional[float] = None
    sigma: float = 1.0
    fn: Optional[Callable[[float], float]] = None
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("profile", "random_walk"):
            raise PathDomainError(f"unknown weight kind {self.kind!r}")
        lo, hi = self.bounds()
        if not (0 < lo <= hi < math.inf):
            raise PathDomainError(
                f"weight profile must be bounded away from 0, got [{lo}, {hi}]"
            )

    def resolve(self) -> Callable[[float], float]:
        if self.fn is not None:
            return self.fn
        if self.const is not None:
            c = float(self.const)
            return lambda u: c
        if self.name not in _PROFILES:
            raise PathDomainError(f"unknown weight profile {self.name!r}")
        return _PROFILES[self.name][0]

    def bounds(self) -> tuple[float, float]:
        if self.fn is not None:
            if self.lo is None or self.hi is None:
                raise PathDomainError("custom weight functions need explicit bounds")
            return abs(self.lo), abs(self.hi)
        if self.const is not None:
            return abs(self.const), abs(self.const)
        if self.name not in _PROFILES:
            raise PathDomainError(f"unknown weight profile {self.name!r}")
        _, lo, hi = _PROFILES[self.name]
        return lo, hi

    def to_dict(self) -> dict:
        if self.fn is not None:
            raise PathDomainError("callable weight specs are not serializable")
        doc = {"kind": self.kind, "name": self.name}
        if self.const is not None:
            doc["const"] = self.const
        if self.kind == "random_walk":
            doc["sigma"] = self.sigma
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "WeightSpec":
        return WeightSpec(
            kind=doc["kind"],
            name=doc.get("name", "one"),
            const=doc.get("const"),
            sigma=doc.get("sigma", 1.0),
        )


def deterministic_profile(name: str = "one", const: float | None = None,
                          fn: Callable[[float], float] | None = None,
                          lo: float | None = None,
                          hi: float | None = None) -> WeightSpec:
    return WeightSpec(kind="profile", name=name, const=const, fn=fn, lo=lo, hi=hi)


def random_walk_profile(name: str, sigma: float = 1.0,
                        fn: Callable[[float], float] | None = None,
                        lo: float | None = None,
                        hi: float | None = None) -> WeightSpec:
    return WeightSpec(kind="random_walk", name=name, sigma=sigma, fn=fn, lo=lo, hi=hi)


# -- array specs -----------------------------------------------------------


@dataclass(frozen=True, kw_only=True)
class ArraySpec:
    """Base class for martingale array descriptions."""

    n: int
    horizon: float

    def __post_init__(self):
        if self.n < 1:
            raise PathDomainError("n must be >= 1")
        if self.horizon <= 0:
            raise PathDomainError("horizon must be > 0")

    @property
    def cells(self) -> int:
        return TimeGrid(self.n, self.horizon).num_cells

    def grid(self) -> TimeGrid:
        return TimeGrid(self.n, self.horizon)

    def with_horizon(self, horizon: float) -> "ArraySpec":
        return dataclasses.replace(self, horizon=horizon)

    def _draw(self, gen: np.random.Generator, samples: int) -> "IncrementBatch":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IncrementBatch:
    """Per-cell increments for a batch of replicates; shape (samples, cells).

    dX are the martingale increments, dA the compensator increments, dQV
    the squared increments, dO the predictable drift increments (zero for
    pure-martingale arrays).
    """

    dX: np.ndarray
    dA: np.ndarray
    dQV: np.ndarray
    dO: Optional[np.ndarray] = None


@dataclass(frozen=True, kw_only=True)
class LinnikArray(ArraySpec):
    """Gamma(1/n, 1) clock increments times independent standard normals."""

    n: int
    horizon: float = 1.0

    def _draw(self, gen, samples):
        m = self.cells
        xi = gen.gamma(1.0 / self.n, 1.0, size=(samples, m))
        z = gen.normal(0.0, 1.0, size=(samples, m))
        dx = np.sqrt(xi) * z
        return IncrementBatch(dX=dx, dA=xi, dQV=xi * z * z)

    def to_dict(self):
        return {"kind": "linnik", "n": self.n, "horizon": self.horizon}


@dataclass(frozen=True, kw_only=True)
class PolyaArray(ArraySpec):
    """Signed-harmonic array: increments Y_i Z_{i-1} / sqrt(n).

    Z_{i-1} is the partial sum of Y_j / j (with Z_0 = 1), so the squared
    increment is predictable and quadratic variation equals the compensator
    exactly.
    """

    n: int
    horizon: float = 1.0

    def _draw(self, gen, samples):
        m = self.cells
        y = gen.integers(0, 2, size=(samples, m)).astype(float) * 2.0 - 1.0
        j = np.arange(1, m + 1, dtype=float)
        partial = np.cumsum(y / j, axis=1)
        zprev = np.empty_like(partial)
        zprev[:, 0] = 1.0
        zprev[:, 1:] = partial[:, :-1]
        dx = y * zprev / math.sqrt(self.n)
        da = zprev * zprev / self.n
        return IncrementBatch(dX=dx, dA=da, dQV=da.copy())

    def to_dict(self):
        return {"kind": "polya", "n": self.n, "horizon": self.horizon}


@dataclass(frozen=True, kw_only=True)
class LindebergArray(ArraySpec):
    """Sparse two-point array with deterministic compensator.

    xi_k = +-k^(alpha/2) with probability 1/(2 k^beta) each, else 0;
    increments are xi_k / a_n with a_n^2 = n^delta for delta > 0 and
    a_n^2 = log n for delta = 0, where delta = alpha - beta + 1.
    """

    n: int
    alpha: float
    beta: float
    horizon: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.beta < 0:
            raise PathDomainError("beta must be >= 0")
        if self.delta < 0:
            raise PathDomainError(
                f"delta = alpha - beta + 1 = {self.delta} must be >= 0"
            )
        if self.delta == 0:
            warnings.warn(
                "delta = 0 uses log-n scaling; the compensator limit is "
                "degenerate and limit checks are not meaningful here",
                stacklevel=2,
            )

    @property
    def delta(self) -> float:
        return self.alpha - self.beta + 1.0

    @property
    def a_n_sq(self) -> float:
        if self.delta > 0:
            return float(self.n) ** self.delta
        return math.log(self.n)

    def compensator_increments(self) -> np.ndarray:
        k = np.arange(1, self.cells + 1, dtype=float)
        return k ** (self.delta - 1.0) / self.a_n_sq

    def _draw(self, gen, samples):
        m = self.cells
        k = np.arange(1, m + 1, dtype=float)
        p = 1.0 / k**self.beta
        u = gen.uniform(0.0, 1.0, size=(samples, m))
        hit = u < p
        sign = np.where(gen.uniform(size=(samples, m)) < 0.5, -1.0, 1.0)
        a_n = math.sqrt(self.a_n_sq)
        xi = np.where(hit, sign * k ** (self.alpha / 2.0), 0.0)
        dx = xi / a_n
        da = np.broadcast_to(self.compensator_increments(), (samples, m)).copy()
        return IncrementBatch(dX=dx, dA=da, dQV=dx * dx)

    def to_dict(self):
        return {"kind": "lindeberg", "n": self.n, "alpha": self.alpha,
                "beta": self.beta, "horizon": self.horizon}


@dataclass(frozen=True, kw_only=True)
class SubordinatorArray(ArraySpec):
    """Clock increments from an arbitrary subordinator spec."""

    n: int
    spec: SubordinatorSpec = None
    horizon: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.spec is None:
            raise PathDomainError("subordinator spec required")

    def _draw(self, gen, samples):
        grid = self.grid()
        pts = grid.points()
        if self.spec.time_change is None:
            dl = np.diff(pts)
        else:
            ell = self.spec.time_change
            dl = np.diff(ell.eval_many(np.minimum(pts, ell.horizon)))
        xi = self.spec.increments(gen, np.broadcast_to(dl, (samples, dl.size)))
        z = gen.normal(0.0, 1.0, size=xi.shape)
        dx = np.sqrt(xi) * z
        return IncrementBatch(dX=dx, dA=xi, dQV=xi * z * z)

    def to_dict(self):
        return {"kind": "subordinator", "n": self.n, "horizon": self.horizon,
                "spec": self.spec.to_dict()}


@dataclass(frozen=True, kw_only=True)
class TransformArray(ArraySpec):
    """Martingale transform of a base array by predictable weights."""

    n: int = 0
    base: ArraySpec = None
    weight: WeightSpec = None
    horizon: float = 0.0

    def __init__(self, base: ArraySpec, weight: WeightSpec):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "n", base.n)
        object.__setattr__(self, "horizon", base.horizon)
        if weight is None:
            raise PathDomainError("weight spec required")

    def with_horizon(self, horizon):
        return TransformArray(self.base.with_horizon(horizon), self.weight)

    def _weights(self, gen, samples) -> np.ndarray:
        m = self.cells
        q = self.weight.resolve()
        if self.weight.kind == "profile":
            u = (np.arange(m, dtype=float)) / self.n
            row = np.array([q(v) for v in u])
            return np.broadcast_to(row, (samples, m))
        steps = gen.normal(0.0, 1.0, size=(samples, m))
        walk = np.zeros((samples, m))
        walk[:, 1:] = np.cumsum(steps[:, :-1], axis=1)
        walk *= self.weight.sigma / math.sqrt(self.n)
        vec = np.vectorize(q)
        return vec(walk)

    def _draw(self, gen, samples):
        # weights drawn first: they are independent of the base array
        qmat = self._weights(gen, samples)
        base = self.base._draw(gen, samples)
        return IncrementBatch(
            dX=qmat * base.dX,
            dA=qmat * qmat * base.dA,
            dQV=qmat * qmat * base.dQV,
            dO=None if base.dO is None else qmat * base.dO,
        )

    def to_dict(self):
        return {"kind": "transform", "base": self.base.to_dict(),
                "weight": self.weight.to_dict()}


@dataclass(frozen=True, kw_only=True)
class DriftedArray(ArraySpec):
    """Base array plus predictable drift mu * A; N = M + O."""

    n: int = 0
    base: ArraySpec = None
    mu: float = 0.0
    horizon: float = 0.0

    def __init__(self, base: ArraySpec, mu: float):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "mu", float(mu))
        object.__setattr__(self, "n", base.n)
        object.__setattr__(self, "horizon", base.horizon)

    def with_horizon(self, horizon):
        return DriftedArray(self.base.with_horizon(horizon), self.mu)

    def _draw(self, gen, samples):
        base = self.base._draw(gen, samples)
        return IncrementBatch(dX=base.dX, dA=base.dA, dQV=base.dQV,
                              dO=self.mu * base.dA)

    def to_dict(self):
        return {"kind": "drifted", "base": self.base.to_dict(), "mu": self.mu}


def array_from_dict(doc: dict) -> ArraySpec:
    kind = doc.get("kind")
    if kind == "linnik":
        return LinnikArray(n=doc["n"], horizon=doc.get("horizon", 1.0))
    if kind == "polya":
        return PolyaArray(n=doc["n"], horizon=doc.get("horizon", 1.0))
    if kind == "lindeberg":
        return LindebergArray(n=doc["n"], alpha=doc["alpha"], beta=doc["beta"],
                              horizon=doc.get("horizon", 1.0))
    if kind == "subordinator":
        return SubordinatorArray(n=doc["n"], spec=spec_from_dict(doc["spec"]),
                                 horizon=doc.get("horizon", 1.0))
    if kind == "transform":
        return TransformArray(array_from_dict(doc["base"]),
                              WeightSpec.from_dict(doc["weight"]))
    if kind == "drifted":
        return DriftedArray(array_from_dict(doc["base"]), doc["mu"])
    raise PathDomainError(f"unknown array kind {kind!r}")


# -- sampling --------------------------------------------------------------


def sample_increments(spec: ArraySpec, rng: RngStream, samples: int) -> IncrementBatch:
    return spec._draw(rng.generator(), samples)


def _staircase(grid: TimeGrid, inc: np.ndarray) -> CadlagPath:
    values = np.concatenate([[0.0], np.cumsum(inc)])
    pts = grid.points()
    segs = [Segment.const(v) for v in values[:-1]]
    bps = list(pts[:-1])
    terminal = float(values[-1])
    if pts[-1] < grid.horizon:
        bps.append(float(pts[-1]))
        segs.append(Segment.const(terminal))
    return CadlagPath(grid.horizon, bps, segs, terminal)


@dataclass(frozen=True)
class ArrayRealization:
    """One trajectory of an array with all its derived staircases."""

    spec: ArraySpec
    M: CadlagPath
    A: CadlagPath
    QV: CadlagPath
    O: CadlagPath
    N: CadlagPath


def realize(spec: ArraySpec, rng: RngStream) -> ArrayRealization:
    batch = sample_increments(spec, rng, 1)
    grid = spec.grid()
    m_path = _staircase(grid, batch.dX[0])
    a_path = _staircase(grid, batch.dA[0])
    qv_path = _staircase(grid, batch.dQV[0])
    if batch.dO is None:
        o_path = _staircase(grid, np.zeros(spec.cells))
        n_path = m_path
    else:
        o_path = _staircase(grid, batch.dO[0])
        n_path = _staircase(grid, batch.dX[0] + batch.dO[0])
    return ArrayRealization(spec=spec, M=m_path, A=a_path, QV=qv_path,
                            O=o_path, N=n_path)


def _batched(spec: ArraySpec, rng: RngStream, samples: int):
    """Yield (stream_offset, batch) pairs bounded by the cell budget."""
    rows = max(1, _BATCH_CELLS // max(spec.cells, 1))
    done = 0
    idx = 0
    while done < samples:
        take = min(rows, samples - done)
        yield sample_increments(spec, rng.child(idx), take)
        done += take
        idx += 1


def marginal_samples(
    spec: ArraySpec,
    times: Sequence[float],
    samples: int,
    rng: RngStream,
    fields: Sequence[str] = ("M", "A"),
) -> dict[str, np.ndarray]:
    """Vectorized draws of path values at fixed times.

    Returns arrays of shape (samples, len(times)) keyed by field name
    ("M", "A", "QV", "O", "N").
    """
    grid = spec.grid()
    idx = np.array([grid.index_at(t) for t in times])
    out = {f: [] for f in fields}
    for batch in _batched(spec, rng, samples):
        per = {
            "M": batch.dX,
            "A": batch.dA,
            "QV": batch.dQV,
        }
        if "O" in fields or "N" in fields:
            do = batch.dO if batch.dO is not None else np.zeros_like(batch.dX)
            per["O"] = do
            per["N"] = batch.dX + do
        for f in fields:
            cs = np.cumsum(per[f], axis=1)
            padded = np.concatenate([np.zeros((cs.shape[0], 1)), cs], axis=1)
            out[f].append(padded[:, idx])
    return {f: np.concatenate(v, axis=0) for f, v in out.items()}


def running_sup_samples(
    spec: ArraySpec,
    t: float,
    samples: int,
    rng: RngStream,
    field: str = "M",
) -> np.ndarray:
    """Vectorized draws of sup_{s <= t} |X(s)| for staircase trajectories.

    Exact over grid points, which exhaust the attainable values of a
    staircase on [0, t].
    """
    grid = spec.grid()
    k = grid.index_at(t)
    out = []
    for batch in _batched(spec, rng, samples):
        per = {"M": batch.dX, "A": batch.dA, "QV": batch.dQV}
        inc = per[field][:, :k]
        if k == 0:
            out.append(np.zeros(batch.dX.shape[0]))
        else:
            out.append(np.max(np.abs(np.cumsum(inc, axis=1)), axis=1))
    return np.concatenate(out)


def _compensator_path(spec: ArraySpec, rng: RngStream) -> CadlagPath:
    """One realized compensator staircase, without the other trajectories."""
    batch = sample_increments(spec, rng, 1)
    return _staircase(spec.grid(), batch.dA[0])


# -- hypothesis checks -----------------------------------------------------


@dataclass(frozen=True)
class HypEstimate:
    estimate: float
    stderr: float
    exceedance: float | None = None


def check_hyp_c(spec: ArraySpec, t: float, samples: int, rng: RngStream) -> HypEstimate:
    """Monte Carlo estimate of E{A(tau(A(t))) - A(t)}.

    The gap is the compensator increment carried by the first jump of the
    martingale after time t, computed through the exact first-passage
    inverse of each realized compensator path.
    """
    if t >= spec.horizon:
        raise PathDomainError("t must be < horizon")
    grid = spec.grid()
    k = grid.index_at(t)
    gaps = np.empty(samples)
    for r in range(samples):
        batch = sample_increments(spec, rng.child(r), 1)
        # Re-base at A(t): the tail staircase B(s) = A(t+s) - A(t) starts at
        # level 0, so increments far below the magnitude of A(t) stay
        # representable and the first-passage gap is computed exactly.
        tail = batch.dA[0, k:]
        if tail.size == 0 or not np.any(tail > 0):
            raise timechange.InsufficientHorizonError(
                "compensator does not increase after t; use a larger horizon"
            )
        B = _staircase(TimeGrid(spec.n, spec.horizon - grid.points()[k]), tail)
        pair = timechange.inverse(B, 0.0)
        gaps[r] = B.eval(pair.tau.terminal_value)
    est = float(np.mean(gaps))
    se = float(np.std(gaps, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return HypEstimate(estimate=est, stderr=se)


def check_hyp_d(spec: ArraySpec, t: float, samples: int, rng: RngStream,
                max_doublings: int = 6) -> HypEstimate:
    """Monte Carlo estimate of E{A(tau(t))} together with the exceedance
    E{A(tau(t)) - t} >= 0.

    Realizations whose compensator fails to pass level t inside the horizon
    are redrawn with a doubled horizon (the spec's horizon should dominate
    t with margin to keep this rare).
    """
    vals = np.empty(samples)
    for r in range(samples):
        cur = spec
        for attempt in range(max_doublings + 1):
            A = _compensator_path(cur, rng.child(r * (max_doublings + 1) + attempt))
            if A.terminal_value > t:
                break
            cur = cur.with_horizon(cur.horizon * 2.0)
        else:
            raise timechange.InsufficientHorizonError(
                f"compensator failed to pass level {t} after "
                f"{max_doublings} horizon doublings"
            )
        pair = timechange.inverse(A, t)
        vals[r] = A.eval(pair.tau.terminal_value)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return HypEstimate(estimate=est, stderr=se, exceedance=est - t)


@dataclass(frozen=True)
class LindebergReport:
    holds_in_limit: bool
    statistic_by_n: dict[int, float]
    epsilon: float


def lindeberg_statistic(alpha: float, beta: float, n: int, epsilon: float) -> float:
    """Exact truncated-second-moment sum for the two-point array.

    a_n^{-2} * sum over k <= n with |xi_k| = k^(alpha/2) > a_n*epsilon of
    k^(delta-1); no sampling is involved since the array's conditional
    moments are deterministic.
    """
    delta = alpha - beta + 1.0
    if delta < 0:
        raise PathDomainError("delta must be >= 0")
    a_n_sq = float(n) ** delta if delta > 0 else math.log(n)
    cut = a_n_sq * epsilon * epsilon  # k^alpha > a_n^2 eps^2
    k = np.arange(1, n + 1, dtype=float)
    if alpha > 0:
        mask = k**alpha > cut
    elif alpha == 0:
        mask = np.full(n, 1.0 > cut)
    else:
        mask = k**alpha > cut
    return float(np.sum(k[mask] ** (delta - 1.0)) / a_n_sq)


def check_lindeberg(alpha: float, beta: float, epsilon: float,
                    n_ladder: Sequence[int]) -> LindebergReport:
    """Evaluate the truncated-moment condition across a growing n ladder.

    The verdict is numerical: the statistic must be nonincreasing along the
    ladder and end below a small threshold to count as holding.
    """
    stats = {int(n): lindeberg_statistic(alpha, beta, n, epsilon) for n in n_ladder}
    vals = [stats[int(n)] for n in n_ladder]
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    holds = nonincreasing and vals[-1] < 1e-2
    return LindebergReport(holds_in_limit=holds, statistic_by_n=stats,
                           epsilon=epsilon)


def check_mcleish(
    spec: ArraySpec,
    t: float,
    samples: int,
    rng: RngStream,
    epsilons: Sequence[float] = (0.05, 0.1, 0.2),
) -> dict[float, float]:
    """P{sup_{s<=t} |[M]_s - A(s)| > eps} estimated by Monte Carlo.

    The supremum is exact over grid points since both processes are
    staircases constant between them.
    """
    grid = spec.grid()
    k = grid.index_at(t)
    sups = []
    for batch in _batched(spec, rng, samples):
        diff = np.cumsum(batch.dQV[:, :k] - batch.dA[:, :k], axis=1)
        sups.append(np.max(np.abs(diff), axis=1) if k > 0 else
                    np.zeros(batch.dX.shape[0]))
    sup = np.concatenate(sups)
    return {float(e): float(np.mean(sup > e)) for e in epsilons}


def check_jump_decomposition(real: ArrayRealization, tol: float = 1e-10) -> bool:
    """Quadratic variation at the horizon equals the sum of squared jumps."""
    total = sum(real.M.jump(s) ** 2 for s in real.M.jump_times())
    return abs(real.QV.terminal_value - total) <= tol
