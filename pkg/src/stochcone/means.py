"""Matrix means on the positive-definite cone and their lifts to finitely
supported measures.

The Karcher mean is found by a damped fixed-point iteration on the matrix
exponential/logarithm; power means by their defining fixed point, with the
negative orders obtained from the positive ones by inversion duality.
Measure-level means push the product measure forward through the matching
tuple mean, exactly when the product support fits under the configured cap
and by seeded Monte Carlo sampling otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cone import PosDefMatrix, thompson_arrays
from .matfun import DimensionMismatch, SymMatrix, _apply, _eig, _fn, frobenius
from .measure import (
    FinMeasure,
    ProductCapExceeded,
    from_atoms,
    make_rng,
    product,
    sample,
)
from .order import DominanceVerdict, dominates_by_coupling

__all__ = [
    "MeanConfig",
    "MeanIterationInfo",
    "MaxIterationsExceeded",
    "AghReport",
    "MEAN_KINDS",
    "arith_mean",
    "harm_mean",
    "geo_t",
    "karcher_mean",
    "karcher_mean_info",
    "karcher_residual",
    "power_mean",
    "tuple_mean",
    "measure_mean",
    "agh_check",
]

MEAN_KINDS = ("arith", "harm", "karcher", "power")
_MIN_STEP = 1e-12


class MaxIterationsExceeded(RuntimeError):
    """Iteration cap hit before the convergence criterion."""

    def __init__(self, what: str, residual: float, max_iter: int):
        self.residual = residual
        super().__init__(
            f"{what} did not converge within {max_iter} iterations; "
            f"last residual {residual:.6e}"
        )


@dataclass(frozen=True)
class MeanConfig:
    """Iteration and lifting controls shared by the mean computations."""

    karcher_tol: float = 1e-10
    max_iter: int = 200
    step_shrink: float = 0.5
    power_t: float = 0.5
    product_cap: int = 4096
    mc_samples: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not (self.karcher_tol > 0.0 and math.isfinite(self.karcher_tol)):
            raise ValueError("karcher_tol must be positive and finite")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (0.0 < self.step_shrink < 1.0):
            raise ValueError("step_shrink must sit strictly between 0 and 1")
        if not (-1.0 <= self.power_t <= 1.0):
            raise ValueError("power_t must lie in [-1, 1]")
        if self.product_cap < 1:
            raise ValueError("product_cap must be >= 1")
        if self.mc_samples is not None and self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1 when set")


@dataclass(frozen=True)
class MeanIterationInfo:
    residual: float
    iterations: int
    step: float


def _collect(mats: Sequence[PosDefMatrix]) -> list[np.ndarray]:
    if not mats:
        raise ValueError("mean of an empty family is undefined")
    d = mats[0].dim
    for m in mats:
        if m.dim != d:
            raise DimensionMismatch("mean inputs have mixed dimensions")
    return [m.a for m in mats]


def _wrap(arr: np.ndarray) -> PosDefMatrix:
    return PosDefMatrix(SymMatrix(arr))


def _arith(arrs: list[np.ndarray]) -> np.ndarray:
    out = arrs[0].copy()
    for a in arrs[1:]:
        out = out + a
    return out / len(arrs)


def _harm(arrs: list[np.ndarray]) -> np.ndarray:
    return _fn(_arith([_fn(a, "inv") for a in arrs]), "inv")


def _geo_t(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    wa, qa = _eig(a, True)
    if wa[0] <= 0.0:
        raise ValueError("geometric interpolation needs positive-definite inputs")
    rs = _apply(wa, qa, "inv_sqrt")
    sq = _apply(wa, qa, "sqrt")
    inner = rs @ b @ rs
    mid = _fn((inner + inner.T) / 2.0, "pow", t)
    out = sq @ mid @ sq
    return (out + out.T) / 2.0


def _log_sum(x: np.ndarray, arrs: list[np.ndarray]):
    """Sum of log(x^{-1/2} a x^{-1/2}) plus the square-root factors of x."""
    wx, qx = _eig(x, True)
    rs = _apply(wx, qx, "inv_sqrt")
    sq = _apply(wx, qx, "sqrt")
    total = np.zeros_like(x)
    for a in arrs:
        inner = rs @ a @ rs
        total = total + _fn((inner + inner.T) / 2.0, "log")
    return (total + total.T) / 2.0, rs, sq


def _karcher(arrs: list[np.ndarray], cfg: MeanConfig):
    n = len(arrs)
    x = _arith(arrs)
    step = 1.0
    grad, _, sq = _log_sum(x, arrs)
    res = frobenius(grad)
    iters = 0
    while res > cfg.karcher_tol * n:
        iters += 1
        if iters > cfg.max_iter:
            raise MaxIterationsExceeded("Karcher iteration", res, cfg.max_iter)
        move = _fn(grad * (step / n), "exp")
        cand = sq @ move @ sq
        cand = (cand + cand.T) / 2.0
        grad_c, _, sq_c = _log_sum(cand, arrs)
        res_c = frobenius(grad_c)
        if res_c < res:
            x, grad, sq, res = cand, grad_c, sq_c, res_c
        else:
            step *= cfg.step_shrink
            if step < _MIN_STEP:
                raise MaxIterationsExceeded("Karcher step search", res, cfg.max_iter)
    return x, MeanIterationInfo(res, iters, step)


def _power(arrs: list[np.ndarray], t: float, cfg: MeanConfig):
    if t < 0.0:
        inv_out, info = _power([_fn(a, "inv") for a in arrs], -t, cfg)
        return _fn(inv_out, "inv"), info
    n = len(arrs)
    x = _arith(arrs)
    diff = math.inf
    for it in range(1, cfg.max_iter + 1):
        nxt = _arith([_geo_t(x, a, t) for a in arrs])
        diff = thompson_arrays(nxt, x)
        x = nxt
        if diff <= cfg.karcher_tol:
            return x, MeanIterationInfo(diff, it, 1.0)
    raise MaxIterationsExceeded(f"power mean (t={t})", diff, cfg.max_iter)


def arith_mean(mats: Sequence[PosDefMatrix]) -> PosDefMatrix:
    """Arithmetic mean."""
    return _wrap(_arith(_collect(mats)))


def harm_mean(mats: Sequence[PosDefMatrix]) -> PosDefMatrix:
    """Harmonic mean: the inverse of the averaged inverses."""
    return _wrap(_harm(_collect(mats)))


def geo_t(a: PosDefMatrix, b: PosDefMatrix, t: float) -> PosDefMatrix:
    """Weighted geometric mean a #_t b for t in [0, 1]."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"interpolation weight must lie in [0, 1], got {t}")
    arrs = _collect([a, b])
    return _wrap(_geo_t(arrs[0], arrs[1], t))


def karcher_mean(mats: Sequence[PosDefMatrix], cfg: MeanConfig = MeanConfig()) -> PosDefMatrix:
    """Least-squares (Karcher) mean of the family.

    Damped fixed-point iteration started at the arithmetic mean; the step is
    shrunk whenever the gradient norm fails to decrease, and the result
    satisfies ||sum_j log(x^{-1/2} a_j x^{-1/2})||_F <= karcher_tol * n.
    """
    return karcher_mean_info(mats, cfg)[0]


def karcher_mean_info(mats: Sequence[PosDefMatrix],
                      cfg: MeanConfig = MeanConfig()) -> tuple[PosDefMatrix, MeanIterationInfo]:
    x, info = _karcher(_collect(mats), cfg)
    return _wrap(x), info


def karcher_residual(x: PosDefMatrix, mats: Sequence[PosDefMatrix]) -> float:
    """Gradient norm of the least-squares objective at x, evaluated fresh."""
    arrs = _collect(mats)
    if x.dim != mats[0].dim:
        raise DimensionMismatch("dimension mismatch between candidate and family")
    grad, _, _ = _log_sum(x.a, arrs)
    return frobenius(grad)


def power_mean(mats: Sequence[PosDefMatrix], t: float,
               cfg: MeanConfig = MeanConfig()) -> PosDefMatrix:
    """Power mean of order t in [-1, 1] excluding 0.

    Positive orders solve the fixed point x = (1/n) sum_j x #_t a_j; negative
    orders are the inversion duals of the positive ones.  The order-0 limit
    is the Karcher mean; request it through karcher_mean.
    """
    if t == 0.0:
        raise ValueError("t = 0 is the Karcher limit; call karcher_mean instead")
    if not (-1.0 <= t <= 1.0):
        raise ValueError(f"power mean order must lie in [-1, 1], got {t}")
    x, _ = _power(_collect(mats), t, cfg)
    return _wrap(x)


def tuple_mean(kind: str, mats: Sequence[PosDefMatrix],
               cfg: MeanConfig = MeanConfig()) -> PosDefMatrix:
    """Dispatch a named mean over a tuple of points."""
    if kind == "arith":
        return arith_mean(mats)
    if kind == "harm":
        return harm_mean(mats)
    if kind == "karcher":
        return karcher_mean(mats, cfg)
    if kind == "power":
        return power_mean(mats, cfg.power_t, cfg)
    raise ValueError(f"unknown mean kind {kind!r}; expected one of {MEAN_KINDS}")


def measure_mean(kind: str, mus: Sequence[FinMeasure],
                 cfg: MeanConfig = MeanConfig()) -> FinMeasure:
    """Mean of measures: push the product measure through the tuple mean.

    Runs exactly when the product support holds at most cfg.product_cap
    atoms.  Beyond the cap, cfg.mc_samples independent draws from each factor
    are averaged instead (seeded, reproducible); the sample count is recorded
    under meta["mc_samples"].
    """
    if kind not in MEAN_KINDS:
        raise ValueError(f"unknown mean kind {kind!r}; expected one of {MEAN_KINDS}")
    if not mus:
        raise ValueError("mean of an empty family of measures is undefined")
    d = mus[0].dim
    for m in mus:
        if m.dim != d:
            raise DimensionMismatch("measures have mixed dimensions")
    try:
        pm = product(mus, cfg.product_cap)
    except ProductCapExceeded:
        if cfg.mc_samples is None:
            raise
        k = cfg.mc_samples
        rng = make_rng(cfg.seed)
        draws = [sample(m, k, rng) for m in mus]
        pairs = [(tuple_mean(kind, [col[i] for col in draws], cfg), 1.0 / k)
                 for i in range(k)]
        return from_atoms(pairs, meta={"mode": "sampled", "mc_samples": k})
    pairs = [(tuple_mean(kind, list(tup), cfg), w) for tup, w in pm.atoms()]
    return from_atoms(pairs, meta={"mode": "exact"})


@dataclass(frozen=True)
class AghReport:
    """Dominance verdicts for the harmonic <= Karcher <= arithmetic chain of
    measure means."""

    harm_vs_karcher: DominanceVerdict
    karcher_vs_arith: DominanceVerdict

    @property
    def holds(self) -> bool:
        return self.harm_vs_karcher.holds and self.karcher_vs_arith.holds


def agh_check(mus: Sequence[FinMeasure], cfg: MeanConfig = MeanConfig(),
              tol: float = 1e-8) -> AghReport:
    """Verify the arithmetic-geometric-harmonic chain in the stochastic
    order for the given family of measures."""
    harm = measure_mean("harm", mus, cfg)
    karcher = measure_mean("karcher", mus, cfg)
    arith = measure_mean("arith", mus, cfg)
    return AghReport(
        harm_vs_karcher=dominates_by_coupling(harm, karcher, tol),
        karcher_vs_arith=dominates_by_coupling(karcher, arith, tol),
    )
