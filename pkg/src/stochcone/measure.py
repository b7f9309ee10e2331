"""Finitely supported probability measures on the positive-definite cone.

Atoms closer than ATOM_MERGE_TOL in Frobenius distance are considered the
same point and their weights are merged, so every FinMeasure has a separated
support.  All randomness flows through an explicitly keyed Philox generator
(see make_rng) so sampling is reproducible bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .cone import PosDefMatrix, posdef
from .matfun import DimensionMismatch, frobenius

__all__ = [
    "FinMeasure",
    "ProductMeasure",
    "ATOM_MERGE_TOL",
    "ProductCapExceeded",
    "PushForwardError",
    "make_rng",
    "dirac",
    "from_atoms",
    "push_forward",
    "invert",
    "product",
    "sample",
    "measure_to_json",
    "measure_from_json",
    "measures_allclose",
]

ATOM_MERGE_TOL = 1e-10
_WEIGHT_SUM_TOL = 1e-12
DEFAULT_PRODUCT_CAP = 4096


class ProductCapExceeded(ValueError):
    """Materializing the product would exceed the atom-count cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"product support has {size} atoms, above the cap {cap}; "
            f"use sampled evaluation instead"
        )


class PushForwardError(RuntimeError):
    """The map failed on one of the atoms."""

    def __init__(self, index: int, cause: BaseException):
        self.index = index
        super().__init__(f"push-forward map failed on atom {index}: {cause}")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox4x64 generator keyed by (seed, stream).

    The key is the 128-bit integer seed * 2^64 + stream, so distinct streams
    under one seed are independent and every draw is reproducible across
    platforms and processes.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + int(stream)))


@dataclass(frozen=True, eq=False)
class FinMeasure:
    """Probability measure with finitely many positive-definite atoms.

    Invariants: weights strictly positive and summing to one, all atoms of a
    common dimension, pairwise Frobenius separation above ATOM_MERGE_TOL.
    Build through from_atoms/dirac, which normalize and deduplicate.
    """

    points: tuple[PosDefMatrix, ...]
    weights: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.points:
            raise ValueError("a measure needs at least one atom")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.points),):
            raise DimensionMismatch("one weight per atom required")
        if not np.isfinite(w).all() or np.any(w <= 0.0):
            raise ValueError("weights must be finite and strictly positive")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        d = self.points[0].dim
        for p in self.points:
            if p.dim != d:
                raise DimensionMismatch("atoms have mixed dimensions")
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                if frobenius(self.points[i].a - self.points[j].a) <= ATOM_MERGE_TOL:
                    raise ValueError(f"atoms {i} and {j} coincide within {ATOM_MERGE_TOL}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def dim(self) -> int:
        return self.points[0].dim

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def atoms(self) -> list[tuple[PosDefMatrix, float]]:
        return list(zip(self.points, (float(x) for x in self.weights)))


def dirac(x: PosDefMatrix) -> FinMeasure:
    """Point mass at x."""
    return FinMeasure((x,), np.array([1.0]))


def from_atoms(pairs: Iterable[tuple[PosDefMatrix, float]], meta: dict | None = None) -> FinMeasure:
    """Build a measure from (point, weight) pairs.

    Weights are normalized to total mass one; atoms within ATOM_MERGE_TOL of
    an earlier atom are merged into it (first-seen order is kept).
    """
    points: list[PosDefMatrix] = []
    weights: list[float] = []
    for k, (p, w) in enumerate(pairs):
        w = float(w)
        if not math.isfinite(w) or w < 0.0:
            raise ValueError(f"weight {k} is {w!r}; weights must be finite and >= 0")
        if w == 0.0:
            continue
        for i, q in enumerate(points):
            if frobenius(p.a - q.a) <= ATOM_MERGE_TOL:
                weights[i] += w
                break
        else:
            points.append(p)
            weights.append(w)
    total = sum(weights)
    if total <= 0.0:
        raise ValueError("total weight must be positive")
    w_arr = np.asarray(weights) / total
    return FinMeasure(tuple(points), w_arr, meta or {})


def push_forward(mu: FinMeasure, f: Callable[[PosDefMatrix], PosDefMatrix]) -> FinMeasure:
    """Image measure under an atom-wise map; merged atoms pool their mass."""
    pairs = []
    for i, (p, w) in enumerate(mu.atoms):
        try:
            pairs.append((f(p), w))
        except Exception as exc:
            raise PushForwardError(i, exc) from exc
    return from_atoms(pairs)


def invert(mu: FinMeasure) -> FinMeasure:
    """Push-forward under matrix inversion."""
    from .matfun import matrix_fn  # local import to keep module load light

    return push_forward(mu, lambda p: PosDefMatrix(matrix_fn(p.m, "inv"), p.pd_floor))


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    """Lazy product of finitely many measures on a common cone."""

    factors: tuple[FinMeasure, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("empty product")
        d = self.factors[0].dim
        for m in self.factors:
            if m.dim != d:
                raise DimensionMismatch("product factors have mixed dimensions")

    @property
    def size(self) -> int:
        n = 1
        for m in self.factors:
            n *= m.size
        return n

    @property
    def dim(self) -> int:
        return self.factors[0].dim

    def atoms(self) -> Iterator[tuple[tuple[PosDefMatrix, ...], float]]:
        """Stream of (atom tuple, product weight), in lexicographic order."""

        def rec(k: int, pts: tuple, w: float):
            if k == len(self.factors):
                yield pts, w
                return
            for p, wk in self.factors[k].atoms:
                yield from rec(k + 1, pts + (p,), w * wk)

        return rec(0, (), 1.0)


def product(measures: Sequence[FinMeasure], cap: int = DEFAULT_PRODUCT_CAP) -> ProductMeasure:
    """Product measure, guarded by the materialization cap."""
    pm = ProductMeasure(tuple(measures))
    if pm.size > cap:
        raise ProductCapExceeded(pm.size, cap)
    return pm


def sample(mu: FinMeasure, k: int, rng: int | np.random.Generator) -> list[PosDefMatrix]:
    """Draw k atoms by inverse-CDF lookup; deterministic for a fixed seed."""
    if k < 0:
        raise ValueError("sample count must be >= 0")
    gen = make_rng(rng) if isinstance(rng, int) else rng
    cdf = np.cumsum(mu.weights)
    cdf[-1] = 1.0  # guard the top edge against rounding
    u = gen.random(k)
    idx = np.searchsorted(cdf, u, side="right")
    return [mu.points[int(i)] for i in idx]


def measure_to_json(mu: FinMeasure) -> str:
    """Serialize as {"dim": d, "atoms": [{"weight": w, "matrix": [...]}]} with
    row-major matrix entries and round-trip-exact floats."""
    doc = {
        "dim": mu.dim,
        "atoms": [
            {"weight": float(w), "matrix": [float(v) for v in p.a.reshape(-1)]}
            for p, w in mu.atoms
        ],
    }
    return json.dumps(doc)


def measure_from_json(text: str | dict, pd_floor: float | None = None) -> FinMeasure:
    """Parse the JSON measure format; validation errors surface as ValueError."""
    doc = json.loads(text) if isinstance(text, str) else text
    if not isinstance(doc, dict) or "dim" not in doc or "atoms" not in doc:
        raise ValueError("measure document needs 'dim' and 'atoms'")
    d = int(doc["dim"])
    if d < 1:
        raise ValueError(f"bad dimension {d}")
    pairs = []
    for k, atom in enumerate(doc["atoms"]):
        flat = atom.get("matrix")
        if flat is None or len(flat) != d * d:
            raise ValueError(f"atom {k}: expected {d * d} matrix entries")
        arr = np.asarray(flat, dtype=float).reshape(d, d)
        p = posdef(arr) if pd_floor is None else posdef(arr, pd_floor)
        pairs.append((p, float(atom["weight"])))
    return from_atoms(pairs)


def measures_allclose(mu: FinMeasure, nu: FinMeasure,
                      atom_tol: float = 1e-9, weight_tol: float = 1e-9) -> bool:
    """Atom-wise equality up to a permutation, by greedy nearest matching."""
    if mu.dim != nu.dim or mu.size != nu.size:
        return False
    used = [False] * nu.size
    for p, w in mu.atoms:
        best, best_d = -1, math.inf
        for j, (q, _) in enumerate(nu.atoms):
            if used[j]:
                continue
            dist = frobenius(p.a - q.a)
            if dist < best_d:
                best, best_d = j, dist
        if best < 0 or best_d > atom_tol:
            return False
        if abs(w - float(nu.weights[best])) > weight_tol:
            return False
        used[best] = True
    return True
