"""Row-distribution samplers, fixed shift matrices, and seeding.

Every sampler draws independent isotropic rows (mean zero, identity
covariance), except the Bernoulli kind whose entries are fair +/-1
signs.  Sampling is keyed by a counter-based Philox generator so that
the matrix for a given ``(master_seed, trial_index)`` pair is a pure
function of those two integers, independent of thread scheduling.

One-dimensional marginal density bounds, where they exist in closed
form:

* ``gaussian``              -- 1 / sqrt(2 pi)
* ``uniform_entry``         -- 1 / (2 sqrt(3))   (uniform on [-sqrt(3), sqrt(3)])
* ``symmetric_exponential`` -- 1 / sqrt(2)       (density exp(-sqrt(2)|x|) / sqrt(2))

The Bernoulli law is discrete (no density); the per-coordinate density
of a row drawn uniformly from the centered ball of radius sqrt(n + 2)
depends on ``n`` and is therefore not recorded on the distribution
object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

KINDS = (
    "gaussian",
    "bernoulli",
    "uniform_entry",
    "symmetric_exponential",
    "ball_uniform",
)

_M1_DENSITY_BOUND = {
    "gaussian": 1.0 / math.sqrt(2.0 * math.pi),
    "uniform_entry": 1.0 / (2.0 * math.sqrt(3.0)),
    "symmetric_exponential": 1.0 / math.sqrt(2.0),
}

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one reproducible random stream.

    The stream is a pure function of ``(master_seed, trial_index)``:
    both integers key a Philox counter-based generator, so distinct
    trials may be sampled concurrently in any order.
    """

    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if self.trial_index < 0:
            raise InvalidInputError("trial_index must be non-negative")

    def rng(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _MASK64, self.trial_index & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RowDistribution:
    """Specification of the law of one matrix row.

    ``density_bound`` is the closed-form bound on the one-dimensional
    marginal density when one is known (filled in automatically) and
    ``None`` otherwise.  ``c2_params`` optionally records a
    ``(K1, K2)`` pair describing polynomial decay of three-dimensional
    projection densities; it is documentation carried by the object,
    never verified at runtime.
    """

    kind: str
    density_bound: float | None = None
    c2_params: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown distribution kind {self.kind!r}; choose from {KINDS}")
        if self.density_bound is None and self.kind in _M1_DENSITY_BOUND:
            object.__setattr__(self, "density_bound", _M1_DENSITY_BOUND[self.kind])
        if self.c2_params is not None:
            k1, k2 = self.c2_params
            if k1 <= 0 or k2 <= 0:
                raise InvalidInputError("c2_params entries must be positive")
            object.__setattr__(self, "c2_params", (float(k1), float(k2)))

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.c2_params is not None:
            d["c2_params"] = list(self.c2_params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RowDistribution":
        c2 = d.get("c2_params")
        return cls(kind=d["kind"], c2_params=tuple(c2) if c2 is not None else None)


def sample_matrix(dist: RowDistribution, n: int, seed: SeedSpec) -> np.ndarray:
    """Draw an ``n x n`` matrix with independent rows from ``dist``.

    gaussian: i.i.d. N(0,1) entries; bernoulli: i.i.d. fair +/-1;
    uniform_entry: i.i.d. uniform on [-sqrt(3), sqrt(3)] (unit
    variance); symmetric_exponential: i.i.d. two-sided exponential
    scaled to unit variance; ball_uniform: each row uniform on the
    centered Euclidean ball of radius sqrt(n + 2) (isotropic,
    log-concave).
    """
    if n < 1:
        raise InvalidInputError("n must be a positive integer")
    rng = seed.rng()
    if dist.kind == "gaussian":
        return rng.standard_normal((n, n))
    if dist.kind == "bernoulli":
        return rng.integers(0, 2, size=(n, n)).astype(float) * 2.0 - 1.0
    if dist.kind == "uniform_entry":
        r = math.sqrt(3.0)
        return rng.uniform(-r, r, size=(n, n))
    if dist.kind == "symmetric_exponential":
        return rng.laplace(0.0, 1.0 / math.sqrt(2.0), size=(n, n))
    if dist.kind == "ball_uniform":
        g = rng.standard_normal((n, n))
        directions = g / np.linalg.norm(g, axis=1, keepdims=True)
        radii = math.sqrt(n + 2.0) * rng.random(n) ** (1.0 / n)
        return directions * radii[:, None]
    raise InvalidInputError(f"unknown distribution kind {dist.kind!r}")


@dataclass(frozen=True)
class ShiftSpec:
    """Recipe for the fixed matrix added to each random realization.

    ``explicit`` carries its entries as nested tuples so that specs
    stay hashable and comparable; :func:`build_shift` materializes the
    numpy array.
    """

    kind: str
    tau: float | None = None
    values: tuple[float, ...] | None = None
    entries: tuple[tuple[float, ...], ...] | None = None

    @classmethod
    def zero(cls) -> "ShiftSpec":
        return cls(kind="zero")

    @classmethod
    def scaled_identity(cls, tau: float) -> "ShiftSpec":
        return cls(kind="scaled_identity", tau=float(tau))

    @classmethod
    def diagonal(cls, values) -> "ShiftSpec":
        return cls(kind="diagonal", values=tuple(float(v) for v in values))

    @classmethod
    def explicit(cls, matrix) -> "ShiftSpec":
        M = np.asarray(matrix, dtype=float)
        return cls(kind="explicit", entries=tuple(tuple(row) for row in M))

    @classmethod
    def counterexample(cls, tau: float) -> "ShiftSpec":
        """Diagonal ``(tau, ..., tau, 0, 0)``: the shift that defeats
        shift-independent bounds for sign matrices."""
        return cls(kind="counterexample", tau=float(tau))

    def label(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "scaled_identity":
            return f"scaled_identity({self.tau:g})"
        if self.kind == "diagonal":
            return "diagonal(" + ",".join(f"{v:g}" for v in self.values) + ")"
        if self.kind == "counterexample":
            return f"counterexample({self.tau:g})"
        return "explicit"

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.tau is not None:
            d["tau"] = self.tau
        if self.values is not None:
            d["values"] = list(self.values)
        if self.entries is not None:
            d["entries"] = [list(row) for row in self.entries]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftSpec":
        kind = d["kind"]
        if kind == "zero":
            return cls.zero()
        if kind == "scaled_identity":
            return cls.scaled_identity(d["tau"])
        if kind == "diagonal":
            return cls.diagonal(d["values"])
        if kind == "explicit":
            return cls.explicit(d["entries"])
        if kind == "counterexample":
            return cls.counterexample(d["tau"])
        raise InvalidInputError(f"unknown shift kind {kind!r}")


def build_shift(spec: ShiftSpec, n: int) -> np.ndarray:
    """Materialize the ``n x n`` shift matrix described by ``spec``."""
    if n < 1:
        raise InvalidInputError("n must be a positive integer")
    if spec.kind == "zero":
        return np.zeros((n, n))
    if spec.kind == "scaled_identity":
        return spec.tau * np.eye(n)
    if spec.kind == "diagonal":
        if len(spec.values) != n:
            raise InvalidInputError(
                f"diagonal shift has {len(spec.values)} values but n={n}"
            )
        return np.diag(np.asarray(spec.values, dtype=float))
    if spec.kind == "explicit":
        M = np.asarray(spec.entries, dtype=float)
        if M.shape != (n, n):
            raise InvalidInputError(f"explicit shift has shape {M.shape}, expected {(n, n)}")
        return M
    if spec.kind == "counterexample":
        if n < 3:
            raise InvalidInputError("counterexample shift needs n >= 3")
        d = np.full(n, float(spec.tau))
        d[-2:] = 0.0
        return np.diag(d)
    raise InvalidInputError(f"unknown shift kind {spec.kind!r}")


def counterexample_witness(B, tau: float) -> np.ndarray:
    """Near-kernel vector of ``B + counterexample shift`` for a sign matrix ``B``.

    With entries of ``B`` in {-1, +1} and ``tau >= n`` the returned
    vector ``X`` has ``X[i] = -(B[i, n-2] + B[i, n-1]) / tau`` for
    ``i <= n - 3`` and ``X[-2] = X[-1] = 1``, and satisfies
    ``sqrt(2) <= norm(X) < 2`` deterministically.
    """
    A = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("B must be square")
    n = A.shape[0]
    if n < 3:
        raise InvalidInputError("witness needs n >= 3")
    if not np.all(np.abs(A) == 1.0):
        raise InvalidInputError("B must have entries in {-1, +1}")
    if tau < n:
        raise InvalidInputError(f"tau={tau} is outside the regime tau >= n={n}")
    X = np.ones(n)
    X[: n - 2] = -(A[: n - 2, n - 2] + A[: n - 2, n - 1]) / float(tau)
    return X
