"""Ladder algebra of a single Casimir block.

Functions on the sphere bundle of a constant-curvature surface split into
invariant blocks labelled by the Gaussian curvature K and a Casimir value
eta >= 0, with at most one basis vector per vertical Fourier mode k.  The
raising and lowering operators move between neighbouring modes, and only
their coefficient magnitudes are fixed by the algebra:

    |raising from mode k|^2  = (eta - K*k - K*k^2) / 4
    |lowering from mode k|^2 = (eta + K*k - K*k^2) / 4

For K > 0 the ladder terminates exactly where a coefficient vanishes; for
K <= 0 and eta > 0 it is infinite and any finite matrix is a truncation
choice.  The eta = 0 block is the single trivial mode k = 0 on which all
ladder operators vanish.

Gauge convention used throughout: the raising coefficient a_k is real with
a_k >= 0 and the lowering coefficient on the same rung is -a_k.  This is
the unique real gauge compatible with raising* = -lowering; it makes
X = raising + lowering a real skew-symmetric matrix, and it leaves every
assembled spectrum unchanged because phase gauges act by diagonal unitary
conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import LadderRangeError

# Absolute tolerance for algebraic identities that are exact in exact
# arithmetic; calibrated for ladders of dimension <= 1e4 with |eta|, |K|
# of desk-scale magnitude.
TOL_ZERO = 1e-12
# Slack allowed when checking coefficient-squared nonnegativity.
TOL_NEG = 1e-12

MAX_LADDER_SLOTS = 20001


def ladder_coeff_sq(eta: float, K: float, k: int) -> float:
    """Squared raising coefficient from mode k to mode k+1.

    Total function; a negative return value means mode k+1 is absent from
    the block.
    """
    return 0.25 * (eta - K * k - K * k * k)


def lowering_coeff_sq(eta: float, K: float, k: int) -> float:
    """Squared lowering coefficient from mode k to mode k-1.

    Algebraically equal to ``ladder_coeff_sq(eta, K, k - 1)``.
    """
    return 0.25 * (eta + K * k - K * k * k)


class LadderExtent(NamedTuple):
    k_min: Optional[int]
    k_max: Optional[int]
    finite: bool


def ladder_extent(eta: float, K: float) -> LadderExtent:
    """Intrinsic mode range of the (eta, K) block.

    For K > 0 returns the maximal integer range around 0 on which every
    internal rung has a nonnegative squared coefficient; for K <= 0 and
    eta > 0 the ladder never terminates and both ends are None.  eta = 0
    always yields the single mode {0}.
    """
    if not eta >= 0.0:
        raise LadderRangeError(f"eta must be nonnegative, got {eta!r}")
    if eta == 0.0:
        return LadderExtent(0, 0, True)
    if K <= 0.0:
        return LadderExtent(None, None, False)

    # k_max solves k^2 + k <= eta/K, so the scan below always terminates.
    cap = int(math.sqrt(eta / K)) + 2
    if cap > MAX_LADDER_SLOTS:
        raise LadderRangeError(f"ladder extent exceeds {MAX_LADDER_SLOTS} slots")
    k_max = None
    for k in range(0, cap + 1):
        if ladder_coeff_sq(eta, K, k) <= TOL_ZERO:
            k_max = k
            break
    k_min = None
    for k in range(0, -cap - 1, -1):
        if lowering_coeff_sq(eta, K, k) <= TOL_ZERO:
            k_min = k
            break
    if k_max is None or k_min is None:  # unreachable given the cap bound
        raise LadderRangeError("ladder scan failed to terminate")
    return LadderExtent(k_min, k_max, True)


@dataclass(frozen=True, eq=False)
class CasimirBlock:
    """One invariant block: curvature, Casimir value and mode range.

    ``finite`` records whether the range is intrinsic (K > 0 or eta = 0)
    rather than a truncation choice.
    """

    curvature: float
    eta: float
    k_min: int
    k_max: int
    finite: bool

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise LadderRangeError(f"eta must be nonnegative, got {self.eta!r}")
        if not (isinstance(self.k_min, int) and isinstance(self.k_max, int)):
            raise LadderRangeError("k_min and k_max must be integers")
        if not self.k_min <= 0 <= self.k_max:
            raise LadderRangeError("mode range must contain k = 0")
        if self.dim > MAX_LADDER_SLOTS:
            raise LadderRangeError(f"block dimension exceeds {MAX_LADDER_SLOTS}")
        K, eta = self.curvature, self.eta
        if eta == 0.0:
            if self.k_min != 0 or self.k_max != 0 or not self.finite:
                raise LadderRangeError("eta = 0 block is the single mode {0}")
            return
        if K <= 0.0 and self.finite:
            raise LadderRangeError("K <= 0 with eta > 0 is never intrinsically finite")
        if K > 0.0 and not self.finite:
            raise LadderRangeError("K > 0 blocks terminate intrinsically; no truncation")
        for k in range(self.k_min, self.k_max + 1):
            if ladder_coeff_sq(eta, K, k) < -TOL_NEG and k != self.k_max:
                raise LadderRangeError(f"negative squared coefficient inside ladder at k={k}")
        if self.finite:
            top = ladder_coeff_sq(eta, K, self.k_max)
            bot = lowering_coeff_sq(eta, K, self.k_min)
            if abs(top) > TOL_ZERO or abs(bot) > TOL_ZERO:
                raise LadderRangeError(
                    "finite ladder must terminate exactly where a coefficient vanishes"
                )

    @property
    def dim(self) -> int:
        return self.k_max - self.k_min + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def slot0(self) -> int:
        """Array index of the k = 0 mode."""
        return -self.k_min


def finite_block(eta: float, K: float) -> CasimirBlock:
    """Block on the intrinsic mode range; requires K > 0 or eta = 0."""
    ext = ladder_extent(eta, K)
    if not ext.finite:
        raise LadderRangeError("block is infinite; choose a truncation instead")
    return CasimirBlock(curvature=K, eta=eta, k_min=ext.k_min, k_max=ext.k_max, finite=True)


@dataclass(frozen=True, eq=False)
class LadderCoefficients:
    """Raising coefficients a_k >= 0 of one block in the fixed real gauge.

    ``a[j]`` couples array slot j (mode k_min + j) to slot j + 1.
    """

    block: CasimirBlock
    a: np.ndarray

    def __post_init__(self):
        block = self.block
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if a.shape != (block.dim - 1,):
            raise LadderRangeError("coefficient array length must be dim - 1")
        if np.any(a < 0.0):
            raise LadderRangeError("gauge requires a_k >= 0")
        eta, K = block.eta, block.curvature
        for j, k in enumerate(range(block.k_min, block.k_max)):
            up = ladder_coeff_sq(eta, K, k)
            down = lowering_coeff_sq(eta, K, k + 1)
            # identity is exact in exact arithmetic; allow rounding noise
            # proportional to the coefficient magnitude
            tol = TOL_ZERO * (1.0 + abs(up))
            if abs(a[j] ** 2 - up) > tol:
                raise LadderRangeError(f"a_{k}^2 violates the raising norm identity")
            if abs(a[j] ** 2 - down) > tol:
                raise LadderRangeError(f"a_{k}^2 violates the lowering norm identity")


def ladder_coefficients(block: CasimirBlock) -> LadderCoefficients:
    """Compute the gauge-fixed coefficients of a block."""
    ks = np.arange(block.k_min, block.k_max)
    sq = 0.25 * (block.eta - block.curvature * ks - block.curvature * ks * ks)
    if np.any(sq < -TOL_NEG):
        raise LadderRangeError("requested range leaves the block (negative coefficient)")
    return LadderCoefficients(block=block, a=np.sqrt(np.clip(sq, 0.0, None)))


def raising_matrix(coeffs: LadderCoefficients) -> np.ndarray:
    """Dense matrix of the raising operator: entry [j+1, j] = a_j."""
    n = coeffs.block.dim
    m = np.zeros((n, n))
    if n > 1:
        m[np.arange(1, n), np.arange(n - 1)] = coeffs.a
    return m


def lowering_matrix(coeffs: LadderCoefficients) -> np.ndarray:
    """Dense matrix of the lowering operator: entry [j, j+1] = -a_j."""
    n = coeffs.block.dim
    m = np.zeros((n, n))
    if n > 1:
        m[np.arange(n - 1), np.arange(1, n)] = -coeffs.a
    return m


def coupling_matrix(coeffs: LadderCoefficients) -> np.ndarray:
    """Geodesic coupling X = raising + lowering; real skew-symmetric."""
    return raising_matrix(coeffs) + lowering_matrix(coeffs)


def vertical_matrix(block: CasimirBlock) -> np.ndarray:
    """Vertical rotation generator V = diag(i*k)."""
    return np.diag(1j * block.ks.astype(float))


def casimir_residual(coeffs: LadderCoefficients) -> float:
    """Max-norm defect of the Casimir identity on interior rows.

    Assembles -4*X_+*X_- + i*K*V - K*V^2 - eta*I on the block and takes the
    maximum absolute entry over rows whose product stencil does not touch a
    truncation boundary.  On intrinsically finite ladders every row is
    interior; on truncations the first and last rows are excluded.
    """
    block = coeffs.block
    K, eta = block.curvature, block.eta
    xp = raising_matrix(coeffs)
    xm = lowering_matrix(coeffs)
    v = vertical_matrix(block)
    m = -4.0 * (xp @ xm) + 1j * K * v - K * (v @ v) - eta * np.eye(block.dim)
    if block.finite:
        rows = m
    else:
        if block.dim <= 2:
            return 0.0
        rows = m[1:-1]
    return float(np.max(np.abs(rows)))
