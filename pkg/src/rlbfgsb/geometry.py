"""Geometry of the search space: a box times an optional Riemannian manifold.

The optimization domain is the product of a Euclidean hypercube
``D = [l_1, u_1] x ... x [l_n, u_n]`` (bounds may be infinite) with an
optional Riemannian manifold ``M``.  Points and tangent vectors carry one
array per factor.  Either factor may be empty: a pure box problem uses
``manifold=None``, a pure manifold problem uses a zero-length box.

Three concrete manifolds are provided:

- :class:`Sphere` -- unit vectors in ``R^d`` with the exact exponential map,
  logarithm, and parallel transport along great circles.
- :class:`Stiefel` -- ``k x r`` matrices with orthonormal rows, QR retraction
  and projection-based vector transport.
- :class:`SpecialOrthogonal` -- rotation matrices, sharing the Stiefel
  machinery (the QR retraction preserves the determinant-one component).

The box factor is flat: retraction is translation and transport is the
identity.  :meth:`Geometry.project_tangent_cone` zeroes tangent components
that point out of the feasible box at active bounds, leaving the manifold
part untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoxBounds",
    "GeometryError",
    "Geometry",
    "Manifold",
    "ProductPoint",
    "ProductTangent",
    "Sphere",
    "SpecialOrthogonal",
    "Stiefel",
    "clamp_to_box",
]


class GeometryError(ValueError):
    """Raised when a geometric operation leaves its domain of validity."""


# ---------------------------------------------------------------------------
# Box bounds


@dataclass(frozen=True)
class BoxBounds:
    """Componentwise bounds ``lower <= x <= upper``; entries may be infinite.

    Lower bounds live in ``[-inf, inf)`` and upper bounds in ``(-inf, inf]``.
    A zero-length box is valid and denotes an absent Euclidean factor.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or upper.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("lower bounds must be < +inf and upper bounds > -inf")
        if np.any(lower > upper):
            raise ValueError("lower bounds must not exceed upper bounds")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def clamp(self, x: np.ndarray) -> np.ndarray:
        """Clip ``x`` componentwise into ``[lower, upper]``."""
        x = np.asarray(x, dtype=float)
        if x.shape != self.lower.shape:
            raise ValueError(f"expected vector of length {self.n}, got shape {x.shape}")
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def violation(self, x: np.ndarray) -> float:
        """Largest bound breach of ``x`` (0.0 when feasible)."""
        if self.n == 0:
            return 0.0
        x = np.asarray(x, dtype=float)
        below = np.where(np.isfinite(self.lower), self.lower - x, -np.inf)
        above = np.where(np.isfinite(self.upper), x - self.upper, -np.inf)
        return float(max(0.0, np.max(below), np.max(above)))

    @staticmethod
    def unbounded(n: int) -> "BoxBounds":
        return BoxBounds(np.full(n, -np.inf), np.full(n, np.inf))

    @staticmethod
    def empty() -> "BoxBounds":
        return BoxBounds(np.zeros(0), np.zeros(0))


def clamp_to_box(bounds: BoxBounds, x: np.ndarray) -> np.ndarray:
    """Project a vector onto the box (used for feasible initialization)."""
    return bounds.clamp(x)


# ---------------------------------------------------------------------------
# Points and tangent vectors on the product


@dataclass
class ProductPoint:
    """A point ``(x_D, p_M)``: box coordinates plus an optional manifold part."""

    euclidean: np.ndarray
    manifold: np.ndarray | None = None

    def __post_init__(self):
        self.euclidean = np.atleast_1d(np.asarray(self.euclidean, dtype=float))
        if self.manifold is not None:
            self.manifold = np.asarray(self.manifold, dtype=float)

    def copy(self) -> "ProductPoint":
        m = None if self.manifold is None else self.manifold.copy()
        return ProductPoint(self.euclidean.copy(), m)


@dataclass
class ProductTangent:
    """A tangent vector ``(v_D, X_M)`` at some product point."""

    euclidean: np.ndarray
    manifold: np.ndarray | None = None

    def __post_init__(self):
        self.euclidean = np.atleast_1d(np.asarray(self.euclidean, dtype=float))
        if self.manifold is not None:
            self.manifold = np.asarray(self.manifold, dtype=float)

    def copy(self) -> "ProductTangent":
        m = None if self.manifold is None else self.manifold.copy()
        return ProductTangent(self.euclidean.copy(), m)

    def __add__(self, other: "ProductTangent") -> "ProductTangent":
        m = None
        if self.manifold is not None:
            m = self.manifold + other.manifold
        return ProductTangent(self.euclidean + other.euclidean, m)

    def __sub__(self, other: "ProductTangent") -> "ProductTangent":
        m = None
        if self.manifold is not None:
            m = self.manifold - other.manifold
        return ProductTangent(self.euclidean - other.euclidean, m)

    def __mul__(self, a: float) -> "ProductTangent":
        m = None if self.manifold is None else a * self.manifold
        return ProductTangent(a * self.euclidean, m)

    __rmul__ = __mul__

    def __neg__(self) -> "ProductTangent":
        return self * -1.0


# ---------------------------------------------------------------------------
# Manifold factors


def _qf(a: np.ndarray) -> np.ndarray:
    """Q factor of the reduced QR decomposition, sign-fixed so diag(R) > 0."""
    q, r = np.linalg.qr(a)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


class Manifold:
    """Operations a manifold factor must supply to the product geometry.

    The metric is the one induced by the Euclidean embedding, so ``inner``
    is the plain (Frobenius) dot product for every concrete manifold here.
    """

    #: Conservative bound on the usable step length (injectivity radius).
    max_stepsize: float = np.inf

    def inner(self, p: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.sum(x * y))

    def retract(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse_retract(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def transport(self, p: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_tangent(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def membership_residual(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def tangency_residual(self, p: np.ndarray, x: np.ndarray) -> float:
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def random_tangent(self, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class Sphere(Manifold):
    """Unit sphere ``S^{d-1}`` embedded in ``R^d``; exact geodesic operations."""

    max_stepsize = math.pi

    def __init__(self, ambient_dim: int):
        if ambient_dim < 2:
            raise ValueError("sphere needs ambient dimension >= 2")
        self.ambient_dim = int(ambient_dim)

    def retract(self, p, x):
        theta = float(np.linalg.norm(x))
        if theta == 0.0:
            return p.copy()
        return math.cos(theta) * p + math.sin(theta) / theta * x

    def inverse_retract(self, p, q):
        c = float(np.clip(np.dot(p, q), -1.0, 1.0))
        if c <= -1.0 + 1e-12:
            raise GeometryError("logarithm undefined for antipodal points")
        u = q - c * p
        nu = float(np.linalg.norm(u))
        if nu < 1e-15:
            return np.zeros_like(p)
        return math.acos(c) * u / nu

    def transport(self, p, x, v):
        # Parallel transport along the geodesic t -> exp_p(t x).
        theta = float(np.linalg.norm(x))
        if theta == 0.0:
            return v.copy()
        u = x / theta
        uv = float(np.dot(u, v))
        return v + uv * ((math.cos(theta) - 1.0) * u - math.sin(theta) * p)

    def project_tangent(self, p, v):
        return v - float(np.dot(p, v)) * p

    def membership_residual(self, p):
        return abs(float(np.linalg.norm(p)) - 1.0)

    def tangency_residual(self, p, x):
        return abs(float(np.dot(p, x)))

    def random_point(self, rng):
        v = rng.standard_normal(self.ambient_dim)
        return v / np.linalg.norm(v)

    def random_tangent(self, p, rng):
        return self.project_tangent(p, rng.standard_normal(self.ambient_dim))


def _qr_inverse_retract_cols(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Invert the QR retraction for orthonormal-columns matrices.

    Finds the tangent ``v`` at ``x`` with ``qf(x + v) = y`` by solving
    ``A R + R^T A^T = 2 I`` (``A = x^T y``) for an upper-triangular ``R``
    with positive diagonal, then ``v = y R - x``.  The triangularity
    constraint is linear in the skew part of ``A R`` and is solved densely;
    the system has ``k (k - 1) / 2`` unknowns for ``k`` columns.
    """
    k = x.shape[1]
    a = x.T @ y
    if abs(np.linalg.det(a)) < 1e-12:
        raise GeometryError("points outside the retraction's invertibility region")
    g = np.linalg.inv(a)
    if k == 1:
        r = g  # scalar case: A R + R A = 2 -> R = 1 / A
    else:
        # Unknowns: strictly lower entries of skew S with R = G (I + S)
        # upper triangular, i.e. tril(G S, -1) = -tril(G, -1).
        idx = [(i, j) for j in range(k) for i in range(j + 1, k)]
        m = len(idx)
        sys_mat = np.zeros((m, m))
        rhs = np.empty(m)
        for row, (i, j) in enumerate(idx):
            rhs[row] = -g[i, j]
            for col, (aa, bb) in enumerate(idx):
                # Basis element E = e_a e_b^T - e_b e_a^T; coefficient of
                # (G E)_{ij} in the strictly-lower constraint.
                coef = 0.0
                if bb == j:
                    coef += g[i, aa]
                if aa == j:
                    coef -= g[i, bb]
                sys_mat[row, col] = coef
        sol = np.linalg.solve(sys_mat, rhs)
        s = np.zeros((k, k))
        for val, (i, j) in zip(sol, idx):
            s[i, j] = val
            s[j, i] = -val
        r = g @ (np.eye(k) + s)
    if np.any(np.diag(r) <= 0):
        raise GeometryError("points outside the retraction's invertibility region")
    return y @ r - x


class Stiefel(Manifold):
    """Matrices ``W`` of shape ``k x r`` with orthonormal rows (``W W^T = I``).

    Retraction is the QR retraction (applied to the transpose, which has
    orthonormal columns); vector transport projects onto the tangent space
    at the target point.
    """

    max_stepsize = math.pi

    def __init__(self, k: int, r: int):
        if not 1 <= k <= r:
            raise ValueError("Stiefel(k, r) requires 1 <= k <= r")
        self.k = int(k)
        self.r = int(r)

    def retract(self, p, x):
        return _qf((p + x).T).T

    def inverse_retract(self, p, q):
        return _qr_inverse_retract_cols(p.T, q.T).T

    def transport(self, p, x, v):
        return self.project_tangent(self.retract(p, x), v)

    def project_tangent(self, p, v):
        return v - _sym(v @ p.T) @ p

    def membership_residual(self, p):
        return float(np.max(np.abs(p @ p.T - np.eye(self.k))))

    def tangency_residual(self, p, x):
        return float(np.max(np.abs(_sym(x @ p.T))))

    def random_point(self, rng):
        return _qf(rng.standard_normal((self.r, self.k))).T

    def random_tangent(self, p, rng):
        return self.project_tangent(p, rng.standard_normal((self.k, self.r)))


class SpecialOrthogonal(Stiefel):
    """Rotation matrices ``SO(r)``: orthogonal with determinant one.

    The QR retraction keeps the determinant-one component: a tangent step
    ``Q Omega`` (skew ``Omega``) gives ``det(Q + Q Omega) = det(I + Omega) > 0``.
    """

    def __init__(self, r: int):
        if r < 2:
            raise ValueError("SO(r) requires r >= 2")
        super().__init__(r, r)

    def membership_residual(self, p):
        ortho = float(np.max(np.abs(p.T @ p - np.eye(self.r))))
        return max(ortho, abs(float(np.linalg.det(p)) - 1.0))

    def random_point(self, rng):
        q = _qf(rng.standard_normal((self.r, self.r)))
        if np.linalg.det(q) < 0:
            q = q.copy()
            q[:, 0] = -q[:, 0]
        return q


# ---------------------------------------------------------------------------
# Product geometry


@dataclass(frozen=True)
class Geometry:
    """Product of a box with an optional manifold, under the product metric."""

    box: BoxBounds
    manifold: Manifold | None = None

    # -- validation helpers

    def _check_point(self, p: ProductPoint) -> None:
        if p.euclidean.shape[0] != self.box.n:
            raise ValueError(
                f"point has {p.euclidean.shape[0]} box coordinates, expected {self.box.n}"
            )
        if (p.manifold is None) != (self.manifold is None):
            raise ValueError("point manifold part does not match the geometry")

    def _check_tangent(self, x: ProductTangent) -> None:
        if x.euclidean.shape[0] != self.box.n:
            raise ValueError(
                f"tangent has {x.euclidean.shape[0]} box coordinates, expected {self.box.n}"
            )
        if (x.manifold is None) != (self.manifold is None):
            raise ValueError("tangent manifold part does not match the geometry")

    # -- metric

    def inner(self, p: ProductPoint, x: ProductTangent, y: ProductTangent) -> float:
        self._check_tangent(x)
        self._check_tangent(y)
        val = float(np.dot(x.euclidean, y.euclidean))
        if self.manifold is not None:
            val += self.manifold.inner(p.manifold, x.manifold, y.manifold)
        return val

    def norm(self, p: ProductPoint, x: ProductTangent) -> float:
        return math.sqrt(max(0.0, self.inner(p, x, x)))

    # -- retraction machinery

    def retract(self, p: ProductPoint, x: ProductTangent) -> ProductPoint:
        """Move from ``p`` along ``x``.

        The box part is the translation ``p + x``; callers guarantee
        feasibility of the step, and the clip below only absorbs
        floating-point drift so iterates never leave the box.
        """
        self._check_point(p)
        self._check_tangent(x)
        eu = self.box.clamp(p.euclidean + x.euclidean) if self.box.n else p.euclidean.copy()
        m = None
        if self.manifold is not None:
            m = self.manifold.retract(p.manifold, x.manifold)
        return ProductPoint(eu, m)

    def inverse_retract(self, p: ProductPoint, q: ProductPoint) -> ProductTangent:
        self._check_point(p)
        self._check_point(q)
        m = None
        if self.manifold is not None:
            m = self.manifold.inverse_retract(p.manifold, q.manifold)
        return ProductTangent(q.euclidean - p.euclidean, m)

    def transport(
        self, p: ProductPoint, x: ProductTangent, v: ProductTangent
    ) -> ProductTangent:
        """Carry ``v`` from ``T_p`` to the tangent space at ``retract(p, x)``."""
        self._check_tangent(x)
        self._check_tangent(v)
        m = None
        if self.manifold is not None:
            m = self.manifold.transport(p.manifold, x.manifold, v.manifold)
        return ProductTangent(v.euclidean.copy(), m)

    def project_tangent_cone(self, p: ProductPoint, x: ProductTangent) -> ProductTangent:
        """Zero box components pointing out of the feasible set at active bounds."""
        self._check_point(p)
        self._check_tangent(x)
        eu = x.euclidean.copy()
        if self.box.n:
            at_lower = (p.euclidean == self.box.lower) & (eu < 0)
            at_upper = (p.euclidean == self.box.upper) & (eu > 0)
            eu[at_lower | at_upper] = 0.0
        m = None if x.manifold is None else x.manifold.copy()
        return ProductTangent(eu, m)

    def max_stepsize(self, p: ProductPoint | None = None) -> float:
        """Largest safe step along any direction (minimum over the factors)."""
        return np.inf if self.manifold is None else float(self.manifold.max_stepsize)

    # -- constructors and checks

    def zero_tangent(self, p: ProductPoint) -> ProductTangent:
        m = None if self.manifold is None else np.zeros_like(p.manifold)
        return ProductTangent(np.zeros(self.box.n), m)

    def random_point(self, rng: np.random.Generator) -> ProductPoint:
        lo = np.where(np.isfinite(self.box.lower), self.box.lower, -2.0)
        hi = np.where(np.isfinite(self.box.upper), self.box.upper, 2.0)
        hi = np.maximum(hi, lo)
        eu = lo + (hi - lo) * rng.random(self.box.n)
        m = None if self.manifold is None else self.manifold.random_point(rng)
        return ProductPoint(eu, m)

    def random_tangent(self, p: ProductPoint, rng: np.random.Generator) -> ProductTangent:
        eu = rng.standard_normal(self.box.n)
        m = None
        if self.manifold is not None:
            m = self.manifold.random_tangent(p.manifold, rng)
        return ProductTangent(eu, m)

    def is_feasible(self, p: ProductPoint, atol: float = 0.0) -> bool:
        self._check_point(p)
        ok = self.box.contains(p.euclidean, atol=atol)
        if ok and self.manifold is not None:
            ok = self.manifold.membership_residual(p.manifold) <= max(atol, 1e-8)
        return ok

    def membership_residual(self, p: ProductPoint) -> float:
        res = self.box.violation(p.euclidean)
        if self.manifold is not None:
            res = max(res, self.manifold.membership_residual(p.manifold))
        return res

    def tangency_residual(self, p: ProductPoint, x: ProductTangent) -> float:
        if self.manifold is None:
            return 0.0
        return self.manifold.tangency_residual(p.manifold, x.manifold)
