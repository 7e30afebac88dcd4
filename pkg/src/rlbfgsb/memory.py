"""Limited-memory BFGS operator in compact form over product tangent spaces.

The Hessian approximation is never materialized.  It is represented by up to
``capacity`` stored pairs ``(s_i, y_i)`` (step and gradient difference, both
expressed in the tangent space of the current iterate), a positive scaling
``theta``, and a small ``2 mu x 2 mu`` "middle matrix" ``M``:

    <X, H[Y]> = theta <X, Y> - [Wy(X); Ws(X)]^T  M  [Wy(Y); Ws(Y)]

with coefficient maps ``Wy(X)_i = <y_i, X>`` and ``Ws(X)_i = theta <s_i, X>``.
``M`` is the inverse of the block matrix ``[[-D, L^T], [L, Q]]`` where
``D = diag(<s_i, y_i>)``, ``Q = theta [<s_i, s_j>]`` and ``L`` is the strictly
lower triangular part of ``[<s_i, y_j>]``.  The inverse is assembled from a
single factorization of the Schur complement ``Q + L D^{-1} L^T``.

The inverse operator ``B = H^{-1}`` is applied with the classical two-loop
recursion seeded with ``(1/theta) Id``; by the standard duality of the BFGS
and inverse-BFGS updates the two representations are exact inverses of each
other, which the test-suite checks against dense oracles.

Between outer iterations every stored pair is carried to the new tangent
space by the geometry's vector transport; pairs whose curvature
``<s, y> >= eps ||y||^2`` is destroyed by the transport are discarded, which
keeps the operator positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Geometry, ProductPoint, ProductTangent

__all__ = ["LbfgsMemory", "MemoryPair", "SingularMiddleMatrix", "make_pair"]

# Condition-number cutoff above which the middle matrix is declared unusable.
_COND_LIMIT = 1e14


class SingularMiddleMatrix(RuntimeError):
    """Middle-matrix factorization failed; the caller should reset the memory."""


@dataclass
class MemoryPair:
    """One stored update pair, tangent at the current iterate."""

    s: ProductTangent
    y: ProductTangent
    sy: float


def make_pair(
    geom: Geometry,
    p_old: ProductPoint,
    step: ProductTangent,
    grad_old: ProductTangent,
    grad_new: ProductTangent,
    beta: float = 1.0,
) -> tuple[ProductTangent, ProductTangent]:
    """Build the update pair for the step ``retract(p_old, step)``.

    Returns ``s = T(step)`` and ``y = grad_new / beta - T(grad_old)`` where
    ``T`` transports from ``p_old`` along ``step``; both are tangent at the
    new point.  ``grad_new`` must already live there.
    """
    s = geom.transport(p_old, step, step)
    y = (1.0 / beta) * grad_new - geom.transport(p_old, step, grad_old)
    return s, y


class LbfgsMemory:
    """FIFO store of curvature pairs plus the derived compact-form data."""

    def __init__(self, capacity: int = 10, curvature_eps: float = 1e-8):
        if capacity < 1:
            raise ValueError("memory capacity must be >= 1")
        if curvature_eps <= 0:
            raise ValueError("curvature_eps must be positive")
        self.capacity = int(capacity)
        self.curvature_eps = float(curvature_eps)
        self.pairs: list[MemoryPair] = []
        self.theta = 1.0
        self._middle = np.zeros((0, 0))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def reset(self) -> None:
        """Drop all pairs and fall back to the identity scaling."""
        self.pairs.clear()
        self.theta = 1.0
        self._middle = np.zeros((0, 0))

    # ------------------------------------------------------------------
    # Updates

    def _passes_curvature(self, sy: float, yy: float) -> bool:
        return yy > 0.0 and sy >= self.curvature_eps * yy

    def push(
        self, geom: Geometry, p: ProductPoint, s: ProductTangent, y: ProductTangent
    ) -> bool:
        """Admit a new pair; returns False when the curvature test rejects it.

        On acceptance the oldest pair is evicted if the memory is full, the
        scaling becomes ``<y, y> / <s, y>`` of the new pair, and the middle
        matrix is reassembled.
        """
        sy = geom.inner(p, s, y)
        yy = geom.inner(p, y, y)
        if not self._passes_curvature(sy, yy):
            return False
        if len(self.pairs) == self.capacity:
            self.pairs.pop(0)
        self.pairs.append(MemoryPair(s.copy(), y.copy(), sy))
        self.theta = yy / sy
        self._refresh_middle(geom, p)
        return True

    def transport(self, geom: Geometry, p_old: ProductPoint, step: ProductTangent) -> int:
        """Carry all pairs to the tangent space at ``retract(p_old, step)``.

        Pairs whose curvature the transport destroys are discarded; returns
        how many were dropped.  Scaling and middle matrix are refreshed from
        the survivors.
        """
        if not self.pairs:
            return 0
        p_new = geom.retract(p_old, step)
        survivors: list[MemoryPair] = []
        for pair in self.pairs:
            s = geom.transport(p_old, step, pair.s)
            y = geom.transport(p_old, step, pair.y)
            sy = geom.inner(p_new, s, y)
            yy = geom.inner(p_new, y, y)
            if self._passes_curvature(sy, yy):
                survivors.append(MemoryPair(s, y, sy))
        discarded = len(self.pairs) - len(survivors)
        self.pairs = survivors
        if survivors:
            last = survivors[-1]
            self.theta = geom.inner(p_new, last.y, last.y) / last.sy
        else:
            self.theta = 1.0
        self._refresh_middle(geom, p_new)
        return discarded

    # ------------------------------------------------------------------
    # Compact representation

    def _refresh_middle(self, geom: Geometry, p: ProductPoint) -> None:
        mu = len(self.pairs)
        if mu == 0:
            self._middle = np.zeros((0, 0))
            return
        d = np.array([pair.sy for pair in self.pairs])
        s_inner = np.empty((mu, mu))
        sy_inner = np.empty((mu, mu))
        for i, pi in enumerate(self.pairs):
            for j, pj in enumerate(self.pairs):
                if j <= i:
                    s_inner[i, j] = geom.inner(p, pi.s, pj.s)
                    s_inner[j, i] = s_inner[i, j]
                sy_inner[i, j] = geom.inner(p, pi.s, pj.y)
        q = self.theta * s_inner
        low = np.tril(sy_inner, -1)

        # Inverse of [[-D, L^T], [L, Q]] from one factorization of the Schur
        # complement Q + L D^{-1} L^T.
        ld = low / d[None, :]
        schur = q + ld @ (d[:, None] * ld.T)
        if not np.all(np.isfinite(schur)) or np.linalg.cond(schur) > _COND_LIMIT:
            raise SingularMiddleMatrix(
                "middle matrix is numerically singular; memory must be reset"
            )
        schur_inv = np.linalg.inv(schur)
        top_left = -np.diag(1.0 / d) + ld.T @ schur_inv @ ld
        top_right = ld.T @ schur_inv
        middle = np.block([[top_left, top_right], [top_right.T, schur_inv]])
        self._middle = (middle + middle.T) / 2.0

    def middle_matrix(self) -> np.ndarray:
        """The ``2 mu x 2 mu`` inverse block matrix (a copy)."""
        return self._middle.copy()

    def coeff_y(self, geom: Geometry, p: ProductPoint, x: ProductTangent) -> np.ndarray:
        """Coefficients ``<y_i, x>`` of ``x`` against the stored gradients."""
        return np.array([geom.inner(p, pair.y, x) for pair in self.pairs])

    def coeff_s(self, geom: Geometry, p: ProductPoint, x: ProductTangent) -> np.ndarray:
        """Coefficients ``theta <s_i, x>`` of ``x`` against the stored steps."""
        return self.theta * np.array([geom.inner(p, pair.s, x) for pair in self.pairs])

    def box_components_y(self, b: int) -> np.ndarray:
        """The ``b``-th box coordinate of every stored ``y`` (= ``coeff_y(e_b)``)."""
        return np.array([pair.y.euclidean[b] for pair in self.pairs])

    def box_components_s(self, b: int) -> np.ndarray:
        """``theta`` times the ``b``-th box coordinate of every stored ``s``."""
        return self.theta * np.array([pair.s.euclidean[b] for pair in self.pairs])

    def m_bilinear(
        self, ay: np.ndarray, as_: np.ndarray, by: np.ndarray, bs: np.ndarray
    ) -> float:
        """Evaluate ``[ay; as]^T M [by; bs]`` against the middle matrix."""
        if not self.pairs:
            return 0.0
        left = np.concatenate([ay, as_])
        right = np.concatenate([by, bs])
        return float(left @ self._middle @ right)

    def quad_form(
        self,
        xi: float,
        cy_x: np.ndarray,
        cs_x: np.ndarray,
        cy_y: np.ndarray,
        cs_y: np.ndarray,
    ) -> float:
        """``theta * xi`` minus the middle-matrix coupling of the coefficients."""
        return self.theta * xi - self.m_bilinear(cy_x, cs_x, cy_y, cs_y)

    def pairing(
        self, geom: Geometry, p: ProductPoint, x: ProductTangent, y: ProductTangent
    ) -> float:
        """The Hessian-form value ``<x, H[y]>``; symmetric in its arguments."""
        return self.quad_form(
            geom.inner(p, x, y),
            self.coeff_y(geom, p, x),
            self.coeff_s(geom, p, x),
            self.coeff_y(geom, p, y),
            self.coeff_s(geom, p, y),
        )

    def basis_diag(self, b: int, n: int | None = None) -> float:
        """``<e_b, H[e_b]>`` for the box basis vector ``e_b``, without forming it."""
        if n is not None and not 0 <= b < n:
            raise IndexError(f"box coordinate {b} out of range [0, {n})")
        if b < 0:
            raise IndexError("box coordinate must be nonnegative")
        xi_y = self.box_components_y(b)
        xi_s = self.box_components_s(b)
        return self.theta - self.m_bilinear(xi_y, xi_s, xi_y, xi_s)

    # ------------------------------------------------------------------
    # Inverse operator

    def apply_inverse(
        self,
        geom: Geometry,
        p: ProductPoint,
        x: ProductTangent,
        free_mask: np.ndarray | None = None,
    ) -> ProductTangent:
        """Apply ``B = H^{-1}`` to ``x`` by the two-loop recursion.

        With ``free_mask`` (a boolean vector over the box coordinates, True
        for free ones) the recursion runs within the tangent space of the
        active boundary face: masked-out components of ``x`` and of every
        stored pair are treated as zero, pairs whose curvature does not
        survive the restriction are skipped, and the scaling is taken from
        the newest surviving pair.  This keeps the operator positive
        definite on the face, so the result is a descent direction there
        whenever ``x`` is the projected negative gradient.
        """
        if free_mask is None or bool(np.all(free_mask)):
            q = x.copy()
            alphas: list[float] = []
            for pair in reversed(self.pairs):
                a = geom.inner(p, pair.s, q) / pair.sy
                alphas.append(a)
                q = q - a * pair.y
            r = (1.0 / self.theta) * q
            for pair, a in zip(self.pairs, reversed(alphas)):
                bcoef = geom.inner(p, pair.y, r) / pair.sy
                r = r + (a - bcoef) * pair.s
            return r

        def restrict(t: ProductTangent) -> ProductTangent:
            eu = t.euclidean.copy()
            eu[~free_mask] = 0.0
            m = None if t.manifold is None else t.manifold.copy()
            return ProductTangent(eu, m)

        usable: list[tuple[ProductTangent, ProductTangent, float]] = []
        theta = 1.0
        for pair in self.pairs:
            s = restrict(pair.s)
            y = restrict(pair.y)
            sy = geom.inner(p, s, y)
            yy = geom.inner(p, y, y)
            if self._passes_curvature(sy, yy):
                usable.append((s, y, sy))
                theta = yy / sy
        q = restrict(x)
        alphas = []
        for s, y, sy in reversed(usable):
            a = geom.inner(p, s, q) / sy
            alphas.append(a)
            q = q - a * y
        r = (1.0 / theta) * q
        for (s, y, sy), a in zip(usable, reversed(alphas)):
            bcoef = geom.inner(p, y, r) / sy
            r = r + (a - bcoef) * s
        return restrict(r)
