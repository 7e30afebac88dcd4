"""Manifold building blocks and a pure-manifold optimization.

Shows the geometric operations (retraction, inverse retraction, vector
transport, tangent-cone projection) on the sphere and the rotation group,
then minimizes a Rayleigh quotient over the sphere: the optimum is the
eigenvector of the smallest eigenvalue.
"""

import numpy as np

import rlbfgsb as rb

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------------
# Sphere: exact exponential map, logarithm, and parallel transport.

sphere = rb.Sphere(3)
p = np.array([1.0, 0.0, 0.0])
x = (np.pi / 2) * np.array([0.0, 1.0, 0.0])  # quarter of a great circle

q = sphere.retract(p, x)
print("exp_p(pi/2 e2) =", np.round(q, 12))
print("log recovers the step:", np.round(sphere.inverse_retract(p, q), 12))
print("transporting e2 along the quarter circle gives -e1:",
      np.round(sphere.transport(p, x, np.array([0.0, 1.0, 0.0])), 12))

# ---------------------------------------------------------------------------
# Rotations: the QR retraction stays exactly on SO(3).

so3 = rb.SpecialOrthogonal(3)
r = so3.random_point(rng)
v = so3.random_tangent(r, rng)
r2 = so3.retract(r, v)
print("\nSO(3) retraction: orthogonality residual =", so3.membership_residual(r2))
print("det(R') =", np.linalg.det(r2))

# ---------------------------------------------------------------------------
# Rayleigh quotient on the sphere: min p^T A p subject to |p| = 1.

a = np.diag([1.0, 2.0, 3.0])
geom = rb.Geometry(rb.BoxBounds.empty(), sphere)

def cost(point):
    return float(point.manifold @ a @ point.manifold)

def gradient(point):
    g = 2.0 * a @ point.manifold
    return rb.ProductTangent(np.zeros(0), sphere.project_tangent(point.manifold, g))

problem = rb.Problem(geometry=geom, cost=cost, gradient=gradient, name="rayleigh")
start = rb.ProductPoint(np.zeros(0), sphere.random_point(rng))
res = rb.solve(problem, start, rb.SolverOptions(pg_tolerance=1e-10))

print("\nRayleigh quotient minimization:")
print("  smallest eigenvalue  =", res.cost)
print("  eigenvector (up to sign) =", np.round(res.point.manifold, 8))
print("  iterations =", res.iterations, "| projected gradient =", f"{res.pg_norm:.2e}")
