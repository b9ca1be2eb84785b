"""Finite differences along geodesics on products of round spheres.

Points are tuples of per-factor ambient arrays of shape ``(N, m_i + 1)``;
tangent vectors use the same layout.  In a product, ``exp_p(t v)`` moves each
factor along its own great circle, and ``d^2/dt^2 f(exp_p(t v))`` at ``t = 0``
is exactly ``Dd f(v, v)``, so second differences along orthonormal geodesics
give the Laplacian and (with polarization) the Hessian without Christoffel
symbols.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from ..manifold import ProductManifold, SphereFactor

Points = tuple[np.ndarray, ...]
Tangent = tuple[np.ndarray, ...]
Function = Callable[[Points], np.ndarray]

DEFAULT_EPSILON = 1e-3


def geodesic(factor: SphereFactor, p: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    """Great-circle point at parameter ``t`` from ``p`` with initial velocity ``v``."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    rho = float(factor.radius_sq) ** 0.5
    speed = np.linalg.norm(v, axis=1, keepdims=True)
    if np.any(np.abs(np.sum(p * v, axis=1)) > 1e-10 * rho * np.maximum(speed[:, 0], 1.0)):
        raise ValueError("velocity is not tangent to the sphere at p")
    safe = np.where(speed > 0, speed, 1.0)
    angle = speed * t / rho
    return np.where(speed > 0, p * np.cos(angle) + rho * (v / safe) * np.sin(angle), p)


def product_geodesic(m: ProductManifold, points: Points, v: Tangent, t: float) -> Points:
    return tuple(geodesic(f, p, w, t) for f, p, w in zip(m.factors, points, v))


def random_points(m: ProductManifold, count: int, rng: np.random.Generator) -> Points:
    out = []
    for f in m.factors:
        x = rng.standard_normal((count, f.dim + 1))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        out.append(x * float(f.radius_sq) ** 0.5)
    return tuple(out)


def sphere_tangent_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``p^perp`` per point via a Householder reflection, (N, m, m+1)."""
    p = np.atleast_2d(p)
    d = p.shape[1]
    u = p / np.linalg.norm(p, axis=1, keepdims=True)
    sign = np.where(u[:, -1] >= 0, 1.0, -1.0)
    w = u.copy()
    w[:, -1] += sign
    ww = np.sum(w * w, axis=1)
    eye = np.eye(d)[: d - 1]
    # columns j < d-1 of I - 2 w w^T / (w.w)
    return eye[None, :, :] - 2.0 * w[:, None, : d - 1].transpose(0, 2, 1) * w[:, None, :] / ww[:, None, None]


def product_frame(m: ProductManifold, points: Points) -> list[Tangent]:
    """Block orthonormal frame: factor 0's directions first, then factor 1's, ..."""
    frame = []
    for i, (f, p) in enumerate(zip(m.factors, points)):
        basis = sphere_tangent_basis(p)
        for a in range(f.dim):
            vec = tuple(
                basis[:, a, :] if j == i else np.zeros_like(points[j]) for j in range(len(points))
            )
            frame.append(vec)
    return frame


def frame_factor_index(m: ProductManifold) -> list[int]:
    return [i for i, f in enumerate(m.factors) for _ in range(f.dim)]


def rotate_frame(frame: Sequence[Tangent], q: np.ndarray) -> list[Tangent]:
    """New frame ``e'_a = sum_b q[a, b] e_b`` (orthonormal when ``q`` is orthogonal)."""
    nf = len(frame[0])
    return [
        tuple(sum(q[a, b] * frame[b][i] for b in range(len(frame))) for i in range(nf))
        for a in range(len(frame))
    ]


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _inner(u: Tangent, v: Tangent) -> np.ndarray:
    return sum(np.sum(a * b, axis=1) for a, b in zip(u, v))


def check_frame(m: ProductManifold, points: Points, frame: Sequence[Tangent], tol: float = 1e-10) -> None:
    if len(frame) != m.dim:
        raise ValueError(f"frame has {len(frame)} vectors, manifold dimension is {m.dim}")
    for a, ea in enumerate(frame):
        for i, p in enumerate(points):
            if np.any(np.abs(np.sum(ea[i] * p, axis=1)) > tol * max(1.0, float(np.max(np.abs(p))))):
                raise ValueError("frame vector is not tangent")
        for b in range(a, len(frame)):
            target = 1.0 if a == b else 0.0
            if np.any(np.abs(_inner(ea, frame[b]) - target) > tol):
                raise ValueError("degenerate or non-orthonormal frame")


def _second_difference(f: Function, m: ProductManifold, points: Points, v: Tangent, h: float, center) -> np.ndarray:
    plus = f(product_geodesic(m, points, v, h))
    minus = f(product_geodesic(m, points, v, -h))
    return (plus + minus - 2.0 * center) / (h * h)


def second_derivative(
    f: Function, m: ProductManifold, points: Points, v: Tangent, eps: float = DEFAULT_EPSILON,
    richardson: bool = True, center: Optional[np.ndarray] = None,
) -> np.ndarray:
    """``Dd f(v, v)`` by a central second difference, optionally Richardson-refined."""
    center = f(points) if center is None else center
    coarse = _second_difference(f, m, points, v, eps, center)
    if not richardson:
        return coarse
    fine = _second_difference(f, m, points, v, eps / 2, center)
    return (4.0 * fine - coarse) / 3.0


def first_derivative(
    f: Function, m: ProductManifold, points: Points, v: Tangent, eps: float = DEFAULT_EPSILON,
    richardson: bool = True,
) -> np.ndarray:
    def diff(h):
        return (f(product_geodesic(m, points, v, h)) - f(product_geodesic(m, points, v, -h))) / (2 * h)

    coarse = diff(eps)
    if not richardson:
        return coarse
    return (4.0 * diff(eps / 2) - coarse) / 3.0


def _validate_eps(m: ProductManifold, eps: float) -> None:
    # injectivity radius of S^m(rho) is pi rho
    limit = min(np.pi * float(f.radius_sq) ** 0.5 for f in m.factors) / 4
    if not 0 < eps < limit:
        raise ValueError(f"epsilon must lie in (0, {limit:.4g})")


def fd_laplacian(
    f: Function, m: ProductManifold, points: Points, eps: float = DEFAULT_EPSILON,
    frame: Optional[Sequence[Tangent]] = None, richardson: bool = True,
) -> np.ndarray:
    _validate_eps(m, eps)
    if frame is None:
        frame = product_frame(m, points)
    else:
        check_frame(m, points, frame)
    center = f(points)
    return sum(second_derivative(f, m, points, e, eps, richardson, center) for e in frame)


def fd_partial_laplacian(
    f: Function, m: ProductManifold, points: Points, factor_index: int, eps: float = DEFAULT_EPSILON,
    richardson: bool = True,
) -> np.ndarray:
    """Laplacian of ``f`` along factor ``factor_index`` only."""
    _validate_eps(m, eps)
    if not 0 <= factor_index < len(m.factors):
        raise ValueError("factor index out of range")
    frame = product_frame(m, points)
    owners = frame_factor_index(m)
    center = f(points)
    return sum(
        second_derivative(f, m, points, e, eps, richardson, center)
        for e, owner in zip(frame, owners)
        if owner == factor_index
    )


def fd_hessian(
    f: Function, m: ProductManifold, points: Points, eps: float = DEFAULT_EPSILON,
    frame: Optional[Sequence[Tangent]] = None, richardson: bool = True,
) -> np.ndarray:
    """Hessian matrix in ``frame`` (default: block frame), shape (N, n, n).

    Off-diagonal entries by polarization:
    ``H(a, b) = (H(a+b, a+b) - H(a-b, a-b)) / 4``.
    """
    _validate_eps(m, eps)
    if frame is None:
        frame = product_frame(m, points)
    else:
        check_frame(m, points, frame)
    center = f(points)
    n = len(frame)
    out = np.empty((center.shape[0], n, n))
    for a in range(n):
        out[:, a, a] = second_derivative(f, m, points, frame[a], eps, richardson, center)
        for b in range(a + 1, n):
            plus = tuple(x + y for x, y in zip(frame[a], frame[b]))
            minus = tuple(x - y for x, y in zip(frame[a], frame[b]))
            value = (
                second_derivative(f, m, points, plus, eps, richardson, center)
                - second_derivative(f, m, points, minus, eps, richardson, center)
            ) / 4.0
            out[:, a, b] = out[:, b, a] = value
    return out


def fd_gradient(
    f: Function, m: ProductManifold, points: Points, eps: float = DEFAULT_EPSILON,
    frame: Optional[Sequence[Tangent]] = None, richardson: bool = True,
) -> np.ndarray:
    """Components of ``df`` in ``frame``, shape (N, n)."""
    _validate_eps(m, eps)
    if frame is None:
        frame = product_frame(m, points)
    return np.stack([first_derivative(f, m, points, e, eps, richardson) for e in frame], axis=-1)
