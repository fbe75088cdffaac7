"""Closed convex target sets and their support-function machinery.

Every set exposes ``support`` (h_S), ``support_argmax`` (a maximizer, i.e. a
subgradient of h_S), and ``project`` (Euclidean projection).  Distances and
steering directions are derived from the projection so that every caller
sees bit-identical values for the same input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from .errors import DimensionMismatch, NonConvergence, Unbounded, UnboundedSet, UnboundedSupport
from .lp import LinearProgram, solve_lp

# below this distance a point counts as inside the set
TAU_IN = 1e-12
PROJ_TOL = 1e-9
PROJ_MAX_ITER = 10_000


def as_vector(v, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(f"{name} has dimension {arr.size}, expected {dim}")
    # a finite sum implies finite entries; only overflow needs the slow check
    if not math.isfinite(arr.sum()) and not np.isfinite(arr).all():
        raise ValueError(f"{name} has non-finite coordinates")
    return arr


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based, exact)."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, n + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


# ---------------------------------------------------------------------------
# set variants


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="center"))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be a positive finite number")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    bounded = True
    is_cone = False

    def support(self, w: np.ndarray) -> float:
        return float(self.center @ w) + self.radius * math.sqrt(float(w @ w))

    def support_argmax(self, w: np.ndarray) -> np.ndarray:
        n = math.sqrt(float(w @ w))
        if n == 0.0:
            return self.center.copy()
        return self.center + (self.radius / n) * w

    def project(self, r: np.ndarray) -> np.ndarray:
        d = r - self.center
        n = math.sqrt(float(d @ d))
        if n <= self.radius:
            return r.copy()
        return self.center + (self.radius / n) * d

    def max_norm(self) -> float:
        return float(np.linalg.norm(self.center) + self.radius)


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Convex hull of finitely many vertices (rows of ``vertices``)."""

    vertices: np.ndarray
    _gram: np.ndarray = field(init=False, repr=False)
    _lipschitz: float = field(init=False, repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
            raise ValueError("polytope needs at least one vertex")
        if not np.all(np.isfinite(V)):
            raise ValueError("polytope vertices must be finite")
        object.__setattr__(self, "vertices", V)
        G = V @ V.T
        object.__setattr__(self, "_gram", G)
        object.__setattr__(self, "_lipschitz", float(np.linalg.norm(G, 2)))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    bounded = True
    is_cone = False

    def support(self, w: np.ndarray) -> float:
        return float(np.max(self.vertices @ w))

    def support_argmax(self, w: np.ndarray) -> np.ndarray:
        return self.vertices[int(np.argmax(self.vertices @ w))].copy()

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def _gap(self, r: np.ndarray, p: np.ndarray) -> tuple[float, float]:
        res = r - p
        n = float(np.linalg.norm(res))
        if n <= TAU_IN:
            return n, 0.0
        # h_S(u) - <u, p>: zero iff p is the projection
        return n, float(np.max(self.vertices @ res) - res @ p) / n

    def _certified(self, r: np.ndarray, n: float, gap: float) -> bool:
        """Gap below PROJ_TOL, or below what rounding in u = (r - p) / n allows.

        Very close to the hull the direction u carries an error of order
        eps * scale / n, which caps how small the computed gap can get.
        """
        if n <= TAU_IN or gap < PROJ_TOL:
            return True
        scale = float(np.abs(self.vertices).max()) + float(np.abs(r).max())
        return gap < 16.0 * np.finfo(float).eps * scale * scale / n

    def _polish(self, r: np.ndarray, lam: np.ndarray) -> np.ndarray | None:
        """Exact least squares on the active face; None if no valid weights."""
        active = np.flatnonzero(lam > 0)
        while active.size:
            Va = self.vertices[active]
            k = active.size
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = Va @ Va.T
            K[:k, k] = K[k, :k] = 1.0
            rhs = np.append(Va @ r, 1.0)
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            mu = sol[:k]
            if np.all(mu >= -1e-14):
                mu = np.maximum(mu, 0.0)
                return (mu / mu.sum()) @ Va
            active = np.delete(active, int(np.argmin(mu)))
        return None

    def _nnls_face(self, r: np.ndarray) -> np.ndarray:
        """Weights whose support is the optimal face, by Lawson-Hanson NNLS.

        The simplex constraint enters as a heavily weighted extra row; only the
        support is used, the exact weights come from ``_polish``.
        """
        V = self.vertices
        M = 1e3 * (1.0 + float(np.abs(V).max()) + float(np.abs(r).max()))
        A = np.vstack([V.T, np.full(V.shape[0], M)])
        lam, _ = nnls(A, np.append(r, M))
        return lam

    def project(self, r: np.ndarray) -> np.ndarray:
        V = self.vertices
        if V.shape[0] == 1:
            return V[0].copy()
        if self._lipschitz == 0.0:
            return np.zeros(self.dim)
        # Lawson-Hanson finds the optimal face exactly in most cases; the gap
        # check certifies it, otherwise projected gradient takes over
        q = self._polish(r, self._nnls_face(r))
        if q is not None:
            n, gap = self._gap(r, q)
            if self._certified(r, n, gap):
                return q
        Vr = V @ r
        step = 1.0 / self._lipschitz
        lam = np.zeros(V.shape[0])
        lam[int(np.argmin(np.linalg.norm(V - r, axis=1)))] = 1.0
        for it in range(PROJ_MAX_ITER):
            p = lam @ V
            n, gap = self._gap(r, p)
            if self._certified(r, n, gap):
                return p
            if it % 5 == 0:
                q = self._polish(r, lam)
                if q is not None:
                    n, gap = self._gap(r, q)
                    if self._certified(r, n, gap):
                        return q
            lam = project_simplex(lam - step * (self._gram @ lam - Vr))
        raise NonConvergence(f"polytope projection did not converge in {PROJ_MAX_ITER} iterations")


@dataclass(frozen=True, eq=False)
class NonpositiveOrthantCone:
    dimension: int

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ValueError("cone dimension must be >= 1")
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def dim(self) -> int:
        return self.dimension

    bounded = False
    is_cone = True

    def in_polar(self, w: np.ndarray) -> bool:
        return bool(w.min() >= -TAU_IN)

    def support(self, w: np.ndarray) -> float:
        return 0.0 if self.in_polar(w) else math.inf

    def support_argmax(self, w: np.ndarray) -> np.ndarray:
        if not self.in_polar(w):
            raise UnboundedSupport("w lies outside the polar cone (nonnegative orthant)")
        return np.zeros(self.dimension)

    def project(self, r: np.ndarray) -> np.ndarray:
        return np.minimum(r, 0.0)

    def max_norm(self) -> float:
        raise UnboundedSet("the orthant cone is unbounded")


@dataclass(frozen=True, eq=False)
class HalfspaceIntersection:
    """``{s : normals @ s <= offsets}``, checked bounded with a strictly interior point."""

    normals: np.ndarray
    offsets: np.ndarray
    interior_point: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise DimensionMismatch("need one offset per halfspace normal")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("halfspace data must be finite")
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise ValueError("halfspace normals must be nonzero")
        p = as_vector(self.interior_point, A.shape[1], "interior_point")
        if not np.all(A @ p < b):
            raise ValueError("interior_point is not strictly inside every halfspace")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "interior_point", p)
        d = A.shape[1]
        for k in range(d):
            for sgn in (1.0, -1.0):
                e = np.zeros(d)
                e[k] = sgn
                try:
                    self._lp_support(e)
                except Unbounded as exc:
                    raise UnboundedSet("halfspace intersection is unbounded") from exc

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    bounded = True
    is_cone = False

    def _lp_support(self, w: np.ndarray):
        lp = LinearProgram.build(
            w, self.normals, self.offsets, bounds=(None, None), maximize=True
        )
        return solve_lp(lp)

    def support(self, w: np.ndarray) -> float:
        if not np.any(w):
            return 0.0
        return self._lp_support(w).value

    def support_argmax(self, w: np.ndarray) -> np.ndarray:
        if not np.any(w):
            return self.interior_point.copy()
        return self._lp_support(w).x

    def contains(self, r: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(self.normals @ r <= self.offsets + tol))

    def _polish(self, r: np.ndarray, p: np.ndarray) -> np.ndarray | None:
        """Project onto the affine hull of the active facets and verify KKT."""
        A, b = self.normals, self.offsets
        active = np.flatnonzero(A @ p >= b - 1e-7 * (1.0 + np.abs(b)))
        if active.size == 0:
            return None
        Aa, ba = A[active], b[active]
        mult = np.linalg.lstsq(Aa @ Aa.T, Aa @ r - ba, rcond=None)[0]
        if np.any(mult < -1e-12):
            return None
        q = r - Aa.T @ mult
        if not self.contains(q, 1e-12 * (1.0 + np.abs(b).max())):
            return None
        return q

    def _gap(self, r: np.ndarray, p: np.ndarray) -> float:
        res = r - p
        n = float(np.linalg.norm(res))
        if n <= TAU_IN:
            return 0.0
        u = res / n
        return self.support(u) - float(u @ p)

    def project(self, r: np.ndarray) -> np.ndarray:
        if self.contains(r):
            return r.copy()
        A, b = self.normals, self.offsets
        sq = np.einsum("ij,ij->i", A, A)
        x = r.copy()
        incr = np.zeros((A.shape[0], r.size))
        # Dykstra's alternating projections over the halfspaces
        for cycle in range(PROJ_MAX_ITER):
            for k in range(A.shape[0]):
                y = x + incr[k]
                viol = A[k] @ y - b[k]
                x_new = y - (viol / sq[k]) * A[k] if viol > 0 else y
                incr[k] = y - x_new
                x = x_new
            if cycle % 10 == 0:
                q = self._polish(r, x)
                if q is not None and abs(self._gap(r, q)) < PROJ_TOL:
                    return q
                if self.contains(x, PROJ_TOL) and abs(self._gap(r, x)) < PROJ_TOL:
                    return x
        raise NonConvergence(f"Dykstra projection did not converge in {PROJ_MAX_ITER} cycles")

    def max_norm(self) -> float:
        raise UnboundedSet("use a bounding ball for halfspace intersections")


@dataclass(frozen=True, eq=False)
class LiftedCone:
    """``cone({kappa} x base)`` in one extra leading dimension."""

    base: "ConvexTargetSet"
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError("lifting constant kappa must be positive")
        if not getattr(self.base, "bounded", False):
            raise UnboundedSet("only bounded base sets can be lifted")
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    bounded = False
    is_cone = True

    def in_polar(self, w: np.ndarray) -> bool:
        return self.kappa * w[0] + self.base.support(w[1:]) <= TAU_IN

    def support(self, w: np.ndarray) -> float:
        return 0.0 if self.in_polar(w) else math.inf

    def support_argmax(self, w: np.ndarray) -> np.ndarray:
        if not self.in_polar(w):
            raise UnboundedSupport("w lies outside the polar of the lifted cone")
        return np.zeros(self.dim)

    def _slice_dist(self, lam: float, r: np.ndarray) -> float:
        # distance from r to the slice lam * ({kappa} x base)
        head = r[0] - lam * self.kappa
        if lam <= 0.0:
            return math.hypot(head, float(np.linalg.norm(r[1:])))
        tail = r[1:] - lam * self.base.project(r[1:] / lam)
        return math.hypot(head, float(np.linalg.norm(tail)))

    def project(self, r: np.ndarray) -> np.ndarray:
        # members are returned as is: the scalar search below only pins lam to
        # about sqrt(eps) relative, which would leave a spurious ~1e-8 distance
        if r[0] > 0.0:
            lam0 = r[0] / self.kappa
            if np.linalg.norm(r[1:] / lam0 - self.base.project(r[1:] / lam0)) * lam0 <= TAU_IN:
                return r.copy()
        # distance to a convex cone along its generator scale is convex in lam
        hi =1.0 + float(np.linalg.norm(r)) / self.kappa
        res = minimize_scalar(
            self._slice_dist, bounds=(0.0, hi), args=(r,), method="bounded",
            options={"xatol": 1e-12, "maxiter": 500},
        )
        lam = float(res.x)
        if self._slice_dist(0.0, r) <= res.fun:
            lam = 0.0
        if lam <= 0.0:
            return np.zeros(self.dim)
        return np.concatenate([[lam * self.kappa], lam * self.base.project(r[1:] / lam)])

    def max_norm(self) -> float:
        raise UnboundedSet("cones are unbounded")


ConvexTargetSet = Union[Ball, VPolytope, NonpositiveOrthantCone, HalfspaceIntersection, LiftedCone]


# ---------------------------------------------------------------------------
# module-level operations


def _check(target: ConvexTargetSet, v, name: str = "w") -> np.ndarray:
    return as_vector(v, target.dim, name)


def support(target: ConvexTargetSet, w) -> float:
    """h_S(w) = sup over s in S of <w, s>; ``math.inf`` outside a cone's polar."""
    w = _check(target, w)
    if not w.any():
        return 0.0
    return target.support(w)


def support_argmax(target: ConvexTargetSet, w) -> np.ndarray:
    w = _check(target, w)
    return target.support_argmax(w)


def project(target: ConvexTargetSet, r) -> np.ndarray:
    r = _check(target, r, "r")
    return target.project(r)


def projection_residual(target: ConvexTargetSet, r) -> tuple[np.ndarray, float, np.ndarray]:
    """``(Proj_S(r), dist(r, S), u_S(r))`` from a single projection.

    ``u_S(r)`` is the zero vector when the distance is at most TAU_IN.
    """
    r = _check(target, r, "r")
    p = target.project(r)
    diff = r - p
    dist = math.sqrt(float(diff @ diff))
    if dist <= TAU_IN:
        return p, dist, np.zeros_like(r)
    return p, dist, diff / dist


def distance(target: ConvexTargetSet, r) -> float:
    return projection_residual(target, r)[1]


def steering_direction(target: ConvexTargetSet, r) -> np.ndarray:
    return projection_residual(target, r)[2]


def dual_distance(target: ConvexTargetSet, r, w=None) -> float:
    """``<w, r> - h_S(w)``; at ``w = u_S(r)`` this equals ``dist(r, S)``."""
    r = _check(target, r, "r")
    if w is None:
        w = steering_direction(target, r)
    w = _check(target, w)
    return float(w @ r) - support(target, w)


def lift(target: ConvexTargetSet) -> tuple[LiftedCone, Callable[[np.ndarray], np.ndarray]]:
    """Embed a bounded set as ``cone({kappa} x S)``, kappa = max norm over S.

    Returns the cone and the reward map ``r -> (kappa, r)``.
    """
    if not target.bounded or isinstance(target, HalfspaceIntersection):
        if isinstance(target, HalfspaceIntersection):
            raise UnboundedSet("lifting a halfspace intersection needs vertex enumeration")
        raise UnboundedSet("only bounded sets can be lifted")
    kappa = target.max_norm()
    if kappa <= 0.0:
        raise ValueError("cannot lift the singleton {0}: kappa = 0")
    cone = LiftedCone(target, kappa)

    def transform(r) -> np.ndarray:
        return np.concatenate([[kappa], as_vector(r, target.dim, "r")])

    return cone, transform
