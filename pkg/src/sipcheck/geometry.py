"""Plane sections of the unit sphere and continuity probes.

A plane section is parametrized radially: for a frame ``(u, v)`` the
direction ``cos t * u + sin t * v`` is scaled back onto the unit sphere.
On top of that sit a centered-ellipse test, the residual of the
differential equation satisfied by Euclidean sections, and lower-bound
probes for the Lipschitz behaviour of ``y -> [x, y]`` on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InvalidInput
from .norms import NormSpec, as_vector, norm_eval, normalize
from .sip import sip_eval

__all__ = [
    "PlaneFrame",
    "make_frame",
    "section_point",
    "section_coords",
    "ellipse_fit_residual",
    "OdeReport",
    "section_graph",
    "ode_residual",
    "LipschitzEstimate",
    "lipschitz_scan",
    "ContinuityReport",
    "uniform_continuity_probe",
]

ODE_STEP = 1e-5
ODE_EDGE = 1e-6
AUERBACH_TOL = 1e-6


@dataclass(frozen=True)
class PlaneFrame:
    """Two independent unit vectors spanning a section plane."""

    u: np.ndarray
    v: np.ndarray


def make_frame(spec: NormSpec, u, v) -> PlaneFrame:
    """Normalize ``u`` and ``v`` in the norm of ``spec`` and check independence."""
    u = as_vector(u, spec.dim)
    v = as_vector(v, spec.dim)
    if np.linalg.matrix_rank(np.column_stack([u, v])) < 2:
        raise InvalidInput("frame vectors must be linearly independent")
    return PlaneFrame(normalize(spec, u), normalize(spec, v))


def section_coords(spec: NormSpec, frame: PlaneFrame, thetas) -> np.ndarray:
    """Plane coordinates ``(a, b)`` of sphere points ``a*u + b*v`` at angles ``thetas``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    out = np.empty((thetas.size, 2))
    for k, t in enumerate(thetas):
        c, s = math.cos(t), math.sin(t)
        # the norm is 1-homogeneous, so the radial root is exact
        r = 1.0 / norm_eval(spec, c * frame.u + s * frame.v)
        out[k] = r * c, r * s
    return out


def section_point(spec: NormSpec, frame: PlaneFrame, theta: float) -> np.ndarray:
    """Point of the unit sphere in direction ``cos(theta)*u + sin(theta)*v``."""
    a, b = section_coords(spec, frame, [theta])[0]
    return a * frame.u + b * frame.v


def ellipse_fit_residual(spec: NormSpec, frame: PlaneFrame, grid: int = 64) -> float:
    """How far the section is from a centered ellipse.

    Fits a symmetric form ``M`` with ``s @ M @ s = 1`` by least squares to
    ``grid`` equiangular section points and returns the largest
    ``|s @ M @ s - 1|``.  Returns 1.0 when the fitted form is not
    positive definite.
    """
    if grid < 8:
        raise InvalidInput("grid must be at least 8")
    pts = section_coords(spec, frame, 2 * np.pi * np.arange(grid) / grid)
    a, b = pts[:, 0], pts[:, 1]
    D = np.column_stack([a * a, 2 * a * b, b * b])
    m, *_ = np.linalg.lstsq(D, np.ones(grid), rcond=None)
    M = np.array([[m[0], m[1]], [m[1], m[2]]])
    if np.min(np.linalg.eigvalsh(M)) <= 0:
        return 1.0
    return float(np.max(np.abs(D @ m - 1.0)))


def section_graph(spec: NormSpec, frame: PlaneFrame, x: float) -> float:
    """Height ``f(x) >= 0`` with ``||x*u + f(x)*v|| = 1``, for ``|x| < 1``."""
    if abs(x) >= 1:
        raise InvalidInput("the section graph is defined for |x| < 1")

    def g(y):
        return norm_eval(spec, x * frame.u + y * frame.v) - 1.0

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    return optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass
class OdeReport:
    """Residual of ``f'(x0) = -x0 f(x0) / (1 - x0**2)`` on a section graph."""

    x0: float
    f: float
    fprime: float
    rhs: float
    residual: float
    premise_ok: bool

    @property
    def label(self) -> str:
        return "ok" if self.premise_ok else "premise-violated"

    def to_dict(self) -> dict:
        return {"x0": self.x0, "f": self.f, "fprime": self.fprime, "rhs": self.rhs,
                "residual": self.residual, "premise": self.label}


def ode_residual(spec: NormSpec, frame: PlaneFrame, x0: float) -> OdeReport:
    """Evaluate the differential equation of Euclidean sections at ``x0``.

    ``f`` is the upper half of the section over the ``u`` axis and ``f'``
    a central difference with step 1e-5.  The equation characterizes the
    circle only when ``(u, v)`` is an Auerbach pair; other frames are
    computed anyway but labelled ``premise-violated``.
    """
    x0 = float(x0)
    if abs(x0) >= 1 - ODE_EDGE:
        raise InvalidInput("x0 too close to +-1; the equation is singular there")
    premise = max(abs(sip_eval(spec, frame.u, frame.v)),
                  abs(sip_eval(spec, frame.v, frame.u))) <= AUERBACH_TOL
    f0 = section_graph(spec, frame, x0)
    fp = (section_graph(spec, frame, x0 + ODE_STEP)
          - section_graph(spec, frame, x0 - ODE_STEP)) / (2 * ODE_STEP)
    rhs = -x0 * f0 / (1 - x0 * x0)
    return OdeReport(x0, f0, fp, rhs, abs(fp - rhs), premise)


@dataclass
class LipschitzEstimate:
    """Largest observed ``|[x, y] - [x, z]| / ||y - z||`` over sphere pairs.

    ``kappa_hat`` is a lower bound on any valid Lipschitz constant at
    ``base_x``.  ``level_maxima`` holds the largest quotient at each
    refinement level (gaps shrink by ``shrink`` per level).
    """

    base_x: np.ndarray
    kappa_hat: float
    witness_pair: tuple
    mesh_size: int
    level_maxima: list = field(default_factory=list)
    shrink: float = 16.0

    @property
    def last_ratio(self) -> float:
        if len(self.level_maxima) < 2:
            return float("nan")
        return self.level_maxima[-1] / self.level_maxima[-2]

    def stabilized(self, lo: float = 0.9, hi: float = 1.1) -> bool:
        return lo <= self.last_ratio <= hi

    def to_dict(self) -> dict:
        y, z = self.witness_pair
        return {
            "base_x": self.base_x.tolist(),
            "kappa_hat": self.kappa_hat,
            "witness_pair": [y.tolist(), z.tolist()],
            "mesh_size": self.mesh_size,
            "level_maxima": list(self.level_maxima),
            "last_ratio": self.last_ratio,
            "stabilized": self.stabilized(),
        }


def _scan_pairs(spec, mesh, h, seed):
    n = spec.dim
    if n == 2:
        step = 2 * np.pi / mesh
        frame = PlaneFrame(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        for j in range(mesh):
            t = j * step
            yield (section_point(spec, frame, t - h / 2),
                   section_point(spec, frame, t + h / 2))
        return
    rng = np.random.default_rng(seed)
    axes = [s * e for e in np.eye(n) for s in (1.0, -1.0)]
    extra = max(mesh - len(axes), 0)
    bases = axes + list(rng.standard_normal((extra, n)))
    dirs = rng.standard_normal((len(bases), n))
    for b, d in zip(bases, dirs):
        b = normalize(spec, b)
        d = d / np.linalg.norm(d)
        yield normalize(spec, b - h / 2 * d), normalize(spec, b + h / 2 * d)


def lipschitz_scan(spec: NormSpec, x, mesh: int = 64, refine: int = 4,
                   seed: int = 0, shrink: float = 16.0) -> LipschitzEstimate:
    """Probe the Lipschitz quotient of ``y -> [x, y]`` on the unit sphere.

    Level ``l`` compares sphere points ``2*pi/mesh * shrink**-l`` apart:
    neighbouring angles of an equiangular grid in dimension 2, seeded
    base points (including the coordinate axes) with random tangent-ish
    offsets otherwise.
    """
    if mesh < 8:
        raise InvalidInput("mesh must be at least 8")
    if refine < 1:
        raise InvalidInput("refine must be at least 1")
    x = as_vector(x, spec.dim)
    if abs(norm_eval(spec, x) - 1.0) > 1e-10:
        raise InvalidInput("base point x must lie on the unit sphere")
    best, witness, levels = -1.0, None, []
    for level in range(refine):
        h = 2 * np.pi / mesh * shrink ** (-level)
        top = 0.0
        for y, z in _scan_pairs(spec, mesh, h, seed):
            dist = norm_eval(spec, y - z)
            if dist == 0:
                continue
            q = abs(sip_eval(spec, x, y) - sip_eval(spec, x, z)) / dist
            top = max(top, q)
            if q > best:
                best, witness = q, (y, z)
        levels.append(top)
    return LipschitzEstimate(x, best, witness, mesh, levels, shrink)


@dataclass
class ContinuityReport:
    distances: list
    gaps: list
    converges: bool
    monotone_from: int

    def to_dict(self) -> dict:
        return {"distances": self.distances, "gaps": self.gaps,
                "converges": self.converges, "monotone_from": self.monotone_from}


def uniform_continuity_probe(spec: NormSpec, x, pairs) -> ContinuityReport:
    """Track ``||y - z||`` and ``|[x, y] - [x, z]|`` along a sequence of pairs.

    ``converges`` is true when the final gap is below 1e-12 or below 1e-3
    times the largest gap seen.  ``monotone_from`` is the first index
    after which the gaps never increase.
    """
    x = as_vector(x, spec.dim)
    pairs = list(pairs)
    if not pairs:
        raise InvalidInput("need at least one pair")
    dists, gaps = [], []
    for y, z in pairs:
        y = as_vector(y, spec.dim)
        z = as_vector(z, spec.dim)
        dists.append(norm_eval(spec, y - z))
        gaps.append(abs(sip_eval(spec, x, y) - sip_eval(spec, x, z)))
    last = gaps[-1]
    converges = last <= 1e-12 or last <= 1e-3 * max(gaps)
    start = len(gaps) - 1
    while start > 0 and gaps[start - 1] >= gaps[start]:
        start -= 1
    return ContinuityReport(dists, gaps, bool(converges), start)
