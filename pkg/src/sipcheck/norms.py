"""Smooth norm families on R^n.

A norm is described declaratively by a :class:`NormSpec`.  Every builtin
family registers closed forms for the norm, its gradient (the unique unit
supporting functional of the ball), the dual norm and the dual-norm
gradient.  Families registered without a gradient fall back to central
differences guarded by a one-sided smoothness probe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch, InvalidInput, NumericalFailure

__all__ = [
    "NormSpec",
    "Family",
    "NonSmoothNorm",
    "register_family",
    "as_vector",
    "norm_eval",
    "norm_gradient",
    "numeric_gradient",
    "dual_norm",
    "support_point",
    "normalize",
    "build_direct_sum",
    "parse_norm",
    "load_norm",
]

EPS = np.finfo(float).eps


class NonSmoothNorm(InvalidInput):
    """Raised when the one-sided difference probe detects a kink."""


@dataclass(frozen=True)
class Family:
    """Callbacks implementing one norm family.

    Only ``norm`` is mandatory.  Missing ``gradient`` triggers the
    finite-difference fallback, missing ``sip`` the gradient route, and
    missing ``support`` a numerical maximization.
    """

    norm: Callable
    validate: Optional[Callable] = None
    gradient: Optional[Callable] = None
    sip: Optional[Callable] = None
    dual_norm: Optional[Callable] = None
    support: Optional[Callable] = None


_FAMILIES: dict[str, Family] = {}


def register_family(name: str, family: Family) -> None:
    _FAMILIES[name] = family


def _family(name: str) -> Family:
    try:
        return _FAMILIES[name]
    except KeyError:
        raise InvalidInput(f"unknown norm family {name!r}") from None


@dataclass(frozen=True)
class NormSpec:
    """Immutable description of a smooth norm.

    Use the classmethod constructors, :func:`build_direct_sum` or
    :func:`parse_norm` rather than filling fields by hand.
    """

    family: str
    dim: int
    p: Optional[float] = None
    weights: Optional[tuple] = None
    Q: Optional[tuple] = None
    parts: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidInput(f"dim must be a positive integer, got {self.dim!r}")
        fam = _family(self.family)
        if fam.validate is not None:
            fam.validate(self)

    @classmethod
    def lp(cls, p: float, dim: int) -> "NormSpec":
        return cls("lp", int(dim), p=float(p))

    @classmethod
    def weighted_lp(cls, p: float, weights: Sequence[float]) -> "NormSpec":
        w = tuple(float(v) for v in weights)
        return cls("weighted_lp", len(w), p=float(p), weights=w)

    @classmethod
    def ellipsoid(cls, Q) -> "NormSpec":
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2:
            raise InvalidInput("Q must be a square matrix")
        return cls("ellipsoid", Q.shape[0], Q=tuple(map(tuple, Q.tolist())))

    @cached_property
    def Q_array(self) -> np.ndarray:
        Q = np.array(self.Q, dtype=float)
        Q.setflags(write=False)
        return Q

    @cached_property
    def Q_inv(self) -> np.ndarray:
        Qi = np.linalg.inv(self.Q_array)
        Qi = 0.5 * (Qi + Qi.T)
        Qi.setflags(write=False)
        return Qi

    @cached_property
    def w_array(self) -> np.ndarray:
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        return w

    @cached_property
    def blocks(self) -> list:
        """Coordinate slices of the parts of a direct sum."""
        out, start = [], 0
        for part in self.parts:
            out.append(slice(start, start + part.dim))
            start += part.dim
        return out

    @property
    def q(self) -> float:
        """Conjugate exponent of ``p``."""
        return self.p / (self.p - 1.0)

    def to_dict(self) -> dict:
        if self.family == "lp":
            return {"type": "lp", "p": self.p, "dim": self.dim}
        if self.family == "weighted_lp":
            return {"type": "weighted_lp", "p": self.p, "weights": list(self.weights)}
        if self.family == "ellipsoid":
            return {"type": "ellipsoid", "Q": [list(r) for r in self.Q]}
        if self.family == "direct_sum":
            return {"type": "direct_sum", "parts": [s.to_dict() for s in self.parts]}
        raise InvalidInput(f"family {self.family!r} has no file representation")

    def __str__(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Convert ``x`` to a finite 1-D float array, checking its length."""
    if type(x) is np.ndarray and x.dtype == np.float64:
        v = x
    else:
        try:
            v = np.asarray(x, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"not a real vector: {exc}") from None
    if v.ndim != 1:
        raise InvalidInput(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(dim, v.shape[0])
    # summing is cheaper than isfinite; overflow only costs the slow check
    if not math.isfinite(v.sum()) and not np.all(np.isfinite(v)):
        raise InvalidInput("vector has non-finite entries")
    return v


# --- lp -------------------------------------------------------------------


def _check_p(spec):
    p = spec.p
    if p is None or not isinstance(p, (int, float)) or not math.isfinite(p) or p <= 1.0:
        raise InvalidInput(f"exponent p must be a finite real > 1, got {p!r}")


def _pnorm(x, p):
    m = np.max(np.abs(x)) if x.size else 0.0
    if m == 0.0:
        return 0.0
    return float(m * np.sum((np.abs(x) / m) ** p) ** (1.0 / p))


def _pnorm_support(x, p):
    # unit-dual gradient of the p-norm at x != 0
    s = x / _pnorm(x, p)
    return np.sign(s) * np.abs(s) ** (p - 1.0)


def _validate_lp(spec):
    _check_p(spec)
    if spec.weights is not None or spec.Q is not None or spec.parts:
        raise InvalidInput("lp takes only p and dim")


def _lp_sip(x, y, p):
    # ||y||^(2-p) * sum x_i sign(y_i) |y_i|^(p-1), evaluated at y/m and scaled back by m
    m = float(np.max(np.abs(y)))
    y = y / m
    return m * float(_pnorm(y, p) ** (2.0 - p) * np.dot(x, np.sign(y) * np.abs(y) ** (p - 1.0)))


register_family(
    "lp",
    Family(
        norm=lambda s, x: _pnorm(x, s.p),
        validate=_validate_lp,
        gradient=lambda s, x: _pnorm_support(x, s.p),
        sip=lambda s, x, y: _lp_sip(x, y, s.p),
        dual_norm=lambda s, g: _pnorm(g, s.q),
        support=lambda s, c: _pnorm_support(c, s.q),
    ),
)


# --- weighted lp ----------------------------------------------------------


def _validate_weighted(spec):
    _check_p(spec)
    if spec.weights is None or len(spec.weights) != spec.dim:
        raise InvalidInput("weighted_lp needs one weight per coordinate")
    w = np.asarray(spec.weights, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidInput("weights must be finite and positive")
    if spec.Q is not None or spec.parts:
        raise InvalidInput("weighted_lp takes only p and weights")


def _weighted_sip(s, x, y):
    return _lp_sip(s.w_array * x, s.w_array * y, s.p)


register_family(
    "weighted_lp",
    Family(
        norm=lambda s, x: _pnorm(s.w_array * x, s.p),
        validate=_validate_weighted,
        gradient=lambda s, x: s.w_array * _pnorm_support(s.w_array * x, s.p),
        sip=_weighted_sip,
        dual_norm=lambda s, g: _pnorm(g / s.w_array, s.q),
        support=lambda s, c: _pnorm_support(c / s.w_array, s.q) / s.w_array,
    ),
)


# --- ellipsoid ------------------------------------------------------------


def _validate_ellipsoid(spec):
    if spec.Q is None:
        raise InvalidInput("ellipsoid needs Q")
    try:
        Q = np.array(spec.Q, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput("Q must be a numeric square matrix") from None
    if Q.shape != (spec.dim, spec.dim):
        raise InvalidInput(f"Q must be {spec.dim}x{spec.dim}, got shape {Q.shape}")
    if not np.all(np.isfinite(Q)):
        raise InvalidInput("Q has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(Q))))
    if np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
        raise InvalidInput("Q must be symmetric")
    if np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise InvalidInput("Q must be positive definite")
    if spec.p is not None or spec.weights is not None or spec.parts:
        raise InvalidInput("ellipsoid takes only Q")


def _quad_norm(M, x):
    # rescale first so tiny or huge vectors neither underflow nor overflow
    m = float(np.max(np.abs(x)))
    if m == 0.0:
        return 0.0
    x = x / m
    return m * math.sqrt(max(float(x @ M @ x), 0.0))


def _ell_norm(s, x):
    return _quad_norm(s.Q_array, x)


def _ell_dual(s, g):
    return _quad_norm(s.Q_inv, g)


register_family(
    "ellipsoid",
    Family(
        norm=_ell_norm,
        validate=_validate_ellipsoid,
        gradient=lambda s, x: s.Q_array @ x / _ell_norm(s, x),
        sip=lambda s, x, y: float(x @ s.Q_array @ y),
        dual_norm=_ell_dual,
        support=lambda s, c: s.Q_inv @ c / _ell_dual(s, c),
    ),
)


# --- direct sum -----------------------------------------------------------


def _validate_direct_sum(spec):
    if not spec.parts:
        raise InvalidInput("direct_sum needs a nonempty list of parts")
    if not all(isinstance(part, NormSpec) for part in spec.parts):
        raise InvalidInput("direct_sum parts must be NormSpec values")
    total = sum(part.dim for part in spec.parts)
    if total != spec.dim:
        raise InvalidInput(f"direct_sum dim {spec.dim} != sum of part dims {total}")
    if spec.p is not None or spec.weights is not None or spec.Q is not None:
        raise InvalidInput("direct_sum takes only parts")


def _ds_norm(s, x):
    return math.hypot(*(norm_eval(part, x[b]) for part, b in zip(s.parts, s.blocks)))


def _ds_gradient(s, x):
    total = _ds_norm(s, x)
    g = np.zeros(s.dim)
    for part, b in zip(s.parts, s.blocks):
        nb = norm_eval(part, x[b])
        if nb > 0:
            g[b] = nb / total * norm_gradient(part, x[b])
    return g


def _ds_sip(s, x, y):
    from .sip import sip_eval

    return float(sum(sip_eval(part, x[b], y[b]) for part, b in zip(s.parts, s.blocks)))


def _ds_dual(s, g):
    return math.hypot(*(dual_norm(part, g[b]) for part, b in zip(s.parts, s.blocks)))


def _ds_support(s, c):
    total = _ds_dual(s, c)
    e = np.zeros(s.dim)
    for part, b in zip(s.parts, s.blocks):
        db = dual_norm(part, c[b])
        if db > 0:
            e[b] = db / total * support_point(part, c[b])
    return e


register_family(
    "direct_sum",
    Family(
        norm=_ds_norm,
        validate=_validate_direct_sum,
        gradient=_ds_gradient,
        sip=_ds_sip,
        dual_norm=_ds_dual,
        support=_ds_support,
    ),
)


# --- public evaluation ----------------------------------------------------


def norm_eval(spec: NormSpec, x) -> float:
    """Norm of ``x`` under ``spec``."""
    x = as_vector(x, spec.dim)
    return float(_family(spec.family).norm(spec, x))


def numeric_gradient(f: Callable, x: np.ndarray, probe_tol: float = 1e-3) -> np.ndarray:
    """Central-difference gradient of ``f`` with a one-sided smoothness probe.

    The step is ``eps**(1/3) * max(1, |x|_inf)``.  If a forward and a
    backward difference disagree by more than ``probe_tol`` (relative to
    ``max(1, |central|)``) the function has a kink at ``x`` and
    :class:`NonSmoothNorm` is raised.
    """
    x = np.asarray(x, dtype=float)
    h = EPS ** (1.0 / 3.0) * max(1.0, float(np.max(np.abs(x))))
    f0 = f(x)
    g = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        fp, fm = f(x + step), f(x - step)
        g[i] = (fp - fm) / (2.0 * h)
        forward, backward = (fp - f0) / h, (f0 - fm) / h
        if abs(forward - backward) > probe_tol * max(1.0, abs(g[i])):
            raise NonSmoothNorm(
                f"one-sided differences disagree in coordinate {i}: "
                f"{forward:.6g} vs {backward:.6g}"
            )
    return g


def norm_gradient(spec: NormSpec, x) -> np.ndarray:
    """Gradient of the norm at ``x != 0``.

    This is the unique functional ``g`` with ``g @ x == ||x||`` and dual
    norm 1.
    """
    x = as_vector(x, spec.dim)
    if not np.any(x):
        raise InvalidInput("norm gradient is undefined at the origin")
    fam = _family(spec.family)
    if fam.gradient is not None:
        return np.asarray(fam.gradient(spec, x), dtype=float)
    return numeric_gradient(lambda v: fam.norm(spec, v), x)


def dual_norm(spec: NormSpec, g) -> float:
    """Dual norm ``max{g @ e : ||e|| = 1}``."""
    g = as_vector(g, spec.dim)
    fam = _family(spec.family)
    if fam.dual_norm is not None:
        return float(fam.dual_norm(spec, g))
    if not np.any(g):
        return 0.0
    return float(g @ support_point(spec, g))


def support_point(spec: NormSpec, c) -> np.ndarray:
    """Unit vector maximizing the linear functional ``e -> c @ e``.

    Closed form for builtin families; otherwise BFGS on the scale-free
    objective ``-(c @ e) / ||e||`` started from ``c``.
    """
    c = as_vector(c, spec.dim)
    if not np.any(c):
        raise InvalidInput("the zero functional has no unique maximizer")
    fam = _family(spec.family)
    if fam.support is not None:
        return np.asarray(fam.support(spec, c), dtype=float)

    def objective(e):
        n = fam.norm(spec, e)
        value = -(c @ e) / n
        grad = -c / n + (c @ e) / n**2 * norm_gradient(spec, e)
        return value, grad

    res = optimize.minimize(objective, c / np.linalg.norm(c), jac=True, method="BFGS",
                            options={"gtol": 1e-12})
    if not np.all(np.isfinite(res.x)) or not np.any(res.x):
        raise NumericalFailure("support point search diverged")
    return normalize(spec, res.x)


def normalize(spec: NormSpec, x) -> np.ndarray:
    """Scale ``x`` onto the unit sphere of ``spec``."""
    x = as_vector(x, spec.dim)
    n = norm_eval(spec, x)
    if n == 0:
        raise InvalidInput("cannot normalize the zero vector")
    return x / n


def build_direct_sum(parts: Sequence[NormSpec]) -> NormSpec:
    """Combine norms on complementary coordinate blocks.

    The result is ``||(u, v, ...)|| = sqrt(||u||^2 + ||v||^2 + ...)``, whose
    semi-inner-product is the sum of the parts' semi-inner-products.
    """
    parts = tuple(parts)
    if not parts:
        raise InvalidInput("direct_sum needs a nonempty list of parts")
    return NormSpec("direct_sum", sum(part.dim for part in parts), parts=parts)


# --- file format ----------------------------------------------------------

_ALLOWED_KEYS = {
    "lp": ({"type", "p", "dim"}, {"type", "p", "dim"}),
    "weighted_lp": ({"type", "p", "weights", "dim"}, {"type", "p", "weights"}),
    "ellipsoid": ({"type", "Q", "dim"}, {"type", "Q"}),
    "direct_sum": ({"type", "parts", "dim"}, {"type", "parts"}),
}


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInput(f"{name} must be a number, got {value!r}")
    return float(value)


def parse_norm(obj) -> NormSpec:
    """Build a :class:`NormSpec` from its JSON object form (strict)."""
    if not isinstance(obj, dict):
        raise InvalidInput("norm spec must be a JSON object")
    kind = obj.get("type")
    if kind not in _ALLOWED_KEYS:
        raise InvalidInput(f"unknown norm type {kind!r}")
    allowed, required = _ALLOWED_KEYS[kind]
    unknown = set(obj) - allowed
    if unknown:
        raise InvalidInput(f"unknown fields for {kind}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InvalidInput(f"missing fields for {kind}: {sorted(missing)}")

    if kind == "lp":
        dim = obj["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int):
            raise InvalidInput(f"dim must be an integer, got {dim!r}")
        spec = NormSpec.lp(_number(obj["p"], "p"), dim)
    elif kind == "weighted_lp":
        w = obj["weights"]
        if not isinstance(w, list) or not w:
            raise InvalidInput("weights must be a nonempty list")
        spec = NormSpec.weighted_lp(_number(obj["p"], "p"),
                                    [_number(v, "weight") for v in w])
    elif kind == "ellipsoid":
        Q = obj["Q"]
        if not isinstance(Q, list) or not all(isinstance(r, list) for r in Q):
            raise InvalidInput("Q must be a list of rows")
        spec = NormSpec.ellipsoid([[_number(v, "Q entry") for v in r] for r in Q])
    else:
        parts = obj["parts"]
        if not isinstance(parts, list):
            raise InvalidInput("parts must be a list")
        spec = build_direct_sum([parse_norm(part) for part in parts])

    if "dim" in obj and obj["dim"] != spec.dim:
        raise InvalidInput(f"declared dim {obj['dim']!r} does not match {spec.dim}")
    return spec


def load_norm(path) -> NormSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: invalid JSON: {exc}") from None
    return parse_norm(obj)
