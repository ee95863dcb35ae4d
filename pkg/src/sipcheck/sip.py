"""The semi-inner-product induced by a smooth norm.

For a smooth norm the semi-inner-product is unique and equals
``[x, y] = ||y|| * (grad||.||(y) @ x)``, with ``[x, 0] = 0``.  Families
may register an explicit formula; the gradient route is kept as an
independent second computation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInput
from .norms import NormSpec, _family, as_vector, norm_eval, norm_gradient

__all__ = ["sip_eval", "sip_eval_gradient", "AxiomReport", "sip_axiom_report"]


def sip_eval_gradient(spec: NormSpec, x, y) -> float:
    """``[x, y]`` computed through the norm gradient at ``y``."""
    x = as_vector(x, spec.dim)
    y = as_vector(y, spec.dim)
    if not np.any(y):
        return 0.0
    return float(norm_eval(spec, y) * (norm_gradient(spec, y) @ x))


def sip_eval(spec: NormSpec, x, y) -> float:
    """Semi-inner-product ``[x, y]``: linear in ``x``, ``[x, x] = ||x||**2``.

    Examples
    --------
    >>> sip_eval(NormSpec.lp(4, 2), [1.0, 0.0], [1.0, 1.0])  # doctest: +ELLIPSIS
    0.7071067811865...
    """
    x = as_vector(x, spec.dim)
    y = as_vector(y, spec.dim)
    if not np.any(y):
        return 0.0
    fam = _family(spec.family)
    if fam.sip is not None:
        return float(fam.sip(spec, x, y))
    return sip_eval_gradient(spec, x, y)


@dataclass
class AxiomReport:
    """Worst relative violation of each axiom over the sampled inputs."""

    linearity: float
    positivity: float
    norm_identity: float
    schwarz: float
    homogeneity: float
    samples: int

    @property
    def max_residual(self) -> float:
        return max(self.linearity, self.positivity, self.norm_identity,
                   self.schwarz, self.homogeneity)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.max_residual <= tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_residual"] = self.max_residual
        return d


def sip_axiom_report(spec: NormSpec, sample_count: int = 256, seed: int = 0) -> AxiomReport:
    """Check the semi-inner-product axioms on seeded random inputs.

    Covers linearity in the first argument, strict positivity together
    with ``[x, x] = ||x||**2``, the Schwarz inequality, and homogeneity in
    the second argument.  All residuals are relative to the norms of the
    inputs involved.
    """
    if sample_count < 1:
        raise InvalidInput("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = spec.dim
    lin = pos = ident = sch = hom = 0.0
    for _ in range(sample_count):
        x1, x2, y = rng.standard_normal((3, n))
        a, b = rng.standard_normal(2)
        lam = rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-3, 3)
        nx1, nx2, ny = norm_eval(spec, x1), norm_eval(spec, x2), norm_eval(spec, y)

        lhs = sip_eval(spec, a * x1 + b * x2, y)
        rhs = a * sip_eval(spec, x1, y) + b * sip_eval(spec, x2, y)
        lin = max(lin, abs(lhs - rhs) / ((abs(a) * nx1 + abs(b) * nx2) * ny))

        xx = sip_eval(spec, x1, x1)
        pos = max(pos, 0.0 if xx > 0 else 1.0)
        ident = max(ident, abs(xx - nx1**2) / nx1**2)

        sch = max(sch, max(0.0, abs(sip_eval(spec, x1, y)) - nx1 * ny) / (nx1 * ny))

        xy = sip_eval(spec, x1, y)
        hom = max(hom, abs(sip_eval(spec, x1, lam * y) - lam * xy) / ((1 + abs(lam)) * nx1 * ny))
    return AxiomReport(lin, pos, ident, sch, hom, sample_count)
