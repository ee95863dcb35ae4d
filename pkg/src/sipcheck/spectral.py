"""Eigen-analysis of small dense real operators.

Eigenvalues are grouped by absolute value, ``lam_1 > lam_2 > ... >= 0``.
Group ``i`` carries the eigenspaces of ``+lam_i`` and ``-lam_i`` and their
span.  Group indices are 1-based, following the usual mathematical
numbering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidInput

__all__ = [
    "SpectralData",
    "as_matrix",
    "load_operator",
    "spectral_decompose",
    "component_of",
]

RESIDUAL_TOL = 1e-8
COND_LIMIT = 1e8
IMAG_TOL = 1e-6


def as_matrix(A, dim: Optional[int] = None) -> np.ndarray:
    """Convert ``A`` to a finite square float matrix."""
    try:
        M = np.asarray(A, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"not a real matrix: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"operator must be a square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise DimensionMismatch(dim, M.shape[0])
    if not np.all(np.isfinite(M)):
        raise InvalidInput("operator has non-finite entries")
    return M


def load_operator(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) != {"matrix"}:
        raise InvalidInput('operator file must be {"matrix": [[...], ...]}')
    rows = obj["matrix"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InvalidInput("matrix must be a list of rows")
    return as_matrix(rows)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues grouped by absolute value, with eigenspace bases.

    ``E[i]``, ``E_neg[i]`` and ``Ebar[i]`` are ``n x m`` arrays whose
    columns span the eigenspace of ``+lambdas[i]``, of ``-lambdas[i]``,
    and their sum.  An absent eigenspace is an ``n x 0`` array.
    """

    n: int
    lambdas: tuple
    E: tuple
    E_neg: tuple
    Ebar: tuple
    diagonalizable: bool
    reason: str = ""
    _coeff: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return len(self.lambdas)

    def components(self, x) -> list:
        """All components ``x_i`` of ``x = sum_i x_i`` with ``x_i`` in ``Ebar_i``."""
        if not self.diagonalizable:
            raise InvalidInput(f"operator is not diagonalizable ({self.reason})")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch(self.n, x.shape[0] if x.ndim == 1 else x.shape)
        c = self._coeff @ x
        out, start = [], 0
        for B in self.Ebar:
            m = B.shape[1]
            out.append(B @ c[start:start + m])
            start += m
        return out

    def group_of(self, z, tol: float = 1e-8) -> int:
        """1-based index of the group whose ``Ebar`` contains ``z``."""
        z = np.asarray(z, dtype=float)
        scale = np.max(np.abs(z))
        if scale == 0:
            raise InvalidInput("the zero vector lies in every group")
        for i, zi in enumerate(self.components(z), start=1):
            if np.max(np.abs(z - zi)) <= tol * scale:
                return i
        raise InvalidInput("vector does not lie in a single eigenvalue group")


def _null_basis(A, mu, m):
    n = A.shape[0]
    _, _, vt = np.linalg.svd(A - mu * np.eye(n))
    return vt[n - m:].T.copy()


def spectral_decompose(A, tol: float = 1e-8) -> SpectralData:
    """Group the spectrum of ``A`` by absolute value.

    Eigenvalues whose absolute values differ by at most
    ``tol * max(1, lam_1)`` share a group.  ``A`` counts as diagonalizable
    when its spectrum is real and the eigenvector bases (null spaces of
    ``A -+ lam_i I`` of the algebraic multiplicity) satisfy the residual
    bound and jointly have condition number at most 1e8.
    """
    A = as_matrix(A)
    n = A.shape[0]
    w = np.linalg.eigvals(A)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.any(np.abs(w.imag) > IMAG_TOL * scale):
        return SpectralData(n, (), (), (), (), False, "complex spectrum")
    w = w.real

    thr = tol * scale
    order = np.argsort(-np.abs(w), kind="stable")
    clusters = []
    for idx in order:
        if clusters and abs(abs(w[clusters[-1][-1]]) - abs(w[idx])) <= thr:
            clusters[-1].append(idx)
        else:
            clusters.append([idx])

    a_inf = float(np.max(np.sum(np.abs(A), axis=1)))
    bound = RESIDUAL_TOL * max(a_inf, np.finfo(float).tiny)
    lambdas, E, E_neg, Ebar = [], [], [], []
    defective = False
    for cl in clusters:
        vals = w[cl]
        lam = float(np.mean(np.abs(vals)))
        if lam <= thr:
            lam, m_pos, m_neg = 0.0, len(cl), 0
        else:
            m_pos = int(np.sum(vals > 0))
            m_neg = len(cl) - m_pos
        bases = []
        for mu, m in ((lam, m_pos), (-lam, m_neg)):
            if m == 0:
                bases.append(np.zeros((n, 0)))
                continue
            V = _null_basis(A, mu, m)
            if np.max(np.abs(A @ V - mu * V)) > bound:
                defective = True
            bases.append(V)
        lambdas.append(lam)
        E.append(bases[0])
        E_neg.append(bases[1])
        Ebar.append(np.hstack(bases))

    B = np.hstack(Ebar)
    if not defective and np.linalg.cond(B) > COND_LIMIT:
        defective = True
    if defective:
        return SpectralData(n, tuple(lambdas), tuple(E), tuple(E_neg), tuple(Ebar),
                            False, "defective")
    for arr in (*E, *E_neg, *Ebar):
        arr.setflags(write=False)
    coeff = np.linalg.inv(B)
    coeff.setflags(write=False)
    return SpectralData(n, tuple(lambdas), tuple(E), tuple(E_neg), tuple(Ebar),
                        True, "", coeff)


def component_of(sd: SpectralData, x, i: int) -> np.ndarray:
    """Component ``x_i`` of ``x`` in group ``i`` (1-based)."""
    if not sd.diagonalizable:
        raise InvalidInput(f"operator is not diagonalizable ({sd.reason})")
    if not 1 <= i <= sd.k:
        raise InvalidInput(f"group index {i} out of range 1..{sd.k}")
    return sd.components(x)[i - 1]
