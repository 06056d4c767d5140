"""Tridiagonal assembly of the discrete firn transport system.

All matrices act on the interior-plus-bottom coefficient vector of length
``n - 1``: row ``k`` corresponds to the hat function centred at node
``k + 1`` (0-based), see :mod:`firngas.mesh`.  The weighted matrices use
the endpoint-average (mean value theorem) quadrature of the node-sampled
weights; the mass matrix is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .model import RescaledContext

__all__ = [
    "Tridiagonal",
    "DiscreteSystem",
    "exact_inner",
    "mvt_inner",
    "assemble_M",
    "assemble_Mf",
    "assemble_Kf",
    "assemble_A",
    "assemble_S",
    "assemble_B",
    "assemble_system",
    "assemble_v1",
    "assemble_v3",
    "assemble_rhs",
    "write_band_csv",
]


@dataclass(frozen=True)
class Tridiagonal:
    """Square tridiagonal matrix stored as three bands.

    ``sub[s]`` couples row ``s+1`` to column ``s``; ``sup[s]`` couples row
    ``s`` to column ``s+1``.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub = np.asarray(self.sub, dtype=float)
        diag = np.asarray(self.diag, dtype=float)
        sup = np.asarray(self.sup, dtype=float)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)
        if len(sub) != len(diag) - 1 or len(sup) != len(diag) - 1:
            raise ValidationError("inconsistent band lengths")
        if not (np.all(np.isfinite(sub)) and np.all(np.isfinite(diag)) and np.all(np.isfinite(sup))):
            raise ValidationError("non-finite matrix entry")

    @property
    def dim(self) -> int:
        return len(self.diag)

    @classmethod
    def zeros(cls, dim: int) -> "Tridiagonal":
        return cls(np.zeros(dim - 1), np.zeros(dim), np.zeros(dim - 1))

    def to_dense(self) -> np.ndarray:
        dense = np.diag(self.diag)
        dense += np.diag(self.sub, -1)
        dense += np.diag(self.sup, 1)
        return dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[1:] += self.sub * x[:-1]
        out[:-1] += self.sup * x[1:]
        return out

    def __add__(self, other: "Tridiagonal") -> "Tridiagonal":
        return Tridiagonal(self.sub + other.sub, self.diag + other.diag, self.sup + other.sup)

    def __sub__(self, other: "Tridiagonal") -> "Tridiagonal":
        return Tridiagonal(self.sub - other.sub, self.diag - other.diag, self.sup - other.sup)

    def scale(self, factor: float) -> "Tridiagonal":
        return Tridiagonal(factor * self.sub, factor * self.diag, factor * self.sup)

    def transpose(self) -> "Tridiagonal":
        return Tridiagonal(self.sup.copy(), self.diag.copy(), self.sub.copy())

    def max_abs(self) -> float:
        return max(
            np.max(np.abs(self.diag)),
            np.max(np.abs(self.sub), initial=0.0),
            np.max(np.abs(self.sup), initial=0.0),
        )


def _check_indices(i: int, j: int, n: int):
    if not (1 <= i <= n and 1 <= j <= n):
        raise DomainError(f"basis indices ({i}, {j}) out of range 1..{n}")


def exact_inner(i: int, j: int, kind: str, mesh) -> float:
    """Closed-form inner products of hat functions, 1-based indices.

    ``kind`` is ``"phi_phi"`` for the plain product or ``"dphi_phi"`` for
    derivative-times-function (derivative on the first index).
    """
    n = mesh.n
    _check_indices(i, j, n)
    el = mesh.element_lengths
    if abs(i - j) > 1:
        return 0.0
    if kind == "phi_phi":
        if i == j:
            if i == 1:
                return el[0] / 3.0
            if i == n:
                return el[n - 2] / 3.0
            return (el[i - 2] + el[i - 1]) / 3.0
        if j == i - 1:
            return el[i - 2] / 6.0
        return el[i - 1] / 6.0
    if kind == "dphi_phi":
        if i == j:
            if i == 1:
                return -0.5
            if i == n:
                return 0.5
            return 0.0
        if j == i - 1:
            return 0.5
        return -0.5
    raise ValidationError(f"unknown exact inner-product kind {kind!r}")


def mvt_inner(i: int, j: int, kind: str, weights, mesh) -> float:
    """Endpoint-average approximations of weighted hat inner products.

    ``weights`` are node samples of the weight; kinds are ``"w_phi_phi"``,
    ``"w_dphi_phi"`` (derivative on the first index) and ``"w_dphi_dphi"``.
    """
    n = mesh.n
    _check_indices(i, j, n)
    w = np.asarray(weights, dtype=float)
    if len(w) != n:
        raise ValidationError("weight samples must be given at every node")
    el = mesh.element_lengths
    if abs(i - j) > 1:
        return 0.0
    if kind == "w_phi_phi":
        if i == j:
            if i == 1:
                return (w[0] + w[1]) / 2.0 * el[0] / 3.0
            if i == n:
                return (w[n - 2] + w[n - 1]) / 2.0 * el[n - 2] / 3.0
            return ((w[i - 1] + w[i]) / 2.0 * el[i - 1] / 3.0
                    + (w[i - 2] + w[i - 1]) / 2.0 * el[i - 2] / 3.0)
        if j == i - 1:
            return (w[i - 2] + w[i - 1]) / 2.0 * el[i - 2] / 6.0
        return (w[i - 1] + w[i]) / 2.0 * el[i - 1] / 6.0
    if kind == "w_dphi_phi":
        if i == j:
            if i == 1:
                return -(w[0] + w[1]) / 4.0
            if i == n:
                return (w[n - 2] + w[n - 1]) / 4.0
            return (w[i - 2] - w[i]) / 4.0
        if j == i - 1:
            return (w[i - 2] + w[i - 1]) / 4.0
        return -(w[i - 1] + w[i]) / 4.0
    if kind == "w_dphi_dphi":
        if i == j:
            if i == 1:
                return (w[0] + w[1]) / (2.0 * el[0])
            if i == n:
                return (w[n - 2] + w[n - 1]) / (2.0 * el[n - 2])
            return ((w[i - 2] + w[i - 1]) / (2.0 * el[i - 2])
                    + (w[i - 1] + w[i]) / (2.0 * el[i - 1]))
        if j == i - 1:
            return -(w[i - 2] + w[i - 1]) / (2.0 * el[i - 2])
        return -(w[i - 1] + w[i]) / (2.0 * el[i - 1])
    raise ValidationError(f"unknown weighted inner-product kind {kind!r}")


def assemble_M(mesh) -> Tridiagonal:
    """Exact mass matrix of the interior-plus-bottom basis."""
    el = mesh.element_lengths
    m = mesh.n - 1
    diag = np.empty(m)
    diag[: m - 1] = (el[: m - 1] + el[1:m]) / 3.0
    diag[m - 1] = el[m - 1] / 3.0
    band = el[1:m] / 6.0
    return Tridiagonal(band.copy(), diag, band.copy())


def assemble_Mf(mesh, f_samples) -> Tridiagonal:
    """Weighted mass matrix from node samples of the pore fraction."""
    f = np.asarray(f_samples, dtype=float)
    el = mesh.element_lengths
    m = mesh.n - 1
    pair = (f[:-1] + f[1:]) / 2.0  # element averages, pair[e] on element e
    diag = np.empty(m)
    diag[: m - 1] = pair[1:m] * el[1:m] / 3.0 + pair[: m - 1] * el[: m - 1] / 3.0
    diag[m - 1] = pair[m - 1] * el[m - 1] / 3.0
    band = pair[1:m] * el[1:m] / 6.0
    return Tridiagonal(band.copy(), diag, band.copy())


def assemble_Kf(mesh, f_samples, fcoef: float) -> Tridiagonal:
    """Advection matrix (derivative on the row basis), scaled by ``fcoef``."""
    f = np.asarray(f_samples, dtype=float)
    m = mesh.n - 1
    diag = np.empty(m)
    diag[: m - 1] = f[: m - 1] - f[2:]
    diag[m - 1] = f[m - 1] + f[m]
    band = f[1:m] + f[2:]
    return Tridiagonal((fcoef / 4.0) * band, (fcoef / 4.0) * diag, -(fcoef / 4.0) * band)


def assemble_A(mesh, d_samples) -> Tridiagonal:
    """Gravitational-drift matrix; same pattern as the advection matrix."""
    return assemble_Kf(mesh, d_samples, 1.0)


def assemble_S(mesh, d_samples) -> Tridiagonal:
    """Stiffness matrix of the diffusivity-weighted derivative products."""
    d = np.asarray(d_samples, dtype=float)
    el = mesh.element_lengths
    m = mesh.n - 1
    flux = (d[:-1] + d[1:]) / (2.0 * el)  # flux[e] on element e
    diag = np.empty(m)
    diag[: m - 1] = flux[: m - 1] + flux[1:m]
    diag[m - 1] = flux[m - 1]
    band = -flux[1:m]
    return Tridiagonal(band.copy(), diag, band.copy())


def assemble_B(mesh, f_samples, fcoef: float) -> Tridiagonal:
    """Bottom boundary matrix: zero except the last diagonal entry."""
    f = np.asarray(f_samples, dtype=float)
    m = mesh.n - 1
    out = Tridiagonal.zeros(m)
    out.diag[m - 1] = fcoef * f[m]
    return out


@dataclass(frozen=True)
class DiscreteSystem:
    """All assembled operators for one mesh / coefficient / time-step choice."""

    mesh: object
    f_samples: np.ndarray
    d_samples: np.ndarray
    context: RescaledContext
    dt: float
    M: Tridiagonal
    Mf: Tridiagonal
    Kf: Tridiagonal
    A: Tridiagonal
    S: Tridiagonal
    B: Tridiagonal
    C: Tridiagonal
    V: Tridiagonal

    def __post_init__(self):
        # consistency of the stored linear combination
        recomputed = self.Mf + self.C.scale(self.context.T_e * self.dt)
        scale = max(self.V.max_abs(), 1.0)
        for band in ("sub", "diag", "sup"):
            if np.max(np.abs(getattr(recomputed, band) - getattr(self.V, band))) > 1e-12 * scale:
                raise ValidationError("system matrix inconsistent with its components")


def assemble_system(mesh, f_samples, d_samples, context: RescaledContext,
                    dt: float) -> DiscreteSystem:
    """Assemble every operator and the implicit-Euler step matrix.

    The spatial operator combines reaction, diffusion, gravitational drift,
    advection and the bottom boundary term; the step matrix adds the
    weighted mass matrix.
    """
    if dt < 0.0:
        raise ValidationError("time step must be nonnegative")
    f = np.asarray(f_samples, dtype=float)
    d = np.asarray(d_samples, dtype=float)
    if len(f) != mesh.n or len(d) != mesh.n:
        raise ValidationError("coefficient samples must be given at every node")
    z_F = context.z_F
    M = assemble_M(mesh)
    Mf = assemble_Mf(mesh, f)
    Kf = assemble_Kf(mesh, f, context.fcoef)
    A = assemble_A(mesh, d)
    S = assemble_S(mesh, d)
    B = assemble_B(mesh, f, context.fcoef)
    C = (M.scale(context.gcoef)
         + S.scale(1.0 / z_F**2)
         - A.scale(context.mcoef / z_F)
         + (B - Kf).scale(1.0 / z_F))
    V = Mf + C.scale(context.T_e * dt)
    return DiscreteSystem(mesh=mesh, f_samples=f, d_samples=d, context=context, dt=dt,
                          M=M, Mf=Mf, Kf=Kf, A=A, S=S, B=B, C=C, V=V)


def assemble_v1(t_k: float, t_k1: float, atmosphere, mesh, f_samples) -> np.ndarray:
    """Boundary forcing from the change of the atmospheric signal."""
    f = np.asarray(f_samples, dtype=float)
    out = np.zeros(mesh.n - 1)
    drho = atmosphere(t_k1) - atmosphere(t_k)
    out[0] = drho * (f[0] + f[1]) * mesh.element_lengths[0] / 12.0
    return out


def assemble_v3(t_k1: float, atmosphere, mesh, f_samples, d_samples,
                context: RescaledContext) -> np.ndarray:
    """Boundary forcing from the spatial operator acting on the surface hat."""
    f = np.asarray(f_samples, dtype=float)
    d = np.asarray(d_samples, dtype=float)
    h2 = mesh.element_lengths[0]
    z_F = context.z_F
    c1 = (context.gcoef * h2 / 6.0
          - (d[0] + d[1]) / (2.0 * h2 * z_F**2)
          - context.fcoef * (f[0] + f[1]) / (4.0 * z_F)
          - context.mcoef * (d[0] + d[1]) / (4.0 * z_F))
    out = np.zeros(mesh.n - 1)
    out[0] = atmosphere(t_k1) * c1
    return out


def assemble_rhs(lam_k: np.ndarray, v1: np.ndarray, v3: np.ndarray,
                 Mf: Tridiagonal, T_e: float, dt: float) -> np.ndarray:
    """Right-hand side of one implicit step: ``Mf @ lam_k - v1 - T_e*dt*v3``."""
    lam_k = np.asarray(lam_k, dtype=float)
    if len(lam_k) != Mf.dim or len(v1) != Mf.dim or len(v3) != Mf.dim:
        raise ValidationError("right-hand-side dimension mismatch")
    return Mf.matvec(lam_k) - v1 - T_e * dt * v3


def write_band_csv(matrix: Tridiagonal, path):
    """Dump a tridiagonal matrix as (row, col, value) CSV, 0-based indices."""
    with open(path, "w", newline="\n") as handle:
        for k in range(matrix.dim):
            if k > 0:
                handle.write(f"{k},{k - 1},{matrix.sub[k - 1]:.17g}\n")
            handle.write(f"{k},{k},{matrix.diag[k]:.17g}\n")
            if k < matrix.dim - 1:
                handle.write(f"{k},{k + 1},{matrix.sup[k]:.17g}\n")
