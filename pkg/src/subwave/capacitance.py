"""Quasiperiodic capacitance matrices for circular resonators.

The zero-frequency quasiperiodic Green's function is evaluated by direct
truncation of its dual-lattice (spectral) sum.  The single layer potential
on the union of circle boundaries is discretized in a basis of angular
harmonics exp(i*n*theta) per boundary; substituting the Jacobi-Anger
expansion of each plane wave turns every matrix entry into a lattice sum
of Bessel-J products, so the whole Galerkin matrix factorizes as
``-U^H U`` for a plane-wave-by-harmonic matrix U.  Capacitance entries
follow from solving against the indicator of each boundary.

A dense Nystrom discretization (trapezoidal quadrature on each circle,
spectrally accurate for the smooth truncated kernel) provides an
independent oracle sharing only the truncated Green's sum, so a
disagreement isolates basis/assembly errors rather than sum truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .errors import (
    AlphaOnDualLattice,
    NonpositiveRadius,
    SingularOperator,
    TruncationNotConverged,
    UnequalVolumes,
)
from .lattice import LatticeSpec

__all__ = [
    "Material",
    "ResonatorArray",
    "MultipoleSettings",
    "CapacitanceMatrix",
    "green_lattice_sum",
    "single_layer_matrix",
    "capacitance_matrix",
    "nystrom_capacitance_matrix",
    "static_bands",
    "finite_sphere_capacitance",
]

_ALPHA_TOL = 1e-10
_COND_LIMIT = 1e14


@dataclass(frozen=True)
class Material:
    """High-contrast material constants.

    ``delta`` is the (small) interior-to-exterior density ratio driving
    subwavelength resonance; wave speeds are derived.
    """

    delta: float
    kappa_r: float = 1.0
    rho_r: float = 1.0
    kappa_0: float = 1.0
    rho_0: float = 1.0

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError("contrast parameter delta must be positive")
        for name in ("kappa_r", "rho_r", "kappa_0", "rho_0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def v_r(self) -> float:
        return float(np.sqrt(self.kappa_r / self.rho_r))

    @property
    def v_0(self) -> float:
        return float(np.sqrt(self.kappa_0 / self.rho_0))


@dataclass(frozen=True)
class ResonatorArray:
    """Disjoint circular resonators in one unit cell."""

    centers: np.ndarray
    radii: np.ndarray
    material: Material

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if centers.shape[1] != 2:
            raise ValueError("centers must be 2D points")
        if len(radii) == 1 and len(centers) > 1:
            radii = np.full(len(centers), radii[0])
        if len(radii) != len(centers):
            raise ValueError("need one radius per center")
        if np.any(radii <= 0.0):
            raise NonpositiveRadius("all radii must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def n_resonators(self) -> int:
        return len(self.radii)

    @property
    def volumes(self) -> np.ndarray:
        return np.pi * self.radii**2

    def check_disjoint(self, spec: LatticeSpec) -> None:
        """Disks must not overlap, including across one shell of lattice translates."""
        shifts = [
            m1 * spec.primitives[0] + m2 * spec.primitives[1]
            for m1 in (-1, 0, 1)
            for m2 in (-1, 0, 1)
        ]
        n = self.n_resonators
        for i in range(n):
            for j in range(n):
                for m in shifts:
                    if i == j and np.allclose(m, 0.0):
                        continue
                    gap = np.linalg.norm(self.centers[i] + m - self.centers[j])
                    if gap <= self.radii[i] + self.radii[j]:
                        raise ValueError(
                            f"resonators {i} and {j} overlap (shift {m}): "
                            f"distance {gap:.4g} <= {self.radii[i] + self.radii[j]:.4g}"
                        )


@dataclass(frozen=True)
class MultipoleSettings:
    """Discretization controls for the boundary-integral solver.

    ``multipole_order`` is the largest angular harmonic kept per boundary;
    ``lattice_sum_radius`` keeps dual vectors q with
    ||alpha + q|| <= Q * ||a1||; ``refine_factor`` scales both truncations
    in the built-in self-check.  ``truncation_tol``, when set, turns the
    self-check into a hard gate.
    """

    multipole_order: int = 4
    lattice_sum_radius: int = 40
    refine_factor: float = 2.0
    truncation_tol: float | None = None

    def __post_init__(self):
        if self.multipole_order < 2:
            raise ValueError("multipole_order must be >= 2")
        if self.lattice_sum_radius < 4:
            raise ValueError("lattice_sum_radius must be >= 4")
        if self.refine_factor <= 1.0:
            raise ValueError("refine_factor must exceed 1")

    def refined(self) -> "MultipoleSettings":
        return MultipoleSettings(
            multipole_order=int(np.ceil(self.multipole_order * self.refine_factor)),
            lattice_sum_radius=int(np.ceil(self.lattice_sum_radius * self.refine_factor)),
            refine_factor=self.refine_factor,
        )


@dataclass(frozen=True)
class CapacitanceMatrix:
    """Capacitance matrix at one quasimomentum, with truncation diagnostics."""

    alpha: np.ndarray
    entries: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_resonators(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        hermitian = 0.5 * (self.entries + self.entries.conj().T)
        return np.linalg.eigvalsh(hermitian)


def _require_off_lattice(spec: LatticeSpec, alpha: np.ndarray) -> None:
    dist = spec.dual_distance(alpha)
    if dist < _ALPHA_TOL:
        raise AlphaOnDualLattice(
            f"alpha = {np.asarray(alpha).tolist()} lies within {dist:.2e} of the dual lattice"
        )


def _wave_vectors(spec: LatticeSpec, alpha: np.ndarray, settings: MultipoleSettings):
    cutoff = settings.lattice_sum_radius * np.linalg.norm(spec.duals[0])
    k = spec.dual_points_within(alpha, cutoff)
    z = np.linalg.norm(k, axis=1)
    return k, z


def green_lattice_sum(spec: LatticeSpec, alpha, r, settings: MultipoleSettings) -> complex:
    """Truncated spectral sum -(1/|Y|) sum_q exp(i(alpha+q).r) / ||alpha+q||^2."""
    alpha = np.asarray(alpha, dtype=float)
    _require_off_lattice(spec, alpha)
    k, z = _wave_vectors(spec, alpha, settings)
    phases = np.exp(1j * (k @ np.asarray(r, dtype=float)))
    return complex(-(phases / z**2).sum() / spec.cell_area)


def _bessel_block(z: np.ndarray, radius: float, order: int) -> np.ndarray:
    """J_n(z * radius) for n = -order..order, using J_{-n} = (-1)^n J_n."""
    positive = jv(np.arange(order + 1)[None, :], (z * radius)[:, None])
    signs = (-1.0) ** np.arange(order, 0, -1)
    return np.concatenate([signs[None, :] * positive[:, :0:-1], positive], axis=1)


def _planewave_harmonic_factor(
    array: ResonatorArray, spec: LatticeSpec, k: np.ndarray, z: np.ndarray, order: int
) -> np.ndarray:
    """Matrix U with A = -U^H U the harmonic-basis Galerkin matrix.

    Column (j, n) holds, per wave vector k,
    sqrt(2*pi*R_j / |Y|) * (-i)^n * J_n(|k| R_j) * exp(i*n*arg k) * exp(-i k.c_j) / |k|.
    """
    n_modes = 2 * order + 1
    orders = np.arange(-order, order + 1)
    phi = np.arctan2(k[:, 1], k[:, 0])
    angular = np.exp(1j * np.outer(phi, orders)) * ((-1j) ** orders)[None, :]
    bessel_cache = {}
    U = np.empty((len(k), array.n_resonators * n_modes), dtype=complex)
    for j in range(array.n_resonators):
        R = array.radii[j]
        if R not in bessel_cache:
            bessel_cache[R] = _bessel_block(z, R, order)
        translate = np.exp(-1j * (k @ array.centers[j]))
        block = np.sqrt(2.0 * np.pi * R / spec.cell_area) * bessel_cache[R] * angular
        block *= (translate / z)[:, None]
        U[:, j * n_modes : (j + 1) * n_modes] = block
    return U


def single_layer_matrix(
    array: ResonatorArray, spec: LatticeSpec, alpha, settings: MultipoleSettings
) -> np.ndarray:
    """Galerkin matrix of the zero-frequency single layer potential.

    Basis: arc-length-normalized harmonics exp(i*n*theta)/sqrt(2*pi*R_j),
    n = -multipole_order..multipole_order on each boundary.  The matrix is
    Hermitian negative definite for real alpha off the dual lattice.
    """
    alpha = np.asarray(alpha, dtype=float)
    _require_off_lattice(spec, alpha)
    array.check_disjoint(spec)
    k, z = _wave_vectors(spec, alpha, settings)
    U = _planewave_harmonic_factor(array, spec, k, z, settings.multipole_order)
    return -(U.conj().T @ U)


def _solve_capacitance(
    array: ResonatorArray, spec: LatticeSpec, alpha: np.ndarray, settings: MultipoleSettings
) -> np.ndarray:
    n_modes = 2 * settings.multipole_order + 1
    A = single_layer_matrix(array, spec, alpha, settings)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularOperator(f"single-layer system condition number {cond:.3e}")
    scale = np.sqrt(2.0 * np.pi * array.radii)
    rhs = np.zeros((A.shape[0], array.n_resonators), dtype=complex)
    for j in range(array.n_resonators):
        rhs[j * n_modes + settings.multipole_order, j] = scale[j]
    density = np.linalg.solve(A, rhs)
    mean_coeff = density[
        np.arange(array.n_resonators) * n_modes + settings.multipole_order, :
    ]
    return -scale[:, None] * mean_coeff


def capacitance_matrix(
    array: ResonatorArray, spec: LatticeSpec, alpha, settings: MultipoleSettings
) -> CapacitanceMatrix:
    """Capacitance matrix C at quasimomentum alpha, with self-check diagnostics.

    Every solve is repeated at refine_factor-times truncation; the relative
    Frobenius difference is reported in ``diagnostics['rel_error']`` and,
    when ``settings.truncation_tol`` is set, enforced as a hard gate.
    """
    alpha = np.asarray(alpha, dtype=float)
    C = _solve_capacitance(array, spec, alpha, settings)
    C_fine = _solve_capacitance(array, spec, alpha, settings.refined())
    rel = float(np.linalg.norm(C_fine - C) / np.linalg.norm(C_fine))
    if settings.truncation_tol is not None and rel > settings.truncation_tol:
        raise TruncationNotConverged(
            f"self-check difference {rel:.3e} exceeds tolerance {settings.truncation_tol:.3e} "
            f"at alpha = {alpha.tolist()}"
        )
    diagnostics = {
        "multipole_order": settings.multipole_order,
        "lattice_sum_radius": settings.lattice_sum_radius,
        "refine_factor": settings.refine_factor,
        "rel_error": rel,
    }
    return CapacitanceMatrix(alpha=alpha, entries=C, diagnostics=diagnostics)


def nystrom_capacitance_matrix(
    array: ResonatorArray,
    spec: LatticeSpec,
    alpha,
    settings: MultipoleSettings,
    points_per_boundary: int = 512,
    rcond: float = 1e-13,
) -> np.ndarray:
    """Dense-quadrature oracle for the capacitance matrix.

    Collocates the same truncated Green's sum at equispaced boundary nodes
    with trapezoidal weights and shares no assembly code with the multipole
    path beyond the dual-lattice enumeration.  The truncated kernel is
    numerically rank-deficient on a dense grid (it resolves only harmonics
    up to the cutoff times the radius), so the symmetrized system is
    inverted by Hermitian eigendecomposition with the eigenvalue floor
    ``rcond`` times the dominant eigenvalue.
    """
    alpha = np.asarray(alpha, dtype=float)
    _require_off_lattice(spec, alpha)
    array.check_disjoint(spec)
    k, z = _wave_vectors(spec, alpha, settings)

    theta = 2.0 * np.pi * np.arange(points_per_boundary) / points_per_boundary
    unit = np.column_stack([np.cos(theta), np.sin(theta)])
    points = np.concatenate(
        [array.centers[j] + array.radii[j] * unit for j in range(array.n_resonators)]
    )
    weights = np.concatenate(
        [
            np.full(points_per_boundary, 2.0 * np.pi * array.radii[j] / points_per_boundary)
            for j in range(array.n_resonators)
        ]
    )

    phases = np.exp(1j * (points @ k.T))
    kernel = -(phases / z[None, :] ** 2) @ phases.conj().T / spec.cell_area
    sqrt_w = np.sqrt(weights)
    symmetric = sqrt_w[:, None] * kernel * sqrt_w[None, :]

    labels = np.repeat(np.arange(array.n_resonators), points_per_boundary)
    rhs = (labels[:, None] == np.arange(array.n_resonators)[None, :]).astype(complex)
    rhs_sym = sqrt_w[:, None] * rhs

    eigenvalues, vectors = np.linalg.eigh(0.5 * (symmetric + symmetric.conj().T))
    keep = np.abs(eigenvalues) > rcond * np.max(np.abs(eigenvalues))
    inverse = np.zeros_like(eigenvalues)
    inverse[keep] = 1.0 / eigenvalues[keep]
    density_sym = vectors @ (inverse[:, None] * (vectors.conj().T @ rhs_sym))

    C = np.empty((array.n_resonators, array.n_resonators), dtype=complex)
    for i in range(array.n_resonators):
        mask = labels == i
        C[i, :] = -(sqrt_w[mask, None] * density_sym[mask, :]).sum(axis=0)
    return C


def static_bands(C: CapacitanceMatrix, array: ResonatorArray) -> np.ndarray:
    """Leading-order resonant frequencies sqrt(delta*lambda_i/|D_1|)*v_r, ascending.

    Valid when all resonators share one volume; raises UnequalVolumes
    otherwise.
    """
    radii = array.radii
    if np.max(np.abs(radii - radii[0])) > 1e-12 * radii[0]:
        raise UnequalVolumes("static band formula requires equal resonator volumes")
    lam = C.eigenvalues()
    floor = -1e-10 * max(1.0, float(np.max(np.abs(lam))))
    if np.min(lam) < floor:
        raise SingularOperator(
            f"capacitance spectrum not positive: min eigenvalue {np.min(lam):.3e}"
        )
    lam = np.clip(lam, 0.0, None)
    mat = array.material
    return np.sqrt(mat.delta * lam / array.volumes[0]) * mat.v_r


def finite_sphere_capacitance(radius: float) -> float:
    """Capacitance 4*pi*R of a single sphere, for finite-array systems."""
    if radius <= 0.0:
        raise NonpositiveRadius(f"radius must be positive, got {radius}")
    return 4.0 * np.pi * radius
