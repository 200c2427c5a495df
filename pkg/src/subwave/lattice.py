"""Spatial lattices, dual lattices, Brillouin-zone paths and time-zone folding.

Conventions: primitive vectors l_i and dual vectors a_i satisfy
a_i . l_j = 2*pi*delta_ij.  Quasifrequencies live in the strip
[-Omega/2, Omega/2) + i*R and are reduced into it by ``fold_quasifrequency``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLattice, EmptyPath

__all__ = [
    "LatticeSpec",
    "PathSamples",
    "TimeBrillouinZone",
    "dual_lattice",
    "brillouin_path",
    "fold_quasifrequency",
    "square_lattice",
    "honeycomb_lattice",
]

_DEGENERACY_TOL = 1e-12


def dual_lattice(primitives: np.ndarray) -> np.ndarray:
    """Dual vectors of a 2D lattice, rows a_i with a_i . l_j = 2*pi*delta_ij.

    Raises DegenerateLattice when the primitive vectors are numerically
    collinear.
    """
    L = np.asarray(primitives, dtype=float)
    if L.shape != (2, 2):
        raise DegenerateLattice(f"expected two 2D primitive vectors, got shape {L.shape}")
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    scale = np.linalg.norm(L[0]) * np.linalg.norm(L[1])
    if abs(det) <= _DEGENERACY_TOL * scale:
        raise DegenerateLattice(f"|det| = {abs(det):.3e} below threshold for vectors {L.tolist()}")
    return 2.0 * np.pi * np.linalg.inv(L).T


@dataclass(frozen=True)
class LatticeSpec:
    """A 2D Bravais lattice with its dual and unit-cell area.

    ``primitives`` and ``duals`` are 2x2 arrays whose rows are the vectors.
    ``symmetry_points`` maps waypoint names to quasimomenta.
    """

    primitives: np.ndarray
    duals: np.ndarray = field(init=False)
    cell_area: float = field(init=False)
    symmetry_points: dict = field(default_factory=dict)

    def __post_init__(self):
        L = np.array(self.primitives, dtype=float)
        object.__setattr__(self, "primitives", L)
        object.__setattr__(self, "duals", dual_lattice(L))
        object.__setattr__(self, "cell_area", abs(np.linalg.det(L)))

    def dual_distance(self, alpha: np.ndarray) -> float:
        """Distance from ``alpha`` to the nearest dual-lattice point."""
        alpha = np.asarray(alpha, dtype=float)
        # fractional coordinates in the dual basis (rows of self.duals)
        frac = np.linalg.solve(self.duals.T, alpha)
        base = np.floor(frac)
        best = np.inf
        for di in (0.0, 1.0, -1.0):
            for dj in (0.0, 1.0, -1.0):
                n = base + np.array([di, dj])
                best = min(best, float(np.linalg.norm(alpha - self.duals.T @ n)))
        return best

    def dual_points_within(self, alpha: np.ndarray, cutoff: float) -> np.ndarray:
        """All k = alpha + q, q in the dual lattice, with ||k|| <= cutoff."""
        alpha = np.asarray(alpha, dtype=float)
        sigma_min = np.linalg.svd(self.duals, compute_uv=False)[-1]
        m_max = int(np.ceil((cutoff + np.linalg.norm(alpha)) / sigma_min)) + 1
        m = np.arange(-m_max, m_max + 1)
        m1, m2 = np.meshgrid(m, m, indexing="ij")
        k = (alpha[None, :]
             + m1.reshape(-1, 1) * self.duals[0][None, :]
             + m2.reshape(-1, 1) * self.duals[1][None, :])
        keep = np.einsum("ij,ij->i", k, k) <= cutoff * cutoff
        return k[keep]


def square_lattice(a: float = 1.0) -> LatticeSpec:
    """Square lattice of side ``a`` with symmetry points Gamma, X, M."""
    spec = LatticeSpec(np.array([[a, 0.0], [0.0, a]]))
    pts = {
        "Gamma": np.array([0.0, 0.0]),
        "X": np.array([np.pi / a, 0.0]),
        "M": np.array([np.pi / a, np.pi / a]),
    }
    spec.symmetry_points.update(pts)
    return spec


def honeycomb_lattice() -> LatticeSpec:
    """Hexagonal lattice with l1 = (3, sqrt(3)), l2 = (3, -sqrt(3)).

    Symmetry points: Gamma, M = a1/2, K = 2*a1/3 + a2/3.
    """
    spec = LatticeSpec(np.array([[3.0, np.sqrt(3.0)], [3.0, -np.sqrt(3.0)]]))
    a1, a2 = spec.duals
    pts = {
        "Gamma": np.array([0.0, 0.0]),
        "M": a1 / 2.0,
        "K": 2.0 * a1 / 3.0 + a2 / 3.0,
    }
    spec.symmetry_points.update(pts)
    return spec


@dataclass(frozen=True)
class PathSamples:
    """Equally spaced samples along a polyline through the Brillouin zone.

    ``params`` is cumulative arc length in quasimomentum space; ``alphas``
    holds one quasimomentum per sample.  Waypoints (possibly displaced off
    the dual lattice) are recorded by sample index and display label.
    """

    params: np.ndarray
    alphas: np.ndarray
    waypoint_indices: tuple
    waypoint_labels: tuple

    def __len__(self) -> int:
        return len(self.params)

    def waypoint_sample(self, label: str) -> int:
        for idx, name in zip(self.waypoint_indices, self.waypoint_labels):
            if name == label:
                return idx
        raise KeyError(f"no waypoint labelled {label!r}")


def brillouin_path(
    spec: LatticeSpec,
    waypoints,
    samples_per_segment: int,
    gamma_offset: float | None = None,
) -> PathSamples:
    """Sample a polyline between named or explicit symmetry points.

    ``waypoints`` is a sequence of names from ``spec.symmetry_points`` or
    explicit quasimomentum pairs.  Each segment carries
    ``samples_per_segment`` equally spaced samples including both endpoints;
    junctions are not duplicated.  Any waypoint lying on the dual lattice
    (notably Gamma) is displaced by ``gamma_offset`` toward the next
    waypoint (toward the previous one at the path end) and labelled
    "<name>(offset)"; the default offset is 1e-3 * ||a1||.
    """
    if len(waypoints) < 2:
        raise EmptyPath(f"need at least two waypoints, got {len(waypoints)}")
    if samples_per_segment < 2:
        raise ValueError("samples_per_segment must be >= 2")
    eta = float(gamma_offset) if gamma_offset is not None else 1e-3 * np.linalg.norm(spec.duals[0])
    if eta <= 0.0:
        raise ValueError("gamma_offset must be positive")

    labels, points = [], []
    for wp in waypoints:
        if isinstance(wp, str):
            labels.append(wp)
            points.append(np.asarray(spec.symmetry_points[wp], dtype=float))
        else:
            pt = np.asarray(wp, dtype=float)
            labels.append(f"({pt[0]:.3g},{pt[1]:.3g})")
            points.append(pt)

    displaced = [p.copy() for p in points]
    for i, p in enumerate(points):
        if spec.dual_distance(p) < eta:
            other = points[i + 1] if i + 1 < len(points) else points[i - 1]
            direction = other - p
            norm = np.linalg.norm(direction)
            if norm == 0.0:
                raise ValueError(f"cannot displace waypoint {labels[i]}: repeated waypoint")
            displaced[i] = p + eta * direction / norm
            labels[i] = f"{labels[i]}(offset)"

    alphas = [displaced[0]]
    waypoint_indices = [0]
    for a, b in zip(displaced[:-1], displaced[1:]):
        ts = np.linspace(0.0, 1.0, samples_per_segment)[1:]
        for t in ts:
            alphas.append((1.0 - t) * a + t * b)
        waypoint_indices.append(len(alphas) - 1)

    alphas = np.array(alphas)
    steps = np.linalg.norm(np.diff(alphas, axis=0), axis=1)
    params = np.concatenate(([0.0], np.cumsum(steps)))
    return PathSamples(
        params=params,
        alphas=alphas,
        waypoint_indices=tuple(waypoint_indices),
        waypoint_labels=tuple(labels),
    )


@dataclass(frozen=True)
class TimeBrillouinZone:
    """Modulation frequency Omega and the period T = 2*pi/Omega."""

    omega: float
    period: float = field(init=False)

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ValueError("modulation frequency must be positive")
        object.__setattr__(self, "period", 2.0 * np.pi / self.omega)


def fold_quasifrequency(omega, modulation_frequency: float):
    """Reduce Re(omega) into [-Omega/2, Omega/2); Im(omega) is untouched.

    Works elementwise on arrays.  Values at exactly +Omega/2 map to
    -Omega/2 (half-open convention).
    """
    if modulation_frequency <= 0.0:
        raise ValueError("modulation frequency must be positive")
    om = np.asarray(omega)
    re = om.real
    n = np.floor(re / modulation_frequency + 0.5)
    folded = re - n * modulation_frequency
    if np.iscomplexobj(om):
        out = folded + 1j * om.imag
    else:
        out = folded
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(out) if np.iscomplexobj(om) else float(out)
    return out
