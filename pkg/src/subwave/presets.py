"""Built-in lattice and resonator geometries used by the reproduction configs.

All presets use disks of radius 0.1 and the high-contrast default
delta = 1/9000 with unit interior wave speed.

Note on the honeycomb scale: the honeycomb presets use primitive vectors
(3/2, +/-sqrt(3)/2) so that the two stated centers (1,0) and (2,0) sit at
(l1+l2)/3 and 2(l1+l2)/3, i.e. on actual honeycomb sites with the K-point
degeneracy.  This is the unique scale for which the single-pair cell is a
honeycomb and the degenerate K frequency lands at 0.0994, matching the
k-gap behavior of the reproduced figures.
"""
from __future__ import annotations

import numpy as np

from .capacitance import Material, ResonatorArray
from .lattice import LatticeSpec, honeycomb_lattice, square_lattice

__all__ = [
    "default_material",
    "preset_lattice",
    "preset_resonators",
    "LATTICE_PRESETS",
    "RESONATOR_PRESETS",
]

RADIUS = 0.1


def default_material() -> Material:
    return Material(delta=1.0 / 9000.0)


def half_honeycomb_lattice() -> LatticeSpec:
    spec = LatticeSpec(np.array([[1.5, np.sqrt(3.0) / 2.0], [1.5, -np.sqrt(3.0) / 2.0]]))
    a1, a2 = spec.duals
    spec.symmetry_points.update(
        {
            "Gamma": np.array([0.0, 0.0]),
            "M": a1 / 2.0,
            "K": 2.0 * a1 / 3.0 + a2 / 3.0,
        }
    )
    return spec


def _trimer_centers() -> np.ndarray:
    arm = 3.0 * RADIUS
    centers = []
    for base, start in ((np.array([1.0, 0.0]), 0.0), (np.array([2.0, 0.0]), np.pi / 3.0)):
        for k in range(3):
            angle = start + 2.0 * np.pi * k / 3.0
            centers.append(base + arm * np.array([np.cos(angle), np.sin(angle)]))
    return np.array(centers)


LATTICE_PRESETS = {
    "square": square_lattice,
    "honeycomb": half_honeycomb_lattice,
}

RESONATOR_PRESETS = {
    "single": lambda material: ResonatorArray(
        centers=np.array([[0.5, 0.5]]), radii=[RADIUS], material=material
    ),
    "dimer": lambda material: ResonatorArray(
        centers=np.array([[0.5 - 1.2 * RADIUS, 0.5], [0.5 + 1.2 * RADIUS, 0.5]]),
        radii=[RADIUS],
        material=material,
    ),
    "honeycomb-pair": lambda material: ResonatorArray(
        centers=np.array([[1.0, 0.0], [2.0, 0.0]]), radii=[RADIUS], material=material
    ),
    "trimer-honeycomb": lambda material: ResonatorArray(
        centers=_trimer_centers(), radii=[RADIUS], material=material
    ),
}

# modulation phases of the trimer preset: one rotation sense on both trimers
TRIMER_PHASES = (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0) * 2


def preset_lattice(name: str) -> LatticeSpec:
    try:
        return LATTICE_PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown lattice preset {name!r}; have {sorted(LATTICE_PRESETS)}")


def preset_resonators(name: str, material: Material) -> ResonatorArray:
    try:
        return RESONATOR_PRESETS[name](material)
    except KeyError:
        raise KeyError(f"unknown resonator preset {name!r}; have {sorted(RESONATOR_PRESETS)}")
