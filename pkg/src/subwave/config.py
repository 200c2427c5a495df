"""Strict-schema configuration documents for the command-line pipeline.

Configs are YAML with a fixed vocabulary per block; unknown keys are
rejected with the offending field path, and all numeric ranges are
validated at parse time.  Presets expand to explicit geometry during
parsing, so an emitted config always round-trips to an equal RunConfig.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .bands import UNIFORM_LAWS, SweepSettings
from .capacitance import Material, MultipoleSettings, ResonatorArray
from .errors import RangeError, SchemaError
from .lattice import LatticeSpec, PathSamples, brillouin_path
from .modulation import FourierLaw, ModulationProfile
from .presets import (
    LATTICE_PRESETS,
    RESONATOR_PRESETS,
    TRIMER_PHASES,
    default_material,
    preset_lattice,
    preset_resonators,
)

__all__ = ["RunConfig", "parse_config", "emit_config"]

_TOP_KEYS = {
    "lattice", "resonators", "material", "modulation", "sweep",
    "numerics", "output", "mathieu", "finite",
}


def _require_map(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise SchemaError(path, f"expected a mapping, got {type(node).__name__}")
    return node

def _check_keys(node: dict, allowed, path: str) -> None:
    unknown = set(node) - set(allowed)
    if unknown:
        raise SchemaError(f"{path}.{sorted(unknown)[0]}", "unknown key")

def _number(node: dict, key: str, path: str, lo=None, hi=None, default=None,
            lo_open=False, hi_open=False):
    if key not in node:
        if default is not None or key in node:
            return default
        raise SchemaError(f"{path}.{key}", "missing required value")
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise RangeError(f"{path}.{key}", f"value {value} below admissible range")
    if hi is not None and (value >= hi if hi_open else value > hi):
        raise RangeError(f"{path}.{key}", f"value {value} above admissible range")
    return value

def _integer(node: dict, key: str, path: str, lo=None, hi=None, default=None):
    value = node.get(key, default)
    if value is None:
        raise SchemaError(f"{path}.{key}", "missing required value")
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}.{key}", f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise RangeError(f"{path}.{key}", f"value {value} below admissible range")
    if hi is not None and value > hi:
        raise RangeError(f"{path}.{key}", f"value {value} above admissible range")
    return value

def _choice(node: dict, key: str, path: str, options, default=None):
    value = node.get(key, default)
    if value is None:
        raise SchemaError(f"{path}.{key}", "missing required value")
    if value not in options:
        raise RangeError(f"{path}.{key}", f"{value!r} not one of {sorted(options)}")
    return value


def _point_list(node, path: str, dims: int = 2) -> list:
    if not isinstance(node, list) or not node:
        raise SchemaError(path, "expected a non-empty list of points")
    out = []
    for i, p in enumerate(node):
        if not isinstance(p, list) or len(p) != dims or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in p
        ):
            raise SchemaError(f"{path}[{i}]", f"expected a {dims}-component numeric point")
        out.append([float(x) for x in p])
    return out


def _parse_lattice(node, path: str) -> dict:
    node = _require_map(node, path)
    _check_keys(node, {"preset", "primitive_vectors"}, path)
    if "preset" in node:
        name = _choice(node, "preset", path, set(LATTICE_PRESETS))
        spec = preset_lattice(name)
        return {
            "preset": name,
            "primitive_vectors": [[float(x) for x in row] for row in spec.primitives],
        }
    if "primitive_vectors" not in node:
        raise SchemaError(f"{path}.primitive_vectors", "missing required value")
    vectors = _point_list(node["primitive_vectors"], f"{path}.primitive_vectors")
    if len(vectors) != 2:
        raise SchemaError(f"{path}.primitive_vectors", "need exactly two primitive vectors")
    return {"primitive_vectors": vectors}


def _parse_resonators(node, path: str, material: Material) -> dict:
    node = _require_map(node, path)
    _check_keys(node, {"preset", "centers", "radius", "radii"}, path)
    if "preset" in node:
        name = _choice(node, "preset", path, set(RESONATOR_PRESETS))
        array = preset_resonators(name, material)
        return {
            "preset": name,
            "centers": [[float(x) for x in c] for c in array.centers],
            "radii": [float(r) for r in array.radii],
        }
    if "centers" not in node:
        raise SchemaError(f"{path}.centers", "missing required value")
    centers = _point_list(node["centers"], f"{path}.centers")
    if "radius" in node:
        radius = _number(node, "radius", path, lo=0.0, lo_open=True)
        radii = [radius] * len(centers)
    elif "radii" in node:
        radii = [
            _number({"r": r}, "r", f"{path}.radii[{i}]", lo=0.0, lo_open=True)
            for i, r in enumerate(node["radii"])
        ]
        if len(radii) != len(centers):
            raise SchemaError(f"{path}.radii", "need one radius per center")
    else:
        raise SchemaError(f"{path}.radius", "missing required value")
    return {"centers": centers, "radii": radii}


def _parse_material(node, path: str) -> dict:
    if node is None:
        mat = default_material()
        return {"delta": mat.delta, "kappa_r": mat.kappa_r, "rho_r": mat.rho_r}
    node = _require_map(node, path)
    _check_keys(node, {"delta", "kappa_r", "rho_r", "v_r"}, path)
    delta = _number(node, "delta", path, lo=0.0, lo_open=True, default=1.0 / 9000.0)
    kappa_r = _number(node, "kappa_r", path, lo=0.0, lo_open=True, default=1.0)
    rho_r = _number(node, "rho_r", path, lo=0.0, lo_open=True, default=1.0)
    if "v_r" in node:
        v_r = _number(node, "v_r", path, lo=0.0, lo_open=True)
        if abs(v_r - np.sqrt(kappa_r / rho_r)) > 1e-9 * v_r:
            raise RangeError(f"{path}.v_r", "inconsistent with sqrt(kappa_r / rho_r)")
    return {"delta": delta, "kappa_r": kappa_r, "rho_r": rho_r}


def _parse_coefficients(node, path: str) -> list:
    if not isinstance(node, list) or not node:
        raise SchemaError(path, "expected per-resonator coefficient lists")
    out = []
    for i, coeffs in enumerate(node):
        pairs = _point_list(coeffs, f"{path}[{i}]", dims=2)
        if len(pairs) % 2 != 1:
            raise SchemaError(f"{path}[{i}]", "coefficients must cover modes -M..M")
        out.append(pairs)
    return out


def _parse_modulation(node, path: str) -> dict:
    node = _require_map(node, path)
    allowed = {
        "regime", "law", "omega", "eps", "phases", "modulate",
        "rho1", "rho2", "t0", "fold_static",
        "rho_inv_fourier", "kappa_inv_fourier",
    }
    _check_keys(node, allowed, path)
    regime = _choice(node, "regime", path, {"static", "uniform", "resonator"})
    out = {"regime": regime}
    if regime == "static":
        if "fold_static" in node and not isinstance(node["fold_static"], bool):
            raise SchemaError(f"{path}.fold_static", "expected a boolean")
        out["fold_static"] = bool(node.get("fold_static", False))
        if out["fold_static"] or "omega" in node:
            out["omega"] = _number(node, "omega", path, lo=0.0, lo_open=True)
        return out
    out["omega"] = _number(node, "omega", path, lo=0.0, lo_open=True)
    if regime == "uniform":
        out["law"] = _choice(node, "law", path, set(UNIFORM_LAWS))
        out["eps"] = _number(node, "eps", path, lo=0.0, hi=1.0, hi_open=True, default=0.0)
        if out["law"] == "meissner":
            out["rho1"] = _number(node, "rho1", path, lo=0.0, lo_open=True, default=1.0 + out["eps"])
            out["rho2"] = _number(node, "rho2", path, lo=0.0, lo_open=True, default=max(1.0 - out["eps"], 1e-6))
            out["t0"] = _number(node, "t0", path, default=0.0)
        return out
    if "rho_inv_fourier" in node or "kappa_inv_fourier" in node:
        for key in ("rho_inv_fourier", "kappa_inv_fourier"):
            if key not in node:
                raise SchemaError(f"{path}.{key}", "both explicit coefficient blocks are required")
            out[key] = _parse_coefficients(node[key], f"{path}.{key}")
        if len(out["rho_inv_fourier"]) != len(out["kappa_inv_fourier"]):
            raise SchemaError(f"{path}.kappa_inv_fourier", "resonator counts disagree")
        return out
    out["modulate"] = _choice(node, "modulate", path, {"rho", "kappa", "impedance"}, default="rho")
    out["eps"] = _number(node, "eps", path, lo=0.0, hi=1.0, hi_open=True, default=0.0)
    phases = node.get("phases")
    if phases == "trimer":
        out["phases"] = [float(p) for p in TRIMER_PHASES]
    elif phases is None:
        raise SchemaError(f"{path}.phases", "missing required value")
    else:
        if not isinstance(phases, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in phases
        ):
            raise SchemaError(f"{path}.phases", "expected a list of numbers or 'trimer'")
        out["phases"] = [float(p) for p in phases]
    return out


def _parse_sweep(node, path: str) -> dict:
    node = _require_map(node, path)
    _check_keys(node, {"path", "samples_per_segment", "gamma_offset"}, path)
    waypoints = node.get("path")
    if not isinstance(waypoints, list) or len(waypoints) < 2:
        raise SchemaError(f"{path}.path", "expected a list of at least two waypoints")
    parsed = []
    for i, wp in enumerate(waypoints):
        if isinstance(wp, str):
            parsed.append(wp)
        elif isinstance(wp, list) and len(wp) == 2:
            parsed.append([float(wp[0]), float(wp[1])])
        else:
            raise SchemaError(f"{path}.path[{i}]", "expected a symmetry-point name or 2D point")
    out = {
        "path": parsed,
        "samples_per_segment": _integer(node, "samples_per_segment", path, lo=2, default=21),
    }
    if "gamma_offset" in node:
        out["gamma_offset"] = _number(node, "gamma_offset", path, lo=0.0, lo_open=True)
    return out


def _parse_numerics(node, path: str) -> dict:
    defaults = {
        "multipole_order": 4,
        "lattice_sum_radius": 40,
        "refine_factor": 2.0,
        "ode_tolerance": 1e-10,
        "diagnostics_gate": 1e-5,
        "im_tol": 1e-6,
        "cond_threshold": 1e3,
        "slope_tol": 1e-3,
        "threads": 1,
    }
    if node is None:
        return dict(defaults)
    node = _require_map(node, path)
    _check_keys(node, set(defaults) | {"gap_tol"}, path)
    out = dict(defaults)
    out["multipole_order"] = _integer(node, "multipole_order", path, lo=2,
                                      default=defaults["multipole_order"])
    out["lattice_sum_radius"] = _integer(node, "lattice_sum_radius", path, lo=4,
                                         default=defaults["lattice_sum_radius"])
    out["refine_factor"] = _number(node, "refine_factor", path, lo=1.0, lo_open=True,
                                   default=defaults["refine_factor"])
    out["ode_tolerance"] = _number(node, "ode_tolerance", path, lo=1e-13, hi=1e-6,
                                   default=defaults["ode_tolerance"])
    if "diagnostics_gate" in node and node["diagnostics_gate"] is None:
        out["diagnostics_gate"] = None
    else:
        out["diagnostics_gate"] = _number(node, "diagnostics_gate", path, lo=0.0, lo_open=True,
                                          default=defaults["diagnostics_gate"])
    out["im_tol"] = _number(node, "im_tol", path, lo=0.0, lo_open=True, default=defaults["im_tol"])
    out["cond_threshold"] = _number(node, "cond_threshold", path, lo=1.0,
                                    default=defaults["cond_threshold"])
    out["slope_tol"] = _number(node, "slope_tol", path, lo=0.0, default=defaults["slope_tol"])
    if "gap_tol" in node:
        out["gap_tol"] = _number(node, "gap_tol", path, lo=0.0, lo_open=True)
    out["threads"] = _integer(node, "threads", path, lo=1, default=defaults["threads"])
    return out


def _parse_output(node, path: str) -> dict:
    if node is None:
        return {"format": "csv"}
    node = _require_map(node, path)
    _check_keys(node, {"format", "destination"}, path)
    out = {"format": _choice(node, "format", path, {"csv", "json"}, default="csv")}
    if "destination" in node:
        if not isinstance(node["destination"], str):
            raise SchemaError(f"{path}.destination", "expected a string path")
        out["destination"] = node["destination"]
    return out


def _parse_mathieu(node, path: str) -> dict:
    node = _require_map(node, path)
    _check_keys(node, {"a_min", "a_max", "a_count", "q_min", "q_max", "q_count", "method"}, path)
    out = {
        "a_min": _number(node, "a_min", path, default=0.1),
        "a_max": _number(node, "a_max", path, default=25.0),
        "a_count": _integer(node, "a_count", path, lo=1, default=21),
        "q_min": _number(node, "q_min", path, default=-10.0),
        "q_max": _number(node, "q_max", path, default=10.0),
        "q_count": _integer(node, "q_count", path, lo=1, default=21),
        "method": _choice(node, "method", path, {"hill_determinant", "monodromy"},
                          default="hill_determinant"),
    }
    if out["a_max"] < out["a_min"] or out["q_max"] < out["q_min"]:
        raise RangeError(f"{path}.a_max", "grid bounds out of order")
    return out


def _parse_finite(node, path: str) -> dict:
    node = _require_map(node, path)
    _check_keys(node, {"capacitance", "sphere_radius", "volumes"}, path)
    out = {}
    if "sphere_radius" in node:
        radius = _number(node, "sphere_radius", path, lo=0.0, lo_open=True)
        out["sphere_radius"] = radius
        out["capacitance"] = [[4.0 * np.pi * radius]]
        out["volumes"] = [4.0 * np.pi * radius**3 / 3.0]
    elif "capacitance" in node:
        out["capacitance"] = _point_list(
            node["capacitance"], f"{path}.capacitance", dims=len(node["capacitance"])
        )
    else:
        raise SchemaError(f"{path}.capacitance", "missing required value")
    if "volumes" in node:
        out["volumes"] = [
            _number({"v": v}, "v", f"{path}.volumes[{i}]", lo=0.0, lo_open=True)
            for i, v in enumerate(node["volumes"])
        ]
    if "volumes" not in out:
        raise SchemaError(f"{path}.volumes", "missing required value")
    if len(out["volumes"]) != len(out["capacitance"]):
        raise SchemaError(f"{path}.volumes", "need one volume per resonator")
    return out


@dataclass
class RunConfig:
    """Validated configuration with presets expanded to explicit geometry."""

    data: dict

    def material(self) -> Material:
        m = self.data["material"]
        return Material(delta=m["delta"], kappa_r=m["kappa_r"], rho_r=m["rho_r"])

    def lattice(self) -> LatticeSpec:
        block = self.data["lattice"]
        if "preset" in block:
            return preset_lattice(block["preset"])
        return LatticeSpec(np.array(block["primitive_vectors"]))

    def resonators(self) -> ResonatorArray:
        block = self.data["resonators"]
        return ResonatorArray(
            centers=np.array(block["centers"]),
            radii=np.array(block["radii"]),
            material=self.material(),
        )

    def sweep_settings(self) -> SweepSettings:
        n = self.data["numerics"]
        return SweepSettings(
            multipole=MultipoleSettings(
                multipole_order=n["multipole_order"],
                lattice_sum_radius=n["lattice_sum_radius"],
                refine_factor=n["refine_factor"],
            ),
            ode_tolerance=n["ode_tolerance"],
            diagnostics_gate=n["diagnostics_gate"],
            threads=n["threads"],
        )

    def path(self, spec: LatticeSpec) -> PathSamples:
        s = self.data["sweep"]
        return brillouin_path(
            spec,
            s["path"],
            s["samples_per_segment"],
            s.get("gamma_offset"),
        )

    def profile(self) -> ModulationProfile:
        mod = self.data["modulation"]
        if mod["regime"] != "resonator":
            raise ValueError("profile() is only defined for the resonator regime")
        omega = mod["omega"]
        if "rho_inv_fourier" in mod:
            rho = tuple(
                FourierLaw(omega, np.array([complex(re, im) for re, im in law]))
                for law in mod["rho_inv_fourier"]
            )
            kappa = tuple(
                FourierLaw(omega, np.array([complex(re, im) for re, im in law]))
                for law in mod["kappa_inv_fourier"]
            )
            return ModulationProfile(omega, rho, kappa)
        eps, phases = mod["eps"], mod["phases"]
        builders = {
            "rho": ModulationProfile.cosine_rho,
            "kappa": ModulationProfile.cosine_kappa,
            "impedance": ModulationProfile.constant_impedance,
        }
        return builders[mod["modulate"]](omega, eps, phases)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML configuration document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError("<document>", f"not valid YAML: {exc}")
    raw = _require_map(raw if raw is not None else {}, "<document>")
    _check_keys(raw, _TOP_KEYS, "<document>")
    data = {}
    material = _parse_material(raw.get("material"), "material")
    data["material"] = material
    if "lattice" in raw:
        data["lattice"] = _parse_lattice(raw["lattice"], "lattice")
    if "resonators" in raw:
        data["resonators"] = _parse_resonators(
            raw["resonators"], "resonators",
            Material(delta=material["delta"], kappa_r=material["kappa_r"], rho_r=material["rho_r"]),
        )
    if "modulation" in raw:
        data["modulation"] = _parse_modulation(raw["modulation"], "modulation")
    if "sweep" in raw:
        data["sweep"] = _parse_sweep(raw["sweep"], "sweep")
    data["numerics"] = _parse_numerics(raw.get("numerics"), "numerics")
    data["output"] = _parse_output(raw.get("output"), "output")
    if "mathieu" in raw:
        data["mathieu"] = _parse_mathieu(raw["mathieu"], "mathieu")
    if "finite" in raw:
        data["finite"] = _parse_finite(raw["finite"], "finite")
    return RunConfig(data=data)


def emit_config(config: RunConfig) -> str:
    """Serialize a RunConfig canonically; parse(emit(c)) == c."""
    return yaml.safe_dump(config.data, sort_keys=True, default_flow_style=None)
