"""Band structures of time-modulated high-contrast subwavelength resonators.

Pipeline: quasiperiodic capacitance matrices from boundary integrals
(:mod:`subwave.capacitance`), Floquet exponents of the induced scalar and
coupled Hill equations (:mod:`subwave.hill`), quasimomentum sweeps and
degeneracy detectors (:mod:`subwave.bands`), and a configuration-driven
CLI (:mod:`subwave.cli`).
"""

from .lattice import (
    LatticeSpec,
    PathSamples,
    TimeBrillouinZone,
    brillouin_path,
    dual_lattice,
    fold_quasifrequency,
    honeycomb_lattice,
    square_lattice,
)
from .capacitance import (
    CapacitanceMatrix,
    Material,
    MultipoleSettings,
    ResonatorArray,
    capacitance_matrix,
    finite_sphere_capacitance,
    green_lattice_sum,
    nystrom_capacitance_matrix,
    single_layer_matrix,
    static_bands,
)
from .modulation import FourierLaw, ModulationProfile
from .hill import (
    EP_SENTINEL,
    FloquetSpectrum,
    HillSystem,
    MathieuParams,
    Monodromy,
    floquet_exponents,
    hill_monodromy,
    mathieu_char_exponent,
    mathieu_map_rho,
    mathieu_map_rho_kappa,
    meissner_exponents,
    resonator_hill_matrix,
    uniform_hill_coefficient,
)
from .bands import (
    BandStructure,
    DegeneracyReport,
    SweepSettings,
    detect_dirac,
    detect_exceptional_points,
    detect_kgap,
    sweep_finite,
    sweep_resonator_modulated,
    sweep_static,
    sweep_uniform,
)
from .config import RunConfig, emit_config, parse_config

__version__ = "0.1.0"
