"""Floquet exponents of scalar and coupled Hill equations.

Two routes are implemented: time-domain monodromy (integrate the
companion system over one period, eigendecompose the fundamental matrix)
and, for Mathieu's equation, the truncated infinite determinant.  Both
report exponents through one shared branch convention so they can be
cross-checked to tight tolerances.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .capacitance import CapacitanceMatrix, ResonatorArray
from .errors import (
    DeterminantNotConverged,
    IntegrationFailure,
    NonpositiveKappa,
)
from .lattice import fold_quasifrequency
from .modulation import ModulationProfile

__all__ = [
    "MathieuParams",
    "HillSystem",
    "Monodromy",
    "FloquetSpectrum",
    "hill_monodromy",
    "floquet_exponents",
    "mathieu_char_exponent",
    "mathieu_map_rho",
    "mathieu_map_rho_kappa",
    "meissner_exponents",
    "uniform_hill_coefficient",
    "resonator_hill_matrix",
    "EP_SENTINEL",
]

EP_SENTINEL = float("inf")
_DEFAULT_ODE_TOL = 1e-10


@dataclass(frozen=True)
class MathieuParams:
    """Parameters of phi'' + (a - 2 q cos 2 tau) phi = 0."""

    a: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.q)):
            raise ValueError("Mathieu parameters must be finite")


@dataclass(frozen=True)
class HillSystem:
    """Psi'' + M(t) Psi = 0 with T-periodic N x N coefficient M."""

    dim: int
    period: float
    coefficient: object  # t -> (dim, dim) complex array

    def matrix(self, t: float) -> np.ndarray:
        M = np.asarray(self.coefficient(t), dtype=complex)
        if M.shape != (self.dim, self.dim):
            raise ValueError(f"coefficient returned shape {M.shape}, expected {(self.dim, self.dim)}")
        return M


@dataclass(frozen=True)
class Monodromy:
    """Fundamental solution over one period, blocks [values; derivatives]."""

    W: np.ndarray
    period: float
    ode_tolerance: float

    @property
    def dim(self) -> int:
        return self.W.shape[0] // 2


@dataclass(frozen=True)
class FloquetSpectrum:
    """Folded exponents, their multipliers, and the eigenvector condition number."""

    exponents: np.ndarray
    multipliers: np.ndarray
    ep_condition: float


def hill_monodromy(system: HillSystem, ode_tolerance: float = _DEFAULT_ODE_TOL) -> Monodromy:
    """Integrate the 2N companion initial-value problems over [0, T].

    Columns of the returned matrix are the solutions with canonical unit
    initial data (positions then velocities), i.e. the fundamental matrix
    of y' = [[0, I], [-M(t), 0]] y at t = T.
    """
    if not 1e-13 <= ode_tolerance <= 1e-6:
        raise ValueError("ode_tolerance must lie in [1e-13, 1e-6]")
    n = system.dim
    identity = np.eye(n, dtype=complex)

    def rhs(t, y):
        Y = y.reshape(2 * n, 2 * n)
        M = system.matrix(t)
        out = np.empty_like(Y)
        out[:n] = Y[n:]
        out[n:] = -M @ Y[:n]
        return out.reshape(-1)

    y0 = np.block([[identity, np.zeros_like(identity)], [np.zeros_like(identity), identity]])
    sol = solve_ivp(
        rhs,
        (0.0, system.period),
        y0.reshape(-1).astype(complex),
        method="DOP853",
        rtol=ode_tolerance,
        atol=ode_tolerance,
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationFailure(f"monodromy integration failed: {sol.message}")
    W = sol.y[:, -1].reshape(2 * n, 2 * n)
    return Monodromy(W=W, period=system.period, ode_tolerance=ode_tolerance)


def floquet_exponents(monodromy: Monodromy, modulation_frequency: float) -> FloquetSpectrum:
    """Exponents log(lambda)/(i T) of the multipliers, folded into the time zone.

    The exceptional-point diagnostic is the 2-norm condition number of the
    eigenvector matrix; a defective eigensolve yields the infinite sentinel
    rather than an error.
    """
    W = monodromy.W
    try:
        multipliers, vectors = np.linalg.eig(W)
        cond = float(np.linalg.cond(vectors, 2))
        # an eigenvector matrix conditioned at the inverse machine epsilon
        # is numerically deficient (Jordan block)
        if not np.isfinite(cond) or cond > 1e15:
            cond = EP_SENTINEL
    except np.linalg.LinAlgError:
        multipliers = np.linalg.eigvals(W)
        cond = EP_SENTINEL
    raw = np.log(multipliers) / (1j * monodromy.period)
    folded = fold_quasifrequency(raw, modulation_frequency)
    order = np.lexsort((folded.imag, folded.real))
    return FloquetSpectrum(
        exponents=folded[order], multipliers=multipliers[order], ep_condition=cond
    )


def mathieu_map_rho(omega_static: float, modulation_frequency: float, eps: float) -> MathieuParams:
    """Mathieu parameters for density-only cosine modulation.

    a = (2 w_s / Omega)^2, q = -2 eps (w_s / Omega)^2; the quasifrequency
    is recovered as Omega * nu / 2.
    """
    _check_mapping_args(modulation_frequency, eps)
    ratio = omega_static / modulation_frequency
    return MathieuParams(a=4.0 * ratio * ratio, q=-2.0 * eps * ratio * ratio)


def mathieu_map_rho_kappa(
    omega_static: float, modulation_frequency: float, eps: float
) -> MathieuParams:
    """Leading-order Mathieu parameters for joint density/modulus cosine
    modulation: a = (2 w_s / Omega)^2, q = -eps."""
    _check_mapping_args(modulation_frequency, eps)
    ratio = omega_static / modulation_frequency
    return MathieuParams(a=4.0 * ratio * ratio, q=-eps)


def _check_mapping_args(modulation_frequency: float, eps: float) -> None:
    if modulation_frequency <= 0.0:
        raise ValueError("modulation frequency must be positive")
    if not 0.0 <= eps < 1.0:
        raise ValueError("modulation amplitude must satisfy 0 <= eps < 1")


def _strip_representative(nu: complex) -> complex:
    """Reduce an exponent (defined mod 2 and up to sign) to Re in [0, 1], Im >= 0."""
    x = nu.real - 2.0 * np.floor(nu.real / 2.0)
    if x > 1.0:
        x = 2.0 - x
    elif x < 0.0:
        x = -x
    return complex(x, abs(nu.imag))


def _unfold_exponent(nu_strip: complex, a: float, imag_tol: float = 1e-9) -> complex:
    """Map a strip exponent to the branch that continues nu = sqrt(a) at q = 0.

    Real exponents pick the candidate 2k +/- nu closest to sqrt(max(a, 0));
    complex ones keep their parity (Re = 0 or 1 mod 2) and attach to the
    nearest integer of that parity.
    """
    s = float(np.sqrt(max(a, 0.0)))
    if abs(nu_strip.imag) <= imag_tol:
        x = nu_strip.real
        best = None
        for k in range(int(np.ceil(s / 2.0)) + 2):
            for cand in (2.0 * k + x, 2.0 * k + 2.0 - x):
                if best is None or abs(cand - s) < abs(best - s) - 1e-15:
                    best = cand
        return complex(max(best, 0.0), 0.0)
    parity = int(round(nu_strip.real)) % 2
    n = parity + 2.0 * round((s - parity) / 2.0)
    if n < parity:
        n = parity
    return complex(n, abs(nu_strip.imag))


def _mathieu_strip_from_determinant(a: float, q: float, order: int) -> complex:
    """Strip exponent from the truncated infinite (Hill) determinant.

    The tridiagonal determinant built from the recurrence coefficients
    q / ((2n + nu0)^2 - a) is evaluated at an anchor nu0 in {0, 1} chosen
    away from the poles; the exponent follows from
    sin^2(pi nu / 2) = sin^2(pi sqrt(a)/2) - (D(nu0) - 1) (sin^2(pi nu0/2) - sin^2(pi sqrt(a)/2)).
    """
    n = np.arange(-order, order + 1)
    dist_even = np.min(np.abs(a - (2.0 * n) ** 2))
    dist_odd = np.min(np.abs(a - (1.0 + 2.0 * n) ** 2))
    anchor = 0.0 if dist_even >= dist_odd else 1.0

    denom = a - (anchor + 2.0 * n) ** 2
    off = -q / denom
    det_prev, det = 1.0, 1.0
    for idx in range(1, len(n)):
        det, det_prev = det - off[idx] * off[idx - 1] * det_prev, det
    determinant = det

    sa = cmath.sqrt(complex(a))
    sin_a2 = cmath.sin(cmath.pi * sa / 2.0) ** 2
    anchor_sin2 = cmath.sin(cmath.pi * anchor / 2.0) ** 2
    w = sin_a2 - (determinant - 1.0) * (anchor_sin2 - sin_a2)
    nu = (2.0 / cmath.pi) * cmath.asin(cmath.sqrt(w))
    return _strip_representative(nu)


def _mathieu_monodromy_strip(a: float, q: float, ode_tolerance: float) -> complex:
    system = HillSystem(
        dim=1,
        period=np.pi,
        coefficient=lambda t: np.array([[a - 2.0 * q * np.cos(2.0 * t)]], dtype=complex),
    )
    W = hill_monodromy(system, ode_tolerance).W
    multipliers = np.linalg.eigvals(W)
    nus = np.log(multipliers) / (1j * np.pi)
    reps = [_strip_representative(complex(v)) for v in nus]
    # the two multipliers are reciprocal; their strip representatives agree
    return min(reps, key=lambda z: (abs(z.imag), z.real))


def mathieu_char_exponent(
    params: MathieuParams,
    method: str = "hill_determinant",
    ode_tolerance: float = 1e-12,
) -> complex:
    """Characteristic exponent nu of Mathieu's equation.

    Branch convention: nu continues sqrt(a) from q = 0 (so the q = 0 value
    is exactly sqrt(a)), with Re nu >= 0 and Im nu >= 0 on the complex
    branches.  ``method`` selects the truncated Hill determinant or the
    time-domain monodromy; the two agree to at least 1e-8 away from tongue
    boundaries.
    """
    a, q = params.a, params.q
    if method == "monodromy":
        strip = _mathieu_monodromy_strip(a, q, ode_tolerance)
        return _unfold_exponent(strip, a)
    if method != "hill_determinant":
        raise ValueError(f"unknown method {method!r}")
    if q == 0.0:
        return complex(np.sqrt(max(a, 0.0)), 0.0) if a >= 0.0 else complex(0.0, np.sqrt(-a))
    order = 16
    prev = _unfold_exponent(_mathieu_strip_from_determinant(a, q, order), a)
    while order <= 4096:
        order *= 2
        cur = _unfold_exponent(_mathieu_strip_from_determinant(a, q, order), a)
        if abs(cur - prev) <= 1e-9 * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise DeterminantNotConverged(
        f"Hill determinant for a={a}, q={q} still moving by more than 1e-9 at order {order}"
    )


def _constant_transfer(freq: float, length: float) -> np.ndarray:
    """Transfer matrix of psi'' + freq^2 psi = 0 over a time interval."""
    if freq == 0.0:
        return np.array([[1.0, length], [0.0, 1.0]], dtype=complex)
    c, s = np.cos(freq * length), np.sin(freq * length)
    return np.array([[c, s / freq], [-freq * s, c]], dtype=complex)


def meissner_exponents(
    omega_static: float, rho1: float, rho2: float, t0: float, period: float
):
    """Exponent pair of the piecewise-constant (two-segment) Hill equation.

    The density switches from rho1 to rho2 at ``t0`` inside (-T/2, T/2);
    each segment has constant frequency omega_static / sqrt(rho_i) and an
    exact transfer matrix, so no ODE integration is involved.  Stable
    exactly when |trace| <= 2.
    """
    if rho1 <= 0.0 or rho2 <= 0.0:
        raise ValueError("segment densities must be positive")
    if not -period / 2.0 < t0 < period / 2.0:
        raise ValueError("switching time must lie inside (-T/2, T/2)")
    w1 = omega_static / np.sqrt(rho1)
    w2 = omega_static / np.sqrt(rho2)
    d1 = t0 + period / 2.0
    d2 = period / 2.0 - t0
    W = _constant_transfer(w2, d2) @ _constant_transfer(w1, d1)
    multipliers = np.linalg.eigvals(W)
    modulation_frequency = 2.0 * np.pi / period
    nus = np.log(multipliers.astype(complex)) / (1j * period)
    folded = fold_quasifrequency(nus, modulation_frequency)
    order = np.lexsort((folded.imag, folded.real))
    return folded[order]


def uniform_hill_coefficient(kappa_law, omega_inst):
    """Scalar Hill coefficient for space-uniform modulation.

    Returns t -> omega_inst(t)^2 + kappa''/(2 kappa) - (3/4)(kappa'/kappa)^2,
    the second group being the exact curvature correction
    (sqrt(k)/2) d/dt (k'/k^(3/2)) evaluated from the law's analytic
    derivatives.  ``kappa_law`` must expose value/d1/d2.
    """
    probe = np.linspace(0.0, kappa_law.period, 257)
    vals = kappa_law.value(probe)
    if np.min(vals) <= 0.0:
        raise NonpositiveKappa(f"kappa reaches {np.min(vals):.3e} on the period")

    def coefficient(t):
        k = kappa_law.value(t)
        k1 = kappa_law.d1(t)
        k2 = kappa_law.d2(t)
        correction = k2 / (2.0 * k) - 0.75 * (k1 / k) ** 2
        return omega_inst(t) ** 2 + correction

    return coefficient


def resonator_hill_matrix(
    C: CapacitanceMatrix, profile: ModulationProfile, array: ResonatorArray
) -> HillSystem:
    """Coupled Hill system for resonator-interior modulation.

    M(t) = (delta kappa_r / rho_r) W1(t) C W2(t) + W3(t) with diagonal
    weights W1 = sqrt(kappa_i) rho_i / |D_i|, W2 = sqrt(kappa_i) / rho_i and
    W3 the curvature correction of kappa_i.  All laws are read off the
    profile's stored Fourier series in closed form.
    """
    n = C.n_resonators
    if profile.n_resonators != n:
        raise ValueError(
            f"profile describes {profile.n_resonators} resonators, capacitance {n}"
        )
    mat = array.material
    volumes = array.volumes
    prefactor = mat.delta * mat.kappa_r / mat.rho_r
    entries = C.entries

    def coefficient(t):
        rho = np.array([profile.rho(t, i) for i in range(n)])
        kappa = np.array([profile.kappa(t, i) for i in range(n)])
        curvature = np.array([profile.kappa_curvature(t, i) for i in range(n)])
        sqrt_kappa = np.sqrt(kappa)
        w1 = sqrt_kappa * rho / volumes
        w2 = sqrt_kappa / rho
        return prefactor * (w1[:, None] * entries * w2[None, :]) + np.diag(curvature)

    return HillSystem(dim=n, period=profile.period, coefficient=coefficient)
