"""Periodic material laws stored as truncated Fourier series.

A profile holds, for every resonator, the coefficients of 1/rho_i(t) and
1/kappa_i(t) on the basis exp(i*n*Omega*t), n = -M..M.  The laws
themselves and their time derivatives are evaluated in closed form from
the stored coefficients (quotient rule on the reciprocal series), so no
numerical differentiation enters the Hill systems built from a profile.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveParameter

__all__ = ["FourierLaw", "ModulationProfile"]

_POSITIVITY_GRID = 1024


def _cosine_coefficients(eps: float, phase: float) -> np.ndarray:
    """Coefficients of 1 + eps*cos(Omega*t + phase) on exp(i*n*Omega*t), n=-1..1."""
    return np.array(
        [0.5 * eps * np.exp(-1j * phase), 1.0, 0.5 * eps * np.exp(1j * phase)],
        dtype=complex,
    )


def _inverse_cosine_coefficients(eps: float, phase: float, tol: float = 1e-15) -> np.ndarray:
    """Truncated Fourier coefficients of 1 / (1 + eps*cos(Omega*t + phase)).

    Uses the geometric expansion with ratio r = (sqrt(1-eps^2) - 1)/eps,
    truncated once |r|^M drops below ``tol``.
    """
    if eps == 0.0:
        return np.array([1.0 + 0.0j])
    root = np.sqrt(1.0 - eps * eps)
    ratio = (root - 1.0) / eps
    order = max(1, int(np.ceil(np.log(tol) / np.log(abs(ratio)))))
    n = np.arange(-order, order + 1)
    coeff = (ratio ** np.abs(n)) / root * np.exp(1j * n * phase)
    return coeff.astype(complex)


@dataclass(frozen=True)
class FourierLaw:
    """A real, T-periodic scalar law s(t) = sum_n c_n exp(i*n*Omega*t).

    Coefficients must be conjugate-symmetric (c_{-n} = conj(c_n)) so the
    reconstructed law is real.  Derivatives are exact.
    """

    omega: float
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        if len(c) % 2 != 1:
            raise ValueError("coefficient list must cover n = -M..M")
        object.__setattr__(self, "coefficients", c)
        if self.omega <= 0.0:
            raise ValueError("modulation frequency must be positive")
        flipped = np.conj(c[::-1])
        if not np.allclose(c, flipped, rtol=0.0, atol=1e-12 * max(1.0, np.abs(c).max())):
            raise ValueError("coefficients are not conjugate-symmetric; law would be complex")

    @property
    def order(self) -> int:
        return (len(self.coefficients) - 1) // 2

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def _modes(self):
        n = np.arange(-self.order, self.order + 1)
        return n, self.coefficients

    def value(self, t):
        n, c = self._modes()
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * np.multiply.outer(t, n * self.omega))
        return np.real(phases @ c)

    def d1(self, t):
        n, c = self._modes()
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * np.multiply.outer(t, n * self.omega))
        return np.real(phases @ (1j * n * self.omega * c))

    def d2(self, t):
        n, c = self._modes()
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * np.multiply.outer(t, n * self.omega))
        return np.real(phases @ (-((n * self.omega) ** 2) * c))

    def mean(self) -> float:
        return float(np.real(self.coefficients[self.order]))

    @staticmethod
    def constant(omega: float, value: float = 1.0) -> "FourierLaw":
        return FourierLaw(omega, np.array([value + 0.0j]))

    @staticmethod
    def cosine(omega: float, eps: float, phase: float = 0.0) -> "FourierLaw":
        """1 + eps*cos(Omega*t + phase)."""
        if not 0.0 <= eps < 1.0:
            raise ValueError("cosine amplitude must satisfy 0 <= eps < 1")
        if eps == 0.0:
            return FourierLaw.constant(omega)
        return FourierLaw(omega, _cosine_coefficients(eps, phase))

    @staticmethod
    def inverse_cosine(omega: float, eps: float, phase: float = 0.0) -> "FourierLaw":
        """Truncated series of 1 / (1 + eps*cos(Omega*t + phase))."""
        if not 0.0 <= eps < 1.0:
            raise ValueError("cosine amplitude must satisfy 0 <= eps < 1")
        return FourierLaw(omega, _inverse_cosine_coefficients(eps, phase))


def _curvature_term(s: FourierLaw, t):
    """(sqrt(k)/2) d/dt (k'/k^(3/2)) for k = 1/s, written in terms of s.

    Equals -s''/(2 s) + (1/4) (s'/s)^2.
    """
    sv, s1, s2 = s.value(t), s.d1(t), s.d2(t)
    return -s2 / (2.0 * sv) + 0.25 * (s1 / sv) ** 2


@dataclass(frozen=True)
class ModulationProfile:
    """Per-resonator periodic laws for 1/rho_i and 1/kappa_i.

    ``rho_inv`` and ``kappa_inv`` each hold one FourierLaw per resonator,
    all sharing the frequency ``omega``.  Reconstructed rho_i and kappa_i
    must stay strictly positive on a 1024-point period grid.
    """

    omega: float
    rho_inv: tuple
    kappa_inv: tuple
    period: float = field(init=False)

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ValueError("modulation frequency must be positive")
        if len(self.rho_inv) != len(self.kappa_inv):
            raise ValueError("rho and kappa law counts differ")
        object.__setattr__(self, "rho_inv", tuple(self.rho_inv))
        object.__setattr__(self, "kappa_inv", tuple(self.kappa_inv))
        object.__setattr__(self, "period", 2.0 * np.pi / self.omega)
        for law in self.rho_inv + self.kappa_inv:
            if abs(law.omega - self.omega) > 1e-12 * self.omega:
                raise ValueError("all laws must share the profile frequency")
        grid = np.linspace(0.0, self.period, _POSITIVITY_GRID, endpoint=False)
        for kind, laws in (("rho", self.rho_inv), ("kappa", self.kappa_inv)):
            for i, law in enumerate(laws):
                vals = law.value(grid)
                if np.min(vals) <= 0.0:
                    raise NonpositiveParameter(
                        f"1/{kind}_{i + 1}(t) reaches {np.min(vals):.3e}; "
                        f"the reconstructed {kind} law is not strictly positive"
                    )

    @property
    def n_resonators(self) -> int:
        return len(self.rho_inv)

    def rho(self, t, i: int):
        return 1.0 / self.rho_inv[i].value(t)

    def kappa(self, t, i: int):
        return 1.0 / self.kappa_inv[i].value(t)

    def kappa_curvature(self, t, i: int):
        """Curvature coefficient (sqrt(k_i)/2) d/dt (k_i'/k_i^(3/2))."""
        return _curvature_term(self.kappa_inv[i], t)

    def is_static(self) -> bool:
        return all(law.order == 0 for law in self.rho_inv + self.kappa_inv)

    @staticmethod
    def static(omega: float, n_resonators: int) -> "ModulationProfile":
        ones = tuple(FourierLaw.constant(omega) for _ in range(n_resonators))
        return ModulationProfile(omega, ones, ones)

    @staticmethod
    def cosine_rho(omega: float, eps: float, phases) -> "ModulationProfile":
        """rho_i(t) = 1 / (1 + eps*cos(Omega*t + phase_i)), kappa_i = 1."""
        phases = np.atleast_1d(np.asarray(phases, dtype=float))
        rho = tuple(FourierLaw.cosine(omega, eps, p) for p in phases)
        kap = tuple(FourierLaw.constant(omega) for _ in phases)
        return ModulationProfile(omega, rho, kap)

    @staticmethod
    def cosine_kappa(omega: float, eps: float, phases) -> "ModulationProfile":
        """kappa_i(t) = 1 / (1 + eps*cos(Omega*t + phase_i)), rho_i = 1."""
        phases = np.atleast_1d(np.asarray(phases, dtype=float))
        rho = tuple(FourierLaw.constant(omega) for _ in phases)
        kap = tuple(FourierLaw.cosine(omega, eps, p) for p in phases)
        return ModulationProfile(omega, rho, kap)

    @staticmethod
    def constant_impedance(omega: float, eps: float, phases) -> "ModulationProfile":
        """kappa_i(t) = 1/rho_i(t) = 1 + eps*cos(Omega*t + phase_i).

        The series of 1/kappa_i is the truncated geometric expansion of
        1/(1 + eps*cos), accurate to machine precision.
        """
        phases = np.atleast_1d(np.asarray(phases, dtype=float))
        rho = tuple(FourierLaw.cosine(omega, eps, p) for p in phases)
        kap = tuple(FourierLaw.inverse_cosine(omega, eps, p) for p in phases)
        return ModulationProfile(omega, rho, kap)
