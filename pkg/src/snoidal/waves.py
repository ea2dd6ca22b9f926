"""Snoidal traveling-wave profiles h_c for the phi^4 equation.

A profile on a period-L domain moving at speed c solves
-omega h'' - h + h^3 = 0 with omega = 1 - c^2 and has the closed form
h(x) = a sn(b x; k), where the modulus k is pinned down by the
period-speed relation omega = L^2 / (16 K(k)^2 (1 + k^2)) and

    a = sqrt(2) k / sqrt(1 + k^2),    b = 4 K(k) / L.

For 0 < L < 2 pi the relation forces omega into (0, L^2 / (4 pi^2)), i.e.
|c| in (sqrt(1 - L^2/(4 pi^2)), 1); speeds outside that window admit no
L-periodic snoidal wave and are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import EllipticModulus, complete_E, complete_K, jacobi_sn_cn_dn

__all__ = [
    "OutOfRangeError",
    "ModulusBoundaryError",
    "GridField",
    "WaveParameters",
    "admissible_omega_window",
    "solve_modulus",
    "profile_eval",
    "sample_wave",
    "ode_residual",
]

_BRACKET_EPS = 1e-10
_BISECT_MAX_ITER = 200
_NEWTON_STEPS = 3
_DISPERSION_RTOL = 1e-12


class OutOfRangeError(ValueError):
    """No L-periodic snoidal wave exists for the requested (L, c)."""


class ModulusBoundaryError(RuntimeError):
    """Root bracketing for the modulus hit the (0, 1) boundary guard."""


@dataclass(frozen=True)
class GridField:
    """Samples of a real L-periodic function at x_j = j L / N, j = 0..N-1."""

    L: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1:
            raise ValueError("GridField values must be one-dimensional")
        n = vals.size
        if n < 16 or n % 2 != 0:
            raise ValueError(f"GridField needs an even sample count >= 16, got {n}")
        if not (self.L > 0.0):
            raise ValueError(f"GridField period must be positive, got {self.L}")

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    def mean(self) -> float:
        """Discrete mean; equals the periodic trapezoid mean (1/L) integral."""
        return float(np.mean(self.values))

    def derivative(self) -> "GridField":
        """Spectral first derivative (Nyquist mode mapped to zero)."""
        n = self.N
        xi = 2.0 * np.pi / self.L * np.fft.rfftfreq(n, d=1.0 / n)
        coeff = 1j * xi * np.fft.rfft(self.values)
        coeff[-1] = 0.0
        return GridField(self.L, np.fft.irfft(coeff, n))


@dataclass(frozen=True)
class WaveParameters:
    """The tuple (L, c, omega, k, a, b) fixing one snoidal wave.

    omega, k, a, b are derived from (L, c) by :func:`solve_modulus`;
    construction re-checks the defining relations so stale or hand-edited
    tuples are rejected.
    """

    L: float
    c: float
    omega: float
    k: EllipticModulus
    a: float
    b: float

    def __post_init__(self):
        L, om, k = self.L, self.omega, self.k.value
        big_k = complete_K(self.k)
        checks = (
            ("omega = 1 - c^2", om, 1.0 - self.c * self.c),
            ("b^2 omega (1+k^2) = 1", self.b * self.b * om * (1.0 + k * k), 1.0),
            ("a^2 = 2 b^2 k^2 omega", self.a * self.a, 2.0 * self.b**2 * k * k * om),
            ("b L = 4 K(k)", self.b * L, 4.0 * big_k),
        )
        for label, lhs, rhs in checks:
            if abs(lhs - rhs) > 1e-10 * max(abs(lhs), abs(rhs)):
                raise ValueError(f"inconsistent wave parameters: {label} violated")
        disp = 16.0 * big_k**2 * (1.0 + k * k) * om - L * L
        if abs(disp) > _DISPERSION_RTOL * L * L:
            raise ValueError("inconsistent wave parameters: period-speed relation violated")


def admissible_omega_window(L: float) -> tuple[float, float]:
    """Open interval of omega = 1 - c^2 admitting an L-periodic snoidal wave."""
    if not (0.0 < L < 2.0 * math.pi):
        raise OutOfRangeError(f"period L must lie in (0, 2*pi), got {L}")
    return 0.0, L * L / (4.0 * math.pi**2)


def _omega_of_modulus(L: float, k: float) -> float:
    big_k = complete_K(k)
    return L * L / (16.0 * big_k * big_k * (1.0 + k * k))


def _dK_dk(k: float) -> float:
    """dK/dk = (E - (1-k^2) K) / (k (1-k^2))."""
    om2 = (1.0 - k) * (1.0 + k)
    return (complete_E(k) - om2 * complete_K(k)) / (k * om2)


def solve_modulus(L: float, c: float) -> WaveParameters:
    """Invert the period-speed relation and build the full parameter tuple.

    omega -> k is strictly decreasing, so a bisection bracketed on
    (1e-10, 1-1e-10) always converges; three Newton polishing steps push
    the dispersion residual to machine precision.
    """
    lo_om, hi_om = admissible_omega_window(L)
    omega = (1.0 - c) * (1.0 + c)
    if not (lo_om < omega < hi_om):
        raise OutOfRangeError(
            f"speed c={c} gives omega={omega:.6g} outside the admissible window "
            f"({lo_om:.6g}, {hi_om:.6g}) for L={L:.6g} "
            f"(need sqrt(1 - L^2/(4 pi^2)) < |c| < 1)"
        )

    lo, hi = _BRACKET_EPS, 1.0 - _BRACKET_EPS
    # g(k) = omega(k) is decreasing: g(lo) ~ hi_om, g(hi) ~ 0.
    if not (_omega_of_modulus(L, hi) < omega < _omega_of_modulus(L, lo)):
        raise ModulusBoundaryError(
            f"omega={omega:.6g} not bracketed by moduli in [{lo}, {1 - _BRACKET_EPS}]"
        )
    # Bisect essentially to convergence: near k = 1 the relation's curvature
    # explodes (K ~ log(1/k')), and Newton's basin shrinks below 1e-8.
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if _omega_of_modulus(L, mid) > omega:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    k = 0.5 * (lo + hi)

    # Newton on f(k) = 16 omega K^2 (1+k^2) - L^2.
    for _ in range(_NEWTON_STEPS):
        big_k = complete_K(k)
        f = 16.0 * omega * big_k * big_k * (1.0 + k * k) - L * L
        df = 16.0 * omega * (
            2.0 * big_k * _dK_dk(k) * (1.0 + k * k) + 2.0 * k * big_k * big_k
        )
        step = f / df
        k_next = k - step
        if not (_BRACKET_EPS < k_next < 1.0 - _BRACKET_EPS):
            raise ModulusBoundaryError(f"Newton polishing left the modulus bracket at k={k_next}")
        k = k_next

    big_k = complete_K(k)
    residual = abs(omega * 16.0 * big_k * big_k * (1.0 + k * k) / (L * L) - 1.0)
    if residual > _DISPERSION_RTOL:
        # Near k = 1 the residual jumps by ~1/(K k'^2) * ulp between adjacent
        # doubles, so the 1e-12 contract is unrepresentable: treat as boundary.
        raise ModulusBoundaryError(
            f"modulus k={k:.15g} too close to 1 for a double-precision solve: "
            f"dispersion residual {residual:.3e} > {_DISPERSION_RTOL} (L={L}, c={c})"
        )
    a = math.sqrt(2.0) * k / math.sqrt(1.0 + k * k)
    b = 4.0 * big_k / L
    return WaveParameters(L=L, c=c, omega=omega, k=EllipticModulus(k), a=a, b=b)


def _profile_raw(a: float, b: float, k: float, x: float) -> tuple[float, float, float]:
    sn, cn, dn = jacobi_sn_cn_dn(b * x, EllipticModulus(k))
    h = a * sn
    h1 = a * b * cn * dn
    h2 = -a * b * b * sn * (1.0 + k * k - 2.0 * k * k * sn * sn)
    return h, h1, h2


def profile_eval(p: WaveParameters, x: float) -> tuple[float, float, float]:
    """(h, h', h'') at position x.

    h = a sn(bx; k), h' = a b cn dn, and
    h'' = -a b^2 sn (1 + k^2 - 2 k^2 sn^2) from the sn/cn/dn identities.
    """
    return _profile_raw(p.a, p.b, p.k.value, x)


def sample_wave(p: WaveParameters, N: int) -> tuple[GridField, GridField, GridField]:
    """Sample (h, h', h'') on the uniform N-point grid."""
    if N < 16 or N % 2 != 0:
        raise ValueError(f"sample count must be even and >= 16, got {N}")
    h = np.empty(N)
    h1 = np.empty(N)
    h2 = np.empty(N)
    a, b, k = p.a, p.b, p.k.value
    for j in range(N):
        h[j], h1[j], h2[j] = _profile_raw(a, b, k, j * p.L / N)
    return GridField(p.L, h), GridField(p.L, h1), GridField(p.L, h2)


def _ode_residual_raw(L: float, omega: float, a: float, b: float, k: float, N: int) -> float:
    res = 0.0
    for j in range(N):
        h, _, h2 = _profile_raw(a, b, k, j * L / N)
        res = max(res, abs(-omega * h2 - h + h * h * h))
    return res


def ode_residual(p: WaveParameters, N: int) -> float:
    """sup_j | -omega h''(x_j) - h(x_j) + h(x_j)^3 | on the N-point grid."""
    return _ode_residual_raw(p.L, p.omega, p.a, p.b, p.k.value, N)
