"""Time evolution of the zero-mean projected phi^4 flow and orbit tracking.

The field equation phi_tt = phi_xx + phi - phi^3 + mean(phi^3) (the mean
term only in projected mode) is split into

  linear part:    phi_tt = phi_xx + phi   -- exact per Fourier mode; every
                  nonzero mode oscillates with frequency sqrt(xi_n^2 - 1)
                  since L < 2 pi makes xi_n^2 > 1, and mode 0 is pinned to
                  zero under projection (cosh/sinh growth otherwise);
  nonlinear kick: phidot -= dt * (phi^3 - mean phi^3).

Strang composition [half linear, kick, half linear] is symmetric, hence
time-reversible and second-order, and the exact linear flow removes any
CFL restriction from phi_xx.

Distances to the traveling-wave orbit use the energy-space norm
||(p, q)||^2 = integral(p^2 + p_x^2) + integral(q^2), evaluated through
Fourier coefficients with physical wavenumbers xi_n = 2 pi n / L; spatial
shifts are realized by phase multiplication and minimized by a coarse
grid pass plus golden-section refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .waves import GridField, WaveParameters, sample_wave

__all__ = [
    "BlowUpError",
    "FieldState",
    "ConservedQuantities",
    "EvolutionTrace",
    "TRACE_COLUMNS",
    "SplitStepper",
    "step",
    "conserved",
    "orbit_distance",
    "perturbation_mode",
    "perturbation_random",
    "ynorm_sq",
    "run_experiment",
]

TRACE_COLUMNS = ("t", "E", "F", "mean_phi", "mean_phidot", "orbit_distance")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class BlowUpError(RuntimeError):
    """Sup-norm ceiling exceeded; carries the blow-up time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class FieldState:
    """Field samples (phi, phi_t) at time t on a shared grid."""

    phi: GridField
    phidot: GridField
    t: float

    def __post_init__(self):
        if self.phi.L != self.phidot.L or self.phi.N != self.phidot.N:
            raise ValueError("phi and phidot must share period and grid size")


@dataclass(frozen=True)
class ConservedQuantities:
    E: float
    F: float
    mean_phi: float
    mean_phidot: float


@dataclass(frozen=True)
class EvolutionTrace:
    """Rows of (t, E, F, mean_phi, mean_phidot, orbit_distance)."""

    samples: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", rows)
        if rows.ndim != 2 or rows.shape[1] != len(TRACE_COLUMNS):
            raise ValueError(f"trace rows must have {len(TRACE_COLUMNS)} columns")
        if np.any(np.diff(rows[:, 0]) <= 0.0):
            raise ValueError("trace times must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, TRACE_COLUMNS.index(name)]


def _wavenumbers(L: float, N: int) -> np.ndarray:
    """rfft wavenumbers xi_n = 2 pi n / L, n = 0..N/2."""
    return 2.0 * math.pi / L * np.fft.rfftfreq(N, d=1.0 / N)


def _parseval_weights(L: float, N: int) -> np.ndarray:
    """Weights turning |rfft|^2 sums into integrals over one period."""
    w = np.full(N // 2 + 1, 2.0 * L / (N * N))
    w[0] = L / (N * N)
    w[-1] = L / (N * N)
    return w


class SplitStepper:
    """Strang splitting with precomputed per-mode linear rotations.

    One instance is bound to (L, N, dt, projected); `ceiling` bounds
    ||phi||_inf and trips BlowUpError when exceeded during a kick.
    """

    def __init__(self, L: float, N: int, dt: float, projected: bool = True,
                 ceiling: float = np.inf):
        if dt == 0.0 or not math.isfinite(dt):
            raise ValueError(f"time step must be nonzero and finite, got {dt}")
        # dt < 0 steps backward; with exact sub-flows this inverts the
        # forward step to roundoff (Strang symmetry).
        if not (0.0 < L < 2.0 * math.pi):
            raise ValueError(f"period must lie in (0, 2*pi), got {L}")
        self.L, self.N, self.dt = L, N, dt
        self.projected = projected
        self.ceiling = ceiling
        xi = _wavenumbers(L, N)
        omega2 = xi * xi - 1.0  # > 0 for every nonzero mode when L < 2 pi
        om = np.sqrt(omega2[1:])
        self._rot = {}
        for tag, tau in (("half", 0.5 * dt), ("full", dt)):
            cos = np.cos(om * tau)
            sin = np.sin(om * tau)
            self._rot[tag] = (cos, sin / om, -sin * om, math.cosh(tau), math.sinh(tau))

    def _linear(self, ph, pt, tag):
        cos, sin_over, neg_sin_times, ch, sh = self._rot[tag]
        new_ph = ph.copy()
        new_pt = pt.copy()
        new_ph[1:] = cos * ph[1:] + sin_over * pt[1:]
        new_pt[1:] = neg_sin_times * ph[1:] + cos * pt[1:]
        if self.projected:
            new_ph[0] = 0.0
            new_pt[0] = 0.0
        else:
            new_ph[0] = ch * ph[0] + sh * pt[0]
            new_pt[0] = sh * ph[0] + ch * pt[0]
        return new_ph, new_pt

    def _kick(self, ph, pt, t):
        phi = np.fft.irfft(ph, self.N)
        sup = float(np.max(np.abs(phi)))
        if sup > self.ceiling:
            raise BlowUpError(
                f"||phi||_inf = {sup:.6g} exceeded ceiling {self.ceiling:.6g} at t = {t:.6g}",
                time=t,
            )
        force = np.fft.rfft(phi * phi * phi)
        if self.projected:
            force[0] = 0.0  # subtracting the mean of phi^3, exactly
        pt = pt - self.dt * force
        if self.projected:
            pt[0] = 0.0
        return ph, pt

    def advance(self, ph, pt, nsteps: int, t0: float):
        """nsteps Strang steps on rfft coefficients, fusing interior half flows."""
        if nsteps < 1:
            return ph, pt
        ph, pt = self._linear(ph, pt, "half")
        for j in range(nsteps - 1):
            ph, pt = self._kick(ph, pt, t0 + (j + 0.5) * self.dt)
            ph, pt = self._linear(ph, pt, "full")
        ph, pt = self._kick(ph, pt, t0 + (nsteps - 0.5) * self.dt)
        return self._linear(ph, pt, "half")

    def step_state(self, state: FieldState) -> FieldState:
        ph = np.fft.rfft(state.phi.values)
        pt = np.fft.rfft(state.phidot.values)
        ph, pt = self.advance(ph, pt, 1, state.t)
        return FieldState(
            GridField(self.L, np.fft.irfft(ph, self.N)),
            GridField(self.L, np.fft.irfft(pt, self.N)),
            state.t + self.dt,
        )


def step(state: FieldState, dt: float, projected: bool = True,
         ceiling: float = np.inf) -> FieldState:
    """One Strang step of the (projected) flow; see SplitStepper for reuse."""
    stepper = SplitStepper(state.phi.L, state.phi.N, dt, projected, ceiling)
    return stepper.step_state(state)


def _h1_semi_sq(values: np.ndarray, L: float) -> float:
    """integral of (d/dx)^2 via Parseval, Nyquist included."""
    N = values.size
    xi = _wavenumbers(L, N)
    w = _parseval_weights(L, N)
    return float(np.sum(w * (xi * np.abs(np.fft.rfft(values))) ** 2))


def conserved(state: FieldState) -> ConservedQuantities:
    """Energy, momentum, and component means by spectral quadrature."""
    L, N = state.phi.L, state.phi.N
    phi = state.phi.values
    pt = state.phidot.values
    quad = L / N
    energy = 0.5 * (
        _h1_semi_sq(phi, L)
        + quad * float(np.sum(pt * pt - phi * phi + 0.5 * phi**4))
    )
    momentum = quad * float(np.sum(state.phi.derivative().values * pt))
    return ConservedQuantities(energy, momentum, state.phi.mean(), state.phidot.mean())


def ynorm_sq(p: GridField, q: GridField) -> float:
    """Squared energy-space norm: integral(p^2 + p_x^2) + integral(q^2)."""
    quad = p.L / p.N
    return (
        quad * float(np.sum(p.values**2))
        + _h1_semi_sq(p.values, p.L)
        + quad * float(np.sum(q.values**2))
    )


class _OrbitDistance:
    """Shift-minimized energy-space distance to a fixed wave pair (h, c h')."""

    def __init__(self, wave: WaveParameters, N: int):
        self.L, self.N = wave.L, N
        h, h1, _ = sample_wave(wave, N)
        self.hhat = np.fft.fft(h.values) / N
        self.hthat = wave.c * np.fft.fft(h1.values) / N
        self.xi = 2.0 * math.pi / wave.L * np.fft.fftfreq(N, d=1.0 / N)
        self.weight = 1.0 + self.xi * self.xi

    def __call__(self, phi: np.ndarray, phidot: np.ndarray) -> float:
        N, L = self.N, self.L
        ph = np.fft.fft(phi) / N
        pt = np.fft.fft(phidot) / N

        def dist_sq(s: float) -> float:
            # Stable form: difference per mode first, then square, so the
            # result has no cancellation floor near the orbit.
            phase = np.exp(1j * self.xi * s)
            dp = ph * phase - self.hhat
            dq = pt * phase - self.hthat
            return L * float(
                np.sum(self.weight * (dp.real**2 + dp.imag**2))
                + np.sum(dq.real**2 + dq.imag**2)
            )

        # Coarse pass: the shift-correlation gain at every grid shift via one
        # inverse transform locates the basin; exact grid shifts (phase
        # exactly representable) stay in the candidate set.
        cross = self.weight * ph * np.conj(self.hhat) + pt * np.conj(self.hthat)
        grid_gain = np.real(np.fft.ifft(cross) * N)
        j = int(np.argmax(grid_gain))
        lo = (j - 1) * L / N
        hi = (j + 1) * L / N
        # Golden-section refinement; dist_sq is smooth and unimodal near the
        # optimum, and 1e-12 in s keeps the shift-resolution error below the
        # 1e-10 distance floor promised for exact translates.
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        d1, d2 = dist_sq(x1), dist_sq(x2)
        while hi - lo > 1e-12:
            if d1 > d2:
                lo, x1, d1 = x1, x2, d2
                x2 = lo + _GOLDEN * (hi - lo)
                d2 = dist_sq(x2)
            else:
                hi, x2, d2 = x2, x1, d1
                x1 = hi - _GOLDEN * (hi - lo)
                d1 = dist_sq(x1)
        best = min(d1, d2, dist_sq(j * L / N))
        return math.sqrt(max(best, 0.0))


def orbit_distance(state: FieldState, wave: WaveParameters) -> float:
    """min over shifts s of ||(phi(.+s), phi_t(.+s)) - (h, c h')|| in Y."""
    if abs(state.phi.L - wave.L) > 1e-12 * wave.L:
        raise ValueError("state and wave periods differ")
    return _OrbitDistance(wave, state.phi.N)(state.phi.values, state.phidot.values)


def perturbation_mode(L: float, N: int, mode: int = 1) -> tuple[GridField, GridField]:
    """Unit-Y-norm trigonometric perturbation (cos mode in phi, sin mode in phi_t)."""
    if not (1 <= mode < N // 2):
        raise ValueError(f"mode must lie in [1, N/2), got {mode}")
    x = np.arange(N) * (L / N)
    xi = 2.0 * math.pi * mode / L
    p = GridField(L, np.cos(xi * x))
    q = GridField(L, np.sin(xi * x))
    scale = 1.0 / math.sqrt(ynorm_sq(p, q))
    return GridField(L, scale * p.values), GridField(L, scale * q.values)


def perturbation_random(L: float, N: int, seed: int) -> tuple[GridField, GridField]:
    """Unit-Y-norm random zero-mean pair, band-limited to modes 1..N/8.

    Reproducible by construction: amplitudes and phases are uniform doubles
    drawn from a PCG64 stream seeded with `seed` (two draws per mode and
    component, in mode order, phi before phi_t), with a 1/m^2 falloff.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = np.arange(N) * (L / N)
    fields = []
    for _ in range(2):
        vals = np.zeros(N)
        for m in range(1, max(2, N // 8) + 1):
            amp = (2.0 * rng.random() - 1.0) / (m * m)
            phase = 2.0 * math.pi * rng.random()
            vals += amp * np.cos(2.0 * math.pi * m / L * x + phase)
        fields.append(vals)
    p = GridField(L, fields[0])
    q = GridField(L, fields[1])
    scale = 1.0 / math.sqrt(ynorm_sq(p, q))
    return GridField(L, scale * p.values), GridField(L, scale * q.values)


def run_experiment(
    wave: WaveParameters,
    perturbation: tuple[GridField, GridField] | None,
    eps: float,
    T: float,
    dt: float,
    sample_every: int,
    N: int = 256,
    projected: bool = True,
    ceiling_factor: float = 10.0,
) -> EvolutionTrace:
    """Evolve (h, c h') + eps * perturbation and record the orbit diagnostics.

    Samples at t = 0 and every `sample_every` steps; each row holds
    (t, E, F, mean phi, mean phi_t, orbit distance).  Blow-up during the
    run propagates as BlowUpError.
    """
    if eps < 0.0:
        raise ValueError(f"perturbation amplitude must be nonnegative, got {eps}")
    if dt <= 0.0:
        raise ValueError(f"experiment time step must be positive, got {dt}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be at least 1, got {sample_every}")
    h, h1, _ = sample_wave(wave, N)
    phi = h.values.copy()
    phidot = wave.c * h1.values
    if perturbation is not None and eps != 0.0:
        p, q = perturbation
        if p.N != N or q.N != N or abs(p.L - wave.L) > 1e-12 * wave.L:
            raise ValueError("perturbation grid does not match the wave grid")
        phi = phi + eps * p.values
        phidot = phidot + eps * q.values

    ceiling = ceiling_factor * float(np.max(np.abs(h.values)))
    stepper = SplitStepper(wave.L, N, dt, projected, ceiling)
    distance = _OrbitDistance(wave, N)
    nsteps = int(round(T / dt))

    def sample_row(t, phi_vals, phidot_vals):
        st = FieldState(GridField(wave.L, phi_vals), GridField(wave.L, phidot_vals), t)
        q = conserved(st)
        return (t, q.E, q.F, q.mean_phi, q.mean_phidot, distance(phi_vals, phidot_vals))

    rows = [sample_row(0.0, phi, phidot)]
    ph = np.fft.rfft(phi)
    pt = np.fft.rfft(phidot)
    done = 0
    while done < nsteps:
        block = min(sample_every, nsteps - done)
        ph, pt = stepper.advance(ph, pt, block, done * dt)
        done += block
        rows.append(
            sample_row(done * dt, np.fft.irfft(ph, N), np.fft.irfft(pt, N))
        )
    return EvolutionTrace(np.array(rows))
