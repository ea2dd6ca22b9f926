"""Linearized operators around a snoidal wave and their spectral bookkeeping.

Discretization is Fourier collocation on the uniform N-point grid: the
dense differentiation matrices are exact on the resolved trigonometric
modes, so kernel residuals and eigenvalue matches at the 1e-8 level are
reachable with N = 256.

Operators handled here (all dense, symmetric):

  L1      = -omega d2/dx2 - 1 + 3 h^2                       (scalar, N x N)
  Lblock  = [[-d2/dx2 - 1 + 3 h^2,  c d/dx], [-c d/dx, 1]]  (pair, 2N x 2N)

plus their zero-mean-constrained companions, obtained by subtracting the
rank-one mean coupling (3/L) (h^2, .) from the first component and
compressing onto an orthonormal basis of mean-free grid vectors.

The constrained Morse index is cross-checked two ways: directly from the
compressed spectra, and through the index bookkeeping driven by the scalar
D1 = (L1^{-1} 1, 1) and the 2x2 matrix D = diag(D1, L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import complete_E, complete_K
from .waves import GridField, WaveParameters, sample_wave, solve_modulus

__all__ = [
    "EigenSolveError",
    "SingularSystemError",
    "IndexMismatchError",
    "OperatorMatrix",
    "SpectralReport",
    "ConstrainedIndexData",
    "ClosedFormEigenpair",
    "fourier_diff_matrices",
    "assemble_L1",
    "assemble_Lblock",
    "constrain_zero_mean",
    "eigen_report",
    "closed_form_eigenpairs",
    "unit_source_solution_closed",
    "D1_closed",
    "D1_numeric",
    "D_matrix",
    "n0_z0_from_D1",
    "index_counts",
    "verify_index_counts",
    "coercivity_constant",
    "solve_in_kernel_complement",
    "d_second_derivative",
    "full_report",
]

KIND_L1 = "L1"
KIND_LBLOCK = "Lblock"
KIND_L1_CONSTRAINED = "L1_constrained"
KIND_LBLOCK_CONSTRAINED = "Lblock_constrained"

# Zero-eigenvalue classification: tau_zero = ZERO_TOL_FACTOR * spectral radius.
# The computed kernel eigenvalue scales like eps * spectral radius (observed
# <= 1e-16 * radius across the admissible range), while the pair operator's
# genuine small eigenvalues scale like omega = 1 - c^2 and can reach
# 1.6e-8 * radius; 1e-12 splits the two regimes by >= 4 decades either way.
ZERO_TOL_FACTOR = 1e-12


class EigenSolveError(RuntimeError):
    """Dense symmetric eigensolver failed to converge (assembly bug)."""


class SingularSystemError(RuntimeError):
    """Kernel-deflated linear solve is ill-posed (wrong kernel handling)."""


class IndexMismatchError(RuntimeError):
    """Index-formula prediction disagrees with directly computed counts."""


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense symmetric realization of one of the linearized operators.

    kernel_vector holds the expected discrete kernel direction (h' for L1,
    (h', c h'') for the block operator, their compressions for constrained
    kinds); h_squared keeps the potential samples needed to form the
    rank-one mean coupling when constraining.
    """

    kind: str
    L: float
    entries: np.ndarray
    kernel_vector: np.ndarray
    h_squared: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", m)
        skew = np.max(np.abs(m - m.T))
        if skew > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError(f"operator matrix of kind {self.kind} not symmetric: skew {skew:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectralReport:
    """Sorted spectrum with negative/zero counts at tolerance tau_zero."""

    eigenvalues: np.ndarray
    n: int
    z: int
    tau_zero: float
    kernel_residual: float


@dataclass(frozen=True)
class ConstrainedIndexData:
    """D1, the 2x2 constraint matrix D = diag(D1, L), and the counts n0, z0."""

    D1: float
    Dmatrix: np.ndarray
    n0: int
    z0: int


@dataclass(frozen=True)
class ClosedFormEigenpair:
    """Exact eigenpair of L1: lam with eigenfunction 1 - bracket * sn^2(bx;k)."""

    lam: float
    bracket: float
    f: GridField
    which: str


def fourier_diff_matrices(N: int, L: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense spectral differentiation matrices (D1, D2) on the N-point grid.

    Entries are the classic cot / csc^2 circulant stencils for period 2*pi,
    rescaled to period L.  Columns are mirrored explicitly so that D1 is
    exactly antisymmetric and D2 exactly symmetric in floating point.
    D1 maps the unresolved sawtooth (Nyquist) mode to zero; D2 keeps it
    with its cosine eigenvalue -(pi N / L)^2.
    """
    if N < 16 or N % 2 != 0:
        raise ValueError(f"grid size must be even and >= 16, got {N}")
    half = N // 2
    c1 = np.zeros(N)
    c2 = np.zeros(N)
    c2[0] = -(N * N) / 12.0 - 1.0 / 6.0
    for m in range(1, half + 1):
        s = math.sin(m * math.pi / N)
        sign = -1.0 if m % 2 else 1.0
        c1[m] = 0.5 * sign * (math.cos(m * math.pi / N) / s)
        c2[m] = -sign / (2.0 * s * s)
    for m in range(1, half):
        c1[N - m] = -c1[m]
        c2[N - m] = c2[m]
    c1[half] = 0.0  # cot(pi/2) = 0; keeps the sawtooth annihilated

    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    scale = 2.0 * math.pi / L
    return c1[idx] * scale, c2[idx] * (scale * scale)


def assemble_L1(wave: WaveParameters, N: int) -> OperatorMatrix:
    """Dense matrix of -omega d2/dx2 - 1 + 3 h^2 with h' as expected kernel."""
    h, h1, _ = sample_wave(wave, N)
    return _assemble_L1_raw(h.values, wave.omega, wave.L, kernel=h1.values)


def _assemble_L1_raw(
    h_values: np.ndarray, omega: float, L: float, kernel: np.ndarray | None = None
) -> OperatorMatrix:
    """Assembly from raw samples; also serves the constant-potential debug mode."""
    h_values = np.asarray(h_values, dtype=float)
    N = h_values.size
    _, d2 = fourier_diff_matrices(N, L)
    h2 = h_values * h_values
    m = -omega * d2 + np.diag(3.0 * h2 - 1.0)
    if kernel is None:
        kernel = np.zeros(N)
    return OperatorMatrix(KIND_L1, L, m, kernel, h_squared=h2)


def assemble_Lblock(wave: WaveParameters, N: int) -> OperatorMatrix:
    """Dense 2N x 2N matrix of the pair operator with kernel (h', c h'')."""
    h, h1, h2 = sample_wave(wave, N)
    kernel = np.concatenate([h1.values, wave.c * h2.values])
    return _assemble_Lblock_raw(h.values, wave.c, wave.L, kernel=kernel)


def _assemble_Lblock_raw(
    h_values: np.ndarray, c: float, L: float, kernel: np.ndarray | None = None
) -> OperatorMatrix:
    h_values = np.asarray(h_values, dtype=float)
    N = h_values.size
    d1, d2 = fourier_diff_matrices(N, L)
    h2 = h_values * h_values
    upper_left = -d2 + np.diag(3.0 * h2 - 1.0)
    cd1 = c * d1
    m = np.block([[upper_left, cd1], [cd1.T, np.eye(N)]])
    if kernel is None:
        kernel = np.zeros(2 * N)
    return OperatorMatrix(KIND_LBLOCK, L, m, kernel, h_squared=h2)


def zero_mean_basis(N: int) -> np.ndarray:
    """Orthonormal N x (N-1) basis of the mean-free subspace (Householder)."""
    e = np.zeros(N)
    e[0] = 1.0
    w = np.full(N, 1.0 / math.sqrt(N)) - e
    H = np.eye(N) - 2.0 * np.outer(w, w) / np.dot(w, w)
    return H[:, 1:]


def constrain_zero_mean(M: OperatorMatrix) -> OperatorMatrix:
    """Zero-mean companion: subtract the rank-one mean coupling, then compress.

    The subtracted term sends the first component p to the constant
    (3/L) (h^2, p); on discrete samples with quadrature weight L/N that is
    the outer product ones * (3 h^2 / N)^T.  Compression onto the
    orthonormal mean-free basis then yields an (N-1) x (N-1) (scalar) or
    2(N-1) x 2(N-1) (pair) symmetric matrix.  The rank-one term vanishes
    identically under the compression (its range is the constant vector),
    which is exactly why quadratic forms of the constrained and plain
    operators agree on mean-free vectors.
    """
    if M.kind == KIND_L1:
        N = M.dim
        rank_one = np.outer(np.ones(N), 3.0 * M.h_squared / N)
        basis = zero_mean_basis(N)
        compressed = basis.T @ (M.entries - rank_one) @ basis
        kernel = basis.T @ M.kernel_vector
        kind = KIND_L1_CONSTRAINED
    elif M.kind == KIND_LBLOCK:
        N = M.dim // 2
        rank_one = np.zeros((2 * N, 2 * N))
        rank_one[:N, :N] = np.outer(np.ones(N), 3.0 * M.h_squared / N)
        b = zero_mean_basis(N)
        basis = np.zeros((2 * N, 2 * (N - 1)))
        basis[:N, : N - 1] = b
        basis[N:, N - 1 :] = b
        compressed = basis.T @ (M.entries - rank_one) @ basis
        kernel = basis.T @ M.kernel_vector
        kind = KIND_LBLOCK_CONSTRAINED
    else:
        raise ValueError(f"cannot constrain operator of kind {M.kind}")
    compressed = 0.5 * (compressed + compressed.T)  # scrub compression roundoff
    return OperatorMatrix(kind, M.L, compressed, kernel)


def eigen_report(M: OperatorMatrix, tau_zero: float | None = None) -> SpectralReport:
    """Full sorted spectrum with counts n (< -tau) and z (within tau) of zero."""
    try:
        vals = np.linalg.eigvalsh(M.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"eigensolve failed for kind {M.kind}: {exc}") from exc
    if tau_zero is None:
        tau_zero = ZERO_TOL_FACTOR * float(np.max(np.abs(vals)))
    n = int(np.sum(vals < -tau_zero))
    z = int(np.sum(np.abs(vals) <= tau_zero))
    kres = float(np.max(np.abs(M.entries @ M.kernel_vector)))
    return SpectralReport(vals, n, z, tau_zero, kres)


def closed_form_eigenpairs(
    wave: WaveParameters, N: int
) -> tuple[ClosedFormEigenpair, ClosedFormEigenpair]:
    """The two exact quadratic-in-sn^2 eigenpairs of L1.

    With r = sqrt(1 - k^2 + k^4):
      lam = (1 + k^2 -/+ 2r) / (1 + k^2),  f = 1 - (1 + k^2 -/+ r) sn^2(bx;k).
    The first is the (negative) ground state; the second sits at the top of
    the second band gap.
    """
    k = wave.k.value
    k2 = k * k
    r = math.sqrt(1.0 - k2 + k2 * k2)
    h, _, _ = sample_wave(wave, N)
    sn2 = (h.values / wave.a) ** 2
    pairs = []
    for sgn, which in ((-1.0, "first"), (1.0, "fifth")):
        lam = (1.0 + k2 + 2.0 * sgn * r) / (1.0 + k2)
        bracket = 1.0 + k2 + sgn * r
        f = GridField(wave.L, 1.0 - bracket * sn2)
        pairs.append(ClosedFormEigenpair(lam, bracket, f, which))
    return pairs[0], pairs[1]


def unit_source_solution_closed(wave: WaveParameters, N: int) -> GridField:
    """Closed-form solution f of L1 f = 1, combined from the two exact pairs.

    f = (lam4 B1 f0 + lam0 B2 f4) / (2 lam0 lam4 r) with B1 = bracket of the
    fifth pair and B2 = -bracket of the first.
    """
    p0, p4 = closed_form_eigenpairs(wave, N)
    k = wave.k.value
    r = math.sqrt(1.0 - k * k + k**4)
    b1, b2 = p4.bracket, -p0.bracket
    vals = (p4.lam * b1 * p0.f.values + p0.lam * b2 * p4.f.values) / (
        2.0 * p0.lam * p4.lam * r
    )
    return GridField(wave.L, vals)


def D1_closed(wave: WaveParameters) -> float:
    """Closed form of D1 = (L1^{-1} 1, 1): strictly negative for all k.

    D1 = -L (1+k^2)/(1-k^2)^2 * [ (1+k^2) + 2 (E-K)/K ].
    """
    k = wave.k.value
    k2 = k * k
    big_k = complete_K(wave.k)
    big_e = complete_E(wave.k)
    bracket = (1.0 + k2) + 2.0 * (big_e - big_k) / big_k
    return -wave.L * (1.0 + k2) / (1.0 - k2) ** 2 * bracket


def solve_in_kernel_complement(
    M: OperatorMatrix, rhs: np.ndarray, tau_zero: float | None = None
) -> np.ndarray:
    """Solve M x = rhs orthogonally to the numerically computed kernel.

    Diagonalizes M, deflates the zero-classified eigenpair(s), and inverts on
    the rest.  The deflated directions are the discrete kernel, not the
    analytic one, so the projected system is consistent to solver precision.
    """
    try:
        vals, vecs = np.linalg.eigh(M.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"eigensolve failed for kind {M.kind}: {exc}") from exc
    if tau_zero is None:
        tau_zero = ZERO_TOL_FACTOR * float(np.max(np.abs(vals)))
    keep = np.abs(vals) > tau_zero
    dropped = int(np.sum(~keep))
    if dropped != 1:
        raise SingularSystemError(
            f"expected a one-dimensional discrete kernel for kind {M.kind}, "
            f"classified {dropped} eigenvalues within {tau_zero:.3e} of zero"
        )
    if np.min(np.abs(vals[keep])) < 1e3 * tau_zero:
        raise SingularSystemError(
            f"retained spectrum of kind {M.kind} nearly singular: "
            f"min |eigenvalue| {np.min(np.abs(vals[keep])):.3e} at tau_zero {tau_zero:.3e}"
        )
    coeff = vecs[:, keep].T @ rhs / vals[keep]
    return vecs[:, keep] @ coeff


def D1_numeric(wave: WaveParameters, N: int) -> float:
    """D1 from the grid: solve L1 f = 1 against the deflated kernel, L * mean f."""
    if N < 64 or N % 2 != 0:
        raise ValueError(f"D1_numeric needs an even grid of at least 64 points, got {N}")
    m = assemble_L1(wave, N)
    f = solve_in_kernel_complement(m, np.ones(N))
    return wave.L * float(np.mean(f))


def n0_z0_from_D1(D1: float, tol: float) -> tuple[int, int]:
    """Counts contributed by the constraint: n0 = [D1 < 0], z0 = [D1 = 0]."""
    if abs(D1) <= tol:
        return 0, 1
    return (1, 0) if D1 < 0.0 else (0, 0)


def D_matrix(wave: WaveParameters, N: int) -> ConstrainedIndexData:
    """Numerical 2x2 constraint matrix from the pair operator.

    Solves Lblock u = e for the two constant directions e = (1,0), (0,1)
    (both orthogonal to the kernel by periodicity) and assembles
    D_ij = (u_i, e_j) with the L/N quadrature weight.  Verifies the expected
    structure diag(D1, L) before deriving (n0, z0) from the D1 sign.
    """
    m = assemble_Lblock(wave, N)
    e1 = np.concatenate([np.ones(N), np.zeros(N)])
    e2 = np.concatenate([np.zeros(N), np.ones(N)])
    u1 = solve_in_kernel_complement(m, e1)
    u2 = solve_in_kernel_complement(m, e2)
    w = wave.L / N
    d = np.array(
        [
            [w * float(u1 @ e1), w * float(u1 @ e2)],
            [w * float(u2 @ e1), w * float(u2 @ e2)],
        ]
    )
    if max(abs(d[0, 1]), abs(d[1, 0])) > 1e-8 * wave.L:
        raise SingularSystemError(
            f"constraint matrix off-diagonal {d[0, 1]:.3e}, {d[1, 0]:.3e} "
            f"exceeds 1e-8 * L = {1e-8 * wave.L:.3e}"
        )
    if abs(d[1, 1] - wave.L) > 1e-8 * wave.L:
        raise SingularSystemError(
            f"constraint matrix lower-right {d[1, 1]:.12g} differs from L = {wave.L:.12g}"
        )
    n0, z0 = n0_z0_from_D1(d[0, 0], tol=1e-8 * wave.L)
    return ConstrainedIndexData(D1=float(d[0, 0]), Dmatrix=d, n0=n0, z0=z0)


def index_counts(report: SpectralReport, idx: ConstrainedIndexData) -> tuple[int, int]:
    """Predicted constrained counts: n_c = n - n0 - z0, z_c = z + z0."""
    return report.n - idx.n0 - idx.z0, report.z + idx.z0


def verify_index_counts(
    report: SpectralReport, idx: ConstrainedIndexData, constrained: SpectralReport
) -> tuple[int, int]:
    """Cross-check the index prediction against the compressed spectrum."""
    n_pred, z_pred = index_counts(report, idx)
    if (n_pred, z_pred) != (constrained.n, constrained.z):
        raise IndexMismatchError(
            f"index formulas predict (n, z) = ({n_pred}, {z_pred}) but the "
            f"constrained spectrum has ({constrained.n}, {constrained.z})"
        )
    return n_pred, z_pred


def coercivity_constant(M: OperatorMatrix, tau_zero: float | None = None) -> float:
    """Smallest eigenvalue on the orthogonal complement of the kernel direction."""
    report = eigen_report(M, tau_zero)
    if report.z != 1:
        raise SingularSystemError(
            f"coercivity constant needs a one-dimensional kernel, found z = {report.z}"
        )
    vals = report.eigenvalues
    nonzero = vals[np.abs(vals) > report.tau_zero]
    return float(np.min(nonzero))


def d_second_derivative(L: float, c: float, dc: float, N: int = 256) -> float:
    """Central difference of -d/dc [ c * integral of h'^2 ] at speed c.

    The sign of the result is the stability-criterion quantity; it must be
    negative throughout the admissible speed window.  Raises the wave
    construction errors if c or c +/- dc leaves the window.
    """
    if dc <= 0.0:
        raise ValueError(f"speed step must be positive, got {dc}")

    def momentum(speed: float) -> float:
        wave = solve_modulus(L, speed)
        _, h1, _ = sample_wave(wave, N)
        return speed * L * float(np.mean(h1.values**2))

    solve_modulus(L, c)  # validate the center point too
    return -(momentum(c + dc) - momentum(c - dc)) / (2.0 * dc)


def full_report(L: float, c: float, N: int, dc: float = 1e-4) -> dict:
    """Everything the spectrum pipeline knows, as one JSON-ready record.

    Field names are stable: parameters, counts, eigenvalues (full sorted
    arrays keyed by operator kind), D1_closed, D1_numeric, Dmatrix, n0, z0,
    d2, residuals, coercivity.
    """
    wave = solve_modulus(L, c)
    m1 = assemble_L1(wave, N)
    mb = assemble_Lblock(wave, N)
    m1c = constrain_zero_mean(m1)
    mbc = constrain_zero_mean(mb)
    r1 = eigen_report(m1)
    rb = eigen_report(mb)
    r1c = eigen_report(m1c)
    rbc = eigen_report(mbc)
    idx = D_matrix(wave, N)
    verify_index_counts(r1, idx, r1c)
    verify_index_counts(rb, idx, rbc)
    d1_closed = D1_closed(wave)
    d1_numeric = D1_numeric(wave, N)
    pair0, _ = closed_form_eigenpairs(wave, N)
    d2 = d_second_derivative(L, c, dc, N)
    return {
        "parameters": {
            "L": wave.L,
            "c": wave.c,
            "omega": wave.omega,
            "k": wave.k.value,
            "a": wave.a,
            "b": wave.b,
            "N": N,
            "dc": dc,
        },
        "counts": {
            "L1": [r1.n, r1.z],
            "Lblock": [rb.n, rb.z],
            "L1_constrained": [r1c.n, r1c.z],
            "Lblock_constrained": [rbc.n, rbc.z],
        },
        "eigenvalues": {
            "L1": r1.eigenvalues.tolist(),
            "Lblock": rb.eigenvalues.tolist(),
            "L1_constrained": r1c.eigenvalues.tolist(),
            "Lblock_constrained": rbc.eigenvalues.tolist(),
        },
        "D1_closed": d1_closed,
        "D1_numeric": d1_numeric,
        "Dmatrix": idx.Dmatrix.tolist(),
        "n0": idx.n0,
        "z0": idx.z0,
        "d2": d2,
        "residuals": {
            "kernel_L1": r1.kernel_residual,
            "kernel_Lblock": rb.kernel_residual,
            "kernel_L1_constrained": r1c.kernel_residual,
            "kernel_Lblock_constrained": rbc.kernel_residual,
            "D1_relative_gap": abs(d1_numeric - d1_closed) / abs(d1_closed),
            "ground_state_gap": abs(float(r1.eigenvalues[0]) - pair0.lam),
        },
        "coercivity": coercivity_constant(mbc),
    }
