"""Complete elliptic integrals and Jacobi elliptic functions.

Self-contained implementations built on the arithmetic-geometric mean:
K(k) and E(k) come straight from the AGM iteration, and sn/cn/dn from the
descending Landen (Gauss) transformation of the amplitude function.  No
special-function library is involved, so accuracy is limited only by the
quadratic convergence of the AGM (machine precision in ~8 iterations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "EllipticModulus",
    "complete_K",
    "complete_E",
    "jacobi_sn_cn_dn",
]

# Moduli closer than this to 0 or 1 are rejected: downstream wave formulas
# divide by (1-k^2)^2 and the AGM for K diverges logarithmically at k=1.
MODULUS_MARGIN = 1e-12

_AGM_RTOL = 1e-15
_AGM_MAX_ITER = 64


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus k of the Jacobi elliptic functions, restricted to (0, 1)."""

    value: float

    def __post_init__(self):
        k = self.value
        if not math.isfinite(k):
            raise ValueError(f"elliptic modulus must be finite, got {k}")
        if k <= MODULUS_MARGIN or k >= 1.0 - MODULUS_MARGIN:
            raise ValueError(
                f"elliptic modulus must lie in ({MODULUS_MARGIN}, {1 - MODULUS_MARGIN}), got {k}"
            )

    @property
    def complement(self) -> float:
        """Complementary modulus k' = sqrt(1 - k^2)."""
        return math.sqrt((1.0 - self.value) * (1.0 + self.value))


def _as_modulus(k) -> EllipticModulus:
    return k if isinstance(k, EllipticModulus) else EllipticModulus(float(k))


def _agm_levels(k: float) -> tuple[list[float], list[float]]:
    """AGM sequences a_n and c_n for modulus k, c_0 = k.

    Iterates a_{n+1} = (a_n+b_n)/2, b_{n+1} = sqrt(a_n b_n),
    c_{n+1} = (a_n-b_n)/2 until c_n is negligible relative to a_n.
    """
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    a_seq = [a]
    c_seq = [k]
    for _ in range(_AGM_MAX_ITER):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        a_seq.append(a)
        c_seq.append(c)
        if abs(c) <= _AGM_RTOL * a:
            return a_seq, c_seq
    raise RuntimeError(f"AGM failed to converge for modulus k={k}")


def complete_K(k) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 AGM(1, k'))."""
    m = _as_modulus(k)
    a_seq, _ = _agm_levels(m.value)
    return math.pi / (2.0 * a_seq[-1])


def complete_E(k) -> float:
    """Complete elliptic integral of the second kind.

    Uses the AGM tail sum E = K (1 - sum_{n>=0} 2^{n-1} c_n^2).
    """
    m = _as_modulus(k)
    a_seq, c_seq = _agm_levels(m.value)
    s = 0.0
    for n, c in enumerate(c_seq):
        s += 2.0 ** (n - 1) * c * c
    return math.pi / (2.0 * a_seq[-1]) * (1.0 - s)


def jacobi_sn_cn_dn(u: float, k) -> tuple[float, float, float]:
    """Jacobi elliptic functions (sn, cn, dn) at real argument u.

    The amplitude phi = am(u, k) is obtained by the descending Landen
    transformation: seed phi_N = 2^N a_N u at the top of the AGM ladder,
    then fold back with sin(2 phi_{n-1} - phi_n) = (c_n / a_n) sin phi_n.
    Then sn = sin phi_0 and cn = cos phi_0, while dn is evaluated from
    dn^2 = 1 - k^2 sn^2 (dn > 0 for real u and k in (0,1)), which stays
    accurate at the quarter periods where the classical cos-ratio formula
    for dn degenerates to 0/0.

    u is reduced modulo the real period 4K first so that long-time
    arguments do not inflate the seed phi_N; fmod preserves the sign of u,
    which makes the whole recursion antisymmetric and sn exactly odd.
    """
    m = _as_modulus(k)
    kk = m.value
    if not math.isfinite(u):
        raise ValueError(f"argument of jacobi_sn_cn_dn must be finite, got {u}")
    a_seq, c_seq = _agm_levels(kk)
    top = len(c_seq) - 1
    big_k = math.pi / (2.0 * a_seq[-1])
    u = math.fmod(u, 4.0 * big_k)

    phi = math.ldexp(a_seq[top] * u, top)
    for n in range(top, 0, -1):
        t = c_seq[n] / a_seq[n] * math.sin(phi)
        # Clamp against rounding excursions just outside [-1, 1].
        t = max(-1.0, min(1.0, t))
        phi = 0.5 * (phi + math.asin(t))

    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt((1.0 - kk * sn) * (1.0 + kk * sn))
    return sn, cn, dn
