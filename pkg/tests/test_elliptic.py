"""Elliptic integrals/functions against independent quadrature and ODE oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from snoidal.elliptic import EllipticModulus, complete_E, complete_K, jacobi_sn_cn_dn

# Frozen oracle values: adaptive quadrature of the defining integrals
# (scipy.integrate.quad, epsabs=epsrel=1e-14).
K_INV_SQRT2 = 1.8540746773013719
K_HALF = 1.6857503548125961
E_HALF = 1.4674622093394272


def quad_K(k):
    return quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2),
                0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-14)[0]


def quad_E(k):
    return quad(lambda t: math.sqrt(1.0 - (k * math.sin(t)) ** 2),
                0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-14)[0]


def jacobi_ode(k, u):
    """Integrate sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn from (0, 1, 1)."""

    def rhs(_, y):
        s, c, d = y
        return [c * d, -s * d, -k * k * s * c]

    sol = solve_ivp(rhs, (0.0, u), [0.0, 1.0, 1.0], rtol=1e-12, atol=1e-14,
                    method="DOP853")
    return sol.y[:, -1]


class TestModulus:
    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.5, 1e-13, 1.0 - 1e-13])
    def test_rejects_boundary(self, bad):
        with pytest.raises(ValueError):
            EllipticModulus(bad)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            EllipticModulus(float("nan"))

    def test_complement(self):
        m = EllipticModulus(0.6)
        assert math.isclose(m.complement, 0.8, rel_tol=1e-15)


class TestCompleteIntegrals:
    def test_frozen_values(self):
        assert abs(complete_K(1.0 / math.sqrt(2.0)) - K_INV_SQRT2) <= 1e-12
        assert abs(complete_K(0.5) - K_HALF) <= 1e-12
        assert abs(complete_E(0.5) - E_HALF) <= 1e-12

    @pytest.mark.parametrize("k", [0.05, 0.2, 0.5, 0.8, 0.95, 0.999])
    def test_against_quadrature(self, k):
        assert abs(complete_K(k) - quad_K(k)) <= 2e-12
        assert abs(complete_E(k) - quad_E(k)) <= 2e-12

    def test_small_modulus_limits(self):
        # integrands tend to 1, so both integrals tend to pi/2
        assert abs(complete_K(1e-9) - math.pi / 2) <= 1e-12
        assert abs(complete_E(1e-9) - math.pi / 2) <= 1e-12

    def test_E_limit_at_one(self):
        # E -> integral of cos = 1
        assert abs(complete_E(1.0 - 1e-11) - 1.0) <= 1e-9

    def test_K_monotone_and_bounded_below(self):
        ks = np.linspace(0.01, 0.99, 50)
        vals = [complete_K(k) for k in ks]
        assert all(v > math.pi / 2 for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("k", np.linspace(0.05, 0.95, 10))
    def test_bound_chain(self, k):
        big_k, big_e = complete_K(k), complete_E(k)
        assert (1.0 - k * k) * big_k < big_e < big_k

    @pytest.mark.parametrize("k", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_legendre_relation(self, k):
        kp = math.sqrt(1.0 - k * k)
        lhs = (complete_E(k) * complete_K(kp) + complete_E(kp) * complete_K(k)
               - complete_K(k) * complete_K(kp))
        assert abs(lhs - math.pi / 2) <= 1e-12


class TestJacobiFunctions:
    def test_origin(self):
        for k in (0.1, 0.5, 0.9):
            assert jacobi_sn_cn_dn(0.0, k) == (0.0, 1.0, 1.0)

    def test_degenerate_modulus_is_trigonometric(self):
        for u in (-2.0, 0.3, 1.7):
            sn, cn, dn = jacobi_sn_cn_dn(u, 1e-9)
            assert abs(sn - math.sin(u)) <= 1e-12
            assert abs(cn - math.cos(u)) <= 1e-12
            assert abs(dn - 1.0) <= 1e-12

    def test_quarter_period(self):
        k = 0.5
        big_k = complete_K(k)
        sn, cn, dn = jacobi_sn_cn_dn(big_k, k)
        ref = jacobi_ode(k, big_k)
        assert abs(sn - 1.0) <= 1e-10 and abs(sn - ref[0]) <= 1e-9
        assert abs(cn) <= 1e-10 and abs(cn - ref[1]) <= 1e-9
        assert abs(dn - math.sqrt(0.75)) <= 1e-10

    @pytest.mark.parametrize("k", [0.2, 0.5, 0.8, 0.95])
    def test_against_ode_oracle(self, k):
        for u in np.linspace(0.05, 11.0, 12):
            triple = jacobi_sn_cn_dn(u, k)
            ref = jacobi_ode(k, u)
            assert np.max(np.abs(np.array(triple) - ref)) <= 1e-9

    def test_identities_on_mesh(self):
        # 10^3-point (u, k) mesh
        for k in np.arange(0.1, 0.95, 0.1):
            for u in np.linspace(-20.0, 20.0, 112):
                sn, cn, dn = jacobi_sn_cn_dn(u, k)
                assert abs(sn * sn + cn * cn - 1.0) <= 1e-12
                assert abs(dn * dn + k * k * sn * sn - 1.0) <= 1e-12

    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
    def test_periodicity(self, k):
        big_k = complete_K(k)
        for u in np.linspace(-5.0, 5.0, 41):
            sn, _, _ = jacobi_sn_cn_dn(u, k)
            sn4, _, _ = jacobi_sn_cn_dn(u + 4.0 * big_k, k)
            assert abs(sn4 - sn) <= 1e-10

    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
    def test_sn_odd_cn_even(self, k):
        for u in np.linspace(0.0, 8.0, 33):
            sn_p, cn_p, _ = jacobi_sn_cn_dn(u, k)
            sn_m, cn_m, _ = jacobi_sn_cn_dn(-u, k)
            assert abs(sn_m + sn_p) <= 1e-13
            assert abs(cn_m - cn_p) <= 1e-13

    def test_rejects_nonfinite_argument(self):
        with pytest.raises(ValueError):
            jacobi_sn_cn_dn(float("inf"), 0.5)
