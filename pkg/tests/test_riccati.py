import math

import numpy as np
import pytest
from scipy.integrate import quad

from creditfx import (
    AjdParams,
    BlowUpError,
    DiracJumps,
    ExponentialJumps,
    UnsupportedRegimeError,
    jump_transform,
    riccati_limit_u_to_neg_inf,
    solve_riccati_closed,
    solve_riccati_numeric,
)
from conftest import dirac_params, mixed_params, regime_a_params, regime_b_params


class TestJumpTransform:
    def test_zero_exponent_is_zero(self):
        assert jump_transform(ExponentialJumps(2.0), 0.0, 7.0) == 0.0

    def test_exponential_closed_value(self):
        assert jump_transform(ExponentialJumps(2.0), -1.0, 0.0) == pytest.approx(-1.0 / 3.0, abs=1e-15)

    def test_dirac_closed_value(self):
        assert jump_transform(DiracJumps(math.log(2.0), 0.0), -1.0, 0.0) == pytest.approx(-0.5, abs=1e-15)

    def test_matches_quadrature_oracle(self):
        # independent oracle: adaptive quadrature of the defining integral
        lam, u = 1.7, -0.8
        oracle, err = quad(
            lambda x: (math.exp(u * x) - 1.0) * lam * math.exp(-lam * x),
            0.0, np.inf, epsabs=1e-13, epsrel=1e-13,
        )
        assert err < 1e-11
        assert jump_transform(ExponentialJumps(lam), u, 0.0) == pytest.approx(oracle, abs=1e-10)

    def test_pole_rejected(self):
        with pytest.raises(ValueError, match="pole"):
            jump_transform(ExponentialJumps(2.0), 2.0, 0.0)
        with pytest.raises(ValueError, match="pole"):
            jump_transform(ExponentialJumps(2.0), 2.5, 0.0)

    def test_nonpositive_on_pricing_domain(self, rng):
        for _ in range(200):
            u, v = -rng.exponential(1.0), -rng.exponential(1.0)
            nu_exp = ExponentialJumps(rng.uniform(0.5, 5.0))
            nu_dir = DiracJumps(rng.uniform(0.1, 2.0), rng.uniform(0.0, 1.0))
            assert jump_transform(nu_exp, u, v) < 0.0
            assert jump_transform(nu_dir, u, v) < 0.0
        # equality cases: u = 0 for exponential (any v), u j_x + v j_y = 0 for dirac
        assert jump_transform(ExponentialJumps(1.3), 0.0, -2.0) == 0.0
        assert jump_transform(DiracJumps(1.0, 0.0), 0.0, -3.0) == 0.0


class TestNumericSolver:
    def test_zero_exponents_stay_zero(self):
        p = mixed_params()
        tr = solve_riccati_numeric(p, 0.0, 0.0, 5.0)
        assert (tr.phi, tr.psi_x, tr.psi_y) == (0.0, 0.0, 0.0)

    def test_exact_at_zero_horizon(self):
        p = regime_a_params()
        tr = solve_riccati_numeric(p, -1.0, -0.5, 0.0)
        assert (tr.phi, tr.psi_x, tr.psi_y) == (0.0, -1.0, -0.5)

    def test_matches_closed_form_regime_a(self):
        p = regime_a_params(m=1.0, lam=2.0, sigma_x=0.5)
        num = solve_riccati_numeric(p, -1.0, 0.0, 1.0)
        cl = solve_riccati_closed(p, -1.0, 0.0, 1.0)
        assert num.phi == pytest.approx(cl.phi, abs=1e-8)
        assert num.psi_x == pytest.approx(cl.psi_x, abs=1e-8)
        assert num.psi_y == pytest.approx(cl.psi_y, abs=1e-8)

    def test_matches_closed_form_regime_b(self):
        # tan/arctan closed form read in its real tanh representation
        p = AjdParams(sigma_x=0.0, sigma_y=0.4, m=1.0, mu_x=0.0, mu_y=0.6,
                      jumps=ExponentialJumps(2.0), h=0.25)
        num = solve_riccati_numeric(p, -1.0, 0.0, 2.0)
        cl = solve_riccati_closed(p, -1.0, 0.0, 2.0)
        assert num.phi == pytest.approx(cl.phi, abs=1e-8)
        assert num.psi_x == pytest.approx(cl.psi_x, abs=1e-8)
        assert num.psi_y == pytest.approx(cl.psi_y, abs=1e-8)

    def test_blowup_reported_off_domain(self):
        # psi_x' = sigma^2/2 psi_x^2 explodes for positive initial exponent
        p = regime_a_params(sigma_x=2.0, lam=50.0)
        with pytest.raises(BlowUpError) as exc_info:
            solve_riccati_numeric(p, 3.0, 0.0, 5.0)
        assert 0.0 < exc_info.value.escape_time < 5.0


class TestClosedForm:
    def test_regime_a_zero_u(self):
        p = regime_a_params(sigma_y=0.3)
        tr = solve_riccati_closed(p, 0.0, -0.7, 3.0)
        assert tr.phi == 0.0
        assert tr.psi_x == 0.0
        assert tr.psi_y == pytest.approx(-0.7 / (1.0 + 0.5 * 0.09 * 3.0 * 0.7), rel=1e-12)

    def test_regime_a_psi_x_substitution(self):
        # psi_X = 1/(1/u - sigma^2 t / 2) = -8/9 at u=-1, sigma=0.5, t=1
        p = regime_a_params(m=1.0, lam=2.0, sigma_x=0.5)
        tr = solve_riccati_closed(p, -1.0, 0.0, 1.0)
        assert tr.psi_x == pytest.approx(-8.0 / 9.0, rel=1e-14)

    def test_unsupported_regime_raises(self):
        p = mixed_params()
        with pytest.raises(UnsupportedRegimeError):
            solve_riccati_closed(p, -1.0, 0.0, 1.0)
        # Dirac with both exponents moving has no closed form
        pd = AjdParams(sigma_x=0.4, sigma_y=0.4, m=1.0, mu_x=0.0, mu_y=0.0,
                       jumps=DiracJumps(0.5, 0.5), h=0.25)
        with pytest.raises(UnsupportedRegimeError):
            solve_riccati_closed(pd, -1.0, -1.0, 1.0)

    def test_positive_exponent_rejected(self):
        p = regime_a_params()
        with pytest.raises(ValueError):
            solve_riccati_closed(p, 0.5, 0.0, 1.0)

    @pytest.mark.parametrize("case", ["a_exp", "a_dirac", "b_exp", "b_dirac"])
    def test_closed_equals_numeric_sweep(self, case, rng):
        for _ in range(30):
            m = rng.uniform(0.2, 3.0)
            u = -rng.uniform(0.0, 3.0)
            v = -rng.uniform(0.0, 3.0)
            t = float(rng.choice([0.25, 1.0, 5.0]))
            if case == "a_exp":
                p = regime_a_params(m=m, lam=rng.uniform(0.5, 5.0),
                                    sigma_x=rng.uniform(0.0, 1.0),
                                    sigma_y=rng.uniform(0.0, 1.0))
            elif case == "a_dirac":
                j_y = float(rng.choice([0.0, rng.uniform(0.1, 1.0)]))
                sigma_y = rng.uniform(0.0, 1.0)
                if j_y > 0.0 and sigma_y > 0.0:
                    v = 0.0  # keep a single moving exponent
                p = dirac_params(m=m, j_x=rng.uniform(0.1, 1.5), j_y=j_y,
                                 sigma_x=rng.uniform(0.0, 1.0), sigma_y=sigma_y)
            elif case == "b_exp":
                p = regime_b_params(m=m, mu_y=rng.uniform(0.05, 2.0),
                                    sigma_y=rng.uniform(0.05, 1.0),
                                    lam=rng.uniform(0.5, 5.0))
            else:
                p = AjdParams(sigma_x=0.0, sigma_y=rng.uniform(0.05, 1.0), m=m,
                              mu_x=0.0, mu_y=rng.uniform(0.05, 2.0),
                              jumps=DiracJumps(rng.uniform(0.1, 1.5), 0.0), h=0.25)
            cl = solve_riccati_closed(p, u, v, t)
            num = solve_riccati_numeric(p, u, v, t)
            for name in ("phi", "psi_x", "psi_y"):
                assert getattr(cl, name) == pytest.approx(getattr(num, name), abs=1e-8), (
                    case, p, u, v, t, name)

    def test_ode_residual_by_finite_differences(self):
        # closed-form solutions must satisfy the Riccati right-hand sides
        eps = 1e-5
        cases = [
            (regime_a_params(m=1.3, lam=2.5, sigma_x=0.6, sigma_y=0.4), -1.0, -0.5),
            (regime_b_params(m=0.8, mu_y=0.9, sigma_y=0.5), -1.0, -0.3),
            (dirac_params(m=1.1, j_x=0.7, j_y=0.2, sigma_x=0.5, sigma_y=0.0), -1.2, -0.4),
        ]
        for p, u, v in cases:
            for t in np.arange(0.1, 5.01, 0.7):
                lo = solve_riccati_closed(p, u, v, t - eps)
                hi = solve_riccati_closed(p, u, v, t + eps)
                mid = solve_riccati_closed(p, u, v, t)
                k = jump_transform(p.jumps, mid.psi_x, mid.psi_y)
                dphi = (hi.phi - lo.phi) / (2 * eps)
                dpsi_x = (hi.psi_x - lo.psi_x) / (2 * eps)
                dpsi_y = (hi.psi_y - lo.psi_y) / (2 * eps)
                assert dphi == pytest.approx(p.m * k, abs=1e-6)
                assert dpsi_x == pytest.approx(0.5 * p.sigma_x**2 * mid.psi_x**2, abs=1e-6)
                assert dpsi_y == pytest.approx(
                    0.5 * p.sigma_y**2 * mid.psi_y**2 + p.mu_y * k, abs=1e-6)

    def test_flow_property_regime_a(self, rng):
        # psi_X(s + t, u) = psi_X(s, psi_X(t, u)): the autonomous ODE flow
        p = regime_a_params(sigma_x=0.7)
        for _ in range(50):
            u = -rng.uniform(0.0, 4.0)
            s, t = rng.uniform(0.0, 3.0, size=2)
            direct = solve_riccati_closed(p, u, 0.0, s + t).psi_x
            inner = solve_riccati_closed(p, u, 0.0, t).psi_x
            nested = solve_riccati_closed(p, inner, 0.0, s).psi_x
            assert direct == pytest.approx(nested, abs=1e-10)

    def test_phi_monotone_in_exponent(self):
        p = regime_a_params(sigma_x=0.5)
        us = -np.linspace(0.0, 5.0, 21)
        for t in (0.5, 2.0):
            phis = [solve_riccati_closed(p, float(u), 0.0, t).phi for u in us]
            assert np.all(np.diff(phis) <= 1e-14)


class TestTailLimits:
    def test_regime_a_paper_limit(self):
        # phi_inf = (2m / (lam sigma^2)) log(1 / (lam sigma^2 t / 2 + 1))
        p = regime_a_params(m=1.0, lam=2.0, sigma_x=0.5)
        lim = riccati_limit_u_to_neg_inf(p, 0.0, 1.0)
        assert lim.phi == pytest.approx(4.0 * math.log(1.0 / 1.25), rel=1e-12)
        assert lim.psi_x == pytest.approx(-2.0 / (0.25 * 1.0), rel=1e-12)

    def test_regime_b_phi_limit_is_minus_mt(self):
        p = regime_b_params(m=0.8)
        lim = riccati_limit_u_to_neg_inf(p, 0.0, 1.5)
        assert lim.phi == pytest.approx(-0.8 * 1.5, rel=1e-13)
        assert math.isinf(lim.psi_x)

    def test_regime_b_psi_y_tanh_limit(self):
        # psi_Y(t, -inf, 0) = -sqrt(2 mu/sigma^2) tanh(t sqrt(mu sigma^2 / 2))
        p = regime_b_params(m=0.8, mu_y=0.7, sigma_y=0.5)
        lim = riccati_limit_u_to_neg_inf(p, 0.0, 2.0)
        expected = -math.sqrt(2 * 0.7 / 0.25) * math.tanh(2.0 * math.sqrt(0.5 * 0.7 * 0.25))
        assert lim.psi_y == pytest.approx(expected, rel=1e-12)

    def test_extrapolation_consistent_with_closed_in_regime_a(self):
        from creditfx.riccati import _limit_extrapolated

        p = regime_a_params(m=1.2, lam=1.8, sigma_x=0.6, sigma_y=0.3)
        closed = riccati_limit_u_to_neg_inf(p, -0.4, 1.3)
        extr = _limit_extrapolated(p, -0.4, 1.3)
        assert extr.phi == pytest.approx(closed.phi, abs=2e-9)
        assert extr.psi_y == pytest.approx(closed.psi_y, abs=2e-9)
        assert extr.psi_x == pytest.approx(closed.psi_x, rel=1e-6)

    def test_mixed_regime_limit_converges(self):
        p = mixed_params()
        lim = riccati_limit_u_to_neg_inf(p, 0.0, 1.5)
        assert math.isfinite(lim.phi)
        assert lim.psi_x < 0.0
        assert lim.psi_y < 0.0

    def test_dirac_tail_with_e1(self):
        # closed E1-based limit vs the extrapolated value
        from creditfx.riccati import _limit_extrapolated

        p = dirac_params(m=1.0, j_x=0.6, sigma_x=0.5)
        closed = riccati_limit_u_to_neg_inf(p, 0.0, 1.0)
        extr = _limit_extrapolated(p, 0.0, 1.0)
        assert closed.phi == pytest.approx(extr.phi, abs=2e-9)
