import numpy as np
import pytest

from creditfx import AjdParams, DiracJumps, ExponentialJumps


def regime_a_params(m=1.0, lam=2.0, sigma_x=0.5, sigma_y=0.0, h=0.25, x0=0.0, y0=0.0):
    """mu_x = mu_y = 0: deterministic jump intensity."""
    return AjdParams(sigma_x=sigma_x, sigma_y=sigma_y, m=m, mu_x=0.0, mu_y=0.0,
                     jumps=ExponentialJumps(lam), x0=x0, y0=y0, h=h)


def regime_b_params(m=0.8, mu_y=0.7, sigma_y=0.5, lam=2.0, y0=0.6, h=0.25, x0=0.0):
    """mu_x = 0, sigma_x = 0, mu_y > 0: self-exciting intensity, jump-only X."""
    return AjdParams(sigma_x=0.0, sigma_y=sigma_y, m=m, mu_x=0.0, mu_y=mu_y,
                     jumps=ExponentialJumps(lam), x0=x0, y0=y0, h=h)


def mixed_params(m=0.8, mu_x=0.4, mu_y=0.3, sigma_x=0.45, sigma_y=0.5,
                 lam=2.0, x0=0.0, y0=0.4, h=0.25):
    """No closed form: both feedback loadings active with diffusion."""
    return AjdParams(sigma_x=sigma_x, sigma_y=sigma_y, m=m, mu_x=mu_x, mu_y=mu_y,
                     jumps=ExponentialJumps(lam), x0=x0, y0=y0, h=h)


def dirac_params(m=1.0, j_x=0.6, j_y=0.0, sigma_x=0.5, sigma_y=0.0, h=0.25, x0=0.0, y0=0.0):
    return AjdParams(sigma_x=sigma_x, sigma_y=sigma_y, m=m, mu_x=0.0, mu_y=0.0,
                     jumps=DiracJumps(j_x, j_y), x0=x0, y0=y0, h=h)


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)
