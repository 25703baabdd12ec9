"""High-order strained-time series for nonlinear oscillators.

The frequency and periodic solution of the Duffing, sextic, octic and Van der
Pol oscillators are expanded order by order around a linear oscillator of
shifted stiffness ``1 + lam2``.  The free parameter ``lam2`` is then chosen
where the truncated frequency is stationary.  Numerical reference solutions
live in :mod:`lplde.oracle`.
"""

__version__ = "0.1.0"

from .core import (
    DUFFING,
    OCTIC,
    SEXTIC,
    VAN_DER_POL,
    Conservative,
    Convention,
    ExpansionResult,
    ProblemSpec,
    VanDerPol,
    beta_coefficients,
    expand,
    expand_conservative,
    expand_vdp,
    extract_kappa,
    fit_kappa_decay,
    fourier_coefficients,
    residual_check,
)
from .errors import *  # noqa: F401,F403
from .oracle import (
    OracleResult,
    energy_defect,
    error_metric,
    exact_period_conservative,
    fourier_from_trajectory,
    period_error,
    rk_period_conservative,
    vdp_limit_cycle,
)
from .pms import PMSResult, pms_search, third_order_lambda_sq, vdp_lambda_fit
from .ring import EXACT, BigFloat, BigFloatRing, RationalRing, scalar_from_str, scalar_to_str
from .trig import TrigSeries
