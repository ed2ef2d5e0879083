"""Decay fitting and the bootstrap-style smallness monitors."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypslice.decay import (
    BootstrapConfig,
    DecayFit,
    bootstrap_monitor,
    certified_rate,
    fit_decay,
    monitor_flatness,
    theorem_decay_check,
)


def _synthetic(alpha, beta, C=2.0, n=40, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    s = np.geomspace(2.0, 20.0, n)
    ratio = rng.uniform(0.2, 1.0, size=n)
    vals = C * s ** (-alpha) * ratio**beta
    if noise:
        vals *= np.exp(rng.normal(0.0, noise, size=n))
    return s, ratio, vals


@settings(max_examples=30)
@given(alpha=st.floats(-1.0, 3.0), beta=st.floats(-2.0, 2.0),
       C=st.floats(0.1, 50.0))
def test_fit_recovers_exact_power_law(alpha, beta, C):
    s, ratio, vals = _synthetic(alpha, beta, C=C, seed=4)
    fit = fit_decay(s, ratio, vals)
    assert fit.alpha == pytest.approx(alpha, abs=1e-8)
    assert fit.beta == pytest.approx(beta, abs=1e-8)
    assert fit.C == pytest.approx(C, rel=1e-7)
    assert fit.residual < 1e-10
    assert fit.n_samples == s.size
    assert (fit.s_min, fit.s_max) == (pytest.approx(2.0), pytest.approx(20.0))


def test_fit_tolerates_noise():
    s, ratio, vals = _synthetic(1.0, 0.5, noise=0.02, seed=7)
    fit = fit_decay(s, ratio, vals)
    assert fit.alpha == pytest.approx(1.0, abs=0.1)
    assert 0.0 < fit.residual < 0.05


def test_fit_drops_nonpositive_samples():
    s = np.geomspace(2.0, 20.0, 12)
    vals = 3.0 / s
    vals[3] = 0.0
    vals[7] = -1.0
    fit = fit_decay(s, np.full_like(s, 0.5), vals)
    assert fit.n_samples == 10
    assert fit.alpha == pytest.approx(1.0, abs=1e-8)


def test_fit_degenerate_ratio_column():
    """Constant s/t kills the beta direction instead of going singular."""
    s = np.geomspace(2.0, 20.0, 12)
    fit = fit_decay(s, np.full_like(s, 0.7), 5.0 * s**-2)
    assert fit.beta == 0.0
    assert fit.alpha == pytest.approx(2.0, abs=1e-8)


def test_fit_rejects_thin_data():
    with pytest.raises(ValueError, match="3 positive samples"):
        fit_decay([2.0, 3.0], [0.5, 0.5], [1.0, 1.0])
    s = np.full(8, 5.0) * (1 + 1e-6 * np.arange(8))
    with pytest.raises(ValueError, match="narrow"):
        fit_decay(s, np.full(8, 0.5), np.ones(8))


def test_certified_rate_direction():
    base = dict(quantity="q", C=1.0, residual=0.0, n_samples=10,
                s_min=2.0, s_max=20.0)
    assert certified_rate(DecayFit(alpha=1.0, beta=0.5, **base)) == 1.0
    assert certified_rate(DecayFit(alpha=1.0, beta=-0.5, **base)) == 0.5


# ---------------------------------------------------------------------------
# bootstrap monitors
# ---------------------------------------------------------------------------

def test_bootstrap_config_defaults():
    cfg = BootstrapConfig()
    assert cfg.conformal_powers == (1.0 + cfg.delta, 0.5 + cfg.delta)
    with pytest.raises(ValueError):
        BootstrapConfig(delta=0.3)


def test_bootstrap_monitor_normalization():
    s = np.linspace(2.0, 10.0, 17)
    eps = 0.01
    # conformal energy growing exactly like (eps s)^2: the linear monitor
    # is identically 1
    e2 = (eps * s) ** 2
    e0 = np.full_like(s, eps**2)
    sdtu = 0.5 * eps * np.ones_like(s)
    out = bootstrap_monitor(s, e2, e0, sdtu, eps)
    assert out["conformal_wave_linear"].sup == pytest.approx(1.0)
    assert out["energy_kg_flat"].sup == pytest.approx(1.0)
    assert out["pointwise_sdtu"].sup == pytest.approx(0.5)
    # eps-linearity: scaling all inputs with eps leaves monitors unchanged
    out2 = bootstrap_monitor(s, 4.0 * e2, 4.0 * e0, 2.0 * sdtu, 2.0 * eps)
    for k in out:
        assert out2[k].sup == pytest.approx(out[k].sup, rel=1e-12)


def test_bootstrap_monitor_records_argmax():
    s = np.linspace(2.0, 10.0, 9)
    series = np.ones_like(s)
    series[5] = 3.0
    out = bootstrap_monitor(s, series**2, series**2, series, 1.0)
    assert out["pointwise_sdtu"].s_at == pytest.approx(s[5])
    assert out["pointwise_sdtu"].sup == pytest.approx(3.0)


def test_bootstrap_monitor_rejects_bad_eps():
    s = np.linspace(2.0, 10.0, 5)
    with pytest.raises(ValueError):
        bootstrap_monitor(s, s, s, s, 0.0)


def test_monitor_flatness_slope():
    s = np.geomspace(2.0, 32.0, 40)
    stat_flat = bootstrap_monitor(s, s**2, np.ones_like(s), np.ones_like(s),
                                  1.0)["conformal_wave_linear"]
    assert abs(monitor_flatness(stat_flat, s)) < 1e-8
    growing = bootstrap_monitor(s, s**3, np.ones_like(s), np.ones_like(s),
                                1.0)["conformal_wave_linear"]
    assert monitor_flatness(growing, s) == pytest.approx(0.5, abs=1e-6)


# ---------------------------------------------------------------------------
# endpoint decay verdicts
# ---------------------------------------------------------------------------

def test_theorem_decay_check_flat_series():
    t = np.geomspace(3.0, 40.0, 30)
    sups = 0.08 * np.ones_like(t)
    out = theorem_decay_check(t, sups, eps=0.08)
    assert out["sup"] == pytest.approx(1.0)
    assert out["flat"] and abs(out["late_slope"]) < 1e-10
    assert out["n"] == 30


def test_theorem_decay_check_flags_growth():
    t = np.geomspace(3.0, 40.0, 30)
    out = theorem_decay_check(t, 0.01 * t**0.5, eps=0.01)
    assert not out["flat"]
    assert out["late_slope"] == pytest.approx(0.5, abs=1e-8)


def test_theorem_decay_check_needs_samples():
    with pytest.raises(ValueError):
        theorem_decay_check([2, 3, 4], [1, 1, 1], eps=1.0)
