"""Decay-rate extraction and smallness monitors.

Three layers: power-law fits of slice series against the model
C s^{-alpha} (s/t)^{beta}; bootstrap-style suprema that certify uniform
smallness of weighted energies across a run; and a flat-time observer
recording sup-norm decay of weighted amplitudes for the endpoint
pointwise statements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import WindowView


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log|q| = log C - alpha log s + beta log(s/t)."""

    quantity: str
    alpha: float
    beta: float
    C: float
    residual: float
    n_samples: int
    s_min: float
    s_max: float


def fit_decay(s, st_ratio, values, quantity: str = "q",
              min_spread: float = 0.05) -> DecayFit:
    """Fit a two-exponent power law to a positive series.

    ``st_ratio`` is s/t at each sample.  Nonpositive values are dropped
    (log model).  When the s/t column is nearly constant across samples
    (spread below ``min_spread`` in log), the beta direction is removed
    from the design instead of letting the normal equations go singular.
    """
    s = np.asarray(s, dtype=float)
    st_ratio = np.asarray(st_ratio, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = (values > 0) & np.isfinite(values) & (s > 0) & (st_ratio > 0)
    s, st_ratio, values = s[keep], st_ratio[keep], values[keep]
    if s.size < 3:
        raise ValueError(f"need at least 3 positive samples, have {s.size}")
    if np.ptp(np.log(s)) < min_spread:
        raise ValueError("s-range too narrow to identify a decay exponent")
    ls, lr, lv = np.log(s), np.log(st_ratio), np.log(values)
    with_beta = np.ptp(lr) >= min_spread
    cols = [np.ones_like(ls), -ls] + ([lr] if with_beta else [])
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    fitted = A @ coef
    resid = float(np.sqrt(np.mean((lv - fitted) ** 2)))
    return DecayFit(quantity=quantity, alpha=float(coef[1]),
                    beta=float(coef[2]) if with_beta else 0.0,
                    C=float(np.exp(coef[0])), residual=resid,
                    n_samples=int(s.size), s_min=float(s.min()),
                    s_max=float(s.max()))


def certified_rate(fit: DecayFit) -> float:
    """Exponent gamma such that |q| <= C' s^{-gamma} on the cone interior.

    For beta >= 0 the ratio factor only helps ((s/t) <= 1).  For beta < 0
    use t < s^2 inside the shell (t - r > 1 gives s^2 > t + r): then
    (t/s)^{-beta} < s^{-beta}, costing |beta| off the rate.
    """
    return fit.alpha + min(fit.beta, 0.0)


# ---------------------------------------------------------------------------
# bootstrap-style smallness monitors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapConfig:
    """Weights for the uniform-smallness ledger of one run."""

    delta: float = 0.05
    #: growth allowance on the conformal energy: s^{1+delta} (primary) and
    #: the sharper s^{1/2+delta} variant, both reported
    conformal_powers: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.delta < 0.25:
            raise ValueError("delta must lie in (0, 1/4)")
        if not self.conformal_powers:
            object.__setattr__(self, "conformal_powers",
                               (1.0 + self.delta, 0.5 + self.delta))


@dataclass(frozen=True)
class SupStat:
    name: str
    sup: float
    s_at: float
    series: np.ndarray


def _sup(name, s, series) -> SupStat:
    i = int(np.argmax(series))
    return SupStat(name=name, sup=float(series[i]), s_at=float(s[i]),
                   series=np.asarray(series, dtype=float))


def bootstrap_monitor(s, e2_wave, e0c_kg, sup_sdtu, eps: float,
                      config: BootstrapConfig = BootstrapConfig()) -> dict[str, SupStat]:
    """Normalized suprema over a slice ladder.

    Inputs are series over the hyperboloid times ``s``: the conformal
    energy of the wave field, the mass-weighted flat energy of the
    Klein-Gordon field, and the pointwise sup of s |d_t u|.  Every entry
    divides by eps, so bounded O(1) values certify the linear-in-size
    smallness that a bootstrap argument consumes.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = np.asarray(s, dtype=float)
    root_e2 = np.sqrt(np.asarray(e2_wave, dtype=float))
    root_e0 = np.sqrt(np.asarray(e0c_kg, dtype=float))
    out: dict[str, SupStat] = {}
    for power in config.conformal_powers:
        key = f"conformal_wave_s{power:g}"
        out[key] = _sup(key, s, root_e2 / s**power / eps)
    out["conformal_wave_linear"] = _sup("conformal_wave_linear",
                                        s, root_e2 / s / eps)
    out["energy_kg_sdelta"] = _sup("energy_kg_sdelta",
                                   s, root_e0 / s**config.delta / eps)
    out["energy_kg_flat"] = _sup("energy_kg_flat", s, root_e0 / eps)
    out["pointwise_sdtu"] = _sup("pointwise_sdtu",
                                 s, np.asarray(sup_sdtu, dtype=float) / eps)
    return out


def monitor_flatness(stat: SupStat, s) -> float:
    """Log-log slope of a monitor series over the upper half of the run;
    near-zero or negative slopes mean the supremum has saturated."""
    s = np.asarray(s, dtype=float)
    half = s >= np.sqrt(s[0] * s[-1])
    vals = stat.series[half]
    if np.any(vals <= 0):
        return 0.0
    A = np.stack([np.ones(half.sum()), np.log(s[half])], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(vals), rcond=None)
    return float(coef[1])


# ---------------------------------------------------------------------------
# flat-time amplitude tracking
# ---------------------------------------------------------------------------

class AmplitudeTracker:
    """Observer recording weighted sup-norms on constant-t levels.

    At every ``stride``-th band it evaluates, over the interior r < t - 1:

      * for each wave field:  sqrt(t) sqrt(1 + t - r) max(|d_t|, |d_x|, |d_y|)
      * for each mass field:  t |v|

    the weights of the endpoint pointwise decay statements.  Arrays are
    processed in row blocks to keep transient memory flat on big grids.
    """

    max_order = 1

    def __init__(self, wave_fields=("u",), kg_fields=("v",),
                 stride: int = 8, block_rows: int = 1536):
        self.wave_fields = tuple(wave_fields)
        self.kg_fields = tuple(kg_fields)
        self.stride = max(1, int(stride))
        self.block_rows = int(block_rows)
        self.times: list[float] = []
        self.sups: dict[str, list[float]] = {
            **{f"wave_{f}": [] for f in self.wave_fields},
            **{f"kg_{f}": [] for f in self.kg_fields}}

    def on_band(self, view: WindowView, j: int) -> None:
        if j % self.stride:
            return
        if j - 1 < view.offset or j + 1 > view.newest:
            return  # centered time stencil would leave the window
        t = view.time_of(j)
        if t <= 1.0:
            return
        n = view.grid.n
        h = view.grid.h
        coords = view.grid.coords()
        sup_here = {k: 0.0 for k in self.sups}
        inv2h = 0.5 / h
        inv2dt = 0.5 / view.dt
        for row0 in range(1, n - 1, self.block_rows):
            row1 = min(row0 + self.block_rows, n - 1)
            rows = slice(row0, row1)
            X = coords[None, 1:-1]
            Y = coords[rows, None]
            R = np.hypot(X, Y)
            mask = R < t - 1.0
            if not mask.any():
                continue
            for f in self.wave_fields:
                A0 = view.arr(f, j)
                dt_f = (view.arr(f, j + 1)[rows, 1:-1]
                        - view.arr(f, j - 1)[rows, 1:-1]) * inv2dt
                dx_f = (A0[rows, 2:] - A0[rows, :-2]) * inv2h
                dy_f = (A0[row0 + 1:row1 + 1, 1:-1]
                        - A0[row0 - 1:row1 - 1, 1:-1]) * inv2h
                grad = np.maximum(np.abs(dt_f),
                                  np.maximum(np.abs(dx_f), np.abs(dy_f)))
                w = np.sqrt(t) * np.sqrt(1.0 + t - R)
                val = np.max(np.where(mask, w * grad, 0.0))
                sup_here[f"wave_{f}"] = max(sup_here[f"wave_{f}"], float(val))
            for f in self.kg_fields:
                A0 = view.arr(f, j)[rows, 1:-1]
                val = np.max(np.where(mask, t * np.abs(A0), 0.0))
                sup_here[f"kg_{f}"] = max(sup_here[f"kg_{f}"], float(val))
        self.times.append(t)
        for k, v in sup_here.items():
            self.sups[k].append(v)

    def finalize(self, view: WindowView) -> None:
        pass

    def series(self) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        return (np.asarray(self.times),
                {k: np.asarray(v) for k, v in self.sups.items()})


def theorem_decay_check(times, sups, eps: float,
                        slope_tol: float = 0.1) -> dict:
    """Endpoint pointwise statement for one weighted sup series.

    Normalizes by eps, takes the log-t trend over the upper half of the
    time range, and reports the supremum with a flatness verdict: a
    trend slope at most ``slope_tol`` means the weighted amplitude has
    stopped growing, i.e. the claimed rates are saturated, not slack.
    """
    t = np.asarray(times, dtype=float)
    q = np.asarray(sups, dtype=float) / eps
    if t.size < 6:
        raise ValueError("need at least 6 samples for a trend")
    half = t >= np.sqrt(t[0] * t[-1])
    vals = q[half]
    if np.any(vals <= 0):
        slope = 0.0
    else:
        A = np.stack([np.ones(int(half.sum())), np.log(t[half])], axis=1)
        coef, *_ = np.linalg.lstsq(A, np.log(vals), rcond=None)
        slope = float(coef[1])
    return {"sup": float(q.max()), "late_slope": slope,
            "flat": bool(slope <= slope_tol), "n": int(t.size)}
