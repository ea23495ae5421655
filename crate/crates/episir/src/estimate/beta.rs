use super::solver::minimize_scalar;

/// Search interval for the daily transmission rate; the upper end admits
/// reproduction numbers up to 28 at a two-week recovery time.
pub const BETA_SEARCH_MAX: f64 = 2.0;

/// Solver tolerance on the fitted rate.
pub const BETA_TOL: f64 = 1e-10;

/// Nonlinear least squares for the transmission rate on one window.
///
/// Minimizes `sum_{tau=t-w+1..t} [(1-c_tau)/(1-c_{tau-1}) - e^{-beta i_{tau-1}}]^2`
/// over `beta ∈ [0, 2]`. Returns `None` when the window does not fit in the
/// series or every lagged active share in the window is zero (the objective
/// is then flat and the estimate undefined).
pub fn fit_beta_window(c: &[f64], i: &[f64], t: usize, window: usize) -> Option<f64> {
    if window < 2 || t >= c.len() || t < window {
        return None;
    }
    let lo = t - window + 1;
    if (lo..=t).all(|tau| i[tau - 1] == 0.0) {
        return None;
    }
    let objective = |beta: f64| {
        let mut sum = 0.0;
        for tau in lo..=t {
            let ratio = (1.0 - c[tau]) / (1.0 - c[tau - 1]);
            let resid = ratio - (-beta * i[tau - 1]).exp();
            sum += resid * resid;
        }
        sum
    };
    Some(minimize_scalar(objective, 0.0, BETA_SEARCH_MAX, BETA_TOL))
}

/// Rolling-window transmission-rate estimates for every day of the series.
///
/// Entry `t` holds the estimate from the window ending at `t`; days whose
/// window does not fit or is degenerate are `None`.
pub fn fit_beta_rolling(c: &[f64], i: &[f64], window: usize) -> Vec<Option<f64>> {
    assert_eq!(c.len(), i.len());
    (0..c.len())
        .map(|t| fit_beta_window(c, i, t, window))
        .collect()
}

/// Deterministic single-group moment recursion, used by tests and synthetic
/// benchmarks: `c_{t+1} = 1 - (1 - c_t) e^{-beta_t i_t}`,
/// `r_{t+1} = (1 - gamma) r_t + gamma c_t`.
pub fn moment_path(c1: f64, beta: impl Fn(usize) -> f64, gamma: f64, days: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = vec![c1];
    let mut r = vec![0.0];
    for t in 0..days - 1 {
        let i_t = c[t] - r[t];
        c.push(1.0 - (1.0 - c[t]) * (-beta(t) * i_t).exp());
        r.push((1.0 - gamma) * r[t] + gamma * c[t]);
    }
    (c, r)
}
