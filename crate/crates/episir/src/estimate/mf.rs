/// Result of one multiplication-factor update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfEstimate {
    /// `None` when the denominator is non-positive (the caller carries the
    /// previous estimate forward).
    pub value: Option<f64>,
    /// True when the raw ratio fell below 1 and was clamped.
    pub clamped: bool,
}

/// Simulated-moments update of the multiplication factor at day `t`.
///
/// `survival[tau]` must hold the ensemble mean `B^-1 sum_b e^{-beta_{tau-1}
/// i^{(b)}_{tau-1}}` for each day in the window `(t - w_m, t]`. The estimate
/// is the ratio of window means
/// `avg(1 - survival_tau) / avg(c_tau - survival_tau * c_{tau-1})`, clamped
/// below at 1 since under-reporting cannot be negative.
pub fn estimate_mf_window(
    c_tilde: &[f64],
    survival: &[Option<f64>],
    t: usize,
    w_m: usize,
) -> MfEstimate {
    assert_eq!(c_tilde.len(), survival.len());
    let undefined = MfEstimate {
        value: None,
        clamped: false,
    };
    if t >= c_tilde.len() || t + 1 < w_m + 1 {
        return undefined;
    }
    let lo = t + 1 - w_m;
    if lo == 0 {
        return undefined;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for tau in lo..=t {
        let g = match survival[tau] {
            Some(g) => g,
            None => return undefined,
        };
        num += 1.0 - g;
        den += c_tilde[tau] - g * c_tilde[tau - 1];
    }
    if den <= 0.0 {
        return undefined;
    }
    let raw = num / den;
    if raw < 1.0 {
        MfEstimate {
            value: Some(1.0),
            clamped: true,
        }
    } else {
        MfEstimate {
            value: Some(raw),
            clamped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Build observed data and exact survival factors for a constant true MF.
    fn synthetic(m: f64, days: usize) -> (Vec<f64>, Vec<Option<f64>>) {
        // True epidemic follows the single-group moment recursion.
        let beta = 0.25;
        let gamma = 1.0 / 14.0;
        let (c, r) = crate::estimate::beta::moment_path(0.002, |_| beta, gamma, days);
        let c_tilde: Vec<f64> = c.iter().map(|c| c / m).collect();
        // survival[tau] = e^{-beta i_{tau-1}} with the true actives.
        let survival: Vec<Option<f64>> = (0..days)
            .map(|tau| {
                if tau == 0 {
                    None
                } else {
                    Some((-beta * (c[tau - 1] - r[tau - 1])).exp())
                }
            })
            .collect();
        (c_tilde, survival)
    }

    #[test]
    fn recovers_constant_multiplication_factor() {
        let (c_tilde, survival) = synthetic(5.0, 80);
        let est = estimate_mf_window(&c_tilde, &survival, 60, 14);
        let m = est.value.unwrap();
        assert!(!est.clamped);
        assert!((m - 5.0).abs() < 0.05, "m {m}");
    }

    #[test]
    fn no_misreporting_yields_one() {
        let (c_tilde, survival) = synthetic(1.0, 80);
        let est = estimate_mf_window(&c_tilde, &survival, 60, 14);
        let m = est.value.unwrap();
        assert!((m - 1.0).abs() < 1e-6, "m {m}");
    }

    #[test]
    fn flat_zero_series_is_undefined() {
        let c_tilde = vec![0.0; 40];
        let survival: Vec<Option<f64>> = vec![Some(1.0); 40];
        let est = estimate_mf_window(&c_tilde, &survival, 30, 14);
        assert_eq!(est.value, None);
    }
}
