/// No-intercept least squares for the recovery rate:
/// `gamma_hat = sum_t dr_{t+1} i_t / sum_t i_t^2`.
///
/// Returns `None` when fewer than two usable points exist or every active
/// share is zero.
pub fn fit_gamma_ols(r: &[f64], i: &[f64]) -> Option<f64> {
    assert_eq!(r.len(), i.len());
    if r.len() < 2 {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 0..r.len() - 1 {
        num += (r[t + 1] - r[t]) * i[t];
        den += i[t] * i[t];
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_noiseless_recursion() {
        let gamma = 1.0 / 14.0;
        let i: Vec<f64> = (0..40).map(|t| 0.01 + 0.002 * t as f64).collect();
        let mut r = vec![0.0];
        for t in 0..39 {
            r.push(r[t] + gamma * i[t]);
        }
        let est = fit_gamma_ols(&r, &i).unwrap();
        assert!((est - gamma).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_undefined() {
        assert_eq!(fit_gamma_ols(&[0.1], &[0.2]), None);
        assert_eq!(fit_gamma_ols(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]), None);
    }
}
