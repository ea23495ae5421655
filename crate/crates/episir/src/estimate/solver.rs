/// Derivative-free bounded scalar minimization.
///
/// A coarse grid scan brackets the global minimum (the objective need not be
/// convex or unimodal over the whole interval), then golden-section search
/// refines the bracket to absolute tolerance `tol` on the argument.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const GRID: usize = 64;
    let step = (hi - lo) / GRID as f64;
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    for idx in 0..=GRID {
        let x = lo + idx as f64 * step;
        let v = f(x);
        if v < best_val {
            best_val = v;
            best_idx = idx;
        }
    }
    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let x = minimize_scalar(|x| (x - 0.731).powi(2), 0.0, 2.0, 1e-10);
        assert!((x - 0.731).abs() < 1e-9);
    }

    #[test]
    fn boundary_minimum() {
        let x = minimize_scalar(|x| x, 0.0, 2.0, 1e-10);
        assert!(x < 1e-8);
        let x = minimize_scalar(|x| -x, 0.0, 2.0, 1e-10);
        assert!((x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn grid_finds_global_minimum_among_local_ones() {
        // Two wells, the deeper one near 1.7.
        let f = |x: f64| (x - 0.3).powi(2).min((x - 1.7).powi(2) - 0.1);
        let x = minimize_scalar(f, 0.0, 2.0, 1e-10);
        assert!((x - 1.7).abs() < 1e-6);
    }
}
