//! Adaptive Simpson quadrature for the 1D boundary-value oracles.

/// Adaptive Simpson integration of `f` over `[a, b]` to relative
/// tolerance `rel_tol` (with a small absolute floor for vanishing
/// integrals). Recursion depth is capped; the estimate at the cap is used.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // Seed the scale with a coarse composite pass so the relative tolerance
    // is measured against the whole integral, not a local panel.
    let mut scale = 0.0;
    let pieces = 64;
    let hstep = (b - a) / pieces as f64;
    for k in 0..pieces {
        let x0 = a + k as f64 * hstep;
        scale += simpson(x0, x0 + hstep, f(x0), f(x0 + 0.5 * hstep), f(x0 + hstep)).abs();
    }
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    adapt(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        assert_relative_eq!(v, 20.0 - 8.0 + 4.0, epsilon = 1e-10);
    }

    #[test]
    fn sharp_exponential_peak() {
        // int of e^{-200 (x-0.3)^2} over [0,1] = sqrt(pi/200) erf-corrections
        let v = integrate(&|x: f64| (-200.0 * (x - 0.3f64).powi(2)).exp(), 0.0, 1.0, 1e-10);
        let exact = (std::f64::consts::PI / 200.0).sqrt();
        assert_relative_eq!(v, exact, max_relative = 1e-8);
    }
}
