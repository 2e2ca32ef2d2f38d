//! Adaptive Simpson quadrature.


#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` by adaptive Simpson bisection until the
/// local Richardson error estimate drops below `rel_tol * |I|` (with an
/// absolute floor for integrals near zero).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    // Coarse magnitude from a 9-point pass sets the absolute tolerance.
    let coarse = {
        let h = (b - a) / 8.0;
        let mut s = 0.0;
        for i in 0..=8 {
            s += f(a + h * i as f64).abs();
        }
        s * (b - a) / 9.0
    };
    let tol = (rel_tol * coarse).max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
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
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_trig() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, PI, 1e-10);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&|_x: f64| 1.0, 1.0, 1.0, 1e-9), 0.0);
    }
}
