//! Quadrature and limit evaluation near removable singularities.

/// Adaptive Simpson integration of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
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
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Evaluates functions that are smooth everywhere but computed by a formula
/// with removable 0/0 or inf-inf points at known abscissae.
///
/// Within `guard` of a listed point, or wherever the direct value is not
/// finite, the value at `x` is taken as the Richardson limit of symmetric
/// averages `(f(x+e) + f(x-e))/2` with `e = step, step/2, step/4`.
#[derive(Debug, Clone)]
pub struct Regularizer {
    points: Vec<f64>,
    guard: f64,
    step: f64,
}

impl Regularizer {
    /// `scale` is the local length scale; offsets are kept below a quarter of
    /// the smallest spacing between listed points.
    pub fn new(mut points: Vec<f64>, scale: f64) -> Regularizer {
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut local = scale;
        for w in points.windows(2) {
            local = local.min(0.25 * (w[1] - w[0]));
        }
        Regularizer {
            points,
            guard: 1e-3 * local,
            step: 1e-2 * local,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    fn near(&self, x: f64) -> bool {
        self.points.iter().any(|&p| (x - p).abs() < self.guard)
    }

    pub fn eval(&self, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        if !self.near(x) {
            let v = f(x);
            if v.is_finite() {
                return v;
            }
        }
        symmetric_limit(&f, x, self.step)
    }
}

/// Richardson extrapolation of symmetric averages around `x`; error
/// `O(step^6)` for smooth `f`.
pub fn symmetric_limit(f: &impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    let avg = |e: f64| 0.5 * (f(x + e) + f(x - e));
    let a0 = avg(step);
    let a1 = avg(0.5 * step);
    let a2 = avg(0.25 * step);
    let r0 = (4.0 * a1 - a0) / 3.0;
    let r1 = (4.0 * a2 - a1) / 3.0;
    (16.0 * r1 - r0) / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-13, 40);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xs: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 / 10.0).collect();
        assert!((trapezoid(&xs, 0.2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn removable_singularity_limit() {
        // sin(x)/x style: (cosh x - 1)/x^2 -> 1/2
        let f = |x: f64| (x.cosh() - 1.0) / (x * x);
        let reg = Regularizer::new(vec![0.0], 1.0);
        assert!((reg.eval(f, 0.0) - 0.5).abs() < 1e-10);
        assert!((reg.eval(f, 2e-4) - f(2e-4)).abs() < 1e-8);
        assert_eq!(reg.eval(f, 0.5), f(0.5));
    }
}
