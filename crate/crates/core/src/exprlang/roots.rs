use serde::Serialize;

use super::{ExprError, ParsedFunction};

pub const DEFAULT_SCAN_POINTS: usize = 2048;
const MIN_SCAN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Zero,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub location: f64,
    pub kind: RootKind,
    /// |f| at a zero, |1/f| at a pole.
    pub residual: f64,
}

/// Two roots closer together than one scan cell; the scan may have missed
/// further structure between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionWarning {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub warnings: Vec<ResolutionWarning>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.location).collect()
    }
}

/// Zeros of `xi` on `interval` at the given scan resolution.
pub fn locate_roots(
    f: &ParsedFunction,
    interval: (f64, f64),
    scan_points: usize,
) -> Result<RootSet, ExprError> {
    locate_zeros_of(
        |x| f.eval(0, x),
        |x| f.eval(1, x),
        interval,
        scan_points,
    )
}

/// Simple poles of `f`, found as zeros of `1/f` at which `|f|` blows up.
pub fn locate_poles(
    f: &ParsedFunction,
    interval: (f64, f64),
    scan_points: usize,
) -> Result<RootSet, ExprError> {
    check_interval(interval, scan_points)?;
    let (a, b) = interval;
    let xs = scan_grid(a, b, scan_points);
    let fv: Vec<f64> = xs.iter().map(|&x| f.eval(0, x)).collect();
    let typical = typical_magnitude(&fv);
    let recip = |x: f64| {
        let v = f.eval(0, x);
        if v.is_infinite() {
            0.0
        } else {
            1.0 / v
        }
    };
    let gv: Vec<f64> = fv
        .iter()
        .map(|&v| if v.is_infinite() { 0.0 } else { 1.0 / v })
        .collect();

    let width = b - a;
    let big = 1e8 * typical;
    let mut found = Vec::new();
    for cand in sign_change_candidates(&xs, &gv) {
        let x = match cand {
            Candidate::Exact(x) => x,
            Candidate::Bracket(lo, hi) => bisect(&recip, lo, hi),
        };
        let fx = f.eval(0, x);
        if !(fx.is_nan() || fx.abs() >= big) {
            // sign change of 1/f through a zero of f, not a pole
            continue;
        }
        let eps = 1e-6 * width.max(1e-300);
        let right = f.eval(0, x + eps) * eps;
        let left = f.eval(0, x - eps) * (-eps);
        let consistent = right.is_finite()
            && left.is_finite()
            && right != 0.0
            && (right - left).abs() <= 1e-3 * right.abs();
        if !consistent {
            return Err(ExprError::SimplicityViolation {
                location: x,
                kind: RootKind::Pole,
                indicator: (right - left).abs(),
            });
        }
        found.push(Root {
            location: x,
            kind: RootKind::Pole,
            residual: recip(x).abs(),
        });
    }

    // even-order poles: |f| peaks without a sign change of 1/f
    for i in 1..xs.len() - 1 {
        let (l, m, r) = (fv[i - 1].abs(), fv[i].abs(), fv[i + 1].abs());
        if !(m.is_finite() && m >= l && m >= r && m > 1e3 * typical) {
            continue;
        }
        if fv[i - 1].signum() != fv[i].signum() || fv[i].signum() != fv[i + 1].signum() {
            continue;
        }
        let peak = golden_min(|x| -f.eval(0, x).abs(), xs[i - 1], xs[i + 1]);
        let mag = f.eval(0, peak).abs();
        if mag.is_nan() || mag > big {
            return Err(ExprError::SimplicityViolation {
                location: peak,
                kind: RootKind::Pole,
                indicator: 0.0,
            });
        }
    }

    Ok(finish(found, &xs))
}

/// Generic zero finder on a scalar function with derivative.
///
/// Sign changes on the scan grid are bracketed, refined by bisection and
/// polished with Newton steps. Brackets that converge onto a pole (|f|
/// blowing up) are discarded. Zeros with vanishing slope, and touching
/// zeros without a sign change, are reported as simplicity violations.
pub fn locate_zeros_of(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    interval: (f64, f64),
    scan_points: usize,
) -> Result<RootSet, ExprError> {
    check_interval(interval, scan_points)?;
    let (a, b) = interval;
    let xs = scan_grid(a, b, scan_points);
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let typical = typical_magnitude(&vs);
    let width = b - a;
    let slope_floor = 1e-7 * typical / width;

    let mut found = Vec::new();
    let accept = |x: f64, found: &mut Vec<Root>| -> Result<(), ExprError> {
        let fx = f(x);
        if !(fx.abs() <= 1e-6 * typical) {
            return Ok(());
        }
        let slope = df(x);
        if !(slope.abs() > slope_floor) {
            return Err(ExprError::SimplicityViolation {
                location: x,
                kind: RootKind::Zero,
                indicator: slope.abs(),
            });
        }
        found.push(Root {
            location: x,
            kind: RootKind::Zero,
            residual: fx.abs(),
        });
        Ok(())
    };

    for cand in sign_change_candidates(&xs, &vs) {
        let x = match cand {
            Candidate::Exact(x) => x,
            Candidate::Bracket(lo, hi) => newton_polish(&f, &df, bisect(&f, lo, hi), lo, hi),
        };
        accept(x, &mut found)?;
    }

    // touching zeros and root pairs hidden inside one scan cell
    for i in 1..xs.len() - 1 {
        let (l, m, r) = (vs[i - 1], vs[i], vs[i + 1]);
        if !(l.is_finite() && m.is_finite() && r.is_finite()) || m == 0.0 {
            continue;
        }
        if l.signum() != m.signum() || r.signum() != m.signum() {
            continue;
        }
        if !(m.abs() <= l.abs() && m.abs() <= r.abs() && m.abs() < 1e-2 * typical) {
            continue;
        }
        let xm = golden_min(|x| m.signum() * f(x), xs[i - 1], xs[i + 1]);
        let fm = f(xm);
        if fm.signum() != m.signum() && fm != 0.0 {
            // two simple roots inside the cell
            let x1 = newton_polish(&f, &df, bisect(&f, xs[i - 1], xm), xs[i - 1], xm);
            let x2 = newton_polish(&f, &df, bisect(&f, xm, xs[i + 1]), xm, xs[i + 1]);
            accept(x1, &mut found)?;
            accept(x2, &mut found)?;
        } else if fm.abs() <= 1e-10 * typical {
            return Err(ExprError::SimplicityViolation {
                location: xm,
                kind: RootKind::Zero,
                indicator: df(xm).abs(),
            });
        }
    }

    Ok(finish(found, &xs))
}

fn check_interval(interval: (f64, f64), scan_points: usize) -> Result<(), ExprError> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) || scan_points < MIN_SCAN_POINTS {
        return Err(ExprError::InvalidInterval(a, b));
    }
    Ok(())
}

fn scan_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
}

fn typical_magnitude(vs: &[f64]) -> f64 {
    let mut mags: Vec<f64> = vs.iter().filter(|v| v.is_finite()).map(|v| v.abs()).collect();
    if mags.is_empty() {
        return 1.0;
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mags[mags.len() / 2];
    if median > 0.0 {
        median
    } else {
        mags.last().copied().filter(|&m| m > 0.0).unwrap_or(1.0)
    }
}

enum Candidate {
    Exact(f64),
    Bracket(f64, f64),
}

fn sign_change_candidates(xs: &[f64], vs: &[f64]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if vs[i] == 0.0 {
            out.push(Candidate::Exact(xs[i]));
            continue;
        }
        if i + 1 < xs.len() {
            let (p, q) = (vs[i], vs[i + 1]);
            if p.is_finite() && q.is_finite() && q != 0.0 && (p < 0.0) != (q < 0.0) {
                out.push(Candidate::Bracket(xs[i], xs[i + 1]));
            }
        }
    }
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.is_nan() {
            // undefined interior point; keep the half that is still bracketed
            hi = mid;
            continue;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f(lo).abs(), f(hi).abs());
    if a <= b {
        lo
    } else {
        hi
    }
}

fn newton_polish(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    x0: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..4 {
        let d = df(x);
        if !(d.is_finite() && d != 0.0 && fx.is_finite()) {
            break;
        }
        let next = x - fx / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let fn_ = f(next);
        if !(fn_.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn finish(mut found: Vec<Root>, xs: &[f64]) -> RootSet {
    found.sort_by(|p, q| p.location.partial_cmp(&q.location).unwrap());
    found.dedup_by(|p, q| (p.location - q.location).abs() <= 1e-12 * (1.0 + q.location.abs()));
    let cell = xs[1] - xs[0];
    let warnings = found
        .windows(2)
        .filter(|w| w[1].location - w[0].location < cell)
        .map(|w| ResolutionWarning {
            left: w[0].location,
            right: w[1].location,
        })
        .collect();
    RootSet {
        roots: found,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(s: &str) -> ParsedFunction {
        ParsedFunction::parse(s).unwrap()
    }

    #[test]
    fn quartic_zeros_match_bisection_oracle() {
        // independent oracle: plain bisection on the closed form
        let g = |x: f64| x.powi(4) + 2.0 * x * x - 1.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if g(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        assert!((lo * lo - (2f64.sqrt() - 1.0)).abs() < 1e-14);
        let set = locate_roots(&pf("x^4+2*x^2-1"), (-3.0, 3.0), DEFAULT_SCAN_POINTS).unwrap();
        assert_eq!(set.len(), 2);
        assert!((set.roots[0].location + lo).abs() < 1e-12);
        assert!((set.roots[1].location - lo).abs() < 1e-12);
        assert!((set.roots[1].location - 0.643594).abs() < 1e-6);
        for r in &set.roots {
            assert!(r.residual < 1e-12);
        }
    }

    #[test]
    fn sinh_single_zero() {
        let set = locate_roots(&pf("sinh(x)"), (-2.0, 2.0), 257).unwrap();
        assert_eq!(set.locations(), vec![0.0]);
    }

    #[test]
    fn no_real_zeros() {
        let set = locate_roots(&pf("x^2+1"), (-5.0, 5.0), DEFAULT_SCAN_POINTS).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn double_zero_is_a_violation() {
        for src in ["(x-0.3)^2", "x^2", "(x-0.1)^3"] {
            let r = locate_roots(&pf(src), (-1.0, 1.0), 200);
            assert!(
                matches!(r, Err(ExprError::SimplicityViolation { kind: RootKind::Zero, .. })),
                "{src}: {r:?}"
            );
        }
    }

    #[test]
    fn close_pair_inside_one_cell_is_resolved_with_warning() {
        let set = locate_roots(&pf("(x-0.5001)*(x-0.5003)"), (0.0, 1.0), 64).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.warnings.len(), 1);
    }

    #[test]
    fn poles_are_not_zeros() {
        let set = locate_roots(&pf("(x-1)/(x+1)"), (-3.0, 3.0), 200).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.roots[0].location - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simple_poles() {
        let set = locate_poles(&pf("1/x"), (-1.0, 1.0), 200).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.roots[0].location.abs() < 1e-12);

        let set = locate_poles(&pf("(x-1)/(x+1)"), (-3.0, 3.0), 300).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.roots[0].location + 1.0).abs() < 1e-12);
        assert_eq!(set.roots[0].kind, RootKind::Pole);

        let set = locate_poles(&pf("x^4+2*x^2-1"), (-3.0, 3.0), DEFAULT_SCAN_POINTS).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn pole_off_the_scan_grid() {
        let set = locate_poles(&pf("1/(x-0.123456789)"), (-1.0, 1.0), 100).unwrap();
        assert!((set.roots[0].location - 0.123456789).abs() < 1e-12);
    }

    #[test]
    fn double_poles_rejected() {
        let r = locate_poles(&pf("1/(x-0.2)^2"), (-1.0, 1.0), 128);
        assert!(matches!(r, Err(ExprError::SimplicityViolation { kind: RootKind::Pole, .. })), "{r:?}");
        let r = locate_poles(&pf("1/x^2"), (-1.0, 1.0), 129);
        assert!(matches!(r, Err(ExprError::SimplicityViolation { kind: RootKind::Pole, .. })), "{r:?}");
    }

    #[test]
    fn bad_intervals() {
        assert!(locate_roots(&pf("x"), (1.0, -1.0), 100).is_err());
        assert!(locate_roots(&pf("x"), (-1.0, 1.0), 10).is_err());
    }
}
