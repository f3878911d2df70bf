//! The potential with two prescribed levels, its superpotential, and the two
//! wave functions sampled on a grid.
//!
//! With `psi2 = xi * psi1` and `psi1 = exp(-chi)` the two Schroedinger
//! equations fix `chi' = (xi'' + dE*xi) / (2 xi')` and
//! `U = E1 + chi'^2 - chi''`.

use serde::Serialize;

use crate::classify::{CriticalClass, SingularityReport};
use crate::exprlang::ParsedFunction;
use crate::quadrature::{adaptive_simpson, symmetric_limit, trapezoid, Regularizer};
use crate::{Error, Result};

/// Two energies. Built with [`LevelPair::new`] the gap is positive; the
/// swapped pair used for the inversion symmetry is available through
/// [`LevelPair::swapped`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPair {
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "deltaE")]
    pub delta_e: f64,
}

impl LevelPair {
    pub fn new(e1: f64, e2: f64) -> Result<LevelPair> {
        if !(e1.is_finite() && e2.is_finite()) {
            return Err(Error::InvalidLevels(format!("non-finite energies {e1}, {e2}")));
        }
        if e2 <= e1 {
            return Err(Error::InvalidLevels(format!(
                "E2 = {e2} must exceed E1 = {e1}; swap the levels by inverting xi"
            )));
        }
        Ok(LevelPair::unchecked(e1, e2))
    }

    pub fn from_gap(e1: f64, delta_e: f64) -> Result<LevelPair> {
        LevelPair::new(e1, e1 + delta_e)
    }

    pub fn unchecked(e1: f64, e2: f64) -> LevelPair {
        LevelPair {
            e1,
            e2,
            delta_e: e2 - e1,
        }
    }

    pub fn swapped(&self) -> LevelPair {
        LevelPair::unchecked(self.e2, self.e1)
    }
}

/// Uniform grid of `n` points from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Grid> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidGrid(format!("bad domain [{a}, {b}]")));
        }
        if n < 5 {
            return Err(Error::InvalidGrid(format!("{n} points is too few")));
        }
        Ok(Grid { a, b, n })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PotentialForm {
    /// Explicit rational expression in `xi` and its derivatives.
    A,
    /// Schwarzian form.
    B,
    /// `E1 + chi'^2 - chi''`.
    C,
}

pub fn chi_prime(xi: &ParsedFunction, delta_e: f64, x: f64) -> f64 {
    let [f, f1, f2, _] = xi.jet(x);
    (f2 + delta_e * f) / (2.0 * f1)
}

/// Second derivative of `chi`.
pub fn chi_double_prime(xi: &ParsedFunction, delta_e: f64, x: f64) -> f64 {
    let [f, f1, f2, f3] = xi.jet(x);
    (f3 + delta_e * f1) / (2.0 * f1) - (f2 + delta_e * f) * f2 / (2.0 * f1 * f1)
}

pub fn schwarzian(f: &ParsedFunction, x: f64) -> f64 {
    let [_, f1, f2, f3] = f.jet(x);
    let r = f2 / f1;
    f3 / f1 - 1.5 * r * r
}

/// Form A of the potential.
pub fn potential(xi: &ParsedFunction, levels: &LevelPair, x: f64) -> f64 {
    potential_with(xi, levels, x, PotentialForm::A)
}

/// Direct evaluation in the chosen form; 0/0 at critical points and poles
/// is not resolved here (see [`PotentialEvaluator`]).
pub fn potential_with(xi: &ParsedFunction, levels: &LevelPair, x: f64, form: PotentialForm) -> f64 {
    let de = levels.delta_e;
    let [f, f1, f2, f3] = xi.jet(x);
    match form {
        PotentialForm::A => {
            let r2 = f2 / f1;
            let q = f / f1;
            levels.e1 - 0.5 * de + 0.75 * r2 * r2 - 0.5 * f3 / f1
                + de * q * r2
                + 0.25 * de * de * q * q
        }
        PotentialForm::B => {
            let q = f / f1;
            levels.e1 - 0.5 * de * (1.0 - 2.0 * q * f2 / f1) + 0.25 * de * de * q * q
                - 0.5 * schwarzian(xi, x)
        }
        PotentialForm::C => {
            let c1 = chi_prime(xi, de, x);
            levels.e1 + c1 * c1 - chi_double_prime(xi, de, x)
        }
    }
}

/// `(W+, W-, W)` with `W+ = dE*xi/xi'`, `W- = (W+' - dE)/W+` and
/// `W = (W+ - W-)/2`, which coincides with `chi'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Superpotentials {
    pub wplus: f64,
    pub wminus: f64,
    pub w: f64,
}

pub fn superpotential_triplet(xi: &ParsedFunction, delta_e: f64, x: f64) -> Superpotentials {
    let [f, f1, f2, _] = xi.jet(x);
    let wplus = delta_e * f / f1;
    let wplus_d = delta_e * (1.0 - f * f2 / (f1 * f1));
    let wminus = (wplus_d - delta_e) / wplus;
    Superpotentials {
        wplus,
        wminus,
        w: 0.5 * (wplus - wminus),
    }
}

/// The superpotential family generated directly by `W+`. Here `xi` is
/// `exp(delta * int dx/W+)` and never needs to be formed.
#[derive(Debug, Clone)]
pub struct WplusFamily {
    pub wplus: ParsedFunction,
    pub delta: f64,
}

impl WplusFamily {
    pub fn new(wplus: ParsedFunction, delta: f64) -> WplusFamily {
        WplusFamily { wplus, delta }
    }

    pub fn wminus(&self, x: f64) -> f64 {
        let [w, w1, _, _] = self.wplus.jet(x);
        (w1 - self.delta) / w
    }

    pub fn w(&self, x: f64) -> f64 {
        0.5 * (self.wplus.eval(0, x) - self.wminus(x))
    }

    pub fn w_prime(&self, x: f64) -> f64 {
        let [w, w1, w2, _] = self.wplus.jet(x);
        let wminus_d = w2 / w - (w1 - self.delta) * w1 / (w * w);
        0.5 * (w1 - wminus_d)
    }

    /// `U = E1 + W^2 - W'`.
    pub fn potential(&self, e1: f64, x: f64) -> f64 {
        let w = self.w(x);
        e1 + w * w - self.w_prime(x)
    }
}

/// Potential evaluation that resolves the removable singularities at poles
/// of `xi` and at critical points by symmetric limits.
#[derive(Debug, Clone)]
pub struct PotentialEvaluator<'a> {
    xi: &'a ParsedFunction,
    levels: LevelPair,
    form: PotentialForm,
    reg: Regularizer,
}

impl<'a> PotentialEvaluator<'a> {
    pub fn new(
        xi: &'a ParsedFunction,
        levels: LevelPair,
        report: &SingularityReport,
    ) -> PotentialEvaluator<'a> {
        PotentialEvaluator::with_points(xi, levels, report.singular_abscissae())
    }

    pub fn with_points(
        xi: &'a ParsedFunction,
        levels: LevelPair,
        points: Vec<f64>,
    ) -> PotentialEvaluator<'a> {
        PotentialEvaluator {
            xi,
            levels,
            form: PotentialForm::A,
            reg: Regularizer::new(points, 1.0),
        }
    }

    pub fn form(mut self, form: PotentialForm) -> Self {
        self.form = form;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.reg
            .eval(|t| potential_with(self.xi, &self.levels, t, self.form), x)
    }
}

/// An analytic factor `(x - location)^exponent` split off `psi1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeFactor {
    pub location: f64,
    pub exponent: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionResult {
    pub grid: Grid,
    pub levels: LevelPair,
    pub x: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub chi_prime: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    #[serde(rename = "Wplus")]
    pub wplus: Vec<f64>,
    #[serde(rename = "Wminus")]
    pub wminus: Vec<f64>,
    pub analytic_node_factors: Vec<NodeFactor>,
    /// `k` in `psi2 = k * xi * psi1` after both are normalized.
    pub psi2_scale: f64,
    /// Fraction of the norm found beyond the grid when the domain is doubled.
    pub tail_fraction: f64,
}

impl ConstructionResult {
    pub fn psi(&self, which: usize) -> &[f64] {
        match which {
            1 => &self.psi1,
            2 => &self.psi2,
            _ => panic!("state index must be 1 or 2"),
        }
    }

    pub fn energy(&self, which: usize) -> f64 {
        match which {
            1 => self.levels.e1,
            2 => self.levels.e2,
            _ => panic!("state index must be 1 or 2"),
        }
    }
}

pub const NORMALIZABILITY_THRESHOLD: f64 = 0.01;
const CELL_DEPTH: u32 = 7;

/// `chi'` with the simple poles at the node factors removed; continuous.
struct ChiIntegrand<'a> {
    xi: &'a ParsedFunction,
    delta_e: f64,
    factors: Vec<f64>,
    reg: Regularizer,
}

impl ChiIntegrand<'_> {
    fn raw(&self, x: f64) -> f64 {
        chi_prime(self.xi, self.delta_e, x) + self.factors.iter().map(|p| 1.0 / (x - p)).sum::<f64>()
    }

    fn eval(&self, x: f64) -> f64 {
        self.reg.eval(|t| self.raw(t), x)
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let scale = 1.0 + self.eval(a).abs().max(self.eval(b).abs());
        let tol = 1e-11 * (b - a).abs() * scale;
        // cells are one grid spacing wide; deeper refinement only chases
        // roundoff where chi' is computed with cancellation
        adaptive_simpson(&|t| self.eval(t), a, b, tol, CELL_DEPTH)
    }

    fn log_factor(&self, x: f64) -> (f64, f64) {
        let mut log = 0.0;
        let mut sign = 1.0;
        for p in &self.factors {
            log += (x - p).abs().ln();
            if x < *p {
                sign = -sign;
            }
        }
        (log, sign)
    }
}

/// `log|psi1|`, `sign psi1`, `log|psi2|`, `sign psi2` up to a common
/// additive constant in the logs.
struct LogPsi {
    l1: f64,
    s1: f64,
    l2: f64,
    s2: f64,
}

struct Synthesizer<'a> {
    xi: &'a ParsedFunction,
    chi: ChiIntegrand<'a>,
    poles: Vec<f64>,
    shared: Vec<f64>,
    pole_guard: f64,
    pole_step: f64,
}

impl Synthesizer<'_> {
    /// `xi * prod_poles (x - p)`, finite everywhere.
    fn log_q(&self, x: f64) -> (f64, f64) {
        let near = self
            .poles
            .iter()
            .copied()
            .find(|p| (x - p).abs() < self.pole_guard);
        let (val, skip) = match near {
            Some(p) => (
                symmetric_limit(&|t: f64| self.xi.eval(0, t) * (t - p), x, self.pole_step),
                Some(p),
            ),
            None => (self.xi.eval(0, x), None),
        };
        let mut log = val.abs().ln();
        let mut sign = val.signum();
        for &p in &self.poles {
            if Some(p) == skip {
                continue;
            }
            log += (x - p).abs().ln();
            if x < p {
                sign = -sign;
            }
        }
        (log, sign)
    }

    fn at(&self, x: f64, integral: f64) -> LogPsi {
        let (lf, s1) = self.chi.log_factor(x);
        let (lq, sq) = self.log_q(x);
        let mut l2 = lq - integral;
        let mut s2 = sq;
        for &c in &self.shared {
            l2 += (x - c).abs().ln();
            if x < c {
                s2 = -s2;
            }
        }
        LogPsi {
            l1: lf - integral,
            s1,
            l2,
            s2,
        }
    }
}

fn log_sum_exp2(logs: impl Iterator<Item = f64>, shift: f64, weight: f64) -> f64 {
    logs.filter(|l| l.is_finite())
        .map(|l| (2.0 * (l - shift)).exp())
        .sum::<f64>()
        * weight
}

fn count_sign_changes(v: &[f64]) -> usize {
    crate::spectral::count_nodes(v, crate::spectral::DEFAULT_NODE_FLOOR)
}

/// Builds `U`, both wave functions and the superpotentials on `grid`.
pub fn synthesize_wavefunctions(
    xi: &ParsedFunction,
    levels: &LevelPair,
    grid: &Grid,
    report: &SingularityReport,
) -> Result<ConstructionResult> {
    if !(levels.delta_e > 0.0) {
        return Err(Error::InvalidLevels(format!(
            "deltaE = {} must be positive",
            levels.delta_e
        )));
    }
    if let Some(c) = report
        .criticals
        .iter()
        .find(|c| c.class == CriticalClass::Irregular)
    {
        return Err(Error::Regularity {
            location: c.location,
            b: c.b,
        });
    }
    let de = levels.delta_e;
    let poles = report.poles.locations();
    let shared: Vec<f64> = report
        .criticals
        .iter()
        .filter(|c| c.class == CriticalClass::BMinus1)
        .map(|c| c.location)
        .collect();
    let factors = report.node_factor_locations();
    let singular = report.singular_abscissae();

    let reg = Regularizer::new(singular.clone(), 1.0);
    let pole_reg = Regularizer::new(poles.clone(), 1.0);
    let mut spacing = 1.0f64;
    for w in singular.windows(2) {
        spacing = spacing.min(0.25 * (w[1] - w[0]));
    }
    let synth = Synthesizer {
        xi,
        chi: ChiIntegrand {
            xi,
            delta_e: de,
            factors: factors.clone(),
            reg: reg.clone(),
        },
        poles: poles.clone(),
        shared,
        pole_guard: 1e-3 * spacing,
        pole_step: 1e-2 * spacing,
    };

    let xs = grid.points();
    let n = xs.len();
    let h = grid.h();
    let mut integral = vec![0.0; n];
    for i in 1..n {
        integral[i] = integral[i - 1] + synth.chi.integrate(xs[i - 1], xs[i]);
    }
    if let Some(i) = integral.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinitePotential { x: xs[i] });
    }
    let logs: Vec<LogPsi> = xs
        .iter()
        .zip(&integral)
        .map(|(&x, &int)| synth.at(x, int))
        .collect();

    let max1 = logs.iter().map(|l| l.l1).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let max2 = logs.iter().map(|l| l.l2).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !max1.is_finite() || !max2.is_finite() {
        return Err(Error::NonNormalizable {
            tail_fraction: f64::INFINITY,
        });
    }

    let tail_fraction = tail_fraction(xi, de, report, grid, &synth, &integral, &logs, max1, max2);
    if !(tail_fraction <= NORMALIZABILITY_THRESHOLD) {
        return Err(Error::NonNormalizable { tail_fraction });
    }

    let mut psi1: Vec<f64> = logs.iter().map(|l| l.s1 * (l.l1 - max1).exp()).collect();
    let mut psi2: Vec<f64> = logs.iter().map(|l| l.s2 * (l.l2 - max2).exp()).collect();
    let n1 = trapezoid(&psi1.iter().map(|v| v * v).collect::<Vec<_>>(), h).sqrt();
    let n2 = trapezoid(&psi2.iter().map(|v| v * v).collect::<Vec<_>>(), h).sqrt();
    psi1.iter_mut().for_each(|v| *v /= n1);
    psi2.iter_mut().for_each(|v| *v /= n2);
    let psi2_scale = n1 / n2 * (max1 - max2).exp();

    let eval_u = PotentialEvaluator::with_points(xi, *levels, singular);
    let mut u = Vec::with_capacity(n);
    for &x in &xs {
        let v = eval_u.eval(x);
        if !v.is_finite() {
            return Err(Error::NonFinitePotential { x });
        }
        u.push(v);
    }

    let mut chi = Vec::with_capacity(n);
    let mut wplus = Vec::with_capacity(n);
    let mut wminus = Vec::with_capacity(n);
    for &x in &xs {
        let c = synth.chi.eval(x) - factors.iter().map(|p| 1.0 / (x - p)).sum::<f64>();
        let wp = pole_reg.eval(|t| de * xi.eval(0, t) / xi.eval(1, t), x);
        chi.push(c);
        wplus.push(wp);
        wminus.push(wp - 2.0 * c);
    }

    Ok(ConstructionResult {
        grid: *grid,
        levels: *levels,
        x: xs,
        u,
        psi1,
        psi2,
        w: chi.clone(),
        chi_prime: chi,
        wplus,
        wminus,
        analytic_node_factors: factors
            .iter()
            .map(|&location| NodeFactor {
                location,
                exponent: 1,
            })
            .collect(),
        psi2_scale,
        tail_fraction,
    })
}

/// Continues both wave functions over half the domain width on each side
/// and returns the fraction of the larger of the two norms found there.
#[allow(clippy::too_many_arguments)]
fn tail_fraction(
    xi: &ParsedFunction,
    de: f64,
    report: &SingularityReport,
    grid: &Grid,
    synth: &Synthesizer<'_>,
    integral: &[f64],
    logs: &[LogPsi],
    max1: f64,
    max2: f64,
) -> f64 {
    const CELLS: usize = 256;
    let h = grid.h();
    let inside1 = log_sum_exp2(logs.iter().map(|l| l.l1), max1, h);
    let inside2 = log_sum_exp2(logs.iter().map(|l| l.l2), max2, h);

    // structure beyond the interval enters only the tails
    let mut factors = synth.chi.factors.clone();
    let mut points = report.singular_abscissae();
    for f in &report.outside {
        use crate::classify::FeatureKind;
        match f.kind {
            FeatureKind::Pole => {
                factors.push(f.location);
                points.push(f.location);
            }
            FeatureKind::Critical => {
                let [v, _, v2, _] = xi.jet(f.location);
                let b = (v2 + de * v) / (2.0 * v2);
                if (b + 1.0).abs() < 1e-6 {
                    factors.push(f.location);
                }
                points.push(f.location);
            }
            FeatureKind::Zero => {}
        }
    }
    let outer = ChiIntegrand {
        xi,
        delta_e: de,
        factors,
        reg: Regularizer::new(points, 1.0),
    };
    let half = 0.5 * (grid.b - grid.a);
    let ht = half / CELLS as f64;
    let mut tail1 = 0.0;
    let mut tail2 = 0.0;
    for (start, base, dir) in [(grid.b, integral[integral.len() - 1], 1.0), (grid.a, 0.0, -1.0)] {
        let mut acc = base;
        let mut x0 = start;
        for k in 1..=CELLS {
            let x1 = start + dir * k as f64 * ht;
            let step = if dir > 0.0 {
                outer.integrate(x0, x1)
            } else {
                -outer.integrate(x1, x0)
            };
            if !step.is_finite() {
                break;
            }
            acc += step;
            x0 = x1;
            let (lf, _) = outer.log_factor(x1);
            let l1 = lf - acc;
            let l2 = l1 + xi.eval(0, x1).abs().ln();
            let w = if k == CELLS { 0.5 * ht } else { ht };
            if l1.is_finite() {
                tail1 += w * (2.0 * (l1 - max1)).exp();
            }
            if l2.is_finite() {
                tail2 += w * (2.0 * (l2 - max2)).exp();
            }
        }
    }
    let f1 = tail1 / (inside1 + tail1);
    let f2 = tail2 / (inside2 + tail2);
    if f1.is_nan() || f2.is_nan() {
        return f64::INFINITY;
    }
    f1.max(f2)
}

/// `max |-psi'' + (U - E) psi| / max |psi|` over interior points, with the
/// second derivative from the 3-point stencil. Points within two spacings
/// of an analytic node factor are skipped.
pub fn residual_check(result: &ConstructionResult, which: usize) -> f64 {
    let psi = result.psi(which);
    let e = result.energy(which);
    let h = result.grid.h();
    let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 1..psi.len() - 1 {
        let x = result.x[i];
        if result
            .analytic_node_factors
            .iter()
            .any(|f| (x - f.location).abs() < 2.0 * h)
        {
            continue;
        }
        let d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (h * h);
        let r = (-d2 + (result.u[i] - e) * psi[i]).abs();
        worst = worst.max(r);
    }
    worst / scale
}

/// Sign changes of `psi1` and `psi2`.
pub fn realized_nodes(result: &ConstructionResult) -> (usize, usize) {
    (count_sign_changes(&result.psi1), count_sign_changes(&result.psi2))
}
