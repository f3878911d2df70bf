//! Analytic structure of the generating function and the quantum numbers of
//! the two constructed states.
//!
//! Every simple pole of `xi` is a node of `psi1`, every simple zero a node of
//! `psi2`. At a zero `x0` of `xi'` the log-derivative behaves like
//! `B/(x - x0)` with `B = (xi'' + dE*xi)/(2 xi'')` at `x0`; the potential is
//! regular only for `B = 0` (no node) or `B = -1` (a node shared by both
//! states). Hence `N1 = poles + m(-1)` and `N2 = zeros + m(-1)`.

use serde::Serialize;

use crate::exprlang::{
    locate_poles, locate_roots, locate_zeros_of, ExprError, ParsedFunction, RootKind, RootSet,
    DEFAULT_SCAN_POINTS,
};
use crate::{Error, Result};

pub const DEFAULT_B_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalClass {
    B0,
    #[serde(rename = "Bminus1")]
    BMinus1,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub b: f64,
    pub class: CriticalClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Zero,
    Pole,
    Critical,
}

/// Structure found between the working interval and twice its width. It
/// does not enter the node counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutsideFeature {
    pub location: f64,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    pub interval: (f64, f64),
    pub delta_e: f64,
    pub poles: RootSet,
    pub zeros: RootSet,
    pub criticals: Vec<CriticalPoint>,
    pub n1: usize,
    pub n2: usize,
    pub m0: usize,
    pub m_minus: usize,
    #[serde(rename = "N1")]
    pub big_n1: usize,
    #[serde(rename = "N2")]
    pub big_n2: usize,
    pub outside: Vec<OutsideFeature>,
}

impl SingularityReport {
    /// Abscissae where `psi1` carries an analytic node factor: poles of `xi`
    /// and `B = -1` critical points.
    pub fn node_factor_locations(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.poles.locations();
        v.extend(
            self.criticals
                .iter()
                .filter(|c| c.class == CriticalClass::BMinus1)
                .map(|c| c.location),
        );
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// All abscissae where the closed-form potential is a removable 0/0.
    pub fn singular_abscissae(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.poles.locations();
        v.extend(self.criticals.iter().map(|c| c.location));
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    pub fn is_regular(&self) -> bool {
        self.criticals
            .iter()
            .all(|c| c.class != CriticalClass::Irregular)
    }
}

/// Quantum numbers of the two states. `inverted` is set when `N1 > N2`: the
/// potential realizing `E1 < E2` is then the one built from `1/xi`, with
/// `E1` in state `N2` and `E2` in state `N1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prediction {
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub inverted: bool,
}

pub fn classify_critical_point(
    xi: &ParsedFunction,
    delta_e: f64,
    x0: f64,
    tol: f64,
) -> Result<CriticalPoint> {
    let [f, _, f2, _] = xi.jet(x0);
    let numerator = f2 + delta_e * f;
    let scale = f2.abs().max((delta_e * f).abs());
    if !(f2.abs() > 1e-12 * scale.max(f.abs())) || f2 == 0.0 {
        return Err(Error::DegenerateCritical { location: x0 });
    }
    let b = numerator / (2.0 * f2);
    // tolerance relative to the size of the competing terms in B
    let rel = tol * (0.5 * scale / f2.abs()).max(1.0);
    let class = if b.abs() < rel {
        CriticalClass::B0
    } else if (b + 1.0).abs() < rel {
        CriticalClass::BMinus1
    } else {
        CriticalClass::Irregular
    };
    Ok(CriticalPoint {
        location: x0,
        b,
        class,
    })
}

pub fn analyze_singularities(
    xi: &ParsedFunction,
    delta_e: f64,
    interval: (f64, f64),
) -> Result<SingularityReport> {
    analyze_with_resolution(xi, delta_e, interval, DEFAULT_SCAN_POINTS)
}

fn critical_locations(
    xi: &ParsedFunction,
    interval: (f64, f64),
    scan: usize,
) -> Result<RootSet> {
    locate_zeros_of(|x| xi.eval(1, x), |x| xi.eval(2, x), interval, scan).map_err(|e| match e {
        ExprError::SimplicityViolation { location, .. } => Error::DegenerateCritical { location },
        other => other.into(),
    })
}

pub fn analyze_with_resolution(
    xi: &ParsedFunction,
    delta_e: f64,
    interval: (f64, f64),
    scan: usize,
) -> Result<SingularityReport> {
    let zeros = locate_roots(xi, interval, scan)?;
    let poles = locate_poles(xi, interval, scan)?;
    let crit = critical_locations(xi, interval, scan)?;

    let mut criticals = Vec::with_capacity(crit.len());
    for r in &crit.roots {
        let x0 = r.location;
        let fx = xi.eval(0, x0);
        let f2 = xi.eval(2, x0);
        if fx.abs() <= 1e-10 * f2.abs().max(1.0) {
            return Err(ExprError::SimplicityViolation {
                location: x0,
                kind: RootKind::Zero,
                indicator: xi.eval(1, x0).abs(),
            }
            .into());
        }
        let cp = classify_critical_point(xi, delta_e, x0, DEFAULT_B_TOLERANCE)?;
        if cp.class == CriticalClass::Irregular {
            return Err(Error::Regularity {
                location: x0,
                b: cp.b,
            });
        }
        criticals.push(cp);
    }

    let m0 = criticals
        .iter()
        .filter(|c| c.class == CriticalClass::B0)
        .count();
    let m_minus = criticals.len() - m0;
    let (n1, n2) = (poles.len(), zeros.len());

    Ok(SingularityReport {
        interval,
        delta_e,
        big_n1: n1 + m_minus,
        big_n2: n2 + m_minus,
        poles,
        zeros,
        criticals,
        n1,
        n2,
        m0,
        m_minus,
        outside: outside_features(xi, interval, scan),
    })
}

fn outside_features(xi: &ParsedFunction, interval: (f64, f64), scan: usize) -> Vec<OutsideFeature> {
    let (a, b) = interval;
    let w = b - a;
    let wide = (a - 0.5 * w, b + 0.5 * w);
    let outside = |x: f64| x < a || x > b;
    let mut out = Vec::new();
    let mut push = |set: std::result::Result<RootSet, _>, kind| {
        if let Ok(set) = set {
            out.extend(
                set.roots
                    .iter()
                    .filter(|r| outside(r.location))
                    .map(|r| OutsideFeature {
                        location: r.location,
                        kind,
                    }),
            );
        }
    };
    push(locate_roots(xi, wide, 2 * scan), FeatureKind::Zero);
    push(locate_poles(xi, wide, 2 * scan), FeatureKind::Pole);
    push(
        locate_zeros_of(|x| xi.eval(1, x), |x| xi.eval(2, x), wide, 2 * scan),
        FeatureKind::Critical,
    );
    out.sort_by(|p, q| p.location.partial_cmp(&q.location).unwrap());
    out
}

pub fn predict_quantum_numbers(report: &SingularityReport) -> Result<Prediction> {
    if let Some(bad) = report
        .criticals
        .iter()
        .find(|c| c.class == CriticalClass::Irregular)
    {
        return Err(Error::Regularity {
            location: bad.location,
            b: bad.b,
        });
    }
    let (n1, n2) = (report.big_n1, report.big_n2);
    if n1 == n2 {
        return Err(Error::Oscillation { nodes: n1 });
    }
    Ok(Prediction {
        n1,
        n2,
        inverted: n1 > n2,
    })
}

impl From<RootKind> for FeatureKind {
    fn from(k: RootKind) -> FeatureKind {
        match k {
            RootKind::Zero => FeatureKind::Zero,
            RootKind::Pole => FeatureKind::Pole,
        }
    }
}
