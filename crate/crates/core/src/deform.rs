//! Linear-fractional deformations `xi = (c2 eta + d2)/(c1 eta + d1)` of a
//! base function `eta`. Every member of the family keeps both levels; the
//! Schwarzian part of the potential is untouched and only the terms in
//! `dE` change.

use serde::Serialize;

use crate::construct::{schwarzian, LevelPair};
use crate::exprlang::{locate_roots, Expression, ParsedFunction, DEFAULT_SCAN_POINTS};
use crate::quadrature::{adaptive_simpson, Regularizer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusParams {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MobiusParams {
    pub fn determinant(&self) -> f64 {
        self.c1 * self.d2 - self.c2 * self.d1
    }

    pub fn check(&self) -> Result<f64> {
        let det = self.determinant();
        let size = (self.c1 * self.d2).abs().max((self.c2 * self.d1).abs());
        if !(det.abs() > 1e-12 * size) || !det.is_finite() {
            return Err(Error::DegenerateMobius(det));
        }
        Ok(det)
    }
}

pub fn apply_mobius(eta: &ParsedFunction, p: &MobiusParams) -> Result<Expression> {
    p.check()?;
    let e = &eta.base;
    let num = Expression::constant(p.c2).mul(e).add(&Expression::constant(p.d2));
    let den = Expression::constant(p.c1).mul(e).add(&Expression::constant(p.d1));
    Ok(num.div(&den))
}

/// The deformation with `c1 = c2 = 2 beta`, `d1 = -dbar - dE`,
/// `d2 = -dbar + dE` and `gamma = (dE^2 - dbar^2)/(4 beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalDeformParams {
    pub beta: f64,
    #[serde(rename = "deltaBar")]
    pub delta_bar: f64,
    pub gamma: f64,
    #[serde(rename = "deltaE")]
    pub delta_e: f64,
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

impl CanonicalDeformParams {
    pub fn new(beta: f64, delta_bar: f64, delta_e: f64) -> Result<CanonicalDeformParams> {
        let gamma = if beta == 0.0 || beta.abs() < 1e-14 * delta_e.abs().max(1.0) {
            if !nearly_equal(delta_bar, delta_e) {
                return Err(Error::InconsistentLevels(format!(
                    "beta = {beta} needs deltaBar = deltaE, got {delta_bar} and {delta_e}"
                )));
            }
            0.0
        } else {
            (delta_e * delta_e - delta_bar * delta_bar) / (4.0 * beta)
        };
        Ok(CanonicalDeformParams {
            beta,
            delta_bar,
            gamma,
            delta_e,
        })
    }

    /// `Y = beta eta^2 - dbar eta - gamma`.
    pub fn y(&self, eta: f64) -> f64 {
        self.beta * eta * eta - self.delta_bar * eta - self.gamma
    }

    /// Möbius coefficients, or `None` at `beta = 0` where the family
    /// degenerates to `xi` proportional to `eta`.
    pub fn to_mobius(&self) -> Option<MobiusParams> {
        if self.beta == 0.0 {
            return None;
        }
        Some(MobiusParams {
            c1: 2.0 * self.beta,
            c2: 2.0 * self.beta,
            d1: -self.delta_bar - self.delta_e,
            d2: -self.delta_bar + self.delta_e,
        })
    }

    /// A generating function whose potential is the deformed one.
    pub fn equivalent_xi(&self, eta: &ParsedFunction) -> Result<ParsedFunction> {
        match self.to_mobius() {
            Some(m) => Ok(ParsedFunction::new(apply_mobius(eta, &m)?)),
            None => Ok(eta.clone()),
        }
    }
}

pub fn canonical_params(c: f64, d1: f64, d2: f64, delta_e: f64) -> Result<CanonicalDeformParams> {
    if !nearly_equal(d2 - d1, 2.0 * delta_e) {
        return Err(Error::InconsistentLevels(format!(
            "d2 - d1 = {} but 2 deltaE = {}",
            d2 - d1,
            2.0 * delta_e
        )));
    }
    CanonicalDeformParams::new(0.5 * c, -0.5 * (d1 + d2), delta_e)
}

/// The potential of the canonical family written through `eta`.
pub fn deformed_potential(
    eta: &ParsedFunction,
    levels: &LevelPair,
    p: &CanonicalDeformParams,
    x: f64,
) -> f64 {
    let [e, e1, e2, _] = eta.jet(x);
    let y = p.y(e);
    levels.e1 + 0.5 * levels.delta_e - p.delta_bar + 2.0 * p.beta * e - 0.5 * schwarzian(eta, x)
        + 0.25 * y * y / (e1 * e1)
        - e2 * y / (e1 * e1)
}

/// The potential for general Möbius coefficients written through `eta`.
pub fn mobius_potential(
    eta: &ParsedFunction,
    levels: &LevelPair,
    p: &MobiusParams,
    x: f64,
) -> Result<f64> {
    let det = p.check()?;
    let de = levels.delta_e;
    let [e, e1, e2, _] = eta.jet(x);
    let y = de * (p.c1 * e + p.d1) * (p.c2 * e + p.d2) / det;
    Ok(levels.e1 - 0.5 * de + 2.0 * de * p.c1 * (p.d2 + p.c2 * e) / det
        + 0.25 * y * y / (e1 * e1)
        - e2 * y / (e1 * e1)
        - 0.5 * schwarzian(eta, x))
}

/// `rho' = (eta'' - Y)/(2 eta')`; the wave functions are
/// `(c_i eta + d_i) exp(-rho)`.
pub fn deformed_rho_prime(eta: &ParsedFunction, p: &CanonicalDeformParams, x: f64) -> f64 {
    let [e, e1, e2, _] = eta.jet(x);
    (e2 - p.y(e)) / (2.0 * e1)
}

/// `eta = K * exp(delta * int dx / W+)`, evaluated with the simple zeros of
/// `W+` split off analytically. With zeros `z_i` and `k_i = delta / W+'(z_i)`,
///
/// `eta(x) = K prod sgn(x - z_i) |x - z_i|^k_i exp(int_z0^x g)`,
/// `g = delta/W+ - sum k_i/(t - z_i)`.
///
/// Without zeros the integral starts at the middle of the interval.
#[derive(Debug, Clone)]
pub struct EtaFromWplus {
    pub wplus: ParsedFunction,
    pub delta: f64,
    pub scale: f64,
    zeros: Vec<(f64, f64)>,
    base: f64,
    reg: Regularizer,
}

impl EtaFromWplus {
    pub fn new(
        wplus: ParsedFunction,
        delta: f64,
        interval: (f64, f64),
        scale: f64,
    ) -> Result<EtaFromWplus> {
        let roots = locate_roots(&wplus, interval, DEFAULT_SCAN_POINTS)?;
        let zeros: Vec<(f64, f64)> = roots
            .roots
            .iter()
            .map(|r| (r.location, delta / wplus.eval(1, r.location)))
            .collect();
        let base = zeros
            .first()
            .map(|z| z.0)
            .unwrap_or(0.5 * (interval.0 + interval.1));
        let reg = Regularizer::new(zeros.iter().map(|z| z.0).collect(), 1.0);
        Ok(EtaFromWplus {
            wplus,
            delta,
            scale,
            zeros,
            base,
            reg,
        })
    }

    pub fn zeros(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.0).collect()
    }

    fn subtracted(&self, t: f64) -> f64 {
        self.delta / self.wplus.eval(0, t) - self.zeros.iter().map(|(z, k)| k / (t - z)).sum::<f64>()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = |t: f64| self.reg.eval(|s| self.subtracted(s), t);
        let (a, b, sign) = if x >= self.base {
            (self.base, x, 1.0)
        } else {
            (x, self.base, -1.0)
        };
        let integral = if a == b {
            0.0
        } else {
            sign * adaptive_simpson(&g, a, b, 1e-13 * (b - a).max(1.0), 30)
        };
        let mut v = self.scale * integral.exp();
        for (z, k) in &self.zeros {
            v *= (x - z).signum() * (x - z).abs().powf(*k);
        }
        v
    }
}

/// `rho'` of the canonical family with `xi = eta` generated by `W+`:
/// `-1/2 [ (W+' - delta)/W+ - dbar W+/delta + beta W+ eta/delta - gamma W+/(delta eta) ]`.
pub fn deformed_log_derivative(eta: &EtaFromWplus, p: &CanonicalDeformParams, x: f64) -> f64 {
    let [w, w1, _, _] = eta.wplus.jet(x);
    let d = eta.delta;
    let e = eta.eval(x);
    let mut s = (w1 - d) / w - p.delta_bar * w / d + p.beta * w * e / d;
    if p.gamma != 0.0 {
        s -= p.gamma * w / (d * e);
    }
    -0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{potential, PotentialEvaluator};

    fn pf(s: &str) -> ParsedFunction {
        ParsedFunction::parse(s).unwrap()
    }

    #[test]
    fn degenerate_mobius_rejected() {
        let p = MobiusParams {
            c1: 1.0,
            c2: 1.0,
            d1: 1.0,
            d2: 1.0,
        };
        assert!(matches!(apply_mobius(&pf("x"), &p), Err(Error::DegenerateMobius(_))));
    }

    #[test]
    fn identity_and_inversion_limits() {
        let eta = pf("x^4+2*x^2-1");
        let lv = LevelPair::new(0.0, 4.0).unwrap();
        let ident = MobiusParams {
            c1: 0.0,
            c2: 1.0,
            d1: 1.0,
            d2: 0.0,
        };
        let inv = MobiusParams {
            c1: 1.0,
            c2: 0.0,
            d1: 0.0,
            d2: 1.0,
        };
        for &x in &[0.4, 1.1, -2.3] {
            let base = potential(&eta, &lv, x);
            let u = mobius_potential(&eta, &lv, &ident, x).unwrap();
            assert!((u - base).abs() < 1e-10 * (1.0 + base.abs()));
            let swapped = potential(&eta, &lv.swapped(), x);
            let u = mobius_potential(&eta, &lv, &inv, x).unwrap();
            assert!((u - swapped).abs() < 1e-10 * (1.0 + swapped.abs()));
        }
    }

    #[test]
    fn canonical_parameter_rules() {
        let p = canonical_params(2.0, -2.0, 2.0, 2.0).unwrap();
        assert_eq!((p.beta, p.delta_bar, p.gamma), (1.0, 0.0, 1.0));
        let p = CanonicalDeformParams::new(0.7, 1.5, 1.5).unwrap();
        assert_eq!(p.gamma, 0.0);
        assert!(matches!(
            CanonicalDeformParams::new(0.0, 1.0, 2.0),
            Err(Error::InconsistentLevels(_))
        ));
        assert!(canonical_params(2.0, -2.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn canonical_form_matches_direct_construction() {
        // frozen symbolic value of both sides at x = 0.37
        let eta = pf("sinh(x)+x^3/5+2");
        let lv = LevelPair::from_gap(0.3, 1.7).unwrap();
        let p = CanonicalDeformParams::new(0.45, 0.6, 1.7).unwrap();
        let direct = potential(&p.equivalent_xi(&eta).unwrap(), &lv, 0.37);
        let canon = deformed_potential(&eta, &lv, &p, 0.37);
        let general = mobius_potential(&eta, &lv, &p.to_mobius().unwrap(), 0.37).unwrap();
        for v in [direct, canon, general] {
            assert!((v - 2.279_217_379_953_861).abs() < 1e-12, "{v}");
        }
        assert!((deformed_rho_prime(&eta, &p, 0.37) - 0.474_968_656_591_108_3).abs() < 1e-13);
    }

    #[test]
    fn zero_beta_reduces_to_undeformed() {
        let eta = pf("x^4+2*x^2-1");
        let lv = LevelPair::new(0.0, 4.0).unwrap();
        let p = CanonicalDeformParams::new(0.0, 4.0, 4.0).unwrap();
        let ev = PotentialEvaluator::with_points(&eta, lv, vec![0.0]);
        for &x in &[0.3, 0.9, -1.4] {
            let a = deformed_potential(&eta, &lv, &p, x);
            assert!((a - ev.eval(x)).abs() < 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn schwarzian_invariant_under_mobius() {
        let eta = pf("x^3+x+exp(x/3)");
        let p = MobiusParams {
            c1: 0.3,
            c2: 2.0,
            d1: 5.0,
            d2: -1.0,
        };
        let xi = ParsedFunction::new(apply_mobius(&eta, &p).unwrap());
        for &x in &[-1.0, 0.2, 1.5] {
            let (a, b) = (schwarzian(&eta, x), schwarzian(&xi, x));
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn eta_from_cubic_wplus() {
        // a = b = 1: eta = x / sqrt(1 + x^2)
        let eta = EtaFromWplus::new(pf("x+x^3"), 1.0, (-5.0, 5.0), 1.0).unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.2, 1.7] {
            let exact = x / (1.0 + x * x as f64).sqrt();
            assert!((eta.eval(x) - exact).abs() < 1e-11, "{x}");
        }
    }

    #[test]
    fn log_derivative_reductions() {
        let wp = pf("x+x^3");
        let eta = EtaFromWplus::new(wp.clone(), 1.0, (-5.0, 5.0), 1.0).unwrap();
        // beta = gamma = 0, dbar = delta gives W = (W+ - W-)/2
        let p0 = CanonicalDeformParams::new(0.0, 1.0, 1.0).unwrap();
        let fam = crate::construct::WplusFamily::new(wp, 1.0);
        for &x in &[0.4, -1.1] {
            assert!((deformed_log_derivative(&eta, &p0, x) - fam.w(x)).abs() < 1e-12);
        }
        // frozen symbolic value for beta = 0.3
        let p = CanonicalDeformParams::new(0.3, 1.0, 1.0).unwrap();
        let v = deformed_log_derivative(&eta, &p, 0.2);
        assert!((v + 0.190_580_361_877_850).abs() < 1e-11, "{v}");
        let closed = pf("x/sqrt(1+x^2)");
        assert!((deformed_rho_prime(&closed, &p, 0.2) - v).abs() < 1e-11);
    }

    #[test]
    fn hyperbolic_log_derivative() {
        let x0: f64 = 0.5;
        let a = 1.0 / x0.cosh();
        let wp = pf(&format!("{a:?}*(sinh(x)-{:?})", x0.sinh()));
        let eta = EtaFromWplus::new(wp, 1.0, (-6.0, 6.0), 0.5 / x0.cosh()).unwrap();
        let p = CanonicalDeformParams::new(0.3, 1.0, 1.0).unwrap();
        let v = deformed_log_derivative(&eta, &p, 0.2);
        assert!((v + 0.316_003_123_835_019).abs() < 1e-11, "{v}");
    }
}
