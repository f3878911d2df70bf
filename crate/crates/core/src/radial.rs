//! Spherically symmetric variant. The two reduced radial functions
//! `u1 = exp(-chi)` and `u2 = xi * u1` belong to angular momenta `l1` and
//! `l2`; the effective potential of channel `i` is `U + l_i(l_i+1)/r^2`.
//!
//! The centrifugal mismatch enters `chi'` as `dE -> dE - lambda/r^2` with
//! `lambda = (l2 - l1)(1 + l1 + l2)`, which allows `dE = 0` when `l1 != l2`.

use serde::Serialize;

use crate::construct::{potential, LevelPair};
use crate::exprlang::ParsedFunction;
use crate::quadrature::{adaptive_simpson, trapezoid};
use crate::{Error, Result};

pub fn radial_coupling(l1: u32, l2: u32) -> f64 {
    (l2 as f64 - l1 as f64) * (1.0 + l1 as f64 + l2 as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSpec {
    pub l1: u32,
    pub l2: u32,
    #[serde(rename = "lambdaCoupling")]
    pub lambda: f64,
    pub levels: LevelPair,
}

impl RadialSpec {
    pub fn new(l1: u32, l2: u32, e1: f64, e2: f64) -> Result<RadialSpec> {
        if !(e1.is_finite() && e2.is_finite()) {
            return Err(Error::InvalidLevels(format!("non-finite energies {e1}, {e2}")));
        }
        if e2 < e1 {
            return Err(Error::InvalidLevels(format!("E2 = {e2} is below E1 = {e1}")));
        }
        if e2 == e1 && l1 == l2 {
            return Err(Error::DegenerateSpec(format!(
                "equal energies need distinct angular momenta, got l1 = l2 = {l1}"
            )));
        }
        Ok(RadialSpec {
            l1,
            l2,
            lambda: radial_coupling(l1, l2),
            levels: LevelPair::unchecked(e1, e2),
        })
    }
}

pub fn radial_chi_prime(xi: &ParsedFunction, spec: &RadialSpec, r: f64) -> f64 {
    let [f, f1, f2, _] = xi.jet(r);
    (f2 + (spec.levels.delta_e - spec.lambda / (r * r)) * f) / (2.0 * f1)
}

/// `U(r)`: the one-dimensional potential of `xi` plus the terms generated
/// by `lambda`.
pub fn radial_potential(xi: &ParsedFunction, spec: &RadialSpec, r: f64) -> f64 {
    let [f, f1, f2, _] = xi.jet(r);
    let de = spec.levels.delta_e;
    let lam = spec.lambda;
    let l1 = spec.l1 as f64;
    let r2 = r * r;
    let q = f / f1;
    potential(xi, &spec.levels, r) + lam * lam * q * q / (4.0 * r2 * r2)
        - lam * q / r2 * (1.0 / r + f2 / f1)
        - lam * de * q * q / (2.0 * r2)
        + (lam - 2.0 * l1 * (l1 + 1.0)) / (2.0 * r2)
}

/// Reduced radial functions on `r_i = i h`, `i = 1..=n`, `h = r_max/n`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialResult {
    pub spec: RadialSpec,
    pub h: f64,
    pub r: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

pub fn synthesize_radial(
    xi: &ParsedFunction,
    spec: &RadialSpec,
    r_max: f64,
    n: usize,
) -> Result<RadialResult> {
    if !(r_max > 0.0) || n < 5 {
        return Err(Error::InvalidGrid(format!("radial grid (0, {r_max}] with {n} points")));
    }
    let h = r_max / n as f64;
    let r: Vec<f64> = (1..=n).map(|i| if i == n { r_max } else { i as f64 * h }).collect();
    let sign = xi.eval(1, r[0]).signum();
    for &x in &r {
        let [f, f1, _, _] = xi.jet(x);
        if !f.is_finite() || !f1.is_finite() {
            return Err(Error::Unsupported(format!(
                "radial generator must be finite on (0, R]; not at r = {x}"
            )));
        }
        if f1 == 0.0 || f1.signum() != sign {
            return Err(Error::Unsupported(format!(
                "radial generator must be monotone on (0, R]; xi' changes sign near r = {x}"
            )));
        }
    }
    let mut u = Vec::with_capacity(n);
    for &x in &r {
        let v = radial_potential(xi, spec, x);
        if !v.is_finite() {
            return Err(Error::NonFinitePotential { x });
        }
        u.push(v);
    }
    let chi = |t: f64| radial_chi_prime(xi, spec, t);
    let mut log1 = vec![0.0; n];
    for i in 1..n {
        let scale = 1.0 + chi(r[i - 1]).abs().max(chi(r[i]).abs());
        log1[i] = log1[i - 1] - adaptive_simpson(&chi, r[i - 1], r[i], 1e-11 * h * scale, 7);
    }
    let log2: Vec<f64> = log1
        .iter()
        .zip(&r)
        .map(|(l, &x)| l + xi.eval(0, x).abs().ln())
        .collect();
    let m1 = log1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m2 = log2.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let mut u1: Vec<f64> = log1.iter().map(|l| (l - m1).exp()).collect();
    let mut u2: Vec<f64> = log2
        .iter()
        .zip(&r)
        .map(|(l, &x)| xi.eval(0, x).signum() * (l - m2).exp())
        .collect();
    for v in [&mut u1, &mut u2] {
        let norm = trapezoid(&v.iter().map(|a| a * a).collect::<Vec<_>>(), h).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
    }
    Ok(RadialResult {
        spec: *spec,
        h,
        r,
        u,
        u1,
        u2,
    })
}

/// `max |-u'' + (U + l(l+1)/r^2 - E) u| / max |u|` over interior points of
/// channel 1 or 2.
pub fn channel_residual(result: &RadialResult, channel: usize) -> f64 {
    let (v, l, e) = match channel {
        1 => (&result.u1, result.spec.l1, result.spec.levels.e1),
        2 => (&result.u2, result.spec.l2, result.spec.levels.e2),
        _ => panic!("channel must be 1 or 2"),
    };
    let h = result.h;
    let cent = (l * (l + 1)) as f64;
    let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut worst = 0.0f64;
    for i in 1..v.len() - 1 {
        let r = result.r[i];
        let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        let res = -d2 + (result.u[i] + cent / (r * r) - e) * v[i];
        worst = worst.max(res.abs());
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(s: &str) -> ParsedFunction {
        ParsedFunction::parse(s).unwrap()
    }

    #[test]
    fn coupling_values() {
        assert_eq!(radial_coupling(0, 1), 2.0);
        assert_eq!(radial_coupling(3, 3), 0.0);
        assert_eq!(radial_coupling(1, 3), 10.0);
    }

    #[test]
    fn equal_channels_reduce_to_line() {
        let xi = pf("x^4+2*x^2-1");
        let spec = RadialSpec::new(2, 2, 0.0, 4.0).unwrap();
        for &r in &[0.3, 1.0, 2.7] {
            let line = potential(&xi, &spec.levels, r);
            let v = radial_potential(&xi, &spec, r);
            assert!((v - (line - 6.0 / (r * r))).abs() < 1e-9 * (1.0 + line.abs()));
        }
    }

    #[test]
    fn degenerate_levels_frozen_values() {
        let spec = RadialSpec::new(0, 1, 0.5, 0.5).unwrap();
        let v = radial_potential(&pf("sinh(x)"), &spec, 1.0);
        assert!((v + 0.668_194_726_508_023_3).abs() < 1e-13, "{v}");
        let v = radial_potential(&pf("x+x^3"), &spec, 1.0);
        assert!((v - 0.1875).abs() < 1e-14);
        assert!(matches!(
            RadialSpec::new(1, 1, 0.5, 0.5),
            Err(Error::DegenerateSpec(_))
        ));
    }

    #[test]
    fn oscillator_channels() {
        // xi = r with dE = 2 gives the isotropic oscillator, U = r^2
        let spec = RadialSpec::new(0, 1, 3.0, 5.0).unwrap();
        let xi = pf("x");
        let res = synthesize_radial(&xi, &spec, 8.0, 4000).unwrap();
        for (r, u) in res.r.iter().zip(&res.u).step_by(100) {
            assert!((u - r * r).abs() < 1e-10);
        }
        assert!(channel_residual(&res, 1) <= 1e-4);
        assert!(channel_residual(&res, 2) <= 1e-4);
    }

    #[test]
    fn degenerate_channels_residuals() {
        let spec = RadialSpec::new(0, 1, 0.5, 0.5).unwrap();
        let res = synthesize_radial(&pf("sinh(x)"), &spec, 40.0, 20000).unwrap();
        assert!(channel_residual(&res, 1) <= 1e-4);
        assert!(channel_residual(&res, 2) <= 1e-4);
    }

    #[test]
    fn non_monotone_generator_unsupported() {
        let spec = RadialSpec::new(0, 1, 1.0, 2.0).unwrap();
        assert!(matches!(
            synthesize_radial(&pf("x^2-2*x"), &spec, 5.0, 500),
            Err(Error::Unsupported(_))
        ));
    }
}
