//! Built-in generating functions with known closed-form potentials.
//!
//! | name          | generator                                   | states  |
//! |---------------|---------------------------------------------|---------|
//! | harmonic      | `x`                                         | 0, 1    |
//! | harmonic-odd  | `2x^2 - 3`                                  | 1, 3    |
//! | quartic       | `x^4 + 2 x0^2 x^2 - x1^4`                   | 0, 2    |
//! | sextic        | `eta/(a - beta eta)`, `W+ = a x + b x^3`    | 0, 1    |
//! | hyperbolic    | `eta/(d - beta eta)`, `W+ = A(sinh x - sinh x0)` | 0, 1 |
//! | decatic       | Möbius image of a quartic polynomial `eta`  | 0,4 / 2,4 |

use std::collections::BTreeMap;

use serde::Serialize;

use crate::construct::LevelPair;
use crate::deform::CanonicalDeformParams;
use crate::exprlang::{Expression, ParsedFunction};
use crate::{Error, Result};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub generator: &'static str,
    pub parameters: Vec<ParamSpec>,
    pub validity: &'static str,
    pub has_reference: bool,
}

/// A base function and the canonical deformation producing the entry.
#[derive(Debug, Clone)]
pub struct Deformation {
    pub eta: ParsedFunction,
    pub params: CanonicalDeformParams,
}

/// `W+` with its `delta` and the constant fixing the normalization of
/// `eta = K exp(delta int dx/W+)`.
#[derive(Debug, Clone)]
pub struct WplusGenerator {
    pub wplus: ParsedFunction,
    pub delta: f64,
    pub eta_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: &'static str,
    pub params: Params,
    pub xi: ParsedFunction,
    pub levels: LevelPair,
    pub expected: (usize, usize),
    pub domain: (f64, f64),
    pub deformation: Option<Deformation>,
    pub wplus: Option<WplusGenerator>,
}

const NAMES: [&str; 6] = [
    "harmonic",
    "harmonic-odd",
    "quartic",
    "sextic",
    "hyperbolic",
    "decatic",
];

fn p(name: &'static str, default: f64, description: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        description,
    }
}

fn info(name: &str) -> Option<EntryInfo> {
    let e = match name {
        "harmonic" => EntryInfo {
            name: "harmonic",
            description: "ground and first excited states of an oscillator",
            generator: "xi = x",
            parameters: vec![p("e1", 1.0, "lower level E1"), p("de", 2.0, "gap E2 - E1")],
            validity: "de > 0",
            has_reference: true,
        },
        "harmonic-odd" => EntryInfo {
            name: "harmonic-odd",
            description: "first and third oscillator states; shared node at a critical point",
            generator: "xi = 2x^2 - 3, dE = 4",
            parameters: vec![p("e1", 3.0, "lower level E1")],
            validity: "none",
            has_reference: true,
        },
        "quartic" => EntryInfo {
            name: "quartic",
            description: "ground and second excited states of a rational potential",
            generator: "xi = x^4 + 2 x0^2 x^2 - x1^4, dE = 4 x0^2/x1^4",
            parameters: vec![
                p("x0", 1.0, "shape parameter"),
                p("x1", 1.0, "shape parameter"),
                p("e1", 0.0, "lower level E1"),
            ],
            validity: "x0 > 0, x1 > 0",
            has_reference: true,
        },
        "sextic" => EntryInfo {
            name: "sextic",
            description: "deformed sextic oscillator, W+ = a x + b x^3",
            generator: "xi = eta/(a - beta eta), eta = x x0/sqrt(x^2 + x0^2), x0^2 = a/b, dE = a",
            parameters: vec![
                p("a", 1.0, "linear coefficient of W+, equal to dE"),
                p("b", 1.0, "cubic coefficient of W+"),
                p("beta", 0.0, "deformation parameter"),
                p("e1", 0.0, "lower level E1"),
            ],
            validity: "a > 0, b > 0, beta^2 < a b",
            has_reference: true,
        },
        "hyperbolic" => EntryInfo {
            name: "hyperbolic",
            description: "deformed hyperbolic family, W+ = A(sinh x - sinh x0)",
            generator: "xi = eta/(delta - beta eta), eta = sinh((x-x0)/2)/cosh((x+x0)/2), dE = delta",
            parameters: vec![
                p("delta", 1.0, "gap E2 - E1"),
                p("x0", 0.5, "node of the excited state"),
                p("beta", 0.0, "deformation parameter"),
                p("e1", 0.0, "lower level E1"),
            ],
            validity: "delta > 0, -delta exp(-x0) < beta < delta exp(x0)",
            has_reference: true,
        },
        "decatic" => EntryInfo {
            name: "decatic",
            description: "polynomial potential of degree ten from a deformed quartic eta",
            generator: "xi = (2 beta eta + dE)/(2 beta eta - dE), eta = V0 + mu^2 - (x^2 - mu)^2, beta = 8 omega",
            parameters: vec![
                p("mu", 1.0, "shape parameter"),
                p("omega", 1.0, "sign of the deformation, +1 or -1"),
                p("mean", 0.0, "mean energy (E1 + E2)/2"),
            ],
            validity: "mu > 0, omega = +1 or -1",
            has_reference: true,
        },
        _ => return None,
    };
    Some(e)
}

pub fn list() -> Vec<EntryInfo> {
    NAMES.iter().filter_map(|n| info(n)).collect()
}

pub fn entry_info(name: &str) -> Result<EntryInfo> {
    info(name).ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

/// Defaults merged with `given`; unknown keys are rejected.
pub fn resolve_params(name: &str, given: &Params) -> Result<Params> {
    let entry = entry_info(name)?;
    let mut out: Params = entry
        .parameters
        .iter()
        .map(|s| (s.name.to_string(), s.default))
        .collect();
    for (k, v) in given {
        if !out.contains_key(k) {
            let known: Vec<&str> = entry.parameters.iter().map(|s| s.name).collect();
            return Err(invalid(
                name,
                format!("unknown parameter '{k}' (expected one of {})", known.join(", ")),
            ));
        }
        if !v.is_finite() {
            return Err(invalid(name, format!("parameter {k} = {v} is not finite")));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn invalid(entry: &str, message: String) -> Error {
    Error::Validity {
        entry: entry.to_string(),
        message,
    }
}

fn x() -> Expression {
    Expression::var()
}

fn c(v: f64) -> Expression {
    Expression::constant(v)
}

struct Decatic {
    mu: f64,
    omega: f64,
    beta: f64,
    v0: f64,
    delta_e: f64,
}

impl Decatic {
    fn new(mu: f64, omega: f64) -> Decatic {
        let beta = 8.0 * omega;
        let v0 = -0.5 * mu * mu - 6.0 / (beta * mu);
        let delta_e = (16.0 / (mu * mu) * (4.0 * mu.powi(6) + 4.0 * omega * mu.powi(3) + 9.0)).sqrt();
        Decatic {
            mu,
            omega,
            beta,
            v0,
            delta_e,
        }
    }

    fn eta(&self) -> Expression {
        let z = x().powi(2) - self.mu;
        c(self.v0 + self.mu * self.mu) - z.powi(2)
    }

    fn nodes(&self, q: f64) -> usize {
        if q > self.mu * self.mu {
            0
        } else if q > 0.0 {
            4
        } else {
            2
        }
    }

    fn expected(&self) -> (usize, usize) {
        let base = 0.5 * self.mu * self.mu + 0.75 * self.omega / self.mu;
        let shift = self.delta_e * self.omega / 16.0;
        (self.nodes(base + shift), self.nodes(base - shift))
    }
}

fn get(params: &Params, k: &str) -> f64 {
    params[k]
}

pub fn instantiate_entry(name: &str, given: &Params) -> Result<Instance> {
    let params = resolve_params(name, given)?;
    let name: &'static str = NAMES.iter().find(|n| **n == name).copied().unwrap();
    let g = |k: &str| get(&params, k);
    let mut deformation = None;
    let mut wplus = None;
    let (xi, levels, expected, domain) = match name {
        "harmonic" => {
            let de = g("de");
            if !(de > 0.0) {
                return Err(invalid(name, format!("requires de > 0 (got {de})")));
            }
            let l = (128.0 / de).sqrt();
            (x(), LevelPair::from_gap(g("e1"), de)?, (0, 1), (-l, l))
        }
        "harmonic-odd" => {
            let xi = 2.0 * x().powi(2) - 3.0;
            (xi, LevelPair::from_gap(g("e1"), 4.0)?, (1, 3), (-8.0, 8.0))
        }
        "quartic" => {
            let (x0, x1) = (g("x0"), g("x1"));
            if !(x0 > 0.0 && x1 > 0.0) {
                return Err(invalid(name, format!("requires x0 > 0 and x1 > 0 (got {x0}, {x1})")));
            }
            let xi = x().powi(4) + 2.0 * x0 * x0 * x().powi(2) - x1.powi(4);
            let de = 4.0 * x0 * x0 / x1.powi(4);
            let l = 12.0 * x1 * x1 / x0;
            (xi, LevelPair::from_gap(g("e1"), de)?, (0, 2), (-l, l))
        }
        "sextic" => {
            let (a, b, beta) = (g("a"), g("b"), g("beta"));
            if !(a > 0.0 && b > 0.0) {
                return Err(invalid(name, format!("requires a > 0 and b > 0 (got {a}, {b})")));
            }
            if !(beta * beta < a * b) {
                return Err(invalid(
                    name,
                    format!("requires beta^2 < a b for normalizable states (got {} >= {})", beta * beta, a * b),
                ));
            }
            let x0 = (a / b).sqrt();
            let eta = x0 * x() / (x().powi(2) + x0 * x0).sqrt();
            let xi = eta.clone() / (a - beta * eta.clone());
            deformation = Some(Deformation {
                eta: ParsedFunction::new(eta),
                params: CanonicalDeformParams::new(beta, a, a)?,
            });
            wplus = Some(WplusGenerator {
                wplus: ParsedFunction::new(a * x() + b * x().powi(3)),
                delta: a,
                eta_scale: 1.0,
            });
            let b_eff = b - beta.abs() * (b / a).sqrt();
            let l = 1.2 * (160.0 / a).sqrt().min((320.0 / b_eff).powf(0.25));
            (xi, LevelPair::from_gap(g("e1"), a)?, (0, 1), (-l, l))
        }
        "hyperbolic" => {
            let (delta, x0, beta) = (g("delta"), g("x0"), g("beta"));
            if !(delta > 0.0) {
                return Err(invalid(name, format!("requires delta > 0 (got {delta})")));
            }
            let (lo, hi) = (-delta * (-x0).exp(), delta * x0.exp());
            if !(lo < beta && beta < hi) {
                return Err(invalid(
                    name,
                    format!("requires -delta exp(-x0) < beta < delta exp(x0), i.e. {lo} < beta < {hi} (got {beta})"),
                ));
            }
            let eta = (0.5 * (x() - x0)).sinh() / (0.5 * (x() + x0)).cosh();
            let xi = eta.clone() / (delta - beta * eta.clone());
            deformation = Some(Deformation {
                eta: ParsedFunction::new(eta),
                params: CanonicalDeformParams::new(beta, delta, delta)?,
            });
            let amp = delta / x0.cosh();
            wplus = Some(WplusGenerator {
                wplus: ParsedFunction::new(amp * (x().sinh() - x0.sinh())),
                delta,
                eta_scale: 0.5 / x0.cosh(),
            });
            let l = (60.0 * x0.cosh() / delta).max(1.0).acosh() + x0.abs() + 1.0;
            (xi, LevelPair::from_gap(g("e1"), delta)?, (0, 1), (-l, l))
        }
        "decatic" => {
            let (mu, omega) = (g("mu"), g("omega"));
            if !(mu > 0.0) {
                return Err(invalid(name, format!("requires mu > 0 (got {mu})")));
            }
            if omega != 1.0 && omega != -1.0 {
                return Err(invalid(name, format!("requires omega = +1 or -1 (got {omega})")));
            }
            let d = Decatic::new(mu, omega);
            let eta = d.eta();
            let two_b_eta = 2.0 * d.beta * eta.clone();
            let xi = (two_b_eta.clone() + d.delta_e) / (two_b_eta - d.delta_e);
            deformation = Some(Deformation {
                eta: ParsedFunction::new(eta),
                params: CanonicalDeformParams::new(d.beta, 0.0, d.delta_e)?,
            });
            let mean = g("mean");
            let levels = LevelPair::from_gap(mean - 0.5 * d.delta_e, d.delta_e)?;
            let l = 2.9 + 0.6 * mu.sqrt();
            (xi, levels, d.expected(), (-l, l))
        }
        _ => unreachable!(),
    };
    Ok(Instance {
        name,
        params,
        xi: ParsedFunction::new(xi),
        levels,
        expected,
        domain,
        deformation,
        wplus,
    })
}

/// Closed-form potential of the entry at `x`.
pub fn reference_values(name: &str, given: &Params, x: f64) -> Result<Option<f64>> {
    let inst = instantiate_entry(name, given)?;
    let g = |k: &str| get(&inst.params, k);
    let e1 = inst.levels.e1;
    let v = match name {
        "harmonic" => {
            let de = g("de");
            e1 - 0.5 * de + 0.25 * de * de * x * x
        }
        "harmonic-odd" => e1 + x * x - 3.0,
        "quartic" => {
            let (x0, x1) = (g("x0"), g("x1"));
            let (q0, q1) = (x0.powi(4), x1.powi(4));
            let a0 = 2.0 * x0 * x0 * (2.0 + q0 / q1);
            let a1 = (3.0 * q1 + q0) * (5.0 - q0 / q1);
            let a2 = -(3.0 * q1 + q0) * x0 * x0 * (7.0 + q0 / q1);
            let s = x * x + x0 * x0;
            e1 + x * x * q0 / (4.0 * q1 * q1) + (a0 + a1 / s + a2 / (s * s)) / (4.0 * q1)
        }
        "sextic" => {
            let (a, b, beta) = (g("a"), g("b"), g("beta"));
            let x0sq = a / b;
            let x0 = x0sq.sqrt();
            let s = x0sq + x * x;
            let r = s.sqrt();
            let linear = beta * x / x0
                * (-x0sq / r + 3.0 * r + 0.5 * a * r.powi(3) - 0.5 * a * r.powi(5) / x0sq);
            let u0 = 0.25 * b * b * x.powi(6) + 0.5 * a * b * x.powi(4) + 0.25 * (a * a - 12.0 * b) * x * x
                - 0.5 * a
                + 0.75 / s
                + 0.75 * x0sq / (s * s);
            e1 + linear + u0 + beta * beta * x.powi(4) * s / (4.0 * x0sq)
        }
        "hyperbolic" => {
            let (d, x0, beta) = (g("delta"), g("x0"), g("beta"));
            let (ch0, sh0) = (x0.cosh(), x0.sinh());
            let sdiff = x.sinh() - sh0;
            let u0 = d * d / (4.0 * ch0 * ch0) * sdiff * sdiff - d / (2.0 * ch0) * (2.0 * x.cosh() - ch0) + 0.25;
            let sm = (0.5 * (x - x0)).sinh();
            let cp = (0.5 * (x + x0)).cosh();
            let mean = e1 + 0.5 * d;
            mean - 0.5 * d
                + u0
                + beta * sm / (ch0 * cp) * (x.cosh() + ch0 - d * sdiff * sdiff / (2.0 * ch0))
                + beta * beta * sm.powi(4) / (ch0 * ch0)
        }
        "decatic" => {
            let (mu, w, mean) = (g("mu"), g("omega"), g("mean"));
            let y2 = x * x;
            let poly = y2.powi(5) - 6.0 * mu * y2.powi(4) + (13.0 * mu * mu + 3.0 * w / mu) * y2.powi(3)
                - (12.0 * mu.powi(3) + 22.0 * w) * y2 * y2
                + (4.0 * mu.powi(4) + 31.0 * mu * w + 9.0 / (4.0 * mu * mu)) * y2;
            poly + mean - 7.5 / mu - 6.0 * w * mu * mu
        }
        _ => return Ok(None),
    };
    Ok(Some(v))
}

pub fn names() -> &'static [&'static str] {
    &NAMES
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{analyze_singularities, predict_quantum_numbers};
    use crate::construct::PotentialEvaluator;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn listing_covers_all_entries() {
        let l = list();
        assert_eq!(l.len(), 6);
        assert!(l.iter().all(|e| e.has_reference));
        assert!(matches!(entry_info("nope"), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn sextic_validity() {
        let inst = instantiate_entry("sextic", &params(&[("beta", 0.5)])).unwrap();
        assert_eq!(inst.expected, (0, 1));
        assert_eq!(inst.levels.delta_e, 1.0);
        assert!(matches!(
            instantiate_entry("sextic", &params(&[("beta", 1.0)])),
            Err(Error::Validity { .. })
        ));
    }

    #[test]
    fn hyperbolic_validity() {
        let p = params(&[("delta", 1.0), ("x0", 0.5), ("beta", 2.0)]);
        assert!(matches!(instantiate_entry("hyperbolic", &p), Err(Error::Validity { .. })));
        let p = params(&[("delta", 1.0), ("x0", 0.5), ("beta", -0.7)]);
        assert!(instantiate_entry("hyperbolic", &p).is_err());
        let p = params(&[("delta", 1.0), ("x0", 0.5), ("beta", 1.6)]);
        assert!(instantiate_entry("hyperbolic", &p).is_ok());
    }

    #[test]
    fn decatic_gaps_and_states() {
        let up = instantiate_entry("decatic", &params(&[("omega", 1.0)])).unwrap();
        assert!((up.levels.delta_e - 272f64.sqrt()).abs() < 1e-12);
        assert!((up.levels.delta_e - 16.492_422_502_470_6).abs() < 1e-12);
        assert_eq!(up.expected, (0, 4));
        let down = instantiate_entry("decatic", &params(&[("omega", -1.0)])).unwrap();
        assert!((down.levels.delta_e - 12.0).abs() < 1e-12);
        assert_eq!(down.expected, (2, 4));
        assert!(instantiate_entry("decatic", &params(&[("omega", 0.5)])).is_err());
    }

    #[test]
    fn unknown_parameter_rejected() {
        assert!(matches!(
            instantiate_entry("quartic", &params(&[("y0", 1.0)])),
            Err(Error::Validity { .. })
        ));
    }

    #[test]
    fn frozen_reference_values() {
        let v = reference_values("quartic", &Params::new(), 0.0).unwrap().unwrap();
        assert!((v + 2.5).abs() < 1e-14);
        let v = reference_values("decatic", &Params::new(), 1.0).unwrap().unwrap();
        assert!((v - 0.75).abs() < 1e-12);
        let v = reference_values("sextic", &Params::new(), 0.0).unwrap().unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let p = params(&[("beta", 0.5)]);
        for (x, want) in [(0.3, 0.895_075_846_549_203), (1.1, -0.967_690_852_647_883), (-2.0, 33.779_689_437_998_5)] {
            let v = reference_values("sextic", &p, x).unwrap().unwrap();
            assert!((v - want).abs() < 1e-11, "{x}: {v}");
        }
        let p = params(&[("delta", 1.0), ("x0", 0.5), ("beta", 0.3)]);
        for (x, want) in [
            (0.1, -0.211_557_667_172_344),
            (0.9, -0.366_101_998_823_778),
            (-1.3, -0.181_688_422_171_011),
            (2.2, -0.340_875_520_055_168),
        ] {
            let v = reference_values("hyperbolic", &p, x).unwrap().unwrap();
            assert!((v - want).abs() < 1e-11, "{x}: {v}");
        }
    }

    #[test]
    fn construction_matches_references() {
        let cases: Vec<(&str, Params)> = vec![
            ("harmonic", params(&[("de", 3.0)])),
            ("harmonic-odd", Params::new()),
            ("quartic", params(&[("x0", 1.3), ("x1", 0.8), ("e1", 0.4)])),
            ("sextic", params(&[("a", 2.0), ("b", 0.5), ("beta", 0.3), ("e1", 1.0)])),
            ("hyperbolic", params(&[("delta", 1.5), ("x0", -0.4), ("beta", 0.8)])),
            ("decatic", params(&[("mu", 1.4), ("omega", -1.0), ("mean", 2.0)])),
        ];
        for (name, p) in cases {
            let inst = instantiate_entry(name, &p).unwrap();
            let rep = analyze_singularities(&inst.xi, inst.levels.delta_e, inst.domain).unwrap();
            let pred = predict_quantum_numbers(&rep).unwrap();
            assert_eq!((pred.n1, pred.n2), inst.expected, "{name}");
            let ev = PotentialEvaluator::new(&inst.xi, inst.levels, &rep);
            let (a, b) = inst.domain;
            for i in 0..=200 {
                let x = a + (b - a) * (i as f64 + 0.37) / 201.0;
                let r = reference_values(name, &p, x).unwrap().unwrap();
                let u = ev.eval(x);
                assert!((u - r).abs() <= 1e-6 * (1.0 + r.abs()), "{name} at {x}: {u} vs {r}");
            }
        }
    }
}
