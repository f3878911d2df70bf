//! End-to-end runs: analyze, orient, synthesize, verify.

use serde::Serialize;

use crate::classify::{analyze_singularities, predict_quantum_numbers, Prediction, SingularityReport};
use crate::construct::{synthesize_wavefunctions, ConstructionResult, Grid, LevelPair};
use crate::exprlang::ParsedFunction;
use crate::spectral::{check_two_levels, VerificationReport};
use crate::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 4001;
const BOUNDARY_RATIO: f64 = 1e-10;
const MAX_EXPANSIONS: usize = 6;

#[derive(Debug, Clone)]
pub struct Construction {
    /// The generating function actually used; the reciprocal of the input
    /// when the input had more nodes in the lower state.
    pub xi: ParsedFunction,
    pub inverted: bool,
    pub levels: LevelPair,
    pub report: SingularityReport,
    pub prediction: Prediction,
    pub result: ConstructionResult,
}

/// Classifies `xi`, replaces it by `1/xi` if the lower level would carry
/// more nodes, and synthesizes on `grid`.
pub fn construct(xi: &ParsedFunction, levels: LevelPair, grid: Grid) -> Result<Construction> {
    let (xi, report, prediction, inverted) = orient(xi, levels, (grid.a, grid.b))?;
    let result = synthesize_wavefunctions(&xi, &levels, &grid, &report)?;
    Ok(Construction {
        xi,
        inverted,
        levels,
        report,
        prediction,
        result,
    })
}

pub fn orient(
    xi: &ParsedFunction,
    levels: LevelPair,
    interval: (f64, f64),
) -> Result<(ParsedFunction, SingularityReport, Prediction, bool)> {
    let report = analyze_singularities(xi, levels.delta_e, interval)?;
    let prediction = predict_quantum_numbers(&report)?;
    if !prediction.inverted {
        return Ok((xi.clone(), report, prediction, false));
    }
    let inv = xi.reciprocal();
    let report = analyze_singularities(&inv, levels.delta_e, interval)?;
    let prediction = predict_quantum_numbers(&report)?;
    Ok((inv, report, prediction, true))
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n: usize,
    pub tolerance: Option<f64>,
    /// Grow the domain until the wave functions vanish at its ends, or
    /// failing that until the eigenvalues no longer move.
    pub auto_domain: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n: DEFAULT_GRID_POINTS,
            tolerance: None,
            auto_domain: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainStep {
    pub domain: (f64, f64),
    pub n: usize,
    pub boundary_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct VerifiedConstruction {
    pub construction: Construction,
    pub report: VerificationReport,
    pub domains: Vec<DomainStep>,
}

fn boundary_ratio(r: &ConstructionResult) -> f64 {
    let mut worst = 0.0f64;
    for psi in [&r.psi1, &r.psi2] {
        let max = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let edge = psi[0].abs().max(psi[psi.len() - 1].abs());
        worst = worst.max(edge / max);
    }
    worst
}

fn expanded(grid: Grid, factor: f64) -> Grid {
    let mid = 0.5 * (grid.a + grid.b);
    let half = 0.5 * (grid.b - grid.a) * factor;
    let h = grid.h();
    let mut n = (2.0 * half / h).round() as usize + 1;
    if n.is_multiple_of(2) {
        n += 1;
    }
    Grid {
        a: mid - half,
        b: mid + half,
        n,
    }
}

pub fn verify(c: &Construction, tolerance: Option<f64>) -> Result<VerificationReport> {
    check_two_levels(
        (&c.result).into(),
        c.prediction.n1,
        c.prediction.n2,
        tolerance,
    )
}

/// Builds and verifies; the returned report may be failing, callers decide
/// what that means.
pub fn construct_and_verify(
    xi: &ParsedFunction,
    levels: LevelPair,
    domain: (f64, f64),
    opts: VerifyOptions,
) -> Result<VerifiedConstruction> {
    let mut grid = Grid::new(domain.0, domain.1, opts.n)?;
    let mut domains = Vec::new();
    let mut c = construct(xi, levels, grid)?;
    let mut ratio = boundary_ratio(&c.result);
    domains.push(DomainStep {
        domain: (grid.a, grid.b),
        n: grid.n,
        boundary_ratio: ratio,
    });
    if opts.auto_domain {
        let mut tries = 0;
        while ratio >= BOUNDARY_RATIO && tries < MAX_EXPANSIONS {
            grid = expanded(grid, 1.5);
            c = construct(xi, levels, grid)?;
            ratio = boundary_ratio(&c.result);
            domains.push(DomainStep {
                domain: (grid.a, grid.b),
                n: grid.n,
                boundary_ratio: ratio,
            });
            tries += 1;
        }
    }
    let mut rep = verify(&c, opts.tolerance)?;
    // if the ends never became quiet, fall back to waiting for the
    // eigenvalues to settle
    if opts.auto_domain && ratio >= BOUNDARY_RATIO {
        for _ in 0..MAX_EXPANSIONS {
            let g2 = expanded(grid, 1.5);
            let c2 = match construct(xi, levels, g2) {
                Ok(c2) => c2,
                // the wider interval may expose structure of xi; keep the
                // current result
                Err(_) => break,
            };
            let rep2 = verify(&c2, opts.tolerance)?;
            let shift = rep
                .states
                .iter()
                .zip(&rep2.states)
                .map(|(a, b)| (a.value - b.value).abs())
                .fold(0.0, f64::max);
            domains.push(DomainStep {
                domain: (g2.a, g2.b),
                n: g2.n,
                boundary_ratio: boundary_ratio(&c2.result),
            });
            if shift <= rep.tolerance / 10.0 {
                break;
            }
            grid = g2;
            c = c2;
            rep = rep2;
            ratio = boundary_ratio(&c.result);
        }
    }
    if ratio >= BOUNDARY_RATIO {
        rep.warnings.push(format!(
            "wave functions at the domain ends are {ratio:.2e} of their maximum"
        ));
    }
    if rep.pass && c.inverted {
        rep.warnings.push("generator inverted: lower level carries the nodes of 1/xi".to_string());
    }
    Ok(VerifiedConstruction {
        construction: c,
        report: rep,
        domains,
    })
}

/// As [`construct_and_verify`], failing with [`Error::Verification`] when a
/// tolerance is missed.
pub fn verify_strict(
    xi: &ParsedFunction,
    levels: LevelPair,
    domain: (f64, f64),
    opts: VerifyOptions,
) -> Result<VerifiedConstruction> {
    let v = construct_and_verify(xi, levels, domain, opts)?;
    if v.report.pass {
        Ok(v)
    } else {
        Err(Error::Verification(Box::new(v.report)))
    }
}
