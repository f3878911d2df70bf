//! Finite-difference eigensolver for `-d^2/dx^2 + U` with Dirichlet ends.
//!
//! This module only ever sees the sampled potential. Eigenvalues come from
//! Sturm-sequence bisection, eigenvectors from inverse iteration, and the
//! verifier combines two grids by Richardson extrapolation.

use serde::Serialize;

use crate::construct::{ConstructionResult, Grid, LevelPair};
use crate::quadrature::trapezoid;
use crate::{Error, Result};

pub const DEFAULT_NODE_FLOOR: f64 = 1e-6;
pub const OVERLAP_THRESHOLD: f64 = 0.999;
pub const CLUSTER_GAP: f64 = 1e-8;
/// `C` in the default eigenvalue tolerance `max(1e-5, C h^2 scale)`.
pub const TOLERANCE_CONSTANT: f64 = 0.25;

/// Symmetric tridiagonal matrix on the interior grid points.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    pub diagonal: Vec<f64>,
    pub off_diagonal: f64,
    pub h: f64,
    pub domain: (f64, f64),
}

impl TridiagonalOperator {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let b = self.off_diagonal.abs();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &d in &self.diagonal {
            lo = lo.min(d - 2.0 * b);
            hi = hi.max(d + 2.0 * b);
        }
        (lo, hi)
    }

    fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        let b = self.off_diagonal;
        for i in 0..n {
            let mut s = self.diagonal[i] * v[i];
            if i > 0 {
                s += b * v[i - 1];
            }
            if i + 1 < n {
                s += b * v[i + 1];
            }
            out[i] = s;
        }
    }
}

/// Three-point stencil on the interior of `grid`; `u` holds one value per
/// grid point, the boundary values are not used.
pub fn discretize(u: &[f64], grid: &Grid) -> Result<TridiagonalOperator> {
    if u.len() != grid.n {
        return Err(Error::InvalidGrid(format!(
            "{} potential samples for {} grid points",
            u.len(),
            grid.n
        )));
    }
    let h = grid.h();
    let inv = 1.0 / (h * h);
    let mut diagonal = Vec::with_capacity(grid.n - 2);
    for (i, &v) in u.iter().enumerate().take(grid.n - 1).skip(1) {
        if !v.is_finite() {
            return Err(Error::NonFinitePotential { x: grid.x(i) });
        }
        diagonal.push(2.0 * inv + v);
    }
    Ok(TridiagonalOperator {
        diagonal,
        off_diagonal: -inv,
        h,
        domain: (grid.a, grid.b),
    })
}

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(t: &TridiagonalOperator, lambda: f64) -> usize {
    let b2 = t.off_diagonal * t.off_diagonal;
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * b2);
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in t.diagonal.iter().enumerate() {
        d = if i == 0 { a - lambda } else { a - lambda - b2 / d };
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th eigenvalue (0-based) by bisection.
pub fn eigenvalue_by_index(t: &TridiagonalOperator, k: usize) -> f64 {
    let (mut lo, mut hi) = t.gershgorin();
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub index: usize,
    pub value: f64,
    /// Samples on the full grid including the zero boundary values,
    /// normalized by the trapezoid rule.
    #[serde(skip)]
    pub vector: Vec<f64>,
    pub nodes: usize,
}

/// Solves `(T - sigma) y = r` by Gaussian elimination without pivoting,
/// replacing tiny pivots.
fn shifted_solve(t: &TridiagonalOperator, sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let b = t.off_diagonal;
    let tiny = f64::EPSILON * t.norm();
    let mut piv = vec![0.0; n];
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut p = t.diagonal[i] - sigma;
        if i > 0 {
            let m = b / piv[i - 1];
            p -= m * b;
            y[i] -= m * y[i - 1];
        }
        if p.abs() < tiny {
            p = if p < 0.0 { -tiny } else { tiny };
        }
        piv[i] = p;
    }
    y[n - 1] /= piv[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = (y[i] - b * y[i + 1]) / piv[i];
    }
    y
}

fn start_vector(n: usize) -> Vec<f64> {
    // deterministic, with components along every eigenvector
    (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract())
        .collect()
}

fn unit(v: &mut [f64]) {
    let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= s);
}

fn inverse_iteration(
    t: &TridiagonalOperator,
    lambda: f64,
    against: &[&[f64]],
) -> Result<Vec<f64>> {
    let n = t.dim();
    let mut v = start_vector(n);
    unit(&mut v);
    let mut tv = vec![0.0; n];
    let tol = 1e-11 * t.norm() + 1e-9 * lambda.abs();
    let mut last = f64::INFINITY;
    for _ in 0..5 {
        v = shifted_solve(t, lambda, &v);
        for w in against {
            let dot: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(w.iter()).for_each(|(a, b)| *a -= dot * b);
        }
        unit(&mut v);
        t.apply(&v, &mut tv);
        last = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if last <= tol {
            return Ok(v);
        }
    }
    Err(Error::Convergence(format!(
        "inverse iteration at lambda = {lambda}: residual {last:e} after 5 steps (target {tol:e})"
    )))
}

fn finish_vector(t: &TridiagonalOperator, interior: Vec<f64>) -> Vec<f64> {
    let mut full = Vec::with_capacity(interior.len() + 2);
    full.push(0.0);
    full.extend(interior);
    full.push(0.0);
    let norm = trapezoid(&full.iter().map(|v| v * v).collect::<Vec<_>>(), t.h).sqrt();
    let max = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = full
        .iter()
        .copied()
        .find(|v| v.abs() > 1e-3 * max)
        .unwrap_or(1.0);
    let s = first.signum() / norm;
    full.iter_mut().for_each(|v| *v *= s);
    full
}

pub fn eigenpair_by_index(t: &TridiagonalOperator, k: usize) -> Result<EigenResult> {
    eigenpair_orthogonal_to(t, k, &[])
}

fn eigenpair_orthogonal_to(
    t: &TridiagonalOperator,
    k: usize,
    against: &[&[f64]],
) -> Result<EigenResult> {
    if k >= t.dim() {
        return Err(Error::InvalidGrid(format!(
            "eigenvalue index {k} exceeds dimension {}",
            t.dim()
        )));
    }
    let value = eigenvalue_by_index(t, k);
    let v = inverse_iteration(t, value, against)?;
    let vector = finish_vector(t, v);
    let nodes = count_nodes(&vector, DEFAULT_NODE_FLOOR);
    Ok(EigenResult {
        index: k,
        value,
        vector,
        nodes,
    })
}

/// Sign changes between successive samples above `floor * max|v|`.
/// Samples below the floor are skipped, so a zero that lands exactly on
/// a grid point still counts once.
pub fn count_nodes(v: &[f64], floor: f64) -> usize {
    let max = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if max == 0.0 {
        return 0;
    }
    let cut = floor * max;
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &a in v {
        if a.abs() <= cut {
            continue;
        }
        if last != 0.0 && a.signum() != last {
            nodes += 1;
        }
        last = a.signum();
    }
    nodes
}

/// Every other point of `grid`; needs an odd point count.
fn coarse(u: &[f64], grid: &Grid) -> Option<(Vec<f64>, Grid)> {
    if grid.n.is_multiple_of(2) || grid.n < 11 {
        return None;
    }
    let uc: Vec<f64> = u.iter().step_by(2).copied().collect();
    let g = Grid {
        a: grid.a,
        b: grid.b,
        n: uc.len(),
    };
    Some((uc, g))
}

#[derive(Debug, Clone, Serialize)]
pub struct StateCheck {
    /// Predicted spectral index.
    pub index: usize,
    pub expected: f64,
    /// Eigenvalue on the full grid.
    pub fine: f64,
    /// Eigenvalue on every other grid point, if the point count allowed it.
    pub coarse: Option<f64>,
    /// Richardson estimate, or the fine value without a coarse grid.
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
    pub overlap: f64,
    /// Distance to the nearest other eigenvalue.
    pub isolation: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Prediction {
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "E2")]
    pub e2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub predicted: Prediction,
    pub states: [StateCheck; 2],
    pub gap: f64,
    pub tolerance: f64,
    pub grid: Grid,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        let [s1, s2] = &self.states;
        format!(
            "indices ({}, {}): E1 {} -> {:.10} (err {:.2e}, nodes {}, overlap {:.6}), \
             E2 {} -> {:.10} (err {:.2e}, nodes {}, overlap {:.6}), tolerance {:.2e}",
            s1.index,
            s2.index,
            s1.expected,
            s1.value,
            s1.error,
            s1.nodes,
            s1.overlap,
            s2.expected,
            s2.value,
            s2.error,
            s2.nodes,
            s2.overlap,
            self.tolerance
        )
    }
}

pub fn default_tolerance(h: f64, levels: &LevelPair) -> f64 {
    let scale = 1.0f64.max(levels.e1.abs()).max(levels.e2.abs());
    1e-5f64.max(TOLERANCE_CONSTANT * h * h * scale)
}

/// Sampled data the verifier needs; a construction result or a table read
/// back from disk.
#[derive(Debug, Clone, Copy)]
pub struct SampledConstruction<'a> {
    pub grid: Grid,
    pub levels: LevelPair,
    pub u: &'a [f64],
    pub psi1: &'a [f64],
    pub psi2: &'a [f64],
}

impl<'a> From<&'a ConstructionResult> for SampledConstruction<'a> {
    fn from(r: &'a ConstructionResult) -> Self {
        SampledConstruction {
            grid: r.grid,
            levels: r.levels,
            u: &r.u,
            psi1: &r.psi1,
            psi2: &r.psi2,
        }
    }
}

/// Checks that `E1` and `E2` are the eigenvalues with indices `n1` and `n2`,
/// that the eigenvectors have that many nodes and that they match the
/// constructed wave functions. Returns the report whether or not it passes.
pub fn check_two_levels(
    data: SampledConstruction<'_>,
    n1: usize,
    n2: usize,
    tolerance: Option<f64>,
) -> Result<VerificationReport> {
    let t = discretize(data.u, &data.grid)?;
    let tc = match coarse(data.u, &data.grid) {
        Some((uc, gc)) => Some(discretize(&uc, &gc)?),
        None => None,
    };
    let tol = tolerance.unwrap_or_else(|| default_tolerance(data.grid.h(), &data.levels));
    let mut warnings = Vec::new();
    let mut states = Vec::with_capacity(2);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for (k, e, psi) in [(n1, data.levels.e1, data.psi1), (n2, data.levels.e2, data.psi2)] {
        let below = if k > 0 {
            Some(eigenvalue_by_index(&t, k - 1))
        } else {
            None
        };
        let fine_value = eigenvalue_by_index(&t, k);
        let above = if k + 1 < t.dim() {
            Some(eigenvalue_by_index(&t, k + 1))
        } else {
            None
        };
        let isolation = [below, above]
            .iter()
            .flatten()
            .map(|v| (v - fine_value).abs())
            .fold(f64::INFINITY, f64::min);
        let clustered = isolation < CLUSTER_GAP * fine_value.abs().max(1.0);
        if clustered {
            warnings.push(format!(
                "ClusterWarning: eigenvalue {k} lies within {isolation:e} of a neighbour"
            ));
        }
        let against: Vec<&[f64]> = if clustered {
            found.iter().map(|v| &v[1..v.len() - 1]).collect()
        } else {
            Vec::new()
        };
        let pair = eigenpair_orthogonal_to(&t, k, &against)?;
        let coarse_value = tc.as_ref().filter(|tc| k < tc.dim()).map(|tc| eigenvalue_by_index(tc, k));
        let value = match coarse_value {
            Some(c) => (4.0 * pair.value - c) / 3.0,
            None => pair.value,
        };
        let overlap = trapezoid(
            &pair.vector.iter().zip(psi).map(|(a, b)| a * b).collect::<Vec<_>>(),
            t.h,
        )
        .abs();
        states.push(StateCheck {
            index: k,
            expected: e,
            fine: pair.value,
            coarse: coarse_value,
            value,
            error: (value - e).abs(),
            nodes: pair.nodes,
            overlap,
            isolation,
        });
        found.push(pair.vector);
    }
    let clustered = !warnings.is_empty();
    let ok = |s: &StateCheck| {
        s.error <= tol && (clustered || (s.nodes == s.index && s.overlap >= OVERLAP_THRESHOLD))
    };
    let pass = states.iter().all(ok);
    let s2 = states.pop().unwrap();
    let s1 = states.pop().unwrap();
    Ok(VerificationReport {
        predicted: Prediction {
            n1,
            e1: data.levels.e1,
            n2,
            e2: data.levels.e2,
        },
        gap: s2.value - s1.value,
        states: [s1, s2],
        tolerance: tol,
        grid: data.grid,
        warnings,
        pass,
    })
}

/// Like [`check_two_levels`] with the indices from the singularity report,
/// but a failed check is an error carrying the report.
pub fn verify_two_levels(
    result: &ConstructionResult,
    report: &crate::classify::SingularityReport,
) -> Result<VerificationReport> {
    let rep = check_two_levels(result.into(), report.big_n1, report.big_n2, None)?;
    if rep.pass {
        Ok(rep)
    } else {
        Err(Error::Verification(Box::new(rep)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn operator(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> TridiagonalOperator {
        let g = Grid::new(a, b, n).unwrap();
        let u: Vec<f64> = g.points().into_iter().map(f).collect();
        discretize(&u, &g).unwrap()
    }

    #[test]
    fn particle_in_a_box() {
        let t = operator(|_| 0.0, 0.0, std::f64::consts::PI, 1001);
        assert!((eigenvalue_by_index(&t, 0) - 1.0).abs() < 1e-4);
        let p = eigenpair_by_index(&t, 1).unwrap();
        assert!((p.value - 4.0).abs() < 1e-4);
        assert_eq!(p.nodes, 1);
    }

    #[test]
    fn oscillator_levels_and_nodes() {
        let t = operator(|x| x * x, -8.0, 8.0, 4001);
        for (k, e) in [(0, 1.0), (1, 3.0), (2, 5.0), (4, 9.0)] {
            let p = eigenpair_by_index(&t, k).unwrap();
            assert!((p.value - e).abs() < 1e-4, "{k}: {}", p.value);
            assert_eq!(p.nodes, k);
        }
        assert_eq!(sturm_count(&t, 4.0), 2);
        assert_eq!(sturm_count(&t, t.gershgorin().0 - 1.0), 0);
    }

    #[test]
    fn second_order_convergence() {
        let e1 = eigenvalue_by_index(&operator(|x| x * x, -8.0, 8.0, 401), 1);
        let e2 = eigenvalue_by_index(&operator(|x| x * x, -8.0, 8.0, 801), 1);
        let ratio = (e1 - 3.0) / (e2 - 3.0);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn node_counting() {
        assert_eq!(count_nodes(&[1.0, 2.0, 0.5, 0.1], 1e-6), 0);
        assert_eq!(count_nodes(&[0.0, 1.0, 0.0, 1.0, 0.0], 1e-6), 0);
        assert_eq!(count_nodes(&[1.0, 0.0, -1.0], 1e-6), 1);
        assert_eq!(count_nodes(&[1e-9, -1e-9, 1.0, -1.0], 1e-6), 1);
    }

    #[test]
    fn sturm_count_is_monotone() {
        let t = operator(|x| x.powi(4) - 3.0 * x * x, -6.0, 6.0, 601);
        let mut last = 0;
        for i in 0..200 {
            let c = sturm_count(&t, -5.0 + 0.2 * i as f64);
            assert!(c >= last);
            last = c;
        }
    }
}
