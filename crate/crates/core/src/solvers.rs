//! Iterative solvers for finding a point in `U ∩ V`.
//!
//! Every solver monitors the shadow sequence `z^k = P_U x^k` and stops once
//! `||P_{U∩V} z^k - z^k||` falls below the tolerance of the
//! [`StoppingRule`], or when the iteration budget is exhausted.
//!
//! ```
//! use gap_core::prelude::*;
//! use nalgebra::DVector;
//!
//! let u = Subspace::coordinate(3, &[0, 1]).unwrap();
//! let v = Subspace::from_spanning_set(
//!     &nalgebra::DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.3]),
//!     1e-12,
//! )
//! .unwrap();
//! let pair = SubspacePair::new(u, v, DEFAULT_ZERO_TOL).unwrap();
//! let x0 = DVector::from_vec(vec![1.0, 2.0, 3.0]);
//! let trace = run_adaptive(&pair, &x0, 1.0, &StoppingRule::default(), DEFAULT_EPSILON_CAP).unwrap();
//! assert_eq!(trace.termination, Termination::Converged);
//! ```

use nalgebra::{DMatrix, DVector};

use crate::compensated::DoubleVector;
use crate::error::{GapError, Result};
use crate::operators::{gap_step_unchecked, GapParameters};
use crate::subspace::{intersection_subspace, principal_angles, PrincipalAngleSet, Subspace};

/// Default gap kept between the adaptive relaxation and 2.
pub const DEFAULT_EPSILON_CAP: f64 = 1e-6;

/// Relative threshold under which two iterates count as equal in the
/// angle estimate.
const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
        }
    }
}

impl StoppingRule {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(GapError::InvalidParameter(format!(
                "stopping tolerance must be positive, got {tolerance}"
            )));
        }
        if max_iterations == 0 {
            return Err(GapError::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(Self {
            tolerance,
            max_iterations,
        })
    }
}

/// Two subspaces together with their intersection, which the stopping rule
/// needs at every iteration.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    pub u: Subspace,
    pub v: Subspace,
    pub intersection: Subspace,
    u_perp: DMatrix<f64>,
    v_perp: DMatrix<f64>,
}

impl SubspacePair {
    pub fn new(u: Subspace, v: Subspace, zero_tol: f64) -> Result<Self> {
        let intersection = intersection_subspace(&u, &v, zero_tol)?;
        let u_perp = u.orthogonal_complement().basis().clone();
        let v_perp = v.orthogonal_complement().basis().clone();
        Ok(Self {
            u,
            v,
            intersection,
            u_perp,
            v_perp,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.ambient_dim()
    }

    pub fn principal_angles(&self, zero_tol: f64) -> Result<PrincipalAngleSet> {
        principal_angles(&self.u, &self.v, zero_tol)
    }

    /// `||P_{U∩V} z - z||` for the shadow `z = P_U x`.
    pub fn shadow_residual(&self, x: &DVector<f64>) -> f64 {
        let z = self.u.project_unchecked(x);
        (self.intersection.project_unchecked(&z) - z).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iters",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub shadow_residual: f64,
    /// Friedrichs-angle estimate computed during step `k - 1 -> k`.
    pub angle_estimate: Option<f64>,
    /// Relaxation used for step `k - 1 -> k`.
    pub alpha_used: Option<f64>,
}

/// Per-iteration log of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    pub final_point: DVector<f64>,
    pub iteration_count: usize,
    /// Smallest angle estimate over the whole run, including unrecorded
    /// iterations. Adaptive runs only.
    pub min_angle_estimate: Option<f64>,
}

impl SolverTrace {
    pub fn final_record(&self) -> &IterationRecord {
        self.iterations.last().expect("traces always hold the final iterate")
    }

    pub fn final_residual(&self) -> f64 {
        self.final_record().shadow_residual
    }

    pub fn final_angle_estimate(&self) -> Option<f64> {
        self.iterations.iter().rev().find_map(|r| r.angle_estimate)
    }
}

fn check_start(pair: &SubspacePair, x0: &DVector<f64>) -> Result<()> {
    pair.u.check_len(x0.len())?;
    pair.v.check_len(x0.len())
}

struct Recorder {
    every: usize,
    records: Vec<IterationRecord>,
}

impl Recorder {
    fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            records: Vec::new(),
        }
    }

    fn offer(&mut self, record: IterationRecord, is_final: bool) {
        if is_final || record.k.is_multiple_of(self.every) {
            self.records.push(record);
        }
    }
}

/// Iterates `x^{k+1} = S x^k` with fixed parameters.
pub fn run_fixed(
    params: &GapParameters,
    pair: &SubspacePair,
    x0: &DVector<f64>,
    rule: &StoppingRule,
    record_every: usize,
) -> Result<SolverTrace> {
    check_start(pair, x0)?;
    let mut recorder = Recorder::new(record_every);
    let mut x = x0.clone();
    let mut k = 0;
    loop {
        let residual = pair.shadow_residual(&x);
        let converged = residual < rule.tolerance;
        let exhausted = k >= rule.max_iterations;
        let record = IterationRecord {
            k,
            shadow_residual: residual,
            angle_estimate: None,
            alpha_used: None,
        };
        recorder.offer(record, converged || exhausted);
        if converged || exhausted {
            let termination = if converged {
                Termination::Converged
            } else {
                Termination::MaxIterations
            };
            return Ok(SolverTrace {
                iterations: recorder.records,
                termination,
                final_point: x,
                iteration_count: k,
                min_angle_estimate: None,
            });
        }
        x = gap_step_unchecked(params, &pair.u, &pair.v, &x);
        k += 1;
    }
}

/// Friedrichs-angle estimate from the angle at `y` between `x - y` and
/// `z - y`. Returns `pi/2` when either difference vanishes.
pub fn estimate_angle(x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() || z.len() != y.len() {
        return Err(GapError::DimensionMismatch {
            expected: y.len(),
            found: if x.len() != y.len() { x.len() } else { z.len() },
        });
    }
    Ok(angle_between_steps(&(x - y), &(z - y), x.norm(), z.norm()))
}

/// Angle between two step vectors; `pi/2` when either is negligible
/// relative to the point it was taken from.
fn angle_between_steps(d1: &DVector<f64>, d2: &DVector<f64>, scale1: f64, scale2: f64) -> f64 {
    let (n1, n2) = (d1.norm(), d2.norm());
    if n1 <= DEGENERACY_TOL * (1.0 + scale1) || n2 <= DEGENERACY_TOL * (1.0 + scale2) {
        return std::f64::consts::FRAC_PI_2;
    }
    (d1.dot(d2).abs() / (n1 * n2)).clamp(0.0, 1.0).acos()
}

/// Adaptive GAP: `y = P_V^{a_k} x`, `x+ = P_U^{a_k} y`, with the relaxation
/// updated from the angle estimate at every step and capped at
/// `2 - epsilon_cap`.
///
/// The iterate is carried in double-length arithmetic so that the two
/// steps entering the estimate stay accurate even when they are many
/// orders of magnitude shorter than the iterate itself.
pub fn run_adaptive(
    pair: &SubspacePair,
    x0: &DVector<f64>,
    alpha0: f64,
    rule: &StoppingRule,
    epsilon_cap: f64,
) -> Result<SolverTrace> {
    run_adaptive_recorded(pair, x0, alpha0, rule, epsilon_cap, 1)
}

pub fn run_adaptive_recorded(
    pair: &SubspacePair,
    x0: &DVector<f64>,
    alpha0: f64,
    rule: &StoppingRule,
    epsilon_cap: f64,
    record_every: usize,
) -> Result<SolverTrace> {
    check_start(pair, x0)?;
    if !(alpha0 > 0.0 && alpha0 < 2.0) {
        return Err(GapError::InvalidParameter(format!(
            "initial relaxation must lie in (0, 2), got {alpha0}"
        )));
    }
    if !(epsilon_cap >= 0.0) {
        return Err(GapError::InvalidParameter(format!(
            "epsilon cap must be nonnegative, got {epsilon_cap}"
        )));
    }
    let cap = 2.0 - epsilon_cap;
    let mut recorder = Recorder::new(record_every);
    let mut x = DoubleVector::new(x0);
    let mut alpha = alpha0;
    let mut last: (Option<f64>, Option<f64>) = (None, None);
    let mut min_estimate: Option<f64> = None;
    let mut k = 0;
    loop {
        let point = x.value();
        let residual = pair.shadow_residual(&point);
        let converged = residual < rule.tolerance;
        let exhausted = k >= rule.max_iterations;
        let record = IterationRecord {
            k,
            shadow_residual: residual,
            angle_estimate: last.0,
            alpha_used: last.1,
        };
        recorder.offer(record, converged || exhausted);
        if converged || exhausted {
            let termination = if converged {
                Termination::Converged
            } else {
                Termination::MaxIterations
            };
            return Ok(SolverTrace {
                iterations: recorder.records,
                termination,
                final_point: point,
                iteration_count: k,
                min_angle_estimate: min_estimate,
            });
        }
        let (y, to_y) = x.relaxed_step(&pair.v_perp, alpha);
        let (next, to_next) = y.relaxed_step(&pair.u_perp, alpha);
        let theta = angle_between_steps(&to_y, &to_next, x.norm(), next.norm());
        min_estimate = Some(min_estimate.map_or(theta, |m: f64| m.min(theta)));
        last = (Some(theta), Some(alpha));
        alpha = (2.0 / (1.0 + theta.sin())).min(cap);
        x = next;
        k += 1;
    }
}

/// Empirical contraction factor: `exp` of the least-squares slope of
/// `ln(residual)` against `k` over the records with `k >= burn_in`.
pub fn fit_observed_rate(trace: &SolverTrace, burn_in: usize) -> Result<f64> {
    let window: Vec<&IterationRecord> = trace.iterations.iter().filter(|r| r.k >= burn_in).collect();
    let needed = 10;
    if window.len() < needed {
        return Err(GapError::InsufficientTrace {
            needed,
            found: window.len(),
        });
    }
    if window.iter().any(|r| !(r.shadow_residual > 0.0)) {
        return Err(GapError::InsufficientTrace {
            needed,
            found: window.iter().filter(|r| r.shadow_residual > 0.0).count(),
        });
    }
    let m = window.len() as f64;
    let mean_k = window.iter().map(|r| r.k as f64).sum::<f64>() / m;
    let mean_l = window.iter().map(|r| r.shadow_residual.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in &window {
        let dk = r.k as f64 - mean_k;
        sxy += dk * (r.shadow_residual.ln() - mean_l);
        sxx += dk * dk;
    }
    Ok((sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{optimal_parameters, preset, Preset};
    use crate::subspace::DEFAULT_ZERO_TOL;
    use nalgebra::DMatrix;

    fn line(theta: f64) -> Subspace {
        Subspace::from_orthonormal(DMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()])).unwrap()
    }

    fn dv(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn synthetic(residuals: impl Iterator<Item = f64>) -> SolverTrace {
        let iterations: Vec<IterationRecord> = residuals
            .enumerate()
            .map(|(k, r)| IterationRecord {
                k,
                shadow_residual: r,
                angle_estimate: None,
                alpha_used: None,
            })
            .collect();
        SolverTrace {
            iteration_count: iterations.len() - 1,
            iterations,
            termination: Termination::Converged,
            final_point: DVector::zeros(1),
            min_angle_estimate: None,
        }
    }

    #[test]
    fn start_in_intersection_converges_immediately() {
        let u = Subspace::coordinate(3, &[0, 1]).unwrap();
        let v = Subspace::coordinate(3, &[1, 2]).unwrap();
        let pair = SubspacePair::new(u, v, DEFAULT_ZERO_TOL).unwrap();
        let x0 = dv(&[0.0, 3.0, 0.0]);
        let params = optimal_parameters(std::f64::consts::FRAC_PI_2).unwrap();
        let t = run_fixed(&params, &pair, &x0, &StoppingRule::default(), 1).unwrap();
        assert_eq!(t.iteration_count, 0);
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.final_residual() < 1e-14);
        let t = run_adaptive(&pair, &x0, 1.0, &StoppingRule::default(), DEFAULT_EPSILON_CAP).unwrap();
        assert_eq!(t.iteration_count, 0);
        assert!(t.final_angle_estimate().is_none());
    }

    #[test]
    fn orthogonal_lines_converge_in_one_step() {
        let pair = SubspacePair::new(line(0.0), line(std::f64::consts::FRAC_PI_2), DEFAULT_ZERO_TOL).unwrap();
        let params = optimal_parameters(std::f64::consts::FRAC_PI_2).unwrap();
        let t = run_fixed(&params, &pair, &dv(&[1.0, 1.0]), &StoppingRule::default(), 1).unwrap();
        assert_eq!(t.iteration_count, 1);
        assert_eq!(t.termination, Termination::Converged);
    }

    #[test]
    fn max_iterations_is_a_termination_not_an_error() {
        let pair = SubspacePair::new(line(0.0), line(0.01), DEFAULT_ZERO_TOL).unwrap();
        let rule = StoppingRule::new(1e-12, 5).unwrap();
        let t = run_fixed(&preset(Preset::Ap, None, None).unwrap(), &pair, &dv(&[1.0, 0.0]), &rule, 2).unwrap();
        assert_eq!(t.termination, Termination::MaxIterations);
        assert_eq!(t.iteration_count, 5);
        let ks: Vec<usize> = t.iterations.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 2, 4, 5]);
    }

    #[test]
    fn estimate_degenerate_and_planar() {
        let y = dv(&[0.0, 0.0]);
        let pi2 = std::f64::consts::FRAC_PI_2;
        assert_eq!(estimate_angle(&y, &y, &dv(&[1.0, 0.0])).unwrap(), pi2);
        assert!((estimate_angle(&dv(&[1.0, 0.0]), &y, &dv(&[0.0, 1.0])).unwrap() - pi2).abs() < 1e-15);
        let t = 0.3f64;
        let est = estimate_angle(&dv(&[1.0, 0.0]), &y, &dv(&[t.cos(), t.sin()])).unwrap();
        assert!((est - 0.3).abs() < 1e-14);
        // The absolute value folds obtuse angles.
        let est = estimate_angle(&dv(&[1.0, 0.0]), &y, &dv(&[-t.cos(), t.sin()])).unwrap();
        assert!((est - 0.3).abs() < 1e-14);
        assert!(estimate_angle(&dv(&[1.0]), &y, &y).is_err());
    }

    #[test]
    fn estimate_with_next_iterate_equals_estimate_with_shadow() {
        // x+ - y = a (P_U y - y) is a positive multiple of z - y with z = P_U y.
        let u = Subspace::from_spanning_set(
            &DMatrix::from_column_slice(4, 2, &[1.0, 0.2, 0.0, 0.3, 0.0, 1.0, 0.5, 0.0]),
            1e-12,
        )
        .unwrap();
        let v = Subspace::coordinate(4, &[0, 2]).unwrap();
        let x = dv(&[0.3, -1.2, 0.7, 2.0]);
        for a in [0.5, 1.0, 1.6, 1.99] {
            let y = relaxed_project(&v, a, &x);
            let next = relaxed_project(&u, a, &y);
            let z = u.project(&y).unwrap();
            let e1 = estimate_angle(&x, &y, &next).unwrap();
            let e2 = estimate_angle(&x, &y, &z).unwrap();
            assert!((e1 - e2).abs() < 1e-12, "{e1} vs {e2}");
        }
    }

    fn relaxed_project(s: &Subspace, a: f64, x: &DVector<f64>) -> DVector<f64> {
        crate::operators::relaxed_project(s, a, x).unwrap()
    }

    #[test]
    fn exact_geometric_rate() {
        let t = synthetic((0..40).map(|k| 0.5f64.powi(k)));
        assert!((fit_observed_rate(&t, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((fit_observed_rate(&t, 25).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_errors() {
        let t = synthetic((0..15).map(|k| 0.5f64.powi(k)));
        assert!(matches!(
            fit_observed_rate(&t, 10),
            Err(GapError::InsufficientTrace { .. })
        ));
        let t = synthetic((0..30).map(|k| if k == 20 { 0.0 } else { 0.9f64.powi(k) }));
        assert!(fit_observed_rate(&t, 5).is_err());
    }

    #[test]
    fn adaptive_rejects_bad_relaxation() {
        let pair = SubspacePair::new(line(0.0), line(0.5), DEFAULT_ZERO_TOL).unwrap();
        let x0 = dv(&[1.0, 0.0]);
        assert!(run_adaptive(&pair, &x0, 2.0, &StoppingRule::default(), 1e-6).is_err());
        assert!(run_adaptive(&pair, &x0, 0.0, &StoppingRule::default(), 1e-6).is_err());
        assert!(run_adaptive(&pair, &x0, 1.0, &StoppingRule::default(), -1.0).is_err());
    }

    #[test]
    fn adaptive_traces_carry_estimates() {
        let u = Subspace::coordinate(3, &[0]).unwrap();
        let v = Subspace::from_orthonormal(DMatrix::from_column_slice(3, 1, &[0.6f64.cos(), 0.6f64.sin(), 0.0])).unwrap();
        let pair = SubspacePair::new(u, v, DEFAULT_ZERO_TOL).unwrap();
        let t = run_adaptive(&pair, &dv(&[1.0, 0.5, 0.0]), 1.0, &StoppingRule::default(), 1e-6).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        for r in &t.iterations[1..] {
            assert!(r.angle_estimate.is_some() && r.alpha_used.is_some());
        }
        assert_eq!(t.iterations[1].alpha_used, Some(1.0));
        // Lines in a plane: the estimate is exact from the first step.
        assert!((t.iterations[1].angle_estimate.unwrap() - 0.6).abs() < 1e-12);
    }
}
