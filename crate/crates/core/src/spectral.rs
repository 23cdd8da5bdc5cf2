//! Spectrum of the GAP operator predicted from principal angles, the dense
//! eigenvalue oracle it is checked against, closed-form rates of the
//! standard methods and iteration-count estimates.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Complex, DMatrix, Matrix2};

use crate::error::{GapError, Result};
use crate::operators::{optimal_relaxation, GapParameters, Preset};
use crate::subspace::PrincipalAngleSet;

/// Default radius of the ball around `1 + 0i` treated as the unit eigenvalue.
pub const DEFAULT_UNIT_TOL: f64 = 1e-9;

/// Dimensions of a subspace pair: `dim U`, `dim V` and the ambient `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDims {
    pub dim_u: usize,
    pub dim_v: usize,
    pub ambient: usize,
}

impl PairDims {
    pub fn new(dim_u: usize, dim_v: usize, ambient: usize) -> Self {
        Self {
            dim_u,
            dim_v,
            ambient,
        }
    }
}

/// Eigenvalues of `S` with multiplicities, plus the derived rate data.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvaluePrediction {
    /// Distinct blocks' eigenvalues paired with their multiplicity. Values
    /// may repeat across entries.
    pub eigenvalues: Vec<(Complex<f64>, usize)>,
    /// Largest modulus over `{0} ∪ σ(S) \ {1}`.
    pub gamma: f64,
    pub contains_unit: bool,
    pub convergent: bool,
}

impl EigenvaluePrediction {
    /// Every eigenvalue repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Complex<f64>> {
        self.eigenvalues
            .iter()
            .flat_map(|&(z, m)| std::iter::repeat_n(z, m))
            .collect()
    }

    /// Total multiplicity of eigenvalues within `tol` of one.
    pub fn unit_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|(z, _)| (z - Complex::new(1.0, 0.0)).norm() <= tol)
            .map(|(_, m)| m)
            .sum()
    }
}

/// The two eigenvalues of the `2 x 2` block of `T = P_U^{a2} P_V^{a1}`
/// belonging to a principal angle `theta`.
pub fn block_eigenvalues(alpha1: f64, alpha2: f64, theta: f64) -> [Complex<f64>; 2] {
    let c = theta.cos();
    let f = 0.5 * (2.0 - alpha1 - alpha2 + alpha1 * alpha2 * c * c);
    let product = (1.0 - alpha1) * (1.0 - alpha2);
    let mut disc = f * f - product;
    // Snap roundoff-level discriminants so double roots stay double.
    if disc.abs() <= 8.0 * f64::EPSILON * (f * f).max(product.abs()) {
        disc = 0.0;
    }
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex::new(f + r, 0.0), Complex::new(f - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex::new(f, r), Complex::new(f, -r)]
    }
}

/// The `2 x 2` block of `T` for angle `theta` in the canonical basis.
pub fn block_matrix(alpha1: f64, alpha2: f64, theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        1.0 - alpha1 * s * s,
        alpha1 * c * s,
        alpha1 * (1.0 - alpha2) * c * s,
        (1.0 - alpha2) * (1.0 - alpha1 * c * c),
    )
}

fn relax(alpha: f64, lambda: Complex<f64>) -> Complex<f64> {
    Complex::new(1.0, 0.0) + (lambda - Complex::new(1.0, 0.0)) * alpha
}

/// Predicts the full spectrum of `S = (1 - a) I + a T` from the principal
/// angles and the dimensions of the pair.
///
/// Each nonzero angle contributes its two block eigenvalues; each zero angle
/// contributes the eigenvalue one. The unpaired part of the larger subspace
/// contributes `1 - alpha2` (when `dim U <= dim V`) or `1 - alpha1`
/// (otherwise), and `U^⊥ ∩ V^⊥`, of dimension `n - p - q + s`, contributes
/// `(1 - alpha1)(1 - alpha2)`.
pub fn predict_eigenvalues(
    params: &GapParameters,
    angles: &PrincipalAngleSet,
    dims: PairDims,
) -> Result<EigenvaluePrediction> {
    predict_with_unit_tol(params, angles, dims, DEFAULT_UNIT_TOL)
}

pub fn predict_with_unit_tol(
    params: &GapParameters,
    angles: &PrincipalAngleSet,
    dims: PairDims,
    unit_tol: f64,
) -> Result<EigenvaluePrediction> {
    let PairDims {
        dim_u,
        dim_v,
        ambient,
    } = dims;
    let p = dim_u.min(dim_v);
    if p == 0 {
        return Err(GapError::ZeroDimensionalSubspace);
    }
    if angles.len() != p {
        return Err(GapError::InconsistentDimensions(format!(
            "{} angles for subspaces of dimension {dim_u} and {dim_v}",
            angles.len()
        )));
    }
    let s = angles.intersection_dim();
    let complement_dim = (ambient + s) as i64 - (dim_u + dim_v) as i64;
    if ambient < dim_u.max(dim_v) || complement_dim < 0 {
        return Err(GapError::InconsistentDimensions(format!(
            "dim U = {dim_u}, dim V = {dim_v} and {s} zero angles do not fit in R^{ambient}"
        )));
    }

    let (a, a1, a2) = (params.alpha, params.alpha1, params.alpha2);
    let mut eigenvalues = Vec::with_capacity(2 * p + 3);
    for &theta in angles.nonzero() {
        for lambda in block_eigenvalues(a1, a2, theta) {
            eigenvalues.push((relax(a, lambda), 1));
        }
    }
    if s > 0 {
        eigenvalues.push((Complex::new(1.0, 0.0), s));
    }
    let unpaired = dim_u.abs_diff(dim_v);
    if unpaired > 0 {
        let lambda3 = if dim_u <= dim_v { 1.0 - a2 } else { 1.0 - a1 };
        eigenvalues.push((relax(a, Complex::new(lambda3, 0.0)), unpaired));
    }
    if complement_dim > 0 {
        let lambda4 = (1.0 - a1) * (1.0 - a2);
        eigenvalues.push((relax(a, Complex::new(lambda4, 0.0)), complement_dim as usize));
    }

    let one = Complex::new(1.0, 0.0);
    let contains_unit = eigenvalues.iter().any(|(z, _)| (z - one).norm() <= unit_tol);
    let gamma = eigenvalues
        .iter()
        .filter(|(z, _)| (z - one).norm() > unit_tol)
        .map(|(z, _)| z.norm())
        .fold(0.0, f64::max);
    // Unit eigenvalues only come from diagonal blocks, so they are semisimple.
    let convergent = gamma < 1.0;
    Ok(EigenvaluePrediction {
        eigenvalues,
        gamma,
        contains_unit,
        convergent,
    })
}

/// Worst predicted subdominant magnitude over the three relative-dimension
/// regimes `dim U < dim V`, `dim U = dim V` and `dim U > dim V`, each with a
/// nontrivial `U^⊥ ∩ V^⊥`.
pub fn worst_case_gamma(params: &GapParameters, angles: &PrincipalAngleSet) -> Result<f64> {
    let p = angles.len();
    let regimes = [
        PairDims::new(p, p + 1, 2 * p + 2),
        PairDims::new(p, p, 2 * p + 1),
        PairDims::new(p + 1, p, 2 * p + 2),
    ];
    let mut worst = 0.0_f64;
    for dims in regimes {
        worst = worst.max(predict_eigenvalues(params, angles, dims)?.gamma);
    }
    Ok(worst)
}

/// `count` angles evenly spaced on `[theta_f, theta_p]`.
pub fn angle_grid(theta_f: f64, theta_p: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![theta_f],
        _ => (0..count)
            .map(|i| theta_f + (theta_p - theta_f) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

fn check_friedrichs(theta_f: f64) -> Result<f64> {
    if theta_f > 0.0 && theta_f <= FRAC_PI_2 {
        Ok(theta_f)
    } else {
        Err(GapError::AngleOutOfRange {
            value: theta_f,
            range: "(0, pi/2]",
        })
    }
}

/// Optimal rate `(1 - sin theta_f) / (1 + sin theta_f)`.
pub fn gamma_star(theta_f: f64) -> Result<f64> {
    let s = check_friedrichs(theta_f)?.sin();
    Ok((1.0 - s) / (1.0 + s))
}

/// Closed-form asymptotic rate of a preset.
///
/// The adaptive method is assigned the optimal rate it converges to. The
/// GAP2A formula only holds for `theta_f <= pi/4`, and PRAP needs
/// `theta_f <= theta_p`; outside those ranges an error is returned. For
/// `GapFixed(c)` the worst block over `[theta_f, pi/2]` sits at one of the
/// two endpoints, giving `max(|1 - c|, rho(T_F))`.
pub fn theoretical_rate(method: Preset, theta_f: f64, theta_p: Option<f64>) -> Result<f64> {
    let theta_f = check_friedrichs(theta_f)?;
    let (s, c) = theta_f.sin_cos();
    let rate = match method {
        Preset::GapStar | Preset::GapaInit => (1.0 - s) / (1.0 + s),
        Preset::Ap => c * c,
        Preset::MapOpt => (1.0 - s * s) / (1.0 + s * s),
        Preset::Dr => c,
        Preset::Gap2a => {
            if theta_f > FRAC_PI_4 {
                return Err(GapError::AngleOutOfRange {
                    value: theta_f,
                    range: "(0, pi/4] for GAP2A",
                });
            }
            (c - s) / (c + s)
        }
        Preset::Prap => {
            let tp = theta_p.ok_or(GapError::MissingAngle {
                method: "PRAP",
                angle: "the largest principal angle",
            })?;
            if !(tp >= theta_f && tp <= FRAC_PI_2) {
                return Err(GapError::AngleOutOfRange {
                    value: tp,
                    range: "[theta_f, pi/2] for the largest angle",
                });
            }
            let sp2 = tp.sin().powi(2);
            (sp2 - s * s) / (sp2 + s * s)
        }
        Preset::GapFixed(a) => {
            let [l1, l2] = block_eigenvalues(a, a, theta_f);
            (1.0 - a).abs().max(l1.norm()).max(l2.norm())
        }
    };
    Ok(rate)
}

/// Eigenvalues closer than this (relative to the spectral scale) are
/// candidates for merging into one defective cluster.
const CLUSTER_GAP: f64 = 1e-6;

/// Minimum `|<v_i, v_j>| / (|v_i| |v_j|)` for two eigenvectors to count as
/// the same direction.
const CLUSTER_ALIGNMENT: f64 = 1.0 - 1e-6;

/// All eigenvalues of a dense square matrix, computed by Hessenberg QR
/// with exceptional shifts.
///
/// A rounding perturbation of size `d` splits a Jordan block of size `k`
/// by about `d^(1/k)`, so a defective eigenvalue comes back as a small
/// cluster whose members carry nearly parallel eigenvectors. The cluster
/// mean is still accurate to `O(d)`. Such clusters are detected (close
/// values and aligned eigenvectors) and every member is replaced by the
/// mean; see [`dense_eigenvalues_raw`] for the unprocessed output.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let evd = to_faer(m).eigen().map_err(|_| GapError::Eigensolver)?;
    let values: Vec<Complex<f64>> = evd.S().column_vector().iter().map(|z| Complex::new(z.re, z.im)).collect();
    let vectors = evd.U();
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);

    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let column_norm = |j: usize| (0..n).map(|r| vectors[(r, j)].norm_sqr()).sum::<f64>().sqrt();
    let norms: Vec<f64> = (0..n).map(column_norm).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() > CLUSTER_GAP * scale {
                continue;
            }
            let mut dot = Complex::new(0.0, 0.0);
            for r in 0..n {
                let (a, b) = (vectors[(r, i)], vectors[(r, j)]);
                dot += Complex::new(a.re, -a.im) * Complex::new(b.re, b.im);
            }
            if dot.norm() >= CLUSTER_ALIGNMENT * norms[i] * norms[j] {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut sums = vec![(Complex::new(0.0, 0.0), 0usize); n];
    for i in 0..n {
        let r = root(&mut parent, i);
        sums[r].0 += values[i];
        sums[r].1 += 1;
    }
    Ok((0..n)
        .map(|i| {
            let (sum, count) = sums[root(&mut parent, i)];
            sum / count as f64
        })
        .collect())
}

/// Eigenvalues exactly as returned by the QR iteration.
pub fn dense_eigenvalues_raw(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let values = to_faer(m).eigenvalues().map_err(|_| GapError::Eigensolver)?;
    Ok(values.iter().map(|z| Complex::new(z.re, z.im)).collect())
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(GapError::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    Ok(n)
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Largest eigenvalue modulus after discarding eigenvalues within
/// `unit_tol` of one; zero when nothing remains.
pub fn subdominant_magnitude(m: &DMatrix<f64>, unit_tol: f64) -> Result<f64> {
    let one = Complex::new(1.0, 0.0);
    Ok(dense_eigenvalues(m)?
        .iter()
        .filter(|z| (*z - one).norm() > unit_tol)
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    NonConvergent,
}

/// Outcome of [`classify_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub verdict: Convergence,
    pub spectral_radius: f64,
    /// Eigenvalues within `tol` of one.
    pub unit_count: usize,
    /// Eigenvalues on or outside the unit circle other than one.
    pub offending: Vec<Complex<f64>>,
    /// `rank(M - I) == rank((M - I)^2)`; only evaluated when one is on the
    /// unit circle.
    pub semisimple_unit: Option<bool>,
}

impl ConvergenceReport {
    pub fn is_convergent(&self) -> bool {
        self.verdict == Convergence::Convergent
    }
}

fn numerical_rank(m: DMatrix<f64>, tol: f64) -> usize {
    let sv = crate::subspace::accurate_svd(m, false, false).singular_values;
    let largest = sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Decides whether `M^k` has a limit: either `rho(M) < 1`, or the only
/// eigenvalue on the unit circle is one and it is semisimple.
pub fn classify_convergence(m: &DMatrix<f64>, tol: f64) -> Result<ConvergenceReport> {
    let eig = dense_eigenvalues(m)?;
    let one = Complex::new(1.0, 0.0);
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let unit_count = eig.iter().filter(|z| (*z - one).norm() <= tol).count();
    let offending: Vec<Complex<f64>> = eig
        .iter()
        .filter(|z| z.norm() >= 1.0 - tol && (*z - one).norm() > tol)
        .copied()
        .collect();

    let mut report = ConvergenceReport {
        verdict: Convergence::Convergent,
        spectral_radius,
        unit_count,
        offending,
        semisimple_unit: None,
    };
    if spectral_radius < 1.0 - tol {
        return Ok(report);
    }
    if !report.offending.is_empty() {
        report.verdict = Convergence::NonConvergent;
        return Ok(report);
    }
    let n = m.nrows();
    let shifted = m - DMatrix::<f64>::identity(n, n);
    let squared = &shifted * &shifted;
    let semisimple = numerical_rank(shifted, tol) == numerical_rank(squared, tol);
    report.semisimple_unit = Some(semisimple);
    if !semisimple {
        report.verdict = Convergence::NonConvergent;
    }
    Ok(report)
}

/// Smallest `k` with `gamma^k <= tol`, i.e. `ceil(ln tol / ln gamma)`.
pub fn expected_iterations(gamma: f64, tol: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(GapError::NotConvergent(gamma));
    }
    if !(tol > 0.0) {
        return Err(GapError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if gamma == 0.0 || tol >= 1.0 {
        return Ok(1);
    }
    let k = tol.ln() / gamma.ln();
    let nearest = k.round();
    // ln(1e-8) / ln(0.1) evaluates to 8.000000000000002.
    let k = if (k - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        k.ceil()
    };
    Ok((k as u64).max(1))
}

fn check_open_friedrichs(theta_f: f64) -> Result<f64> {
    if theta_f > 0.0 && theta_f < FRAC_PI_2 {
        Ok(theta_f)
    } else {
        Err(GapError::AngleOutOfRange {
            value: theta_f,
            range: "(0, pi/2)",
        })
    }
}

/// Closed-form trace and determinant of
/// `M = (2 - a*) I + (a* / alpha1)(T_F - I)`, where `T_F` is the block
/// belonging to the Friedrichs angle and `a* = 2 / (1 + sin theta_f)`.
pub fn m_closed_forms(alpha1: f64, alpha2: f64, theta_f: f64) -> Result<(f64, f64)> {
    let theta_f = check_open_friedrichs(theta_f)?;
    if !(alpha1 > 0.0 && alpha2 > 0.0) {
        return Err(GapError::InvalidParameter(
            "relaxation parameters must be positive".into(),
        ));
    }
    let (s, c) = theta_f.sin_cos();
    let trace = 2.0 / ((1.0 + s) * alpha1)
        * (-alpha1 - alpha2 + alpha2 * alpha1 * c * c + 2.0 * alpha1 * s);
    let det = 4.0 * s * (1.0 - s) / (alpha1 * (1.0 + s) * (1.0 + s))
        * (-alpha1 - alpha2 + alpha1 * alpha2 * (1.0 + s));
    Ok((trace, det))
}

/// The matrix `M` built explicitly from the Friedrichs block.
pub fn m_matrix(alpha1: f64, alpha2: f64, theta_f: f64) -> Result<Matrix2<f64>> {
    let theta_f = check_open_friedrichs(theta_f)?;
    let a_star = optimal_relaxation(theta_f)?;
    let block = block_matrix(alpha1, alpha2, theta_f);
    Ok(Matrix2::identity() * (2.0 - a_star) + (block - Matrix2::identity()) * (a_star / alpha1))
}

/// Eigenvalues of a real `2 x 2` matrix from its trace and determinant.
pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> [Complex<f64>; 2] {
    let half_tr = 0.5 * m.trace();
    let disc = half_tr * half_tr - m.determinant();
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex::new(half_tr + r, 0.0), Complex::new(half_tr - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex::new(half_tr, r), Complex::new(half_tr, -r)]
    }
}

/// Largest distance between paired eigenvalues of two spectra of equal
/// size. Both lists are sorted by `(re, im)` and each entry of `a` is then
/// paired with the nearest unused entry of `b`, which keeps conjugate pairs
/// with equal real parts from being crossed by roundoff.
pub fn spectrum_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(GapError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let by_re_im = |x: &Complex<f64>, y: &Complex<f64>| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(by_re_im);
    b.sort_by(by_re_im);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for z in &a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}
