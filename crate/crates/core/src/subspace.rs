//! Linear subspaces of `R^n` stored as orthonormal bases, with orthogonal
//! projection, principal angles and intersections.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors, SvdParams};
use faer::Par;
use nalgebra::{DMatrix, DVector, Dyn, SVD};

use crate::error::{GapError, Result};

/// Default cosine-side tolerance for classifying a principal angle as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Default relative singular-value cutoff used when extracting bases.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// A linear subspace represented by an `n x d` matrix with orthonormal columns.
///
/// When the orthogonal complement is already known (for instance after a
/// nullspace computation) it is kept alongside, and projections use
/// whichever of the two bases is thinner.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
    complement: Option<DMatrix<f64>>,
}

impl Subspace {
    /// Wraps a basis, checking that its columns are orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 {
            return Err(GapError::EmptyMatrix);
        }
        let dev = orthonormality_defect(&basis);
        if dev > ORTHONORMAL_TOL {
            return Err(GapError::NotOrthonormal(dev));
        }
        Ok(Self {
            basis,
            complement: None,
        })
    }

    /// Orthonormal basis for the column span of `vectors`. Directions whose
    /// singular value is below `rank_tol` times the largest are dropped.
    pub fn from_spanning_set(vectors: &DMatrix<f64>, rank_tol: f64) -> Result<Self> {
        let n = vectors.nrows();
        if n == 0 {
            return Err(GapError::EmptyMatrix);
        }
        if vectors.ncols() == 0 {
            return Ok(Self::zero(n));
        }
        let svd = accurate_svd(vectors.clone(), true, false);
        let u = svd.u.expect("left singular vectors requested");
        let rank = numerical_rank(svd.singular_values.as_slice(), rank_tol);
        Ok(Self {
            basis: u.columns(0, rank).into_owned(),
            complement: None,
        })
    }

    /// The trivial subspace `{0}` of `R^n`.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
            complement: Some(DMatrix::identity(ambient_dim, ambient_dim)),
        }
    }

    /// The whole space `R^n`.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
            complement: Some(DMatrix::zeros(ambient_dim, 0)),
        }
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        let mut basis = DMatrix::zeros(ambient_dim, axes.len());
        for (j, &axis) in axes.iter().enumerate() {
            if axis >= ambient_dim {
                return Err(GapError::DimensionMismatch {
                    expected: ambient_dim,
                    found: axis + 1,
                });
            }
            basis[(axis, j)] = 1.0;
        }
        Self::from_orthonormal(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthonormal basis of the orthogonal complement, computed on demand
    /// unless it was recorded at construction.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let complement = match &self.complement {
            Some(c) => c.clone(),
            None => {
                // I - P has singular values 0 and 1 only, so the cut is absolute.
                let residual = DMatrix::identity(n, n) - &self.basis * self.basis.transpose();
                let svd = accurate_svd(residual, true, false);
                let rank = svd.singular_values.iter().filter(|&&s| s > 0.5).count();
                svd.u.expect("left singular vectors requested").columns(0, rank).into_owned()
            }
        };
        Subspace {
            basis: complement,
            complement: Some(self.basis.clone()),
        }
    }

    /// Largest entrywise deviation of `basis^T basis` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.basis)
    }

    /// Orthogonal projection `basis (basis^T x)`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.complement {
            Some(c) if c.ncols() < self.basis.ncols() => {
                let coeffs = c.tr_mul(x);
                let mut out = x.clone();
                out.gemv(-1.0, c, &coeffs, 1.0);
                out
            }
            _ => &self.basis * self.basis.tr_mul(x),
        }
    }

    /// Projects every column of `m`.
    pub fn project_columns(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(m.nrows())?;
        Ok(match &self.complement {
            Some(c) if c.ncols() < self.basis.ncols() => m - c * c.tr_mul(m),
            _ => &self.basis * self.basis.tr_mul(m),
        })
    }

    /// Dense projector matrix `basis basis^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Whether `x` lies in the subspace up to `tol` (absolute).
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok((self.project(x)? - x).norm() <= tol)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim() {
            return Err(GapError::DimensionMismatch {
                expected: self.ambient_dim(),
                found: len,
            });
        }
        Ok(())
    }
}

fn orthonormality_defect(basis: &DMatrix<f64>) -> f64 {
    let d = basis.ncols();
    let gram = basis.tr_mul(basis);
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Thin SVD with singular values in descending order.
///
/// Uses faer's bidiagonal QR iteration throughout. Both nalgebra's
/// implicit-shift SVD and faer's divide-and-conquer stage were seen to
/// return factorizations off by 1e-4 to 1e-1 on matrices with many equal
/// singular values, which is the typical case here (zero and unit
/// cosines, projector residuals).
pub(crate) fn accurate_svd(m: DMatrix<f64>, compute_u: bool, compute_v: bool) -> SVD<f64, Dyn, Dyn> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let a = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let mut s = faer::diag::Diag::<f64>::zeros(k);
    let mut u = compute_u.then(|| faer::Mat::<f64>::zeros(rows, k));
    let mut v = compute_v.then(|| faer::Mat::<f64>::zeros(cols, k));
    let mut params = faer::Spec::<SvdParams, f64>::default();
    params.recursion_threshold = usize::MAX;
    let want = |b: bool| if b { ComputeSvdVectors::Thin } else { ComputeSvdVectors::No };
    let mut buf = MemBuffer::new(svd_scratch::<f64>(rows, cols, want(compute_u), want(compute_v), Par::Seq, params));
    svd(
        a.as_ref(),
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        v.as_mut().map(|v| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .expect("SVD of a finite matrix");
    let sv = s.column_vector();
    SVD {
        u: u.map(|u| DMatrix::from_fn(rows, k, |i, j| u[(i, j)])),
        v_t: v.map(|v| DMatrix::from_fn(k, cols, |i, j| v[(j, i)])),
        singular_values: DVector::from_fn(k, |i, _| sv[i]),
    }
}

/// Count of singular values above `rank_tol * max`. Input must be sorted
/// descending.
fn numerical_rank(singular_values: &[f64], rank_tol: f64) -> usize {
    let largest = singular_values.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .take_while(|&&s| s > rank_tol * largest)
        .count()
}

/// Orthonormal basis of `ker(A)` from a full SVD. Singular values below
/// `rank_tol` times the largest count as zero. The row space is kept as the
/// complement basis.
pub fn nullspace_basis(a: &DMatrix<f64>, rank_tol: f64) -> Result<Subspace> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(GapError::EmptyMatrix);
    }
    // Pad with zero rows so the thin SVD yields all n right singular vectors.
    let square = if m < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.rows_mut(0, m).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = accurate_svd(square, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let rank = numerical_rank(svd.singular_values.as_slice(), rank_tol);
    let null = v_t.rows(rank, n - rank).transpose();
    let row_space = v_t.rows(0, rank).transpose();
    Ok(Subspace {
        basis: null,
        complement: Some(row_space),
    })
}

/// Sorted principal angles between two subspaces together with the
/// dimension of their intersection and the Friedrichs angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngleSet {
    angles: Vec<f64>,
    intersection_dim: usize,
    friedrichs: Option<f64>,
}

impl PrincipalAngleSet {
    /// Builds an angle set from raw angles (any order). An angle counts as
    /// zero when its cosine exceeds `1 - zero_tol`.
    pub fn from_angles(mut angles: Vec<f64>, zero_tol: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(GapError::ZeroDimensionalSubspace);
        }
        for &a in &angles {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&a) {
                return Err(GapError::AngleOutOfRange {
                    value: a,
                    range: "[0, pi/2]",
                });
            }
        }
        angles.sort_by(f64::total_cmp);
        let cosines: Vec<f64> = angles.iter().map(|a| a.cos()).collect();
        Ok(Self::classify(angles, &cosines, zero_tol))
    }

    fn classify(angles: Vec<f64>, cosines: &[f64], zero_tol: f64) -> Self {
        let intersection_dim = cosines.iter().filter(|&&c| c > 1.0 - zero_tol).count();
        let friedrichs = angles.get(intersection_dim).copied();
        Self {
            angles,
            intersection_dim,
            friedrichs,
        }
    }

    /// Angles in ascending order.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn intersection_dim(&self) -> usize {
        self.intersection_dim
    }

    /// Smallest nonzero principal angle, absent when every angle is zero.
    pub fn friedrichs(&self) -> Option<f64> {
        self.friedrichs
    }

    /// Largest principal angle.
    pub fn largest(&self) -> f64 {
        *self.angles.last().expect("angle sets are never empty")
    }

    /// The nonzero angles, i.e. those from the Friedrichs angle onwards.
    pub fn nonzero(&self) -> &[f64] {
        &self.angles[self.intersection_dim..]
    }
}

fn check_same_ambient(u: &Subspace, v: &Subspace) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(GapError::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    Ok(())
}

/// Principal angles from the SVD of the cross-Gram matrix `U^T V`.
///
/// Cosines come from the cross-Gram singular values; sines come from the
/// singular values of the residual of the smaller basis after projecting
/// onto the larger subspace. Each angle is `atan2(sin, cos)`, which keeps
/// small angles accurate where `acos` alone would lose half the digits.
/// Zero-classification uses the cosine test `cos > 1 - zero_tol`.
pub fn principal_angles(u: &Subspace, v: &Subspace, zero_tol: f64) -> Result<PrincipalAngleSet> {
    check_same_ambient(u, v)?;
    if u.dim() == 0 || v.dim() == 0 {
        return Err(GapError::ZeroDimensionalSubspace);
    }
    let cross = u.basis().tr_mul(v.basis());
    let cosines: Vec<f64> = accurate_svd(cross, false, false)
        .singular_values
        .iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect();

    let (small, large) = if u.dim() <= v.dim() { (u, v) } else { (v, u) };
    let residual = small.basis() - large.project_columns(small.basis())?;
    let mut sines: Vec<f64> = accurate_svd(residual, false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sines.sort_by(f64::total_cmp);

    let angles: Vec<f64> = cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| s.atan2(c).min(std::f64::consts::FRAC_PI_2))
        .collect();
    Ok(PrincipalAngleSet::classify(angles, &cosines, zero_tol))
}

/// Orthonormal basis of `U ∩ V`: the principal vectors of `U` whose
/// cosine exceeds `1 - zero_tol`.
pub fn intersection_subspace(u: &Subspace, v: &Subspace, zero_tol: f64) -> Result<Subspace> {
    check_same_ambient(u, v)?;
    let n = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(Subspace::zero(n));
    }
    let svd = accurate_svd(u.basis().tr_mul(v.basis()), true, false);
    let left = svd.u.expect("left singular vectors requested");
    let s = svd
        .singular_values
        .iter()
        .take_while(|&&c| c > 1.0 - zero_tol)
        .count();
    let basis = u.basis() * left.columns(0, s);
    Ok(Subspace {
        basis,
        complement: None,
    })
}
