//! Random problem generation: the nullspace-pair benchmark instances and
//! synthetic subspace pairs with prescribed principal angles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{GapError, Result};
use crate::solvers::SubspacePair;
use crate::subspace::{nullspace_basis, PrincipalAngleSet, Subspace, DEFAULT_RANK_TOL, DEFAULT_ZERO_TOL};

/// Identifies the random stream used for every generated instance. Bump it
/// whenever the draw order or generator changes.
pub const RNG_STREAM: &str = "chacha20-splitmix64-ziggurat/v1";

/// Ambient dimension of benchmark instances.
pub const AMBIENT_DIM: usize = 200;

/// Rows of the matrix whose kernel is `U`.
pub const U_ROWS: usize = 100;

const MAX_RETRIES: u32 = 16;

/// The generator used for all problem draws.
pub type ProblemRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> ProblemRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of problem `index` in category `n_rows_a` under `base_seed`.
pub fn substream_seed(base_seed: u64, n_rows_a: usize, index: usize) -> u64 {
    let h = splitmix64(base_seed);
    let h = splitmix64(h ^ n_rows_a as u64);
    splitmix64(h ^ (index as u64).rotate_left(32))
}

/// `rows x cols` matrix of standard normal entries, filled row by row.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    // Sign fix makes the distribution Haar.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Span of `d` Gaussian vectors in `R^n`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<Subspace> {
    Subspace::from_spanning_set(&gaussian_matrix(rng, n, d), DEFAULT_RANK_TOL)
}

/// A randomly rotated pair `(U, V)` with `dim U = dim_u`, `dim V = dim_v`
/// and exactly the given principal angles. Angles equal to `0.0` become
/// shared directions.
pub fn pair_with_angles<R: Rng + ?Sized>(
    rng: &mut R,
    ambient: usize,
    dim_u: usize,
    dim_v: usize,
    angles: &[f64],
) -> Result<(Subspace, Subspace)> {
    if dim_u > dim_v {
        let (v, u) = pair_with_angles(rng, ambient, dim_v, dim_u, angles)?;
        return Ok((u, v));
    }
    if angles.len() != dim_u {
        return Err(GapError::InconsistentDimensions(format!(
            "{} angles for a {dim_u}-dimensional subspace",
            angles.len()
        )));
    }
    let mut canonical_u = DMatrix::zeros(ambient, dim_u);
    let mut canonical_v = DMatrix::zeros(ambient, dim_v);
    let mut next = dim_u;
    let take = |next: &mut usize| -> Result<usize> {
        let axis = *next;
        if axis >= ambient {
            return Err(GapError::InconsistentDimensions(format!(
                "angles and dimensions {dim_u}, {dim_v} need more than {ambient} axes"
            )));
        }
        *next += 1;
        Ok(axis)
    };
    for (i, &theta) in angles.iter().enumerate() {
        canonical_u[(i, i)] = 1.0;
        if theta == 0.0 {
            canonical_v[(i, i)] = 1.0;
        } else {
            let axis = take(&mut next)?;
            canonical_v[(i, i)] = theta.cos();
            canonical_v[(axis, i)] = theta.sin();
        }
    }
    for j in dim_u..dim_v {
        let axis = take(&mut next)?;
        canonical_v[(axis, j)] = 1.0;
    }
    let q = random_orthogonal(rng, ambient);
    Ok((
        Subspace::from_orthonormal(&q * canonical_u)?,
        Subspace::from_orthonormal(&q * canonical_v)?,
    ))
}

/// `u + v` with Gaussian coefficients in both bases, i.e. a random point
/// of `U + V`.
pub fn random_point_in_sum<R: Rng + ?Sized>(rng: &mut R, u: &Subspace, v: &Subspace) -> DVector<f64> {
    let cu = gaussian_vector(rng, u.dim());
    let cv = gaussian_vector(rng, v.dim());
    u.basis() * cu + v.basis() * cv
}

/// Sizes of a nullspace-pair instance: `U = ker B` with `B` of size
/// `rows_b x ambient`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemShape {
    pub ambient: usize,
    pub rows_b: usize,
}

impl Default for ProblemShape {
    fn default() -> Self {
        Self {
            ambient: AMBIENT_DIM,
            rows_b: U_ROWS,
        }
    }
}

/// One benchmark instance: `V = ker A`, `U = ker B`, a Gaussian start
/// point, and the ground-truth angle data.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub id: String,
    pub seed: u64,
    pub n_rows_a: usize,
    pub pair: SubspacePair,
    pub x0: DVector<f64>,
    pub angles: PrincipalAngleSet,
    pub theta_f: f64,
    /// Largest principal angle.
    pub theta_p: f64,
    /// Number of degenerate draws skipped before this one.
    pub retries: u32,
}

impl ProblemInstance {
    pub fn u(&self) -> &Subspace {
        &self.pair.u
    }

    pub fn v(&self) -> &Subspace {
        &self.pair.v
    }
}

pub fn problem_id(n_rows_a: usize, index: usize) -> String {
    format!("m{n_rows_a:03}-{index:05}")
}

/// Benchmark instance of the default 200-dimensional shape.
pub fn generate_problem(n_rows_a: usize, seed: u64) -> Result<ProblemInstance> {
    generate_problem_with_shape(ProblemShape::default(), n_rows_a, seed, format!("m{n_rows_a:03}-s{seed:016x}"))
}

/// Draws `A` (`n_rows_a x n`), `B` (`rows_b x n`) and `x0`, in that order,
/// from the ChaCha20 stream seeded with `seed`. A draw without a nonzero
/// principal angle is discarded and the next seed `seed + retry` is used.
pub fn generate_problem_with_shape(
    shape: ProblemShape,
    n_rows_a: usize,
    seed: u64,
    id: String,
) -> Result<ProblemInstance> {
    if n_rows_a == 0 || n_rows_a >= shape.ambient {
        return Err(GapError::InvalidParameter(format!(
            "n_rows_A must lie in [1, {}], got {n_rows_a}",
            shape.ambient - 1
        )));
    }
    for retry in 0..MAX_RETRIES {
        let mut rng = rng_from_seed(seed.wrapping_add(retry as u64));
        let a = gaussian_matrix(&mut rng, n_rows_a, shape.ambient);
        let b = gaussian_matrix(&mut rng, shape.rows_b, shape.ambient);
        let x0 = gaussian_vector(&mut rng, shape.ambient);
        let v = nullspace_basis(&a, DEFAULT_RANK_TOL)?;
        let u = nullspace_basis(&b, DEFAULT_RANK_TOL)?;
        if u.dim() == 0 || v.dim() == 0 {
            continue;
        }
        let pair = SubspacePair::new(u, v, DEFAULT_ZERO_TOL)?;
        let angles = pair.principal_angles(DEFAULT_ZERO_TOL)?;
        let Some(theta_f) = angles.friedrichs() else {
            continue;
        };
        let theta_p = angles.largest();
        return Ok(ProblemInstance {
            id,
            seed,
            n_rows_a,
            pair,
            x0,
            angles,
            theta_f,
            theta_p,
            retries: retry,
        });
    }
    Err(GapError::InvalidParameter(format!(
        "no nondegenerate draw for seed {seed} after {MAX_RETRIES} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{intersection_subspace, principal_angles};

    #[test]
    fn substreams_differ() {
        let a = substream_seed(1, 10, 0);
        assert_ne!(a, substream_seed(1, 10, 1));
        assert_ne!(a, substream_seed(1, 11, 0));
        assert_ne!(a, substream_seed(2, 10, 0));
        assert_eq!(a, substream_seed(1, 10, 0));
    }

    #[test]
    fn prescribed_angles_are_recovered() {
        let mut rng = rng_from_seed(7);
        let angles = [0.0, 0.05, 0.4, 1.2];
        let (u, v) = pair_with_angles(&mut rng, 12, 4, 6, &angles).unwrap();
        assert_eq!((u.dim(), v.dim()), (4, 6));
        let set = principal_angles(&u, &v, 1e-10).unwrap();
        for (got, want) in set.angles().iter().zip(angles) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(set.intersection_dim(), 1);
        // Swapped roles.
        let (u, v) = pair_with_angles(&mut rng, 12, 6, 4, &angles).unwrap();
        assert_eq!((u.dim(), v.dim()), (6, 4));
        assert!((principal_angles(&u, &v, 1e-10).unwrap().friedrichs().unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn too_many_axes_is_an_error() {
        let mut rng = rng_from_seed(1);
        assert!(pair_with_angles(&mut rng, 4, 2, 3, &[0.1, 0.2]).is_err());
        assert!(pair_with_angles(&mut rng, 5, 2, 3, &[0.1]).is_err());
    }

    #[test]
    fn small_shape_problem_dimensions() {
        let shape = ProblemShape { ambient: 40, rows_b: 20 };
        let p = generate_problem_with_shape(shape, 19, 3, "t".into()).unwrap();
        assert_eq!(p.u().dim(), 20);
        assert_eq!(p.v().dim(), 21);
        let i = intersection_subspace(p.u(), p.v(), 1e-10).unwrap();
        assert_eq!(i.dim(), 1);
        assert_eq!(p.angles.intersection_dim(), 1);
        assert!(generate_problem_with_shape(shape, 0, 3, "t".into()).is_err());
        assert!(generate_problem_with_shape(shape, 40, 3, "t".into()).is_err());
    }

    #[test]
    fn hyperplane_intersection_lies_in_both_subspaces() {
        let p = generate_problem(1, substream_seed(42, 1, 0)).unwrap();
        let w = &p.pair.intersection;
        assert_eq!(w.dim(), 99);
        let off_v = w.basis() - p.v().project_columns(w.basis()).unwrap();
        let off_u = w.basis() - p.u().project_columns(w.basis()).unwrap();
        assert!(off_v.norm() < 1e-10, "{}", off_v.norm());
        assert!(off_u.norm() < 1e-10, "{}", off_u.norm());
    }
}
