//! Double-length vectors for the adaptive iteration.
//!
//! The iterate is kept as an unevaluated sum `hi + lo`, and a relaxed
//! projection is applied as `x - a C (C^T x)` with `C` an orthonormal basis
//! of the complement and `C^T x` accumulated with error-free transforms.
//! The correction term `a C (C^T x)` is then also the exact difference
//! between consecutive points, so the angle estimate never subtracts two
//! nearly equal vectors.

use nalgebra::{DMatrix, DVector};

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

/// `sum c_i (hi_i + lo_i)` with the `hi` products accumulated in twice the
/// working precision.
fn dot2(c: &[f64], hi: &[f64], lo: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut err = 0.0;
    for ((&ci, &h), &l) in c.iter().zip(hi).zip(lo) {
        let (p, pe) = two_prod(ci, h);
        let (t, te) = two_sum(s, p);
        s = t;
        err += pe + te + ci * l;
    }
    s + err
}

#[derive(Debug, Clone)]
pub(crate) struct DoubleVector {
    hi: DVector<f64>,
    lo: DVector<f64>,
}

impl DoubleVector {
    pub(crate) fn new(x: &DVector<f64>) -> Self {
        Self {
            hi: x.clone(),
            lo: DVector::zeros(x.len()),
        }
    }

    /// Nearest working-precision vector.
    pub(crate) fn value(&self) -> DVector<f64> {
        &self.hi + &self.lo
    }

    pub(crate) fn norm(&self) -> f64 {
        self.hi.norm()
    }

    /// Returns `(x - d, d)` with `d = alpha C (C^T x)`, i.e. the relaxed
    /// projection onto the orthogonal complement of `span C` and the step
    /// taken to reach it.
    pub(crate) fn relaxed_step(&self, perp: &DMatrix<f64>, alpha: f64) -> (Self, DVector<f64>) {
        let (hi, lo) = (self.hi.as_slice(), self.lo.as_slice());
        let coeffs = DVector::from_iterator(
            perp.ncols(),
            perp.column_iter().map(|c| dot2(c.as_slice(), hi, lo)),
        );
        let mut step = perp * coeffs;
        step *= alpha;
        let mut out = self.clone();
        for i in 0..step.len() {
            let (s, e) = two_sum(out.hi[i], -step[i]);
            let (h, l) = two_sum(s, e + out.lo[i]);
            out.hi[i] = h;
            out.lo[i] = l;
        }
        (out, step)
    }
}
