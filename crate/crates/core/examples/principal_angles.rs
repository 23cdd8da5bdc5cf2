//! Principal angles, the Friedrichs angle and the intersection of two
//! random subspaces of R^12.

use gap_core::prelude::*;
use gap_core::problem::{random_subspace, rng_from_seed};

fn main() -> gap_core::Result<()> {
    let mut rng = rng_from_seed(1);
    let u = random_subspace(&mut rng, 12, 7)?;
    let v = random_subspace(&mut rng, 12, 8)?;
    let angles = principal_angles(&u, &v, DEFAULT_ZERO_TOL)?;

    println!("dim U = {}, dim V = {}", u.dim(), v.dim());
    for (i, a) in angles.angles().iter().enumerate() {
        println!("  theta_{:<2} = {:.3e} rad", i + 1, a);
    }
    println!("dim(U ∩ V) = {}", angles.intersection_dim());
    if let Some(tf) = angles.friedrichs() {
        println!("Friedrichs angle = {tf:.6} rad ({:.3} deg)", tf.to_degrees());
    }

    let w = intersection_subspace(&u, &v, DEFAULT_ZERO_TOL)?;
    let x = w.basis().column(0).into_owned();
    println!(
        "first intersection vector: distance to U {:.1e}, to V {:.1e}",
        (u.project(&x)? - &x).norm(),
        (v.project(&x)? - &x).norm()
    );
    Ok(())
}
