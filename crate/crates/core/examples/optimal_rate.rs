//! The optimal parameters for a pair with prescribed angles, and the dense
//! spectrum of the resulting operator: every eigenvalue other than one has
//! modulus a* - 1.

use gap_core::prelude::*;
use gap_core::problem::{pair_with_angles, rng_from_seed};
use gap_core::spectral::dense_eigenvalues;

fn main() -> gap_core::Result<()> {
    let angles = [0.0, 0.1, 0.4, 0.9, 1.3];
    let mut rng = rng_from_seed(7);
    let (u, v) = pair_with_angles(&mut rng, 11, 5, 5, &angles)?;
    let theta_f = principal_angles(&u, &v, DEFAULT_ZERO_TOL)?.friedrichs().expect("nonzero angle");

    let params = optimal_parameters(theta_f)?;
    println!("theta_f = {theta_f:.6}");
    println!("a* = {:.6} ({:?})", params.alpha1, params.classify());
    println!("gamma* = {:.6}", gamma_star(theta_f)?);

    let dense = build_dense_operator(&params, &u, &v)?;
    println!("dense subdominant magnitude = {:.6}", subdominant_magnitude(&dense, 1e-9)?);
    for z in dense_eigenvalues(&dense)? {
        println!("  {:+.6} {:+.6}i  |z| = {:.6}", z.re, z.im, z.norm());
    }

    let x0 = nalgebra::DVector::from_element(11, 1.0);
    let pair = SubspacePair::new(u, v, DEFAULT_ZERO_TOL)?;
    for (name, p) in [("GAP*", params), ("AP", preset(Preset::Ap, None, None)?)] {
        let trace = run_fixed(&p, &pair, &x0, &StoppingRule::default(), 1)?;
        println!("{name}: {} iterations, observed rate {:.4}", trace.iteration_count, fit_observed_rate(&trace, trace.iteration_count / 2)?);
    }
    Ok(())
}
