//! Predicted against computed spectra for a few parameter choices,
//! including one outside the convergent region.

use gap_core::prelude::*;
use gap_core::problem::{random_subspace, rng_from_seed};
use gap_core::spectral::{dense_eigenvalues, spectrum_distance};

fn main() -> gap_core::Result<()> {
    let mut rng = rng_from_seed(3);
    let (u, v) = (random_subspace(&mut rng, 9, 3)?, random_subspace(&mut rng, 9, 5)?);
    let angles = principal_angles(&u, &v, DEFAULT_ZERO_TOL)?;
    let dims = PairDims::new(u.dim(), v.dim(), u.ambient_dim());

    let choices = [
        GapParameters::new(1.0, 1.0, 1.0)?.with_label("AP"),
        GapParameters::new(0.5, 2.0, 2.0)?.with_label("DR"),
        GapParameters::new(0.8, 1.5, 1.2)?,
        GapParameters::new(1.0, 2.0, 2.0)?.with_label("reflections"),
    ];
    for params in choices {
        let predicted = predict_eigenvalues(&params, &angles, dims)?;
        let dense = build_dense_operator(&params, &u, &v)?;
        let distance = spectrum_distance(&predicted.expanded(), &dense_eigenvalues(&dense)?)?;
        let report = classify_convergence(&dense, 1e-9)?;
        println!(
            "{:<12} {:?}: predicted gamma {:.6}, dense gamma {:.6}, max eigenvalue gap {:.1e}, {:?}",
            params.label.clone().unwrap_or_else(|| format!("({}, {}, {})", params.alpha, params.alpha1, params.alpha2)),
            params.classify(),
            predicted.gamma,
            subdominant_magnitude(&dense, 1e-9)?,
            distance,
            report.verdict
        );
    }
    Ok(())
}
