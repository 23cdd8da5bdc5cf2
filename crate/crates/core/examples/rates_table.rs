//! Closed-form rates and predicted iteration counts for the standard
//! methods, plus the single-angle comparison over a spread of angles.

use gap_core::rates::{log_grid, method_comparison, rates_csv, rates_table, COMPARISON_THETA_F_DEG};

fn main() -> gap_core::Result<()> {
    let grid = log_grid(1e-3, 1.0, 4)?;
    print!("{}", rates_csv(&rates_table(&grid, Some(std::f64::consts::FRAC_PI_4))?));

    println!();
    println!("theta_f = {COMPARISON_THETA_F_DEG} deg, angles spread up to each method's theta_p:");
    for e in method_comparison(COMPARISON_THETA_F_DEG.to_radians())? {
        println!(
            "  {:<8} gamma {:.4}  (alpha {:.3}, alpha1 {:.3}, alpha2 {:.3}, theta_p {:.1} deg)",
            e.label,
            e.gamma,
            e.params.alpha,
            e.params.alpha1,
            e.params.alpha2,
            e.theta_p.to_degrees()
        );
    }
    Ok(())
}
