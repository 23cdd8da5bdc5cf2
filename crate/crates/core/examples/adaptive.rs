//! Adaptive GAP on a benchmark problem: the angle estimate approaches the
//! Friedrichs angle from above while the relaxation climbs towards a*.

use gap_core::prelude::*;
use gap_core::problem::generate_problem;

fn main() -> gap_core::Result<()> {
    let problem = generate_problem(80, 2024)?;
    let a_star = 2.0 / (1.0 + problem.theta_f.sin());
    println!("{}: theta_f = {:.6}, a* = {:.6}", problem.id, problem.theta_f, a_star);

    let trace = run_adaptive(&problem.pair, &problem.x0, 1.0, &StoppingRule::default(), DEFAULT_EPSILON_CAP)?;
    println!("{:>6} {:>12} {:>12} {:>10}", "k", "residual", "estimate", "alpha");
    let step = (trace.iteration_count / 12).max(1);
    for r in trace.iterations.iter().filter(|r| r.k % step == 0 || r.k == trace.iteration_count) {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        println!("{:>6} {:>12.3e} {:>12} {:>10}", r.k, r.shadow_residual, opt(r.angle_estimate), opt(r.alpha_used));
    }
    println!("terminated: {} after {} iterations", trace.termination.as_str(), trace.iteration_count);
    if let Some(m) = trace.min_angle_estimate {
        println!("smallest estimate - theta_f = {:.2e}", m - problem.theta_f);
    }

    let fixed = run_fixed(&optimal_parameters(problem.theta_f)?, &problem.pair, &problem.x0, &StoppingRule::default(), 1)?;
    println!("GAP* with the true angle: {} iterations", fixed.iteration_count);
    Ok(())
}
