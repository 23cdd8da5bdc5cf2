//! A small reproducible sweep: generate problems, run four methods, and
//! write results, summary and a scatter plot to a temporary directory.

use gap_core::experiment::{run_experiment, summary_csv, summarize, ExperimentConfig};
use gap_core::prelude::*;
use gap_core::rates::scatter_plot;

fn main() -> gap_core::Result<()> {
    let out = std::env::temp_dir().join("gap-benchmark-example");
    let config = ExperimentConfig {
        categories: vec![10, 50, 90],
        problems_per_category: 4,
        methods: vec![Preset::GapStar, Preset::GapaInit, Preset::MapOpt, Preset::Dr],
        base_seed: 11,
        output_dir: out.clone(),
        ..Default::default()
    };
    let result = run_experiment(&config)?;
    print!("{}", summary_csv(&summarize(&result.records, config.stopping.tolerance)));

    let svg = out.join("iterations.svg");
    std::fs::write(&svg, scatter_plot(&result.records, config.stopping.tolerance).to_svg())?;
    println!("results in {}", out.display());
    Ok(())
}
