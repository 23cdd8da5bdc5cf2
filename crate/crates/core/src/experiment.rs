//! Benchmark harness: configuration, the problem-by-method sweep, and the
//! CSV, summary, manifest and metadata writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{GapError, Result};
use crate::operators::{preset, Preset};
use crate::problem::{generate_problem_with_shape, problem_id, substream_seed, ProblemInstance, ProblemShape, RNG_STREAM};
use crate::solvers::{fit_observed_rate, run_adaptive, run_fixed, SolverTrace, StoppingRule, Termination, DEFAULT_EPSILON_CAP};
use crate::spectral::{expected_iterations, theoretical_rate};

/// Default `n_rows_A` categories.
pub const DEFAULT_CATEGORIES: [usize; 13] = [1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99];

pub const DEFAULT_PROBLEMS_PER_CATEGORY: usize = 500;

/// Relaxation of the fixed-parameter comparison method.
pub const DEFAULT_FIXED_RELAXATION: f64 = 1.8;

/// Exact header of the results file.
pub const RESULTS_HEADER: &str =
    "problem_id,seed,n_rows_A,theta_f,theta_p,method,iterations,terminated,final_residual,observed_rate,final_angle_estimate";

pub const MANIFEST_HEADER: &str = "problem_id,seed,n_rows_A,theta_f";

pub const SUMMARY_HEADER: &str =
    "method,decile,theta_f_min,theta_f_max,theta_f_median,runs,converged,median_iterations,expected_iterations";

pub const ANGLES_HEADER: &str = "problem_id,theta_f,min_estimate_minus_theta_f";

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.csv";
pub const ANGLES_FILE: &str = "gapa_angles.csv";
pub const METADATA_FILE: &str = "metadata.txt";

pub fn default_methods() -> Vec<Preset> {
    vec![
        Preset::GapStar,
        Preset::GapaInit,
        Preset::Gap2a,
        Preset::Dr,
        Preset::MapOpt,
        Preset::GapFixed(DEFAULT_FIXED_RELAXATION),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub categories: Vec<usize>,
    pub problems_per_category: usize,
    pub methods: Vec<Preset>,
    pub stopping: StoppingRule,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `0` uses all available cores.
    pub jobs: usize,
    pub shape: ProblemShape,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            categories: DEFAULT_CATEGORIES.to_vec(),
            problems_per_category: DEFAULT_PROBLEMS_PER_CATEGORY,
            methods: default_methods(),
            stopping: StoppingRule::default(),
            base_seed: 0,
            output_dir: PathBuf::from("gap-results"),
            jobs: 0,
            shape: ProblemShape::default(),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| GapError::Config(format!("bad entry {s:?} in {key}")))
        })
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| GapError::Config(format!("bad value {value:?} for {key}")))
}

/// Splits `key,list` on commas that are not inside parentheses.
pub(crate) fn split_methods(value: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in value.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(value[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(value[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

impl ExperimentConfig {
    /// Parses the flat `key = value` format. Blank lines and `#` comments
    /// are ignored; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut tolerance = cfg.stopping.tolerance;
        let mut max_iterations = cfg.stopping.max_iterations;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GapError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "categories" => cfg.categories = parse_list(key, value)?,
                "problems_per_category" => cfg.problems_per_category = parse_value(key, value)?,
                "methods" => {
                    cfg.methods = split_methods(value)
                        .into_iter()
                        .map(|m| m.parse::<Preset>().map_err(|e| GapError::Config(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "tolerance" => tolerance = parse_value(key, value)?,
                "max_iterations" => max_iterations = parse_value(key, value)?,
                "base_seed" => cfg.base_seed = parse_value(key, value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "jobs" => cfg.jobs = parse_value(key, value)?,
                "ambient_dim" => cfg.shape.ambient = parse_value(key, value)?,
                "rows_b" => cfg.shape.rows_b = parse_value(key, value)?,
                other => return Err(GapError::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        cfg.stopping = StoppingRule::new(tolerance, max_iterations).map_err(|e| GapError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| GapError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes to the format read by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "categories = {}", join(self.categories.iter().map(|c| c.to_string()).collect()));
        let _ = writeln!(s, "problems_per_category = {}", self.problems_per_category);
        let _ = writeln!(s, "methods = {}", join(self.methods.iter().map(Preset::name).collect()));
        let _ = writeln!(s, "tolerance = {:?}", self.stopping.tolerance);
        let _ = writeln!(s, "max_iterations = {}", self.stopping.max_iterations);
        let _ = writeln!(s, "base_seed = {}", self.base_seed);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "ambient_dim = {}", self.shape.ambient);
        let _ = writeln!(s, "rows_b = {}", self.shape.rows_b);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(GapError::Config("no categories given".into()));
        }
        if let Some(c) = self.categories.iter().find(|&&c| !(1..=99).contains(&c)) {
            return Err(GapError::Config(format!("category {c} outside [1, 99]")));
        }
        if self.problems_per_category == 0 {
            return Err(GapError::Config("problems_per_category must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(GapError::Config("no methods given".into()));
        }
        if self.shape.rows_b == 0 || self.shape.rows_b >= self.shape.ambient || self.categories.iter().any(|&c| c >= self.shape.ambient) {
            return Err(GapError::Config("problem shape does not fit the categories".into()));
        }
        Ok(())
    }

    /// `(category, index)` pairs in output order.
    pub fn problem_keys(&self) -> Vec<(usize, usize)> {
        self.categories
            .iter()
            .flat_map(|&c| (0..self.problems_per_category).map(move |i| (c, i)))
            .collect()
    }

    pub fn generate(&self, n_rows_a: usize, index: usize) -> Result<ProblemInstance> {
        generate_problem_with_shape(
            self.shape,
            n_rows_a,
            substream_seed(self.base_seed, n_rows_a, index),
            problem_id(n_rows_a, index),
        )
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| GapError::InvalidParameter(format!("thread pool: {e}")))
    }
}

/// One row of the results file, plus the adaptive conservativeness datum.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem_id: String,
    pub seed: u64,
    pub n_rows_a: usize,
    pub theta_f: f64,
    pub theta_p: f64,
    pub method: Preset,
    pub iterations: usize,
    pub termination: Termination,
    pub final_residual: f64,
    pub observed_rate: Option<f64>,
    pub final_angle_estimate: Option<f64>,
    pub min_angle_estimate: Option<f64>,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// `|final estimate - theta_f| / theta_f` for adaptive runs.
    pub fn relative_angle_error(&self) -> Option<f64> {
        self.final_angle_estimate.map(|e| (e - self.theta_f).abs() / self.theta_f)
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{},{},{},{:?},{:?},{},{},{},{:?},{},{}",
            self.problem_id,
            self.seed,
            self.n_rows_a,
            self.theta_f,
            self.theta_p,
            self.method.name(),
            self.iterations,
            self.termination.as_str(),
            self.final_residual,
            opt(self.observed_rate),
            opt(self.final_angle_estimate),
        )
    }

    /// Inverse of [`RunRecord::to_csv_row`]. The minimum estimate is not
    /// part of the row and comes back as `None`.
    pub fn from_csv_row(line: &str) -> Result<Self> {
        let bad = || GapError::InvalidParameter(format!("malformed results row {line:?}"));
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 11 {
            return Err(bad());
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { real(s).map(Some) };
        Ok(Self {
            problem_id: f[0].to_string(),
            seed: f[1].parse().map_err(|_| bad())?,
            n_rows_a: f[2].parse().map_err(|_| bad())?,
            theta_f: real(f[3])?,
            theta_p: real(f[4])?,
            method: f[5].parse()?,
            iterations: f[6].parse().map_err(|_| bad())?,
            termination: match f[7] {
                "converged" => Termination::Converged,
                "max_iters" => Termination::MaxIterations,
                _ => return Err(bad()),
            },
            final_residual: real(f[8])?,
            observed_rate: opt(f[9])?,
            final_angle_estimate: opt(f[10])?,
            min_angle_estimate: None,
        })
    }
}

/// Runs one method on one problem. Oracle methods receive the true angles;
/// the adaptive method starts from `alpha = 1` and sees no angle.
pub fn run_method(problem: &ProblemInstance, method: Preset, rule: &StoppingRule) -> Result<RunRecord> {
    let trace: SolverTrace = if method.is_adaptive() {
        run_adaptive(&problem.pair, &problem.x0, 1.0, rule, DEFAULT_EPSILON_CAP)?
    } else {
        let params = preset(method, Some(problem.theta_f), Some(problem.theta_p))?;
        run_fixed(&params, &problem.pair, &problem.x0, rule, 1)?
    };
    let observed_rate = fit_observed_rate(&trace, trace.iteration_count / 2).ok();
    Ok(RunRecord {
        problem_id: problem.id.clone(),
        seed: problem.seed,
        n_rows_a: problem.n_rows_a,
        theta_f: problem.theta_f,
        theta_p: problem.theta_p,
        method,
        iterations: trace.iteration_count,
        termination: trace.termination,
        final_residual: trace.final_residual(),
        observed_rate,
        final_angle_estimate: trace.final_angle_estimate(),
        min_angle_estimate: trace.min_angle_estimate,
    })
}

/// Runs every configured method on every problem, in parallel across
/// problems. Records come back in `(category, index, method)` order
/// regardless of scheduling.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let keys = config.problem_keys();
    let per_problem: Vec<Result<Vec<RunRecord>>> = config.pool()?.install(|| {
        keys.par_iter()
            .map(|&(c, i)| {
                let problem = config.generate(c, i)?;
                config
                    .methods
                    .iter()
                    .map(|&m| run_method(&problem, m, &config.stopping))
                    .collect()
            })
            .collect()
    });
    let mut out = Vec::with_capacity(keys.len() * config.methods.len());
    for rows in per_problem {
        out.extend(rows?);
    }
    Ok(out)
}

/// One line of the problem manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub problem_id: String,
    pub seed: u64,
    pub n_rows_a: usize,
    pub theta_f: f64,
}

pub fn generate_manifest(config: &ExperimentConfig) -> Result<Vec<ManifestEntry>> {
    config.validate()?;
    let keys = config.problem_keys();
    let entries: Vec<Result<ManifestEntry>> = config.pool()?.install(|| {
        keys.par_iter()
            .map(|&(c, i)| {
                let p = config.generate(c, i)?;
                Ok(ManifestEntry {
                    problem_id: p.id,
                    seed: p.seed,
                    n_rows_a: p.n_rows_a,
                    theta_f: p.theta_f,
                })
            })
            .collect()
    });
    entries.into_iter().collect()
}

pub fn manifest_csv(entries: &[ManifestEntry]) -> String {
    let mut s = format!("{MANIFEST_HEADER}\n");
    for e in entries {
        let _ = writeln!(s, "{},{},{},{:?}", e.problem_id, e.seed, e.n_rows_a, e.theta_f);
    }
    s
}

pub fn results_csv(records: &[RunRecord]) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for r in records {
        s.push_str(&r.to_csv_row());
        s.push('\n');
    }
    s
}

pub fn read_results(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == RESULTS_HEADER => {}
        _ => {
            return Err(GapError::InvalidParameter(format!(
                "{} does not start with the results header",
                path.display()
            )))
        }
    }
    lines.filter(|l| !l.trim().is_empty()).map(RunRecord::from_csv_row).collect()
}

/// Median of per-method iteration counts within one `theta_f` decile.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Preset,
    pub decile: usize,
    pub theta_f_min: f64,
    pub theta_f_max: f64,
    pub theta_f_median: f64,
    pub runs: usize,
    pub converged: usize,
    pub median_iterations: f64,
    pub expected_iterations: Option<u64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Assigns each distinct problem to one of ten equal-count bins by rank
/// of `theta_f` (ties broken by id). Returns `problem_id -> decile`.
pub fn theta_f_deciles(records: &[RunRecord]) -> BTreeMap<String, usize> {
    let mut problems: Vec<(f64, &str)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in records {
        if seen.insert(r.problem_id.as_str()) {
            problems.push((r.theta_f, r.problem_id.as_str()));
        }
    }
    problems.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let n = problems.len();
    problems
        .iter()
        .enumerate()
        .map(|(rank, (_, id))| (id.to_string(), rank * 10 / n.max(1)))
        .collect()
}

/// Per-method, per-decile medians. Expected iterations use the closed-form
/// rate at the decile's median angles and the given tolerance.
pub fn summarize(records: &[RunRecord], tolerance: f64) -> Vec<SummaryRow> {
    let deciles = theta_f_deciles(records);
    let mut methods: Vec<Preset> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut rows = Vec::new();
    for method in methods {
        for decile in 0..10 {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.method == method && deciles[&r.problem_id] == decile)
                .collect();
            if group.is_empty() {
                continue;
            }
            let mut thetas: Vec<f64> = group.iter().map(|r| r.theta_f).collect();
            let mut thetas_p: Vec<f64> = group.iter().map(|r| r.theta_p).collect();
            let mut iters: Vec<f64> = group.iter().map(|r| r.iterations as f64).collect();
            let theta_f_median = median(&mut thetas).unwrap_or(f64::NAN);
            let theta_p_median = median(&mut thetas_p).unwrap_or(f64::NAN);
            let expected = theoretical_rate(method, theta_f_median, Some(theta_p_median))
                .and_then(|g| expected_iterations(g, tolerance))
                .ok();
            rows.push(SummaryRow {
                method,
                decile,
                theta_f_min: thetas[0],
                theta_f_max: thetas[thetas.len() - 1],
                theta_f_median,
                runs: group.len(),
                converged: group.iter().filter(|r| r.converged()).count(),
                median_iterations: median(&mut iters).unwrap_or(f64::NAN),
                expected_iterations: expected,
            });
        }
    }
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:?},{:?},{:?},{},{},{:?},{}",
            r.method.name(),
            r.decile,
            r.theta_f_min,
            r.theta_f_max,
            r.theta_f_median,
            r.runs,
            r.converged,
            r.median_iterations,
            r.expected_iterations.map(|e| e.to_string()).unwrap_or_default(),
        );
    }
    s
}

/// Adaptive runs only: smallest estimate minus the true angle.
pub fn angles_csv(records: &[RunRecord]) -> String {
    let mut s = format!("{ANGLES_HEADER}\n");
    for r in records.iter().filter(|r| r.method.is_adaptive()) {
        if let Some(m) = r.min_angle_estimate {
            let _ = writeln!(s, "{},{:?},{:?}", r.problem_id, r.theta_f, m - r.theta_f);
        }
    }
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub results: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub angles: PathBuf,
    pub metadata: PathBuf,
}

/// Runs the sweep and writes results, summary, manifest, adaptive-angle
/// and metadata files into `config.output_dir`. Everything except the
/// metadata file is a pure function of the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let started = SystemTime::now();
    let records = run_benchmark(config)?;

    let mut manifest = Vec::new();
    for r in &records {
        if manifest.last().is_none_or(|m: &ManifestEntry| m.problem_id != r.problem_id) {
            manifest.push(ManifestEntry {
                problem_id: r.problem_id.clone(),
                seed: r.seed,
                n_rows_a: r.n_rows_a,
                theta_f: r.theta_f,
            });
        }
    }

    let results = write_file(dir, RESULTS_FILE, &results_csv(&records))?;
    let summary = write_file(dir, SUMMARY_FILE, &summary_csv(&summarize(&records, config.stopping.tolerance)))?;
    let manifest = write_file(dir, MANIFEST_FILE, &manifest_csv(&manifest))?;
    let angles = write_file(dir, ANGLES_FILE, &angles_csv(&records))?;
    let metadata = write_file(dir, METADATA_FILE, &metadata_text(config, started))?;
    Ok(ExperimentOutput {
        records,
        results,
        summary,
        manifest,
        angles,
        metadata,
    })
}

fn unix_seconds(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn metadata_text(config: &ExperimentConfig, started: SystemTime) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "started_unix = {}", unix_seconds(started));
    let _ = writeln!(s, "finished_unix = {}", unix_seconds(SystemTime::now()));
    let _ = writeln!(s, "crate_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "rng_stream = {RNG_STREAM}");
    s.push_str(&config.to_text());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            categories: vec![19],
            problems_per_category: 2,
            methods: vec![Preset::GapStar, Preset::Dr],
            shape: ProblemShape { ambient: 40, rows_b: 20 },
            jobs: 1,
            ..Default::default()
        }
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = small_config();
        cfg.methods.push(Preset::GapFixed(1.8));
        cfg.base_seed = 99;
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(ExperimentConfig::parse("categories = 0").is_err());
        assert!(ExperimentConfig::parse("categories = 100").is_err());
        assert!(ExperimentConfig::parse("problems_per_category = 0").is_err());
        assert!(ExperimentConfig::parse("colour = blue").is_err());
        assert!(ExperimentConfig::parse("categories").is_err());
        assert!(ExperimentConfig::parse("tolerance = -1").is_err());
        assert!(ExperimentConfig::parse("methods = GAP_STAR, NOPE").is_err());
        let cfg = ExperimentConfig::parse("# comment\n\ncategories = 5, 99 # trailing\n").unwrap();
        assert_eq!(cfg.categories, vec![5, 99]);
    }

    #[test]
    fn method_list_keeps_parenthesized_commas_apart() {
        assert_eq!(split_methods("DR, GAP_FIXED(1.8),MAP"), vec!["DR", "GAP_FIXED(1.8)", "MAP"]);
    }

    #[test]
    fn one_row_per_problem_and_method() {
        let records = run_benchmark(&small_config()).unwrap();
        assert_eq!(records.len(), 4);
        let csv = results_csv(&records);
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER);
        assert_eq!(records[0].method, Preset::GapStar);
        assert_eq!(records[1].method, Preset::Dr);
        assert_eq!(records[0].problem_id, records[1].problem_id);
    }

    #[test]
    fn csv_rows_round_trip() {
        let records = run_benchmark(&small_config()).unwrap();
        for r in &records {
            let back = RunRecord::from_csv_row(&r.to_csv_row()).unwrap();
            assert_eq!(back.to_csv_row(), r.to_csv_row());
            assert_eq!(back.theta_f.to_bits(), r.theta_f.to_bits());
        }
        assert!(RunRecord::from_csv_row("a,b").is_err());
    }

    #[test]
    fn deciles_partition_by_rank() {
        let mut records = Vec::new();
        let base = run_benchmark(&ExperimentConfig {
            problems_per_category: 1,
            methods: vec![Preset::GapStar],
            ..small_config()
        })
        .unwrap()
        .remove(0);
        for i in 0..20 {
            let mut r = base.clone();
            r.problem_id = format!("p{i:02}");
            r.theta_f = 0.01 * (20 - i) as f64;
            records.push(r);
        }
        let d = theta_f_deciles(&records);
        assert_eq!(d["p19"], 0);
        assert_eq!(d["p18"], 0);
        assert_eq!(d["p00"], 9);
        let rows = summarize(&records, 1e-8);
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.runs == 2));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
