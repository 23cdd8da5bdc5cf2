//! Acceptance suite. Runs every criterion in sequence so that wall-clock
//! budgets are measured without competing tests, prints one PASS/FAIL line
//! per criterion and exits nonzero if any failed.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gap_core::experiment::{run_benchmark, summarize, ExperimentConfig, RunRecord, DEFAULT_CATEGORIES};
use gap_core::prelude::*;
use gap_core::problem::{
    generate_problem, random_point_in_sum, random_subspace, rng_from_seed, substream_seed, ProblemRng,
};
use gap_core::rates::method_comparison;
use gap_core::spectral::{dense_eigenvalues, m_closed_forms, worst_case_gamma};
use nalgebra::{Complex, DMatrix, Matrix2};
use rand::Rng;

const C1_TOL: f64 = 1e-8;
const C1_BUDGET: Duration = Duration::from_secs(30);
const C2_BUDGET: Duration = Duration::from_secs(1);
const C3_STEP: f64 = 0.05;
const C3_HALF_WIDTH: i32 = 5;
const C3_BUDGET: Duration = Duration::from_secs(10);
const C4_TOL: f64 = 1e-9;
const C4_BUDGET: Duration = Duration::from_secs(120);
const C5_LOOSE: (usize, f64) = (100, 0.05);
const C5_TIGHT: (usize, f64) = (400, 0.001);
const C5_ALLOWED_FRACTION: f64 = 0.01;
const C6_CATEGORIES: [usize; 3] = [40, 80, 95];
const C6_PER_CATEGORY: usize = 50;
const C6_FACTOR: f64 = 3.0;
const C6_SMALL_ANGLE: f64 = 0.3;
const C6_GAPA_SPREAD: f64 = 0.25;
const C6_BUDGET: Duration = Duration::from_secs(600);
const C7_DRAWS: usize = 1000;
const C7_REL_TOL: f64 = 1e-10;
const C7_ZERO_TOL: f64 = 1e-12;
const C7_BUDGET: Duration = Duration::from_secs(1);
const C8_TOL: f64 = 1e-8;
const C8_BUDGET: Duration = Duration::from_secs(60);
const C9_BUDGET: Duration = Duration::from_secs(5);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed < budget
}

/// Max distance under a greedy nearest matching of `predicted` into `dense`.
fn matched_distance(predicted: &[Complex<f64>], dense: &[Complex<f64>]) -> f64 {
    assert_eq!(predicted.len(), dense.len());
    let mut used = vec![false; dense.len()];
    let mut worst = 0.0_f64;
    let mut order: Vec<&Complex<f64>> = predicted.iter().collect();
    order.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in order {
        let (j, d) = dense
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let dim_v = [10, 30, 45][i % 3];
        let u = random_subspace(&mut rng, 60, 30).unwrap();
        let v = random_subspace(&mut rng, 60, dim_v).unwrap();
        let angles = principal_angles(&u, &v, DEFAULT_ZERO_TOL).unwrap();
        let theta_f = angles.friedrichs().unwrap();
        let params = optimal_parameters(theta_f).unwrap();
        let dense = build_dense_operator(&params, &u, &v).unwrap();
        let gamma = subdominant_magnitude(&dense, 1e-9).unwrap();
        let s = theta_f.sin();
        worst = worst.max((gamma - (1.0 - s) / (1.0 + s)).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= C1_TOL && within(elapsed, C1_BUDGET),
        format!("dense GAP* rate vs optimum, worst {worst:.2e} (tol {C1_TOL:e}), {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let want = [
        ("DR", 0.99),
        ("MAP", 0.96),
        ("GAP1.65", 0.90),
        ("PRAP", 0.92),
        ("GAP2A", 0.748),
        ("GAP*", 0.75),
    ];
    let got = method_comparison(8.195f64.to_radians()).unwrap();
    let elapsed = start.elapsed();
    let mut ok = got.len() == want.len();
    let mut parts = Vec::new();
    for (entry, (label, value)) in got.iter().zip(want) {
        let same = entry.label == label && format!("{:.2}", entry.gamma) == format!("{value:.2}");
        ok &= same;
        parts.push(format!("{} {:.4}", entry.label, entry.gamma));
    }
    outcome(
        ok && within(elapsed, C2_BUDGET),
        format!("rates at 8.195 deg: {}, {elapsed:.2?}", parts.join(", ")),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut points = 0;
    let mut min_margin = f64::INFINITY;
    for theta_f in [8.195f64.to_radians(), 0.02, 0.5, 1.2] {
        let a_star = 2.0 / (1.0 + theta_f.sin());
        let g_star = gamma_star(theta_f).unwrap();
        let grid: Vec<f64> = (0..12).map(|i| theta_f + (FRAC_PI_2 - theta_f) * i as f64 / 11.0).collect();
        let angles = PrincipalAngleSet::from_angles(grid, 0.0).unwrap();
        for i in -C3_HALF_WIDTH..=C3_HALF_WIDTH {
            for j in -C3_HALF_WIDTH..=C3_HALF_WIDTH {
                for k in -C3_HALF_WIDTH..=C3_HALF_WIDTH {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let step = |n: i32| C3_STEP * n as f64;
                    let params = GapParameters::new(1.0 + step(i), a_star + step(j), a_star + step(k)).unwrap();
                    let g = worst_case_gamma(&params, &angles).unwrap();
                    min_margin = min_margin.min(g - g_star);
                    points += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        points >= 1000 && min_margin > 0.0 && within(elapsed, C3_BUDGET),
        format!("{points} perturbed parameter points, smallest excess over optimum {min_margin:.3e}, {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut estimates = 0usize;
    for i in 0..200 {
        let m = DEFAULT_CATEGORIES[i % DEFAULT_CATEGORIES.len()];
        let p = generate_problem(m, substream_seed(4, m, i)).unwrap();
        let mut rng = rng_from_seed(substream_seed(5, m, i));
        let x0 = random_point_in_sum(&mut rng, p.u(), p.v());
        let trace = run_adaptive(&p.pair, &x0, 1.0, &StoppingRule::default(), DEFAULT_EPSILON_CAP).unwrap();
        for r in &trace.iterations {
            if let Some(e) = r.angle_estimate {
                estimates += 1;
                worst = worst.min(e - p.theta_f);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= -C4_TOL && within(elapsed, C4_BUDGET),
        format!("{estimates} adaptive angle estimates, min(estimate - theta_f) = {worst:.2e}, {elapsed:.2?}"),
    )
}

struct Benchmark {
    records: Vec<RunRecord>,
    elapsed: Duration,
}

fn benchmark() -> &'static Benchmark {
    static CELL: OnceLock<Benchmark> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = ExperimentConfig {
            categories: C6_CATEGORIES.to_vec(),
            problems_per_category: C6_PER_CATEGORY,
            methods: vec![Preset::GapStar, Preset::GapaInit, Preset::Dr, Preset::MapOpt],
            base_seed: 6,
            ..Default::default()
        };
        let start = Instant::now();
        let records = run_benchmark(&config).unwrap();
        Benchmark {
            records,
            elapsed: start.elapsed(),
        }
    })
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let sweep = ExperimentConfig {
        categories: DEFAULT_CATEGORIES.to_vec(),
        problems_per_category: 10,
        methods: vec![Preset::GapaInit],
        base_seed: 5,
        ..Default::default()
    };
    let extra = run_benchmark(&sweep).unwrap();
    let adaptive = benchmark()
        .records
        .iter()
        .chain(&extra)
        .filter(|r| r.method.is_adaptive());
    let (mut loose, mut tight, mut violations) = (0, 0, 0);
    let mut worst_tight = 0.0_f64;
    for r in adaptive {
        let err = r.relative_angle_error().unwrap_or(f64::INFINITY);
        if r.iterations > C5_LOOSE.0 {
            loose += 1;
            let mut bad = err >= C5_LOOSE.1;
            if r.iterations > C5_TIGHT.0 {
                tight += 1;
                worst_tight = worst_tight.max(err);
                bad |= err >= C5_TIGHT.1;
            }
            violations += bad as usize;
        }
    }
    let allowed = (C5_ALLOWED_FRACTION * loose as f64).floor() as usize;
    let elapsed = start.elapsed();
    outcome(
        tight > 0 && violations <= allowed,
        format!(
            "{loose} adaptive runs over {} iterations ({tight} over {}), {violations} outside tolerance (allowed {allowed}), worst long-run error {worst_tight:.2e}, {elapsed:.2?}",
            C5_LOOSE.0, C5_TIGHT.0
        ),
    )
}

fn criterion_6() -> Outcome {
    let bench = benchmark();
    let rows = summarize(&bench.records, StoppingRule::default().tolerance);
    let mut failures = Vec::new();
    let mut worst_ratio = 1.0_f64;
    for row in &rows {
        let Some(expected) = row.expected_iterations else {
            failures.push(format!("{} decile {} has no prediction", row.method, row.decile));
            continue;
        };
        let ratio = row.median_iterations / expected as f64;
        if (ratio.ln()).abs() > (worst_ratio.ln()).abs() {
            worst_ratio = ratio;
        }
        if !(1.0 / C6_FACTOR..=C6_FACTOR).contains(&ratio) {
            failures.push(format!("{} decile {} ratio {ratio:.2}", row.method, row.decile));
        }
    }
    let median_of = |method: Preset, decile: usize| {
        rows.iter()
            .find(|r| r.method == method && r.decile == decile)
            .map(|r| (r.median_iterations, r.theta_f_max))
    };
    let mut ordered_deciles = 0;
    for decile in 0..10 {
        let (Some((gs, max_angle)), Some((map, _)), Some((dr, _))) = (
            median_of(Preset::GapStar, decile),
            median_of(Preset::MapOpt, decile),
            median_of(Preset::Dr, decile),
        ) else {
            continue;
        };
        if max_angle >= C6_SMALL_ANGLE {
            continue;
        }
        ordered_deciles += 1;
        if !(gs <= map && map <= dr) {
            failures.push(format!("decile {decile} order GAP* {gs} MAP {map} DR {dr}"));
        }
    }
    if ordered_deciles == 0 {
        failures.push(format!("no decile lies below theta_f = {C6_SMALL_ANGLE}"));
    }
    let spread = match (median_of(Preset::GapaInit, 0), median_of(Preset::GapStar, 0)) {
        (Some((a, _)), Some((g, _))) => (a / g - 1.0).abs(),
        _ => f64::INFINITY,
    };
    if spread > C6_GAPA_SPREAD {
        failures.push(format!("GAPA vs GAP* on smallest decile differs by {spread:.2}"));
    }
    if !within(bench.elapsed, C6_BUDGET) {
        failures.push(format!("over budget ({:.2?})", bench.elapsed));
    }
    let runs = bench.records.len();
    outcome(
        failures.is_empty(),
        format!(
            "{runs} runs, worst median/expected {worst_ratio:.2}, order checked on {ordered_deciles} deciles, GAPA vs GAP* {spread:.3}, {:.2?}{}",
            bench.elapsed,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

/// `T = P_U^{a2} P_V^{a1}` on the plane spanned by the Friedrichs pair,
/// with `U` along `e1` and `V` along `(cos t, sin t)`.
fn plane_operator(alpha1: f64, alpha2: f64, theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    let pu = Matrix2::new(1.0, 0.0, 0.0, 0.0);
    let pv = Matrix2::new(c * c, c * s, c * s, s * s);
    let relax = |p: Matrix2<f64>, a: f64| Matrix2::identity() * (1.0 - a) + p * a;
    relax(pu, alpha2) * relax(pv, alpha1)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(7);
    let mut worst_rel = 0.0_f64;
    for _ in 0..C7_DRAWS {
        let theta: f64 = rng.random_range(1e-3..FRAC_PI_2 - 1e-3);
        let a1: f64 = rng.random_range(0.05..2.5);
        let a2: f64 = rng.random_range(0.05..2.5);
        let a_star = 2.0 / (1.0 + theta.sin());
        let m = Matrix2::identity() * (2.0 - a_star) + (plane_operator(a1, a2, theta) - Matrix2::identity()) * (a_star / a1);
        let (trace, det) = m_closed_forms(a1, a2, theta).unwrap();
        let scale = m.norm().max(1.0);
        worst_rel = worst_rel
            .max((trace - m.trace()).abs() / m.trace().abs().max(scale))
            .max((det - m.determinant()).abs() / m.determinant().abs().max(scale * scale));
    }
    let mut worst_zero = 0.0_f64;
    for i in 1..100 {
        let theta = FRAC_PI_2 * i as f64 / 100.0;
        let a_star = 2.0 / (1.0 + theta.sin());
        let (trace, det) = m_closed_forms(a_star, a_star, theta).unwrap();
        worst_zero = worst_zero.max(trace.abs()).max(det.abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst_rel <= C7_REL_TOL && worst_zero <= C7_ZERO_TOL && within(elapsed, C7_BUDGET),
        format!("trace/det closed forms, worst relative {worst_rel:.2e}, largest value at optimum {worst_zero:.2e}, {elapsed:.2?}"),
    )
}

/// A small random pair; roughly a third of the draws have `dim U + dim V > n`
/// and hence a nontrivial intersection.
fn small_pair(rng: &mut ProblemRng) -> (Subspace, Subspace) {
    let n = rng.random_range(3..=10);
    let p = rng.random_range(1..n);
    let q = rng.random_range(1..n);
    (random_subspace(rng, n, p).unwrap(), random_subspace(rng, n, q).unwrap())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(8);
    let mut worst = 0.0_f64;
    let (mut with_unpaired, mut with_complement, mut with_intersection) = (0, 0, 0);
    for _ in 0..200 {
        let (u, v) = small_pair(&mut rng);
        let params = GapParameters::new(
            rng.random_range(0.1..1.9),
            rng.random_range(0.1..2.4),
            rng.random_range(0.1..2.4),
        )
        .unwrap();
        let n = u.ambient_dim();
        let angles = principal_angles(&u, &v, DEFAULT_ZERO_TOL).unwrap();
        let s = angles.intersection_dim();
        with_unpaired += (u.dim() != v.dim()) as usize;
        with_complement += (n + s > u.dim() + v.dim()) as usize;
        with_intersection += (s > 0) as usize;
        let predicted = predict_eigenvalues(&params, &angles, PairDims::new(u.dim(), v.dim(), n)).unwrap();
        let dense = dense_eigenvalues(&build_dense_operator(&params, &u, &v).unwrap()).unwrap();
        worst = worst.max(matched_distance(&predicted.expanded(), &dense));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= C8_TOL && with_unpaired > 0 && with_complement > 0 && within(elapsed, C8_BUDGET),
        format!(
            "200 spectra, worst eigenvalue distance {worst:.2e} ({with_unpaired} with unpaired block, {with_complement} with complement block, {with_intersection} with intersection), {elapsed:.2?}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let jordan = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let jordan_rejected = !classify_convergence(&jordan, 1e-9).unwrap().is_convergent();
    let mut rng = rng_from_seed(9);
    let (mut checked, mut rejected) = (0, 0);
    while checked < 300 {
        let (u, v) = small_pair(&mut rng);
        let pick = |rng: &mut ProblemRng, lo: f64, hi: f64, edge: f64| {
            if rng.random_bool(0.25) {
                edge
            } else {
                rng.random_range(lo..hi)
            }
        };
        let params = GapParameters::new(
            pick(&mut rng, 0.05, 1.0, 1.0),
            pick(&mut rng, 0.05, 1.999, 2.0),
            pick(&mut rng, 0.05, 1.999, 2.0),
        )
        .unwrap();
        if !params.classify().is_valid() {
            continue;
        }
        checked += 1;
        let dense = build_dense_operator(&params, &u, &v).unwrap();
        if !classify_convergence(&dense, 1e-9).unwrap().is_convergent() {
            rejected += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        jordan_rejected && rejected == 0 && within(elapsed, C9_BUDGET),
        format!(
            "Jordan block nonconvergent: {jordan_rejected}; {rejected}/{checked} admissible operators misclassified, {elapsed:.2?}"
        ),
    )
}

fn sweep(out: &Path) -> i32 {
    let dir = out.to_str().unwrap();
    let common = [
        "--seed", "2024", "--out", dir, "--categories", "1,50,99", "--per-category", "3", "--methods", "GAP_STAR,GAPA,DR",
    ];
    let gen = gap_core::cli::cli_main(["gapbench", "gen"].iter().chain(&common).copied());
    let run = gap_core::cli::cli_main(["gapbench", "run"].iter().chain(&common).copied());
    gen.max(run)
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let codes = (sweep(a.path()), sweep(b.path()));
    let mut compared = Vec::new();
    let mut identical = codes == (0, 0);
    for entry in fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        if !name.to_string_lossy().ends_with(".csv") {
            continue;
        }
        let left = fs::read(a.path().join(&name)).unwrap();
        let right = fs::read(b.path().join(&name)).unwrap_or_default();
        identical &= !left.is_empty() && left == right;
        compared.push(name.to_string_lossy().into_owned());
    }
    compared.sort();
    outcome(
        identical && compared.len() >= 2,
        format!("exit codes {codes:?}, byte-identical: {}", compared.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let o = f();
        println!("[{}] criterion {n:>2}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.passed as usize;
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
