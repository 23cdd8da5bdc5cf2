//! Closed-form rate tables, the single-angle method comparison, and the
//! scatter and rate plots built on [`crate::plot`].

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::error::{GapError, Result};
use crate::experiment::RunRecord;
use crate::operators::{preset, GapParameters, Preset};
use crate::plot::{LogLogPlot, Series, SeriesStyle};
use crate::spectral::{angle_grid, expected_iterations, predict_eigenvalues, theoretical_rate, PairDims};
use crate::subspace::PrincipalAngleSet;

pub const RATES_HEADER: &str = "theta_f,method,gamma,expected_iterations";

/// Angle of the reference comparison, in degrees.
pub const COMPARISON_THETA_F_DEG: f64 = 8.195;

/// Methods tabulated when no list is given. PRAP is added when `theta_p` is.
pub fn default_rate_methods(with_prap: bool) -> Vec<Preset> {
    let mut m = vec![
        Preset::GapStar,
        Preset::Gap2a,
        Preset::MapOpt,
        Preset::Ap,
        Preset::Dr,
        Preset::GapFixed(1.8),
    ];
    if with_prap {
        m.push(Preset::Prap);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEntry {
    pub method: Preset,
    pub gamma: f64,
    /// `None` when the method does not converge at this angle.
    pub expected_iterations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub theta_f: f64,
    pub entries: Vec<RateEntry>,
}

impl RateRow {
    pub fn get(&self, method: Preset) -> Option<&RateEntry> {
        self.entries.iter().find(|e| e.method == method)
    }
}

/// Rates and iteration counts at tolerance `1e-8` for the default methods.
pub fn rates_table(theta_f_grid: &[f64], theta_p: Option<f64>) -> Result<Vec<RateRow>> {
    rates_table_with(theta_f_grid, theta_p, &default_rate_methods(theta_p.is_some()), 1e-8)
}

pub fn rates_table_with(
    theta_f_grid: &[f64],
    theta_p: Option<f64>,
    methods: &[Preset],
    tolerance: f64,
) -> Result<Vec<RateRow>> {
    theta_f_grid
        .iter()
        .map(|&theta_f| {
            if !(theta_f > 0.0 && theta_f <= FRAC_PI_2) {
                return Err(GapError::AngleOutOfRange {
                    value: theta_f,
                    range: "(0, pi/2]",
                });
            }
            let mut entries = Vec::with_capacity(methods.len());
            for &method in methods {
                let gamma = match theoretical_rate(method, theta_f, theta_p) {
                    Ok(g) => g,
                    // The method's formula does not cover this angle.
                    Err(GapError::AngleOutOfRange { .. }) => continue,
                    Err(e) => return Err(e),
                };
                entries.push(RateEntry {
                    method,
                    gamma,
                    expected_iterations: expected_iterations(gamma, tolerance).ok(),
                });
            }
            Ok(RateRow { theta_f, entries })
        })
        .collect()
}

/// `count` log-spaced angles on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi <= FRAC_PI_2) || count == 0 {
        return Err(GapError::InvalidParameter(format!(
            "log grid needs 0 < lo <= hi <= pi/2 and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().min(hi))
        .collect())
}

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut s = format!("{RATES_HEADER}\n");
    for row in rows {
        for e in &row.entries {
            let _ = writeln!(
                s,
                "{:?},{},{:?},{}",
                row.theta_f,
                e.method.name(),
                e.gamma,
                e.expected_iterations.map(|n| n.to_string()).unwrap_or_default()
            );
        }
    }
    s
}

/// Expected iterations against `theta_f`, one line per method.
pub fn rates_plot(rows: &[RateRow]) -> LogLogPlot {
    let mut plot = LogLogPlot::new("Predicted iterations to 1e-8", "Friedrichs angle (rad)", "iterations");
    let Some(first) = rows.first() else {
        return plot;
    };
    for (i, e) in first.entries.iter().enumerate() {
        let points = rows
            .iter()
            .filter_map(|r| {
                r.get(e.method)
                    .and_then(|x| x.expected_iterations)
                    .map(|n| (r.theta_f, n as f64))
            })
            .collect();
        plot.push(Series {
            name: e.method.name(),
            style: SeriesStyle::Line,
            color: i,
            points,
        });
    }
    plot
}

/// Iterations against `theta_f` for every run, with the predicted count
/// for each method overlaid as a line.
pub fn scatter_plot(records: &[RunRecord], tolerance: f64) -> LogLogPlot {
    let mut plot = LogLogPlot::new("Iterations to convergence", "Friedrichs angle (rad)", "iterations");
    let mut methods: Vec<Preset> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r.theta_f), hi.max(r.theta_f)));
    let grid = if lo.is_finite() && lo > 0.0 {
        log_grid(lo, hi.min(FRAC_PI_2), 60).unwrap_or_default()
    } else {
        Vec::new()
    };
    for (i, &method) in methods.iter().enumerate() {
        plot.push(Series {
            name: method.name(),
            style: SeriesStyle::Points,
            color: i,
            points: records
                .iter()
                .filter(|r| r.method == method)
                .map(|r| (r.theta_f, r.iterations.max(1) as f64))
                .collect(),
        });
    }
    for (i, &method) in methods.iter().enumerate() {
        if method.needs_largest_angle() {
            continue;
        }
        let points: Vec<(f64, f64)> = grid
            .iter()
            .filter_map(|&t| {
                let g = theoretical_rate(method, t, None).ok()?;
                expected_iterations(g, tolerance).ok().map(|n| (t, n as f64))
            })
            .collect();
        plot.push(Series {
            name: format!("{} theory", method.name()),
            style: SeriesStyle::Line,
            color: i,
            points,
        });
    }
    plot
}

/// One entry of the single-angle comparison: a method evaluated on a grid
/// of principal angles spread over `[theta_f, theta_p]`.
#[derive(Debug, Clone)]
pub struct ComparisonEntry {
    pub label: String,
    pub params: GapParameters,
    pub theta_p: f64,
    /// Predicted subdominant magnitude over the angle grid.
    pub gamma: f64,
}

/// Angles per grid in [`method_comparison`].
pub const COMPARISON_GRID: usize = 30;

/// Predicted rates of DR, MAP, GAP(1.65), PRAP, GAP2A and GAP* at one
/// Friedrichs angle. Each uses `COMPARISON_GRID` evenly spaced principal
/// angles up to its own largest angle: `pi/2` except PRAP (`pi/4`) and
/// GAP2A (81.5 degrees, inside the range where its tuning holds). The
/// pair has `dim V = dim U + 1` and one extra ambient direction, so both
/// remainder blocks are present.
pub fn method_comparison(theta_f: f64) -> Result<Vec<ComparisonEntry>> {
    let deg = FRAC_PI_2 / 90.0;
    let cases: [(&str, Preset, f64); 6] = [
        ("DR", Preset::Dr, FRAC_PI_2),
        ("MAP", Preset::MapOpt, FRAC_PI_2),
        ("GAP1.65", Preset::GapFixed(1.65), FRAC_PI_2),
        ("PRAP", Preset::Prap, FRAC_PI_2 / 2.0),
        ("GAP2A", Preset::Gap2a, 81.5 * deg),
        ("GAP*", Preset::GapStar, FRAC_PI_2),
    ];
    let p = COMPARISON_GRID;
    let dims = PairDims::new(p, p + 1, 2 * p + 2);
    cases
        .iter()
        .map(|&(label, method, theta_p)| {
            let params = preset(method, Some(theta_f), Some(theta_p))?;
            let angles = PrincipalAngleSet::from_angles(angle_grid(theta_f, theta_p, p), 0.0)?;
            let gamma = predict_eigenvalues(&params, &angles, dims)?.gamma;
            Ok(ComparisonEntry {
                label: label.into(),
                params,
                theta_p,
                gamma,
            })
        })
        .collect()
}
