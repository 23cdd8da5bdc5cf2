//! Relaxed projections, the GAP iteration operator
//! `S = (1 - a) I + a P_U^{a2} P_V^{a1}` and the standard parameter presets.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{GapError, Result};
use crate::subspace::Subspace;

/// Which case of the standard averagedness assumption a parameter triple
/// satisfies. All cases require `a in (0, 1]` and `a1, a2 in (0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionCase {
    /// `a1, a2 in (0, 2)`.
    A1,
    /// `a in (0, 1)` with `a1 != 2` or `a2 != 2`.
    A2,
    /// `a in (0, 1)` and `a1 = a2 = 2`.
    A3,
    /// None of the above; convergence is not guaranteed.
    Outside,
}

impl AssumptionCase {
    /// For A1 and A2 the fixed-point set of `S` is exactly `U ∩ V`.
    pub fn fixes_intersection_only(self) -> bool {
        matches!(self, AssumptionCase::A1 | AssumptionCase::A2)
    }

    pub fn is_valid(self) -> bool {
        self != AssumptionCase::Outside
    }
}

/// Relaxation parameters `(alpha, alpha1, alpha2)`. `alpha1` relaxes the
/// projection onto `V` (applied first), `alpha2` the one onto `U`.
///
/// Any positive triple is accepted; [`GapParameters::classify`] reports
/// whether it lies in the convergent region.
#[derive(Debug, Clone, PartialEq)]
pub struct GapParameters {
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub label: Option<String>,
}

impl GapParameters {
    pub fn new(alpha: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GapError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(Self {
            alpha,
            alpha1,
            alpha2,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn classify(&self) -> AssumptionCase {
        let (a, a1, a2) = (self.alpha, self.alpha1, self.alpha2);
        let in_02 = |x: f64| x > 0.0 && x <= 2.0;
        if !(a > 0.0 && a <= 1.0 && in_02(a1) && in_02(a2)) {
            return AssumptionCase::Outside;
        }
        if a1 < 2.0 && a2 < 2.0 {
            AssumptionCase::A1
        } else if a < 1.0 && (a1 != 2.0 || a2 != 2.0) {
            AssumptionCase::A2
        } else if a < 1.0 {
            AssumptionCase::A3
        } else {
            AssumptionCase::Outside
        }
    }
}

/// `(1 - alpha) x + alpha P_S x`.
pub fn relaxed_project(s: &Subspace, alpha: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    s.check_len(x.len())?;
    Ok(relaxed_project_unchecked(s, alpha, x))
}

pub(crate) fn relaxed_project_unchecked(s: &Subspace, alpha: f64, x: &DVector<f64>) -> DVector<f64> {
    let mut out = s.project_unchecked(x);
    out.axpy(1.0 - alpha, x, alpha);
    out
}

/// One GAP step `(1 - a) x + a P_U^{a2} P_V^{a1} x`.
pub fn gap_step(
    params: &GapParameters,
    u: &Subspace,
    v: &Subspace,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    u.check_len(x.len())?;
    v.check_len(x.len())?;
    Ok(gap_step_unchecked(params, u, v, x))
}

pub(crate) fn gap_step_unchecked(
    params: &GapParameters,
    u: &Subspace,
    v: &Subspace,
    x: &DVector<f64>,
) -> DVector<f64> {
    let y = relaxed_project_unchecked(v, params.alpha1, x);
    let mut out = relaxed_project_unchecked(u, params.alpha2, &y);
    if params.alpha != 1.0 {
        out.axpy(1.0 - params.alpha, x, params.alpha);
    }
    out
}

/// Dense `n x n` matrix of the GAP operator, for spectral checks.
pub fn build_dense_operator(params: &GapParameters, u: &Subspace, v: &Subspace) -> Result<DMatrix<f64>> {
    let n = u.ambient_dim();
    if v.ambient_dim() != n {
        return Err(GapError::DimensionMismatch {
            expected: n,
            found: v.ambient_dim(),
        });
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let relaxed_u = &eye * (1.0 - params.alpha2) + u.projector() * params.alpha2;
    let relaxed_v = &eye * (1.0 - params.alpha1) + v.projector() * params.alpha1;
    Ok(&eye * (1.0 - params.alpha) + (relaxed_u * relaxed_v) * params.alpha)
}

fn check_friedrichs(theta_f: f64) -> Result<f64> {
    if theta_f > 0.0 && theta_f <= FRAC_PI_2 {
        Ok(theta_f)
    } else {
        Err(GapError::AngleOutOfRange {
            value: theta_f,
            range: "(0, pi/2]",
        })
    }
}

/// The rate-optimal relaxation `2 / (1 + sin theta_f)`.
pub fn optimal_relaxation(theta_f: f64) -> Result<f64> {
    let theta_f = check_friedrichs(theta_f)?;
    Ok(2.0 / (1.0 + theta_f.sin()))
}

/// `alpha = 1`, `alpha1 = alpha2 = 2 / (1 + sin theta_f)`.
pub fn optimal_parameters(theta_f: f64) -> Result<GapParameters> {
    let a = optimal_relaxation(theta_f)?;
    Ok(GapParameters::new(1.0, a, a)?.with_label("GAP*"))
}

/// Named parameter choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Optimal GAP, `(1, a*, a*)`.
    GapStar,
    /// First step of adaptive GAP, `(1, 1, 1)`.
    GapaInit,
    /// Optimally relaxed alternating projections, `(2 / (1 + sin^2 theta_f), 1, 1)`.
    MapOpt,
    /// Plain alternating projections.
    Ap,
    /// Douglas-Rachford, `(1/2, 2, 2)`.
    Dr,
    /// `(1, 2, 2 / (1 + sin 2 theta_f))`; tuned for `dim U <= dim V`.
    Gap2a,
    /// Partially relaxed alternating projections,
    /// `(1, 2 / (sin^2 theta_p + sin^2 theta_f), 1)`.
    Prap,
    /// `(1, c, c)`.
    GapFixed(f64),
}

impl Preset {
    /// Short method name used in tables and CSV files.
    pub fn name(&self) -> String {
        match self {
            Preset::GapStar => "GAP_STAR".into(),
            Preset::GapaInit => "GAPA".into(),
            Preset::MapOpt => "MAP".into(),
            Preset::Ap => "AP".into(),
            Preset::Dr => "DR".into(),
            Preset::Gap2a => "GAP2A".into(),
            Preset::Prap => "PRAP".into(),
            Preset::GapFixed(c) => format!("GAP_FIXED({c})"),
        }
    }

    pub fn needs_friedrichs(&self) -> bool {
        matches!(
            self,
            Preset::GapStar | Preset::MapOpt | Preset::Gap2a | Preset::Prap
        )
    }

    pub fn needs_largest_angle(&self) -> bool {
        matches!(self, Preset::Prap)
    }

    /// Whether the method runs the adaptive solver instead of a fixed operator.
    pub fn is_adaptive(&self) -> bool {
        matches!(self, Preset::GapaInit)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Preset {
    type Err = GapError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase().replace(['-', '*'], "_");
        let preset = match t.as_str() {
            "GAP_STAR" | "GAP_" | "GAPSTAR" => Preset::GapStar,
            "GAPA" | "GAPA_INIT" => Preset::GapaInit,
            "MAP" | "MAP_OPT" => Preset::MapOpt,
            "AP" => Preset::Ap,
            "DR" => Preset::Dr,
            "GAP2A" | "GAP2ALPHA" => Preset::Gap2a,
            "PRAP" => Preset::Prap,
            _ => {
                let inner = t
                    .strip_prefix("GAP_FIXED(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| t.strip_prefix("GAP"));
                let c = inner
                    .and_then(|r| r.parse::<f64>().ok())
                    .filter(|c| *c > 0.0 && c.is_finite())
                    .ok_or_else(|| GapError::InvalidParameter(format!("unknown method {s:?}")))?;
                Preset::GapFixed(c)
            }
        };
        Ok(preset)
    }
}

/// Parameters for a named preset. `theta_f` is required by GAP*, MAP, GAP2A
/// and PRAP; PRAP also needs the largest principal angle `theta_p`.
pub fn preset(name: Preset, theta_f: Option<f64>, theta_p: Option<f64>) -> Result<GapParameters> {
    let method = match name {
        Preset::GapStar => "GAP_STAR",
        Preset::MapOpt => "MAP_OPT",
        Preset::Gap2a => "GAP2A",
        Preset::Prap => "PRAP",
        _ => "",
    };
    let friedrichs = || -> Result<f64> {
        let t = theta_f.ok_or(GapError::MissingAngle {
            method,
            angle: "the Friedrichs angle",
        })?;
        check_friedrichs(t)
    };
    let params = match name {
        Preset::GapStar => return optimal_parameters(friedrichs()?),
        Preset::GapaInit | Preset::Ap => GapParameters::new(1.0, 1.0, 1.0)?,
        Preset::MapOpt => {
            let s = friedrichs()?.sin();
            GapParameters::new(2.0 / (1.0 + s * s), 1.0, 1.0)?
        }
        Preset::Dr => GapParameters::new(0.5, 2.0, 2.0)?,
        Preset::Gap2a => {
            let t = friedrichs()?;
            GapParameters::new(1.0, 2.0, 2.0 / (1.0 + (2.0 * t).sin()))?
        }
        Preset::Prap => {
            let sf = friedrichs()?.sin();
            let tp = theta_p.ok_or(GapError::MissingAngle {
                method,
                angle: "the largest principal angle",
            })?;
            let sp = tp.sin();
            GapParameters::new(1.0, 2.0 / (sp * sp + sf * sf), 1.0)?
        }
        Preset::GapFixed(c) => GapParameters::new(1.0, c, c)?,
    };
    Ok(params.with_label(name.name()))
}
