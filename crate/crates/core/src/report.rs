//! JSON run manifests, sweep reports and oracle comparison reports.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::analytic::FormulaMode;
use crate::electro::{BranchPolicy, Handedness};
use crate::error::Result;
use crate::model::{AtomicParams, DipoleMode, ScaledConfig};
use crate::oracle::{compare, Comparison, EquationMode, ProbeSteps};
use crate::pipeline::PipelineModes;
use crate::scalar::Cplx;
use crate::sweep::{
    detect_branch_flips, find_negative_bands, summarize, BranchFlip, DriveGroup, GroupSummary,
    NegativeBand, OracleGridSummary, SweepRecord, SweepSpec,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default pump ladder for oracle convergence runs, γ-scaled.
pub const DEFAULT_LADDER: [f64; 4] = [1.0, 0.3, 0.1, 0.03];

/// Printed background magnitudes of `|Re ε − 1|` and `|Re μ − 1|`.
pub const REFERENCE_RE_EPS_MINUS_1: f64 = 1e-13;
pub const REFERENCE_RE_MU_MINUS_1: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeFlags {
    pub dipole_mode: DipoleMode,
    pub formula_mode: FormulaMode,
    pub equation_mode: EquationMode,
    pub branch_policy: BranchPolicy,
    pub handedness: Handedness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub config_path: Option<String>,
    pub config: ScaledConfig,
    /// The configuration resolved to SI, at the config's own drive group.
    pub resolved_si: AtomicParams<f64>,
    pub modes: ModeFlags,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(
        config_path: Option<String>,
        config: &ScaledConfig,
        modes: PipelineModes,
        equation_mode: EquationMode,
    ) -> Result<Self> {
        Ok(Self {
            tool_version: TOOL_VERSION,
            config_path,
            config: config.clone(),
            resolved_si: config.to_internal::<f64>()?,
            modes: ModeFlags {
                dipole_mode: config.dipole_mode,
                formula_mode: modes.formula_mode,
                equation_mode,
                branch_policy: modes.policy,
                handedness: modes.handedness,
            },
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundMagnitudes {
    pub reference_re_eps_minus_1: f64,
    pub reference_re_mu_minus_1: f64,
    pub measured_max_re_eps_minus_1: f64,
    pub measured_max_re_mu_minus_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandReport {
    pub bands: Vec<NegativeBand>,
    pub branch_flips: Vec<BranchFlip>,
    pub groups: Vec<GroupSummary>,
    pub background: BackgroundMagnitudes,
}

impl BandReport {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let groups = summarize(records);
        let background = BackgroundMagnitudes {
            reference_re_eps_minus_1: REFERENCE_RE_EPS_MINUS_1,
            reference_re_mu_minus_1: REFERENCE_RE_MU_MINUS_1,
            measured_max_re_eps_minus_1: groups
                .iter()
                .map(|g| g.max_abs_re_eps_minus_1)
                .fold(0.0, f64::max),
            measured_max_re_mu_minus_1: groups
                .iter()
                .map(|g| g.max_abs_re_mu_minus_1)
                .fold(0.0, f64::max),
        };
        Self {
            bands: find_negative_bands(records),
            branch_flips: detect_branch_flips(records),
            groups,
            background,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub manifest: RunManifest,
    pub spec: SweepSpec,
    #[serde(flatten)]
    pub bands: BandReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_grid: Option<OracleGridSummary>,
}

impl RunReport {
    pub fn new(manifest: RunManifest, spec: &SweepSpec, records: &[SweepRecord]) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            manifest,
            spec: spec.clone(),
            bands: BandReport::from_records(records),
            oracle_grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients<V> {
    pub a1: V,
    pub a2: V,
    pub a3: V,
    pub a4: V,
}

impl<V: Copy> From<[V; 4]> for Coefficients<V> {
    fn from(a: [V; 4]) -> Self {
        Self {
            a1: a[0],
            a2: a[1],
            a3: a[2],
            a4: a[3],
        }
    }
}

/// One analytic-versus-oracle comparison in one formula mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry {
    pub params: ScaledConfig,
    pub equation_mode: EquationMode,
    pub mode: FormulaMode,
    pub analytic: Coefficients<Cplx<f64>>,
    pub numeric: Coefficients<Cplx<f64>>,
    /// `null` where the oracle value is exactly zero and the analytic one
    /// is not.
    pub relative_error: Coefficients<Option<f64>>,
    pub richardson_ok: bool,
    pub richardson_change: f64,
    pub residual: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_population: f64,
}

fn entries(params: &ScaledConfig, eq: EquationMode, c: &Comparison<f64>) -> Vec<OracleEntry> {
    FormulaMode::ALL
        .iter()
        .map(|&m| {
            let side = c.for_mode(m);
            OracleEntry {
                params: params.clone(),
                equation_mode: eq,
                mode: m,
                analytic: side.analytic.as_array().into(),
                numeric: c.numeric.as_array().into(),
                relative_error: side.relative_error.into(),
                richardson_ok: c.numeric.richardson_ok,
                richardson_change: c.numeric.richardson_change,
                residual: c.numeric.residual,
                trace_error: c.numeric.trace_error,
                hermiticity_error: c.numeric.hermiticity_error,
                min_population: c.numeric.min_population,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderStep {
    pub pump_gamma: f64,
    pub entries: Vec<OracleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupOracleRun {
    pub group: DriveGroup,
    /// Comparison at the group's own pump rate.
    pub at_group: Vec<OracleEntry>,
    /// Pump ladder at the group's coupling strength.
    pub ladder: Vec<LadderStep>,
    pub adjudicated_a3_errors: Vec<Option<f64>>,
    pub adjudicated_a3_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub tool_version: &'static str,
    pub delta_p_over_gamma: f64,
    pub ladder: Vec<f64>,
    pub groups: Vec<GroupOracleRun>,
}

fn compare_scaled(cfg: &ScaledConfig, eq: EquationMode) -> Result<Comparison<f64>> {
    let params = cfg.to_internal::<f64>()?;
    compare(&params, ProbeSteps::default_for(&params)?, eq)
}

/// Strictly decreasing and fully defined.
pub fn is_strictly_decreasing(errors: &[Option<f64>]) -> bool {
    errors.iter().all(Option::is_some)
        && errors.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        })
}

/// Oracle comparisons for each group and along a pump ladder at each
/// group's coupling. Solver failures abort the report.
pub fn oracle_report(
    base: &ScaledConfig,
    groups: &[DriveGroup],
    ladder: &[f64],
    delta_p_over_gamma: f64,
    equation_mode: EquationMode,
) -> Result<OracleReport> {
    let mut runs = Vec::with_capacity(groups.len());
    for &group in groups {
        let at = base
            .with_group(group.pump, group.omega_c)
            .with_delta_p(delta_p_over_gamma);
        let at_group = entries(&at, equation_mode, &compare_scaled(&at, equation_mode)?);
        let mut steps = Vec::with_capacity(ladder.len());
        let mut errors = Vec::with_capacity(ladder.len());
        for &pump in ladder {
            let cfg = base
                .with_group(pump, group.omega_c)
                .with_delta_p(delta_p_over_gamma);
            let c = compare_scaled(&cfg, equation_mode)?;
            errors.push(c.adjudicated.relative_error[2]);
            steps.push(LadderStep {
                pump_gamma: pump,
                entries: entries(&cfg, equation_mode, &c),
            });
        }
        runs.push(GroupOracleRun {
            group,
            at_group,
            ladder: steps,
            adjudicated_a3_monotone: is_strictly_decreasing(&errors),
            adjudicated_a3_errors: errors,
        });
    }
    Ok(OracleReport {
        tool_version: TOOL_VERSION,
        delta_p_over_gamma,
        ladder: ladder.to_vec(),
        groups: runs,
    })
}
