//! Detuning sweeps over drive groups, negative-index band detection and the
//! CSV record format.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::FormulaMode;
use crate::electro::{BranchPolicy, Handedness};
use crate::error::{Error, Result};
use crate::model::ScaledConfig;
use crate::oracle::{extract_linear_response, EquationMode, ProbeSteps};
use crate::pipeline::{evaluate_point, PipelineModes};
use crate::scalar::Cplx;

/// A (pump Γ, coupling Ωc) pair, both γ-scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveGroup {
    #[serde(rename = "pump_Gamma")]
    pub pump: f64,
    #[serde(rename = "Omega_c")]
    pub omega_c: f64,
}

impl DriveGroup {
    pub const fn new(pump: f64, omega_c: f64) -> Self {
        Self { pump, omega_c }
    }
}

/// The three reference drive groups, in reporting order.
pub const REFERENCE_GROUPS: [DriveGroup; 3] = [
    DriveGroup::new(5.0, 20.0),
    DriveGroup::new(50.0, 10.0),
    DriveGroup::new(25.0, 5.0),
];

pub const DEFAULT_FROM: f64 = -1.0;
pub const DEFAULT_TO: f64 = 1.0;
pub const DEFAULT_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub delta_p_range: (f64, f64),
    pub points: usize,
    pub groups: Vec<DriveGroup>,
    pub base: ScaledConfig,
    pub policy: BranchPolicy,
    pub formula_mode: FormulaMode,
    pub equation_mode: EquationMode,
    pub handedness: Handedness,
}

impl SweepSpec {
    /// Δp/γ ∈ [−1, 1], 2001 points, the three reference groups.
    pub fn reference_default(base: ScaledConfig) -> Self {
        Self {
            delta_p_range: (DEFAULT_FROM, DEFAULT_TO),
            points: DEFAULT_POINTS,
            groups: REFERENCE_GROUPS.to_vec(),
            base,
            policy: BranchPolicy::default(),
            formula_mode: FormulaMode::default(),
            equation_mode: EquationMode::default(),
            handedness: Handedness::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.delta_p_range;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Spec("detuning range must be finite".into()));
        }
        if !(a < b) {
            return Err(Error::Spec(format!(
                "range start {a} must be below end {b}"
            )));
        }
        if self.points < 2 {
            return Err(Error::Spec("at least two grid points are required".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::Spec("at least one drive group is required".into()));
        }
        for g in &self.groups {
            if !g.pump.is_finite() || g.pump < 0.0 || !g.omega_c.is_finite() {
                return Err(Error::Spec(format!("invalid drive group {g:?}")));
            }
        }
        self.base.validate()
    }

    /// Grid of Δp/γ values; endpoints are exact.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = self.delta_p_range;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    b
                } else {
                    a + (b - a) * (i as f64) / last
                }
            })
            .collect()
    }

    pub fn modes(&self) -> PipelineModes {
        PipelineModes {
            formula_mode: self.formula_mode,
            policy: self.policy,
            handedness: self.handedness,
        }
    }
}

/// Values of one non-degenerate grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecordValues {
    pub eps: Cplx<f64>,
    pub mu: Cplx<f64>,
    pub xi_eh: Cplx<f64>,
    pub xi_he: Cplx<f64>,
    pub radicand: Cplx<f64>,
    pub n: Cplx<f64>,
    pub branch_k: u8,
    pub negative_re: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub group_index: usize,
    pub group: DriveGroup,
    pub grid_index: usize,
    pub delta_p_over_gamma: f64,
    /// `None` on a pole of the closed forms.
    pub values: Option<RecordValues>,
}

impl SweepRecord {
    pub fn degenerate(&self) -> bool {
        self.values.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    /// Uses the ambient rayon pool.
    Parallel,
}

fn evaluate_record(
    spec: &SweepSpec,
    group_index: usize,
    grid_index: usize,
    x: f64,
) -> Result<SweepRecord> {
    let group = spec.groups[group_index];
    let params = spec
        .base
        .with_group(group.pump, group.omega_c)
        .with_delta_p(x)
        .to_internal::<f64>()?;
    let values = match evaluate_point(&params, spec.modes()) {
        Ok(e) => Some(RecordValues {
            eps: e.constitutive.eps,
            mu: e.constitutive.mu,
            xi_eh: e.constitutive.xi_eh,
            xi_he: e.constitutive.xi_he,
            radicand: e.index.radicand,
            n: e.index.n,
            branch_k: e.index.branch_k,
            negative_re: e.index.negative_re,
        }),
        Err(Error::DegenerateDenominator { .. }) => None,
        Err(other) => return Err(other),
    };
    Ok(SweepRecord {
        group_index,
        group,
        grid_index,
        delta_p_over_gamma: x,
        values,
    })
}

fn jobs(spec: &SweepSpec) -> Vec<(usize, usize, f64)> {
    let grid = spec.grid();
    (0..spec.groups.len())
        .flat_map(|g| grid.iter().enumerate().map(move |(i, &x)| (g, i, x)))
        .collect()
}

/// Evaluates every (group, Δp) point; records come back group-major with
/// ascending Δp regardless of `execution`.
pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let jobs = jobs(spec);
    match execution {
        Execution::Sequential => jobs
            .iter()
            .map(|&(g, i, x)| evaluate_record(spec, g, i, x))
            .collect(),
        Execution::Parallel => jobs
            .par_iter()
            .map(|&(g, i, x)| evaluate_record(spec, g, i, x))
            .collect(),
    }
}

/// A maximal run of consecutive grid points with `Re n < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeBand {
    pub group_index: usize,
    pub group: DriveGroup,
    pub lo: f64,
    pub hi: f64,
    pub lo_index: usize,
    pub hi_index: usize,
    pub min_re_n: f64,
    pub argmin_delta_p: f64,
}

impl NegativeBand {
    pub fn contains(&self, delta_p_over_gamma: f64) -> bool {
        self.lo <= delta_p_over_gamma && delta_p_over_gamma <= self.hi
    }
}

/// Groups records by `group_index`, preserving order.
fn by_group(records: &[SweepRecord]) -> Vec<&[SweepRecord]> {
    records
        .chunk_by(|a, b| a.group_index == b.group_index)
        .collect()
}

pub fn find_negative_bands(records: &[SweepRecord]) -> Vec<NegativeBand> {
    let mut bands = Vec::new();
    for group in by_group(records) {
        let mut current: Option<NegativeBand> = None;
        for r in group {
            match r.values {
                Some(v) if v.negative_re => {
                    let b = current.get_or_insert(NegativeBand {
                        group_index: r.group_index,
                        group: r.group,
                        lo: r.delta_p_over_gamma,
                        hi: r.delta_p_over_gamma,
                        lo_index: r.grid_index,
                        hi_index: r.grid_index,
                        min_re_n: v.n.re,
                        argmin_delta_p: r.delta_p_over_gamma,
                    });
                    b.hi = r.delta_p_over_gamma;
                    b.hi_index = r.grid_index;
                    if v.n.re < b.min_re_n {
                        b.min_re_n = v.n.re;
                        b.argmin_delta_p = r.delta_p_over_gamma;
                    }
                }
                _ => {
                    if let Some(b) = current.take() {
                        bands.push(b);
                    }
                }
            }
        }
        if let Some(b) = current.take() {
            bands.push(b);
        }
    }
    bands
}

/// A change of square-root branch between neighbouring non-degenerate
/// records. `grid_index` is the later record of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchFlip {
    pub group_index: usize,
    pub grid_index: usize,
    pub delta_p_over_gamma: f64,
    pub from_k: u8,
    pub to_k: u8,
}

pub fn detect_branch_flips(records: &[SweepRecord]) -> Vec<BranchFlip> {
    let mut flips = Vec::new();
    for group in by_group(records) {
        let mut prev: Option<u8> = None;
        for r in group {
            let Some(v) = r.values else { continue };
            if let Some(k) = prev {
                if k != v.branch_k {
                    flips.push(BranchFlip {
                        group_index: r.group_index,
                        grid_index: r.grid_index,
                        delta_p_over_gamma: r.delta_p_over_gamma,
                        from_k: k,
                        to_k: v.branch_k,
                    });
                }
            }
            prev = Some(v.branch_k);
        }
    }
    flips
}

/// Per-group statistics written to the run report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group_index: usize,
    pub group: DriveGroup,
    pub points: usize,
    pub degenerate: usize,
    pub negative_re_points: usize,
    pub max_abs_re_eps_minus_1: f64,
    pub max_abs_re_mu_minus_1: f64,
    /// Widest contiguous interval containing the grid point nearest Δp = 0
    /// on which `Re(radicand) < 0` and `Im(radicand) > 0`.
    pub second_quadrant_interval: Option<(f64, f64)>,
}

pub fn summarize(records: &[SweepRecord]) -> Vec<GroupSummary> {
    by_group(records)
        .into_iter()
        .map(|g| {
            let mut s = GroupSummary {
                group_index: g[0].group_index,
                group: g[0].group,
                points: g.len(),
                degenerate: 0,
                negative_re_points: 0,
                max_abs_re_eps_minus_1: 0.0,
                max_abs_re_mu_minus_1: 0.0,
                second_quadrant_interval: second_quadrant_interval(g),
            };
            for r in g {
                match r.values {
                    None => s.degenerate += 1,
                    Some(v) => {
                        s.negative_re_points += usize::from(v.negative_re);
                        s.max_abs_re_eps_minus_1 =
                            s.max_abs_re_eps_minus_1.max((v.eps.re - 1.0).abs());
                        s.max_abs_re_mu_minus_1 =
                            s.max_abs_re_mu_minus_1.max((v.mu.re - 1.0).abs());
                    }
                }
            }
            s
        })
        .collect()
}

/// Expands from the grid point nearest Δp = 0 while the radicand stays in
/// the open second quadrant. Records must belong to one group.
pub fn second_quadrant_interval(group: &[SweepRecord]) -> Option<(f64, f64)> {
    let centre = group
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.delta_p_over_gamma
                .abs()
                .total_cmp(&b.1.delta_p_over_gamma.abs())
        })?
        .0;
    let inside = |r: &SweepRecord| {
        r.values
            .map(|v| v.radicand.re < 0.0 && v.radicand.im > 0.0)
            .unwrap_or(false)
    };
    if !inside(&group[centre]) {
        return None;
    }
    let mut lo = centre;
    while lo > 0 && inside(&group[lo - 1]) {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < group.len() && inside(&group[hi + 1]) {
        hi += 1;
    }
    Some((group[lo].delta_p_over_gamma, group[hi].delta_p_over_gamma))
}

/// Worst-case solver diagnostics of the steady-state oracle over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGridSummary {
    pub points: usize,
    pub solves: usize,
    pub max_residual: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub max_richardson_change: f64,
    pub min_population: f64,
}

/// Runs the finite-difference oracle at every grid point of `spec`. Any
/// singular solve or failed Richardson check aborts with its error.
pub fn oracle_grid_check(spec: &SweepSpec, execution: Execution) -> Result<OracleGridSummary> {
    spec.validate()?;
    let one = |&(g, _i, x): &(usize, usize, f64)| -> Result<crate::oracle::NumericResponse<f64>> {
        let group = spec.groups[g];
        let params = spec
            .base
            .with_group(group.pump, group.omega_c)
            .with_delta_p(x)
            .to_internal::<f64>()?;
        let steps = ProbeSteps::default_for(&params)?;
        extract_linear_response(&params, steps, spec.equation_mode)
    };
    let jobs = jobs(spec);
    let results: Vec<_> = match execution {
        Execution::Sequential => jobs.iter().map(one).collect::<Result<_>>()?,
        Execution::Parallel => jobs.par_iter().map(one).collect::<Result<_>>()?,
    };
    let mut s = OracleGridSummary {
        points: results.len(),
        solves: 0,
        max_residual: 0.0,
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        max_richardson_change: 0.0,
        min_population: f64::INFINITY,
    };
    for r in &results {
        s.solves += r.solves;
        s.max_residual = s.max_residual.max(r.residual);
        s.max_trace_error = s.max_trace_error.max(r.trace_error);
        s.max_hermiticity_error = s.max_hermiticity_error.max(r.hermiticity_error);
        s.max_richardson_change = s.max_richardson_change.max(r.richardson_change);
        s.min_population = s.min_population.min(r.min_population);
    }
    Ok(s)
}

pub const CSV_HEADER: [&str; 18] = [
    "group_Gamma",
    "group_Omega_c",
    "delta_p_over_gamma",
    "re_eps",
    "im_eps",
    "re_mu",
    "im_mu",
    "re_xi_eh",
    "im_xi_eh",
    "re_xi_he",
    "im_xi_he",
    "re_radicand",
    "im_radicand",
    "re_n",
    "im_n",
    "branch_k",
    "negative_re",
    "degenerate",
];

/// Shortest round-trip scientific notation.
fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Writes records as RFC-4180 CSV with a header row. Degenerate records
/// leave every value column empty.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = vec![
            num(r.group.pump),
            num(r.group.omega_c),
            num(r.delta_p_over_gamma),
        ];
        match r.values {
            Some(v) => {
                for z in [v.eps, v.mu, v.xi_eh, v.xi_he, v.radicand, v.n] {
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                row.push(v.branch_k.to_string());
                row.push(v.negative_re.to_string());
                row.push("false".into());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 14));
                row.push("true".into());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_err(line: u64, what: &str) -> Error {
    Error::Spec(format!("CSV line {line}: {what}"))
}

/// Reads records written by [`write_csv`]. Group and grid indices are
/// reconstructed from row order.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Spec("unexpected CSV header".into()));
    }
    let mut records: Vec<SweepRecord> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let f = |k: usize| -> Result<f64> {
            row[k]
                .parse::<f64>()
                .map_err(|_| parse_err(line, &format!("bad number in column {}", CSV_HEADER[k])))
        };
        let group = DriveGroup::new(f(0)?, f(1)?);
        let x = f(2)?;
        let degenerate = match &row[17] {
            "true" => true,
            "false" => false,
            _ => return Err(parse_err(line, "bad degenerate flag")),
        };
        let values = if degenerate {
            None
        } else {
            let c = |k: usize| -> Result<Cplx<f64>> { Ok(Cplx::new(f(k)?, f(k + 1)?)) };
            let branch_k = row[15]
                .parse::<u8>()
                .map_err(|_| parse_err(line, "bad branch_k"))?;
            let negative_re = match &row[16] {
                "true" => true,
                "false" => false,
                _ => return Err(parse_err(line, "bad negative_re flag")),
            };
            Some(RecordValues {
                eps: c(3)?,
                mu: c(5)?,
                xi_eh: c(7)?,
                xi_he: c(9)?,
                radicand: c(11)?,
                n: c(13)?,
                branch_k,
                negative_re,
            })
        };
        let (group_index, grid_index) = match records.last() {
            Some(prev) if prev.group == group => (prev.group_index, prev.grid_index + 1),
            Some(prev) => (prev.group_index + 1, 0),
            None => (0, 0),
        };
        records.push(SweepRecord {
            group_index,
            group,
            grid_index,
            delta_p_over_gamma: x,
            values,
        });
    }
    Ok(records)
}
