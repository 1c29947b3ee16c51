//! Brute-force steady state of the four-level density-matrix equations.
//!
//! The nine printed evolution equations (three populations, six lower
//! coherences) are assembled into a 16×16 linear map over the row-major
//! vector `(ρ11, ρ12, …, ρ44)`. Upper coherences get the conjugate
//! equations, `ρ44` is closed by trace conservation, and the `ρ44` row is
//! then replaced by `Tr ρ = 1`. Linear-response coefficients are extracted
//! by central differences in the probe amplitudes, which makes this module
//! an independent check on [`crate::analytic`].

use serde::{Deserialize, Serialize};

use crate::analytic::{denominators, response_coefficients, FormulaMode, ResponseCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{solve, DenseMatrix};
use crate::model::AtomicParams;
use crate::scalar::{im, re, relative_difference, Cplx, Real};

/// Richardson acceptance: relative change under step halving.
pub const RICHARDSON_TOLERANCE: f64 = 1e-6;
/// Absolute floor of the Richardson test, in units of the coefficient's
/// natural scale (`d/(ħγ)`), for coefficients that vanish identically.
pub const RICHARDSON_FLOOR: f64 = 1e-15;
/// Default probe strength, Ωp = ΩB = this × γ.
pub const DEFAULT_PROBE_RABI: f64 = 1e-4;
/// Upper bound on probe Rabi frequency relative to `max(Ωc, γ21)`.
pub const MAX_PROBE_RATIO: f64 = 1e-3;

/// How the ρ33 → ρ22 cascade enters the ρ22 equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub enum EquationMode {
    /// Inflow `Γ32·ρ33`, balancing the `−Γ32·ρ33` outflow of level 3.
    #[default]
    #[serde(rename = "trace-preserving")]
    TracePreserving,
    /// The printed `Γ32·ρ32` term.
    #[serde(rename = "paper-literal")]
    PaperLiteral,
}

impl EquationMode {
    pub fn label(self) -> &'static str {
        match self {
            EquationMode::TracePreserving => "trace-preserving",
            EquationMode::PaperLiteral => "paper-literal",
        }
    }
}

impl std::str::FromStr for EquationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trace-preserving" => Ok(EquationMode::TracePreserving),
            "paper-literal" => Ok(EquationMode::PaperLiteral),
            other => Err(format!(
                "unknown equation mode `{other}` (expected trace-preserving | paper-literal)"
            )),
        }
    }
}

/// Position of `ρij` (1-based levels) in the unknown vector.
#[inline]
pub fn index(i: usize, j: usize) -> usize {
    debug_assert!((1..=4).contains(&i) && (1..=4).contains(&j));
    4 * (i - 1) + (j - 1)
}

const POPULATIONS: [usize; 4] = [0, 5, 10, 15];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T> {
    pub rho: [[Cplx<T>; 4]; 4],
}

impl<T: Real> DensityMatrix<T> {
    fn from_vec(x: &[Cplx<T>]) -> Self {
        let mut rho = [[Cplx::new(T::zero(), T::zero()); 4]; 4];
        for (k, v) in x.iter().enumerate() {
            rho[k / 4][k % 4] = *v;
        }
        Self { rho }
    }

    /// `ρij` with 1-based level labels.
    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.rho[i - 1][j - 1]
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..4).fold(Cplx::new(T::zero(), T::zero()), |s, k| s + self.rho[k][k])
    }

    /// `max |ρij − conj(ρji)|`.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Smallest real population; negative values are reported, not rejected.
    pub fn min_population(&self) -> T {
        (0..4)
            .map(|k| self.rho[k][k].re)
            .fold(T::infinity(), T::min)
    }
}

/// `matrix · ρ = rhs` with the trace row in place of the ρ44 equation.
#[derive(Debug, Clone)]
pub struct SteadySystem<T> {
    pub matrix: DenseMatrix<T>,
    pub rhs: Vec<Cplx<T>>,
    pub mode: EquationMode,
}

#[derive(Debug, Clone, Copy)]
pub struct SteadyState<T> {
    pub rho: DensityMatrix<T>,
    /// `‖Aρ − b‖∞ / (‖A‖∞ ‖ρ‖∞)`.
    pub residual: T,
}

impl<T: Real> SteadyState<T> {
    pub fn trace_error(&self) -> T {
        (self.rho.trace() - Cplx::new(T::one(), T::zero())).norm()
    }
}

struct Generator<T> {
    m: DenseMatrix<T>,
}

impl<T: Real> Generator<T> {
    /// Adds `coef · ρ(p,q)` to the equation for `ρ(a,b)` and, for a
    /// coherence, the conjugate term to the equation for `ρ(b,a)`.
    fn term(&mut self, (a, b): (usize, usize), coef: Cplx<T>, (p, q): (usize, usize)) {
        self.m.add(index(a, b), index(p, q), coef);
        if a != b {
            self.m.add(index(b, a), index(q, p), coef.conj());
        }
    }
}

/// The full 16×16 time-derivative map `dρ/dt = L ρ`, with the ρ44 row
/// closed by trace conservation.
pub fn generator<T: Real>(
    params: &AtomicParams<T>,
    probe_e: T,
    probe_b: T,
    mode: EquationMode,
) -> DenseMatrix<T> {
    let hbar = params.constants.hbar;
    let op = probe_e * params.medium.d12 / hbar;
    let ob = probe_b * params.medium.mu34 / hbar;
    let oc = params.drive.omega_c;
    let r = &params.decays;
    let g = &params.dephasings;
    let (dp, dc, delta) = (
        params.drive.delta_p,
        params.drive.delta_c,
        params.drive.delta,
    );
    let pump = r.pump;
    let i = |x: T| im(x);

    let mut l = Generator {
        m: DenseMatrix::zeros(16),
    };

    // ρ11
    let e = (1, 1);
    l.term(e, re(-pump), (1, 1));
    l.term(e, re(pump + r.r31), (3, 3));
    l.term(e, re(r.r21), (2, 2));
    l.term(e, re(r.r41), (4, 4));
    l.term(e, i(op), (2, 1));
    l.term(e, i(-op), (1, 2));

    // ρ21
    let e = (2, 1);
    l.term(e, -Cplx::new(g.g21, dp), (2, 1));
    l.term(e, i(-op), (2, 2));
    l.term(e, i(op), (1, 1));
    l.term(e, i(oc), (4, 1));

    // ρ22
    let e = (2, 2);
    l.term(e, re(-r.r21), (2, 2));
    match mode {
        EquationMode::TracePreserving => l.term(e, re(r.r32), (3, 3)),
        EquationMode::PaperLiteral => l.term(e, re(r.r32), (3, 2)),
    }
    l.term(e, re(r.r42), (4, 4));
    l.term(e, i(op), (1, 2));
    l.term(e, i(-op), (2, 1));
    l.term(e, i(oc), (4, 2));
    l.term(e, i(-oc), (2, 4));

    // ρ31
    let e = (3, 1);
    l.term(e, -Cplx::new(g.g31, dc + delta), (3, 1));
    l.term(e, i(op), (3, 2));
    l.term(e, i(ob), (4, 1));

    // ρ32
    let e = (3, 2);
    l.term(e, -Cplx::new(g.g32, dc - dp + delta), (3, 2));
    l.term(e, i(-oc), (3, 4));
    l.term(e, i(-op), (3, 1));
    l.term(e, i(ob), (4, 2));

    // ρ33
    let e = (3, 3);
    l.term(e, re(-pump - r.r31 - r.r32), (3, 3));
    l.term(e, re(pump), (1, 1));
    l.term(e, re(r.r43), (4, 4));
    l.term(e, i(ob), (4, 3));
    l.term(e, i(-ob), (3, 4));

    // ρ41
    let e = (4, 1);
    l.term(e, -Cplx::new(g.g41, dp + dc), (4, 1));
    l.term(e, i(oc), (2, 1));
    l.term(e, i(-op), (4, 2));
    l.term(e, i(ob), (3, 1));

    // ρ42
    let e = (4, 2);
    l.term(e, -Cplx::new(g.g42, dc), (4, 2));
    l.term(e, i(oc), (2, 2));
    l.term(e, i(-oc), (4, 4));
    l.term(e, i(-op), (4, 1));
    l.term(e, i(ob), (3, 2));

    // ρ43
    let e = (4, 3);
    l.term(e, -Cplx::new(g.g43, dp - delta), (4, 3));
    l.term(e, i(oc), (2, 3));
    l.term(e, i(ob), (3, 3));
    l.term(e, i(-ob), (4, 4));

    // ρ44 = −(ρ11 + ρ22 + ρ33)
    let mut m = l.m;
    let row44 = index(4, 4);
    for c in 0..16 {
        let s = m.get(0, c) + m.get(5, c) + m.get(10, c);
        m.set(row44, c, -s);
    }
    m
}

/// Steady-state system at the given probe amplitudes (V/m, T). Amplitudes
/// may be signed; central differences use both signs.
pub fn build_system<T: Real>(
    params: &AtomicParams<T>,
    probe_e: T,
    probe_b: T,
    mode: EquationMode,
) -> SteadySystem<T> {
    let mut matrix = generator(params, probe_e, probe_b, mode);
    let zero = Cplx::new(T::zero(), T::zero());
    let one = Cplx::new(T::one(), T::zero());
    let row44 = index(4, 4);
    for c in 0..16 {
        matrix.set(row44, c, zero);
    }
    for p in POPULATIONS {
        matrix.set(row44, p, one);
    }
    let mut rhs = vec![zero; 16];
    rhs[row44] = one;
    SteadySystem { matrix, rhs, mode }
}

pub fn solve_steady<T: Real>(system: &SteadySystem<T>) -> Result<SteadyState<T>> {
    let sol = solve(&system.matrix, &system.rhs)?;
    Ok(SteadyState {
        rho: DensityMatrix::from_vec(&sol.x),
        residual: sol.relative_residual,
    })
}

/// Probe amplitudes used for central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSteps<T> {
    /// V/m.
    pub e: T,
    /// T.
    pub b: T,
}

impl<T: Real> ProbeSteps<T> {
    /// Steps giving Ωp = ΩB = 1e-4 γ.
    pub fn default_for(params: &AtomicParams<T>) -> Result<Self> {
        let target = T::lit(DEFAULT_PROBE_RABI) * params.gamma_unit() * params.constants.hbar;
        let (d, m) = (params.medium.d12, params.medium.mu34);
        if !(d > T::zero()) || !(m > T::zero()) {
            return Err(Error::config(
                "d12/mu34",
                "dipole moments must be positive for response extraction",
            ));
        }
        Ok(Self {
            e: target / d,
            b: target / m,
        })
    }

    pub fn halved(&self) -> Self {
        let h = T::lit(0.5);
        Self {
            e: self.e * h,
            b: self.b * h,
        }
    }
}

/// Finite-difference linear response plus solve diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NumericResponse<T> {
    pub a1: Cplx<T>,
    pub a2: Cplx<T>,
    pub a3: Cplx<T>,
    pub a4: Cplx<T>,
    pub steps: ProbeSteps<T>,
    /// Worst relative residual over all solves.
    pub residual: T,
    pub trace_error: T,
    pub hermiticity_error: T,
    /// Largest Richardson relative change over the four coefficients.
    pub richardson_change: T,
    pub richardson_ok: bool,
    /// ρ21 and ρ43 of the probe-free steady state.
    pub baseline_rho21: Cplx<T>,
    pub baseline_rho43: Cplx<T>,
    pub min_population: T,
    pub solves: usize,
}

impl<T: Real> NumericResponse<T> {
    pub fn as_array(&self) -> [Cplx<T>; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }
}

#[derive(Default)]
struct Diagnostics<T> {
    residual: T,
    trace: T,
    hermiticity: T,
    min_population: T,
    solves: usize,
}

impl<T: Real> Diagnostics<T> {
    fn record(&mut self, s: &SteadyState<T>) {
        if self.solves == 0 {
            self.min_population = T::infinity();
        }
        self.residual = self.residual.max(s.residual);
        self.trace = self.trace.max(s.trace_error());
        self.hermiticity = self.hermiticity.max(s.rho.hermiticity_error());
        self.min_population = self.min_population.min(s.rho.min_population());
        self.solves += 1;
    }
}

fn solve_at<T: Real>(
    params: &AtomicParams<T>,
    e: T,
    b: T,
    mode: EquationMode,
    diag: &mut Diagnostics<T>,
) -> Result<DensityMatrix<T>> {
    let s = solve_steady(&build_system(params, e, b, mode))?;
    diag.record(&s);
    Ok(s.rho)
}

fn central_differences<T: Real>(
    params: &AtomicParams<T>,
    steps: ProbeSteps<T>,
    mode: EquationMode,
    diag: &mut Diagnostics<T>,
) -> Result<[Cplx<T>; 4]> {
    let zero = T::zero();
    let two = T::lit(2.0);
    let pe = solve_at(params, steps.e, zero, mode, diag)?;
    let me = solve_at(params, -steps.e, zero, mode, diag)?;
    let pb = solve_at(params, zero, steps.b, mode, diag)?;
    let mb = solve_at(params, zero, -steps.b, mode, diag)?;
    let de = re(two * steps.e);
    let db = re(two * steps.b);
    Ok([
        (pe.get(4, 3) - me.get(4, 3)) / de,
        (pb.get(4, 3) - mb.get(4, 3)) / db,
        (pe.get(2, 1) - me.get(2, 1)) / de,
        (pb.get(2, 1) - mb.get(2, 1)) / db,
    ])
}

/// Extracts `a1..a4` by central differences at `steps` and `steps/2`,
/// verifies their agreement and returns the Richardson-extrapolated values.
pub fn extract_linear_response<T: Real>(
    params: &AtomicParams<T>,
    steps: ProbeSteps<T>,
    mode: EquationMode,
) -> Result<NumericResponse<T>> {
    let hbar = params.constants.hbar;
    let limit = T::lit(MAX_PROBE_RATIO) * params.drive.omega_c.abs().max(params.dephasings.g21);
    let op = (steps.e * params.medium.d12 / hbar).abs();
    let ob = (steps.b * params.medium.mu34 / hbar).abs();
    for (name, rabi) in [("Omega_p", op), ("Omega_B", ob)] {
        if !(rabi <= limit) {
            return Err(Error::NonlinearRegime {
                coefficient: name.to_string(),
                detail: format!(
                    "probe Rabi frequency {:e} s^-1 exceeds {:e} s^-1",
                    rabi.as_f64(),
                    limit.as_f64()
                ),
            });
        }
    }

    let mut diag = Diagnostics::default();
    let baseline = solve_at(params, T::zero(), T::zero(), mode, &mut diag)?;
    let coarse = central_differences(params, steps, mode, &mut diag)?;
    let fine = central_differences(params, steps.halved(), mode, &mut diag)?;

    let unit = params.gamma_unit();
    let scale_e = params.medium.d12 / (hbar * unit);
    let scale_b = params.medium.mu34 / (hbar * unit);
    let floor = T::lit(RICHARDSON_FLOOR);
    let scales = [scale_e, scale_b, scale_e, scale_b];
    let names = ["a1", "a2", "a3", "a4"];
    let mut worst = T::zero();
    let mut failure = None;
    for k in 0..4 {
        let change = (coarse[k] - fine[k]).norm();
        let allowed = T::lit(RICHARDSON_TOLERANCE) * fine[k].norm() + floor * scales[k];
        let rel = change / (fine[k].norm() + floor * scales[k]);
        worst = worst.max(rel);
        if !(change <= allowed) && failure.is_none() {
            failure = Some((names[k], rel));
        }
    }
    if let Some((name, rel)) = failure {
        return Err(Error::NonlinearRegime {
            coefficient: name.to_string(),
            detail: format!(
                "Richardson check failed: relative change {:e} under step halving",
                rel.as_f64()
            ),
        });
    }

    // (4·fine − coarse)/3 cancels the O(h²) term of the central differences.
    let extrapolated: [Cplx<T>; 4] =
        std::array::from_fn(|k| (fine[k] * T::lit(4.0) - coarse[k]) / T::lit(3.0));
    Ok(NumericResponse {
        a1: extrapolated[0],
        a2: extrapolated[1],
        a3: extrapolated[2],
        a4: extrapolated[3],
        steps,
        residual: diag.residual,
        trace_error: diag.trace,
        hermiticity_error: diag.hermiticity,
        richardson_change: worst,
        richardson_ok: true,
        baseline_rho21: baseline.get(2, 1),
        baseline_rho43: baseline.get(4, 3),
        min_population: diag.min_population,
        solves: diag.solves,
    })
}

/// Analytic coefficients in one formula mode next to the oracle values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeComparison<T> {
    pub mode: FormulaMode,
    pub analytic: ResponseCoefficients<T>,
    /// `|analytic − numeric| / |numeric|`; `None` where the oracle value is
    /// exactly zero but the analytic one is not.
    pub relative_error: [Option<T>; 4],
    pub absolute_error: [T; 4],
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Comparison<T> {
    pub numeric: NumericResponse<T>,
    pub paper_literal: ModeComparison<T>,
    pub adjudicated: ModeComparison<T>,
}

impl<T: Real> Comparison<T> {
    pub fn for_mode(&self, mode: FormulaMode) -> &ModeComparison<T> {
        match mode {
            FormulaMode::PaperLiteral => &self.paper_literal,
            FormulaMode::Adjudicated => &self.adjudicated,
        }
    }
}

fn relative_error<T: Real>(analytic: Cplx<T>, numeric: Cplx<T>) -> Option<T> {
    let diff = (analytic - numeric).norm();
    if numeric.norm() > T::zero() {
        Some(diff / numeric.norm())
    } else if diff == T::zero() {
        Some(T::zero())
    } else {
        None
    }
}

/// Runs the oracle and the closed forms (both formula modes) at one point.
pub fn compare<T: Real>(
    params: &AtomicParams<T>,
    steps: ProbeSteps<T>,
    mode: EquationMode,
) -> Result<Comparison<T>> {
    let numeric = extract_linear_response(params, steps, mode)?;
    let dens = denominators(params);
    let side = |fm: FormulaMode| -> Result<ModeComparison<T>> {
        let analytic = response_coefficients(&dens, params, fm)?;
        let a = analytic.as_array();
        let n = numeric.as_array();
        Ok(ModeComparison {
            mode: fm,
            analytic,
            relative_error: std::array::from_fn(|k| relative_error(a[k], n[k])),
            absolute_error: std::array::from_fn(|k| (a[k] - n[k]).norm()),
        })
    };
    Ok(Comparison {
        numeric,
        paper_literal: side(FormulaMode::PaperLiteral)?,
        adjudicated: side(FormulaMode::Adjudicated)?,
    })
}

/// Two-level reference `ρ21/E = i d12 / ((γ21 + iΔp) ħ)`.
pub fn two_level_a3<T: Real>(params: &AtomicParams<T>) -> Cplx<T> {
    im(params.medium.d12)
        / (Cplx::new(params.dephasings.g21, params.drive.delta_p) * params.constants.hbar)
}

/// Convenience for tests: relative difference of two coefficient sets.
pub fn max_relative_difference<T: Real>(a: &[Cplx<T>; 4], b: &[Cplx<T>; 4]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| relative_difference(*x, *y))
        .fold(T::zero(), T::max)
}
