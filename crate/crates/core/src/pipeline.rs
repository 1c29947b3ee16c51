//! Single-point evaluation: denominators → coefficients → polarizabilities →
//! constitutive parameters → refractive index.

use serde::Serialize;

use crate::analytic::{
    denominators, polarizabilities, response_coefficients, DenominatorSet, FormulaMode,
    Polarizabilities, ResponseCoefficients,
};
use crate::electro::{
    constitutive_params, refractive_index, BranchPolicy, ConstitutiveParams, Handedness,
    IndexResult,
};
use crate::error::Result;
use crate::model::AtomicParams;
use crate::scalar::Real;

/// Modes that change the numbers a pipeline run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PipelineModes {
    pub formula_mode: FormulaMode,
    pub policy: BranchPolicy,
    pub handedness: Handedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointEvaluation<T> {
    pub denominators: DenominatorSet<T>,
    pub coefficients: ResponseCoefficients<T>,
    pub polarizabilities: Polarizabilities<T>,
    pub constitutive: ConstitutiveParams<T>,
    pub index: IndexResult<T>,
}

/// Runs the closed-form pipeline at the point described by `params`.
pub fn evaluate_point<T: Real>(
    params: &AtomicParams<T>,
    modes: PipelineModes,
) -> Result<PointEvaluation<T>> {
    let dens = denominators(params);
    let coefficients = response_coefficients(&dens, params, modes.formula_mode)?;
    let alpha = polarizabilities(&coefficients, params);
    let constitutive = constitutive_params(&alpha, &params.constants)?;
    let index = refractive_index(&constitutive, modes.policy, modes.handedness);
    Ok(PointEvaluation {
        denominators: dens,
        coefficients,
        polarizabilities: alpha,
        constitutive,
        index,
    })
}
