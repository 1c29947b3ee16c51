//! Closed-form weak-probe response of the four-level medium.
//!
//! The steady-state coherences on the two probe transitions are linear in the
//! probe fields, `ρ43 = a1·E + a2·B` and `ρ21 = a3·E + a4·B`. This module
//! evaluates the published closed forms for `a1..a4` together with their
//! denominator set, and the ensemble polarizabilities built from them.
//!
//! The closed forms are evaluated as printed. Their only internal ambiguity
//! is the sign of `iΔp` multiplying `D4` in the shared denominator of `a3`
//! and `a4`; [`FormulaMode`] selects between the printed variant and the one
//! consistent with `a1` and with the two-level limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AtomicParams;
use crate::scalar::{im, is_finite_c, re, Cplx, Real};

/// Factors whose γ-scaled magnitude falls below this are treated as poles.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

/// Which variant of the `a3`/`a4` shared denominator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub enum FormulaMode {
    /// `(γ21 − iΔp)·D4 + Ωc²`, exactly as printed.
    #[default]
    #[serde(rename = "paper-literal")]
    PaperLiteral,
    /// `(γ21 + iΔp)·D4 + Ωc²`, matching `a1` and the two-level limit.
    #[serde(rename = "adjudicated")]
    Adjudicated,
}

impl FormulaMode {
    pub const ALL: [FormulaMode; 2] = [FormulaMode::PaperLiteral, FormulaMode::Adjudicated];

    pub fn label(self) -> &'static str {
        match self {
            FormulaMode::PaperLiteral => "paper-literal",
            FormulaMode::Adjudicated => "adjudicated",
        }
    }
}

impl std::str::FromStr for FormulaMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper-literal" => Ok(FormulaMode::PaperLiteral),
            "adjudicated" => Ok(FormulaMode::Adjudicated),
            other => Err(format!(
                "unknown formula mode `{other}` (expected paper-literal | adjudicated)"
            )),
        }
    }
}

/// The denominators `D1..D9` and the shared numerator `Z`.
///
/// `D6` and `D8` are kept verbatim even though `D8` adds a rate to a cubic
/// product of rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenominatorSet<T> {
    pub d1: Cplx<T>,
    pub d2: Cplx<T>,
    pub d3: Cplx<T>,
    pub d4: Cplx<T>,
    pub d5: Cplx<T>,
    pub d6: Cplx<T>,
    pub d7: Cplx<T>,
    pub d8: Cplx<T>,
    pub d9: Cplx<T>,
    pub z: Cplx<T>,
}

/// One multiplicative factor of a coefficient denominator.
#[derive(Debug, Clone, Copy)]
pub struct GuardFactor<T> {
    pub name: &'static str,
    pub value: Cplx<T>,
    /// Power of s⁻¹ carried by the factor.
    pub rate_power: i32,
}

impl<T: Real> GuardFactor<T> {
    /// Magnitude in units of `gamma_unit^rate_power`.
    pub fn scaled_magnitude(&self, gamma_unit: T) -> T {
        self.value.norm() / gamma_unit.powi(self.rate_power)
    }
}

impl<T: Real> DenominatorSet<T> {
    /// Factors that appear in the denominators of `a1..a4` for `mode`.
    pub fn guard_factors(
        &self,
        params: &AtomicParams<T>,
        mode: FormulaMode,
    ) -> [GuardFactor<T>; 7] {
        let (dp, omega2) = (params.drive.delta_p, params.drive.omega_c.powi(2));
        let g21 = params.dephasings.g21;
        let bracket_a1 = (im(dp) + re(g21)) * self.d4 + re(omega2);
        let bracket_shared = shared_factor(g21, dp, mode) * self.d4 + re(omega2);
        let f = |name, value, rate_power| GuardFactor {
            name,
            value,
            rate_power,
        };
        [
            f("D1", self.d1, 1),
            f("D2", self.d2, 1),
            f("D3", self.d3, 1),
            f("D7", self.d7, 1),
            f("D9", self.d9, 1),
            f("(i*Delta_p + gamma21)*D4 + Omega_c^2", bracket_a1, 2),
            f(shared_label(mode), bracket_shared, 2),
        ]
    }

    /// Smallest γ-scaled magnitude among [`Self::guard_factors`].
    pub fn min_scaled_magnitude(&self, params: &AtomicParams<T>, mode: FormulaMode) -> T {
        self.guard_factors(params, mode)
            .iter()
            .map(|g| g.scaled_magnitude(params.gamma_unit()))
            .fold(T::infinity(), T::min)
    }
}

fn shared_factor<T: Real>(g21: T, delta_p: T, mode: FormulaMode) -> Cplx<T> {
    match mode {
        FormulaMode::PaperLiteral => Cplx::new(g21, -delta_p),
        FormulaMode::Adjudicated => Cplx::new(g21, delta_p),
    }
}

fn shared_label(mode: FormulaMode) -> &'static str {
    match mode {
        FormulaMode::PaperLiteral => "(gamma21 - i*Delta_p)*D4 + Omega_c^2",
        FormulaMode::Adjudicated => "(gamma21 + i*Delta_p)*D4 + Omega_c^2",
    }
}

/// Linear-response coefficients: `ρ43 = a1·E + a2·B`, `ρ21 = a3·E + a4·B`
/// with E in V/m and B in T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseCoefficients<T> {
    pub a1: Cplx<T>,
    pub a2: Cplx<T>,
    pub a3: Cplx<T>,
    pub a4: Cplx<T>,
    pub mode: FormulaMode,
}

impl<T: Real> ResponseCoefficients<T> {
    pub fn as_array(&self) -> [Cplx<T>; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }
}

/// Ensemble polarizabilities: `P = αEE·E + αEB·B`, `M = αBE·E + αBB·B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Polarizabilities<T> {
    pub alpha_ee: Cplx<T>,
    pub alpha_eb: Cplx<T>,
    pub alpha_be: Cplx<T>,
    pub alpha_bb: Cplx<T>,
}

impl<T: Real> Polarizabilities<T> {
    pub fn zero() -> Self {
        let z = Cplx::new(T::zero(), T::zero());
        Self {
            alpha_ee: z,
            alpha_eb: z,
            alpha_be: z,
            alpha_bb: z,
        }
    }
}

pub fn denominators<T: Real>(params: &AtomicParams<T>) -> DenominatorSet<T> {
    let g = &params.dephasings;
    let dr = &params.drive;
    let (dp, dc, delta) = (dr.delta_p, dr.delta_c, dr.delta);
    let omega2 = dr.omega_c.powi(2);
    let pump = params.decays.pump;
    let three = T::lit(3.0);
    let two = T::lit(2.0);

    let d1 = Cplx::new(g.g42, dc);
    let d2 = Cplx::new(delta + dc - dp, -g.g32);
    let d3 = Cplx::new(delta - dp, g.g43);
    let d4 = Cplx::new(g.g41, dc + dp);
    let d5 = Cplx::new(g.g42, dc - dp);
    let d6 = im(g.g41 * dp) + im(g.g42 * dp) - re(delta * dp) - re(three * dc * dp) + re(omega2);
    let d7 = Cplx::new(delta + dc, -g.g31);
    let d8 = re(g.g32 + g.g41) + im(delta + two * dc) * Cplx::new(dc, -g.g42) * re(delta + dc);
    let d9 = re(pump + params.decays.r21);
    let z = (d1 * d2 * re(params.decays.r21) + im(pump) * (d6 + d8 - d5 * re(g.g32))) * re(omega2);

    DenominatorSet {
        d1,
        d2,
        d3,
        d4,
        d5,
        d6,
        d7,
        d8,
        d9,
        z,
    }
}

/// Evaluates `a1..a4`, rejecting parameter points on a pole of any
/// denominator factor.
pub fn response_coefficients<T: Real>(
    dens: &DenominatorSet<T>,
    params: &AtomicParams<T>,
    mode: FormulaMode,
) -> Result<ResponseCoefficients<T>> {
    let unit = params.gamma_unit();
    let guards = dens.guard_factors(params, mode);
    for g in &guards {
        let m = g.scaled_magnitude(unit);
        if !(m >= T::lit(DEGENERATE_THRESHOLD)) {
            return Err(Error::DegenerateDenominator {
                which: g.name.to_string(),
                magnitude: m.as_f64(),
            });
        }
    }
    let [_, _, _, _, _, bracket_a1, bracket_shared] = guards.map(|g| g.value);

    let hbar = re(params.constants.hbar);
    let d12 = re(params.medium.d12);
    let mu34 = re(params.medium.mu34);
    let pump = params.decays.pump;
    let omega2 = re(params.drive.omega_c.powi(2));
    let DenominatorSet {
        d1,
        d2,
        d3,
        d4,
        d7,
        d9,
        z,
        ..
    } = *dens;
    let i = im(T::one());

    let a1 = -(d12 * z) / (d1 * d2 * d2 * d3 * d7 * d9 * bracket_a1 * hbar);
    let a2 = i * re(pump) * mu34 * omega2 / (d1 * d2 * d3 * d9 * hbar);
    let a3 = i * (d4 + re(pump) * omega2 / (d1 * d9)) * d12 / (bracket_shared * hbar);
    let a4 = -(mu34 * z) / (d1 * d2 * d7 * d9 * bracket_shared * hbar);

    for (name, v) in [("a1", a1), ("a2", a2), ("a3", a3), ("a4", a4)] {
        if !is_finite_c(v) {
            return Err(Error::DegenerateDenominator {
                which: format!("{name} overflow"),
                magnitude: f64::INFINITY,
            });
        }
    }
    Ok(ResponseCoefficients {
        a1,
        a2,
        a3,
        a4,
        mode,
    })
}

pub fn polarizabilities<T: Real>(
    a: &ResponseCoefficients<T>,
    params: &AtomicParams<T>,
) -> Polarizabilities<T> {
    let n = params.medium.density;
    let nd = re(n * params.medium.d12);
    let nm = re(n * params.medium.mu34);
    Polarizabilities {
        alpha_ee: nd * a.a3,
        alpha_eb: nd * a.a4,
        alpha_be: nm * a.a1,
        alpha_bb: nm * a.a2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScaledConfig;
    use proptest::prelude::*;

    const G: f64 = 1e8;

    fn defaults() -> AtomicParams<f64> {
        ScaledConfig::reference_defaults().to_internal().unwrap()
    }

    fn two_level(delta_p: f64) -> AtomicParams<f64> {
        ScaledConfig::reference_defaults()
            .with_group(0.0, 0.0)
            .with_delta_p(delta_p)
            .to_internal()
            .unwrap()
    }

    #[test]
    fn anchors() {
        let p = defaults();
        let d = denominators(&p);
        assert_eq!(d.d9, re(6.0 * G));
        assert_eq!(d.d1, Cplx::new(p.dephasings.g42, p.drive.delta_c));

        let mut q = p;
        q.drive.delta_c = 0.0;
        assert_eq!(denominators(&q).d1, re(p.dephasings.g42));
    }

    // Independent hand expansion of the printed D-set at the default point,
    // written in γ units with real/imag parts separated.
    #[test]
    fn default_point_table() {
        let p = defaults();
        let d = denominators(&p);
        let g43 = 1.0 / 18769.0;
        let (g31, g32, g41, g42, gg43) = (
            0.25,
            0.75,
            (g43 + 0.9) / 2.0,
            (g43 + 1.3) / 2.0,
            (g43 + 1.4) / 2.0,
        );
        let (dc, de, dp, om2) = (-5e-3, -1e-3, 0.0, 400.0);
        let tol = 1e-13;
        let chk = |z: Cplx<f64>, r: f64, i: f64, pow: i32| {
            let s = G.powi(pow);
            assert!((z.re / s - r).abs() <= tol * (1.0 + r.abs()), "{z} vs {r}");
            assert!((z.im / s - i).abs() <= tol * (1.0 + i.abs()), "{z} vs {i}");
        };
        chk(d.d1, g42, dc, 1);
        chk(d.d2, de + dc - dp, -g32, 1);
        chk(d.d3, de - dp, gg43, 1);
        chk(d.d4, g41, dc + dp, 1);
        chk(d.d5, g42, dc - dp, 1);
        chk(d.d6, om2, 0.0, 2);
        chk(d.d7, de + dc, -g31, 1);
        // D8 = γ32 + γ41 + i(δ+2Δc)(Δc − iγ42)(δ+Δc)
        let k = (de + 2.0 * dc) * (de + dc);
        chk(d.d8, (g32 + g41) * 1.0 / G.powi(2) + k * g42, k * dc, 3);
        chk(d.d9, 6.0, 0.0, 1);
    }

    #[test]
    fn d8_is_verbatim_mixed_degree() {
        let p = defaults();
        let d = denominators(&p);
        let g = &p.dephasings;
        let (dc, de) = (p.drive.delta_c, p.drive.delta);
        let manual = Cplx::new(g.g32 + g.g41, 0.0)
            + Cplx::new(0.0, de + 2.0 * dc) * Cplx::new(dc, -g.g42) * Cplx::new(de + dc, 0.0);
        assert_eq!(d.d8, manual);
    }

    #[test]
    fn chirality_needs_coupling() {
        for mode in FormulaMode::ALL {
            for dp in [-1.0, -0.3, 0.0, 0.2, 1.0] {
                let p = ScaledConfig::reference_defaults()
                    .with_group(5.0, 0.0)
                    .with_delta_p(dp)
                    .to_internal::<f64>()
                    .unwrap();
                let a = response_coefficients(&denominators(&p), &p, mode).unwrap();
                let zero = Cplx::new(0.0, 0.0);
                assert_eq!(a.a1, zero);
                assert_eq!(a.a2, zero);
                assert_eq!(a.a4, zero);
                let al = polarizabilities(&a, &p);
                assert_eq!(al.alpha_eb, zero);
                assert_eq!(al.alpha_be, zero);
            }
        }
    }

    #[test]
    fn two_level_resonance() {
        let p = two_level(0.0);
        let expected = im(p.medium.d12 / (p.dephasings.g21 * p.constants.hbar));
        for mode in FormulaMode::ALL {
            let a = response_coefficients(&denominators(&p), &p, mode).unwrap();
            assert!(crate::scalar::relative_difference(a.a3, expected) < 1e-14);
        }
    }

    #[test]
    fn two_level_lorentzian_by_mode() {
        for dp in [-1.0, -0.25, 0.4, 1.0] {
            let p = two_level(dp);
            let (d, g21, dps) = (p.medium.d12, p.dephasings.g21, p.drive.delta_p);
            let adj =
                response_coefficients(&denominators(&p), &p, FormulaMode::Adjudicated).unwrap();
            let want = im(d) / (Cplx::new(g21, dps) * p.constants.hbar);
            assert!(crate::scalar::relative_difference(adj.a3, want) < 1e-13);
            let lit =
                response_coefficients(&denominators(&p), &p, FormulaMode::PaperLiteral).unwrap();
            let want_lit = im(d) / (Cplx::new(g21, -dps) * p.constants.hbar);
            assert!(crate::scalar::relative_difference(lit.a3, want_lit) < 1e-13);
        }
    }

    #[test]
    fn conjugation_symmetry_two_level() {
        for mode in FormulaMode::ALL {
            for dp in [0.1, 0.5, 0.9] {
                let plus = two_level(dp);
                let minus = two_level(-dp);
                let ap = response_coefficients(&denominators(&plus), &plus, mode).unwrap();
                let am = response_coefficients(&denominators(&minus), &minus, mode).unwrap();
                assert!(crate::scalar::relative_difference(am.a3, -ap.a3.conj()) < 1e-14);
            }
        }
    }

    #[test]
    fn polarizability_products() {
        let p = defaults();
        let a = response_coefficients(&denominators(&p), &p, FormulaMode::PaperLiteral).unwrap();
        let al = polarizabilities(&a, &p);
        let n = p.medium.density;
        let rd = crate::scalar::relative_difference;
        assert!(rd(al.alpha_ee, a.a3 * n * p.medium.d12) < 1e-15);
        assert!(rd(al.alpha_bb, a.a2 * n * p.medium.mu34) < 1e-15);

        let zero_a3 = ResponseCoefficients {
            a3: Cplx::new(0.0, 0.0),
            ..a
        };
        assert_eq!(polarizabilities(&zero_a3, &p).alpha_ee, Cplx::new(0.0, 0.0));

        let mut dense = p;
        dense.medium.density *= 2.0;
        let al2 = polarizabilities(&a, &dense);
        for (x, y) in [
            (al2.alpha_ee, al.alpha_ee),
            (al2.alpha_eb, al.alpha_eb),
            (al2.alpha_be, al.alpha_be),
            (al2.alpha_bb, al.alpha_bb),
        ] {
            assert_eq!(x, y * 2.0);
        }
    }

    #[test]
    fn modes_agree_at_zero_detuning() {
        let p = defaults();
        let d = denominators(&p);
        let lit = response_coefficients(&d, &p, FormulaMode::PaperLiteral).unwrap();
        let adj = response_coefficients(&d, &p, FormulaMode::Adjudicated).unwrap();
        assert_eq!(lit.a3, adj.a3);
        assert_eq!(lit.a4, adj.a4);
        assert_eq!(lit.a1, adj.a1);
    }

    #[test]
    fn degenerate_pole_is_reported() {
        let mut p = ScaledConfig::reference_defaults()
            .with_group(0.0, 0.0)
            .to_internal::<f64>()
            .unwrap();
        p.decays.r21 = 0.0;
        p.dephasings.g21 = 0.0;
        let err =
            response_coefficients(&denominators(&p), &p, FormulaMode::Adjudicated).unwrap_err();
        match err {
            Error::DegenerateDenominator { which, .. } => assert_eq!(which, "D9"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pole_avoidance_on_default_grid() {
        let base = ScaledConfig::reference_defaults();
        for (pump, omega) in [(5.0, 20.0), (50.0, 10.0), (25.0, 5.0)] {
            for i in 0..=200 {
                let dp = -1.0 + 2.0 * i as f64 / 200.0;
                let p = base
                    .with_group(pump, omega)
                    .with_delta_p(dp)
                    .to_internal::<f64>()
                    .unwrap();
                let d = denominators(&p);
                for mode in FormulaMode::ALL {
                    assert!(d.min_scaled_magnitude(&p, mode) >= 1e-6);
                    response_coefficients(&d, &p, mode).unwrap();
                }
            }
        }
    }

    #[test]
    fn f32_matches_f64_in_gamma_units() {
        let cfg = ScaledConfig {
            gamma_unit: 1.0,
            ..ScaledConfig::reference_defaults()
        };
        let p64 = cfg.to_internal::<f64>().unwrap();
        let p32 = cfg.to_internal::<f32>().unwrap();
        let d64 = denominators(&p64);
        let d32 = denominators(&p32);
        assert!((d32.d6.re as f64 - d64.d6.re).abs() < 1e-3);
        assert!((d32.z.norm() as f64 / d64.z.norm() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn mode_choice_only_touches_a3_a4(dp in -1.0f64..1.0, pump in 0.0f64..50.0, om in 0.0f64..25.0) {
            let p = ScaledConfig::reference_defaults()
                .with_group(pump, om)
                .with_delta_p(dp)
                .to_internal::<f64>()
                .unwrap();
            let d = denominators(&p);
            let lit = response_coefficients(&d, &p, FormulaMode::PaperLiteral).unwrap();
            let adj = response_coefficients(&d, &p, FormulaMode::Adjudicated).unwrap();
            prop_assert_eq!(lit.a1, adj.a1);
            prop_assert_eq!(lit.a2, adj.a2);
        }
    }
}
