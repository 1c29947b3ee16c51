//! Macroscopic constitutive parameters and the chiral refractive index.
//!
//! Polarizabilities are turned into `ε, μ, ξEH, ξHE` through closed forms
//! that already include the Lorentz local-field correction
//! (`E_L = E + P/3ε0`, `B_L = μ0(H + M/3)`). The index for one circular
//! polarization is
//!
//! ```text
//! n = sqrt(εμ − (ξEH + ξHE)²/4) + (i/2)(ξEH − ξHE)
//! ```
//!
//! where the square-root branch is picked pointwise by [`BranchPolicy`].

use serde::{Deserialize, Serialize};

use crate::analytic::Polarizabilities;
use crate::error::{Error, Result};
use crate::model::PhysicalConstants;
use crate::scalar::{im, re, relative_difference, Cplx, Real};

/// Shared denominator magnitude below this fraction of `9ε0` is a pole.
pub const CONSTITUTIVE_DEGENERATE: f64 = 1e-12;

/// Relative permittivity/permeability and dimensionless chirality
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstitutiveParams<T> {
    pub eps: Cplx<T>,
    pub mu: Cplx<T>,
    pub xi_eh: Cplx<T>,
    pub xi_he: Cplx<T>,
}

impl<T: Real> ConstitutiveParams<T> {
    pub fn vacuum() -> Self {
        Self {
            eps: re(T::one()),
            mu: re(T::one()),
            xi_eh: re(T::zero()),
            xi_he: re(T::zero()),
        }
    }
}

/// Square-root branch choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub enum BranchPolicy {
    /// Negated root exactly for radicands in the open second quadrant.
    #[default]
    #[serde(rename = "paper-rule")]
    PaperRule,
    #[serde(rename = "always-principal")]
    AlwaysPrincipal,
    #[serde(rename = "always-negated")]
    AlwaysNegated,
}

impl BranchPolicy {
    pub fn label(self) -> &'static str {
        match self {
            BranchPolicy::PaperRule => "paper-rule",
            BranchPolicy::AlwaysPrincipal => "always-principal",
            BranchPolicy::AlwaysNegated => "always-negated",
        }
    }
}

impl std::str::FromStr for BranchPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper-rule" => Ok(BranchPolicy::PaperRule),
            "always-principal" => Ok(BranchPolicy::AlwaysPrincipal),
            "always-negated" => Ok(BranchPolicy::AlwaysNegated),
            other => Err(format!(
                "unknown branch policy `{other}` (expected paper-rule | always-principal | always-negated)"
            )),
        }
    }
}

/// Sign of the `(i/2)(ξEH − ξHE)` term. `Opposite` is an extrapolation to
/// the other circular polarization and is off by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub enum Handedness {
    #[default]
    #[serde(rename = "printed")]
    Printed,
    #[serde(rename = "opposite")]
    Opposite,
}

impl Handedness {
    pub fn label(self) -> &'static str {
        match self {
            Handedness::Printed => "printed",
            Handedness::Opposite => "opposite",
        }
    }
}

impl std::str::FromStr for Handedness {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "printed" => Ok(Handedness::Printed),
            "opposite" => Ok(Handedness::Opposite),
            other => Err(format!(
                "unknown handedness `{other}` (expected printed | opposite)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexResult<T> {
    /// `εμ − (ξEH + ξHE)²/4`.
    pub radicand: Cplx<T>,
    pub sqrt_value: Cplx<T>,
    /// 0 for the principal root, 1 for its negation.
    pub branch_k: u8,
    pub n: Cplx<T>,
    pub negative_re: bool,
}

struct Shared<T> {
    den: Cplx<T>,
    eps0: Cplx<T>,
    mu0: Cplx<T>,
}

fn shared<T: Real>(a: &Polarizabilities<T>, k: &PhysicalConstants<T>) -> Result<Shared<T>> {
    let eps0 = re(k.eps0);
    let mu0 = re(k.mu0);
    let three = re(T::lit(3.0));
    let nine = re(T::lit(9.0));
    let den = -three * a.alpha_ee
        + mu0 * (-a.alpha_be * a.alpha_eb + a.alpha_bb * (a.alpha_ee - three * eps0))
        + nine * eps0;
    let scaled = den.norm() / (T::lit(9.0) * k.eps0);
    if !(scaled >= T::lit(CONSTITUTIVE_DEGENERATE)) {
        return Err(Error::DegenerateDenominator {
            which: "constitutive denominator".to_string(),
            magnitude: scaled.as_f64(),
        });
    }
    Ok(Shared { den, eps0, mu0 })
}

/// Local-field corrected `ε, μ, ξEH, ξHE` from the ensemble polarizabilities.
pub fn constitutive_params<T: Real>(
    a: &Polarizabilities<T>,
    k: &PhysicalConstants<T>,
) -> Result<ConstitutiveParams<T>> {
    let Shared { den, eps0, mu0 } = shared(a, k)?;
    let two = re(T::lit(2.0));
    let three = re(T::lit(3.0));
    let six = re(T::lit(6.0));
    let nine = re(T::lit(9.0));
    let c = re(k.c);
    let (ee, eb, be, bb) = (a.alpha_ee, a.alpha_eb, a.alpha_be, a.alpha_bb);

    let eps =
        (six * ee + nine * eps0 + mu0 * (two * be * eb - bb * (two * ee + three * eps0))) / den;
    let mu = (-three * ee + two * mu0 * (be * eb - bb * (ee - three * eps0)) + nine * eps0) / den;
    let xi_eh = nine * c * mu0 * eb * eps0 / den;
    let xi_he = nine * c * mu0 * be * eps0 / den;
    Ok(ConstitutiveParams {
        eps,
        mu,
        xi_eh,
        xi_he,
    })
}

/// Relative residuals between the local-field field coefficients of `P` and
/// `M` and the values implied by [`constitutive_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport<T> {
    /// E-coefficient of P versus `ε0(ε − 1)`, relative to `ε0·max(|ε − 1|, |ε|)`.
    pub electric: T,
    /// H-coefficient of M versus `μ − 1`, relative to `max(|μ − 1|, |μ|)`.
    pub magnetic: T,
    /// H-coefficient of P versus `ξEH / c`.
    pub cross_eh: T,
    /// E-coefficient of M versus `ξHE / (c μ0)`.
    pub cross_he: T,
}

impl<T: Real> ConsistencyReport<T> {
    pub fn max(&self) -> T {
        self.electric
            .max(self.magnetic)
            .max(self.cross_eh)
            .max(self.cross_he)
    }
}

/// Cross-checks the constitutive closed forms against the field
/// coefficients of the local-field solved `P` and `M`.
pub fn constitutive_consistency<T: Real>(
    a: &Polarizabilities<T>,
    k: &PhysicalConstants<T>,
) -> Result<ConsistencyReport<T>> {
    let cp = constitutive_params(a, k)?;
    let eps0 = re(k.eps0);
    let mu0 = re(k.mu0);
    let c = re(k.c);
    let three = re(T::lit(3.0));
    let nine = re(T::lit(9.0));
    let (ee, eb, be, bb) = (a.alpha_ee, a.alpha_eb, a.alpha_be, a.alpha_bb);

    // P = [..]E + [..]H
    let den_p = mu0 * be * eb + three * ee - mu0 * bb * ee - nine * eps0 + three * mu0 * eps0 * bb;
    let p_e = three * eps0 * (mu0 * bb * ee - mu0 * be * eb - three * ee) / den_p;
    let p_h = -nine * mu0 * eps0 * eb / den_p;
    // M = [..]E + [..]H
    let den_m = mu0 * bb * ee + nine * eps0 - mu0 * be * eb - three * ee - three * eps0 * mu0 * bb;
    let m_e = nine * eps0 * be / den_m;
    let m_h = three * (mu0 * be * eb - mu0 * bb * ee + three * eps0 * mu0 * bb) / den_m;

    let one = re(T::one());
    // ε − 1 and μ − 1 carry the rounding of a number near 1, so those two
    // residuals are measured against max(|x − 1|, |x|).
    let susceptibility = |coef: Cplx<T>, total: Cplx<T>| {
        let scale = (total - one).norm().max(total.norm());
        (coef - (total - one)).norm() / scale
    };
    Ok(ConsistencyReport {
        electric: susceptibility(p_e / eps0, cp.eps),
        magnetic: susceptibility(m_h, cp.mu),
        cross_eh: relative_difference(p_h, cp.xi_eh / c),
        cross_he: relative_difference(m_e, cp.xi_he / (c * mu0)),
    })
}

/// Principal square root, argument in (−π/2, π/2]. Radicands on the
/// negative real axis (either sign of zero imaginary part) map to the
/// positive imaginary axis.
pub fn principal_sqrt<T: Real>(z: Cplx<T>) -> Cplx<T> {
    let zero = T::zero();
    if z.re == zero && z.im == zero {
        return Cplx::new(zero, zero);
    }
    let half = T::lit(0.5);
    let t = ((z.re.abs() + z.re.hypot(z.im)) * half).sqrt();
    if z.re >= zero {
        Cplx::new(t, z.im / (t + t))
    } else {
        let sign = if z.im < zero { -T::one() } else { T::one() };
        Cplx::new(z.im.abs() / (t + t), sign * t)
    }
}

/// Square root with branch index `k` (0 principal, 1 negated).
pub fn branched_sqrt<T: Real>(z: Cplx<T>, policy: BranchPolicy) -> (Cplx<T>, u8) {
    let p = principal_sqrt(z);
    let negate = match policy {
        BranchPolicy::PaperRule => z.re < T::zero() && z.im > T::zero(),
        BranchPolicy::AlwaysPrincipal => false,
        BranchPolicy::AlwaysNegated => true,
    };
    if negate {
        (-p, 1)
    } else {
        (p, 0)
    }
}

pub fn refractive_index<T: Real>(
    cp: &ConstitutiveParams<T>,
    policy: BranchPolicy,
    handedness: Handedness,
) -> IndexResult<T> {
    let sum = cp.xi_eh + cp.xi_he;
    let radicand = cp.eps * cp.mu - sum * sum * re(T::lit(0.25));
    let (sqrt_value, branch_k) = branched_sqrt(radicand, policy);
    let sign = match handedness {
        Handedness::Printed => T::one(),
        Handedness::Opposite => -T::one(),
    };
    let n = sqrt_value + im(T::lit(0.5) * sign) * (cp.xi_eh - cp.xi_he);
    IndexResult {
        radicand,
        sqrt_value,
        branch_k,
        n,
        negative_re: n.re < T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::si()
    }

    #[test]
    fn vacuum_limit() {
        let cp = constitutive_params(&Polarizabilities::zero(), &k()).unwrap();
        assert_eq!(cp, ConstitutiveParams::vacuum());
        let r = constitutive_consistency(&Polarizabilities::zero(), &k()).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn chirality_numerators() {
        let e0 = k().eps0;
        let a = Polarizabilities {
            alpha_ee: Cplx::new(1e-3 * e0, 2e-4 * e0),
            alpha_eb: Cplx::new(0.0, 0.0),
            alpha_be: Cplx::new(3e-12, 1e-12),
            alpha_bb: Cplx::new(1e-4, 0.0),
        };
        let cp = constitutive_params(&a, &k()).unwrap();
        assert_eq!(cp.xi_eh, Cplx::new(0.0, 0.0));
        assert!(cp.xi_he.norm() > 0.0);
        let b = Polarizabilities {
            alpha_be: Cplx::new(0.0, 0.0),
            alpha_eb: Cplx::new(1e-15, 0.0),
            ..a
        };
        let cp = constitutive_params(&b, &k()).unwrap();
        assert_eq!(cp.xi_he, Cplx::new(0.0, 0.0));
    }

    #[test]
    fn small_alpha_linearizes() {
        // ε ≈ 1 + αEE/ε0 for tiny αEE
        let e0 = k().eps0;
        let a = Polarizabilities {
            alpha_ee: Cplx::new(1e-9 * e0, 0.0),
            ..Polarizabilities::zero()
        };
        let cp = constitutive_params(&a, &k()).unwrap();
        assert!(((cp.eps.re - 1.0) / 1e-9 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_constitutive_denominator() {
        // −3αEE + 9ε0 = 0
        let a = Polarizabilities {
            alpha_ee: Cplx::new(3.0 * k().eps0, 0.0),
            ..Polarizabilities::zero()
        };
        assert!(matches!(
            constitutive_params(&a, &k()),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn branch_examples() {
        assert_eq!(
            branched_sqrt(Cplx::new(-3.0, 4.0), BranchPolicy::PaperRule),
            (Cplx::new(-1.0, -2.0), 1)
        );
        assert_eq!(
            branched_sqrt(Cplx::new(4.0, 0.0), BranchPolicy::PaperRule),
            (Cplx::new(2.0, 0.0), 0)
        );
        assert_eq!(
            branched_sqrt(Cplx::new(-4.0, 0.0), BranchPolicy::PaperRule),
            (Cplx::new(0.0, 2.0), 0)
        );
        assert_eq!(
            branched_sqrt(Cplx::new(-4.0, -0.0), BranchPolicy::PaperRule),
            (Cplx::new(0.0, 2.0), 0)
        );
        // positive imaginary axis is a boundary too
        assert_eq!(
            branched_sqrt(Cplx::new(0.0, 2.0), BranchPolicy::PaperRule).1,
            0
        );
        assert_eq!(
            branched_sqrt(Cplx::new(4.0, 0.0), BranchPolicy::AlwaysNegated),
            (Cplx::new(-2.0, 0.0), 1)
        );
        assert_eq!(
            branched_sqrt(Cplx::new(-3.0, 4.0), BranchPolicy::AlwaysPrincipal),
            (Cplx::new(1.0, 2.0), 0)
        );
        assert_eq!(principal_sqrt(Cplx::new(0.0, 0.0)), Cplx::new(0.0, 0.0));
    }

    #[test]
    fn index_examples() {
        let v = refractive_index(
            &ConstitutiveParams::<f64>::vacuum(),
            BranchPolicy::PaperRule,
            Handedness::Printed,
        );
        assert_eq!(v.n, Cplx::new(1.0, 0.0));
        assert!(!v.negative_re);

        let chiral = ConstitutiveParams {
            eps: Cplx::new(1.0, 0.0),
            mu: Cplx::new(1.0, 0.0),
            xi_eh: Cplx::new(0.0, 2.0),
            xi_he: Cplx::new(0.0, -2.0),
        };
        let r = refractive_index(&chiral, BranchPolicy::PaperRule, Handedness::Printed);
        assert_eq!(r.radicand, Cplx::new(1.0, 0.0));
        assert_eq!(r.n, Cplx::new(-1.0, 0.0));
        assert!(r.negative_re);
        let o = refractive_index(&chiral, BranchPolicy::PaperRule, Handedness::Opposite);
        assert_eq!(o.n, Cplx::new(3.0, 0.0));
    }

    #[test]
    fn f32_branch() {
        let (v, k) = branched_sqrt(Cplx::new(-3.0f32, 4.0), BranchPolicy::PaperRule);
        assert_eq!(k, 1);
        assert!((v - Cplx::new(-1.0, -2.0)).norm() < 1e-6);
    }

    #[test]
    fn chirality_off_near_vacuum_is_positive() {
        let cp = ConstitutiveParams {
            eps: Cplx::new(1.0 + 1e-7, 1e-9),
            mu: Cplx::new(1.0 - 1e-8, -1e-10),
            xi_eh: Cplx::new(0.0, 0.0),
            xi_he: Cplx::new(0.0, 0.0),
        };
        let r = refractive_index(&cp, BranchPolicy::PaperRule, Handedness::Printed);
        assert_eq!(r.branch_k, 0);
        assert!(r.n.re > 0.0);
        assert_eq!(r.n, principal_sqrt(cp.eps * cp.mu));
    }

    fn cplx() -> impl Strategy<Value = Cplx<f64>> {
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(a, b)| Cplx::new(a, b))
    }

    proptest! {
        #[test]
        fn square_recovers_radicand(z in cplx()) {
            for policy in [BranchPolicy::PaperRule, BranchPolicy::AlwaysPrincipal, BranchPolicy::AlwaysNegated] {
                let (v, _) = branched_sqrt(z, policy);
                prop_assert!((v * v - z).norm() <= 1e-12 * z.norm());
            }
            let (p, _) = branched_sqrt(z, BranchPolicy::AlwaysPrincipal);
            let (q, _) = branched_sqrt(z, BranchPolicy::AlwaysNegated);
            prop_assert_eq!(p, -q);
        }

        #[test]
        fn second_quadrant_goes_to_third(r in 1e-6f64..1e6, theta in 0.0f64..1.0) {
            let arg = std::f64::consts::FRAC_PI_2 * (1.0 + theta);
            prop_assume!(arg > std::f64::consts::FRAC_PI_2 && arg < std::f64::consts::PI);
            let z = Cplx::from_polar(r, arg);
            prop_assume!(z.re < 0.0 && z.im > 0.0);
            let (v, k) = branched_sqrt(z, BranchPolicy::PaperRule);
            prop_assert_eq!(k, 1);
            prop_assert!(v.re < 0.0 && v.im < 0.0);
            let a = v.arg();
            prop_assert!(a > -3.0 * std::f64::consts::FRAC_PI_4 - 1e-12 && a < -std::f64::consts::FRAC_PI_2);
        }

        #[test]
        fn consistency_on_small_alphas(
            ee in (-1.0f64..1.0, -1.0f64..1.0),
            eb in (-1.0f64..1.0, -1.0f64..1.0),
            be in (-1.0f64..1.0, -1.0f64..1.0),
            bb in (-1.0f64..1.0, -1.0f64..1.0),
        ) {
            let c = k();
            // magnitudes up to 1e-3 of the natural scale of each slot
            let s_ee = 1e-3 * c.eps0;
            let s_bb = 1e-3 / c.mu0;
            let s_x = 1e-3 * c.eps0 * c.c;
            let a = Polarizabilities {
                alpha_ee: Cplx::new(ee.0, ee.1) * s_ee,
                alpha_eb: Cplx::new(eb.0, eb.1) * (1e-3 / c.c / c.mu0),
                alpha_be: Cplx::new(be.0, be.1) * s_x,
                alpha_bb: Cplx::new(bb.0, bb.1) * s_bb,
            };
            let r = constitutive_consistency(&a, &c).unwrap();
            prop_assert!(r.max() <= 1e-12, "{:?}", r);
        }
    }
}
