//! Physical constants, level-scheme rates, drive and medium configuration.
//!
//! User-facing numbers are expressed in units of a rate scale `gamma_unit`
//! (γ); [`ScaledConfig::to_internal`] converts everything to SI and all
//! downstream computation is SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// CODATA 2018 reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants<T> {
    pub hbar: T,
    pub eps0: T,
    pub mu0: T,
    pub c: T,
}

impl<T: Real> PhysicalConstants<T> {
    /// SI constants with `eps0` derived as `1/(mu0 c²)` so the vacuum
    /// relation holds to rounding.
    pub fn si() -> Self {
        let mu0 = T::lit(MU0);
        let c = T::lit(C_LIGHT);
        Self {
            hbar: T::lit(HBAR),
            eps0: T::one() / (mu0 * c * c),
            mu0,
            c,
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::si()
    }
}

/// Spontaneous decay rates Γij (level i → level j) and the incoherent pump
/// rate Γ (|1⟩ → |3⟩), all in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRates<T> {
    pub gamma_unit: T,
    pub r21: T,
    pub r31: T,
    pub r32: T,
    pub r41: T,
    pub r42: T,
    pub r43: T,
    pub pump: T,
}

impl<T: Real> DecayRates<T> {
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            gamma_unit: self.gamma_unit,
            r21: self.r21 * factor,
            r31: self.r31 * factor,
            r32: self.r32 * factor,
            r41: self.r41 * factor,
            r42: self.r42 * factor,
            r43: self.r43 * factor,
            pump: self.pump * factor,
        }
    }
}

/// Coherence damping rates γij, s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dephasings<T> {
    pub g21: T,
    pub g31: T,
    pub g32: T,
    pub g41: T,
    pub g42: T,
    pub g43: T,
}

/// Field detunings (Δ = ω_transition − ω_field) and Rabi frequencies, s⁻¹,
/// plus the probe amplitudes used by the steady-state solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveConfig<T> {
    pub omega_c: T,
    pub delta_p: T,
    pub delta_c: T,
    /// Two-photon mismatch δ = Δp − ΔB.
    pub delta: T,
    /// Probe electric amplitude, V/m.
    pub probe_e: T,
    /// Probe magnetic amplitude, T.
    pub probe_b: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumConfig<T> {
    /// Atomic number density, m⁻³.
    pub density: T,
    /// Transition wavelength, m.
    pub wavelength: T,
    /// Electric dipole moment of |1⟩–|2⟩, C·m.
    pub d12: T,
    /// Magnetic dipole moment of |3⟩–|4⟩, J/T.
    pub mu34: T,
}

/// How dipole moments are estimated from spontaneous decay rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DipoleMode {
    /// `sqrt(3 ε0 ħ λ³ Γ / 8π²)` and `sqrt(3 ħ λ³ Γ / (8π² μ0))`.
    #[default]
    #[serde(rename = "si")]
    Si,
    /// `sqrt(3 ħ Γ λ³ / 8π²)` for both moments, no vacuum factors.
    #[serde(rename = "paper")]
    Literal,
}

impl DipoleMode {
    pub fn label(self) -> &'static str {
        match self {
            DipoleMode::Si => "si",
            DipoleMode::Literal => "paper",
        }
    }
}

/// Half-sum dephasing rates of the four-level scheme.
pub fn dephasing_rates<T: Real>(d: &DecayRates<T>) -> Dephasings<T> {
    let half = T::lit(0.5);
    Dephasings {
        g21: d.r21 * half,
        g31: (d.r31 + d.r32) * half,
        g41: (d.r43 + d.r42) * half,
        g42: (d.r43 + d.r31 + d.r21) * half,
        g43: (d.r43 + d.r42 + d.r31 + d.r32) * half,
        g32: (d.r32 + d.r31 + d.r21) * half,
    }
}

/// `sqrt(3 ħ λ³ Γ / 8π²)`, taken factor by factor so that single precision
/// does not underflow.
fn dipole_root<T: Real>(rate: T, wavelength: T, hbar: T) -> T {
    let eight_pi2 = T::lit(8.0) * T::PI() * T::PI();
    hbar.sqrt() * (T::lit(3.0) * wavelength.powi(3) * rate / eight_pi2).sqrt()
}

/// Electric dipole moment estimated from the decay rate of the transition.
pub fn electric_dipole_moment<T: Real>(
    gamma21: T,
    wavelength: T,
    constants: &PhysicalConstants<T>,
    mode: DipoleMode,
) -> T {
    let root = dipole_root(gamma21, wavelength, constants.hbar);
    match mode {
        DipoleMode::Si => constants.eps0.sqrt() * root,
        DipoleMode::Literal => root,
    }
}

/// Magnetic dipole moment estimated from the decay rate of the transition.
pub fn magnetic_dipole_moment<T: Real>(
    gamma43: T,
    wavelength: T,
    constants: &PhysicalConstants<T>,
    mode: DipoleMode,
) -> T {
    let root = dipole_root(gamma43, wavelength, constants.hbar);
    match mode {
        DipoleMode::Si => root / constants.mu0.sqrt(),
        DipoleMode::Literal => root,
    }
}

/// Configuration as users write it: rates and detunings in units of
/// `gamma_unit`, density in m⁻³, wavelength in m, overrides in SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledConfig {
    pub gamma_unit: f64,
    #[serde(rename = "Gamma21")]
    pub gamma21: f64,
    #[serde(rename = "Gamma31")]
    pub gamma31: f64,
    #[serde(rename = "Gamma32")]
    pub gamma32: f64,
    #[serde(rename = "Gamma41")]
    pub gamma41: f64,
    #[serde(rename = "Gamma42")]
    pub gamma42: f64,
    #[serde(rename = "Gamma43")]
    pub gamma43: f64,
    #[serde(rename = "pump_Gamma")]
    pub pump_gamma: f64,
    #[serde(rename = "Omega_c")]
    pub omega_c: f64,
    #[serde(rename = "Delta_c")]
    pub delta_c: f64,
    #[serde(rename = "Delta_p", default)]
    pub delta_p: f64,
    pub delta: f64,
    #[serde(rename = "N")]
    pub density: f64,
    #[serde(rename = "lambda")]
    pub wavelength: f64,
    #[serde(default)]
    pub dipole_mode: DipoleMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d12_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu34_override: Option<f64>,
}

impl ScaledConfig {
    /// Er³⁺-like level scheme: Γ21 = 1, Γ31 = 0.3, Γ32 = 0.2, Γ41 = 0.1,
    /// Γ42 = 0.9, Γ43 = Γ21/137² (all in γ = 1e8 s⁻¹), Δc = −5e-3γ,
    /// δ = −1e-3γ, λ = 600 nm, N = 5e22 m⁻³, drive group (5γ, 20γ).
    pub fn reference_defaults() -> Self {
        Self {
            gamma_unit: 1e8,
            gamma21: 1.0,
            gamma31: 0.3,
            gamma32: 0.2,
            gamma41: 0.1,
            gamma42: 0.9,
            gamma43: 1.0 / (137.0 * 137.0),
            pump_gamma: 5.0,
            omega_c: 20.0,
            delta_c: -5e-3,
            delta_p: 0.0,
            delta: -1e-3,
            density: 5e22,
            wavelength: 600e-9,
            dipole_mode: DipoleMode::Si,
            d12_override: None,
            mu34_override: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma_unit", self.gamma_unit),
            ("Gamma21", self.gamma21),
            ("Gamma31", self.gamma31),
            ("Gamma32", self.gamma32),
            ("Gamma41", self.gamma41),
            ("Gamma42", self.gamma42),
            ("Gamma43", self.gamma43),
            ("pump_Gamma", self.pump_gamma),
            ("Omega_c", self.omega_c),
            ("Delta_c", self.delta_c),
            ("Delta_p", self.delta_p),
            ("delta", self.delta),
            ("N", self.density),
            ("lambda", self.wavelength),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        if self.gamma_unit <= 0.0 {
            return Err(Error::config("gamma_unit", "must be positive"));
        }
        for (name, v) in &finite[1..8] {
            if *v < 0.0 {
                return Err(Error::config(*name, "rates must be non-negative"));
            }
        }
        // N = 0 is the vacuum limit and stays legal.
        if self.density < 0.0 {
            return Err(Error::config("N", "density must be non-negative"));
        }
        if self.wavelength <= 0.0 {
            return Err(Error::config("lambda", "wavelength must be positive"));
        }
        for (name, v) in [
            ("d12_override", self.d12_override),
            ("mu34_override", self.mu34_override),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::config(name, "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }

    /// Replaces the (pump, coupling) drive group, both γ-scaled.
    pub fn with_group(&self, pump_gamma: f64, omega_c: f64) -> Self {
        Self {
            pump_gamma,
            omega_c,
            ..self.clone()
        }
    }

    pub fn with_delta_p(&self, delta_p: f64) -> Self {
        Self {
            delta_p,
            ..self.clone()
        }
    }

    /// Validates and converts to SI. Dipole moments come from the decay
    /// rates unless overridden.
    pub fn to_internal<T: Real>(&self) -> Result<AtomicParams<T>> {
        self.validate()?;
        let u = T::lit(self.gamma_unit);
        let s = |x: f64| T::lit(x) * u;
        let constants = PhysicalConstants::<T>::si();
        let decays = DecayRates {
            gamma_unit: u,
            r21: s(self.gamma21),
            r31: s(self.gamma31),
            r32: s(self.gamma32),
            r41: s(self.gamma41),
            r42: s(self.gamma42),
            r43: s(self.gamma43),
            pump: s(self.pump_gamma),
        };
        let wavelength = T::lit(self.wavelength);
        let d12 = match self.d12_override {
            Some(v) => T::lit(v),
            None => electric_dipole_moment(decays.r21, wavelength, &constants, self.dipole_mode),
        };
        let mu34 = match self.mu34_override {
            Some(v) => T::lit(v),
            None => magnetic_dipole_moment(decays.r43, wavelength, &constants, self.dipole_mode),
        };
        Ok(AtomicParams {
            constants,
            dephasings: dephasing_rates(&decays),
            decays,
            drive: DriveConfig {
                omega_c: s(self.omega_c),
                delta_p: s(self.delta_p),
                delta_c: s(self.delta_c),
                delta: s(self.delta),
                probe_e: T::zero(),
                probe_b: T::zero(),
            },
            medium: MediumConfig {
                density: T::lit(self.density),
                wavelength,
                d12,
                mu34,
            },
            dipole_mode: self.dipole_mode,
            d12_overridden: self.d12_override.is_some(),
            mu34_overridden: self.mu34_override.is_some(),
        })
    }
}

impl Default for ScaledConfig {
    fn default() -> Self {
        Self::reference_defaults()
    }
}

/// Fully resolved SI parameter set for one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomicParams<T> {
    pub constants: PhysicalConstants<T>,
    pub decays: DecayRates<T>,
    pub dephasings: Dephasings<T>,
    pub drive: DriveConfig<T>,
    pub medium: MediumConfig<T>,
    pub dipole_mode: DipoleMode,
    pub d12_overridden: bool,
    pub mu34_overridden: bool,
}

impl<T: Real> AtomicParams<T> {
    pub fn gamma_unit(&self) -> T {
        self.decays.gamma_unit
    }

    /// Sets Δp in s⁻¹.
    pub fn with_delta_p(mut self, delta_p: T) -> Self {
        self.drive.delta_p = delta_p;
        self
    }

    /// Sets pump rate and coupling Rabi frequency in s⁻¹.
    pub fn with_drive(mut self, pump: T, omega_c: T) -> Self {
        self.decays.pump = pump;
        self.drive.omega_c = omega_c;
        self
    }

    /// Inverse of [`ScaledConfig::to_internal`].
    pub fn to_scaled(&self) -> ScaledConfig {
        let u = self.gamma_unit().as_f64();
        let g = |x: T| x.as_f64() / u;
        ScaledConfig {
            gamma_unit: u,
            gamma21: g(self.decays.r21),
            gamma31: g(self.decays.r31),
            gamma32: g(self.decays.r32),
            gamma41: g(self.decays.r41),
            gamma42: g(self.decays.r42),
            gamma43: g(self.decays.r43),
            pump_gamma: g(self.decays.pump),
            omega_c: g(self.drive.omega_c),
            delta_c: g(self.drive.delta_c),
            delta_p: g(self.drive.delta_p),
            delta: g(self.drive.delta),
            density: self.medium.density.as_f64(),
            wavelength: self.medium.wavelength.as_f64(),
            dipole_mode: self.dipole_mode,
            d12_override: self.d12_overridden.then(|| self.medium.d12.as_f64()),
            mu34_override: self.mu34_overridden.then(|| self.medium.mu34.as_f64()),
        }
    }
}
