//! Physical constants, the internal unit system, and conversions to
//! reporting units.
//!
//! Internally everything runs in natural units (ħ = c = 1) with energies
//! in eV and lengths in nm, connected through ħc. Frequencies are reported
//! as angular frequencies in s⁻¹. Constants are CODATA 2018, stored to
//! full printed precision.

/// Fine-structure constant α.
pub const FINE_STRUCTURE_ALPHA: f64 = 7.297_352_569_3e-3;

/// Electron mass in eV.
pub const ELECTRON_MASS_EV: f64 = 510_998.950_00;

/// Speed of light in nm/ns (exact).
pub const SPEED_OF_LIGHT_NM_PER_NS: f64 = 2.997_924_58e8;

/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Reduced Planck constant in eV·ns; a phase in rad is E(eV)·t(ns)/ħ(eV·ns).
pub const HBAR_EV_NS: f64 = HBAR_EV_S * 1.0e9;

/// ħc in eV·nm, as the exact product of the stored ħ and c so that
/// ħc/ħ = c holds to the last bit (it matches CODATA's printed
/// 197.3269804 to that value's own precision).
pub const HBAR_C_EV_NM: f64 = HBAR_EV_NS * SPEED_OF_LIGHT_NM_PER_NS;

/// Bundle of the constants above, for call sites that thread them around.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub fine_structure_alpha: f64,
    /// eV·nm
    pub hbar_c: f64,
    /// eV
    pub electron_mass: f64,
    /// nm/ns
    pub speed_of_light: f64,
    /// eV·s
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const fn codata2018() -> Self {
        Self {
            fine_structure_alpha: FINE_STRUCTURE_ALPHA,
            hbar_c: HBAR_C_EV_NM,
            electron_mass: ELECTRON_MASS_EV,
            speed_of_light: SPEED_OF_LIGHT_NM_PER_NS,
            hbar: HBAR_EV_S,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// Tags documenting the unit conventions; the values below are the only
/// ones the crate implements.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitPolicy {
    pub internal_system: InternalSystem,
    pub reporting_frequency_convention: FrequencyConvention,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum InternalSystem {
    /// ħ = c = 1, energies in eV, lengths in nm via ħc.
    #[default]
    NaturalEvNm,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum FrequencyConvention {
    /// Angular frequency in s⁻¹.
    #[default]
    AngularPerSecond,
}

/// E → E/ħ, angular frequency in s⁻¹.
pub fn energy_to_angular_frequency(e_ev: f64) -> f64 {
    e_ev / HBAR_EV_S
}

/// ω → ħω in eV.
pub fn angular_frequency_to_energy(omega_per_s: f64) -> f64 {
    omega_per_s * HBAR_EV_S
}

/// L → L/ħc in eV⁻¹.
pub fn length_to_inverse_energy(l_nm: f64) -> f64 {
    l_nm / HBAR_C_EV_NM
}

/// x → x·ħc in nm.
pub fn inverse_energy_to_length(x_per_ev: f64) -> f64 {
    x_per_ev * HBAR_C_EV_NM
}

/// e²/4π = α·ħc in eV·nm, the Coulomb coupling between unit charges.
pub fn coulomb_coupling() -> f64 {
    FINE_STRUCTURE_ALPHA * HBAR_C_EV_NM
}

/// Elementary charge in natural Heaviside-Lorentz units, e = √(4πα).
pub fn elementary_charge_natural() -> f64 {
    (4.0 * std::f64::consts::PI * FINE_STRUCTURE_ALPHA).sqrt()
}
