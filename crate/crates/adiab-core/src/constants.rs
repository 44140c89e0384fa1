//! Unit conventions and conversion factors.
//!
//! All internal computation uses Hartree atomic units with `ħ = 1`:
//! energies in Hartree, lengths in Bohr, times in atomic time units,
//! masses and transition dipoles in atomic units. Configuration files for
//! the aggregate model speak the lab dialect (cm⁻¹, Å, ps, K) and are
//! converted on load with the factors below. The abstract three-level
//! model is dimensionless: energies are pure numbers and time carries
//! inverse-energy units, so no conversion applies there.
//!
//! Conversion table (CODATA 2018):
//!
//! | quantity    | lab unit | internal unit | factor (lab → internal)   |
//! |-------------|----------|---------------|---------------------------|
//! | energy      | cm⁻¹     | Hartree       | 4.556335252912004e-6      |
//! | length      | Å        | Bohr          | 1.8897261246257702        |
//! | time        | ps       | a.u. time     | 4.13413733365e4           |
//! | temperature | K        | Hartree (k_B) | 3.1668115634556e-6        |

/// One wavenumber (cm⁻¹) in Hartree.
pub const CM1_TO_HARTREE: f64 = 4.556_335_252_912_004e-6;

/// One ångström in Bohr radii.
pub const ANGSTROM_TO_BOHR: f64 = 1.889_726_124_625_770_2;

/// One picosecond in atomic time units.
pub const PS_TO_ATU: f64 = 4.134_137_333_65e4;

/// Boltzmann constant in Hartree per kelvin.
pub const BOLTZMANN_HARTREE_PER_K: f64 = 3.166_811_563_455_6e-6;

/// One ångström per picosecond in Bohr per atomic time unit.
pub const ANGSTROM_PER_PS_TO_AU: f64 = ANGSTROM_TO_BOHR / PS_TO_ATU;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_temperature_is_about_208_wavenumbers() {
        let kt = 300.0 * BOLTZMANN_HARTREE_PER_K;
        let cm = kt / CM1_TO_HARTREE;
        assert!((cm - 208.5).abs() < 0.5, "k_B * 300 K = {cm} cm^-1");
    }

    #[test]
    fn velocity_factor_consistent() {
        let v = 1.0 * ANGSTROM_PER_PS_TO_AU;
        assert!((v - 4.571_3e-5).abs() < 1e-8);
    }
}
