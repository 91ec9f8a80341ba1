//! Energy, wavelength and linewidth conversions.
//!
//! Energies and rates are in micro-electronvolts, wavelengths in nanometres.

use crate::error::{Error, Result};

/// Planck constant times speed of light, in ueV nm (1239.84193 eV nm).
pub const HC_UEV_NM: f64 = 1_239_841_930.0;

/// Photon energy in ueV for a vacuum wavelength in nm.
pub fn wavelength_to_energy(wavelength_nm: f64) -> f64 {
    HC_UEV_NM / wavelength_nm
}

/// Vacuum wavelength in nm for a photon energy in ueV.
pub fn energy_to_wavelength(energy_uev: f64) -> f64 {
    HC_UEV_NM / energy_uev
}

/// Cavity energy decay rate (linewidth) from the quality factor: kappa = E / Q.
pub fn q_to_kappa(q: f64, wavelength_nm: f64) -> Result<f64> {
    check_positive("Q", q)?;
    check_positive("wavelength", wavelength_nm)?;
    Ok(wavelength_to_energy(wavelength_nm) / q)
}

/// Same as [`q_to_kappa`] with the resonance given as an energy.
pub fn q_to_kappa_at_energy(q: f64, energy_uev: f64) -> Result<f64> {
    check_positive("Q", q)?;
    check_positive("energy", energy_uev)?;
    Ok(energy_uev / q)
}

/// Inverse of [`q_to_kappa`].
pub fn kappa_to_q(kappa_uev: f64, wavelength_nm: f64) -> Result<f64> {
    check_positive("kappa", kappa_uev)?;
    check_positive("wavelength", wavelength_nm)?;
    Ok(wavelength_to_energy(wavelength_nm) / kappa_uev)
}

/// Wavelength in nm of a normalized frequency `f` (units of c/a) for lattice constant `a_nm`.
pub fn normalized_to_wavelength(freq_c_over_a: f64, a_nm: f64) -> f64 {
    a_nm / freq_c_over_a
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_of_the_strong_coupling_device() {
        let kappa = q_to_kappa(33_000.0, 936.73).unwrap();
        assert!((kappa - 40.1).abs() / 40.1 < 0.01, "{kappa}");
    }

    #[test]
    fn kappa_of_the_high_q_device() {
        let kappa = q_to_kappa(80_200.0, 966.3).unwrap();
        assert!((kappa - 16.0).abs() < 0.05, "{kappa}");
    }

    #[test]
    fn unit_identity() {
        let kappa = q_to_kappa(1.0, 1239.84193).unwrap();
        assert!((kappa - 1.0e6).abs() < 1e-3, "{kappa}");
    }

    #[test]
    fn kappa_q_round_trip() {
        for &(q, lam) in &[(33_000.0, 936.73), (8.0e6, 970.0), (12.5, 400.0)] {
            let k = q_to_kappa(q, lam).unwrap();
            let back = kappa_to_q(k, lam).unwrap();
            assert!((back - q).abs() / q < 1e-12);
            // kappa * Q = hc / lambda
            assert!((k * q - HC_UEV_NM / lam).abs() / (HC_UEV_NM / lam) < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(q_to_kappa(0.0, 900.0).is_err());
        assert!(q_to_kappa(100.0, -1.0).is_err());
        assert!(kappa_to_q(f64::NAN, 900.0).is_err());
    }
}
