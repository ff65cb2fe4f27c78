//! Separation-of-variables far field of a penetrable disk centred at the
//! origin with A = Id and constant rho0 inside.

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::farfield::{farfield_gamma, FarFieldPattern};
use crate::waves::bessel::{bessel_j_table, hankel1_table, BesselError};
use crate::waves::IncidentWave;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MieError {
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("matching system singular for mode {0}")]
    Resonance(i64),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Coefficient alpha_m in u^inc = sum_m alpha_m J_m(kappa r) e^{i m theta}.
pub fn incident_mode(w: &IncidentWave, m: i64) -> C {
    match w {
        IncidentWave::Plane { direction, .. } => {
            let td = direction[1].atan2(direction[0]);
            C::i().powi((m.rem_euclid(4)) as i32) * C::from_polar(1.0, -(m as f64) * td)
        }
        IncidentWave::FourierBessel { order, .. } => {
            if *order as i64 == m {
                C::new(1.0, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        }
        IncidentWave::Superposition { terms, .. } => terms.iter().map(|(c, t)| c * incident_mode(t, m)).sum(),
    }
}

fn j_signed(table: &[f64], dtable: &[f64], m: i64) -> (f64, f64) {
    let k = m.unsigned_abs() as usize;
    let s = if m < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
    (s * table[k], s * dtable[k])
}

fn j_with_derivative(mmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>), BesselError> {
    let j = bessel_j_table(mmax + 1, x)?;
    let mut d = vec![0.0; mmax + 1];
    d[0] = -j[1];
    for m in 1..=mmax {
        d[m] = 0.5 * (j[m - 1] - j[m + 1]);
    }
    Ok((j[..=mmax].to_vec(), d))
}

/// Scattered-mode coefficients s_m for |m| <= n.
fn scattered_modes(kappa: f64, rho0: f64, a: f64, w: &IncidentWave, n: usize) -> Result<Vec<C>, MieError> {
    let k1 = kappa * rho0.sqrt();
    let (j, dj) = j_with_derivative(n, kappa * a)?;
    let (j1, dj1) = j_with_derivative(n, k1 * a)?;
    let (h, dh) = hankel1_table(n, kappa * a)?;
    let ni = n as i64;
    let mut out = Vec::with_capacity(2 * n + 1);
    for m in -ni..=ni {
        let alpha = incident_mode(w, m);
        let (jm, djm) = j_signed(&j, &dj, m);
        let (j1m, dj1m) = j_signed(&j1, &dj1, m);
        let k = m.unsigned_abs() as usize;
        let s = if m < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let (hm, dhm) = (h[k] * s, dh[k] * s);
        let den = kappa * dhm * j1m - k1 * dj1m * hm;
        if den.norm() < 1e-300 || (j1m == 0.0 && dj1m == 0.0) {
            return Err(MieError::Resonance(m));
        }
        out.push(alpha * (k1 * dj1m * jm - kappa * djm * j1m) / den);
    }
    Ok(out)
}

/// Far field of the disk of radius a with rho = rho0 inside: the mode
/// series is truncated once the coefficients fall below 1e-14 of the peak.
pub fn mie_disk_farfield(kappa: f64, rho0: f64, a: f64, w: &IncidentWave) -> Result<FarFieldPattern, MieError> {
    for (name, value) in [("kappa", kappa), ("rho0", rho0), ("radius", a)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(MieError::Parameter { name, value });
        }
    }
    let mut n = (kappa * rho0.sqrt().max(1.0) * a).ceil() as usize + 10;
    let coeffs = loop {
        let s = scattered_modes(kappa, rho0, a, w, n)?;
        let peak = s.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let tail = s[0].norm().max(s[2 * n].norm());
        if tail <= 1e-14 * peak.max(1e-300) || peak == 0.0 || n > 400 {
            break s;
        }
        n += 10;
    };
    let ni = n as i64;
    let coeffs = (-ni..=ni).zip(coeffs).map(|(m, s)| s * farfield_gamma(kappa, m)).collect();
    Ok(FarFieldPattern { kappa, r_eval: a, n, coeffs })
}

/// Same series with an explicit cutoff (for truncation-stability checks).
pub fn mie_disk_farfield_with_cutoff(
    kappa: f64,
    rho0: f64,
    a: f64,
    w: &IncidentWave,
    n: usize,
) -> Result<FarFieldPattern, MieError> {
    let s = scattered_modes(kappa, rho0, a, w, n)?;
    let ni = n as i64;
    let coeffs = (-ni..=ni).zip(s).map(|(m, s)| s * farfield_gamma(kappa, m)).collect();
    Ok(FarFieldPattern { kappa, r_eval: a, n, coeffs })
}
