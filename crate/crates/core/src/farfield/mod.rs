//! Far-field patterns by outgoing mode matching on a circle, and the
//! scattering norm.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::solver::WaveField;
use crate::waves::bessel::{hankel1_table, BesselError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FarFieldError {
    #[error("evaluation radius {r} not strictly between the scatterer extent {extent} and the field radius {outer}")]
    Radius { r: f64, extent: f64, outer: f64 },
    #[error("{samples} angular samples below Nyquist for mode cutoff {n}")]
    Nyquist { samples: usize, n: usize },
    #[error("field undefined at ({0:.6}, {1:.6})")]
    Undefined(f64, f64),
    #[error("wavenumber must be positive, got {0}")]
    Wavenumber(f64),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub kappa: f64,
    pub r_eval: f64,
    pub n: usize,
    /// c_m for m = -N..=N, indexed by m + N
    pub coeffs: Vec<C>,
}

/// Far-field normalization gamma_m = sqrt(2 / (pi kappa)) e^{-i(m pi/2 + pi/4)}.
pub fn farfield_gamma(kappa: f64, m: i64) -> C {
    C::from_polar((2.0 / (PI * kappa)).sqrt(), -(m as f64 * PI / 2.0 + PI / 4.0))
}

impl FarFieldPattern {
    pub fn coeff(&self, m: i64) -> C {
        if m.unsigned_abs() as usize > self.n {
            return C::new(0.0, 0.0);
        }
        self.coeffs[(m + self.n as i64) as usize]
    }

    /// u^inf(theta) = sum_m c_m e^{i m theta}
    pub fn eval(&self, theta: f64) -> C {
        let n = self.n as i64;
        (-n..=n).map(|m| self.coeff(m) * C::from_polar(1.0, m as f64 * theta)).sum()
    }

    /// Pattern with every coefficient multiplied by e^{-i m phi}, i.e.
    /// rotated by phi.
    pub fn rotated(&self, phi: f64) -> Self {
        let n = self.n as i64;
        let coeffs = (-n..=n).map(|m| self.coeff(m) * C::from_polar(1.0, -(m as f64) * phi)).collect();
        FarFieldPattern { coeffs, ..self.clone() }
    }

    /// Rows `m, re, im` and a final `L2norm, value` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,re,im\n");
        let n = self.n as i64;
        for m in -n..=n {
            let c = self.coeff(m);
            writeln!(s, "{m},{:.16e},{:.16e}", c.re, c.im).unwrap();
        }
        writeln!(s, "L2norm,{:.16e}", scattering_norm(self)).unwrap();
        s
    }
}

/// Mode cutoff used for a field sampled at radius r.
pub fn default_farfield_cutoff(kappa: f64, r: f64) -> usize {
    (kappa * r).ceil() as usize + 15
}

pub fn farfield_from_boundary(u: &WaveField, kappa: f64, r_eval: f64) -> Result<FarFieldPattern, FarFieldError> {
    let n = default_farfield_cutoff(kappa, r_eval);
    farfield_with_sampling(u, kappa, r_eval, n, 4 * n + 1)
}

/// Trapezoid rule on `samples` equispaced angles, then
/// c_m = u_m / H_m(kappa r) * gamma_m for |m| <= n.
pub fn farfield_with_sampling(
    u: &WaveField,
    kappa: f64,
    r_eval: f64,
    n: usize,
    samples: usize,
) -> Result<FarFieldPattern, FarFieldError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(FarFieldError::Wavenumber(kappa));
    }
    let extent = u.scatterer_extent();
    let outer = u.domain_radius();
    if !(r_eval > extent && r_eval < outer) {
        return Err(FarFieldError::Radius { r: r_eval, extent, outer });
    }
    if samples < 2 * n + 1 {
        return Err(FarFieldError::Nyquist { samples, n });
    }
    let mut vals = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let x = [r_eval * t.cos(), r_eval * t.sin()];
        vals.push(u.value(x).ok_or(FarFieldError::Undefined(x[0], x[1]))?);
    }
    let (h, _) = hankel1_table(n, kappa * r_eval)?;
    let ni = n as i64;
    let mut coeffs = Vec::with_capacity(2 * n + 1);
    for m in -ni..=ni {
        let mut s = C::new(0.0, 0.0);
        for (k, v) in vals.iter().enumerate() {
            let t = 2.0 * PI * k as f64 / samples as f64;
            s += v * C::from_polar(1.0, -(m as f64) * t);
        }
        s /= samples as f64;
        let hm = if m < 0 && m % 2 != 0 { -h[m.unsigned_abs() as usize] } else { h[m.unsigned_abs() as usize] };
        coeffs.push(s / hm * farfield_gamma(kappa, m));
    }
    Ok(FarFieldPattern { kappa, r_eval, n, coeffs })
}

/// L2(S^1) norm sqrt(2 pi sum |c_m|^2).
pub fn scattering_norm(p: &FarFieldPattern) -> f64 {
    (2.0 * PI * p.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Relative L2 distance |p - q| / |q| between two patterns.
pub fn relative_l2_error(p: &FarFieldPattern, q: &FarFieldPattern) -> f64 {
    let n = p.n.max(q.n) as i64;
    let num: f64 = (-n..=n).map(|m| (p.coeff(m) - q.coeff(m)).norm_sqr()).sum();
    let den: f64 = (-n..=n).map(|m| q.coeff(m).norm_sqr()).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::FieldRole;
    use crate::waves::hankel1;

    fn outgoing(kappa: f64, m: i32) -> WaveField {
        WaveField::closed_form(FieldRole::ClosedForm, 10.0, move |x| {
            let r = x[0].hypot(x[1]);
            let t = x[1].atan2(x[0]);
            let v = hankel1(m, kappa * r).unwrap() * C::from_polar(1.0, m as f64 * t);
            (v, [C::new(0.0, 0.0); 2])
        })
    }

    #[test]
    fn zero_field_has_zero_pattern() {
        let u = WaveField::closed_form(FieldRole::ClosedForm, 3.0, |_| (C::new(0.0, 0.0), [C::new(0.0, 0.0); 2]));
        let p = farfield_from_boundary(&u, 1.0, 1.5).unwrap();
        assert!(p.coeffs.iter().all(|c| *c == C::new(0.0, 0.0)));
        assert_eq!(scattering_norm(&p), 0.0);
    }

    #[test]
    fn single_outgoing_mode() {
        let u = outgoing(2.0, 3);
        let p = farfield_from_boundary(&u, 2.0, 1.3).unwrap();
        let n = p.n as i64;
        for m in -n..=n {
            let want = if m == 3 { farfield_gamma(2.0, 3) } else { C::new(0.0, 0.0) };
            assert!((p.coeff(m) - want).norm() < 1e-10, "m = {m}");
        }
        let g = farfield_gamma(2.0, 3).norm();
        assert!((scattering_norm(&p) - (2.0 * PI).sqrt() * g).abs() < 1e-10);
        // negative order uses H_{-m} = (-1)^m H_m
        let p = farfield_from_boundary(&outgoing(2.0, -3), 2.0, 1.3).unwrap();
        assert!((p.coeff(-3) - farfield_gamma(2.0, -3)).norm() < 1e-10);
    }

    #[test]
    fn pattern_does_not_depend_on_radius() {
        let u = WaveField::closed_form(FieldRole::ClosedForm, 10.0, |x| {
            let r = x[0].hypot(x[1]);
            let t = x[1].atan2(x[0]);
            let mut v = C::new(0.0, 0.0);
            for (m, c) in [(0, C::new(1.0, 0.5)), (2, C::new(-0.3, 0.2)), (-1, C::new(0.0, 0.7))] {
                v += c * hankel1(m, 1.5 * r).unwrap() * C::from_polar(1.0, m as f64 * t);
            }
            (v, [C::new(0.0, 0.0); 2])
        });
        let p = farfield_with_sampling(&u, 1.5, 1.0, 20, 81).unwrap();
        let q = farfield_with_sampling(&u, 1.5, 2.5, 20, 81).unwrap();
        for m in -20..=20 {
            assert!((p.coeff(m) - q.coeff(m)).norm() < 1e-8);
        }
    }

    #[test]
    fn parseval_and_rotation() {
        let u = outgoing(1.0, 1);
        let p = farfield_from_boundary(&u, 1.0, 2.0).unwrap();
        let mix = FarFieldPattern {
            coeffs: p.coeffs.iter().enumerate().map(|(k, c)| c + C::new(0.01 * k as f64, -0.02)).collect(),
            ..p.clone()
        };
        let nq = 400;
        let direct: f64 = (0..nq).map(|k| mix.eval(2.0 * PI * k as f64 / nq as f64).norm_sqr()).sum::<f64>()
            * 2.0
            * PI
            / nq as f64;
        assert!((direct.sqrt() - scattering_norm(&mix)).abs() < 1e-10);
        assert!((scattering_norm(&mix.rotated(0.7)) - scattering_norm(&mix)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let u = outgoing(1.0, 0);
        assert!(matches!(farfield_from_boundary(&u, 1.0, 11.0), Err(FarFieldError::Radius { .. })));
        assert!(matches!(farfield_with_sampling(&u, 1.0, 2.0, 10, 20), Err(FarFieldError::Nyquist { .. })));
        let csv = farfield_from_boundary(&u, 1.0, 2.0).unwrap().to_csv();
        assert!(csv.lines().last().unwrap().starts_with("L2norm,"));
    }
}
