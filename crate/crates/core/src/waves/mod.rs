//! Special functions and incident waves.

pub mod bessel;
pub mod harmonic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bessel::{bessel_j, bessel_y, hankel1, BesselError};
pub use harmonic::HarmonicPolynomial2D;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("wavenumber must be positive, got {0}")]
    Wavenumber(f64),
    #[error("direction must be a unit vector, |d| = {0}")]
    Direction(f64),
    #[error("superposition has no terms")]
    EmptySuperposition,
    #[error("all Taylor parts below degree {0} vanish")]
    VanishingToHighOrder(u32),
    #[error("leading Taylor part of degree {0} is not harmonic (mixed coefficient {1:e})")]
    NotHarmonic(u32, f64),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: C,
    pub grad: [C; 2],
    pub hess: [[C; 2]; 2],
}

impl Jet {
    fn zero() -> Self {
        let z = C::new(0.0, 0.0);
        Jet {
            value: z,
            grad: [z; 2],
            hess: [[z; 2]; 2],
        }
    }

    fn axpy(&mut self, s: C, o: &Jet) {
        self.value += s * o.value;
        for i in 0..2 {
            self.grad[i] += s * o.grad[i];
            for j in 0..2 {
                self.hess[i][j] += s * o.hess[i][j];
            }
        }
    }
}

/// Entire solution of the homogeneous Helmholtz equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IncidentWave {
    Plane { kappa: f64, direction: [f64; 2] },
    /// J_m(kappa r) e^{i m theta}
    FourierBessel { kappa: f64, order: i32 },
    Superposition { kappa: f64, terms: Vec<(C, IncidentWave)> },
}

pub fn plane_wave(kappa: f64, d: [f64; 2]) -> Result<IncidentWave, WaveError> {
    check_kappa(kappa)?;
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(WaveError::Direction(n));
    }
    Ok(IncidentWave::Plane { kappa, direction: d })
}

pub fn fourier_bessel_wave(kappa: f64, m: i32) -> Result<IncidentWave, WaveError> {
    check_kappa(kappa)?;
    Ok(IncidentWave::FourierBessel { kappa, order: m })
}

pub fn superposition(kappa: f64, terms: Vec<(C, IncidentWave)>) -> Result<IncidentWave, WaveError> {
    check_kappa(kappa)?;
    if terms.is_empty() {
        return Err(WaveError::EmptySuperposition);
    }
    for (_, w) in &terms {
        if (w.kappa() - kappa).abs() > 0.0 {
            return Err(WaveError::Wavenumber(w.kappa()));
        }
    }
    Ok(IncidentWave::Superposition { kappa, terms })
}

fn check_kappa(k: f64) -> Result<(), WaveError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(WaveError::Wavenumber(k))
    }
}

/// W_k(x) = J_k(kappa r) e^{i k theta} for k in [lo, hi].
fn fb_modes(kappa: f64, x: [f64; 2], lo: i32, hi: i32) -> Vec<C> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let th = x[1].atan2(x[0]);
    let kmax = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let j = bessel::bessel_j_table(kmax, kappa * r).expect("finite nonnegative argument");
    (lo..=hi)
        .map(|k| {
            let a = k.unsigned_abs() as usize;
            let s = if k < 0 && a % 2 == 1 { -1.0 } else { 1.0 };
            C::from_polar(s * j[a], k as f64 * th)
        })
        .collect()
}

impl IncidentWave {
    pub fn kappa(&self) -> f64 {
        match self {
            IncidentWave::Plane { kappa, .. }
            | IncidentWave::FourierBessel { kappa, .. }
            | IncidentWave::Superposition { kappa, .. } => *kappa,
        }
    }

    pub fn value(&self, x: [f64; 2]) -> C {
        match self {
            IncidentWave::Plane { kappa, direction } => {
                C::from_polar(1.0, kappa * (x[0] * direction[0] + x[1] * direction[1]))
            }
            IncidentWave::FourierBessel { kappa, order } => fb_modes(*kappa, x, *order, *order)[0],
            IncidentWave::Superposition { terms, .. } => {
                terms.iter().map(|(c, w)| c * w.value(x)).sum()
            }
        }
    }

    pub fn jet(&self, x: [f64; 2]) -> Jet {
        match self {
            IncidentWave::Plane { kappa, direction } => {
                let v = C::from_polar(1.0, kappa * (x[0] * direction[0] + x[1] * direction[1]));
                let ik = C::new(0.0, *kappa);
                let g = [ik * direction[0] * v, ik * direction[1] * v];
                let k2 = -kappa * kappa;
                let mut hess = [[C::new(0.0, 0.0); 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        hess[i][j] = k2 * direction[i] * direction[j] * v;
                    }
                }
                Jet {
                    value: v,
                    grad: g,
                    hess,
                }
            }
            IncidentWave::FourierBessel { kappa, order } => {
                let m = *order;
                let w = fb_modes(*kappa, x, m - 2, m + 2);
                // w[0..5] = W_{m-2} .. W_{m+2}
                let k = *kappa;
                let i = C::i();
                let dx = 0.5 * k * (w[1] - w[3]);
                let dy = -0.5 * k * (w[3] + w[1]) / i;
                let k2 = k * k;
                let dxx = 0.25 * k2 * (w[4] - 2.0 * w[2] + w[0]);
                let dyy = -0.25 * k2 * (w[4] + 2.0 * w[2] + w[0]);
                let dxy = 0.25 * k2 * (w[4] - w[0]) / i;
                Jet {
                    value: w[2],
                    grad: [dx, dy],
                    hess: [[dxx, dxy], [dxy, dyy]],
                }
            }
            IncidentWave::Superposition { terms, .. } => {
                let mut acc = Jet::zero();
                for (c, w) in terms {
                    acc.axpy(*c, &w.jet(x));
                }
                acc
            }
        }
    }

    pub fn grad(&self, x: [f64; 2]) -> [C; 2] {
        match self {
            IncidentWave::Plane { kappa, direction } => {
                let v = self.value(x) * C::new(0.0, *kappa);
                [v * direction[0], v * direction[1]]
            }
            _ => self.jet(x).grad,
        }
    }

    /// Degree-d Taylor part at x0 as coefficients c_p of z^p conj(z)^{d-p},
    /// z = (x - x0)_1 + i (x - x0)_2, for d = 0..=dmax.
    pub fn taylor_parts(&self, x0: [f64; 2], dmax: u32) -> Vec<Vec<C>> {
        let mut out: Vec<Vec<C>> = (0..=dmax).map(|d| vec![C::new(0.0, 0.0); d as usize + 1]).collect();
        self.add_taylor(x0, dmax, C::new(1.0, 0.0), &mut out);
        out
    }

    fn add_taylor(&self, x0: [f64; 2], dmax: u32, s: C, out: &mut [Vec<C>]) {
        match self {
            IncidentWave::Plane { kappa, direction } => {
                // e^{i k x0.d} sum_d (i k y.d)^d / d!, y.d = (z conj(e) + conj(z) e)/2
                let e = C::new(direction[0], direction[1]);
                let base = s * self.value(x0);
                let mut pref = base; // (i k / 2)^d / d! * base
                for d in 0..=dmax {
                    if d > 0 {
                        pref *= C::new(0.0, 0.5 * kappa) / d as f64;
                    }
                    let mut binom = 1.0;
                    for p in 0..=d {
                        if p > 0 {
                            binom *= (d - p + 1) as f64 / p as f64;
                        }
                        out[d as usize][p as usize] +=
                            pref * binom * e.conj().powu(p) * e.powu(d - p);
                    }
                }
            }
            IncidentWave::FourierBessel { kappa, order } => {
                // Graf: W_m(x0 + y) = sum_k W_{m-k}(x0) W_k(y), |k| <= dmax
                let m = *order;
                let dm = dmax as i32;
                let outer = fb_modes(*kappa, x0, m - dm, m + dm);
                let half = 0.5 * kappa;
                for k in -dm..=dm {
                    let wx0 = s * outer[(m - k - (m - dm)) as usize];
                    if wx0 == C::new(0.0, 0.0) {
                        continue;
                    }
                    let a = k.unsigned_abs();
                    let sign = if k < 0 && a % 2 == 1 { -1.0 } else { 1.0 };
                    // J_a(kr) e^{i a phi} = sum_j (-1)^j (k/2)^{a+2j}/(j!(a+j)!) z^{a+j} conj(z)^j
                    let mut j = 0u32;
                    let mut coef = half.powi(a as i32) / (1..=a).map(|t| t as f64).product::<f64>();
                    while a + 2 * j <= dmax {
                        let d = (a + 2 * j) as usize;
                        let p = if k >= 0 { a + j } else { j } as usize;
                        out[d][p] += wx0 * sign * coef;
                        j += 1;
                        coef *= -half * half / (j as f64 * (a + j) as f64);
                    }
                }
            }
            IncidentWave::Superposition { terms, .. } => {
                for (c, w) in terms {
                    w.add_taylor(x0, dmax, s * c, out);
                }
            }
        }
    }

    fn scale(&self) -> f64 {
        match self {
            IncidentWave::Superposition { terms, .. } => {
                terms.iter().map(|(c, w)| c.norm() * w.scale()).sum()
            }
            _ => 1.0,
        }
    }
}

/// Maximum Taylor degree searched by [`leading_harmonic_part`].
pub const MAX_LEADING_DEGREE: u32 = 12;

/// Lowest-degree nonvanishing homogeneous Taylor part of `w` at `x0`
/// (optionally after subtracting w(x0)), as a harmonic polynomial in
/// x - x0. For degree 0 the constant c is split as a = b = c/2.
pub fn leading_harmonic_part(
    w: &IncidentWave,
    x0: [f64; 2],
    subtract_constant: bool,
) -> Result<HarmonicPolynomial2D, WaveError> {
    let parts = w.taylor_parts(x0, MAX_LEADING_DEGREE);
    let kappa = w.kappa();
    let scale = w.scale();
    let start = if subtract_constant { 1 } else { 0 };
    let mut fact = 1.0;
    for d in 0..=MAX_LEADING_DEGREE {
        if d > 0 {
            fact *= d as f64;
        }
        if d < start {
            continue;
        }
        let c = &parts[d as usize];
        let tol = 1e-12 * scale * (0.5 * kappa).powi(d as i32) * 2f64.powi(d as i32) / fact;
        let big = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if big <= tol {
            continue;
        }
        if d == 0 {
            return Ok(HarmonicPolynomial2D::new(0, 0.5 * c[0], 0.5 * c[0]));
        }
        let mixed = c[1..d as usize].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if mixed > 1e-8 * big {
            return Err(WaveError::NotHarmonic(d, mixed));
        }
        return Ok(HarmonicPolynomial2D::new(d, c[d as usize], c[0]));
    }
    Err(WaveError::VanishingToHighOrder(MAX_LEADING_DEGREE))
}

/// Finite-difference (Delta + kappa^2) u at x with step `h`.
pub fn helmholtz_residual_fd(w: &IncidentWave, x: [f64; 2], h: f64) -> f64 {
    let u = |p: [f64; 2]| w.value(p);
    let lap = (u([x[0] + h, x[1]]) + u([x[0] - h, x[1]]) + u([x[0], x[1] + h]) + u([x[0], x[1] - h])
        - 4.0 * u(x))
        / (h * h);
    let k = w.kappa();
    (lap + k * k * u(x)).norm()
}
