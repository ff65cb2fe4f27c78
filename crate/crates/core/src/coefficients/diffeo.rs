//! Boundary-fixing diffeomorphisms used to build invisible media.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::Mat2;

/// Bump profile b(t) = (1 - t^2)^3 on [0, 1], zero outside.
pub fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s * s
    }
}

/// b'(t).
pub fn bump_derivative(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        -6.0 * t * s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Diffeomorphism {
    Identity,
    /// x + amplitude b(|x - c|/r) (x - c)
    RadialBump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// rotation about c by the angle amplitude b(|x - c|/r); area preserving
    SwirlBump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// Inside the sector of opening `angle` at `corner` starting at
    /// direction `rotation`, moves points along circles around the corner by
    /// the angle amplitude (rho/R)^2 b(rho/R) sin(pi (theta - rotation)/angle).
    /// Fixes both rays, the arc rho = R and everything outside the sector.
    CornerSwirl { corner: [f64; 2], rotation: f64, angle: f64, radius: f64, amplitude: f64 },
}

fn rot(v: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

impl Diffeomorphism {
    pub fn forward(&self, x: [f64; 2]) -> [f64; 2] {
        if !self.moves(x) {
            return x;
        }
        match *self {
            Diffeomorphism::Identity => x,
            Diffeomorphism::RadialBump { center, radius, amplitude } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let f = 1.0 + amplitude * bump((d[0] * d[0] + d[1] * d[1]).sqrt() / radius);
                [center[0] + f * d[0], center[1] + f * d[1]]
            }
            Diffeomorphism::SwirlBump { center, radius, amplitude } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let a = amplitude * bump((d[0] * d[0] + d[1] * d[1]).sqrt() / radius);
                let v = rot(d, a);
                [center[0] + v[0], center[1] + v[1]]
            }
            Diffeomorphism::CornerSwirl { corner, .. } => {
                let d = [x[0] - corner[0], x[1] - corner[1]];
                match self.corner_angle_shift(d) {
                    Some(a) => {
                        let v = rot(d, a);
                        [corner[0] + v[0], corner[1] + v[1]]
                    }
                    None => x,
                }
            }
        }
    }

    /// False when x is outside the open support ball, where the map is the
    /// identity exactly.
    fn moves(&self, x: [f64; 2]) -> bool {
        match self.support() {
            Some((c, r)) => (x[0] - c[0]).hypot(x[1] - c[1]) < r,
            None => false,
        }
    }

    /// Angular displacement of the corner swirl at relative position d, or
    /// None outside its support.
    fn corner_angle_shift(&self, d: [f64; 2]) -> Option<f64> {
        if let Diffeomorphism::CornerSwirl { rotation, angle, radius, amplitude, .. } = *self {
            let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if rho == 0.0 || rho >= radius {
                return None;
            }
            let th = (d[1].atan2(d[0]) - rotation).rem_euclid(TAU);
            if th >= angle {
                return None;
            }
            let t = rho / radius;
            Some(amplitude * t * t * bump(t) * (std::f64::consts::PI * th / angle).sin())
        } else {
            None
        }
    }

    pub fn inverse(&self, y: [f64; 2]) -> [f64; 2] {
        if !self.moves(y) {
            return y;
        }
        match *self {
            Diffeomorphism::Identity => y,
            Diffeomorphism::RadialBump { center, radius, amplitude } => {
                let d = [y[0] - center[0], y[1] - center[1]];
                let ry = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if ry >= radius || ry == 0.0 {
                    return y;
                }
                // g(s) = s (1 + a b(s/r)) is increasing; solve g(s) = ry
                let g = |s: f64| s * (1.0 + amplitude * bump(s / radius));
                let gp = |s: f64| {
                    let t = s / radius;
                    1.0 + amplitude * (bump(t) + t * bump_derivative(t))
                };
                let (mut lo, mut hi) = (0.0, radius);
                let mut s = ry / (1.0 + amplitude * bump(ry / radius));
                for _ in 0..100 {
                    let f = g(s) - ry;
                    if f > 0.0 {
                        hi = s;
                    } else {
                        lo = s;
                    }
                    let mut next = s - f / gp(s);
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - s).abs() <= 1e-16 * radius {
                        s = next;
                        break;
                    }
                    s = next;
                }
                let f = s / ry;
                [center[0] + f * d[0], center[1] + f * d[1]]
            }
            Diffeomorphism::SwirlBump { center, radius, amplitude } => {
                let d = [y[0] - center[0], y[1] - center[1]];
                let a = amplitude * bump((d[0] * d[0] + d[1] * d[1]).sqrt() / radius);
                let v = rot(d, -a);
                [center[0] + v[0], center[1] + v[1]]
            }
            Diffeomorphism::CornerSwirl { corner, rotation, angle, radius, amplitude } => {
                let d = [y[0] - corner[0], y[1] - corner[1]];
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if rho == 0.0 || rho >= radius {
                    return y;
                }
                let ty = (d[1].atan2(d[0]) - rotation).rem_euclid(TAU);
                if ty >= angle {
                    return y;
                }
                let t = rho / radius;
                let c = amplitude * t * t * bump(t);
                let k = std::f64::consts::PI / angle;
                // solve th + c sin(k th) = ty on [0, angle]
                let (mut lo, mut hi) = (0.0, angle);
                let mut th = ty;
                for _ in 0..100 {
                    let f = th + c * (k * th).sin() - ty;
                    if f > 0.0 {
                        hi = th;
                    } else {
                        lo = th;
                    }
                    let mut next = th - f / (1.0 + c * k * (k * th).cos());
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - th).abs() <= 1e-16 {
                        th = next;
                        break;
                    }
                    th = next;
                }
                let v = rot(d, th - ty);
                [corner[0] + v[0], corner[1] + v[1]]
            }
        }
    }

    /// Jacobian matrix J[i][j] = d Phi_i / d x_j.
    pub fn jacobian(&self, x: [f64; 2]) -> Mat2 {
        match *self {
            Diffeomorphism::Identity => [[1.0, 0.0], [0.0, 1.0]],
            Diffeomorphism::RadialBump { center, radius, amplitude } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let s = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let t = s / radius;
                let f = 1.0 + amplitude * bump(t);
                let mut j = [[f, 0.0], [0.0, f]];
                if s > 0.0 && t < 1.0 {
                    // d f / d x_j = a b'(t) d_j / (s r)
                    let c = amplitude * bump_derivative(t) / (s * radius);
                    for (a, row) in j.iter_mut().enumerate() {
                        for (b, v) in row.iter_mut().enumerate() {
                            *v += c * d[a] * d[b];
                        }
                    }
                }
                j
            }
            Diffeomorphism::SwirlBump { center, radius, amplitude } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let s = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let t = s / radius;
                let a = amplitude * bump(t);
                let (sn, cs) = a.sin_cos();
                let mut j = [[cs, -sn], [sn, cs]];
                if s > 0.0 && t < 1.0 {
                    // d(R(a) d) = R(a) + (dR/da d) grad(a)^T, dR/da d = R(a) (-d2, d1)
                    let g = amplitude * bump_derivative(t) / (s * radius);
                    let w = rot([-d[1], d[0]], a);
                    for r in 0..2 {
                        for c in 0..2 {
                            j[r][c] += w[r] * g * d[c];
                        }
                    }
                }
                j
            }
            Diffeomorphism::CornerSwirl { rotation, angle, radius, amplitude, corner } => {
                let d = [x[0] - corner[0], x[1] - corner[1]];
                let Some(a) = self.corner_angle_shift(d) else {
                    return [[1.0, 0.0], [0.0, 1.0]];
                };
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let th = (d[1].atan2(d[0]) - rotation).rem_euclid(TAU);
                let t = rho / radius;
                let k = std::f64::consts::PI / angle;
                let prof = t * t * bump(t);
                let dprof = (2.0 * t * bump(t) + t * t * bump_derivative(t)) / radius;
                let da_drho = amplitude * dprof * (k * th).sin();
                let da_dth = amplitude * prof * k * (k * th).cos();
                // grad a = da/drho e_r + (1/rho) da/dth e_theta
                let er = [d[0] / rho, d[1] / rho];
                let et = [-er[1], er[0]];
                let ga = [da_drho * er[0] + da_dth / rho * et[0], da_drho * er[1] + da_dth / rho * et[1]];
                let (sn, cs) = a.sin_cos();
                let mut j = [[cs, -sn], [sn, cs]];
                let w = rot([-d[1], d[0]], a);
                for r in 0..2 {
                    for c in 0..2 {
                        j[r][c] += w[r] * ga[c];
                    }
                }
                j
            }
        }
    }

    /// Center and radius of a disk containing the support.
    pub fn support(&self) -> Option<([f64; 2], f64)> {
        match *self {
            Diffeomorphism::Identity => None,
            Diffeomorphism::RadialBump { center, radius, .. } | Diffeomorphism::SwirlBump { center, radius, .. } => {
                Some((center, radius))
            }
            Diffeomorphism::CornerSwirl { corner, radius, .. } => Some((corner, radius)),
        }
    }
}
