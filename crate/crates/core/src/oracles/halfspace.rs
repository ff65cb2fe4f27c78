//! Explicit blowup solutions (half-plane Bernoulli solutions and full-plane
//! polynomials) and the distributional residual that certifies them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C;
use num_rational::BigRational;

use super::poly::{Coeff, ComplexRational, MultiPoly};
use super::OracleError;
use crate::quadrature::GaussLegendre;
use crate::solver::{FieldRole, WaveField};
use crate::waves::HarmonicPolynomial2D;

/// Closed sector {theta in [from, to]} (angles measured counterclockwise,
/// 0 < to - from <= 2 pi), or the whole plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Full,
    Sector { from: f64, to: f64 },
}

impl Support {
    pub const HALF_PLANE: Support = Support::Sector { from: 0.0, to: PI };

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match *self {
            Support::Full => true,
            Support::Sector { from, to } => {
                if x == [0.0, 0.0] {
                    return true;
                }
                let t = (x[1].atan2(x[0]) - from).rem_euclid(2.0 * PI);
                t <= to - from + 1e-15 || t >= 2.0 * PI - 1e-15
            }
        }
    }
}

/// A polynomial restricted to a closed support, zero elsewhere.
#[derive(Clone, Debug)]
pub struct ClosedFormField {
    pub poly: MultiPoly<ComplexRational>,
    pub support: Support,
    fast: Arc<Vec<(u32, u32, C)>>,
}

impl ClosedFormField {
    pub fn new(poly: MultiPoly<ComplexRational>, support: Support) -> Self {
        assert_eq!(poly.nvars(), 2);
        let fast = poly.terms().map(|(e, c)| (e[0], e[1], c.to_c64())).collect();
        ClosedFormField { poly, support, fast: Arc::new(fast) }
    }

    fn poly_eval(&self, x: [f64; 2]) -> (C, [C; 2]) {
        let mut v = C::new(0.0, 0.0);
        let mut g = [C::new(0.0, 0.0); 2];
        for &(i, j, c) in self.fast.iter() {
            let (xi, yj) = (x[0].powi(i as i32), x[1].powi(j as i32));
            v += c * xi * yj;
            if i > 0 {
                g[0] += c * (i as f64) * x[0].powi(i as i32 - 1) * yj;
            }
            if j > 0 {
                g[1] += c * (j as f64) * xi * x[1].powi(j as i32 - 1);
            }
        }
        (v, g)
    }

    /// Value and gradient (one-sided on the support boundary).
    pub fn eval(&self, x: [f64; 2]) -> (C, [C; 2]) {
        if self.support.contains(x) {
            self.poly_eval(x)
        } else {
            (C::new(0.0, 0.0), [C::new(0.0, 0.0); 2])
        }
    }

    pub fn value(&self, x: [f64; 2]) -> C {
        self.eval(x).0
    }

    /// As a closed-form wave field on the disk of the given radius.
    pub fn to_wave_field(&self, radius: f64) -> WaveField {
        let f = self.clone();
        WaveField::closed_form(FieldRole::ClosedForm, radius, move |x| f.eval(x))
    }
}

/// Half-plane Bernoulli solution for H = a z^m + b zbar^m:
/// v = C* (a - b) r^m (e^{i m theta} - e^{-i m theta}) on {x_2 >= 0}, 0 below,
/// with C* = c0 / 2 so that the normal-derivative jump across {x_2 = 0} is
/// c0 d_2 H.
pub fn halfspace_blowup_solution(h: &HarmonicPolynomial2D, c0: f64) -> Result<ClosedFormField, OracleError> {
    if h.m == 0 {
        return Err(OracleError::ZeroOrder);
    }
    if !c0.is_finite() {
        return Err(OracleError::Constant(c0));
    }
    let k = (h.a - h.b) * (0.5 * c0);
    let poly = HarmonicPolynomial2D::new(h.m, k, -k).to_multipoly();
    Ok(ClosedFormField::new(poly, Support::HALF_PLANE))
}

/// v = |x|^2 H / (4m + 4) + w on the whole plane, with Lap v = H.
pub fn fullplane_blowup_solution(
    h: &HarmonicPolynomial2D,
    w: &MultiPoly<ComplexRational>,
) -> Result<ClosedFormField, OracleError> {
    let hp = h.to_multipoly();
    if !hp.laplacian().is_zero() || !w.laplacian().is_zero() {
        return Err(OracleError::NotHarmonic);
    }
    if !w.is_zero() {
        let d = w.homogeneous_degree().ok_or(OracleError::NotHomogeneous)?;
        if d != h.m + 2 {
            return Err(OracleError::Degree { expected: h.m + 2, got: d });
        }
    }
    let r2 = &MultiPoly::var(2, 0).pow(2) + &MultiPoly::var(2, 1).pow(2);
    let scale = BigRational::new(1.into(), (4 * h.m + 4).into());
    let v = &(&r2 * &hp).scale_ratio(&scale) + w;
    Ok(ClosedFormField::new(v, Support::Full))
}

/// Test function (1 - |x - c|^2 / r^2)^4 on B_r(c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let s = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)) / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(4)
        }
    }

    /// Closed-form Laplacian: with u = 1 - s,
    /// Lap u^4 = (48 s u^2 - 16 u^3) / r^2 in two dimensions.
    pub fn laplacian(&self, x: [f64; 2]) -> f64 {
        let r2 = self.radius * self.radius;
        let s = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)) / r2;
        if s >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - s;
        (48.0 * s * u * u - 16.0 * u * u * u) / r2
    }

    /// Parameter interval {t >= 0 : |t e - c| <= r} along the ray direction e.
    fn chord(&self, e: [f64; 2]) -> Option<(f64, f64)> {
        let p = e[0] * self.center[0] + e[1] * self.center[1];
        let q = self.center[0].powi(2) + self.center[1].powi(2) - self.radius * self.radius;
        let disc = p * p - q;
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (lo, hi) = ((p - s).max(0.0), p + s);
        (hi > lo).then_some((lo, hi))
    }
}

/// 50 bumps straddling the two rays of the sector.
pub fn test_family(from: f64, to: f64) -> Vec<Bump> {
    let mut out = Vec::with_capacity(50);
    for (k, t) in [from, to].into_iter().enumerate() {
        let e = [t.cos(), t.sin()];
        let n = [-e[1], e[0]];
        for (i, dist) in [0.15, 0.4, 0.7, 1.0, 1.4].into_iter().enumerate() {
            for (j, off) in [-0.6, -0.3, 0.0, 0.3, 0.6].into_iter().enumerate() {
                let radius = 0.2 + 0.1 * ((i + j + k) % 3) as f64;
                let o = off * radius;
                out.push(Bump { center: [dist * e[0] + o * n[0], dist * e[1] + o * n[1]], radius });
            }
        }
    }
    out
}

fn sector_bounds(support: Support) -> Result<(f64, f64), OracleError> {
    match support {
        Support::Full => Err(OracleError::Sector(0.0, 2.0 * PI)),
        Support::Sector { from, to } => {
            if !(to > from && to - from < 2.0 * PI) {
                return Err(OracleError::Sector(from, to));
            }
            Ok((from, to))
        }
    }
}

/// integral of v Lap(phi) over the sector, in polar coordinates about the
/// origin. The radial integrand is a polynomial, integrated exactly. In
/// angle the integrand has square-root endpoints where rays graze the bump,
/// so the angular range is split at the grazing angles and the rays, and
/// each piece is mapped by theta = a + (b - a)(1 - cos(pi tau))/2, which
/// makes the integrand smooth in tau.
fn volume_pairing(v: &ClosedFormField, phi: &Bump, from: f64, to: f64) -> Result<C, OracleError> {
    let g = GaussLegendre::new(12);
    let outer = GaussLegendre::new(64);
    let inner = |th: f64| -> C {
        let e = [th.cos(), th.sin()];
        match phi.chord(e) {
            None => C::new(0.0, 0.0),
            Some((lo, hi)) => g
                .mapped(lo, hi)
                .map(|(t, w)| {
                    let x = [t * e[0], t * e[1]];
                    v.poly_eval(x).0 * (phi.laplacian(x) * t * w)
                })
                .sum(),
        }
    };
    let mut cuts = vec![from, to];
    let dc = phi.center[0].hypot(phi.center[1]);
    if dc > phi.radius {
        let pc = phi.center[1].atan2(phi.center[0]);
        let a = (phi.radius / dc).asin();
        for t in [pc - a, pc + a] {
            for k in -2..=2 {
                let tt = t + 2.0 * PI * k as f64;
                if tt > from && tt < to {
                    cuts.push(tt);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut total = C::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 || phi.chord([(0.5 * (a + b)).cos(), (0.5 * (a + b)).sin()]).is_none() {
            continue;
        }
        for (tau, wt) in outer.mapped(0.0, 1.0) {
            let c = (PI * tau).cos();
            let th = a + (b - a) * 0.5 * (1.0 - c);
            let jac = (b - a) * 0.5 * PI * (PI * tau).sin();
            total += inner(th) * (wt * jac);
        }
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(OracleError::Quadrature);
    }
    Ok(total)
}

/// c0 sum over both rays of the integral of (nu . grad H) phi, nu the
/// inward normal of the sector.
fn boundary_pairing(h: &HarmonicPolynomial2D, c0: f64, phi: &Bump, from: f64, to: f64) -> C {
    let g = GaussLegendre::new(12);
    let mut s = C::new(0.0, 0.0);
    for (t, nu) in [(from, [-from.sin(), from.cos()]), (to, [to.sin(), -to.cos()])] {
        let e = [t.cos(), t.sin()];
        if let Some((lo, hi)) = phi.chord(e) {
            for (r, w) in g.mapped(lo, hi) {
                let x = [r * e[0], r * e[1]];
                let gh = h.grad(x);
                s += (gh[0] * nu[0] + gh[1] * nu[1]) * (phi.value(x) * w);
            }
        }
    }
    s * c0
}

/// max over the test family of |int v Lap(phi) - c0 sum_pm int_{Gamma_pm} (nu_pm . grad H) phi|.
pub fn distributional_residual(
    v: &ClosedFormField,
    h: &HarmonicPolynomial2D,
    c0: f64,
    support: Support,
) -> Result<f64, OracleError> {
    let (from, to) = sector_bounds(support)?;
    let mut worst: f64 = 0.0;
    for phi in test_family(from, to) {
        let lhs = volume_pairing(v, &phi, from, to)?;
        let rhs = boundary_pairing(h, c0, &phi, from, to);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// max over the test family of |c0 sum_pm int (nu . grad H) phi|, the scale
/// against which residuals are judged.
pub fn boundary_pairing_scale(h: &HarmonicPolynomial2D, c0: f64, support: Support) -> Result<f64, OracleError> {
    let (from, to) = sector_bounds(support)?;
    Ok(test_family(from, to).iter().map(|phi| boundary_pairing(h, c0, phi, from, to).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::poly::parse_poly;

    fn x2() -> HarmonicPolynomial2D {
        // r sin theta: a = 1/(2i), b = -1/(2i)
        let a = C::new(0.0, -0.5);
        HarmonicPolynomial2D::new(1, a, -a)
    }

    #[test]
    fn half_plane_x2_case() {
        let v = halfspace_blowup_solution(&x2(), 1.0).unwrap();
        for x in [[0.3, 0.7], [-1.2, 0.4], [0.5, 2.0]] {
            assert!((v.value(x) - C::new(x[1], 0.0)).norm() < 1e-15);
        }
        assert_eq!(v.value([0.3, -0.2]), C::new(0.0, 0.0));
        // jump of d_2 v across x_2 = 0 is 1 = c0 d_2 H
        assert!((v.eval([0.4, 0.0]).1[1] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(distributional_residual(&v, &x2(), 1.0, Support::HALF_PLANE).unwrap() < 1e-10);
    }

    #[test]
    fn doubled_constant_is_rejected() {
        let v = halfspace_blowup_solution(&x2(), 2.0).unwrap();
        let r = distributional_residual(&v, &x2(), 1.0, Support::HALF_PLANE).unwrap();
        assert!(r > 0.1 * boundary_pairing_scale(&x2(), 1.0, Support::HALF_PLANE).unwrap());
    }

    #[test]
    fn zero_data() {
        let h = HarmonicPolynomial2D::new(2, C::new(0.0, 0.0), C::new(0.0, 0.0));
        let v = ClosedFormField::new(MultiPoly::zero(2), Support::HALF_PLANE);
        assert_eq!(distributional_residual(&v, &h, 1.0, Support::HALF_PLANE).unwrap(), 0.0);
        let a = C::new(0.3, 0.1);
        let v = halfspace_blowup_solution(&HarmonicPolynomial2D::new(3, a, a), 1.0).unwrap();
        assert!(v.poly.is_zero());
        assert_eq!(
            halfspace_blowup_solution(&HarmonicPolynomial2D::new(0, a, a), 1.0).unwrap_err(),
            OracleError::ZeroOrder
        );
    }

    #[test]
    fn vanishes_on_the_line() {
        for m in 1..=6 {
            let h = HarmonicPolynomial2D::new(m, C::new(0.4, -0.3), C::new(-0.2, 0.9));
            let v = halfspace_blowup_solution(&h, 0.7).unwrap();
            for x in [[0.8, 0.0], [-1.3, 0.0]] {
                assert!(v.poly_eval(x).0.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn full_plane_solutions() {
        let h0 = HarmonicPolynomial2D::new(0, C::new(0.5, 0.0), C::new(0.5, 0.0));
        let v = fullplane_blowup_solution(&h0, &MultiPoly::zero(2)).unwrap();
        let want = MultiPoly::<ComplexRational>::from_real(&parse_poly("1/4 2 0\n1/4 0 2").unwrap());
        assert_eq!(v.poly, want);
        assert_eq!(v.poly.laplacian(), h0.to_multipoly());
        let w = MultiPoly::from_real(&parse_poly("1 0 3\n-3 2 1").unwrap());
        let v = fullplane_blowup_solution(&x2(), &w).unwrap();
        assert_eq!(v.poly.laplacian(), x2().to_multipoly());
        assert_eq!(v.poly.homogeneous_degree(), Some(3));
        let bad = MultiPoly::from_real(&parse_poly("1 2 0").unwrap());
        assert_eq!(fullplane_blowup_solution(&x2(), &bad).unwrap_err(), OracleError::NotHarmonic);
        let wrong = MultiPoly::from_real(&parse_poly("1 1 0").unwrap());
        assert_eq!(
            fullplane_blowup_solution(&x2(), &wrong).unwrap_err(),
            OracleError::Degree { expected: 3, got: 1 }
        );
    }

    #[test]
    fn bump_laplacian_matches_finite_differences() {
        let b = Bump { center: [0.2, -0.1], radius: 0.5 };
        let x = [0.35, 0.05];
        let d = 1e-4;
        let fd = (b.value([x[0] + d, x[1]]) + b.value([x[0] - d, x[1]]) + b.value([x[0], x[1] + d])
            + b.value([x[0], x[1] - d])
            - 4.0 * b.value(x))
            / (d * d);
        assert!((fd - b.laplacian(x)).abs() < 1e-5);
    }
}
