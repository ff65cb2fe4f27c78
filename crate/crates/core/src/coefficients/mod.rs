//! Media (A, rho, q) on a scatterer, decay classification at a boundary
//! point, and pushforward media built from diffeomorphisms.

pub mod diffeo;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::DomainSpec;
pub use diffeo::{bump, Diffeomorphism};

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("wavenumber must be positive, got {0}")]
    Wavenumber(f64),
    #[error("coefficient A is not symmetric at ({0:.4}, {1:.4})")]
    NotSymmetric(f64, f64),
    #[error("coefficient is not uniformly elliptic / positive at ({0:.4}, {1:.4})")]
    NotElliptic(f64, f64),
    #[error("diffeomorphism support is not inside the scatterer")]
    SupportOutside,
    #[error("Jacobian determinant {det:e} is not positive at ({x:.4}, {y:.4})")]
    SingularJacobian { det: f64, x: f64, y: f64 },
    #[error("amplitude {0} too large for an invertible bump")]
    Amplitude(f64),
    #[error("inconsistent samples near x0: {0}")]
    Inconsistent(String),
}

type MatFn = Arc<dyn Fn([f64; 2]) -> Mat2 + Send + Sync>;
type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Medium {
    /// Constant (A, rho) inside the scatterer.
    Constant { a: Mat2, rho: f64 },
    /// Pushforward of (Id, 1) by a diffeomorphism supported in the scatterer.
    Pushforward { phi: Diffeomorphism },
    /// Arbitrary evaluators used inside the scatterer.
    Custom { a: MatFn, rho: ScalarFn },
}

impl fmt::Debug for Medium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Medium::Constant { a, rho } => write!(f, "Constant {{ a: {a:?}, rho: {rho} }}"),
            Medium::Pushforward { phi } => write!(f, "Pushforward {{ phi: {phi:?} }}"),
            Medium::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Coefficients of the transmission problem: (A, rho) inside the scatterer,
/// (Id, 1) outside, with an optional constant zeroth-order term q inside.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub domain: DomainSpec,
    pub kappa: f64,
    pub medium: Medium,
    pub q: Option<f64>,
    /// Sampled ellipticity constant.
    pub c_ellip: f64,
}

fn sym_eigs(a: &Mat2) -> (f64, f64) {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    (0.5 * tr - disc, 0.5 * tr + disc)
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm(a: &Mat2) -> f64 {
    let (l, h) = sym_eigs(a);
    l.abs().max(h.abs())
}

fn det2(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

impl CoefficientField {
    fn build(domain: DomainSpec, kappa: f64, medium: Medium) -> Result<Self, MediumError> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(MediumError::Wavenumber(kappa));
        }
        let mut f = CoefficientField { domain, kappa, medium, q: None, c_ellip: 1.0 };
        f.c_ellip = f.audit()?;
        Ok(f)
    }

    /// A = Id, rho = rho0 inside the scatterer.
    pub fn constant_contrast(domain: DomainSpec, kappa: f64, rho: f64) -> Result<Self, MediumError> {
        Self::build(domain, kappa, Medium::Constant { a: IDENTITY, rho })
    }

    pub fn constant(domain: DomainSpec, kappa: f64, a: Mat2, rho: f64) -> Result<Self, MediumError> {
        Self::build(domain, kappa, Medium::Constant { a, rho })
    }

    pub fn custom(
        domain: DomainSpec,
        kappa: f64,
        a: impl Fn([f64; 2]) -> Mat2 + Send + Sync + 'static,
        rho: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, MediumError> {
        Self::build(domain, kappa, Medium::Custom { a: Arc::new(a), rho: Arc::new(rho) })
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    /// (A, rho) at x, given whether x is in the scatterer.
    pub fn coef(&self, x: [f64; 2], inside: bool) -> (Mat2, f64) {
        match &self.medium {
            Medium::Pushforward { phi } => {
                let p = phi.inverse(x);
                let j = phi.jacobian(p);
                let d = det2(&j).abs();
                let mut a = [[0.0; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        a[r][c] = (j[r][0] * j[c][0] + j[r][1] * j[c][1]) / d;
                    }
                }
                (a, 1.0 / d)
            }
            _ if !inside => (IDENTITY, 1.0),
            Medium::Constant { a, rho } => (*a, *rho),
            Medium::Custom { a, rho } => (a(x), rho(x)),
        }
    }

    pub fn at(&self, x: [f64; 2]) -> (Mat2, f64) {
        self.coef(x, self.domain.contains(x))
    }

    pub fn a(&self, x: [f64; 2]) -> Mat2 {
        self.at(x).0
    }

    pub fn rho(&self, x: [f64; 2]) -> f64 {
        self.at(x).1
    }

    /// h = kappa^2 (rho - 1) chi_D.
    pub fn contrast(&self, x: [f64; 2]) -> f64 {
        self.contrast_in(x, self.domain.contains(x))
    }

    pub fn contrast_in(&self, x: [f64; 2], inside: bool) -> f64 {
        if !inside {
            return 0.0;
        }
        self.kappa * self.kappa * (self.coef(x, true).1 - 1.0)
    }

    /// Samples a grid over the scatterer's bounding box and returns the
    /// ellipticity constant max(lambda_max, 1/lambda_min, rho, 1/rho).
    pub fn audit(&self) -> Result<f64, MediumError> {
        let r = self.domain.outer_radius;
        let n = 60;
        let mut c: f64 = 1.0;
        for i in 0..=n {
            for j in 0..=n {
                let x = [-r + 2.0 * r * i as f64 / n as f64, -r + 2.0 * r * j as f64 / n as f64];
                if !self.domain.contains(x) {
                    continue;
                }
                let (a, rho) = self.coef(x, true);
                if (a[0][1] - a[1][0]).abs() > 1e-12 * (1.0 + a[0][1].abs()) {
                    return Err(MediumError::NotSymmetric(x[0], x[1]));
                }
                let (lo, hi) = sym_eigs(&a);
                if !(lo > 0.0 && rho > 0.0 && hi.is_finite() && rho.is_finite()) {
                    return Err(MediumError::NotElliptic(x[0], x[1]));
                }
                c = c.max(hi).max(1.0 / lo).max(rho).max(1.0 / rho);
            }
        }
        Ok(c)
    }
}

/// Pushforward (Phi_* Id, Phi_* 1):
/// A = (J J^T / |det J|) o Phi^{-1}, rho = (1 / |det J|) o Phi^{-1}.
pub fn pushforward_medium(phi: Diffeomorphism, spec: &DomainSpec, kappa: f64) -> Result<CoefficientField, MediumError> {
    if let Some((c, r)) = phi.support() {
        let inside = (0..256).all(|k| {
            let t = std::f64::consts::TAU * k as f64 / 256.0;
            spec.contains([c[0] + r * t.cos(), c[1] + r * t.sin()])
        });
        let corner_map = matches!(phi, Diffeomorphism::CornerSwirl { .. });
        if !inside && !corner_map {
            return Err(MediumError::SupportOutside);
        }
        // Jacobian audit over the support
        let n = 80;
        for i in 0..=n {
            for j in 0..=n {
                let x = [c[0] - r + 2.0 * r * i as f64 / n as f64, c[1] - r + 2.0 * r * j as f64 / n as f64];
                let det = det2(&phi.jacobian(x));
                if !(det > 0.0) {
                    return Err(MediumError::SingularJacobian { det, x: x[0], y: x[1] });
                }
            }
        }
    }
    CoefficientField::build(spec.clone(), kappa, Medium::Pushforward { phi })
}

/// Radial bump map x + amplitude b(|x - c|/r)(x - c). Invertible for
/// |amplitude| < 1: the radial profile s (1 + a b(s/r)) has derivative
/// 1 + a (1 - t^2)^2 (1 - 7 t^2) >= 1 - |a| whenever |a| < 1.
pub fn bump_diffeomorphism(center: [f64; 2], radius: f64, amplitude: f64) -> Result<Diffeomorphism, MediumError> {
    if !(radius > 0.0) {
        return Err(MediumError::Amplitude(radius));
    }
    if !(amplitude.abs() < 1.0) {
        return Err(MediumError::Amplitude(amplitude));
    }
    if amplitude == 0.0 {
        return Ok(Diffeomorphism::Identity);
    }
    Ok(Diffeomorphism::RadialBump { center, radius, amplitude })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayCondition {
    /// h is Holder near x0 with h(x0) != 0
    ContrastNondegenerate,
    /// |A - Id| <= C|x - x0|^{2+alpha}, |grad A| <= C|x - x0|^{1+alpha}
    ADecays,
    /// |h| <= C|x - x0|^alpha
    ContrastDecays,
    /// A - Id = c0 B^{-1} + R with B orthogonal, |R| <= C|x|^alpha,
    /// |grad R| <= C|x|^{alpha - 1}
    AOrthogonalStructure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub condition: DecayCondition,
    pub x0: [f64; 2],
    pub alpha: f64,
    /// fitted bound constant
    pub c: f64,
    /// fitted log-log exponent(s); infinite when the quantity vanishes
    pub exponents: Vec<f64>,
    pub c0: Option<f64>,
    pub b: Option<Mat2>,
    pub m: Option<u32>,
}

/// Dyadic annuli 2^{-k-1} <= |x - x0| <= 2^{-k} for k in this range.
pub const DECAY_LEVELS: std::ops::RangeInclusive<u32> = 3..=12;
/// A certificate is rejected if the fitted exponent falls short of the
/// target by more than this.
pub const DECAY_SLACK: f64 = 0.1;
const VANISH: f64 = 1e-13;
/// Rounding floor relative to the coefficient size.
const NOISE: f64 = 1e-13;
/// Finite-difference step relative to the annulus radius.
const FD_STEP: f64 = 1e-3;

/// Per-annulus maxima together with the rounding floor below which a
/// sample carries no information.
#[derive(Default)]
struct Series {
    r: Vec<f64>,
    v: Vec<f64>,
    floor: Vec<f64>,
}

impl Series {
    fn push(&mut self, r: f64, v: f64, floor: f64) {
        self.r.push(r);
        self.v.push(v);
        self.floor.push(floor.max(VANISH));
    }

    fn resolved(&self) -> Vec<(f64, f64)> {
        (0..self.r.len()).filter(|&i| self.v[i] > self.floor[i]).map(|i| (self.r[i], self.v[i])).collect()
    }

    /// Fewer than two annuli above the floor: indistinguishable from zero.
    fn vanishes(&self) -> bool {
        self.resolved().len() < 2
    }

    fn exponent(&self) -> f64 {
        if self.vanishes() {
            return f64::INFINITY;
        }
        let pts: Vec<(f64, f64)> = self.resolved().iter().map(|(r, v)| (r.ln(), v.ln())).collect();
        fit_slope(&pts)
    }

    fn constant(&self, p: f64) -> f64 {
        self.resolved().iter().map(|(r, v)| v / r.powf(p)).fold(0.0, f64::max)
    }

    fn certifies(&self, target: f64) -> bool {
        self.vanishes() || self.exponent() >= target - DECAY_SLACK
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Samples |A - Id|, |grad A| and h on dyadic annuli around x0 inside the
/// closed scatterer, fits decay exponents on log-log data, and returns every
/// condition the data supports at exponent alpha.
pub fn classify_decay(
    field: &CoefficientField,
    x0: [f64; 2],
    alpha: f64,
) -> Result<Vec<DecayCertificate>, MediumError> {
    let mut samples = Vec::new();
    for k in DECAY_LEVELS {
        let r_hi = 0.5f64.powi(k as i32);
        let mut pts = Vec::new();
        for i in 0..4 {
            let r = r_hi * (0.5 + 0.5 * (i as f64 + 0.5) / 4.0);
            for j in 0..64 {
                let t = std::f64::consts::TAU * (j as f64 + 0.5) / 64.0;
                let x = [x0[0] + r * t.cos(), x0[1] + r * t.sin()];
                if field.domain.contains(x) {
                    pts.push((x, r));
                }
            }
        }
        if pts.is_empty() {
            return Err(MediumError::Inconsistent(format!("no scatterer samples in annulus k = {k}")));
        }
        samples.push((r_hi, pts));
    }
    let eval = |x: [f64; 2]| -> Result<(Mat2, f64), MediumError> {
        let (a, rho) = field.coef(x, true);
        if a.iter().flatten().chain([&rho]).any(|v| !v.is_finite()) {
            return Err(MediumError::Inconsistent(format!("non-finite coefficient at {x:?}")));
        }
        Ok((a, field.kappa * field.kappa * (rho - 1.0)))
    };
    let grad_a = |x: [f64; 2], step: f64| -> Result<f64, MediumError> {
        let mut s = 0.0;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += step;
            xm[d] -= step;
            let (ap, _) = eval(xp)?;
            let (am, _) = eval(xm)?;
            let mut g = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    g[r][c] = (ap[r][c] - am[r][c]) / (2.0 * step);
                }
            }
            s += sym_norm(&g).powi(2);
        }
        Ok(s.sqrt())
    };
    // limits at x0 from the innermost annulus
    let inner = &samples[samples.len() - 1].1;
    let mut a0 = [[0.0; 2]; 2];
    let mut h0 = 0.0;
    for (x, _) in inner {
        let (a, h) = eval(*x)?;
        for r in 0..2 {
            for c in 0..2 {
                a0[r][c] += a[r][c] / inner.len() as f64;
            }
        }
        h0 += h / inner.len() as f64;
    }
    let m0 = [[a0[0][0] - 1.0, a0[0][1]], [a0[1][0], a0[1][1] - 1.0]];
    let mut s_adev = Series::default();
    let mut s_grad = Series::default();
    let mut s_h = Series::default();
    let mut s_hvar = Series::default();
    let mut s_rem = Series::default();
    for (r, pts) in &samples {
        let step = FD_STEP * r;
        let (mut ad, mut gr, mut hh, mut hv, mut rem) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let (mut amax, mut hmax) = (1.0f64, field.kappa * field.kappa);
        for (x, _) in pts {
            let (a, h) = eval(*x)?;
            amax = amax.max(sym_norm(&a));
            hmax = hmax.max(h.abs());
            let dev = [[a[0][0] - 1.0, a[0][1]], [a[1][0], a[1][1] - 1.0]];
            ad = ad.max(sym_norm(&dev));
            let rmat = [[dev[0][0] - m0[0][0], dev[0][1] - m0[0][1]], [dev[1][0] - m0[1][0], dev[1][1] - m0[1][1]]];
            rem = rem.max(sym_norm(&rmat));
            gr = gr.max(grad_a(*x, step)?);
            hh = hh.max(h.abs());
            hv = hv.max((h - h0).abs());
        }
        let fa = NOISE * amax;
        let fh = NOISE * hmax;
        s_adev.push(*r, ad, fa);
        s_rem.push(*r, rem, fa);
        s_grad.push(*r, gr, fa / step);
        s_h.push(*r, hh, fh);
        s_hvar.push(*r, hv, fh);
    }
    let mut out = Vec::new();
    let base = |condition, c, exponents| DecayCertificate {
        condition,
        x0,
        alpha,
        c,
        exponents,
        c0: None,
        b: None,
        m: None,
    };
    if h0.abs() > VANISH && s_hvar.certifies(alpha) {
        out.push(base(DecayCondition::ContrastNondegenerate, s_hvar.constant(alpha), vec![s_hvar.exponent()]));
    }
    if s_adev.certifies(2.0 + alpha) && s_grad.certifies(1.0 + alpha) {
        let c = s_adev.constant(2.0 + alpha).max(s_grad.constant(1.0 + alpha));
        out.push(base(DecayCondition::ADecays, c, vec![s_adev.exponent(), s_grad.exponent()]));
    }
    if s_h.certifies(alpha) {
        out.push(base(DecayCondition::ContrastDecays, s_h.constant(alpha), vec![s_h.exponent()]));
    }
    // A(x0) - Id = c0 B^{-1} with B orthogonal: M^T M = c0^2 Id
    let mtm = [
        [m0[0][0] * m0[0][0] + m0[1][0] * m0[1][0], m0[0][0] * m0[0][1] + m0[1][0] * m0[1][1]],
        [m0[0][1] * m0[0][0] + m0[1][1] * m0[1][0], m0[0][1] * m0[0][1] + m0[1][1] * m0[1][1]],
    ];
    let c0sq = 0.5 * (mtm[0][0] + mtm[1][1]);
    let orth = c0sq > 1e-12
        && (mtm[0][0] - c0sq).abs() <= 1e-8 * c0sq
        && (mtm[1][1] - c0sq).abs() <= 1e-8 * c0sq
        && mtm[0][1].abs() <= 1e-8 * c0sq;
    if orth && s_rem.certifies(alpha) && s_grad.certifies(alpha - 1.0) {
        let c0 = c0sq.sqrt();
        // B^{-1} = M / c0 and B = (M / c0)^T
        let b = [[m0[0][0] / c0, m0[1][0] / c0], [m0[0][1] / c0, m0[1][1] / c0]];
        let mut cert = base(
            DecayCondition::AOrthogonalStructure,
            s_rem.constant(alpha).max(s_grad.constant(alpha - 1.0)),
            vec![s_rem.exponent(), s_grad.exponent()],
        );
        cert.c0 = Some(c0);
        cert.b = Some(b);
        out.push(cert);
    }
    Ok(out)
}
