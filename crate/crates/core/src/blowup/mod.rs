//! Free-boundary diagnostics at a boundary point x0: rescalings
//! u(x0 + r x) / r^d, decay traces, Weiss energies, blowup-limit fits and
//! non-degeneracy checks.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C;
use thiserror::Error;

use crate::coefficients::{fit_slope, CoefficientField, IDENTITY};
use crate::quadrature::GaussLegendre;
use crate::solver::{FieldData, WaveField};
use crate::waves::HarmonicPolynomial2D;

/// Polar sampling grid of the unit ball.
pub const GRID_ANGLES: usize = 96;
pub const GRID_RADII: usize = 64;
/// decay_trace flags a violation when the fitted exponent falls this far
/// below the target.
pub const DECAY_FLAG_SLACK: f64 = 0.15;
/// Successive Cauchy gaps must shrink by at least this factor.
pub const CAUCHY_RATIO: f64 = 0.8;
/// Support threshold relative to the sup of the limit.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;
pub const HALF_SPACE_TOL: f64 = 5.0 * PI / 180.0;
/// Weiss quadrature is rejected when coarse and fine rules differ by more
/// than this relative amount.
pub const WEISS_QUAD_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlowupError {
    #[error("field undefined at ({0:.6}, {1:.6})")]
    OutOfDomain(f64, f64),
    #[error("radius {r:e} resolves fewer than 4 elements of size {h:e}")]
    Unresolved { r: f64, h: f64 },
    #[error("field vanishes identically on the samples; exponent undefined")]
    Degenerate,
    #[error("empty support")]
    EmptySupport,
    #[error("need at least 3 radii, got {0}")]
    TooFewRadii(usize),
    #[error("radii must be positive and strictly decreasing")]
    NotDecreasing,
    #[error("rescalings do not converge at this order; gaps {gaps:?}")]
    NoConvergence { gaps: Vec<f64> },
    #[error("order {order} must equal deg H + 2 = {expected}")]
    Order { order: u32, expected: u32 },
    #[error("Weiss quadrature error {error:e} too large for value {value:e}")]
    Quadrature { error: f64, value: f64 },
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
}

/// Grid point (i, j) of the unit ball: radius (i + 1) / GRID_RADII, angle
/// 2 pi j / GRID_ANGLES.
pub fn grid_point(i: usize, j: usize) -> [f64; 2] {
    let rho = (i + 1) as f64 / GRID_RADII as f64;
    let t = TAU * j as f64 / GRID_ANGLES as f64;
    [rho * t.cos(), rho * t.sin()]
}

fn grid_angle(j: usize) -> f64 {
    TAU * j as f64 / GRID_ANGLES as f64
}

fn sample(u: &WaveField, x: [f64; 2]) -> Result<(C, [C; 2]), BlowupError> {
    u.eval(x).ok_or(BlowupError::OutOfDomain(x[0], x[1]))
}

/// u(x0 + r x) / r^order on the polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledField {
    pub x0: [f64; 2],
    pub r: f64,
    pub order: f64,
    /// values[i * GRID_ANGLES + j] at grid_point(i, j)
    pub values: Vec<C>,
}

impl RescaledField {
    pub fn at(&self, i: usize, j: usize) -> C {
        self.values[i * GRID_ANGLES + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, o: &RescaledField) -> f64 {
        self.values.iter().zip(&o.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn check_resolution(u: &WaveField, x0: [f64; 2], r: f64) -> Result<(), BlowupError> {
    if !matches!(u.data, FieldData::Nodal { .. }) {
        return Ok(());
    }
    let mut h: f64 = u.local_mesh_size(x0).unwrap_or(0.0);
    for k in 0..8 {
        let t = TAU * k as f64 / 8.0;
        if let Some(s) = u.local_mesh_size([x0[0] + 0.5 * r * t.cos(), x0[1] + 0.5 * r * t.sin()]) {
            h = h.max(s);
        }
    }
    if 2.0 * r < 4.0 * h {
        return Err(BlowupError::Unresolved { r, h });
    }
    Ok(())
}

pub fn rescale_field(u: &WaveField, x0: [f64; 2], r: f64, order: f64) -> Result<RescaledField, BlowupError> {
    check_resolution(u, x0, r)?;
    let scale = r.powf(-order);
    let mut values = Vec::with_capacity(GRID_RADII * GRID_ANGLES);
    for i in 0..GRID_RADII {
        for j in 0..GRID_ANGLES {
            let p = grid_point(i, j);
            let (v, _) = sample(u, [x0[0] + r * p[0], x0[1] + r * p[1]])?;
            values.push(v * scale);
        }
    }
    Ok(RescaledField { x0, r, order, values })
}

/// Samples (r, S_r) with S_r = sup_{B_r} |u| + r sup_{B_r} |grad u|, and
/// the log-log least-squares exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    /// sorted by decreasing r
    pub samples: Vec<(f64, f64)>,
    pub exponent: f64,
}

impl DecayTrace {
    /// True when S_r <= C r^target is contradicted by the fit.
    pub fn violates(&self, target: f64) -> bool {
        self.exponent < target - DECAY_FLAG_SLACK
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,S_r\n");
        for (r, v) in &self.samples {
            writeln!(s, "{r:.16e},{v:.16e}").unwrap();
        }
        s
    }
}

pub fn decay_trace(u: &WaveField, x0: [f64; 2], radii: &[f64]) -> Result<DecayTrace, BlowupError> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(BlowupError::NotDecreasing);
    }
    let mut rs: Vec<f64> = radii.to_vec();
    rs.sort_by(|a, b| a.total_cmp(b));
    rs.dedup();
    let (v0, g0) = sample(u, x0)?;
    let mut sup_v = v0.norm();
    let mut sup_g = g0[0].norm().hypot(g0[1].norm());
    let mut samples = Vec::with_capacity(rs.len());
    // the grids of smaller balls are kept, so S_r is nondecreasing
    for &r in &rs {
        for i in 0..GRID_RADII {
            for j in 0..GRID_ANGLES {
                let p = grid_point(i, j);
                let (v, g) = sample(u, [x0[0] + r * p[0], x0[1] + r * p[1]])?;
                sup_v = sup_v.max(v.norm());
                sup_g = sup_g.max(g[0].norm().hypot(g[1].norm()));
            }
        }
        samples.push((r, sup_v + r * sup_g));
    }
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).map(|s| (s.0.ln(), s.1.ln())).collect();
    if pts.len() < 2 {
        return Err(BlowupError::Degenerate);
    }
    let exponent = fit_slope(&pts);
    samples.reverse();
    Ok(DecayTrace { samples, exponent })
}

/// One Weiss sample: W_A(r, u) with the medium's A, W(r, u) with A = Id,
/// and the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeissSample {
    pub r: f64,
    pub w_a: C,
    pub w: C,
    pub error: f64,
}

struct WeissRule {
    /// (angle, weight) in theta
    theta: Vec<(f64, f64)>,
    radial: GaussLegendre,
}

fn weiss_rule(breaks: Option<(f64, f64)>, fine: bool) -> WeissRule {
    let k = if fine { 2 } else { 1 };
    let theta = match breaks {
        None => {
            let n = 128 * k;
            (0..n).map(|j| (TAU * j as f64 / n as f64, TAU / n as f64)).collect()
        }
        Some((a, b)) => {
            let g = GaussLegendre::new(8);
            let mut out = Vec::new();
            for (lo, hi) in [(a, b), (b, a + TAU)] {
                let panels = 16 * k;
                for p in 0..panels {
                    let (s, e) = (lo + (hi - lo) * p as f64 / panels as f64, lo + (hi - lo) * (p + 1) as f64 / panels as f64);
                    out.extend(g.mapped(s, e));
                }
            }
            out
        }
    };
    WeissRule { theta, radial: GaussLegendre::new(16 * k) }
}

fn weiss_with_rule(
    u: &WaveField,
    h: &HarmonicPolynomial2D,
    medium: Option<&CoefficientField>,
    x0: [f64; 2],
    r: f64,
    order: u32,
    rule: &WeissRule,
) -> Result<(C, C), BlowupError> {
    let mut bulk_a = C::new(0.0, 0.0);
    let mut bulk = C::new(0.0, 0.0);
    let mut surf = C::new(0.0, 0.0);
    for &(t, wt) in &rule.theta {
        let e = [t.cos(), t.sin()];
        for (rho, wr) in rule.radial.mapped(0.0, r) {
            let y = [rho * e[0], rho * e[1]];
            let x = [x0[0] + y[0], x0[1] + y[1]];
            let (v, g) = sample(u, x)?;
            let a = medium.map(|m| m.at(x).0).unwrap_or(IDENTITY);
            let ag = [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]];
            let hv = h.eval(y) * v * 2.0;
            let w = wt * wr * rho;
            bulk_a += (ag[0] * g[0] + ag[1] * g[1] + hv) * w;
            bulk += (g[0] * g[0] + g[1] * g[1] + hv) * w;
        }
        let (v, _) = sample(u, [x0[0] + r * e[0], x0[1] + r * e[1]])?;
        surf += v * v * (wt * r);
    }
    let d = order as f64;
    let sb = r.powf(-2.0 * d);
    let ss = d * r.powf(-2.0 * d - 1.0);
    Ok((bulk_a * sb - surf * ss, bulk * sb - surf * ss))
}

/// W_A(r, u) = r^{-2d} int_{B_r(x0)} (A grad u . grad u + 2 H u) - d r^{-2d-1} int_{dB_r(x0)} u^2
/// with d = order = deg H + 2, and W the same with A = Id. Bilinear in u so
/// complex fields are handled without conjugation. When x0 is the corner of
/// the medium's scatterer the angular rule is split at the corner rays.
pub fn weiss_energy(
    u: &WaveField,
    h: &HarmonicPolynomial2D,
    medium: Option<&CoefficientField>,
    x0: [f64; 2],
    r: f64,
    order: u32,
) -> Result<WeissSample, BlowupError> {
    if order != h.m + 2 {
        return Err(BlowupError::Order { order, expected: h.m + 2 });
    }
    let breaks = medium.and_then(|m| {
        let c = m.domain.corner_point;
        ((c[0] - x0[0]).abs() < 1e-12 && (c[1] - x0[1]).abs() < 1e-12).then(|| m.domain.corner_rays())
    });
    let coarse = weiss_with_rule(u, h, medium, x0, r, order, &weiss_rule(breaks, false))?;
    let fine = weiss_with_rule(u, h, medium, x0, r, order, &weiss_rule(breaks, true))?;
    let error = (fine.0 - coarse.0).norm().max((fine.1 - coarse.1).norm());
    let value = fine.0.norm().max(fine.1.norm());
    if error > WEISS_QUAD_TOL * value + 1e-13 {
        return Err(BlowupError::Quadrature { error, value });
    }
    Ok(WeissSample { r, w_a: fine.0, w: fine.1, error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeissTrace {
    /// sorted by decreasing r
    pub samples: Vec<WeissSample>,
    pub order: u32,
    pub h: HarmonicPolynomial2D,
    /// intercept of a least-squares line W_A(r) ~ W(0+) + c r
    pub limit: C,
}

impl WeissTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,W_A,W,W_A_im,W_im\n");
        for p in &self.samples {
            writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.r, p.w_a.re, p.w.re, p.w_a.im, p.w.im).unwrap();
        }
        s
    }
}

pub fn weiss_trace(
    u: &WaveField,
    h: &HarmonicPolynomial2D,
    medium: Option<&CoefficientField>,
    x0: [f64; 2],
    radii: &[f64],
    order: u32,
) -> Result<WeissTrace, BlowupError> {
    let mut rs = radii.to_vec();
    rs.sort_by(|a, b| b.total_cmp(a));
    let samples: Vec<WeissSample> =
        rs.iter().map(|&r| weiss_energy(u, h, medium, x0, r, order)).collect::<Result<_, _>>()?;
    let n = samples.len() as f64;
    let limit = if samples.len() < 2 {
        samples.first().map(|s| s.w_a).unwrap_or_default()
    } else {
        let mr = samples.iter().map(|s| s.r).sum::<f64>() / n;
        let mw = samples.iter().map(|s| s.w_a).sum::<C>() / n;
        let sxx: f64 = samples.iter().map(|s| (s.r - mr).powi(2)).sum();
        let sxy: C = samples.iter().map(|s| (s.w_a - mw) * (s.r - mr)).sum();
        mw - sxy / sxx * mr
    };
    Ok(WeissTrace { samples, order, h: *h, limit })
}

/// Support of a blowup limit, read off the angular occupancy of the polar
/// grid. Sector angles are counterclockwise from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportClass {
    Full,
    HalfSpace { from: f64, to: f64 },
    Sector { from: f64, to: f64 },
}

impl SupportClass {
    pub fn angle(&self) -> f64 {
        match *self {
            SupportClass::Full => TAU,
            SupportClass::HalfSpace { from, to } | SupportClass::Sector { from, to } => to - from,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SupportClass::Full => "full".into(),
            SupportClass::HalfSpace { .. } => "half-space".into(),
            SupportClass::Sector { .. } => format!("sector({:.6})", self.angle()),
        }
    }
}

/// Classifies the support of a rescaled field: columns with
/// max |v| > SUPPORT_THRESHOLD sup |v| are occupied, the longest circular run
/// of occupied columns is the support (single empty columns are nodal rays
/// and count as occupied), and its edges are located by linear
/// extrapolation of the column maxima to zero.
pub fn classify_support(limit: &RescaledField) -> Result<SupportClass, BlowupError> {
    let n = GRID_ANGLES;
    let col: Vec<f64> = (0..n).map(|j| (0..GRID_RADII).map(|i| limit.at(i, j).norm()).fold(0.0, f64::max)).collect();
    let peak = col.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(BlowupError::EmptySupport);
    }
    let mut occ: Vec<bool> = col.iter().map(|&c| c > SUPPORT_THRESHOLD * peak).collect();
    // an isolated empty column between occupied ones is a nodal ray, not a
    // gap in the support
    let raw = occ.clone();
    for j in 0..n {
        if !raw[j] && raw[(j + n - 1) % n] && raw[(j + 1) % n] {
            occ[j] = true;
        }
    }
    if occ.iter().all(|&o| o) {
        return Ok(SupportClass::Full);
    }
    // longest circular run, starting right after an unoccupied column
    let (mut best_start, mut best_len) = (0, 0);
    for s in 0..n {
        if occ[s] && !occ[(s + n - 1) % n] {
            let len = (0..n).take_while(|&k| occ[(s + k) % n]).count();
            if len > best_len {
                best_len = len;
                best_start = s;
            }
        }
    }
    let dt = TAU / n as f64;
    let edge = |inner: usize, next: usize, toward: f64| -> f64 {
        // zero of the line through (theta_next, g_next), (theta_inner, g_inner)
        let (gi, gn) = (col[inner], col[next]);
        if best_len >= 2 && gn > gi {
            (gi / (gn - gi)).min(1.0) * dt * toward
        } else {
            0.5 * dt * toward
        }
    };
    let first = best_start;
    let last = (best_start + best_len - 1) % n;
    let from = grid_angle(first) + edge(first, (first + 1) % n, -1.0);
    let mut to = grid_angle(first) + (best_len - 1) as f64 * dt + edge(last, (last + n - 1) % n, 1.0);
    if to <= from {
        to += TAU;
    }
    if ((to - from) - PI).abs() <= HALF_SPACE_TOL {
        Ok(SupportClass::HalfSpace { from, to })
    } else {
        Ok(SupportClass::Sector { from, to })
    }
}

fn in_arc(t: f64, from: f64, to: f64) -> bool {
    (t - from).rem_euclid(TAU) <= to - from
}

/// Outcome of a blowup-limit extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupFit {
    pub limit: RescaledField,
    /// sup distances between successive rescalings
    pub gaps: Vec<f64>,
    pub cauchy_gap: f64,
    pub support: SupportClass,
    /// fitted harmonic part: v = chi (a z^d + b zbar^d) on half-spaces and
    /// sectors; H in v = |x|^2 H / (4m + 4) + w on the full plane
    pub fit: Option<HarmonicPolynomial2D>,
    /// the w of the full-plane family
    pub w: Option<HarmonicPolynomial2D>,
    /// sup |v - fit| / sup |v|
    pub residual: f64,
}

impl BlowupFit {
    pub fn report(&self) -> String {
        let mut s = String::new();
        writeln!(s, "x0 = {:.16e} {:.16e}", self.limit.x0[0], self.limit.x0[1]).unwrap();
        writeln!(s, "order = {}", self.limit.order).unwrap();
        writeln!(s, "final_radius = {:.16e}", self.limit.r).unwrap();
        writeln!(s, "cauchy_gap = {:.16e}", self.cauchy_gap).unwrap();
        writeln!(s, "gaps = {}", self.gaps.iter().map(|g| format!("{g:.6e}")).collect::<Vec<_>>().join(" ")).unwrap();
        writeln!(s, "support = {}", self.support.label()).unwrap();
        if let SupportClass::HalfSpace { from, to } | SupportClass::Sector { from, to } = self.support {
            writeln!(s, "support_from = {from:.16e}").unwrap();
            writeln!(s, "support_to = {to:.16e}").unwrap();
        }
        if let Some(h) = &self.fit {
            writeln!(s, "fit_m = {}", h.m).unwrap();
            writeln!(s, "fit_a = {:.16e} {:.16e}", h.a.re, h.a.im).unwrap();
            writeln!(s, "fit_b = {:.16e} {:.16e}", h.b.re, h.b.im).unwrap();
        }
        if let Some(w) = &self.w {
            writeln!(s, "w_m = {}", w.m).unwrap();
            writeln!(s, "w_a = {:.16e} {:.16e}", w.a.re, w.a.im).unwrap();
            writeln!(s, "w_b = {:.16e} {:.16e}", w.b.re, w.b.im).unwrap();
        }
        writeln!(s, "fit_residual = {:.16e}", self.residual).unwrap();
        s
    }
}

fn least_squares(cols: &[Vec<C>], rhs: &[C]) -> Vec<C> {
    let a = Mat::<C>::from_fn(rhs.len(), cols.len(), |i, j| cols[j][i]);
    let b = Mat::<C>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = a.qr().solve_lstsq(&b);
    (0..cols.len()).map(|j| x[(j, 0)]).collect()
}

fn fit_family(limit: &RescaledField, support: SupportClass) -> (Option<HarmonicPolynomial2D>, Option<HarmonicPolynomial2D>, f64) {
    let d = limit.order.round();
    if (limit.order - d).abs() > 1e-9 || d < 0.0 {
        return (None, None, f64::NAN);
    }
    let d = d as u32;
    let pts: Vec<[f64; 2]> =
        (0..GRID_RADII).flat_map(|i| (0..GRID_ANGLES).map(move |j| grid_point(i, j))).collect();
    let z = |p: [f64; 2]| C::new(p[0], p[1]);
    let (cols, full) = match support {
        SupportClass::Full => {
            if d < 2 {
                return (None, None, f64::NAN);
            }
            let m = d - 2;
            let k = 1.0 / (4.0 * m as f64 + 4.0);
            let mut cols: Vec<Vec<C>> = vec![
                pts.iter().map(|&p| z(p).powu(m) * (p[0] * p[0] + p[1] * p[1]) * k).collect(),
                pts.iter().map(|&p| z(p).conj().powu(m) * (p[0] * p[0] + p[1] * p[1]) * k).collect(),
                pts.iter().map(|&p| z(p).powu(d)).collect(),
                pts.iter().map(|&p| z(p).conj().powu(d)).collect(),
            ];
            if m == 0 {
                // a and b of a constant H are not separately identifiable
                cols.remove(1);
            }
            (cols, Some(m))
        }
        SupportClass::HalfSpace { from, to } | SupportClass::Sector { from, to } => {
            let (from, to) = if matches!(support, SupportClass::HalfSpace { .. }) {
                let mid = 0.5 * (from + to);
                (mid - 0.5 * PI, mid + 0.5 * PI)
            } else {
                (from, to)
            };
            let chi = |p: [f64; 2]| if in_arc(p[1].atan2(p[0]), from, to) { 1.0 } else { 0.0 };
            let cols = vec![
                pts.iter().map(|&p| z(p).powu(d) * chi(p)).collect(),
                pts.iter().map(|&p| z(p).conj().powu(d) * chi(p)).collect(),
            ];
            (cols, None)
        }
    };
    let coef = least_squares(&cols, &limit.values);
    let mut resid: f64 = 0.0;
    for (k, v) in limit.values.iter().enumerate() {
        let f: C = cols.iter().zip(&coef).map(|(c, x)| c[k] * x).sum();
        resid = resid.max((v - f).norm());
    }
    let resid = resid / limit.max_abs();
    match full {
        Some(m) => {
            let (h, w) = if m == 0 {
                let c = coef[0] * 0.5;
                (HarmonicPolynomial2D::new(0, c, c), HarmonicPolynomial2D::new(d, coef[1], coef[2]))
            } else {
                (HarmonicPolynomial2D::new(m, coef[0], coef[1]), HarmonicPolynomial2D::new(d, coef[2], coef[3]))
            };
            (Some(h), Some(w), resid)
        }
        None => (Some(HarmonicPolynomial2D::new(d, coef[0], coef[1])), None, resid),
    }
}

/// Rescales at each radius (strictly decreasing, at least three), measures
/// successive sup-norm gaps, and, when the gaps contract, classifies the
/// support of the last rescaling and fits the matching explicit family.
pub fn blowup_limit_fit(u: &WaveField, x0: [f64; 2], order: f64, radii: &[f64]) -> Result<BlowupFit, BlowupError> {
    if radii.len() < 3 {
        return Err(BlowupError::TooFewRadii(radii.len()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(BlowupError::NotDecreasing);
    }
    let scaled: Vec<RescaledField> =
        radii.iter().map(|&r| rescale_field(u, x0, r, order)).collect::<Result<_, _>>()?;
    let gaps: Vec<f64> = scaled.windows(2).map(|w| w[0].sup_distance(&w[1])).collect();
    let limit = scaled.last().unwrap().clone();
    let scale = limit.max_abs();
    if scale == 0.0 {
        return Err(BlowupError::EmptySupport);
    }
    let tiny = 1e-12 * scale;
    let converged = gaps.windows(2).all(|g| g[1] <= tiny || g[1] < CAUCHY_RATIO * g[0]);
    if !converged {
        return Err(BlowupError::NoConvergence { gaps });
    }
    let support = classify_support(&limit)?;
    let (fit, w, residual) = fit_family(&limit, support);
    let cauchy_gap = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(BlowupFit { limit, gaps, cauchy_gap, support, fit, w, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    /// min over samples of sup_{B_{eps|x|}(x)} |u| / |x|^order
    pub c_eps: f64,
    /// per sample radius, the minimum ratio
    pub per_radius: Vec<(f64, f64)>,
    /// log-log slope of the minimum ratio against 1/|x|: negative when the
    /// ratio decays toward x0
    pub slope: f64,
    pub pass: bool,
}

/// Sample radii used by [`nondegeneracy_check`].
pub const NONDEGENERACY_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// The check fails when the minimum ratio decays toward x0 faster than this
/// log-log slope.
pub const NONDEGENERACY_SLOPE: f64 = -0.1;

pub fn nondegeneracy_check(u: &WaveField, x0: [f64; 2], order: f64, eps: f64) -> Result<NondegeneracyReport, BlowupError> {
    nondegeneracy_check_on(u, x0, order, eps, &NONDEGENERACY_RADII)
}

/// Samples x = x0 + rho e(theta) on 48 angles for each rho, keeps those with
/// u(x) != 0, and takes the sup of |u| over a polar grid of B_{eps rho}(x)
/// aligned with the direction of x - x0.
pub fn nondegeneracy_check_on(
    u: &WaveField,
    x0: [f64; 2],
    order: f64,
    eps: f64,
    radii: &[f64],
) -> Result<NondegeneracyReport, BlowupError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BlowupError::Epsilon(eps));
    }
    const ANGLES: usize = 48;
    let mut centers = Vec::new();
    let mut peak: f64 = 0.0;
    for &rho in radii {
        for k in 0..ANGLES {
            let t = TAU * (k as f64 + 0.5) / ANGLES as f64;
            let x = [x0[0] + rho * t.cos(), x0[1] + rho * t.sin()];
            let v = sample(u, x)?.0.norm();
            peak = peak.max(v);
            centers.push((rho, t, x, v));
        }
    }
    if peak == 0.0 {
        return Err(BlowupError::EmptySupport);
    }
    let mut per_radius: Vec<(f64, f64)> = radii.iter().map(|&r| (r, f64::INFINITY)).collect();
    for (k, &(rho, t, x, v)) in centers.iter().enumerate() {
        if v <= 1e-12 * peak {
            continue;
        }
        let mut sup = v;
        let s = eps * rho;
        for i in 1..=6 {
            for j in 0..24 {
                let a = t + TAU * j as f64 / 24.0;
                let y = [x[0] + s * i as f64 / 6.0 * a.cos(), x[1] + s * i as f64 / 6.0 * a.sin()];
                sup = sup.max(sample(u, y)?.0.norm());
            }
        }
        let slot = &mut per_radius[k / ANGLES];
        slot.1 = slot.1.min(sup / rho.powf(order));
    }
    per_radius.retain(|p| p.1.is_finite());
    if per_radius.is_empty() {
        return Err(BlowupError::EmptySupport);
    }
    let c_eps = per_radius.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let slope = if per_radius.len() >= 2 {
        let pts: Vec<(f64, f64)> = per_radius.iter().map(|&(r, m)| (-r.ln(), m.ln())).collect();
        fit_slope(&pts)
    } else {
        0.0
    };
    let pass = c_eps > 0.0 && slope >= NONDEGENERACY_SLOPE;
    Ok(NondegeneracyReport { c_eps, per_radius, slope, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_disk_domain;
    use crate::oracles::poly::{ComplexRational, MultiPoly};
    use crate::oracles::{fullplane_blowup_solution, halfspace_blowup_solution};
    use crate::solver::FieldRole;
    use proptest::prelude::*;

    fn closed(f: impl Fn([f64; 2]) -> (C, [C; 2]) + Send + Sync + 'static) -> WaveField {
        WaveField::closed_form(FieldRole::ClosedForm, 10.0, f)
    }

    fn quarter_r2() -> WaveField {
        closed(|x| (C::from((x[0] * x[0] + x[1] * x[1]) / 4.0), [C::from(x[0] / 2.0), C::from(x[1] / 2.0)]))
    }

    fn x2_plus() -> WaveField {
        closed(|x| if x[1] > 0.0 { (C::from(x[1]), [C::from(0.0), C::from(1.0)]) } else { Default::default() })
    }

    fn zero() -> WaveField {
        closed(|_| Default::default())
    }

    fn h_x2() -> HarmonicPolynomial2D {
        HarmonicPolynomial2D::new(1, C::new(0.0, -0.5), C::new(0.0, 0.5))
    }

    fn fullplane_x2() -> WaveField {
        // w = x2^3 - 3 x1^2 x2
        let w = &MultiPoly::<ComplexRational>::monomial(2, vec![0, 3], ComplexRational::from_c64(C::from(1.0)))
            + &MultiPoly::monomial(2, vec![2, 1], ComplexRational::from_c64(C::from(-3.0)));
        fullplane_blowup_solution(&h_x2(), &w).unwrap().to_wave_field(10.0)
    }

    #[test]
    fn homogeneous_rescalings_coincide() {
        let u = quarter_r2();
        let a = rescale_field(&u, [0.0, 0.0], 1.0, 2.0).unwrap();
        let b = rescale_field(&u, [0.0, 0.0], 0.125, 2.0).unwrap();
        assert!(a.sup_distance(&b) < 1e-15);
        for i in [0, 17, 63] {
            for j in [0, 40] {
                let p = grid_point(i, j);
                assert_eq!(a.at(i, j), u.value(p).unwrap());
            }
        }
    }

    #[test]
    fn rescaling_is_linear() {
        let u = x2_plus();
        let alpha = C::new(-1.5, 2.0);
        let a = rescale_field(&u.scaled(alpha), [0.1, -0.2], 0.3, 1.0).unwrap();
        let b = rescale_field(&u, [0.1, -0.2], 0.3, 1.0).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p - q * alpha).norm() <= 1e-15 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn decay_exponents_of_model_fields() {
        let radii = [0.4, 0.2, 0.1, 0.05, 0.025];
        let t = decay_trace(&quarter_r2(), [0.0, 0.0], &radii).unwrap();
        assert!((t.exponent - 2.0).abs() < 0.05, "{}", t.exponent);
        assert!(!t.violates(2.0) && t.violates(2.5));
        let t = decay_trace(&x2_plus(), [0.0, 0.0], &radii).unwrap();
        assert!((t.exponent - 1.0).abs() < 0.05, "{}", t.exponent);
        assert!(t.samples.windows(2).all(|w| w[0].0 > w[1].0 && w[0].1 >= w[1].1));
        assert!(t.to_csv().starts_with("r,S_r\n"));
        assert_eq!(decay_trace(&zero(), [0.0, 0.0], &radii), Err(BlowupError::Degenerate));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn decay_exponent_is_scale_invariant(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            prop_assume!(re.hypot(im) > 1e-3);
            let radii = [0.3, 0.1, 0.03];
            let u = x2_plus();
            let a = decay_trace(&u, [0.0, 0.0], &radii).unwrap().exponent;
            let b = decay_trace(&u.scaled(C::new(re, im)), [0.0, 0.0], &radii).unwrap().exponent;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn weiss_is_constant_on_homogeneous_fields(s in 0.1f64..1.0) {
            let h = HarmonicPolynomial2D::new(0, C::from(0.5), C::from(0.5));
            let w = weiss_energy(&quarter_r2(), &h, None, [0.0, 0.0], s, 2).unwrap();
            prop_assert!((w.w - C::from(PI / 8.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn weiss_energy_of_model_solutions() {
        let one = HarmonicPolynomial2D::new(0, C::from(0.5), C::from(0.5));
        for s in [0.25, 0.5, 1.0] {
            let w = weiss_energy(&quarter_r2(), &one, None, [0.0, 0.0], s, 2).unwrap();
            assert!((w.w - C::from(PI / 8.0)).norm() < 1e-6, "{:?}", w);
            assert!((w.w_a - w.w).norm() < 1e-15);
        }
        let u = fullplane_x2();
        let w1 = weiss_energy(&u, &h_x2(), None, [0.0, 0.0], 1.0, 3).unwrap().w;
        for s in [0.25, 0.5] {
            let ws = weiss_energy(&u, &h_x2(), None, [0.0, 0.0], s, 3).unwrap().w;
            assert!((ws - w1).norm() < 1e-6);
        }
        let w0 = weiss_energy(&zero(), &h_x2(), None, [0.0, 0.0], 0.5, 3).unwrap();
        assert_eq!(w0.w, C::from(0.0));
        assert_eq!(
            weiss_energy(&u, &h_x2(), None, [0.0, 0.0], 0.5, 2),
            Err(BlowupError::Order { order: 2, expected: 3 })
        );
        let trace = weiss_trace(&quarter_r2(), &one, None, [0.0, 0.0], &[0.25, 1.0, 0.5], 2).unwrap();
        assert!(trace.samples.windows(2).all(|w| w[0].r > w[1].r));
        assert!((trace.limit - C::from(PI / 8.0)).norm() < 1e-6);
    }

    #[test]
    fn weiss_gap_is_linear_in_r_for_lipschitz_perturbations() {
        // A = Id + |x| B with symmetric B
        let domain = build_disk_domain([0.0, 0.0], 2.0).unwrap();
        let medium = CoefficientField::custom(
            domain,
            1.0,
            |x| {
                let s = x[0].hypot(x[1]);
                [[1.0 + 0.3 * s, 0.2 * s], [0.2 * s, 1.0 - 0.1 * s]]
            },
            |_| 1.0,
        )
        .unwrap();
        let one = HarmonicPolynomial2D::new(0, C::from(0.5), C::from(0.5));
        let mut ratios = Vec::new();
        for r in [0.4, 0.2, 0.1, 0.05] {
            let w = weiss_energy(&quarter_r2(), &one, Some(&medium), [0.0, 0.0], r, 2).unwrap();
            ratios.push((w.w_a - w.w).norm() / r);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 0.0 && hi / lo < 1.01, "{ratios:?}");
    }

    fn noise(x: [f64; 2]) -> C {
        C::new((7.0 * x[0] + 3.0 * x[1]).cos(), 0.5 * (5.0 * x[0] * x[1] - 2.0 * x[1]).sin())
    }

    #[test]
    fn recovers_manufactured_halfspace_solutions() {
        for (m, a, b) in [(1u32, C::new(0.0, -0.5), C::new(0.0, 0.5)), (2, C::new(1.0, 0.3), C::new(-0.4, 0.2)), (3, C::new(0.2, 0.0), C::new(0.0, 1.1))] {
            let h = HarmonicPolynomial2D::new(m, a, b);
            let v = halfspace_blowup_solution(&h, 1.0).unwrap();
            let d = m as f64;
            let vv = v.clone();
            let u = closed(move |x| {
                let r = x[0].hypot(x[1]);
                // value only; gradients are not used by the fit
                (vv.value(x) + noise(x) * r.powf(d + 1.0), [C::from(0.0); 2])
            });
            let radii = [0.01, 0.001, 0.0001];
            let fit = blowup_limit_fit(&u, [0.0, 0.0], d, &radii).unwrap();
            assert!(matches!(fit.support, SupportClass::HalfSpace { .. }), "{:?}", fit.support);
            assert!(fit.support.angle() - PI < HALF_SPACE_TOL);
            let got = fit.fit.unwrap();
            let k = (a - b) * 0.5;
            let scale = k.norm();
            assert!((got.a - k).norm() < 1e-3 * scale && (got.b + k).norm() < 1e-3 * scale, "{got:?}");
            // sup error of the recovered field against v
            let mut err: f64 = 0.0;
            for i in 0..GRID_RADII {
                for j in 0..GRID_ANGLES {
                    let p = grid_point(i, j);
                    let chi = if p[1] >= 0.0 { 1.0 } else { 0.0 };
                    let z = C::new(p[0], p[1]);
                    let f = (got.a * z.powu(m) + got.b * z.conj().powu(m)) * chi;
                    err = err.max((f - v.value(p)).norm());
                }
            }
            assert!(err < 2.0 * radii[2], "{err}");
            assert!(fit.report().contains("support = half-space"));
        }
    }

    #[test]
    fn full_plane_solutions_are_classified_full() {
        let fit = blowup_limit_fit(&fullplane_x2(), [0.0, 0.0], 3.0, &[0.5, 0.25, 0.125]).unwrap();
        assert_eq!(fit.support, SupportClass::Full);
        assert!(fit.residual < 1e-8, "{}", fit.residual);
        let h = fit.fit.unwrap();
        assert!((h.a - h_x2().a).norm() < 1e-8 && (h.b - h_x2().b).norm() < 1e-8);
        let fit = blowup_limit_fit(&quarter_r2(), [0.0, 0.0], 2.0, &[0.5, 0.25, 0.125]).unwrap();
        assert_eq!(fit.support, SupportClass::Full);
        let h = fit.fit.unwrap();
        assert!((h.a - C::from(0.5)).norm() < 1e-8 && fit.residual < 1e-8);
    }

    #[test]
    fn sector_support_is_measured() {
        // harmonic r^{pi/t} sin(pi theta / t) on a sector of opening t
        let t0 = 2.0 * PI / 3.0;
        let u = closed(move |x| {
            let th = x[1].atan2(x[0]).rem_euclid(TAU);
            if th <= t0 {
                let r = x[0].hypot(x[1]);
                (C::from(r * r * (PI * th / t0).sin()), [C::from(0.0); 2])
            } else {
                Default::default()
            }
        });
        let fit = blowup_limit_fit(&u, [0.0, 0.0], 2.0, &[0.5, 0.25, 0.125]).unwrap();
        match fit.support {
            SupportClass::Sector { from, to } => {
                assert!(from.abs() < 1e-3 && (to - t0).abs() < 1e-3, "{from} {to}");
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn wrong_order_is_reported_not_fitted() {
        let err = blowup_limit_fit(&quarter_r2(), [0.0, 0.0], 3.0, &[0.5, 0.25, 0.125]).unwrap_err();
        assert!(matches!(err, BlowupError::NoConvergence { .. }));
        assert_eq!(blowup_limit_fit(&quarter_r2(), [0.0, 0.0], 2.0, &[0.5, 0.25]), Err(BlowupError::TooFewRadii(2)));
        assert_eq!(
            blowup_limit_fit(&quarter_r2(), [0.0, 0.0], 2.0, &[0.5, 0.5, 0.25]),
            Err(BlowupError::NotDecreasing)
        );
    }

    #[test]
    fn nondegeneracy_of_model_fields() {
        let rep = nondegeneracy_check(&quarter_r2(), [0.0, 0.0], 2.0, 0.5).unwrap();
        assert!(rep.pass);
        // the sub-ball grid contains the point 3x/2
        assert!((rep.c_eps - 9.0 / 16.0).abs() < 1e-12, "{}", rep.c_eps);
        assert_eq!(nondegeneracy_check(&zero(), [0.0, 0.0], 2.0, 0.5), Err(BlowupError::EmptySupport));
        assert_eq!(nondegeneracy_check(&zero(), [0.0, 0.0], 2.0, 1.5), Err(BlowupError::Epsilon(1.5)));
        let v = halfspace_blowup_solution(&HarmonicPolynomial2D::new(2, C::from(1.0), C::from(0.0)), 1.0).unwrap();
        for eps in [0.1, 0.25, 0.9] {
            let rep = nondegeneracy_check(&v.to_wave_field(10.0), [0.0, 0.0], 2.0, eps).unwrap();
            assert!(rep.pass && rep.c_eps > 0.0 && rep.slope.abs() < 1e-9, "{rep:?}");
        }
        // vanishing faster than the order fails
        let rep = nondegeneracy_check(&quarter_r2(), [0.0, 0.0], 1.0, 0.5).unwrap();
        assert!(!rep.pass);
    }
}
