use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("corner angle {0} outside (0, 2pi)")]
    CornerAngle(f64),
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
}

/// One smooth arc of the boundary, parametrized over t in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Segment { a: [f64; 2], b: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start: f64, end: f64 },
    /// x2 = g(x1) relative to `origin`, with g = left |x1|^p for x1 < 0 and
    /// right |x1|^p for x1 > 0.
    Graph { origin: [f64; 2], from: f64, to: f64, left: f64, right: f64, power: f64 },
    /// r(phi) = r0 (1 + eps cos(lobes phi)) around `center`.
    Polar { center: [f64; 2], r0: f64, eps: f64, lobes: u32, from: f64, to: f64 },
}

fn graph_g(x: f64, left: f64, right: f64, p: f64) -> (f64, f64) {
    graph_g_side(x, left, right, p, x < 0.0)
}

/// Graph value and one-sided slope; `left_side` selects the branch at 0.
fn graph_g_side(x: f64, left: f64, right: f64, p: f64, left_side: bool) -> (f64, f64) {
    let a = x.abs();
    let slope = |c: f64| if a == 0.0 { if p == 1.0 { c } else { 0.0 } } else { c * p * a.powf(p - 1.0) };
    if left_side {
        (left * a.powf(p), -slope(left))
    } else {
        (right * a.powf(p), slope(right))
    }
}

impl Piece {
    pub fn point(&self, t: f64) -> [f64; 2] {
        match *self {
            Piece::Segment { a, b } => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
            Piece::Arc { center, radius, start, end } => {
                let s = start + t * (end - start);
                [center[0] + radius * s.cos(), center[1] + radius * s.sin()]
            }
            Piece::Graph { origin, from, to, left, right, power } => {
                let x = from + t * (to - from);
                let (g, _) = graph_g(x, left, right, power);
                [origin[0] + x, origin[1] + g]
            }
            Piece::Polar { center, r0, eps, lobes, from, to } => {
                let f = from + t * (to - from);
                let r = r0 * (1.0 + eps * (lobes as f64 * f).cos());
                [center[0] + r * f.cos(), center[1] + r * f.sin()]
            }
        }
    }

    /// d point / dt.
    pub fn tangent(&self, t: f64) -> [f64; 2] {
        match *self {
            Piece::Segment { a, b } => [b[0] - a[0], b[1] - a[1]],
            Piece::Arc { radius, start, end, .. } => {
                let s = start + t * (end - start);
                let d = end - start;
                [-radius * d * s.sin(), radius * d * s.cos()]
            }
            Piece::Graph { from, to, left, right, power, .. } => {
                let x = from + t * (to - from);
                let (_, gp) = graph_g_side(x, left, right, power, to <= 0.0);
                [to - from, gp * (to - from)]
            }
            Piece::Polar { r0, eps, lobes, from, to, .. } => {
                let f = from + t * (to - from);
                let k = lobes as f64;
                let r = r0 * (1.0 + eps * (k * f).cos());
                let rp = -r0 * eps * k * (k * f).sin();
                let d = to - from;
                [d * (rp * f.cos() - r * f.sin()), d * (rp * f.sin() + r * f.cos())]
            }
        }
    }

    /// Unit normal pointing to the left of the direction of travel; for a
    /// counterclockwise boundary this points into the domain.
    pub fn inward_normal(&self, t: f64) -> [f64; 2] {
        let d = self.tangent(t);
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [-d[1] / n, d[0] / n]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DomainKind {
    /// Pie slice between the rays at angles `rotation` and
    /// `rotation + corner_angle` from the corner.
    Sector { radius: f64, rotation: f64 },
    Disk { center: [f64; 2], radius: f64 },
    /// Region above a two-sided power graph through the corner, closed by a
    /// box of half-width `half_width`.
    GraphCorner { left: f64, right: f64, power: f64, half_width: f64 },
    /// Smooth star-shaped domain r(phi) = r0 (1 + eps cos(lobes phi)).
    Star { center: [f64; 2], r0: f64, eps: f64, lobes: u32 },
}

/// A bounded scatterer D with a marked boundary point x0 where corner
/// diagnostics are run. The boundary is a closed counterclockwise chain of
/// smooth pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub corner_point: [f64; 2],
    pub corner_angle: f64,
    pub outer_radius: f64,
    pub pieces: Vec<Piece>,
}

pub fn build_sector_domain(theta0: f64, radius: f64) -> Result<DomainSpec, DomainError> {
    build_sector_domain_at(theta0, radius, [0.0, 0.0], 0.0)
}

pub fn build_sector_domain_at(
    theta0: f64,
    radius: f64,
    corner: [f64; 2],
    rotation: f64,
) -> Result<DomainSpec, DomainError> {
    if !(theta0 > 0.0 && theta0 < TAU) {
        return Err(DomainError::CornerAngle(theta0));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DomainError::Parameter { name: "radius", value: radius });
    }
    let p = |a: f64| [corner[0] + radius * a.cos(), corner[1] + radius * a.sin()];
    let pieces = vec![
        Piece::Segment { a: corner, b: p(rotation) },
        Piece::Arc { center: corner, radius, start: rotation, end: rotation + theta0 },
        Piece::Segment { a: p(rotation + theta0), b: corner },
    ];
    let outer = (corner[0] * corner[0] + corner[1] * corner[1]).sqrt() + radius;
    Ok(DomainSpec {
        kind: DomainKind::Sector { radius, rotation },
        corner_point: corner,
        corner_angle: theta0,
        outer_radius: outer,
        pieces,
    })
}

pub fn build_disk_domain(center: [f64; 2], radius: f64) -> Result<DomainSpec, DomainError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DomainError::Parameter { name: "radius", value: radius });
    }
    Ok(DomainSpec {
        kind: DomainKind::Disk { center, radius },
        corner_point: [center[0] + radius, center[1]],
        corner_angle: PI,
        outer_radius: (center[0] * center[0] + center[1] * center[1]).sqrt() + radius,
        pieces: vec![Piece::Arc { center, radius, start: 0.0, end: TAU }],
    })
}

pub fn build_star_domain(center: [f64; 2], r0: f64, eps: f64, lobes: u32) -> Result<DomainSpec, DomainError> {
    if !(r0 > 0.0) {
        return Err(DomainError::Parameter { name: "r0", value: r0 });
    }
    if !(eps.abs() < 1.0) {
        return Err(DomainError::Parameter { name: "eps", value: eps });
    }
    let k = lobes as f64;
    // simple (star-shaped) as long as the polar curve stays positive
    let c = (center[0] * center[0] + center[1] * center[1]).sqrt();
    let piece = Piece::Polar { center, r0, eps, lobes, from: 0.0, to: TAU };
    // the first derivative condition r^2 + r'^2 > 0 always holds since r > 0
    let _ = k;
    Ok(DomainSpec {
        kind: DomainKind::Star { center, r0, eps, lobes },
        corner_point: piece.point(0.0),
        corner_angle: PI,
        outer_radius: c + r0 * (1.0 + eps.abs()),
        pieces: vec![piece],
    })
}

/// Region above x2 = g(x1) with a corner (power 1) or a cusp-free
/// C^1 point (power > 1) at `corner`.
pub fn build_graph_corner_domain(
    corner: [f64; 2],
    left: f64,
    right: f64,
    power: f64,
    half_width: f64,
) -> Result<DomainSpec, DomainError> {
    if !(power >= 1.0) {
        return Err(DomainError::Parameter { name: "power", value: power });
    }
    if !(half_width > 0.0) {
        return Err(DomainError::Parameter { name: "half_width", value: half_width });
    }
    let l = half_width;
    let (gl, _) = graph_g(-l, left, right, power);
    let (gr, _) = graph_g(l, left, right, power);
    let top = gl.max(gr) + l;
    let at = |x: f64, y: f64| [corner[0] + x, corner[1] + y];
    // split at the corner so that the chain starts and ends there
    let pieces = vec![
        Piece::Graph { origin: corner, from: 0.0, to: l, left, right, power },
        Piece::Segment { a: at(l, gr), b: at(l, top) },
        Piece::Segment { a: at(l, top), b: at(-l, top) },
        Piece::Segment { a: at(-l, top), b: at(-l, gl) },
        Piece::Graph { origin: corner, from: -l, to: 0.0, left, right, power },
    ];
    let angle = if power == 1.0 { PI - left.atan() - right.atan() } else { PI };
    if !(angle > 0.0 && angle < TAU) {
        return Err(DomainError::CornerAngle(angle));
    }
    let outer = pieces
        .iter()
        .flat_map(|p| (0..=64).map(move |i| p.point(i as f64 / 64.0)))
        .map(|q| (q[0] * q[0] + q[1] * q[1]).sqrt())
        .fold(0.0, f64::max);
    Ok(DomainSpec {
        kind: DomainKind::GraphCorner { left, right, power, half_width },
        corner_point: corner,
        corner_angle: angle,
        outer_radius: outer,
        pieces,
    })
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

impl DomainSpec {
    /// False for a smooth boundary point (angle pi).
    pub fn is_corner(&self) -> bool {
        (self.corner_angle - PI).abs() > 1e-12
    }

    /// Whether the mesh should be graded toward the corner point.
    pub fn graded(&self) -> bool {
        matches!(self.kind, DomainKind::Sector { .. } | DomainKind::GraphCorner { .. }) && self.is_corner()
            || matches!(self.kind, DomainKind::GraphCorner { .. })
    }

    /// Characteristic size of the scatterer used for mesh sanity checks.
    pub fn feature_size(&self) -> f64 {
        match self.kind {
            DomainKind::Sector { radius, .. } => radius,
            DomainKind::Disk { radius, .. } => radius,
            DomainKind::GraphCorner { half_width, .. } => half_width,
            DomainKind::Star { r0, eps, .. } => r0 * (1.0 - eps.abs()),
        }
    }

    /// Closed-set membership, exact for every kind.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self.kind {
            DomainKind::Sector { radius, rotation } => {
                let d = [x[0] - self.corner_point[0], x[1] - self.corner_point[1]];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r > radius {
                    return false;
                }
                if r == 0.0 {
                    return true;
                }
                wrap(d[1].atan2(d[0]) - rotation) <= self.corner_angle
                    || wrap(d[1].atan2(d[0]) - rotation) >= TAU - 1e-15
            }
            DomainKind::Disk { center, radius } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                d[0] * d[0] + d[1] * d[1] <= radius * radius
            }
            DomainKind::Star { center, r0, eps, lobes } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let f = d[1].atan2(d[0]);
                let r = r0 * (1.0 + eps * (lobes as f64 * f).cos());
                d[0] * d[0] + d[1] * d[1] <= r * r
            }
            DomainKind::GraphCorner { left, right, power, half_width } => {
                let d = [x[0] - self.corner_point[0], x[1] - self.corner_point[1]];
                if d[0].abs() > half_width {
                    return false;
                }
                let (gl, _) = graph_g(-half_width, left, right, power);
                let (gr, _) = graph_g(half_width, left, right, power);
                let (g, _) = graph_g(d[0], left, right, power);
                d[1] >= g && d[1] <= gl.max(gr) + half_width
            }
        }
    }

    /// Directions of the two boundary arcs leaving the corner point, as
    /// angles (theta_minus, theta_plus) with the domain between them
    /// counterclockwise.
    pub fn corner_rays(&self) -> (f64, f64) {
        let first = &self.pieces[0];
        let last = &self.pieces[self.pieces.len() - 1];
        let (a, b) = match self.kind {
            DomainKind::Disk { .. } | DomainKind::Star { .. } => {
                let t = first.tangent(0.0);
                let a = t[1].atan2(t[0]);
                (a, a + PI)
            }
            _ => {
                let t0 = first.tangent(0.0);
                let t1 = last.tangent(1.0);
                (t0[1].atan2(t0[0]), (-t1[1]).atan2(-t1[0]))
            }
        };
        let a = wrap(a);
        let mut b = wrap(b);
        if b <= a {
            b += TAU;
        }
        (a, b)
    }

    /// Boundary sample points, `per_piece` intervals per piece (piece end
    /// points included once).
    pub fn sample_boundary(&self, per_piece: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for p in &self.pieces {
            for i in 0..per_piece {
                out.push(p.point(i as f64 / per_piece as f64));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_construction() {
        let s = build_sector_domain(3.0 * PI / 4.0, 1.0).unwrap();
        assert!(s.is_corner());
        let (a, b) = s.corner_rays();
        assert!(a.abs() < 1e-15 && (b - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!(s.contains([0.5, 0.01]));
        assert!(!s.contains([0.5, -0.01]));
        assert!(s.contains([-0.3, 0.31]));
        assert!(!s.contains([-0.3, 0.29]));
        assert!(!s.contains([0.0, 1.01]));
        let h = build_sector_domain(PI, 1.0).unwrap();
        assert!(!h.is_corner());
        assert!(matches!(build_sector_domain(0.0, 1.0), Err(DomainError::CornerAngle(_))));
        assert!(matches!(build_sector_domain(TAU, 1.0), Err(DomainError::CornerAngle(_))));
    }

    #[test]
    fn pieces_chain_and_normals_point_inside() {
        let specs = vec![
            build_sector_domain(3.0 * PI / 4.0, 1.0).unwrap(),
            build_sector_domain(5.0, 1.0).unwrap(),
            build_disk_domain([0.1, 0.0], 0.5).unwrap(),
            build_star_domain([0.0, 0.0], 0.5, 0.15, 5).unwrap(),
            build_graph_corner_domain([0.0, 0.0], 0.3, 0.5, 1.0, 0.5).unwrap(),
        ];
        for s in specs {
            let n = s.pieces.len();
            for i in 0..n {
                let e = s.pieces[i].point(1.0);
                let b = s.pieces[(i + 1) % n].point(0.0);
                assert!((e[0] - b[0]).abs() < 1e-12 && (e[1] - b[1]).abs() < 1e-12);
                for k in 1..8 {
                    let t = k as f64 / 8.0;
                    let p = s.pieces[i].point(t);
                    let nu = s.pieces[i].inward_normal(t);
                    let d = 1e-6;
                    assert!(s.contains([p[0] + d * nu[0], p[1] + d * nu[1]]));
                    assert!(!s.contains([p[0] - d * nu[0], p[1] - d * nu[1]]));
                }
            }
            let c = s.corner_point;
            assert!(s.sample_boundary(4).iter().any(|q| q == &c));
        }
    }

    #[test]
    fn tangents_match_differences() {
        let s = build_star_domain([0.1, -0.2], 0.5, 0.2, 3).unwrap();
        let g = build_graph_corner_domain([0.0, 0.0], 1.0, 1.0, 1.5, 0.5).unwrap();
        for p in s.pieces.iter().chain(g.pieces.iter()) {
            for k in 1..10 {
                let t = k as f64 / 10.0 + 0.01;
                let e = 1e-6;
                let a = p.point(t + e);
                let b = p.point(t - e);
                let d = p.tangent(t);
                assert!(((a[0] - b[0]) / (2.0 * e) - d[0]).abs() < 1e-6 * (1.0 + d[0].abs()));
                assert!(((a[1] - b[1]) / (2.0 * e) - d[1]).abs() < 1e-6 * (1.0 + d[1].abs()));
            }
        }
    }

    #[test]
    fn graph_corner_angle() {
        let g = build_graph_corner_domain([0.0, 0.0], 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!((g.corner_angle - PI / 2.0).abs() < 1e-15);
        let (a, b) = g.corner_rays();
        assert!((b - a - PI / 2.0).abs() < 1e-15);
        let smooth = build_graph_corner_domain([0.0, 0.0], 1.0, 1.0, 1.5, 0.5).unwrap();
        assert!(!smooth.is_corner());
    }
}
