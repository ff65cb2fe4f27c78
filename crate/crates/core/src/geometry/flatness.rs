use thiserror::Error;

use super::domain::DomainSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlatnessError {
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("direction must be a unit vector")]
    Direction,
}

/// Smallest radius considered resolvable by the boundary sampling.
pub const FLATNESS_H_MIN: f64 = 1e-9;

/// Largest r such that every sampled boundary point within distance r of
/// the corner lies in the slab |(x - x0).e| <= delta r. Radii are bounded
/// by the distance to boundary pieces that do not touch the corner (or by
/// the boundary diameter if every piece touches it). Returns 0 if no such
/// r above [`FLATNESS_H_MIN`] exists.
pub fn weak_flatness_check(spec: &DomainSpec, e: [f64; 2], delta: f64) -> Result<f64, FlatnessError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FlatnessError::Delta(delta));
    }
    if ((e[0] * e[0] + e[1] * e[1]).sqrt() - 1.0).abs() > 1e-12 {
        return Err(FlatnessError::Direction);
    }
    let x0 = spec.corner_point;
    let d = |p: [f64; 2]| ((p[0] - x0[0]).powi(2) + (p[1] - x0[1]).powi(2)).sqrt();
    const M: usize = 20_000;
    let mut bad: Vec<(f64, f64)> = Vec::new();
    let mut r_max = f64::INFINITY;
    let mut diameter: f64 = 0.0;
    let mut any_far = false;
    for piece in &spec.pieces {
        let at0 = d(piece.point(0.0)) < 1e-14;
        let at1 = d(piece.point(1.0)) < 1e-14;
        for i in 0..=M {
            let u = i as f64 / M as f64;
            let t = match (at0, at1) {
                (true, false) => u.powi(6),
                (false, true) => 1.0 - (1.0 - u).powi(6),
                (true, true) => {
                    if u < 0.5 {
                        0.5 * (2.0 * u).powi(6)
                    } else {
                        1.0 - 0.5 * (2.0 * (1.0 - u)).powi(6)
                    }
                }
                _ => u,
            };
            let p = piece.point(t);
            let dist = d(p);
            diameter = diameter.max(dist);
            if !at0 && !at1 {
                r_max = r_max.min(dist);
                any_far = true;
            }
            if dist == 0.0 {
                continue;
            }
            let v = ((p[0] - x0[0]) * e[0] + (p[1] - x0[1]) * e[1]).abs();
            if v / delta > dist {
                bad.push((dist, v / delta));
            }
        }
    }
    if !any_far {
        r_max = diameter;
    }
    bad.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merged half-open intervals [a, b)
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in bad {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let mut r = r_max;
    for &(a, b) in merged.iter().rev() {
        if a <= r && r < b {
            r = a;
        }
    }
    Ok(if r < FLATNESS_H_MIN { 0.0 } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::*;
    use std::f64::consts::PI;

    #[test]
    fn half_plane_is_flat_at_every_scale() {
        let s = build_sector_domain(PI, 1.0).unwrap();
        for delta in [0.01, 0.1, 0.5] {
            let r = weak_flatness_check(&s, [0.0, 1.0], delta).unwrap();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn genuine_corner_is_not_flat() {
        let s = build_sector_domain(3.0 * PI / 4.0, 1.0).unwrap();
        for k in 0..16 {
            let a = k as f64 * PI / 8.0;
            assert_eq!(weak_flatness_check(&s, [a.cos(), a.sin()], 0.1).unwrap(), 0.0);
        }
    }

    #[test]
    fn power_graph_flatness_radius() {
        let g = build_graph_corner_domain([0.0, 0.0], 1.0, 1.0, 1.5, 0.5).unwrap();
        let r = weak_flatness_check(&g, [0.0, 1.0], 0.1).unwrap();
        // boundary point at distance r with x^{3/2} = r / 10 and x^2 + x^3 = r^2
        let exact = 0.01 / 0.99f64.powf(1.5);
        assert!((r - exact).abs() < 1e-4, "r = {r}");
    }

    #[test]
    fn invalid_inputs() {
        let s = build_sector_domain(PI, 1.0).unwrap();
        assert_eq!(weak_flatness_check(&s, [0.0, 1.0], 1.0), Err(FlatnessError::Delta(1.0)));
        assert_eq!(weak_flatness_check(&s, [0.0, 2.0], 0.5), Err(FlatnessError::Direction));
    }
}
