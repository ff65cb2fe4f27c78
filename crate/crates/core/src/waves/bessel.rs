//! Bessel functions of the first and second kind and the outgoing Hankel
//! function for integer order and real argument.
//!
//! J_m comes from Miller's backward recurrence normalised by
//! J_0 + 2 sum J_{2k} = 1. Y_0 and Y_1 come from the Neumann expansions in
//! terms of the same J table, and Y_m from the (stable) forward recurrence.

use num_complex::Complex64;
use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1e250;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("argument {0} outside the domain of the function")]
    Domain(f64),
    #[error("overflow evaluating order {order} at x = {x}")]
    Overflow { order: i32, x: f64 },
}

fn sign_for(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// J_0(x), ..., J_mmax(x) for x >= 0.
pub fn bessel_j_table(mmax: usize, x: f64) -> Result<Vec<f64>, BesselError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(BesselError::Domain(x));
    }
    let mut out = vec![0.0; mmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let top = (mmax as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0f64; // J_{k+1}
    let mut cur = 1e-300f64; // J_k
    let mut norm = 0.0f64;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        let idx = k - 1;
        if idx <= mmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    norm += cur;
    if !norm.is_finite() || norm == 0.0 {
        return Err(BesselError::Overflow { order: mmax as i32, x });
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

/// J_m(x) for integer m and x >= 0.
pub fn bessel_j(m: i32, x: f64) -> Result<f64, BesselError> {
    let t = bessel_j_table(m.unsigned_abs() as usize, x)?;
    let v = t[m.unsigned_abs() as usize];
    Ok(if m < 0 { sign_for(m) * v } else { v })
}

/// J_0..J_mmax and Y_0..Y_mmax for x > 0.
pub fn bessel_jy_table(mmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>), BesselError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(BesselError::Domain(x));
    }
    let kmax = (2.0 * (x + 20.0 + (40.0 * x).sqrt())) as usize + 4;
    let big = bessel_j_table(kmax.max(mmax + 1), x)?;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let fpi = std::f64::consts::FRAC_2_PI;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1usize;
    while 2 * k + 1 < big.len() {
        let sg = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sg * big[2 * k] / k as f64;
        s1 += sg * (big[2 * k - 1] - big[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = fpi * (lg * big[0] - 2.0 * s0);
    let y1 = -fpi * big[0] / x + fpi * lg * big[1] + fpi * s1;
    let mut y = vec![0.0; mmax + 1];
    y[0] = y0;
    if mmax >= 1 {
        y[1] = y1;
    }
    for m in 1..mmax {
        y[m + 1] = 2.0 * m as f64 / x * y[m] - y[m - 1];
        if !y[m + 1].is_finite() {
            return Err(BesselError::Overflow { order: (m + 1) as i32, x });
        }
    }
    Ok((big[..=mmax].to_vec(), y))
}

/// Y_m(x) for integer m and x > 0.
pub fn bessel_y(m: i32, x: f64) -> Result<f64, BesselError> {
    let (_, y) = bessel_jy_table(m.unsigned_abs() as usize, x)?;
    let v = y[m.unsigned_abs() as usize];
    Ok(if m < 0 { sign_for(m) * v } else { v })
}

/// Outgoing Hankel function H_m^(1)(x) = J_m(x) + i Y_m(x).
pub fn hankel1(m: i32, x: f64) -> Result<Complex64, BesselError> {
    let (j, y) = bessel_jy_table(m.unsigned_abs() as usize, x)?;
    let a = m.unsigned_abs() as usize;
    let s = if m < 0 { sign_for(m) } else { 1.0 };
    Ok(Complex64::new(s * j[a], s * y[a]))
}

/// H_m^(1)(x) for 0..=mmax together with derivatives, via
/// H_m' = (H_{m-1} - H_{m+1}) / 2.
pub fn hankel1_table(mmax: usize, x: f64) -> Result<(Vec<Complex64>, Vec<Complex64>), BesselError> {
    let (j, y) = bessel_jy_table(mmax + 1, x)?;
    let h: Vec<Complex64> = j.iter().zip(&y).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let mut d = Vec::with_capacity(mmax + 1);
    d.push(-h[1]);
    for m in 1..=mmax {
        d.push(0.5 * (h[m - 1] - h[m + 1]));
    }
    Ok((h[..=mmax].to_vec(), d))
}

/// J_m'(x) for integer m.
pub fn bessel_j_derivative(m: i32, x: f64) -> Result<f64, BesselError> {
    Ok(0.5 * (bessel_j(m - 1, x)? - bessel_j(m + 1, x)?))
}

/// Plain power series sum_k (-1)^k (x/2)^{2k+m} / (k! (k+m)!), truncated at
/// `terms`. Kept as an independent reference for small arguments.
pub fn bessel_j_series(m: u32, x: f64, terms: usize) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(m as i32) / (1..=m).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..terms {
        term *= -half * half / (k as f64 * (k as f64 + m as f64));
        sum += term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for m in 1..10 {
            assert_eq!(bessel_j(m, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6, 0.088_256_964_215_676_96),
            (1, 1.0, 0.440_050_585_744_933_5, -0.781_212_821_300_288_7),
            (0, 10.0, -0.245_935_764_451_348_3, 0.055_671_167_283_599_39),
        ];
        for (m, x, j, y) in cases {
            assert!((bessel_j(m, x).unwrap() - j).abs() < 1e-14);
            assert!((bessel_y(m, x).unwrap() - y).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_of_j0_against_series_root() {
        // bisection on the series reference
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel_j_series(0, lo, 30) * bessel_j_series(0, mid, 30) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 2.404_825_557_695_773).abs() < 1e-12);
        assert!(bessel_j(0, 2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn agrees_with_series_for_small_arguments() {
        for m in 0..15u32 {
            for &x in &[0.01, 0.3, 1.0, 2.5, 5.0] {
                let s = bessel_j_series(m, x, 60);
                let v = bessel_j(m as i32, x).unwrap();
                assert!((s - v).abs() <= 1e-13 * s.abs().max(1e-300) + 1e-300, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn wronskian() {
        for &x in &[0.5, 1.0, 5.0] {
            for m in 0..12 {
                let j = bessel_j(m, x).unwrap();
                let jp = bessel_j_derivative(m, x).unwrap();
                let y = bessel_y(m, x).unwrap();
                let yp = 0.5 * (bessel_y(m - 1, x).unwrap() - bessel_y(m + 1, x).unwrap());
                let w = j * yp - jp * y;
                let target = 2.0 / (std::f64::consts::PI * x);
                assert!((w - target).abs() < 1e-10 * target.max(y.abs() * jp.abs()), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn hankel_large_argument() {
        let h = hankel1(0, 200.0).unwrap();
        let target = (2.0 / (std::f64::consts::PI * 200.0)).sqrt();
        assert!((h.norm() - target).abs() / target < 1e-2);
        assert!(hankel1(0, 1.0).unwrap().im > 0.0);
    }

    #[test]
    fn negative_orders_and_errors() {
        assert!((bessel_j(-3, 2.0).unwrap() + bessel_j(3, 2.0).unwrap()).abs() < 1e-16);
        assert!((bessel_y(-2, 2.0).unwrap() - bessel_y(2, 2.0).unwrap()).abs() < 1e-16);
        assert!(matches!(hankel1(0, 0.0), Err(BesselError::Domain(_))));
        assert!(matches!(bessel_j(0, -1.0), Err(BesselError::Domain(_))));
        assert!(matches!(bessel_y(400, 1e-3), Err(BesselError::Overflow { .. })));
    }

    #[test]
    fn hankel_table_derivative_matches_difference() {
        let x = 3.7;
        let (h, d) = hankel1_table(10, x).unwrap();
        let eps = 1e-6;
        let (hp, _) = hankel1_table(10, x + eps).unwrap();
        let (hm, _) = hankel1_table(10, x - eps).unwrap();
        for m in 0..=10 {
            let fd = (hp[m] - hm[m]) / (2.0 * eps);
            assert!((fd - d[m]).norm() < 1e-7 * (1.0 + h[m].norm()));
        }
    }

    proptest! {
        #[test]
        fn three_term_recurrence(m in 1i32..20, x in 0.1f64..50.0) {
            let l = bessel_j(m - 1, x).unwrap() + bessel_j(m + 1, x).unwrap();
            let r = 2.0 * m as f64 / x * bessel_j(m, x).unwrap();
            prop_assert!((l - r).abs() < 1e-10);
        }

        #[test]
        fn large_argument_accuracy(x in 12.0f64..100.0) {
            // Hankel modulus approaches sqrt(2/(pi x)) with a relative
            // correction of order 1/(8x^2) for m = 0.
            let h = hankel1(0, x).unwrap();
            let target = (2.0 / (std::f64::consts::PI * x)).sqrt();
            prop_assert!(((h.norm() - target) / target).abs() < 1.0 / (x * x));
        }
    }
}
