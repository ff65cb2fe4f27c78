//! The 2x2 systems on (a, b) that decide whether a sector of angle theta0
//! carries a nonzero homogeneous blowup of degree m.

use num_complex::Complex64 as C;

type M2 = [[C; 2]; 2];

fn det(m: &M2) -> C {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Dirichlet and Bernoulli conditions at theta = theta0 on the antipodal
/// extension of the half-plane solution, with the printed normalization
/// v = c0 (a - b) r^m (e^{i m theta} - e^{-i m theta}).
pub fn sector_system(m: u32, theta0: f64) -> M2 {
    let e = C::from_polar(1.0, m as f64 * theta0);
    let ei = e.conj();
    [[e - ei, -e + ei], [ei, -e]]
}

/// Same conditions with the constant c0 / 2 fixed by the distributional
/// equation: (a - b)(e - e^-1) = 0 and (a + b)(e^-1 - e) = 0.
pub fn corrected_sector_system(m: u32, theta0: f64) -> M2 {
    let e = C::from_polar(1.0, m as f64 * theta0);
    let ei = e.conj();
    [[e - ei, -e + ei], [ei - e, ei - e]]
}

/// Determinant of [`sector_system`], which is real and equals
/// 4 sin^2(m theta0).
pub fn sector_system_determinant(m: u32, theta0: f64) -> f64 {
    det(&sector_system(m, theta0)).re
}

pub fn corrected_sector_determinant(m: u32, theta0: f64) -> f64 {
    det(&corrected_sector_system(m, theta0)).re
}

/// Dimension of the real harmonic H = r^m (alpha cos m theta + beta sin m theta)
/// with d_theta H = 0 on theta = 0 and theta = theta0, computed as the nullity of
/// [[0, m], [-m sin m theta0, m cos m theta0]] (alpha, beta)^T = 0 with a
/// relative singular-value threshold of 1e-12.
pub fn sector_neumann_kernel_dim(m: u32, theta0: f64) -> usize {
    let mf = m as f64;
    let s = (mf * theta0).sin();
    let c = (mf * theta0).cos();
    let a = [[0.0, mf], [-mf * s, mf * c]];
    // singular values of a 2x2 real matrix
    let fro2 = a.iter().flatten().map(|x| x * x).sum::<f64>();
    let d = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs();
    let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0).sqrt();
    let smax = (0.5 * (fro2 + disc)).sqrt();
    let smin = if smax > 0.0 { d / smax } else { 0.0 };
    if smax == 0.0 {
        2
    } else if smin < 1e-12 * smax {
        1
    } else {
        0
    }
}
