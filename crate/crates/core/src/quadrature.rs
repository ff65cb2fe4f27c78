//! Quadrature rules used throughout: Gauss-Legendre on intervals, a
//! degree-5 rule on triangles, and a simple adaptive driver.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Adaptive Gauss quadrature: compares one panel against two halves.
/// Returns `None` if the depth limit is reached before the tolerance.
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Option<f64> {
    let g = GaussLegendre::new(16);
    let whole = g.integrate(a, b, &mut *f);
    adaptive_rec(f, &g, a, b, whole, tol, 80)
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    g: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let left = g.integrate(a, m, &mut *f);
    let right = g.integrate(m, b, &mut *f);
    let err = (left + right - whole).abs();
    if err <= tol.max(1e-15 * (left + right).abs()) || (b - a) < 1e-14 * (1.0 + a.abs()) {
        return Some(left + right);
    }
    if depth == 0 {
        return None;
    }
    let l = adaptive_rec(f, g, a, m, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_rec(f, g, m, b, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Seven-point degree-5 rule on the reference triangle (0,0),(1,0),(0,1).
/// Barycentric coordinates and weights summing to 1.
pub const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_34;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_18;
    const W2: f64 = 0.125_939_180_544_827_15;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Edge-midpoint rule on a triangle, exact for quadratics.
pub const TRI3_MID: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in 1..20 {
            let g = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let exact = (2.0f64.powi(deg as i32 + 1) - 0.0) / (deg as f64 + 1.0);
                let got = g.integrate(0.0, 2.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-12 * exact.max(1.0), "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two() {
        let g = GaussLegendre::new(32);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        // integral over the reference triangle of x^p y^q = p! q! / (p+q+2)!
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        for p in 0..=5u32 {
            for q in 0..=(5 - p) {
                let exact = fact(p) * fact(q) / fact(p + q + 2);
                let got: f64 = TRI7
                    .iter()
                    .map(|(l, w)| 0.5 * w * l[1].powi(p as i32) * l[2].powi(q as i32))
                    .sum();
                assert!((got - exact).abs() < 1e-15, "p={p} q={q}");
                if p + q <= 2 {
                    let got3: f64 = TRI3_MID
                        .iter()
                        .map(|(l, w)| 0.5 * w * l[1].powi(p as i32) * l[2].powi(q as i32))
                        .sum();
                    assert!((got3 - exact).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let got = adaptive(&mut |x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-12).unwrap();
        assert!((got - 4.0 / 3.0).abs() < 1e-10);
    }
}
