use num_complex::Complex64;

use crate::oracles::poly::{ComplexRational, MultiPoly};

/// a z^m + b conj(z)^m, i.e. a r^m e^{i m theta} + b r^m e^{-i m theta}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPolynomial2D {
    pub m: u32,
    pub a: Complex64,
    pub b: Complex64,
}

impl HarmonicPolynomial2D {
    pub fn new(m: u32, a: Complex64, b: Complex64) -> Self {
        HarmonicPolynomial2D { m, a, b }
    }

    /// Real harmonic polynomial r^m (alpha cos m theta + beta sin m theta).
    pub fn real_trig(m: u32, alpha: f64, beta: f64) -> Self {
        let a = Complex64::new(alpha, -beta) * 0.5;
        HarmonicPolynomial2D { m, a, b: a.conj() }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        (self.b - self.a.conj()).norm() <= tol
    }

    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        let z = Complex64::new(x[0], x[1]);
        self.a * z.powu(self.m) + self.b * z.conj().powu(self.m)
    }

    /// Gradient (d/dx1, d/dx2).
    pub fn grad(&self, x: [f64; 2]) -> [Complex64; 2] {
        if self.m == 0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let z = Complex64::new(x[0], x[1]);
        let m = self.m as f64;
        let p = self.a * m * z.powu(self.m - 1);
        let q = self.b * m * z.conj().powu(self.m - 1);
        [p + q, Complex64::i() * (p - q)]
    }

    /// Angular derivative d/dtheta at x.
    pub fn d_theta(&self, x: [f64; 2]) -> Complex64 {
        let g = self.grad(x);
        g[1] * x[0] - g[0] * x[1]
    }

    /// Exact expansion in monomials x1^i x2^j. Floating coefficients are
    /// converted exactly to rationals.
    pub fn to_multipoly(&self) -> MultiPoly<ComplexRational> {
        let m = self.m;
        let z = MultiPoly::<ComplexRational>::linear_complex(2, [(1.0, 0.0), (0.0, 1.0)]);
        let zb = MultiPoly::<ComplexRational>::linear_complex(2, [(1.0, 0.0), (0.0, -1.0)]);
        let ca = MultiPoly::constant(2, ComplexRational::from_c64(self.a));
        let cb = MultiPoly::constant(2, ComplexRational::from_c64(self.b));
        &(&ca * &z.pow(m)) + &(&cb * &zb.pow(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_trig_roundtrip() {
        let h = HarmonicPolynomial2D::real_trig(3, 0.7, -1.2);
        assert!(h.is_real(1e-15));
        let x = [0.3f64, 0.4];
        let r = 0.5f64;
        let t = x[1].atan2(x[0]);
        let want = r.powi(3) * (0.7 * (3.0 * t).cos() - 1.2 * (3.0 * t).sin());
        assert!((h.eval(x).re - want).abs() < 1e-14);
        assert!(h.eval(x).im.abs() < 1e-15);
    }

    #[test]
    fn exact_expansion_is_harmonic() {
        for m in 0..7 {
            let h = HarmonicPolynomial2D::new(m, Complex64::new(0.3, -1.1), Complex64::new(2.0, 0.25));
            let p = h.to_multipoly();
            assert!(p.laplacian().is_zero());
            let x = [0.6, -0.35];
            assert!((p.eval_c64(&x) - h.eval(x)).norm() < 1e-13);
        }
    }

    #[test]
    fn gradient_and_angular_derivative() {
        let h = HarmonicPolynomial2D::new(4, Complex64::new(0.3, -1.1), Complex64::new(2.0, 0.25));
        let x = [0.45, 0.2];
        let e = 1e-6;
        let g = h.grad(x);
        let fx = (h.eval([x[0] + e, x[1]]) - h.eval([x[0] - e, x[1]])) / (2.0 * e);
        let fy = (h.eval([x[0], x[1] + e]) - h.eval([x[0], x[1] - e])) / (2.0 * e);
        assert!((g[0] - fx).norm() < 1e-8 && (g[1] - fy).norm() < 1e-8);
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let t = x[1].atan2(x[0]);
        let at = |s: f64| h.eval([r * s.cos(), r * s.sin()]);
        let ft = (at(t + e) - at(t - e)) / (2.0 * e);
        assert!((h.d_theta(x) - ft).norm() < 1e-8);
    }
}
