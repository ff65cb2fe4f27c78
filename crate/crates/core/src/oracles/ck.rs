//! Polynomial Cauchy–Kowalevski solutions in a half-space: the unique
//! harmonic w with w = 0 and d_1 w = -c0 d_1 P on {x_1 = 0}.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{inv_factorial, MultiPoly};
use super::OracleError;

/// w = -c0 sum_{l=0}^{floor((k-1)/2)} (-1)^l Lap'^l (d_1 P|_{x_1=0}) x_1^{2l+1} / (2l+1)!
/// where Lap' is the Laplacian in x_2..x_n.
pub fn cauchy_kowalevski_halfspace(
    p: &MultiPoly<BigRational>,
    c0: &BigRational,
    n: usize,
) -> Result<MultiPoly<BigRational>, OracleError> {
    if n < 2 || p.nvars() != n {
        return Err(OracleError::Dimension(n));
    }
    if p.is_zero() {
        return Ok(MultiPoly::zero(n));
    }
    let k = p.homogeneous_degree().ok_or(OracleError::NotHomogeneous)?;
    if k == 0 {
        return Ok(MultiPoly::zero(n));
    }
    let mut g = p.derivative(0).restrict_zero(0);
    let mut w = MultiPoly::zero(n);
    let mut sign = BigRational::one();
    for l in 0..=((k - 1) / 2) {
        let term = g.mul_var_pow(0, 2 * l + 1).scale_ratio(&(&sign * inv_factorial(2 * l + 1)));
        w = &w + &term;
        g = g.laplacian_in(1..n);
        sign = -sign;
    }
    Ok(w.scale_ratio(&-c0.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CkChecks {
    pub harmonic: bool,
    pub dirichlet: bool,
    pub neumann: bool,
    pub homogeneous: bool,
}

impl CkChecks {
    pub fn all(&self) -> bool {
        self.harmonic && self.dirichlet && self.neumann && self.homogeneous
    }
}

/// Exact coefficient-level verification of a candidate w for data P.
pub fn check_cauchy_kowalevski(p: &MultiPoly<BigRational>, c0: &BigRational, w: &MultiPoly<BigRational>) -> CkChecks {
    let harmonic = w.laplacian().is_zero();
    let dirichlet = w.restrict_zero(0).is_zero();
    let target = p.derivative(0).restrict_zero(0).scale_ratio(&-c0.clone());
    let neumann = (&w.derivative(0).restrict_zero(0) - &target).is_zero();
    let homogeneous = w.is_zero() || w.homogeneous_degree() == p.homogeneous_degree();
    CkChecks { harmonic, dirichlet, neumann, homogeneous }
}

/// c0 as an exact rational.
pub fn exact_constant(c0: f64) -> Result<BigRational, OracleError> {
    if c0 == 0.0 {
        return Ok(BigRational::zero());
    }
    BigRational::from_float(c0).ok_or(OracleError::Constant(c0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::poly::{parse_poly, rat};

    fn one() -> BigRational {
        rat(1, 1)
    }

    #[test]
    fn linear_data() {
        let p = parse_poly("1 1 0").unwrap();
        let w = cauchy_kowalevski_halfspace(&p, &one(), 2).unwrap();
        assert_eq!(w, parse_poly("-1 1 0").unwrap());
    }

    #[test]
    fn two_term_expansion() {
        let p = parse_poly("1 1 2").unwrap();
        let w = cauchy_kowalevski_halfspace(&p, &one(), 2).unwrap();
        assert_eq!(w, parse_poly("-1 1 2\n1/3 3 0").unwrap());
        assert!(check_cauchy_kowalevski(&p, &one(), &w).all());
    }

    #[test]
    fn vanishing_restriction() {
        let p = parse_poly("1 0 3\n-3 2 1").unwrap();
        assert!(cauchy_kowalevski_halfspace(&p, &one(), 2).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_input() {
        let p = parse_poly("1 1 0\n1 0 2").unwrap();
        assert_eq!(cauchy_kowalevski_halfspace(&p, &one(), 2), Err(OracleError::NotHomogeneous));
        assert_eq!(cauchy_kowalevski_halfspace(&p, &one(), 3), Err(OracleError::Dimension(3)));
    }

    #[test]
    fn wrong_candidate_fails_checks() {
        let p = parse_poly("1 1 2").unwrap();
        let w = parse_poly("-1 1 2").unwrap();
        let c = check_cauchy_kowalevski(&p, &one(), &w);
        assert!(!c.harmonic && c.dirichlet && c.neumann);
    }
}
