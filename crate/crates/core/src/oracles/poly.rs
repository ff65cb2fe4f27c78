//! Exact multivariate polynomials over the rationals and the Gaussian
//! rationals, with the calculus needed by the closed-form blowup oracles.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Coefficient ring for [`MultiPoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_ratio(r: BigRational) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_ratio(r: BigRational) -> Self {
        r
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

/// re + i im with exact rational parts.
#[derive(Clone, PartialEq, Debug)]
pub struct ComplexRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ComplexRational { re, im }
    }

    /// Exact conversion of a floating complex number.
    pub fn from_c64(z: Complex64) -> Self {
        ComplexRational {
            re: BigRational::from_float(z.re).expect("finite real part"),
            im: BigRational::from_float(z.im).expect("finite imaginary part"),
        }
    }

    pub fn i() -> Self {
        ComplexRational {
            re: Zero::zero(),
            im: One::one(),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexRational {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
}

impl Coeff for ComplexRational {
    fn zero() -> Self {
        ComplexRational {
            re: Zero::zero(),
            im: Zero::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn add(&self, o: &Self) -> Self {
        ComplexRational::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        ComplexRational::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        ComplexRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    fn neg(&self) -> Self {
        ComplexRational::new(-&self.re, -&self.im)
    }
    fn from_ratio(r: BigRational) -> Self {
        ComplexRational::new(r, Zero::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Polynomial in `n` variables; terms map exponent vectors to nonzero
/// coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly<C: Coeff> {
    n: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(n: usize) -> Self {
        MultiPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn monomial(n: usize, exps: Vec<u32>, c: C) -> Self {
        assert_eq!(exps.len(), n);
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The coordinate x_i (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, C::from_ratio(rat(1, 1)))
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, e: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// `Some(k)` if every term has total degree k. The zero polynomial is
    /// reported as homogeneous of every degree, here `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|x| x == d).then_some(d),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut p = Self::zero(self.n);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.mul(c));
        }
        p
    }

    pub fn scale_ratio(&self, r: &BigRational) -> Self {
        self.scale(&C::from_ratio(r.clone()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.n, C::from_ratio(rat(1, 1)));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.n);
        for (e, v) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            p.add_term(f, v.mul(&C::from_ratio(rat(e[i] as i64, 1))));
        }
        p
    }

    /// Sum of second derivatives over the listed variables.
    pub fn laplacian_in(&self, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::zero(self.n);
        for i in vars {
            p = &p + &self.derivative(i).derivative(i);
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        self.laplacian_in(0..self.n)
    }

    /// Restriction to x_i = 0 (the variable is kept, with exponent 0).
    pub fn restrict_zero(&self, i: usize) -> Self {
        let mut p = Self::zero(self.n);
        for (e, v) in &self.terms {
            if e[i] == 0 {
                p.add_term(e.clone(), v.clone());
            }
        }
        p
    }

    /// Multiply by x_i^k.
    pub fn mul_var_pow(&self, i: usize, k: u32) -> Self {
        let mut p = Self::zero(self.n);
        for (e, v) in &self.terms {
            let mut f = e.clone();
            f[i] += k;
            p.add_term(f, v.clone());
        }
        p
    }

    /// p(t x) = t^k p(x) checked term by term is just homogeneity; this
    /// evaluates the dilated polynomial exactly.
    pub fn dilate(&self, t: &BigRational) -> Self {
        let mut p = Self::zero(self.n);
        for (e, v) in &self.terms {
            let d: u32 = e.iter().sum();
            let f = num_traits::pow(t.clone(), d as usize);
            p.add_term(e.clone(), v.mul(&C::from_ratio(f)));
        }
        p
    }

    pub fn eval_c64(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.n);
        let mut s = Complex64::new(0.0, 0.0);
        for (e, v) in &self.terms {
            let mut m = 1.0;
            for (xi, ei) in x.iter().zip(e) {
                m *= xi.powi(*ei as i32);
            }
            s += v.to_c64() * m;
        }
        s
    }

    /// Gradient evaluated in floating point.
    pub fn grad_c64(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.n).map(|i| self.derivative(i).eval_c64(x)).collect()
    }
}

impl MultiPoly<ComplexRational> {
    /// Linear form sum_i c_i x_i with floating complex coefficients.
    pub fn linear_complex<const N: usize>(n: usize, coefs: [(f64, f64); N]) -> Self {
        let mut p = Self::zero(n);
        for (i, (re, im)) in coefs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, ComplexRational::from_c64(Complex64::new(*re, *im)));
        }
        p
    }

    pub fn from_real(p: &MultiPoly<BigRational>) -> Self {
        let mut q = Self::zero(p.n);
        for (e, v) in &p.terms {
            q.add_term(e.clone(), ComplexRational::from_ratio(v.clone()));
        }
        q
    }

    /// Real and imaginary parts.
    pub fn split(&self) -> (MultiPoly<BigRational>, MultiPoly<BigRational>) {
        let mut re = MultiPoly::zero(self.n);
        let mut im = MultiPoly::zero(self.n);
        for (e, v) in &self.terms {
            re.add_term(e.clone(), v.re.clone());
            im.add_term(e.clone(), v.im.clone());
        }
        (re, im)
    }
}

impl<'a, C: Coeff> Add for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, o: Self) -> MultiPoly<C> {
        assert_eq!(self.n, o.n);
        let mut p = self.clone();
        for (e, v) in &o.terms {
            p.add_term(e.clone(), v.clone());
        }
        p
    }
}

impl<'a, C: Coeff> Sub for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, o: Self) -> MultiPoly<C> {
        assert_eq!(self.n, o.n);
        let mut p = self.clone();
        for (e, v) in &o.terms {
            p.add_term(e.clone(), v.neg());
        }
        p
    }
}

impl<'a, C: Coeff> Mul for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, o: Self) -> MultiPoly<C> {
        assert_eq!(self.n, o.n);
        let mut p = MultiPoly::zero(self.n);
        for (e1, v1) in &self.terms {
            for (e2, v2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, v1.mul(v2));
            }
        }
        p
    }
}

impl<'a, C: Coeff> Neg for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        let mut p = MultiPoly::zero(self.n);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.neg());
        }
        p
    }
}

/// 1/k! as a rational.
pub fn inv_factorial(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), factorial(k))
}

#[derive(Debug, Error, PartialEq)]
pub enum PolyParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("polynomial file has no terms")]
    Empty,
}

/// Parses lines `c e1 e2 ... en` with a rational coefficient `c` such as
/// `-3/4`. Blank lines and lines starting with `#` are skipped.
pub fn parse_poly(text: &str) -> Result<MultiPoly<BigRational>, PolyParseError> {
    let mut out: Option<MultiPoly<BigRational>> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let c: BigRational = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| PolyParseError::Syntax {
                line: ln + 1,
                msg: "bad rational coefficient".into(),
            })?;
        let exps: Vec<u32> = parts
            .map(|s| s.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| PolyParseError::Syntax {
                line: ln + 1,
                msg: "bad exponent".into(),
            })?;
        if exps.is_empty() {
            return Err(PolyParseError::Syntax {
                line: ln + 1,
                msg: "missing exponents".into(),
            });
        }
        let p = out.get_or_insert_with(|| MultiPoly::zero(exps.len()));
        if p.n != exps.len() {
            return Err(PolyParseError::Syntax {
                line: ln + 1,
                msg: format!("expected {} exponents, found {}", p.n, exps.len()),
            });
        }
        p.add_term(exps, c);
    }
    out.ok_or(PolyParseError::Empty)
}

/// Inverse of [`parse_poly`].
pub fn format_poly(p: &MultiPoly<BigRational>) -> String {
    let mut s = String::new();
    for (e, c) in &p.terms {
        s.push_str(&c.to_string());
        for k in e {
            s.push(' ');
            s.push_str(&k.to_string());
        }
        s.push('\n');
    }
    s
}

impl fmt::Display for MultiPoly<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            let unit = a.is_one();
            let constant = e.iter().all(|k| *k == 0);
            if !unit || constant {
                write!(f, "{}", a)?;
            }
            let mut sep = !unit || constant;
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                if sep {
                    write!(f, "*")?;
                }
                sep = true;
                if *k == 1 {
                    write!(f, "x{}", i + 1)?;
                } else {
                    write!(f, "x{}^{}", i + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = MultiPoly<BigRational>;

    fn x(i: usize) -> P {
        P::var(2, i)
    }

    #[test]
    fn laplacian_examples() {
        let r2 = &x(0).pow(2) + &x(1).pow(2);
        assert_eq!(r2.laplacian(), P::constant(2, rat(4, 1)));
        let cubic = &x(1).pow(3) - &(&x(0).pow(2) * &x(1)).scale_ratio(&rat(3, 1));
        assert!(cubic.laplacian().is_zero());
        // (x1^2 + x2^2) x2 / 8 has Laplacian x2
        let v = (&r2 * &x(1)).scale_ratio(&rat(1, 8));
        assert_eq!(v.laplacian(), x(1));
    }

    #[test]
    fn homogeneity_and_degree() {
        let p = &x(0).pow(3) + &(&x(0) * &x(1).pow(2));
        assert_eq!(p.homogeneous_degree(), Some(3));
        let q = &p + &x(0);
        assert_eq!(q.homogeneous_degree(), None);
        assert_eq!(q.degree(), Some(3));
        assert_eq!(p.dilate(&rat(2, 1)), p.scale_ratio(&rat(8, 1)));
    }

    #[test]
    fn parse_and_format_roundtrip() {
        let text = "3/4 2 1\n-1 0 3\n# comment\n\n";
        let p = parse_poly(text).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(parse_poly(&format_poly(&p)).unwrap(), p);
        assert_eq!(p.to_string(), "3/4*x1^2*x2 - x2^3");
        assert!(matches!(parse_poly("1 2\n1 2 3"), Err(PolyParseError::Syntax { line: 2, .. })));
        assert_eq!(parse_poly(""), Err(PolyParseError::Empty));
    }

    #[test]
    fn complex_split() {
        let z = MultiPoly::<ComplexRational>::linear_complex(2, [(1.0, 0.0), (0.0, 1.0)]);
        let (re, im) = z.pow(2).split();
        assert_eq!(re, &x(0).pow(2) - &x(1).pow(2));
        assert_eq!(im, (&x(0) * &x(1)).scale_ratio(&rat(2, 1)));
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &x(0) - &x(0);
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }
}
