//! Exact Weiss energies of polynomial fields on the unit disk, as rational
//! multiples of pi.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::MultiPoly;

fn double_factorial(k: i64) -> BigInt {
    let mut p = BigInt::one();
    let mut j = k;
    while j > 1 {
        p *= j;
        j -= 2;
    }
    p
}

/// (1/pi) times the integral of x^a y^b over the unit circle.
pub fn circle_moment(a: u32, b: u32) -> BigRational {
    if a % 2 == 1 || b % 2 == 1 {
        return BigRational::zero();
    }
    let num = double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1) * 2;
    BigRational::new(num, double_factorial((a + b) as i64))
}

/// (1/pi) times the integral of x^a y^b over the unit disk.
pub fn disk_moment(a: u32, b: u32) -> BigRational {
    circle_moment(a, b) / BigRational::from_integer(BigInt::from(a + b + 2))
}

fn integrate(p: &MultiPoly<BigRational>, moment: fn(u32, u32) -> BigRational) -> BigRational {
    p.terms().fold(BigRational::zero(), |acc, (e, c)| acc + c * moment(e[0], e[1]))
}

/// W(1, v) / pi = (1/pi) [ int_{B_1} |grad v|^2 + 2 H v - order int_{dB_1} v^2 ]
/// for real polynomials v, H in two variables.
pub fn weiss_energy_exact(v: &MultiPoly<BigRational>, h: &MultiPoly<BigRational>, order: u32) -> BigRational {
    let vx = v.derivative(0);
    let vy = v.derivative(1);
    let grad2 = &(&vx * &vx) + &(&vy * &vy);
    let two_hv = (h * v).scale_ratio(&BigRational::from_integer(2.into()));
    let bulk = integrate(&(&grad2 + &two_hv), disk_moment);
    let surf = integrate(&(v * v), circle_moment);
    bulk - surf * BigRational::from_integer(BigInt::from(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::poly::{parse_poly, rat};

    #[test]
    fn moments() {
        assert_eq!(circle_moment(0, 0), rat(2, 1));
        assert_eq!(circle_moment(2, 0), rat(1, 1));
        assert_eq!(circle_moment(2, 2), rat(1, 4));
        assert_eq!(disk_moment(0, 0), rat(1, 1));
        assert_eq!(disk_moment(1, 2), rat(0, 1));
    }

    #[test]
    fn quarter_r_squared_gives_one_eighth() {
        let v = parse_poly("1/4 2 0\n1/4 0 2").unwrap();
        let h = parse_poly("1 0 0").unwrap();
        assert_eq!(weiss_energy_exact(&v, &h, 2), rat(1, 8));
    }
}
