//! Exact rational scalars. `Rational` is `num`'s `Ratio<BigInt>`, which keeps
//! every value reduced with a positive denominator; the helpers here cover the
//! string form used throughout the JSON interfaces ("3/2", "-1", "0") and the
//! combinatorial counts the rest of the kernel needs.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{KernelError, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p", "-p" or "p/q". Whitespace is not consumed here; the polynomial
/// tokenizer strips it before calling in.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |msg: &str| KernelError::Parse { message: format!("{msg}: {s:?}"), position: 0 };
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num: BigInt = num_str.parse().map_err(|_| bad("bad integer"))?;
    let den: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| bad("bad denominator"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    if den.is_negative() {
        return Err(bad("denominator must be positive"));
    }
    Ok(Rational::new(num, den))
}

/// Renders a rational in the same form `parse_rational` accepts.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Binomial coefficient as an exact machine integer. The kernel only counts
/// monomials at desk scale, so u64 is plenty; overflow would be a bug.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// sigma! = prod_i sigma_i! as a rational, for jet/Taylor conversions.
pub fn multi_factorial(sigma: &[u32]) -> Rational {
    let mut acc = BigInt::one();
    for &s in sigma {
        for i in 2..=s {
            acc *= BigInt::from(i);
        }
    }
    Rational::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("3/2").unwrap(), rat_frac(3, 2));
        assert_eq!(parse_rational("-4/2").unwrap(), rat(-2));
        assert_eq!(parse_rational("0").unwrap(), rat(0));
        assert_eq!(rational_to_string(&rat_frac(6, 4)), "3/2");
        assert_eq!(rational_to_string(&rat(-7)), "-7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        // dim of a k-th order disk in d variables is C(d+k, d)
        assert_eq!(binomial(2 + 2, 2), 6);
    }

    #[test]
    fn factorials() {
        assert_eq!(multi_factorial(&[2, 1]), rat(2));
        assert_eq!(multi_factorial(&[3, 2]), rat(12));
        assert_eq!(multi_factorial(&[]), rat(1));
    }
}
