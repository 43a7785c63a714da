//! Arbitrary-precision rational scalars and small exact combinatorics.

use num::{BigInt, BigRational, One, Zero};

/// The scalar type of the whole crate: an arbitrary-precision rational.
pub type Rat = BigRational;

/// The integer `n` as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// The fraction `n/d` (reduced). Panics if `d == 0`.
pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^e` for a possibly negative exponent.
pub fn minus_one_pow(e: i64) -> Rat {
    if e.rem_euclid(2) == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// `n!` as a rational.
pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// Binomial coefficient `C(n, k)` as a rational; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for i in 0..k {
        acc *= rat((n - i) as i64) / rat((i + 1) as i64);
    }
    acc
}

/// Multinomial coefficient `(Σparts)! / Π parts!`.
pub fn multinomial(parts: &[usize]) -> Rat {
    let total: usize = parts.iter().sum();
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}
