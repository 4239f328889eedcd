//! Exact polynomial arithmetic: the critical-orbit polynomials `phi_n(c)`,
//! Sturm-chain root counting, and the closed-form identities of the
//! quadratic family.

pub mod bivariate;
pub mod identities;
pub mod poly;
pub mod sturm;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use bivariate::BivariatePoly;
pub use identities::{verify_h_at_7_4, verify_period3_factorization, Period3Report, SevenFourthsReport};
pub use poly::{parse_rational, rational, rational_from_f64, rational_to_f64, ExactPolynomial};
pub use sturm::{isolate_roots, sturm_count, RootBracket, SturmChain};

use crate::{Error, Result};

/// Default cap on `n` for exact construction of `phi_n` (degree 2047).
pub const DEFAULT_EXACT_LIMIT: u32 = 12;

fn square(p: &[BigInt]) -> Vec<BigInt> {
    let mut sq = vec![BigInt::zero(); 2 * p.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        sq[2 * i] += a * a;
        let twice = a << 1usize;
        for (j, b) in p.iter().enumerate().skip(i + 1) {
            sq[i + j] += &twice * b;
        }
    }
    sq
}

/// `phi_n(c) = f_c^n(0)` for `f_c(x) = 1 - c x^2`, built from
/// `phi_1 = 1`, `phi_{m+1} = 1 - c phi_m^2`.
pub fn phi_polynomial(n: u32, exact_limit: u32) -> Result<ExactPolynomial> {
    if n == 0 {
        return Err(Error::InvalidInput("phi_n needs n >= 1".into()));
    }
    if n > exact_limit {
        return Err(Error::ResourceLimit {
            n,
            limit: exact_limit,
        });
    }
    let mut p = vec![BigInt::one()];
    for _ in 1..n {
        let sq = square(&p);
        let mut next = Vec::with_capacity(sq.len() + 1);
        next.push(BigInt::one());
        next.extend(sq.into_iter().map(|c| -c));
        p = next;
    }
    Ok(ExactPolynomial::from_big_integers("c", p))
}

/// `x^(k-1) - x^(k-2) - ... - x - 1`; its root in (1, 2) governs the growth
/// of the order-(k-1) Fibonacci-type counts.
pub fn kbonacci_polynomial(k: u32) -> Result<ExactPolynomial> {
    if k < 3 {
        return Err(Error::InvalidInput(format!(
            "k-bonacci polynomial needs k >= 3, got {k}"
        )));
    }
    let mut coeffs = vec![-1i64; k as usize - 1];
    coeffs.push(1);
    Ok(ExactPolynomial::from_integers("x", &coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_phi_polynomials() {
        assert_eq!(
            phi_polynomial(1, 12).unwrap(),
            ExactPolynomial::from_integers("c", &[1])
        );
        assert_eq!(
            phi_polynomial(2, 12).unwrap(),
            ExactPolynomial::from_integers("c", &[1, -1])
        );
        assert_eq!(
            phi_polynomial(3, 12).unwrap(),
            ExactPolynomial::from_integers("c", &[1, -1, 2, -1])
        );
    }

    #[test]
    fn phi_degrees() {
        for n in 2..=12 {
            let p = phi_polynomial(n, 12).unwrap();
            assert_eq!(p.degree(), Some((1usize << (n - 1)) - 1), "n = {n}");
            assert!(p.is_integral());
        }
    }

    #[test]
    fn exact_limit_is_enforced() {
        assert!(matches!(
            phi_polynomial(13, 12),
            Err(Error::ResourceLimit { n: 13, limit: 12 })
        ));
        assert!(phi_polynomial(0, 12).is_err());
    }

    #[test]
    fn kbonacci_shapes() {
        assert_eq!(
            kbonacci_polynomial(3).unwrap(),
            ExactPolynomial::from_integers("x", &[-1, -1, 1])
        );
        assert_eq!(
            kbonacci_polynomial(4).unwrap(),
            ExactPolynomial::from_integers("x", &[-1, -1, -1, 1])
        );
        let p10 = kbonacci_polynomial(10).unwrap();
        assert_eq!(p10.degree(), Some(9));
        assert!(p10.coefficients()[..9].iter().all(|c| *c == rational(-1, 1)));
        assert!(kbonacci_polynomial(2).is_err());
    }

    #[test]
    fn kbonacci_has_one_root_in_unit_to_two() {
        for k in 3..=12 {
            let p = kbonacci_polynomial(k).unwrap();
            assert_eq!(sturm_count(&p, &rational(1, 1), &rational(2, 1)).unwrap(), 1, "k = {k}");
        }
    }
}
