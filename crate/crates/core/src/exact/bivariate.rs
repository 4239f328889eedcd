use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::poly::ExactPolynomial;
use crate::{Error, Result};

/// Polynomial in `x` and `c` with exact rational coefficients, keyed by
/// `(degree in x, degree in c)`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), BigRational)>) -> Self {
        let mut p = Self::zero();
        for (k, v) in terms {
            p.add_term(k, v);
        }
        p
    }

    /// Integer-coefficient shorthand: `(coeff, x_degree, c_degree)`.
    pub fn from_int_terms(terms: &[(i64, u32, u32)]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(v, dx, dc)| ((dx, dc), BigRational::from_integer(v.into()))),
        )
    }

    pub fn x() -> Self {
        Self::from_int_terms(&[(1, 1, 0)])
    }

    pub fn c() -> Self {
        Self::from_int_terms(&[(1, 0, 1)])
    }

    pub fn one() -> Self {
        Self::from_int_terms(&[(1, 0, 0)])
    }

    fn add_term(&mut self, key: (u32, u32), v: BigRational) {
        let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
        *slot += v;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, x_degree: u32, c_degree: u32) -> BigRational {
        self.terms
            .get(&(x_degree, c_degree))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn degree_x(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Coefficient of `x^i`, as a polynomial in `c`.
    pub fn x_coefficient(&self, i: u32) -> ExactPolynomial {
        let deg_c = self
            .terms
            .keys()
            .filter(|k| k.0 == i)
            .map(|k| k.1 as usize)
            .max();
        let Some(deg_c) = deg_c else {
            return ExactPolynomial::zero("c");
        };
        let coeffs = (0..=deg_c as u32).map(|j| self.coeff(i, j)).collect();
        ExactPolynomial::new("c", coeffs)
    }

    /// `sum_i coeffs[i](c) * x^i`.
    pub fn from_x_coefficients(coeffs: &[ExactPolynomial]) -> Self {
        let mut p = Self::zero();
        for (i, q) in coeffs.iter().enumerate() {
            for (j, v) in q.coefficients().iter().enumerate() {
                p.add_term((i as u32, j as u32), v.clone());
            }
        }
        p
    }

    /// Polynomial in `x` obtained by fixing `c`.
    pub fn substitute_c(&self, c: &BigRational) -> ExactPolynomial {
        let deg = self.degree_x().unwrap_or(0) as usize;
        let coeffs = (0..=deg)
            .map(|i| self.x_coefficient(i as u32).eval(c))
            .collect();
        ExactPolynomial::new("x", coeffs)
    }

    pub fn partial_x(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.0 > 0)
                .map(|(&(dx, dc), v)| ((dx - 1, dc), v * BigRational::from_integer(dx.into()))),
        )
    }

    /// Division in `Q[c][x]` by a divisor whose leading `x`-coefficient must
    /// divide every leading coefficient met along the way. Returns quotient
    /// and remainder (remainder has lower `x`-degree than the divisor).
    pub fn div_rem_in_x(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor
            .degree_x()
            .ok_or_else(|| Error::InvalidInput("division by the zero polynomial".into()))?;
        let lead = divisor.x_coefficient(dd);
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(dr) = rem.degree_x().filter(|&d| d >= dd) {
            let top = rem.x_coefficient(dr);
            let (q, r) = top.div_rem(&lead)?;
            if !r.is_zero() {
                return Err(Error::FactorizationFailure(format!(
                    "leading coefficient {top} of x^{dr} is not divisible by {lead}"
                )));
            }
            let mut term_coeffs = vec![ExactPolynomial::zero("c"); (dr - dd) as usize + 1];
            term_coeffs[(dr - dd) as usize] = q;
            let term = Self::from_x_coefficients(&term_coeffs);
            rem = &rem - &(&term * divisor);
            quot = &quot + &term;
        }
        Ok((quot, rem))
    }
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;

    fn add(self, rhs: Self) -> BivariatePoly {
        let mut out = self.clone();
        for (&k, v) in &rhs.terms {
            out.add_term(k, v.clone());
        }
        out
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;

    fn sub(self, rhs: Self) -> BivariatePoly {
        self + &(-rhs)
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;

    fn neg(self) -> BivariatePoly {
        BivariatePoly {
            terms: self.terms.iter().map(|(&k, v)| (k, -v)).collect(),
        }
    }
}

impl Mul for &BivariatePoly {
    type Output = BivariatePoly;

    fn mul(self, rhs: Self) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for (&(ax, ac), a) in &self.terms {
            for (&(bx, bc), b) in &rhs.terms {
                out.add_term((ax + bx, ac + bc), a * b);
            }
        }
        out
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree_x() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=deg).rev() {
            let q = self.x_coefficient(i);
            if q.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({q})")?,
                1 => write!(f, "({q})*x")?,
                _ => write!(f, "({q})*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `1 - c*x^2` composed with itself `times` times, starting from `x`.
pub fn quadratic_iterate(times: u32) -> BivariatePoly {
    let one = BivariatePoly::one();
    let c = BivariatePoly::c();
    let mut p = BivariatePoly::x();
    for _ in 0..times {
        p = &one - &(&c * &(&p * &p));
    }
    p
}
