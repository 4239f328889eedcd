use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Univariate polynomial with exact rational coefficients, lowest degree
/// first. The coefficient vector never ends in a zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PolynomialJson", try_from = "PolynomialJson")]
pub struct ExactPolynomial {
    variable: String,
    coeffs: Vec<BigRational>,
}

/// Wire form: `{"variable": "c", "coefficients": ["1", "-1"]}`, index = degree.
#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    variable: String,
    coefficients: Vec<String>,
}

impl From<ExactPolynomial> for PolynomialJson {
    fn from(p: ExactPolynomial) -> Self {
        PolynomialJson {
            variable: p.variable,
            coefficients: p.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for ExactPolynomial {
    type Error = Error;

    fn try_from(j: PolynomialJson) -> Result<Self> {
        let coeffs = j
            .coefficients
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactPolynomial::new(j.variable, coeffs))
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Exact value of a finite f64 as a rational.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // Shift both parts into f64 range before dividing.
    let (n, d) = (x.numer(), x.denom());
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let nf = big_to_f64(&(n >> shift_n as usize));
    let df = big_to_f64(&(d >> shift_d as usize));
    nf / df * 2f64.powi((shift_n - shift_d) as i32)
}

fn big_to_f64(x: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

impl ExactPolynomial {
    pub fn new(variable: impl Into<String>, mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactPolynomial {
            variable: variable.into(),
            coeffs,
        }
    }

    pub fn from_integers(variable: impl Into<String>, coeffs: &[i64]) -> Self {
        Self::new(
            variable,
            coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
        )
    }

    pub fn from_big_integers(variable: impl Into<String>, coeffs: Vec<BigInt>) -> Self {
        Self::new(variable, coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    pub fn zero(variable: impl Into<String>) -> Self {
        Self::new(variable, Vec::new())
    }

    pub fn constant(variable: impl Into<String>, c: BigRational) -> Self {
        Self::new(variable, vec![c])
    }

    /// `coeff * variable^degree`.
    pub fn monomial(variable: impl Into<String>, coeff: BigRational, degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = coeff;
        Self::new(variable, coeffs)
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> BigRational {
        self.coeffs.get(degree).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn with_variable(mut self, variable: impl Into<String>) -> Self {
        self.variable = variable.into();
        self
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(i.into()))
            .collect();
        Self::new(self.variable.clone(), coeffs)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.variable.clone(), self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division over the rationals.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::InvalidInput("division by the zero polynomial".into()))?;
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd {
            let top = rem.len() - 1;
            let q = &rem[top] / &lead;
            let shift = top - dd;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &q * d;
            }
            quot[shift] = q;
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((
            Self::new(self.variable.clone(), quot),
            Self::new(self.variable.clone(), rem),
        ))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r.monic();
        }
        Ok(a.monic())
    }

    /// `self / gcd(self, self')`: same distinct roots, all simple.
    pub fn square_free_part(&self) -> Result<Self> {
        if self.degree().unwrap_or(0) == 0 {
            return Ok(self.clone());
        }
        let g = self.gcd(&self.derivative())?;
        Ok(self.div_rem(&g)?.0)
    }

    /// Positive rational multiple with coprime integer coefficients.
    pub fn primitive_integer_coefficients(&self) -> Vec<BigInt> {
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if content.is_zero() || content.is_one() {
            ints
        } else {
            ints.into_iter().map(|c| c / &content).collect()
        }
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Floating-point evaluation of an exact polynomial (for cross-checks).
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }
}

impl Add for &ExactPolynomial {
    type Output = ExactPolynomial;

    fn add(self, rhs: Self) -> ExactPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        ExactPolynomial::new(self.variable.clone(), coeffs)
    }
}

impl Sub for &ExactPolynomial {
    type Output = ExactPolynomial;

    fn sub(self, rhs: Self) -> ExactPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        ExactPolynomial::new(self.variable.clone(), coeffs)
    }
}

impl Mul for &ExactPolynomial {
    type Output = ExactPolynomial;

    fn mul(self, rhs: Self) -> ExactPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ExactPolynomial::zero(self.variable.clone());
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ExactPolynomial::new(self.variable.clone(), coeffs)
    }
}

impl Neg for &ExactPolynomial {
    type Output = ExactPolynomial;

    fn neg(self) -> ExactPolynomial {
        ExactPolynomial::new(self.variable.clone(), self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mag_str = if mag.is_integer() {
                mag.to_string()
            } else {
                format!("({mag})")
            };
            match deg {
                0 => f.write_str(&mag_str)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag_str}*")?;
                    }
                    f.write_str(&self.variable)?;
                    if deg > 1 {
                        write!(f, "^{deg}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
