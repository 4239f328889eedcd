//! Exact real-root counting with Sturm chains.
//!
//! The chain is built with the subresultant pseudo-remainder sequence over
//! the integers, so coefficient growth stays polynomial in the degree. Each
//! stored element is a positive multiple of the classical Sturm element
//! `-rem(S_{i-1}, S_i)`, which leaves every sign variation unchanged.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::ExactPolynomial;
use crate::par::{self, Execution};
use crate::{Error, Result};

type IntPoly = Vec<BigInt>;

/// Sturm chain of the square-free part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    variable: String,
    chain: Vec<IntPoly>,
    /// True if the input already was square-free.
    square_free_input: bool,
    execution: Execution,
}

/// Closed rational interval holding exactly one root. `lo == hi` marks an
/// exact rational root; otherwise the square-free part changes sign
/// strictly between the endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootBracket {
    pub fn contains_f64(&self, x: f64) -> bool {
        let x = super::poly::rational_from_f64(x);
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &[BigInt]) -> IntPoly {
    let mut d: IntPoly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    trim(&mut d);
    d
}

/// `lc(b)^(deg a - deg b + 1) * a mod b`.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let top = r.len() - 1;
        let q = r[top].clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        let shift = top - db;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &q * bc;
        }
        r.pop();
        trim(&mut r);
    }
    r
}

/// Signed subresultant sequence normalised so that every element is a
/// positive multiple of the corresponding Sturm element.
fn sturm_sequence(p: &[BigInt]) -> Vec<IntPoly> {
    let mut chain = vec![p.to_vec()];
    let dp = derivative(p);
    if dp.is_empty() {
        return chain;
    }
    chain.push(dp);
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.len() <= 1 {
            break;
        }
        let delta = a.len() - b.len();
        let r = pseudo_remainder(a, b);
        if r.is_empty() {
            break;
        }
        let den = &g * num_traits::pow(h.clone(), delta);
        // prem = lc(b)^(delta+1) * rem, so -rem has sign -sign(lc(b))^(delta+1).
        let keep = b[b.len() - 1].is_negative() && (delta + 1) % 2 == 1;
        let next: IntPoly = r
            .into_iter()
            .map(|c| {
                let q = c / &den;
                if keep {
                    q
                } else {
                    -q
                }
            })
            .collect();
        g = b[b.len() - 1].abs();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
        };
        chain.push(next);
    }
    chain
}

/// Sign of `p(num/den)` for `den > 0`.
fn sign_at(p: &[BigInt], num: &BigInt, den: &BigInt) -> i8 {
    let Some((lead, rest)) = p.split_last() else {
        return 0;
    };
    let mut acc = lead.clone();
    if den.is_one() {
        for c in rest.iter().rev() {
            acc = acc * num + c;
        }
    } else {
        let mut pw = BigInt::one();
        for c in rest.iter().rev() {
            pw *= den;
            acc = acc * num + c * &pw;
        }
    }
    if acc.is_positive() {
        1
    } else if acc.is_negative() {
        -1
    } else {
        0
    }
}

fn count_variations(signs: impl IntoIterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut v = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

impl SturmChain {
    pub fn new(p: &ExactPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::InvalidInput(
                "Sturm chain of the zero polynomial".into(),
            ));
        }
        let ints = p.primitive_integer_coefficients();
        let chain = sturm_sequence(&ints);
        let last = chain.last().expect("chain is never empty");
        if chain.len() == 1 || last.len() == 1 {
            return Ok(SturmChain {
                variable: p.variable().to_string(),
                chain,
                square_free_input: true,
                execution: Execution::default(),
            });
        }
        // Nonconstant tail is gcd(p, p'): restart on the square-free part.
        let sf = p.square_free_part()?;
        let chain = sturm_sequence(&sf.primitive_integer_coefficients());
        Ok(SturmChain {
            variable: p.variable().to_string(),
            chain,
            square_free_input: false,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn square_free_input(&self) -> bool {
        self.square_free_input
    }

    /// Chain elements as exact polynomials (first is the square-free part).
    pub fn polynomials(&self) -> Vec<ExactPolynomial> {
        self.chain
            .iter()
            .map(|p| ExactPolynomial::from_big_integers(self.variable.clone(), p.clone()))
            .collect()
    }

    /// Sign of the square-free part at `x`.
    pub fn sign_at(&self, x: &BigRational) -> i8 {
        sign_at(&self.chain[0], x.numer(), x.denom())
    }

    /// Sign variations of the chain evaluated at `x`.
    pub fn variations(&self, x: &BigRational) -> usize {
        let (num, den) = (x.numer(), x.denom());
        let signs = par::map(self.execution, &self.chain, |p| sign_at(p, num, den));
        count_variations(signs)
    }

    fn variations_batch(&self, xs: &[BigRational]) -> Vec<usize> {
        if xs.len() == 1 {
            return vec![self.variations(&xs[0])];
        }
        par::map(self.execution, xs, |x| {
            count_variations(self.chain.iter().map(|p| sign_at(p, x.numer(), x.denom())))
        })
    }

    /// Number of distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &BigRational, hi: &BigRational) -> Result<usize> {
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "empty interval ({lo}, {hi}]"
            )));
        }
        let v = self.variations_batch(&[lo.clone(), hi.clone()]);
        Ok(v[0] - v[1])
    }

    /// Disjoint brackets, ascending, one per distinct root in `(lo, hi]`.
    pub fn isolate(&self, lo: &BigRational, hi: &BigRational) -> Result<Vec<RootBracket>> {
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "empty interval ({lo}, {hi}]"
            )));
        }
        let two = BigRational::from_integer(2.into());
        let ends = self.variations_batch(&[lo.clone(), hi.clone()]);
        // Pending half-open intervals (l, r] with their end variations.
        let mut pending = vec![(lo.clone(), hi.clone(), ends[0], ends[1])];
        let mut out = Vec::new();
        while !pending.is_empty() {
            let mut split = Vec::new();
            for (l, r, vl, vr) in pending {
                match vl - vr {
                    0 => {}
                    1 => {
                        let sr = self.sign_at(&r);
                        if sr == 0 {
                            out.push(RootBracket { lo: r.clone(), hi: r });
                        } else if self.sign_at(&l) * sr < 0 {
                            out.push(RootBracket { lo: l, hi: r });
                        } else {
                            split.push((l, r, vl, vr));
                        }
                    }
                    _ => split.push((l, r, vl, vr)),
                }
            }
            let mids: Vec<BigRational> = split.iter().map(|(l, r, _, _)| (l + r) / &two).collect();
            let vm = if mids.is_empty() {
                Vec::new()
            } else {
                self.variations_batch(&mids)
            };
            pending = split
                .into_iter()
                .zip(mids.into_iter().zip(vm))
                .flat_map(|((l, r, vl, vr), (m, v))| [(l, m.clone(), vl, v), (m, r, v, vr)])
                .collect();
        }
        out.sort_by(|a, b| a.lo.cmp(&b.lo));
        Ok(out)
    }
}

/// Distinct real roots of `p` in `(lo, hi]`.
pub fn sturm_count(p: &ExactPolynomial, lo: &BigRational, hi: &BigRational) -> Result<usize> {
    SturmChain::new(p)?.count(lo, hi)
}

/// One isolating bracket per distinct root of `p` in `(lo, hi]`.
pub fn isolate_roots(
    p: &ExactPolynomial,
    lo: &BigRational,
    hi: &BigRational,
) -> Result<Vec<RootBracket>> {
    SturmChain::new(p)?.isolate(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rational;

    fn p(coeffs: &[i64]) -> ExactPolynomial {
        ExactPolynomial::from_integers("x", coeffs)
    }

    fn int(n: i64) -> BigRational {
        rational(n, 1)
    }

    #[test]
    fn counts_simple_quadratic() {
        let q = p(&[-2, 0, 1]);
        assert_eq!(sturm_count(&q, &int(-2), &int(2)).unwrap(), 2);
        assert_eq!(sturm_count(&q, &int(0), &int(2)).unwrap(), 1);
        assert_eq!(sturm_count(&q, &int(2), &int(3)).unwrap(), 0);
    }

    #[test]
    fn half_open_interval_convention() {
        // roots 1 and 2
        let q = p(&[2, -3, 1]);
        assert_eq!(sturm_count(&q, &int(1), &int(2)).unwrap(), 1);
        assert_eq!(sturm_count(&q, &int(0), &int(1)).unwrap(), 1);
        assert_eq!(sturm_count(&q, &int(0), &int(2)).unwrap(), 2);
    }

    #[test]
    fn repeated_roots_count_once() {
        // (x-1)^3 (x+1)
        let a = p(&[-1, 1]);
        let q = &(&(&a * &a) * &a) * &p(&[1, 1]);
        let chain = SturmChain::new(&q).unwrap();
        assert!(!chain.square_free_input());
        assert_eq!(chain.count(&int(-5), &int(5)).unwrap(), 2);
    }

    #[test]
    fn chain_elements_follow_negated_remainders() {
        let q = p(&[8, -252, -98, 343]);
        let chain = SturmChain::new(&q).unwrap().polynomials();
        assert_eq!(chain.last().unwrap().degree(), Some(0));
        for w in chain.windows(3) {
            let (_, r) = w[0].div_rem(&w[1]).unwrap();
            // -r must be a positive multiple of the next element.
            let ratio = -(r.leading().unwrap()) / w[2].leading().unwrap();
            assert!(ratio > BigRational::zero());
            assert_eq!((-&r).scale(&ratio.recip()), w[2]);
        }
    }

    #[test]
    fn isolates_exact_rational_root() {
        let q = p(&[1, -1]); // 1 - x
        let b = isolate_roots(&q, &int(0), &int(1)).unwrap();
        assert_eq!(b, vec![RootBracket { lo: int(1), hi: int(1) }]);
        let b = isolate_roots(&q, &int(0), &int(2)).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].contains_f64(1.0));
    }

    #[test]
    fn isolating_brackets_are_disjoint_and_signed() {
        let q = p(&[8, -252, -98, 343]);
        let chain = SturmChain::new(&q).unwrap();
        let b = chain.isolate(&int(-2), &int(2)).unwrap();
        assert_eq!(b.len(), 3);
        for w in b.windows(2) {
            assert!(w[0].hi <= w[1].lo);
        }
        for br in &b {
            assert_eq!(chain.count(&br.lo, &br.hi).unwrap(), 1);
            assert!(chain.sign_at(&br.lo) * chain.sign_at(&br.hi) < 0);
        }
    }

    #[test]
    fn rejects_zero_polynomial_and_empty_interval() {
        assert!(SturmChain::new(&p(&[])).is_err());
        assert!(sturm_count(&p(&[1, 1]), &int(1), &int(1)).is_err());
    }

    #[test]
    fn constant_polynomial_has_no_roots() {
        assert_eq!(sturm_count(&p(&[5]), &int(-1), &int(1)).unwrap(), 0);
        assert!(isolate_roots(&p(&[5]), &int(-1), &int(1)).unwrap().is_empty());
    }
}
