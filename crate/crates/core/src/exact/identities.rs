//! Exact checks of the period-3 factorization of `f_c^3(x) - x` and of the
//! double-root structure at `c = 7/4`.

use serde::Serialize;

use super::bivariate::{quadratic_iterate, BivariatePoly};
use super::poly::{rational, ExactPolynomial};
use super::sturm::sturm_count;
use crate::{Error, Result};

/// `1 - x - c x^2`, whose roots in `x` are the fixed points of `f_c`.
pub fn fixed_point_factor() -> BivariatePoly {
    BivariatePoly::from_int_terms(&[(1, 0, 0), (-1, 1, 0), (-1, 2, 1)])
}

/// The degree-6 cofactor `h(c, x)` in its commonly printed form.
pub fn printed_h() -> BivariatePoly {
    BivariatePoly::from_int_terms(&[
        (1, 6, 6),
        (-1, 5, 5),
        (-3, 4, 5),
        (1, 4, 4),
        (2, 3, 4),
        (-1, 3, 3),
        (3, 2, 4),
        (-1, 2, 3),
        (1, 2, 2),
        (-1, 1, 3),
        (2, 1, 2),
        (-1, 1, 1),
        (-1, 0, 3),
        (2, 0, 2),
        (-1, 0, 1),
        (1, 0, 0),
    ])
}

/// `343x^3 - 98x^2 - 252x + 8`.
pub fn seven_fourths_cubic() -> ExactPolynomial {
    ExactPolynomial::from_integers("x", &[8, -252, -98, 343])
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientMismatch {
    pub x_degree: u32,
    pub computed: String,
    pub printed: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Period3Report {
    pub remainder_is_zero: bool,
    pub quotient: String,
    pub printed: String,
    pub matches_printed: bool,
    pub mismatches: Vec<CoefficientMismatch>,
}

/// Quotient of `f_c^3(x) - x` by `1 - x - c x^2`.
pub fn period3_quotient() -> Result<BivariatePoly> {
    let numerator = &quadratic_iterate(3) - &BivariatePoly::x();
    let (q, r) = numerator.div_rem_in_x(&fixed_point_factor())?;
    if !r.is_zero() {
        return Err(Error::FactorizationFailure(format!(
            "f_c^3(x) - x leaves remainder {r}"
        )));
    }
    Ok(q)
}

pub fn verify_period3_factorization() -> Result<Period3Report> {
    let q = period3_quotient()?;
    let h = printed_h();
    let top = q.degree_x().max(h.degree_x()).unwrap_or(0);
    let mismatches: Vec<_> = (0..=top)
        .filter_map(|i| {
            let (a, b) = (q.x_coefficient(i), h.x_coefficient(i));
            (a != b).then(|| CoefficientMismatch {
                x_degree: i,
                computed: a.to_string(),
                printed: b.to_string(),
            })
        })
        .collect();
    Ok(Period3Report {
        remainder_is_zero: true,
        quotient: q.to_string(),
        printed: h.to_string(),
        matches_printed: mismatches.is_empty(),
        mismatches,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SevenFourthsReport {
    /// `64^2 h(7/4, x) == cubic^2` for the computed quotient.
    pub square_identity_computed: bool,
    /// The same identity for the printed `h`.
    pub square_identity_printed: bool,
    /// `64^2 h_printed(7/4, x) - cubic^2`.
    pub printed_defect: String,
    pub cubic_real_roots: usize,
    pub gcd_degree: usize,
    pub cubic_divides_derivative: bool,
}

pub fn verify_h_at_7_4() -> Result<SevenFourthsReport> {
    let c = rational(7, 4);
    let scale = rational(64 * 64, 1);
    let cubic = seven_fourths_cubic();
    let target = &cubic * &cubic;

    let q = period3_quotient()?;
    let h_computed = q.substitute_c(&c).scale(&scale);
    let h_printed = printed_h().substitute_c(&c).scale(&scale);
    let defect = &h_printed - &target;

    let dh = q.partial_x().substitute_c(&c);
    let (_, r) = dh.div_rem(&cubic)?;
    let g = q.substitute_c(&c).gcd(&dh)?;

    Ok(SevenFourthsReport {
        square_identity_computed: h_computed == target,
        square_identity_printed: defect.is_zero(),
        printed_defect: defect.to_string(),
        cubic_real_roots: sturm_count(&cubic, &rational(-2, 1), &rational(2, 1))?,
        gcd_degree: g.degree().unwrap_or(0),
        cubic_divides_derivative: r.is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_has_printed_extremes() {
        let q = period3_quotient().unwrap();
        assert_eq!(q.degree_x(), Some(6));
        assert_eq!(q.x_coefficient(6), ExactPolynomial::from_integers("c", &[0, 0, 0, 0, 0, 0, 1]));
        assert_eq!(q.x_coefficient(0), ExactPolynomial::from_integers("c", &[1, -1, 2, -1]));
    }

    #[test]
    fn quotient_times_factor_reconstructs_iterate() {
        let q = period3_quotient().unwrap();
        let lhs = &quadratic_iterate(3) - &BivariatePoly::x();
        assert_eq!(&q * &fixed_point_factor(), lhs);
    }

    #[test]
    fn only_the_x_squared_coefficient_differs() {
        let rep = verify_period3_factorization().unwrap();
        assert!(rep.remainder_is_zero);
        let degs: Vec<u32> = rep.mismatches.iter().map(|m| m.x_degree).collect();
        assert_eq!(degs, vec![2]);
        let q = period3_quotient().unwrap();
        assert_eq!(q.x_coefficient(2), ExactPolynomial::from_integers("c", &[0, 0, 1, -3, 3]));
    }

    #[test]
    fn seven_fourths_structure() {
        let rep = verify_h_at_7_4().unwrap();
        assert!(rep.square_identity_computed);
        assert!(!rep.square_identity_printed);
        assert_eq!(rep.cubic_real_roots, 3);
        assert_eq!(rep.gcd_degree, 3);
        assert!(rep.cubic_divides_derivative);
    }
}
