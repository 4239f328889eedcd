//! One-parameter families `phi_c(x)`, the critical orbit `Phi_n(c) = phi_c^n(0)`,
//! closed forms for the quadratic family, and sampled class-X evidence.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use twofloat::TwoFloat;

use crate::exact::{phi_polynomial, ExactPolynomial};
use crate::numeric::{ser17, ser17_opt, Precision, Scalar, Sign, Tolerances};
use crate::roots::{bisect, Bracket};
use crate::{Error, Result};

/// Iterates beyond this magnitude are treated as escaping to infinity.
const DIVERGENCE_BOUND: f64 = 1e100;

/// A continuous family `phi_c : R -> R` indexed by `c` in a closed window.
pub trait Family: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// `(param_lo, param_hi)`, with `param_lo < param_hi`.
    fn param_range(&self) -> (f64, f64);

    fn step_f64(&self, c: f64, x: f64) -> f64;

    /// Double-double step. The default rounds through binary64.
    fn step_dd(&self, c: TwoFloat, x: TwoFloat) -> TwoFloat {
        TwoFloat::from(self.step_f64(c.hi(), x.hi()))
    }

    /// Smallest return exponent, when known in closed form.
    fn known_r(&self) -> Option<u32> {
        None
    }

    /// Exact `Phi_n` as a polynomial in `c`, if the family has one.
    fn exact_phi(&self, _n: u32, _exact_limit: u32) -> Option<Result<ExactPolynomial>> {
        None
    }
}

/// `f_c(x) = 1 - c x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    lo: f64,
    hi: f64,
}

impl Default for Quadratic {
    fn default() -> Self {
        Quadratic { lo: 0.0, hi: 2.0 }
    }
}

impl Quadratic {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same map on a narrower parameter window.
    pub fn restricted(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "parameter window [{lo}, {hi}] is empty"
            )));
        }
        Ok(Quadratic { lo, hi })
    }

    fn is_full_window(&self) -> bool {
        self.lo == 0.0 && self.hi == 2.0
    }
}

impl Family for Quadratic {
    fn name(&self) -> &str {
        if self.is_full_window() {
            "quadratic"
        } else {
            "quadratic-restricted"
        }
    }

    fn param_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn step_f64(&self, c: f64, x: f64) -> f64 {
        1.0 - c * x * x
    }

    fn step_dd(&self, c: TwoFloat, x: TwoFloat) -> TwoFloat {
        1.0 - c * (x * x)
    }

    fn known_r(&self) -> Option<u32> {
        self.is_full_window().then_some(2)
    }

    fn exact_phi(&self, n: u32, exact_limit: u32) -> Option<Result<ExactPolynomial>> {
        Some(phi_polynomial(n, exact_limit))
    }
}

type StepFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A family given by a closure, iterated in binary64 only.
#[derive(Clone)]
pub struct FnFamily {
    name: String,
    lo: f64,
    hi: f64,
    step: Arc<StepFn>,
}

impl FnFamily {
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        step: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "parameter window [{lo}, {hi}] is empty"
            )));
        }
        Ok(FnFamily {
            name: name.into(),
            lo,
            hi,
            step: Arc::new(step),
        })
    }
}

impl fmt::Debug for FnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFamily")
            .field("name", &self.name)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl Family for FnFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn param_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn step_f64(&self, c: f64, x: f64) -> f64 {
        (self.step)(c, x)
    }
}

/// Looks a family up by its command-line name.
/// `quadratic`, or `quadratic:LO:HI` for a restricted parameter window.
pub fn family_by_name(name: &str) -> Result<Arc<dyn Family>> {
    let bad = || Error::InvalidInput(format!("unknown family '{name}'"));
    match name.split(':').collect::<Vec<_>>().as_slice() {
        ["quadratic"] => Ok(Arc::new(Quadratic::new())),
        ["quadratic", lo, hi] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            Ok(Arc::new(Quadratic::restricted(lo, hi)?))
        }
        _ => Err(bad()),
    }
}

fn check_range(family: &dyn Family, n: u32, c: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("iterate count must be >= 1".into()));
    }
    let (lo, hi) = family.param_range();
    if !(lo <= c && c <= hi) {
        return Err(Error::ParameterOutOfRange { c, lo, hi });
    }
    Ok(())
}

fn iterate<S: Scalar>(n: u32, c: S, step: impl Fn(S, S) -> S) -> Result<S> {
    let mut x = S::from_f64(0.0);
    for i in 1..=n {
        x = step(c, x);
        if !x.is_finite() || x.to_f64().abs() > DIVERGENCE_BOUND {
            return Err(Error::DivergedOrbit {
                iterate: i,
                c: c.to_f64(),
            });
        }
    }
    Ok(x)
}

/// `Phi_n(c) = phi_c^n(0)`.
pub fn phi_eval(
    family: &dyn Family,
    n: u32,
    c: impl Into<TwoFloat>,
    precision: Precision,
) -> Result<TwoFloat> {
    let c = c.into();
    check_range(family, n, c.hi())?;
    match precision.resolve(n) {
        Precision::DoubleDouble => iterate(n, c, |c, x| family.step_dd(c, x)),
        _ => iterate(n, c.hi() + c.lo(), |c, x| family.step_f64(c, x)).map(TwoFloat::from),
    }
}

/// Sign of `Phi_n(c)`, `Zero` inside the residual band.
pub fn phi_sign(
    family: &dyn Family,
    n: u32,
    c: impl Into<TwoFloat>,
    precision: Precision,
    tol: &Tolerances,
) -> Result<Sign> {
    let v = phi_eval(family, n, c, precision)?;
    Ok(Sign::with_band(v.hi(), tol.residual))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointPair {
    /// `(-1 - sqrt(4c+1)) / 2c`
    #[serde(serialize_with = "ser17")]
    pub x_minus: f64,
    /// `(-1 + sqrt(4c+1)) / 2c`
    #[serde(serialize_with = "ser17")]
    pub x_plus: f64,
    pub minus_stable: bool,
    pub plus_stable: bool,
}

/// Fixed points of `f_c(x) = 1 - c x^2`, with stability `|f_c'(x)| < 1`.
pub fn fixed_points(c: f64) -> Result<FixedPointPair> {
    if !c.is_finite() {
        return Err(Error::InvalidInput(format!("c = {c}")));
    }
    if c <= -0.25 {
        return Err(Error::NoRealFixedPoints { c });
    }
    if c == 0.0 {
        return Err(Error::DegenerateParameter);
    }
    let root = (4.0 * c + 1.0).sqrt();
    let x_minus = (-1.0 - root) / (2.0 * c);
    // Rationalized form of (-1 + root) / 2c; no cancellation near c = 0.
    let x_plus = 2.0 / (1.0 + root);
    let stable = |x: f64| (2.0 * c * x).abs() < 1.0;
    Ok(FixedPointPair {
        x_minus,
        x_plus,
        minus_stable: stable(x_minus),
        plus_stable: stable(x_plus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Period2Pair {
    /// `(1 + sqrt(4c-3)) / 2c`
    #[serde(serialize_with = "ser17")]
    pub x_plus: f64,
    /// `(1 - sqrt(4c-3)) / 2c`
    #[serde(serialize_with = "ser17")]
    pub x_minus: f64,
    /// `(f_c^2)'` along the orbit, `4 c^2 x_+ x_-`.
    #[serde(serialize_with = "ser17")]
    pub multiplier: f64,
}

pub fn period2_points(c: f64) -> Result<Period2Pair> {
    if !c.is_finite() {
        return Err(Error::InvalidInput(format!("c = {c}")));
    }
    if c <= 0.75 {
        return Err(Error::OrbitNotBorn { c });
    }
    let root = (4.0 * c - 3.0).sqrt();
    let x_plus = (1.0 + root) / (2.0 * c);
    // x_+ x_- = (1 - c) / c^2
    let x_minus = (1.0 - c) / (c * c * x_plus);
    Ok(Period2Pair {
        x_plus,
        x_minus,
        multiplier: 4.0 * c * c * x_plus * x_minus,
    })
}

/// Smallest `d <= n_max` with `|Phi_d(c)| <= residual`, provided every
/// earlier iterate is at least `separation` away from zero.
pub fn least_period_of_zero(
    family: &dyn Family,
    c: impl Into<TwoFloat>,
    n_max: u32,
    precision: Precision,
    tol: &Tolerances,
) -> Result<Option<u32>> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let c = c.into();
    for d in 1..=n_max {
        let v = phi_eval(family, d, c, precision)?.hi().abs();
        if v <= tol.residual {
            return Ok(Some(d));
        }
        if v < tol.separation {
            return Err(Error::AmbiguousPeriod {
                c: c.hi(),
                iterate: d,
                value: v,
            });
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassXEvidence {
    pub family: String,
    pub grid_size: usize,
    pub n_max: u32,
    /// `phi_c(0) > 0` at every grid point.
    pub condition_a_ok: bool,
    pub condition_a_failures: usize,
    pub r_found: Option<u32>,
    #[serde(serialize_with = "ser17_opt")]
    pub r_witness_c: Option<f64>,
    #[serde(serialize_with = "ser17_opt")]
    pub r_witness_residual: Option<f64>,
    /// `Phi_n(param_hi) < 0` for `2 <= n <= n_max`.
    pub condition_c_ok: bool,
    pub condition_c_first_failure: Option<u32>,
    pub notes: Vec<String>,
}

impl ClassXEvidence {
    pub fn all_ok(&self) -> bool {
        self.condition_a_ok && self.r_found.is_some() && self.condition_c_ok
    }
}

/// Sampled evidence for conditions (a)-(c) of class X.
pub fn class_x_check(
    family: &dyn Family,
    grid_size: usize,
    n_max: u32,
    precision: Precision,
    tol: &Tolerances,
) -> Result<ClassXEvidence> {
    if grid_size < 2 {
        return Err(Error::InvalidInput("grid_size must be >= 2".into()));
    }
    if n_max < 2 {
        return Err(Error::InvalidInput("n_max must be >= 2".into()));
    }
    let (lo, hi) = family.param_range();
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| if i + 1 == grid_size { hi } else { lo + step * i as f64 })
        .collect();
    let mut notes = Vec::new();

    let mut a_failures = 0;
    for &c in &grid {
        match phi_eval(family, 1, c, precision) {
            Ok(v) if v.hi() > 0.0 => {}
            _ => a_failures += 1,
        }
    }

    // Condition (b): first n with a zero or sign change on [lo, hi).
    let inner = &grid[..grid_size - 1];
    let mut r_found = None;
    'search: for n in 2..=n_max {
        let mut prev: Option<(f64, f64)> = None;
        for &c in inner {
            let v = match phi_eval(family, n, c, precision) {
                Ok(v) => v.hi(),
                Err(e) => {
                    notes.push(format!("Phi_{n} not evaluable at c = {c}: {e}"));
                    prev = None;
                    continue;
                }
            };
            if v.abs() <= tol.residual {
                r_found = Some((n, c, v.abs()));
                break 'search;
            }
            if let Some((pc, pv)) = prev {
                if Sign::of(pv).is_opposite(Sign::of(v)) {
                    let f = |x: TwoFloat| phi_eval(family, n, x, precision);
                    let b = Bracket::new(&f, pc.into(), c.into(), 0.0)?;
                    match bisect(&f, b, tol, n) {
                        Ok(root) => r_found = Some((n, root.value.hi(), root.residual)),
                        Err(e) => {
                            notes.push(format!("Phi_{n} sign change near {c} not refined: {e}"));
                            r_found = Some((n, Scalar::midpoint(pc, c), f64::NAN));
                        }
                    }
                    break 'search;
                }
            }
            prev = Some((c, v));
        }
    }
    if r_found.is_none() {
        notes.push(format!("no zero of Phi_n on [{lo}, {hi}) for 2 <= n <= {n_max}"));
    }
    if let (Some(k), Some((r, _, _))) = (family.known_r(), r_found) {
        if k != r {
            notes.push(format!("sampled r = {r} differs from the known value {k}"));
        }
    }

    let mut c_failure = None;
    for n in 2..=n_max {
        let negative = matches!(phi_eval(family, n, hi, precision), Ok(v) if v.hi() < 0.0);
        if !negative {
            c_failure = Some(n);
            break;
        }
    }

    Ok(ClassXEvidence {
        family: family.name().to_string(),
        grid_size,
        n_max,
        condition_a_ok: a_failures == 0,
        condition_a_failures: a_failures,
        r_found: r_found.map(|t| t.0),
        r_witness_c: r_found.map(|t| t.1),
        r_witness_residual: r_found.map(|t| t.2),
        condition_c_ok: c_failure.is_none(),
        condition_c_first_failure: c_failure,
        notes,
    })
}

/// `max(3, r)`: the first window index the enumeration may start from.
pub fn r_hat(r: u32) -> u32 {
    r.max(3)
}
