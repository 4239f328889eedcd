//! Sign-certified bisection and the rightmost roots `c_n*` of `Phi_n`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::exact::{rational_from_f64, SturmChain, DEFAULT_EXACT_LIMIT};
use crate::family::{phi_eval, Family};
use crate::numeric::{fmt17, twofloat_from_parts, Precision, Scalar, Sign, Tolerances};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Minimum separation demanded between consecutive rightmost roots.
pub const MIN_ROOT_GAP: f64 = 1e-10;

/// `[lo, hi]` with strictly opposite endpoint signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: TwoFloat,
    pub hi: TwoFloat,
    pub sign_lo: Sign,
    pub sign_hi: Sign,
}

impl Bracket {
    pub fn from_signs(lo: TwoFloat, hi: TwoFloat, sign_lo: Sign, sign_hi: Sign) -> Result<Self> {
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || !sign_lo.is_opposite(sign_hi) {
            return Err(Error::InvalidBracket {
                lo: lo.hi(),
                hi: hi.hi(),
                sign_lo,
                sign_hi,
            });
        }
        Ok(Bracket {
            lo,
            hi,
            sign_lo,
            sign_hi,
        })
    }

    /// Evaluates `f` at both ends; values within `band` of zero count as zero.
    pub fn new<F>(f: &F, lo: TwoFloat, hi: TwoFloat, band: f64) -> Result<Self>
    where
        F: Fn(TwoFloat) -> Result<TwoFloat>,
    {
        let sign_lo = Sign::with_band(f(lo)?.hi(), band);
        let sign_hi = Sign::with_band(f(hi)?.hi(), band);
        Self::from_signs(lo, hi, sign_lo, sign_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bisection,
    /// The function vanished exactly at a sample point.
    ExactSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootResult {
    pub value: TwoFloat,
    pub lo: TwoFloat,
    pub hi: TwoFloat,
    pub width: f64,
    pub residual: f64,
    pub n: u32,
    pub method: Method,
    /// Outcome of exact Sturm certification, when it was attempted.
    pub certified: Option<bool>,
}

impl RootResult {
    pub fn value_f64(&self) -> f64 {
        self.value.hi()
    }
}

#[derive(Serialize, Deserialize)]
struct RootResultJson {
    n: u32,
    value: String,
    value_lo: String,
    bracket: [String; 2],
    bracket_lo_parts: [String; 2],
    width: String,
    residual: String,
    method: Method,
    certified: Option<bool>,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"))
}

impl Serialize for RootResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RootResultJson {
            n: self.n,
            value: fmt17(self.value.hi()),
            value_lo: fmt17(self.value.lo()),
            bracket: [fmt17(self.lo.hi()), fmt17(self.hi.hi())],
            bracket_lo_parts: [fmt17(self.lo.lo()), fmt17(self.hi.lo())],
            width: fmt17(self.width),
            residual: fmt17(self.residual),
            method: self.method,
            certified: self.certified,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = RootResultJson::deserialize(d)?;
        let num = |s: &str| parse_f64(s).map_err(D::Error::custom);
        Ok(RootResult {
            n: j.n,
            value: twofloat_from_parts(num(&j.value)?, num(&j.value_lo)?),
            lo: twofloat_from_parts(num(&j.bracket[0])?, num(&j.bracket_lo_parts[0])?),
            hi: twofloat_from_parts(num(&j.bracket[1])?, num(&j.bracket_lo_parts[1])?),
            width: num(&j.width)?,
            residual: num(&j.residual)?,
            method: j.method,
            certified: j.certified,
        })
    }
}

/// Halves `b` until its width is at most `tol.width` and the residual at the
/// midpoint is at most `tol.residual`.
pub fn bisect<F>(f: &F, b: Bracket, tol: &Tolerances, n: u32) -> Result<RootResult>
where
    F: Fn(TwoFloat) -> Result<TwoFloat>,
{
    let (mut lo, mut hi) = (b.lo, b.hi);
    let sign_lo = b.sign_lo;
    loop {
        let mid = Scalar::midpoint(lo, hi);
        let width = (hi - lo).hi();
        let splittable = lo < mid && mid < hi;
        let fm = f(mid)?;
        if !fm.is_finite() {
            return Err(Error::BracketCorrupted { at: mid.hi() });
        }
        let residual = fm.hi().abs();
        if fm.hi() == 0.0 {
            return Ok(RootResult {
                value: mid,
                lo: mid,
                hi: mid,
                width: 0.0,
                residual: 0.0,
                n,
                method: Method::Bisection,
                certified: None,
            });
        }
        if width <= tol.width && residual <= tol.residual {
            return Ok(RootResult {
                value: mid,
                lo,
                hi,
                width,
                residual,
                n,
                method: Method::Bisection,
                certified: None,
            });
        }
        if !splittable {
            return Err(Error::ResidualNotReached { width, residual });
        }
        if Sign::of(fm.hi()) == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinderSettings {
    pub tol: Tolerances,
    pub precision: Precision,
    /// Uniform scan points on the parameter window.
    pub grid_points: usize,
    /// Extra scan points at `hi - (hi - lo) 2^{-t / per_octave}`, for
    /// `t` up to `octaves * per_octave`; roots pile up at the right end.
    pub refine_octaves: u32,
    pub refine_per_octave: u32,
    /// Largest `n` whose rightmost root is checked by an exact Sturm chain.
    pub certify_limit: u32,
    pub exact_limit: u32,
    pub execution: Execution,
}

impl Default for FinderSettings {
    fn default() -> Self {
        FinderSettings {
            tol: Tolerances::default(),
            precision: Precision::Auto,
            grid_points: 1 << 14,
            refine_octaves: 60,
            refine_per_octave: 16,
            certify_limit: 10,
            exact_limit: DEFAULT_EXACT_LIMIT,
            execution: Execution::default(),
        }
    }
}

impl FinderSettings {
    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.grid_points < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points".into()));
        }
        if self.certify_limit > self.exact_limit {
            return Err(Error::InvalidInput(format!(
                "certify limit {} exceeds exact limit {}",
                self.certify_limit, self.exact_limit
            )));
        }
        Ok(())
    }
}

type ChainSlot = OnceLock<std::result::Result<Option<Arc<SturmChain>>, String>>;

/// Root searches on one family, with per-session memo of `c_n*` and of the
/// exact Sturm chains used to certify them.
#[derive(Debug)]
pub struct RootFinder {
    family: Arc<dyn Family>,
    settings: FinderSettings,
    rightmost: Mutex<BTreeMap<u32, RootResult>>,
    chains: Mutex<BTreeMap<u32, Arc<ChainSlot>>>,
    scan_grid: OnceLock<Vec<f64>>,
}

fn exact_of(x: TwoFloat) -> BigRational {
    rational_from_f64(x.hi()) + rational_from_f64(x.lo())
}

impl RootFinder {
    pub fn new(family: Arc<dyn Family>, settings: FinderSettings) -> Result<Self> {
        settings.validate()?;
        Ok(RootFinder {
            family,
            settings,
            rightmost: Mutex::new(BTreeMap::new()),
            chains: Mutex::new(BTreeMap::new()),
            scan_grid: OnceLock::new(),
        })
    }

    pub fn family(&self) -> &dyn Family {
        self.family.as_ref()
    }

    pub fn family_arc(&self) -> Arc<dyn Family> {
        Arc::clone(&self.family)
    }

    pub fn settings(&self) -> &FinderSettings {
        &self.settings
    }

    pub fn tol(&self) -> &Tolerances {
        &self.settings.tol
    }

    pub fn phi(&self, n: u32, c: TwoFloat) -> Result<TwoFloat> {
        phi_eval(self.family.as_ref(), n, c, self.settings.precision)
    }

    pub fn sign(&self, n: u32, c: TwoFloat) -> Result<Sign> {
        Ok(Sign::with_band(self.phi(n, c)?.hi(), self.settings.tol.residual))
    }

    /// Ascending scan points on the parameter window.
    pub fn scan_grid(&self) -> &[f64] {
        self.scan_grid.get_or_init(|| {
            let (lo, hi) = self.family.param_range();
            let s = &self.settings;
            let m = s.grid_points - 1;
            let mut pts: Vec<f64> = (0..=m)
                .map(|i| if i == m { hi } else { lo + (hi - lo) * (i as f64 / m as f64) })
                .collect();
            let steps = s.refine_octaves * s.refine_per_octave;
            for t in 1..=steps {
                let off = (hi - lo) * (-(t as f64) / s.refine_per_octave as f64).exp2();
                let p = hi - off;
                if p > lo && p < hi {
                    pts.push(p);
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts
        })
    }

    /// Exact Sturm chain of `Phi_n`, built once per finder.
    pub fn sturm_chain(&self, n: u32) -> Result<Option<Arc<SturmChain>>> {
        let slot = {
            let mut map = self.chains.lock().expect("chain map poisoned");
            Arc::clone(map.entry(n).or_default())
        };
        let built = slot.get_or_init(|| {
            let poly = match self.family.exact_phi(n, self.settings.exact_limit) {
                None => return Ok(None),
                Some(p) => p.map_err(|e| e.to_string())?,
            };
            SturmChain::new(&poly)
                .map(|c| Some(Arc::new(c.with_execution(self.settings.execution))))
                .map_err(|e| e.to_string())
        });
        built.clone().map_err(|detail| Error::CertificationFailed { n, detail })
    }

    fn certify(&self, r: &RootResult) -> Result<Option<bool>> {
        let n = r.n;
        if n > self.settings.certify_limit {
            return Ok(None);
        }
        let Some(chain) = self.sturm_chain(n)? else {
            return Ok(None);
        };
        let top = rational_from_f64(self.family.param_range().1);
        let (lo, hi) = (exact_of(r.lo), exact_of(r.hi));
        let right_of = if hi < top { chain.count(&hi, &top)? } else { 0 };
        let inside = if lo == hi {
            usize::from(chain.sign_at(&lo) == 0)
        } else {
            chain.count(&lo, &hi)?
        };
        if right_of != 0 || inside % 2 == 0 {
            return Err(Error::CertificationFailed {
                n,
                detail: format!(
                    "{right_of} root(s) right of the bracket, {inside} inside it"
                ),
            });
        }
        Ok(Some(true))
    }

    fn scan_rightmost(&self, n: u32) -> Result<RootResult> {
        let grid = self.scan_grid();
        let values = par::try_map(self.settings.execution, grid, |&c| {
            self.phi(n, TwoFloat::from(c)).map(|v| v.hi())
        })?;
        let Some(i) = values.iter().rposition(|&v| v >= 0.0) else {
            return Err(Error::NoRoot { n });
        };
        let c = TwoFloat::from(grid[i]);
        if values[i] == 0.0 {
            return Ok(RootResult {
                value: c,
                lo: c,
                hi: c,
                width: 0.0,
                residual: 0.0,
                n,
                method: Method::ExactSample,
                certified: None,
            });
        }
        if i + 1 == grid.len() {
            return Err(Error::NoRoot { n });
        }
        let f = |x: TwoFloat| self.phi(n, x);
        let b = Bracket::from_signs(c, TwoFloat::from(grid[i + 1]), Sign::Positive, Sign::Negative)?;
        bisect(&f, b, &self.settings.tol, n)
    }

    /// `c_n*`, the largest zero of `Phi_n` in the window.
    pub fn largest_root(&self, n: u32) -> Result<RootResult> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        if let Some(r) = self.cached(n) {
            return Ok(r);
        }
        let mut r = self.scan_rightmost(n)?;
        r.certified = self.certify(&r)?;
        if n >= 3 {
            if let Some(prev) = self.cached(n - 1) {
                check_increasing(&prev, &r)?;
            }
        }
        self.rightmost
            .lock()
            .expect("root memo poisoned")
            .insert(n, r.clone());
        Ok(r)
    }

    /// `c_n*` for `n` in `n_lo..=n_hi`, checked to increase strictly.
    pub fn largest_roots(&self, n_lo: u32, n_hi: u32) -> Result<Vec<RootResult>> {
        if n_lo == 0 || n_lo > n_hi {
            return Err(Error::InvalidInput(format!("bad range {n_lo}..={n_hi}")));
        }
        let ns: Vec<u32> = (n_lo..=n_hi).collect();
        let out = par::try_map(self.settings.execution, &ns, |&n| {
            if let Some(r) = self.cached(n) {
                return Ok::<_, Error>(r);
            }
            let mut r = self.scan_rightmost(n)?;
            r.certified = self.certify(&r)?;
            Ok(r)
        })?;
        for w in out.windows(2) {
            check_increasing(&w[0], &w[1])?;
        }
        let mut memo = self.rightmost.lock().expect("root memo poisoned");
        for r in &out {
            memo.insert(r.n, r.clone());
        }
        Ok(out)
    }

    /// A zero of `Phi_n` strictly between `lo` and `hi`, whose `Phi_n` signs
    /// must be strictly opposite outside the residual band.
    pub fn find_root_between(
        &self,
        n: u32,
        lo: impl Into<TwoFloat>,
        hi: impl Into<TwoFloat>,
    ) -> Result<RootResult> {
        let (lo, hi) = (lo.into(), hi.into());
        let f = |x: TwoFloat| self.phi(n, x);
        let b = Bracket::new(&f, lo, hi, self.settings.tol.residual)?;
        bisect(&f, b, &self.settings.tol, n)
    }

    pub fn cached(&self, n: u32) -> Option<RootResult> {
        self.rightmost
            .lock()
            .expect("root memo poisoned")
            .get(&n)
            .cloned()
    }

    pub fn cached_rightmost(&self) -> Vec<RootResult> {
        self.rightmost
            .lock()
            .expect("root memo poisoned")
            .values()
            .cloned()
            .collect()
    }

    /// Accepts a previously computed `c_n*` after re-checking its residual
    /// and width against the current tolerances.
    pub fn seed_rightmost(&self, r: RootResult) -> bool {
        let tol = &self.settings.tol;
        let ok = r.width <= tol.width
            && matches!(self.phi(r.n, r.value), Ok(v) if v.hi().abs() <= tol.residual);
        if ok {
            self.rightmost
                .lock()
                .expect("root memo poisoned")
                .insert(r.n, r);
        }
        ok
    }
}

fn check_increasing(prev: &RootResult, next: &RootResult) -> Result<()> {
    if (next.value - prev.value).hi() <= MIN_ROOT_GAP {
        return Err(Error::NonMonotone {
            n: next.n,
            value: next.value.hi(),
            prev_n: prev.n,
            prev: prev.value.hi(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Quadratic;
    use approx::assert_abs_diff_eq;

    fn finder() -> RootFinder {
        RootFinder::new(Arc::new(Quadratic::new()), FinderSettings::default()).unwrap()
    }

    /// Newton on the exact cubic `c^3 - 2c^2 + c - 1` in double-double.
    fn cubic_root() -> TwoFloat {
        let mut x = TwoFloat::from(1.75);
        for _ in 0..8 {
            let p = ((x - 2.0) * x + 1.0) * x - 1.0;
            let dp = (3.0 * x - 4.0) * x + 1.0;
            x -= p / dp;
        }
        x
    }

    #[test]
    fn bisect_sqrt2() {
        let f = |c: TwoFloat| Ok(c * c - 2.0);
        let b = Bracket::new(&f, 1.0.into(), 2.0.into(), 0.0).unwrap();
        let r = bisect(&f, b, &Tolerances::default(), 0).unwrap();
        assert_abs_diff_eq!(r.value.hi(), 2f64.sqrt(), epsilon = 1e-12);
        assert!(r.width <= 1e-12);
    }

    #[test]
    fn bracket_requires_opposite_signs() {
        let f = |c: TwoFloat| Ok(c * c - 2.0);
        assert!(matches!(
            Bracket::new(&f, 2.0.into(), 3.0.into(), 0.0),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(Bracket::new(&f, 2.0.into(), 1.0.into(), 0.0).is_err());
    }

    #[test]
    fn nan_corrupts_the_bracket() {
        let f = |c: TwoFloat| {
            if c.hi() > 1.2 && c.hi() < 1.8 {
                Ok(TwoFloat::from(f64::NAN))
            } else {
                Ok(c - 1.5)
            }
        };
        let b = Bracket::from_signs(1.0.into(), 2.0.into(), Sign::Negative, Sign::Positive).unwrap();
        assert!(matches!(
            bisect(&f, b, &Tolerances::default(), 0),
            Err(Error::BracketCorrupted { .. })
        ));
    }

    #[test]
    fn rightmost_anchors() {
        let rf = finder();
        let r2 = rf.largest_root(2).unwrap();
        assert_abs_diff_eq!(r2.value_f64(), 1.0, epsilon = 1e-12);
        assert_eq!(r2.certified, Some(true));
        let r3 = rf.largest_root(3).unwrap();
        assert_abs_diff_eq!(r3.value.hi(), cubic_root().hi(), epsilon = 1e-12);
        assert!(r3.residual <= 1e-9);
        assert!(matches!(rf.largest_root(1), Err(Error::NoRoot { n: 1 })));
    }

    #[test]
    fn find_between_examples() {
        let rf = finder();
        assert_eq!(rf.find_root_between(2, 0.5, 1.5).unwrap().value_f64(), 1.0);
        let c3 = rf.largest_root(3).unwrap().value;
        let c4 = rf.find_root_between(4, 1.0 + 1e-6, c3).unwrap();
        assert_abs_diff_eq!(c4.value.hi(), 1.310_702_641_336_83, epsilon = 1e-12);
        let err = rf.find_root_between(4, 1.0, c3).unwrap_err();
        assert!(matches!(err, Error::InvalidBracket { sign_lo: Sign::Zero, .. }));
    }

    #[test]
    fn geometric_refinement_reaches_the_right_end() {
        let rf = finder();
        let g = rf.scan_grid();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(2.0 - g[g.len() - 2] < 1e-15);
    }

    #[test]
    fn seeding_revalidates() {
        let rf = finder();
        let r3 = rf.largest_root(3).unwrap();
        let fresh = finder();
        let mut bad = r3.clone();
        bad.value = TwoFloat::from(1.7);
        assert!(!fresh.seed_rightmost(bad));
        assert!(fresh.seed_rightmost(r3.clone()));
        assert_eq!(fresh.cached(3), Some(r3));
    }

    #[test]
    fn json_round_trip() {
        let r = finder().largest_root(5).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: RootResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
