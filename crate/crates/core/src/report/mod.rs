//! Run configuration, command implementations and their JSON/CSV/text/SVG
//! renderings.

pub mod cache;
mod render;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

pub use cache::{LoadStats, RootCache, CACHE_ENV};
pub use render::{render, strip_timestamp, Artifact};

use crate::counting::{growth_table, CountTable, GrowthReport};
use crate::exact::{
    phi_polynomial, verify_h_at_7_4, verify_period3_factorization, ExactPolynomial,
    DEFAULT_EXACT_LIMIT,
};
use crate::family::{class_x_check, family_by_name, least_period_of_zero, ClassXEvidence};
use crate::ladder::{enumerate_windows, figure_pattern, remark1_chain, FigurePattern, Ladder, Remark1Chain};
use crate::numeric::{Precision, Tolerances};
use crate::par::Execution;
use crate::roots::{FinderSettings, RootFinder, RootResult};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_RESOURCE_LIMIT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::ParameterOutOfRange { .. }
        | Error::NoRealFixedPoints { .. }
        | Error::DegenerateParameter
        | Error::OrbitNotBorn { .. }
        | Error::InvalidBracket { .. } => EXIT_BAD_INPUT,
        Error::ResourceLimit { .. } => EXIT_RESOURCE_LIMIT,
        Error::DivergedOrbit { .. }
        | Error::AmbiguousPeriod { .. }
        | Error::FactorizationFailure(_)
        | Error::BracketCorrupted { .. }
        | Error::ResidualNotReached { .. }
        | Error::NoRoot { .. }
        | Error::NonMonotone { .. }
        | Error::CertificationFailed { .. } => EXIT_NUMERIC,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Txt,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "txt" => Ok(Format::Txt),
            "svg" => Ok(Format::Svg),
            other => Err(Error::InvalidInput(format!("unknown format '{other}'"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Txt => "txt",
            Format::Svg => "svg",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub family: String,
    pub tol: Tolerances,
    /// Largest `n` for which `Phi_n` is built exactly.
    pub exact_limit: u32,
    /// Largest `n` whose rightmost root is Sturm-certified.
    pub certify_limit: u32,
    /// Largest `n` accepted by numeric root searches.
    pub numeric_limit: u32,
    pub grid_points: usize,
    pub precision: Precision,
    pub execution: Execution,
    pub out_dir: Option<PathBuf>,
    pub cache_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = FinderSettings::default();
        RunConfig {
            family: "quadratic".into(),
            tol: f.tol,
            exact_limit: DEFAULT_EXACT_LIMIT,
            certify_limit: f.certify_limit,
            numeric_limit: 20,
            grid_points: f.grid_points,
            precision: f.precision,
            execution: f.execution,
            out_dir: None,
            cache_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.exact_limit > self.numeric_limit {
            return Err(Error::InvalidInput(format!(
                "exact limit {} exceeds numeric limit {}",
                self.exact_limit, self.numeric_limit
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidInput("grid must have at least 2 points".into()));
        }
        Ok(())
    }

    fn finder_settings(&self) -> FinderSettings {
        FinderSettings {
            tol: self.tol,
            precision: self.precision,
            grid_points: self.grid_points,
            certify_limit: self.certify_limit.min(self.exact_limit),
            exact_limit: self.exact_limit,
            execution: self.execution,
            ..FinderSettings::default()
        }
    }
}

/// A configured finder and count table, optionally backed by a cache file.
#[derive(Debug)]
pub struct Session {
    pub config: RunConfig,
    pub finder: RootFinder,
    pub counts: CountTable,
    cache: Option<RootCache>,
    pub cache_stats: Option<LoadStats>,
}

impl Session {
    pub fn open(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let family = family_by_name(&config.family)?;
        let r = family.known_r().unwrap_or(2);
        let finder = RootFinder::new(Arc::clone(&family), config.finder_settings())?;
        let mut cache = config.cache_path.as_ref().map(RootCache::open);
        let cache_stats = cache.as_mut().map(|c| c.load_into(&finder));
        Ok(Session {
            counts: CountTable::new(r)?,
            config,
            finder,
            cache,
            cache_stats,
        })
    }

    /// Writes newly found roots back to the cache file, if there is one.
    pub fn persist(&mut self) -> Result<()> {
        if let Some(c) = self.cache.as_mut() {
            c.absorb(&self.finder);
            c.save()?;
        }
        Ok(())
    }

    fn r(&self) -> u32 {
        self.counts.r()
    }

    fn check_numeric_limit(&self, n: u32) -> Result<()> {
        if n > self.config.numeric_limit {
            return Err(Error::ResourceLimit {
                n,
                limit: self.config.numeric_limit,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargestRootsReport {
    pub family: String,
    pub roots: Vec<RootResult>,
    /// Every consecutive pair increases by more than the minimum gap.
    pub monotone: bool,
}

/// `c_n*` for `n = r ..= n_max`.
pub fn cmd_largest_roots(session: &Session, n_max: u32) -> Result<LargestRootsReport> {
    let lo = session.r();
    if n_max < lo {
        return Err(Error::InvalidInput(format!("n_max must be >= {lo}")));
    }
    session.check_numeric_limit(n_max)?;
    let roots = session.finder.largest_roots(lo, n_max)?;
    Ok(LargestRootsReport {
        family: session.finder.family().name().to_string(),
        monotone: true,
        roots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountCheck {
    pub k: u32,
    pub n: u32,
    pub ladder_count: usize,
    pub a_km: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub ladders: Vec<Ladder>,
    pub pattern: FigurePattern,
    pub count_checks: Vec<CountCheck>,
}

impl LadderReport {
    pub fn counts_ok(&self) -> bool {
        self.count_checks.iter().all(|c| c.ok)
    }
}

pub fn cmd_ladder(session: &Session, ks: &[u32], n_max: u32) -> Result<LadderReport> {
    if ks.is_empty() {
        return Err(Error::InvalidInput("at least one window index k is required".into()));
    }
    session.check_numeric_limit(n_max.max(ks.iter().copied().max().unwrap_or(0) + 1))?;
    let ladders = enumerate_windows(&session.finder, ks, n_max)?;
    let mut count_checks = Vec::new();
    for l in &ladders {
        for n in l.k..=l.n_max {
            let a = session.counts.a_km(l.k, n)?;
            let got = l.count_with_endpoints(n);
            count_checks.push(CountCheck {
                k: l.k,
                n,
                ladder_count: got,
                ok: a == got.into(),
                a_km: a.to_string(),
            });
        }
    }
    Ok(LadderReport {
        pattern: figure_pattern(&ladders),
        ladders,
        count_checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsReport {
    pub k_max: u32,
    pub m_max: u32,
    pub growth: GrowthReport,
    #[serde(skip)]
    pub a_csv: String,
    #[serde(skip)]
    pub n_csv: String,
    #[serde(skip)]
    pub alpha_csv: String,
}

pub fn cmd_counts(session: &Session, k_max: u32, m_max: u32) -> Result<CountsReport> {
    let t = &session.counts;
    Ok(CountsReport {
        k_max,
        m_max,
        growth: growth_table(t, k_max, m_max)?,
        a_csv: crate::counting::a_table_csv(t, k_max, m_max)?,
        n_csv: crate::counting::n_table_csv(t, m_max)?,
        alpha_csv: crate::counting::alpha_table_csv(k_max)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n_max_exact: u32,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// The printed degree-7 expansion of `Phi_4`.
pub fn printed_phi4() -> ExactPolynomial {
    ExactPolynomial::from_integers("c", &[1, -1, 2, -5, 6, -6, 4, -1])
}

/// Exact checks: Sturm counts against `N_n`, then the printed identities.
pub fn cmd_verify(session: &Session, n_max_exact: u32) -> Result<VerifyReport> {
    let limit = session.config.exact_limit;
    if n_max_exact > limit {
        return Err(Error::ResourceLimit {
            n: n_max_exact,
            limit,
        });
    }
    let mut checks = Vec::new();
    let (lo, hi) = session.finder.family().param_range();
    let (lo_q, hi_q) = (crate::exact::rational_from_f64(lo), crate::exact::rational_from_f64(hi));
    for n in session.counts.r_hat()..=n_max_exact {
        let chain = session
            .finder
            .sturm_chain(n)?
            .ok_or_else(|| Error::InvalidInput("family has no exact critical-orbit polynomial".into()))?;
        let count = chain.count(&lo_q, &hi_q)?;
        let total = session.counts.n_total(n)?;
        checks.push(Check {
            name: format!("sturm_count(Phi_{n}) >= N_{n}"),
            passed: total <= count.into(),
            detail: format!("{count} distinct roots in ({lo}, {hi}]; N_{n} = {total}"),
        });
    }

    let phi4 = phi_polynomial(4, limit.max(4))?;
    checks.push(Check {
        name: "Phi_4 equals the printed degree-7 polynomial".into(),
        passed: phi4 == printed_phi4(),
        detail: format!("Phi_4 = {phi4}"),
    });

    let p3 = verify_period3_factorization()?;
    checks.push(Check {
        name: "f_c^3(x) - x divisible by 1 - x - c x^2".into(),
        passed: p3.remainder_is_zero,
        detail: "remainder 0".into(),
    });
    let mismatch = p3
        .mismatches
        .iter()
        .map(|m| format!("x^{}: computed {} vs printed {}", m.x_degree, m.computed, m.printed))
        .collect::<Vec<_>>()
        .join("; ");
    checks.push(Check {
        name: "quotient equals the printed h(c,x)".into(),
        passed: p3.matches_printed,
        detail: if mismatch.is_empty() {
            "all coefficients agree".into()
        } else {
            mismatch
        },
    });

    let s = verify_h_at_7_4()?;
    checks.push(Check {
        name: "64^2 h(7/4,x) = (343x^3-98x^2-252x+8)^2 for the computed quotient".into(),
        passed: s.square_identity_computed,
        detail: String::new(),
    });
    checks.push(Check {
        name: "64^2 h(7/4,x) = (343x^3-98x^2-252x+8)^2 for the printed h".into(),
        passed: s.square_identity_printed,
        detail: format!("difference {}", s.printed_defect),
    });
    checks.push(Check {
        name: "343x^3-98x^2-252x+8 has 3 distinct real roots".into(),
        passed: s.cubic_real_roots == 3,
        detail: format!("Sturm count on (-2, 2]: {}", s.cubic_real_roots),
    });
    checks.push(Check {
        name: "gcd(h(7/4,x), dh/dx(7/4,x)) has degree 3".into(),
        passed: s.gcd_degree == 3 && s.cubic_divides_derivative,
        detail: format!(
            "gcd degree {}; cubic divides dh/dx: {}",
            s.gcd_degree, s.cubic_divides_derivative
        ),
    });
    let cubic3 = ExactPolynomial::from_integers("c", &[-1, 1, -2, 1]);
    checks.push(Check {
        name: "c^3 - 2c^2 + c - 1 = -Phi_3".into(),
        passed: &cubic3 + &phi_polynomial(3, limit.max(3))? == ExactPolynomial::zero("c"),
        detail: String::new(),
    });

    Ok(VerifyReport {
        n_max_exact,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Remark1Report {
    pub chain: Remark1Chain,
    pub residuals_ok: bool,
    /// `(subscript, least period of 0)` for each chain element.
    pub least_periods: Vec<(u32, Option<u32>)>,
}

impl Remark1Report {
    pub fn periods_ok(&self) -> bool {
        self.least_periods.iter().all(|&(n, p)| p == Some(n))
    }
}

pub fn cmd_remark1(session: &Session, n_max: u32) -> Result<Remark1Report> {
    session.check_numeric_limit(n_max)?;
    let chain = remark1_chain(&session.finder, n_max)?;
    let tol = session.finder.tol();
    let residuals_ok = chain.chain.iter().all(|p| p.residual <= tol.residual);
    let least_periods = chain
        .chain
        .iter()
        .map(|p| {
            let lp = least_period_of_zero(
                session.finder.family(),
                p.value,
                p.subscript,
                session.config.precision,
                tol,
            );
            (p.subscript, lp.ok().flatten())
        })
        .collect();
    Ok(Remark1Report {
        chain,
        residuals_ok,
        least_periods,
    })
}

pub fn cmd_class_x(session: &Session, grid: usize, n_max: u32) -> Result<ClassXEvidence> {
    class_x_check(
        session.finder.family(),
        grid,
        n_max,
        session.config.precision,
        session.finder.tol(),
    )
}

/// Output of any command, for rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    LargestRoots(LargestRootsReport),
    Ladder(LadderReport),
    Counts(CountsReport),
    Verify(VerifyReport),
    Remark1(Remark1Report),
    ClassX(ClassXEvidence),
}

impl Output {
    pub fn command(&self) -> &'static str {
        match self {
            Output::LargestRoots(_) => "largest-roots",
            Output::Ladder(_) => "ladder",
            Output::Counts(_) => "counts",
            Output::Verify(_) => "verify",
            Output::Remark1(_) => "remark1",
            Output::ClassX(_) => "class-x",
        }
    }

    /// Exit status implied by the content (checks that ran but failed).
    pub fn exit_status(&self) -> i32 {
        let ok = match self {
            Output::LargestRoots(r) => r.monotone,
            Output::Ladder(r) => r.counts_ok() && r.ladders.iter().all(|l| l.hard_diagnostics().next().is_none()),
            Output::Counts(_) => true,
            Output::Verify(r) => r.passed,
            Output::Remark1(r) => r.chain.ordering_ok && r.residuals_ok && r.periods_ok(),
            Output::ClassX(e) => e.all_ok(),
        };
        if ok {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }
}
