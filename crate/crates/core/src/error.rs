use std::io;

use crate::numeric::Sign;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("critical orbit diverged at iterate {iterate} for c = {c}")]
    DivergedOrbit { iterate: u32, c: f64 },

    #[error("parameter c = {c} lies outside the family window [{lo}, {hi}]")]
    ParameterOutOfRange { c: f64, lo: f64, hi: f64 },

    #[error("f_c has no real fixed points for c = {c} <= -1/4")]
    NoRealFixedPoints { c: f64 },

    #[error("closed forms are undefined at the degenerate parameter c = 0")]
    DegenerateParameter,

    #[error("the period-2 orbit is not born yet at c = {c} <= 3/4")]
    OrbitNotBorn { c: f64 },

    #[error("least period is ambiguous at c = {c}: |phi_{iterate}(c)| = {value:e} lies between the residual and separation tolerances")]
    AmbiguousPeriod { c: f64, iterate: u32, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("n = {n} exceeds the configured limit {limit}")]
    ResourceLimit { n: u32, limit: u32 },

    #[error("exact factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("endpoint signs are not strictly opposite on [{lo}, {hi}]: {sign_lo:?} / {sign_hi:?}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        sign_lo: Sign,
        sign_hi: Sign,
    },

    #[error("bracket sign invariant broken during refinement near c = {at}")]
    BracketCorrupted { at: f64 },

    #[error("bracket collapsed at width {width:e} with residual {residual:e} above tolerance")]
    ResidualNotReached { width: f64, residual: f64 },

    #[error("no sign change of phi_{n} found in the parameter window")]
    NoRoot { n: u32 },

    #[error("rightmost roots not increasing: c*_{n} = {value} <= c*_{prev_n} = {prev}")]
    NonMonotone {
        n: u32,
        value: f64,
        prev_n: u32,
        prev: f64,
    },

    #[error("exact certification of c*_{n} failed: {detail}")]
    CertificationFailed { n: u32, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
