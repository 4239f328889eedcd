//! The counts `a_{k,m}`, their totals `N_n`, and the growth constants
//! `alpha_k`.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::exact::{kbonacci_polynomial, rational, SturmChain};
use crate::family::r_hat;
use crate::numeric::{fmt17, ser17};
use crate::{Error, Result};

/// Memoized count tables for a family with return exponent `r`.
#[derive(Debug)]
pub struct CountTable {
    r: u32,
    r_hat: u32,
    /// `rows[k][j] = a(k, k + j)`.
    rows: RwLock<HashMap<u32, Vec<BigUint>>>,
}

impl CountTable {
    pub fn new(r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput(format!("return exponent r = {r} must be >= 2")));
        }
        Ok(CountTable {
            r,
            r_hat: r_hat(r),
            rows: RwLock::new(HashMap::new()),
        })
    }

    /// Table for the quadratic family (`r = 2`).
    pub fn quadratic() -> Self {
        Self::new(2).expect("r = 2 is valid")
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn r_hat(&self) -> u32 {
        self.r_hat
    }

    fn seed(k: u32) -> Vec<BigUint> {
        let mut row = vec![BigUint::one(), BigUint::one()];
        for j in 2..k {
            row.push(BigUint::one() << (j - 2) as usize);
        }
        row.push((BigUint::one() << (k - 2) as usize) - 1u32);
        row
    }

    fn extend(row: &mut Vec<BigUint>, k: u32, j_max: usize) {
        let w = (k - 1) as usize;
        while row.len() <= j_max {
            let j = row.len();
            let next = row[j - w..j].iter().fold(BigUint::zero(), |acc, x| acc + x);
            row.push(next);
        }
    }

    /// `a(k, m)` for `k >= 3`, `m >= k`.
    pub fn a_km(&self, k: u32, m: u32) -> Result<BigUint> {
        if k < 3 {
            return Err(Error::InvalidInput(format!("a(k, m) needs k >= 3, got {k}")));
        }
        if m < k {
            return Err(Error::InvalidInput(format!("a(k, m) needs m >= k, got k = {k}, m = {m}")));
        }
        let j = (m - k) as usize;
        {
            let rows = self.rows.read().expect("count memo poisoned");
            if let Some(v) = rows.get(&k).and_then(|row| row.get(j)) {
                return Ok(v.clone());
            }
        }
        let mut rows = self.rows.write().expect("count memo poisoned");
        let row = rows.entry(k).or_insert_with(|| Self::seed(k));
        Self::extend(row, k, j);
        Ok(row[j].clone())
    }

    /// `N_n`: 1 at `r_hat` and `r_hat + 1`, else `sum_{k=r_hat}^{n-1} a(k, n)`.
    pub fn n_total(&self, n: u32) -> Result<BigUint> {
        if n < self.r_hat {
            return Err(Error::InvalidInput(format!(
                "N_n needs n >= r_hat = {}, got {n}",
                self.r_hat
            )));
        }
        if n <= self.r_hat + 1 {
            return Ok(BigUint::one());
        }
        (self.r_hat..n).try_fold(BigUint::zero(), |acc, k| Ok(acc + self.a_km(k, n)?))
    }
}

/// `alpha_k`, the root in `(1, 2)` of `x^{k-1} - x^{k-2} - ... - 1`, to
/// within `tol`; uniqueness in `(1, 2]` is checked with a Sturm chain.
pub fn alpha(k: u32, tol: f64) -> Result<f64> {
    let poly = kbonacci_polynomial(k)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let count = SturmChain::new(&poly)?.count(&rational(1, 1), &rational(2, 1))?;
    if count != 1 {
        return Err(Error::CertificationFailed {
            n: k,
            detail: format!("{count} roots of the k-bonacci polynomial in (1, 2]"),
        });
    }
    let p = |x: f64| {
        let mut acc = 1.0;
        for _ in 0..k - 1 {
            acc = acc * x - 1.0;
        }
        acc
    };
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Natural logarithm of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("BigUint converts to f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift as usize).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KGrowth {
    pub k: u32,
    pub m: u32,
    #[serde(serialize_with = "ser17")]
    pub log_a_over_m: f64,
    #[serde(serialize_with = "ser17")]
    pub alpha: f64,
    #[serde(serialize_with = "ser17")]
    pub log_alpha: f64,
    #[serde(serialize_with = "ser17")]
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NGrowth {
    pub n: u32,
    /// Decimal string; exceeds any fixed-width integer for large `n`.
    pub n_total: String,
    #[serde(serialize_with = "ser17")]
    pub log_n_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub k_rows: Vec<KGrowth>,
    pub n_rows: Vec<NGrowth>,
    #[serde(serialize_with = "ser17")]
    pub log2: f64,
}

impl GrowthReport {
    /// `(log N_n)/n` never decreases, and increases strictly once `N_n > 1`.
    pub fn log_n_over_n_increasing(&self) -> bool {
        self.n_rows.windows(2).all(|w| {
            let (a, b) = (w[0].log_n_over_n, w[1].log_n_over_n);
            if b > 0.0 {
                b > a
            } else {
                b >= a
            }
        })
    }
}

/// Alpha precision used by reports.
pub const ALPHA_TOL: f64 = 1e-15;

/// `(log a(k, m_max))/m_max` against `log alpha_k` for `k <= k_max`, and
/// `(log N_n)/n` for `r_hat <= n <= m_max`.
pub fn growth_table(table: &CountTable, k_max: u32, m_max: u32) -> Result<GrowthReport> {
    if k_max < 3 || m_max < 2 * k_max {
        return Err(Error::InvalidInput(format!(
            "growth table needs k_max >= 3 and m_max >= 2 k_max (got {k_max}, {m_max})"
        )));
    }
    let mut k_rows = Vec::new();
    for k in 3..=k_max {
        let a = table.a_km(k, m_max)?;
        let alpha_k = alpha(k, ALPHA_TOL)?;
        let log_a_over_m = ln_biguint(&a) / m_max as f64;
        k_rows.push(KGrowth {
            k,
            m: m_max,
            log_a_over_m,
            alpha: alpha_k,
            log_alpha: alpha_k.ln(),
            gap: (log_a_over_m - alpha_k.ln()).abs(),
        });
    }
    let mut n_rows = Vec::new();
    for n in table.r_hat()..=m_max {
        let total = table.n_total(n)?;
        n_rows.push(NGrowth {
            n,
            log_n_over_n: ln_biguint(&total) / n as f64,
            n_total: total.to_string(),
        });
    }
    Ok(GrowthReport {
        k_rows,
        n_rows,
        log2: std::f64::consts::LN_2,
    })
}

/// CSV rows `k,m,a_km` for `3 <= k <= k_max`, `k <= m <= m_max`.
pub fn a_table_csv(table: &CountTable, k_max: u32, m_max: u32) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "m", "a_km"])?;
    for k in 3..=k_max {
        for m in k..=m_max {
            w.write_record([k.to_string(), m.to_string(), table.a_km(k, m)?.to_string()])?;
        }
    }
    finish_csv(w)
}

/// CSV rows `n,N_n,logN_over_n` for `r_hat <= n <= n_max`.
pub fn n_table_csv(table: &CountTable, n_max: u32) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "N_n", "logN_over_n"])?;
    for n in table.r_hat()..=n_max {
        let total = table.n_total(n)?;
        let l = ln_biguint(&total) / n as f64;
        w.write_record([n.to_string(), total.to_string(), fmt17(l)])?;
    }
    finish_csv(w)
}

/// CSV rows `k,alpha_k,log_alpha_k`.
pub fn alpha_table_csv(k_max: u32) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "alpha_k", "log_alpha_k"])?;
    for k in 3..=k_max {
        let a = alpha(k, ALPHA_TOL)?;
        w.write_record([k.to_string(), fmt17(a), fmt17(a.ln())])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}
