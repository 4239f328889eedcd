//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! and then asserts the same verdict. Oracles live in this file and share no
//! code with the library routes they check.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use superstable::counting::{alpha, growth_table, ln_biguint, ALPHA_TOL};
use superstable::exact::{
    phi_polynomial, rational, verify_h_at_7_4, verify_period3_factorization, ExactPolynomial,
    SturmChain,
};
use superstable::family::least_period_of_zero;
use superstable::ladder::enumerate_windows;
use superstable::report::{cmd_verify, render, strip_timestamp, Format, Output, RunConfig, Session};
use superstable::roots::FinderSettings;
use superstable::{CountTable, Quadratic, RootFinder};

fn finder() -> RootFinder {
    RootFinder::new(Arc::new(Quadratic::new()), FinderSettings::default()).unwrap()
}

fn report(n: u32, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let within = elapsed <= limit;
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    // Written to the handle directly so the line survives output capture.
    let line = format!(
        "criterion {n}: {verdict} ({:.3}s, limit {}s) {detail}\n",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(within, "criterion {n} exceeded {}s", limit.as_secs());
}

/// Real root of `c^3 - 2c^2 + c - 1` by Cardano's formula.
fn cardano_c3() -> f64 {
    // Substituting c = t + 2/3 gives t^3 + p t + q with:
    let p: f64 = 1.0 - 4.0 / 3.0;
    let q: f64 = -2.0 * 8.0 / 27.0 + 2.0 / 3.0 - 1.0;
    let d = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    (-q / 2.0 + d).cbrt() + (-q / 2.0 - d).cbrt() + 2.0 / 3.0
}

#[test]
fn criterion_1_closed_form_anchors() {
    let t = Instant::now();
    let rf = finder();
    let c2 = rf.largest_root(2).unwrap().value_f64();
    let c3 = rf.largest_root(3).unwrap().value_f64();
    let oracle = cardano_c3();
    let ok = (c2 - 1.0).abs() <= 1e-10 && (c3 - oracle).abs() <= 1e-9 && (c3 - 1.7549).abs() < 5e-5;
    let detail = format!("c_2* = {c2:.17}, c_3* = {c3:.17}, Cardano root {oracle:.17}");
    report(1, ok, t.elapsed(), Duration::from_secs(1), &detail);
}

#[test]
fn criterion_2_printed_phi4() {
    let t = Instant::now();
    // -c^7 + 4c^6 - 6c^5 + 6c^4 - 5c^3 + 2c^2 - c + 1, lowest degree first.
    let printed = [1i64, -1, 2, -5, 6, -6, 4, -1];
    let phi4 = phi_polynomial(4, 4).unwrap();
    let got: Vec<BigInt> = phi4.primitive_integer_coefficients();
    let ok = phi4.is_integral()
        && phi4.degree() == Some(7)
        && (0..8).all(|d| phi4.coeff(d) == rational(printed[d], 1));
    report(2, ok, t.elapsed(), Duration::from_secs(1), &format!("Phi_4 = {phi4} ({got:?})"));
}

type Bi = HashMap<(u32, u32), i128>;

fn bi_mul(a: &Bi, b: &Bi) -> Bi {
    let mut out = Bi::new();
    for (&(xa, ca), &va) in a {
        for (&(xb, cb), &vb) in b {
            *out.entry((xa + xb, ca + cb)).or_default() += va * vb;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn bi_add(a: &Bi, b: &Bi, sign: i128) -> Bi {
    let mut out = a.clone();
    for (&k, &v) in b {
        *out.entry(k).or_default() += sign * v;
    }
    out.retain(|_, v| *v != 0);
    out
}

/// `f_c^3(x) - x` with `f_c(x) = 1 - c x^2`, by repeated substitution.
fn third_iterate_minus_x() -> Bi {
    let one: Bi = [((0, 0), 1)].into();
    let x: Bi = [((1, 0), 1)].into();
    let c: Bi = [((0, 1), 1)].into();
    let mut y = x.clone();
    for _ in 0..3 {
        y = bi_add(&one, &bi_mul(&c, &bi_mul(&y, &y)), -1);
    }
    bi_add(&y, &x, -1)
}

/// The cofactor as printed, as `(coefficient, x degree, c degree)`.
const PRINTED_H: [(i128, u32, u32); 16] = [
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
];

/// `4096 h(7/4, x)` as integer coefficients in `x`.
fn printed_h_at_7_4_scaled() -> [i128; 7] {
    let mut out = [0i128; 7];
    for (v, xd, cd) in PRINTED_H {
        out[xd as usize] += v * 7i128.pow(cd) * 4i128.pow(6 - cd);
    }
    out
}

fn square(p: &[i128]) -> Vec<i128> {
    let mut out = vec![0; 2 * p.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in p.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[test]
fn criterion_3_period3_algebra() {
    let t = Instant::now();
    let lib = verify_period3_factorization().unwrap();
    let lib74 = verify_h_at_7_4().unwrap();

    let printed: Bi = PRINTED_H.iter().map(|&(v, x, c)| ((x, c), v)).collect();
    let factor: Bi = [((0, 0), 1), ((1, 0), -1), ((2, 1), -1)].into();
    let defect = bi_add(&third_iterate_minus_x(), &bi_mul(&factor, &printed), -1);
    let oracle_factorization = defect.is_empty();

    let lhs = printed_h_at_7_4_scaled();
    let rhs = square(&[8, -252, -98, 343]);
    let oracle_square = lhs.iter().zip(&rhs).all(|(a, b)| a == b);

    let routes_agree =
        oracle_factorization == lib.matches_printed && oracle_square == lib74.square_identity_printed;
    let ok = lib.remainder_is_zero
        && lib.matches_printed
        && lib74.square_identity_printed
        && oracle_factorization
        && oracle_square;
    let mut defect_terms: Vec<_> = defect.into_iter().collect();
    defect_terms.sort();
    let detail = format!(
        "remainder zero: {}; quotient equals printed h: {} (oracle {}); \
         printed 4096 h(7/4,x) equals cubic squared: {} (oracle {}); \
         routes agree: {routes_agree}; (f^3 - x) - (1-x-cx^2) h_printed has terms {:?}; \
         computed quotient satisfies the 7/4 identity: {}",
        lib.remainder_is_zero,
        lib.matches_printed,
        oracle_factorization,
        lib74.square_identity_printed,
        oracle_square,
        defect_terms,
        lib74.square_identity_computed,
    );
    assert!(routes_agree, "library and oracle disagree: {detail}");
    report(3, ok, t.elapsed(), Duration::from_secs(5), &detail);
}

fn horner(coeffs_high_first: &[f64], x: f64) -> f64 {
    coeffs_high_first.iter().fold(0.0, |acc, &a| acc * x + a)
}

#[test]
fn criterion_4_remark1_parameter() {
    let t = Instant::now();
    let rf = finder();
    let c3 = rf.largest_root(3).unwrap();
    let c4 = rf.find_root_between(4, 1.0 + 1e-6, c3.value).unwrap().value_f64();
    let printed = [-1.0, 4.0, -6.0, 6.0, -5.0, 2.0, -1.0, 1.0];
    let residual = horner(&printed, c4).abs();
    let ok = (c4 - 1.3107).abs() <= 5e-4 && residual <= 1e-9;
    let detail = format!("c_4 = {c4:.17}, printed-polynomial residual {residual:.3e}");
    report(4, ok, t.elapsed(), Duration::from_secs(1), &detail);
}

/// `a(k, n)` by simulating the insertion rule on subscripts alone.
fn symbolic_counts(k: u32, n_max: u32) -> Vec<u64> {
    let mut seq = vec![k, k + 1];
    let mut counts = vec![1u64, 1];
    for n in k + 2..=n_max {
        let mut next = Vec::with_capacity(seq.len() * 2);
        let mut born = 0;
        for g in 0..seq.len() - 1 {
            let (a, b) = (seq[g], seq[g + 1]);
            next.push(a);
            let dom_index = if a == n - 1 {
                Some(g + 1)
            } else if b == n - 1 {
                Some(g)
            } else {
                None
            };
            if let Some(d) = dom_index {
                let i = n as i64 - seq[d] as i64;
                let cap = if d == 0 { k - 1 } else { k } as i64;
                if (2..=cap).contains(&i) {
                    next.push(n);
                    born += 1;
                }
            }
        }
        next.push(*seq.last().unwrap());
        seq = next;
        counts.push(born);
    }
    counts
}

#[test]
fn criterion_5_ladder_matches_counts() {
    let t = Instant::now();
    let rf = finder();
    let table = CountTable::quadratic();
    let n_max = 12;
    let ks: Vec<u32> = (3..n_max).collect();
    let ladders = enumerate_windows(&rf, &ks, n_max).unwrap();
    let mut failures = Vec::new();

    let k3: Vec<u64> = (3..=10).map(|n| ladders[0].count_with_endpoints(n) as u64).collect();
    if k3 != [1, 1, 1, 1, 2, 3, 5, 8] {
        failures.push(format!("k=3 sequence {k3:?}"));
    }
    for l in ladders.iter().filter(|l| l.k <= 5) {
        let oracle = symbolic_counts(l.k, n_max);
        for n in l.k..=n_max {
            let got = l.count_with_endpoints(n) as u64;
            let a = table.a_km(l.k, n).unwrap().to_u64().unwrap();
            let sym = oracle[(n - l.k) as usize];
            if got != a || a != sym {
                failures.push(format!("k={} n={n}: ladder {got}, a {a}, symbolic {sym}", l.k));
            }
        }
        if l.hard_diagnostics().next().is_some() {
            failures.push(format!("k={} has hard diagnostics", l.k));
        }
    }

    let mut totals = Vec::new();
    for n in 3..=n_max {
        let aggregated: usize = if n <= 4 {
            ladders[0].count_with_endpoints(n)
        } else {
            ladders
                .iter()
                .filter(|l| l.k < n)
                .map(|l| l.count_with_endpoints(n))
                .sum()
        };
        let expected = table.n_total(n).unwrap().to_usize().unwrap();
        if aggregated != expected {
            failures.push(format!("N_{n}: aggregated {aggregated}, formula {expected}"));
        }
        totals.push(aggregated);
    }
    if totals[2] != 2 || totals[3] != 3 {
        failures.push(format!("N_5 = {}, N_6 = {}", totals[2], totals[3]));
    }

    let tol = rf.tol();
    let mut checked = 0;
    for l in &ladders {
        for p in l.sequence() {
            checked += 1;
            if p.residual > 1e-9 {
                failures.push(format!("c_{} residual {:e}", p.subscript, p.residual));
            }
            let lp = least_period_of_zero(rf.family(), p.value, p.subscript, Default::default(), tol);
            match lp {
                Ok(Some(d)) if p.subscript % d == 0 => {}
                other => failures.push(format!("c_{} least period {other:?}", p.subscript)),
            }
        }
    }
    let detail = format!("{checked} parameters; N_3..N_12 = {totals:?}; failures: {failures:?}");
    report(5, failures.is_empty(), t.elapsed(), Duration::from_secs(120), &detail);
}

/// Roots of `Phi_4` on `(0, 2]` from a uniform grid: exact zeros plus sign
/// changes between consecutive nonzero samples.
fn brute_force_phi4_roots(points: usize) -> usize {
    let phi = |c: f64| (0..3).fold(1.0_f64, |x, _| 1.0 - c * x * x);
    let mut roots = 0;
    let mut last: Option<bool> = None;
    for i in 1..=points {
        let v = phi(2.0 * i as f64 / points as f64);
        if v == 0.0 {
            roots += 1;
            last = None;
            continue;
        }
        if last.is_some_and(|neg| neg != (v < 0.0)) {
            roots += 1;
        }
        last = Some(v < 0.0);
    }
    roots
}

#[test]
fn criterion_6_sturm_lower_bound() {
    let t = Instant::now();
    let table = CountTable::quadratic();
    let (lo, hi) = (rational(0, 1), rational(2, 1));
    let mut counts = Vec::new();
    let mut ok = true;
    for n in 3..=10 {
        let chain = SturmChain::new(&phi_polynomial(n, 10).unwrap()).unwrap();
        let count = chain.count(&lo, &hi).unwrap();
        let total = table.n_total(n).unwrap().to_usize().unwrap();
        ok &= count >= total;
        counts.push((n, count, total));
    }
    let brute = brute_force_phi4_roots(2_000_000);
    ok &= counts[1].1 == 3 && brute == 3;
    let detail = format!("(n, sturm, N_n) = {counts:?}; brute-force Phi_4 roots {brute}");
    report(6, ok, t.elapsed(), Duration::from_secs(300), &detail);
}

/// Rightmost roots from a 50-digit reference computation.
#[allow(clippy::excessive_precision)]
const REFERENCE: [(u32, f64); 13] = [
    (2, 1.0),
    (3, 1.754_877_666_246_692_8),
    (4, 1.940_799_806_529_484_8),
    (5, 1.985_424_253_054_205_3),
    (6, 1.996_376_137_711_193_8),
    (7, 1.999_095_682_327_018_5),
    (8, 1.999_774_048_693_727_3),
    (9, 1.999_943_521_765_674),
    (10, 1.999_985_881_140_392_1),
    (11, 1.999_996_470_335_008_7),
    (12, 1.999_999_117_587_260_8),
    (13, 1.999_999_779_397_058_8),
    (14, 1.999_999_944_849_281_5),
];

#[test]
fn criterion_7_monotone_rightmost_roots() {
    let t = Instant::now();
    let rf = finder();
    let roots = rf.largest_roots(2, 14).unwrap();
    let vals: Vec<f64> = roots.iter().map(|r| r.value_f64()).collect();
    let min_gap = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let max_ref_err = roots
        .iter()
        .zip(REFERENCE)
        .map(|(r, (n, v))| {
            assert_eq!(r.n, n);
            (r.value_f64() - v).abs()
        })
        .fold(0.0, f64::max);
    let ok = min_gap > 1e-10 && *vals.last().unwrap() < 2.0 && max_ref_err < 1e-11;
    let detail = format!("min gap {min_gap:.3e}, c_14* = {:.17}, max reference error {max_ref_err:.3e}", vals[12]);
    report(7, ok, t.elapsed(), Duration::from_secs(60), &detail);
}

/// Root in `(1, 2)` of `x^k - 2x^{k-1} + 1`, by Newton from 2.
fn newton_alpha(k: i32) -> f64 {
    let mut x = 2.0_f64;
    for _ in 0..200 {
        let f = x.powi(k) - 2.0 * x.powi(k - 1) + 1.0;
        let df = k as f64 * x.powi(k - 1) - 2.0 * (k - 1) as f64 * x.powi(k - 2);
        let step = f / df;
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

/// `ln a(k, m)` via the boundary values and the `(k-1)`-term recurrence,
/// carried in f64.
fn ln_a_oracle(k: usize, m: usize) -> f64 {
    let mut a: Vec<f64> = vec![1.0, 1.0];
    a.extend((2..k).map(|j| 2f64.powi(j as i32 - 2)));
    a.push(2f64.powi(k as i32 - 2) - 1.0);
    while a.len() <= m - k {
        let j = a.len();
        a.push(a[j - (k - 1)..j].iter().sum());
    }
    a[m - k].ln()
}

#[test]
fn criterion_8_growth_properties() {
    let t = Instant::now();
    let table = CountTable::quadratic();
    let m = 200;
    let g = growth_table(&table, 8, m).unwrap();
    let mut gaps = Vec::new();
    let mut ok = true;
    for row in &g.k_rows {
        let oracle_log_a = ln_a_oracle(row.k as usize, m as usize);
        let lib_log_a = ln_biguint(&table.a_km(row.k, m).unwrap());
        assert!((oracle_log_a - lib_log_a).abs() < 1e-9 * oracle_log_a, "k={}", row.k);
        assert!((row.alpha - newton_alpha(row.k as i32)).abs() < 1e-12, "k={}", row.k);
        ok &= row.gap < 1e-2;
        gaps.push((row.k, format!("{:.4}", row.gap)));
    }
    let a3 = alpha(3, ALPHA_TOL).unwrap();
    let a10 = alpha(10, ALPHA_TOL).unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let alphas: Vec<f64> = (3..=20).map(|k| alpha(k, ALPHA_TOL).unwrap()).collect();
    let increasing = alphas.windows(2).all(|w| w[0] < w[1]);
    ok &= (a3 - golden).abs() < 1e-9 && a10 > 1.99 && a10 < 2.0 && increasing;
    let detail = format!(
        "|(log a)/m - log alpha_k| at m={m}: {gaps:?}; alpha_3 = {a3:.12}, alpha_10 = {a10:.12}, \
         alpha increasing: {increasing}"
    );
    report(8, ok, t.elapsed(), Duration::from_secs(10), &detail);
}

#[test]
fn criterion_9_log_n_over_n_increases() {
    let t = Instant::now();
    let table = CountTable::quadratic();
    let g = growth_table(&table, 3, 40).unwrap();
    let mut oracle = Vec::new();
    for n in 3..=40usize {
        let total = if n <= 4 {
            1.0
        } else {
            (3..n).map(|k| ln_a_oracle(k, n).exp()).sum::<f64>()
        };
        oracle.push(total.ln() / n as f64);
    }
    let lib: Vec<f64> = g.n_rows.iter().map(|r| r.log_n_over_n).collect();
    let routes_agree = lib.len() == oracle.len()
        && lib.iter().zip(&oracle).all(|(a, b)| (a - b).abs() < 1e-12);
    let strictly_after_4 = lib[1..].windows(2).all(|w| w[0] < w[1]);
    let ok = routes_agree && strictly_after_4 && g.log_n_over_n_increasing();
    let detail = format!(
        "(log N_n)/n: n=5 {:.4}, n=20 {:.4}, n=40 {:.4}; log 2 = {:.4}; routes agree: {routes_agree}",
        lib[2], lib[17], lib[37], g.log2
    );
    report(9, ok, t.elapsed(), Duration::from_secs(10), &detail);
}

#[test]
fn criterion_10_verify_is_deterministic() {
    let t = Instant::now();
    let cfg = RunConfig::default();
    let run = |stamp: &str| {
        let session = Session::open(cfg.clone()).unwrap();
        let out = Output::Verify(cmd_verify(&session, 10).unwrap());
        let json = render(&out, Format::Json, &cfg, Some(stamp)).unwrap();
        let csv = render(&out, Format::Csv, &cfg, None).unwrap();
        let txt = render(&out, Format::Txt, &cfg, None).unwrap();
        (strip_timestamp(&json[0].contents).unwrap(), json[0].contents.clone(), csv, txt)
    };
    let a = run("unix:1");
    let b = run("unix:2");
    let ok = a.0 == b.0 && a.2 == b.2 && a.3 == b.3 && a.1 != b.1;
    let detail = format!("{} JSON bytes after stripping the timestamp", a.0.len());
    report(10, ok, t.elapsed(), Duration::from_secs(300), &detail);
}

#[test]
fn oracle_self_checks() {
    let p = ExactPolynomial::from_integers("c", &[-1, 1, -2, 1]);
    assert!(p.eval_f64(cardano_c3()).abs() < 1e-14);
    assert!((newton_alpha(3) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
    assert_eq!(symbolic_counts(3, 10), vec![1, 1, 1, 1, 2, 3, 5, 8]);
    assert_eq!(brute_force_phi4_roots(10_000), 3);
}
