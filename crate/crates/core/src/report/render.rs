use std::fmt::Write as _;

use serde::Serialize;

use super::{Format, Output, RunConfig};
use crate::numeric::fmt17;
use crate::{Error, Result};

/// A rendered file: suggested name and contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    generated_at: Option<&'a str>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    metadata: Metadata<'a>,
    result: &'a T,
}

fn envelope<T: Serialize>(
    out: &Output,
    cfg: &RunConfig,
    generated_at: Option<&str>,
    result: &T,
) -> Result<String> {
    let e = Envelope {
        metadata: Metadata {
            tool: "superstable",
            version: env!("CARGO_PKG_VERSION"),
            command: out.command(),
            config: cfg,
            generated_at,
        },
        result,
    };
    Ok(serde_json::to_string_pretty(&e)? + "\n")
}

/// Removes `metadata.generated_at` from a rendered JSON document.
pub fn strip_timestamp(json: &str) -> Result<String> {
    let mut v: serde_json::Value = serde_json::from_str(json)?;
    if let Some(m) = v.get_mut("metadata").and_then(|m| m.as_object_mut()) {
        m.remove("generated_at");
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn unsupported(out: &Output, f: Format) -> Error {
    Error::InvalidInput(format!("{} has no {f} rendering", out.command()))
}

fn one(out: &Output, ext: &str, contents: String) -> Vec<Artifact> {
    vec![Artifact {
        name: format!("{}.{ext}", out.command()),
        contents,
    }]
}

/// Renders `out` in format `f`. `generated_at` is only written to JSON.
pub fn render(
    out: &Output,
    f: Format,
    cfg: &RunConfig,
    generated_at: Option<&str>,
) -> Result<Vec<Artifact>> {
    if f == Format::Json {
        let s = match out {
            Output::LargestRoots(r) => envelope(out, cfg, generated_at, r)?,
            Output::Ladder(r) => envelope(out, cfg, generated_at, r)?,
            Output::Counts(r) => envelope(out, cfg, generated_at, r)?,
            Output::Verify(r) => envelope(out, cfg, generated_at, r)?,
            Output::Remark1(r) => envelope(out, cfg, generated_at, r)?,
            Output::ClassX(r) => envelope(out, cfg, generated_at, r)?,
        };
        return Ok(one(out, "json", s));
    }
    match (out, f) {
        (_, Format::Txt) => Ok(one(out, "txt", text(out))),
        (Output::Ladder(r), Format::Svg) => Ok(one(out, "svg", r.pattern.to_svg())),
        (Output::Counts(r), Format::Csv) => Ok(vec![
            Artifact {
                name: "counts_a.csv".into(),
                contents: r.a_csv.clone(),
            },
            Artifact {
                name: "counts_n.csv".into(),
                contents: r.n_csv.clone(),
            },
            Artifact {
                name: "counts_alpha.csv".into(),
                contents: r.alpha_csv.clone(),
            },
        ]),
        (Output::ClassX(_), Format::Csv) | (_, Format::Svg) => Err(unsupported(out, f)),
        (_, Format::Csv) => Ok(one(out, "csv", csv_of(out)?)),
        (_, Format::Json) => unreachable!("handled above"),
    }
}

fn csv_of(out: &Output) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match out {
        Output::LargestRoots(r) => {
            w.write_record(["n", "value", "value_lo", "bracket_lo", "bracket_hi", "width", "residual", "certified"])?;
            for x in &r.roots {
                w.write_record([
                    x.n.to_string(),
                    fmt17(x.value.hi()),
                    fmt17(x.value.lo()),
                    fmt17(x.lo.hi()),
                    fmt17(x.hi.hi()),
                    fmt17(x.width),
                    fmt17(x.residual),
                    x.certified.map_or("n/a".into(), |b| b.to_string()),
                ])?;
            }
        }
        Output::Ladder(r) => {
            w.write_record(["k", "position", "subscript", "generation", "value", "residual", "rule_n", "rule_i"])?;
            for l in &r.ladders {
                for (pos, p) in l.sequence().into_iter().enumerate() {
                    let (rn, ri) = p.rule.map_or((String::new(), String::new()), |r| {
                        (r.n.to_string(), r.i.to_string())
                    });
                    w.write_record([
                        l.k.to_string(),
                        pos.to_string(),
                        p.subscript.to_string(),
                        p.generation.to_string(),
                        fmt17(p.value.hi()),
                        fmt17(p.residual),
                        rn,
                        ri,
                    ])?;
                }
            }
        }
        Output::Verify(r) => {
            w.write_record(["check", "passed", "detail"])?;
            for c in &r.checks {
                w.write_record([c.name.as_str(), &c.passed.to_string(), c.detail.as_str()])?;
            }
        }
        Output::Remark1(r) => {
            w.write_record(["subscript", "value", "residual"])?;
            for p in r.chain.ascending() {
                w.write_record([p.subscript.to_string(), fmt17(p.value.hi()), fmt17(p.residual)])?;
            }
        }
        Output::Counts(_) | Output::ClassX(_) => unreachable!("dispatched in render"),
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn text(out: &Output) -> String {
    let mut s = String::new();
    match out {
        Output::LargestRoots(r) => {
            let _ = writeln!(s, "rightmost roots c_n* ({})", r.family);
            let _ = writeln!(s, "{:>3}  {:<24}  {:<24}  {:<24}  certified", "n", "c_n*", "residual", "width");
            for x in &r.roots {
                let _ = writeln!(
                    s,
                    "{:>3}  {:<24}  {:<24}  {:<24}  {}",
                    x.n,
                    fmt17(x.value.hi()),
                    fmt17(x.residual),
                    fmt17(x.width),
                    x.certified.map_or("n/a".into(), |b| b.to_string())
                );
            }
            let _ = writeln!(s, "strictly increasing: {}", verdict(r.monotone));
        }
        Output::Ladder(r) => {
            s.push_str(&r.pattern.to_text());
            for l in &r.ladders {
                let _ = writeln!(s, "window k={} entries", l.k);
                for p in l.sequence() {
                    let rule = p.rule.map_or(String::from("endpoint"), |r| {
                        format!("rule (n={}, i={}) between c_{} and c_{}", r.n, r.i, r.neighbors.0, r.neighbors.1)
                    });
                    let _ = writeln!(
                        s,
                        "  c_{:<3} {}  residual {}  gen {}  {rule}",
                        p.subscript,
                        fmt17(p.value.hi()),
                        fmt17(p.residual),
                        p.generation
                    );
                }
                for d in &l.diagnostics {
                    let _ = writeln!(s, "  [{:?}] n={} gap c_{}|c_{}: {}", d.severity, d.n, d.left_subscript, d.right_subscript, d.message);
                }
            }
            let _ = writeln!(s, "per-subscript counts vs a(k,n)");
            for c in &r.count_checks {
                let _ = writeln!(s, "  k={:<3} n={:<3} ladder={:<6} a={:<6} {}", c.k, c.n, c.ladder_count, c.a_km, verdict(c.ok));
            }
        }
        Output::Counts(r) => {
            let g = &r.growth;
            let _ = writeln!(s, "(log a(k,m))/m at m = {} against log alpha_k", r.m_max);
            for row in &g.k_rows {
                let _ = writeln!(
                    s,
                    "  k={:<3} alpha={}  (log a)/m={}  log alpha={}  gap={}",
                    row.k,
                    fmt17(row.alpha),
                    fmt17(row.log_a_over_m),
                    fmt17(row.log_alpha),
                    fmt17(row.gap)
                );
            }
            let _ = writeln!(s, "(log N_n)/n, log 2 = {}", fmt17(g.log2));
            for row in &g.n_rows {
                let _ = writeln!(s, "  n={:<4} N_n={:<24} {}", row.n, row.n_total, fmt17(row.log_n_over_n));
            }
            let _ = writeln!(s, "(log N_n)/n increasing: {}", verdict(g.log_n_over_n_increasing()));
        }
        Output::Verify(r) => {
            let _ = writeln!(s, "exact verification up to n = {}", r.n_max_exact);
            for c in &r.checks {
                let _ = write!(s, "[{}] {}", verdict(c.passed), c.name);
                if !c.detail.is_empty() {
                    let _ = write!(s, ": {}", c.detail);
                }
                s.push('\n');
            }
            match r.first_failure() {
                None => {
                    let _ = writeln!(s, "verify: PASS");
                }
                Some(c) => {
                    let _ = writeln!(s, "verify: FAIL (first failing check: {})", c.name);
                }
            }
        }
        Output::Remark1(r) => {
            let _ = writeln!(s, "chain in (c_2*, c_3*), ascending");
            for p in r.chain.ascending() {
                let _ = writeln!(s, "  c_{:<3} {}  residual {}", p.subscript, fmt17(p.value.hi()), fmt17(p.residual));
            }
            for (n, lp) in &r.least_periods {
                let _ = writeln!(s, "  least period at c_{n}: {}", lp.map_or("undetermined".into(), |d| d.to_string()));
            }
            let _ = writeln!(s, "ordering c_2* < c_4 < c_6 < ... < c_5 < c_3*: {}", verdict(r.chain.ordering_ok));
            let _ = writeln!(s, "residuals within tolerance: {}", verdict(r.residuals_ok));
        }
        Output::ClassX(e) => {
            let opt = |x: Option<f64>| x.map_or("none".into(), fmt17);
            let _ = writeln!(s, "class X evidence for {}", e.family);
            let _ = writeln!(s, "  grid size {}, n_max {}", e.grid_size, e.n_max);
            let _ = writeln!(s, "  (a) phi_c(0) > 0: {} ({} failures)", verdict(e.condition_a_ok), e.condition_a_failures);
            let _ = writeln!(
                s,
                "  (b) r = {}, witness c = {}, residual {}",
                e.r_found.map_or("none".into(), |r| r.to_string()),
                opt(e.r_witness_c),
                opt(e.r_witness_residual)
            );
            let _ = writeln!(
                s,
                "  (c) Phi_n(param_hi) < 0: {}{}",
                verdict(e.condition_c_ok),
                e.condition_c_first_failure.map_or(String::new(), |n| format!(" (first failure n = {n})"))
            );
            for note in &e.notes {
                let _ = writeln!(s, "  note: {note}");
            }
        }
    }
    s
}
