//! Recursive bracketing inside a window `[c_k*, c_{k+1}*]`: each generation
//! `n` places one zero of `Phi_n` in every gap between a zero of `Phi_{n-1}`
//! and a parameter that dominates all zeros of `Phi_{n-s}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use twofloat::TwoFloat;

use crate::family::r_hat;
use crate::numeric::{fmt17, Sign};
use crate::par;
use crate::roots::RootFinder;
use crate::{Error, Result};

/// The `(4)_{n,i}` instance that produced an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub n: u32,
    pub i: u32,
    /// Subscripts of the gap's left and right neighbours at birth.
    pub neighbors: (u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledParameter {
    pub value: TwoFloat,
    pub subscript: u32,
    /// 0 for window endpoints, `n - k - 1` for entries of generation `n`.
    pub generation: u32,
    pub rule: Option<Rule>,
    pub residual: f64,
}

impl Serialize for LabeledParameter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LabeledParameter", 5)?;
        st.serialize_field("value", &fmt17(self.value.hi()))?;
        st.serialize_field("subscript", &self.subscript)?;
        st.serialize_field("generation", &self.generation)?;
        st.serialize_field("rule", &self.rule.map(|r| RuleJson { n: r.n, i: r.i }))?;
        st.serialize_field("residual", &fmt17(self.residual))?;
        st.end()
    }
}

#[derive(Serialize)]
struct RuleJson {
    n: u32,
    i: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// The gap was skipped by the combinatorial rule; recorded for audit.
    Info,
    /// The combinatorial rule and the numeric signs disagree, or refinement
    /// failed inside a gap the rule declared valid.
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapDiagnostic {
    pub n: u32,
    pub i: u32,
    pub left_subscript: u32,
    pub right_subscript: u32,
    pub valid: bool,
    /// Sign of `Phi_n` at the endpoint that should be negative.
    pub sign_at_dominating: Sign,
    /// Sign of `Phi_n` at the zero of `Phi_{n-1}`.
    pub sign_at_previous: Sign,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub k: u32,
    pub left: LabeledParameter,
    pub right: LabeledParameter,
    /// Strictly increasing, all inside `(left, right)`.
    pub entries: Vec<LabeledParameter>,
    /// Last generation `n` applied (`k + 1` when none has run).
    pub n_max: u32,
    pub diagnostics: Vec<GapDiagnostic>,
}

impl Serialize for Ladder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Endpoint {
            value: String,
            subscript: u32,
        }
        let ep = |p: &LabeledParameter| Endpoint {
            value: fmt17(p.value.hi()),
            subscript: p.subscript,
        };
        let mut st = s.serialize_struct("Ladder", 5)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("n_max", &self.n_max)?;
        st.serialize_field("endpoints", &[ep(&self.left), ep(&self.right)])?;
        st.serialize_field("entries", &self.entries)?;
        st.serialize_field("diagnostics", &self.diagnostics)?;
        st.end()
    }
}

impl Ladder {
    /// Endpoints and entries, left to right.
    pub fn sequence(&self) -> Vec<&LabeledParameter> {
        std::iter::once(&self.left)
            .chain(&self.entries)
            .chain(std::iter::once(&self.right))
            .collect()
    }

    pub fn subscripts(&self) -> Vec<u32> {
        self.sequence().iter().map(|p| p.subscript).collect()
    }

    /// Number of entries per subscript (endpoints excluded).
    pub fn subscript_counts(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.subscript).or_insert(0) += 1;
        }
        m
    }

    pub fn count_of(&self, n: u32) -> usize {
        self.entries.iter().filter(|e| e.subscript == n).count()
    }

    /// Parameters with subscript `n` in the closed window: `c_k*` and
    /// `c_{k+1}*` count for `n = k` and `n = k + 1`.
    pub fn count_with_endpoints(&self, n: u32) -> usize {
        self.sequence().iter().filter(|p| p.subscript == n).count()
    }

    pub fn hard_diagnostics(&self) -> impl Iterator<Item = &GapDiagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Hard)
    }

    /// Smallest distance between consecutive points of the sequence.
    pub fn min_separation(&self) -> f64 {
        self.sequence()
            .windows(2)
            .map(|w| (w[1].value - w[0].value).hi())
            .fold(f64::INFINITY, f64::min)
    }
}

fn endpoint(finder: &RootFinder, n: u32) -> Result<LabeledParameter> {
    let r = finder.largest_root(n)?;
    Ok(LabeledParameter {
        value: r.value,
        subscript: n,
        generation: 0,
        rule: None,
        residual: r.residual,
    })
}

/// Empty ladder on `[c_k*, c_{k+1}*]`, for a family with return exponent `r`.
pub fn init_ladder_with_r(finder: &RootFinder, k: u32, r: u32) -> Result<Ladder> {
    let lowest = r_hat(r);
    if k < lowest {
        return Err(Error::InvalidInput(format!(
            "window index k = {k} is below max(3, r) = {lowest}"
        )));
    }
    Ok(Ladder {
        k,
        left: endpoint(finder, k)?,
        right: endpoint(finder, k + 1)?,
        entries: Vec::new(),
        n_max: k + 1,
        diagnostics: Vec::new(),
    })
}

/// As [`init_ladder_with_r`], with `r` taken from the family.
pub fn init_ladder(finder: &RootFinder, k: u32) -> Result<Ladder> {
    let r = finder.family().known_r().ok_or_else(|| {
        Error::InvalidInput("return exponent of this family is unknown; pass it explicitly".into())
    })?;
    init_ladder_with_r(finder, k, r)
}

/// The combinatorial validity predicate for a gap whose dominating endpoint
/// has subscript `s`: `2 <= i = n - s`, with `i <= k - 1` at the left
/// boundary (it equals `c_k*`) and `i <= k` anywhere else.
pub fn gap_is_valid(k: u32, n: u32, s: u32, at_left_boundary: bool) -> bool {
    let Some(i) = n.checked_sub(s) else {
        return false;
    };
    let cap = if at_left_boundary { k - 1 } else { k };
    (2..=cap).contains(&i)
}

enum GapOutcome {
    Insert(usize, LabeledParameter),
    Diagnostic(GapDiagnostic),
}

/// Applies generation `n`. Returns the entries inserted.
pub fn step_ladder(finder: &RootFinder, ladder: &mut Ladder, n: u32) -> Result<Vec<LabeledParameter>> {
    if n != ladder.n_max + 1 {
        return Err(Error::InvalidInput(format!(
            "generation {n} requested after {}; generations run in order",
            ladder.n_max
        )));
    }
    let k = ladder.k;
    let seq: Vec<LabeledParameter> = ladder.sequence().into_iter().cloned().collect();
    let gaps: Vec<usize> = (0..seq.len() - 1)
        .filter(|&g| seq[g].subscript == n - 1 || seq[g + 1].subscript == n - 1)
        .collect();

    let outcomes = par::try_map(finder.settings().execution, &gaps, |&g| {
        let (a, b) = (&seq[g], &seq[g + 1]);
        let (prev, dom, dom_index) = if a.subscript == n - 1 {
            (a, b, g + 1)
        } else {
            (b, a, g)
        };
        let s = dom.subscript;
        let i = n.saturating_sub(s);
        let valid = gap_is_valid(k, n, s, dom_index == 0);
        let sign_dom = finder.sign(n, dom.value)?;
        let sign_prev = finder.sign(n, prev.value)?;
        let mut diag = GapDiagnostic {
            n,
            i,
            left_subscript: a.subscript,
            right_subscript: b.subscript,
            valid,
            sign_at_dominating: sign_dom,
            sign_at_previous: sign_prev,
            severity: Severity::Info,
            message: String::new(),
        };
        if !valid {
            diag.message = format!(
                "skipped: i = {i} is outside the admissible range; Phi_{n} sign there is {sign_dom}"
            );
            return Ok::<_, Error>(GapOutcome::Diagnostic(diag));
        }
        if sign_dom != Sign::Negative || sign_prev != Sign::Positive {
            diag.severity = Severity::Hard;
            diag.message = format!(
                "valid gap without the expected signs (+ at c_{}, - at c_{s})",
                n - 1
            );
            return Ok(GapOutcome::Diagnostic(diag));
        }
        match finder.find_root_between(n, a.value, b.value) {
            Ok(root) => Ok(GapOutcome::Insert(
                g,
                LabeledParameter {
                    value: root.value,
                    subscript: n,
                    generation: n - k - 1,
                    rule: Some(Rule {
                        n,
                        i,
                        neighbors: (a.subscript, b.subscript),
                    }),
                    residual: root.residual,
                },
            )),
            Err(e) => {
                diag.severity = Severity::Hard;
                diag.message = format!("refinement failed: {e}");
                Ok(GapOutcome::Diagnostic(diag))
            }
        }
    })?;

    let mut inserted: Vec<(usize, LabeledParameter)> = Vec::new();
    for o in outcomes {
        match o {
            GapOutcome::Insert(g, p) => inserted.push((g, p)),
            GapOutcome::Diagnostic(d) => ladder.diagnostics.push(d),
        }
    }
    // Gap g lies between seq[g] and seq[g+1]; entries index = seq index - 1.
    for (offset, (g, p)) in inserted.iter().enumerate() {
        ladder.entries.insert(g + offset, p.clone());
    }
    ladder.n_max = n;
    Ok(inserted.into_iter().map(|(_, p)| p).collect())
}

/// Runs generations `k + 2 ..= n_max` on a fresh window.
pub fn enumerate(finder: &RootFinder, k: u32, n_max: u32) -> Result<Ladder> {
    if n_max < k + 1 {
        return Err(Error::InvalidInput(format!(
            "n_max = {n_max} must be at least k + 1 = {}",
            k + 1
        )));
    }
    let mut ladder = init_ladder(finder, k)?;
    for n in k + 2..=n_max {
        step_ladder(finder, &mut ladder, n)?;
    }
    Ok(ladder)
}

/// Windows `k` in `ks`, enumerated independently.
pub fn enumerate_windows(finder: &RootFinder, ks: &[u32], n_max: u32) -> Result<Vec<Ladder>> {
    let hi = ks.iter().copied().max().unwrap_or(0) + 1;
    let lo = ks.iter().copied().min().unwrap_or(hi);
    if lo < hi {
        // Endpoints first, so windows share one monotonicity-checked pass.
        finder.largest_roots(lo, hi)?;
    }
    par::try_map(finder.settings().execution, ks, |&k| {
        enumerate(finder, k, n_max.max(k + 1))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Remark1Chain {
    pub c2_star: LabeledParameter,
    pub c3_star: LabeledParameter,
    /// `c_4, c_5, ..., c_{n_max}` in order of construction.
    pub chain: Vec<LabeledParameter>,
    /// `c_2* < c_4 < c_6 < ... < c_7 < c_5 < c_3*`.
    pub ordering_ok: bool,
}

impl Remark1Chain {
    /// Values sorted ascending, with `c_2*` and `c_3*`.
    pub fn ascending(&self) -> Vec<&LabeledParameter> {
        let mut v: Vec<&LabeledParameter> = std::iter::once(&self.c2_star)
            .chain(&self.chain)
            .chain(std::iter::once(&self.c3_star))
            .collect();
        v.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite values"));
        v
    }
}

/// Offset from `c_2*` used to start the search for `c_4`.
const REMARK1_OFFSET: f64 = 1e-6;

/// The extra chain in `(c_2*, c_3*)`: `c_4` is the largest zero of `Phi_4`
/// below `c_3*`, then each `c_n` lies between `c_{n-1}` and `c_{n-2}`.
pub fn remark1_chain(finder: &RootFinder, n_max: u32) -> Result<Remark1Chain> {
    if n_max < 5 {
        return Err(Error::InvalidInput("remark-1 chain needs n_max >= 5".into()));
    }
    let c2 = endpoint(finder, 2)?;
    let c3 = endpoint(finder, 3)?;
    let c4 = finder.find_root_between(4, c2.value + REMARK1_OFFSET, c3.value)?;
    let mut chain = vec![LabeledParameter {
        value: c4.value,
        subscript: 4,
        generation: 1,
        rule: None,
        residual: c4.residual,
    }];
    for n in 5..=n_max {
        let (prev, dom) = if n == 5 {
            (&chain[0], &c3)
        } else {
            (&chain[chain.len() - 1], &chain[chain.len() - 2])
        };
        let (lo, hi) = if prev.value < dom.value {
            (prev.value, dom.value)
        } else {
            (dom.value, prev.value)
        };
        let r = finder.find_root_between(n, lo, hi)?;
        let rule = Rule {
            n,
            i: 2,
            neighbors: if prev.value < dom.value {
                (prev.subscript, dom.subscript)
            } else {
                (dom.subscript, prev.subscript)
            },
        };
        chain.push(LabeledParameter {
            value: r.value,
            subscript: n,
            generation: n - 3,
            rule: Some(rule),
            residual: r.residual,
        });
    }

    let evens: Vec<TwoFloat> = chain.iter().filter(|p| p.subscript % 2 == 0).map(|p| p.value).collect();
    let odds: Vec<TwoFloat> = chain.iter().filter(|p| p.subscript % 2 == 1).map(|p| p.value).collect();
    let increasing = |v: &[TwoFloat]| v.windows(2).all(|w| w[0] < w[1]);
    let decreasing = |v: &[TwoFloat]| v.windows(2).all(|w| w[0] > w[1]);
    let ordering_ok = increasing(&evens)
        && decreasing(&odds)
        && c2.value < evens[0]
        && odds[0] < c3.value
        && evens.last() < odds.last();

    Ok(Remark1Chain {
        c2_star: c2,
        c3_star: c3,
        chain,
        ordering_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowPattern {
    pub k: u32,
    pub n_max: u32,
    /// Subscripts left to right, endpoints included.
    pub subscripts: Vec<u32>,
    /// Generation of each position (0 for endpoints).
    pub generations: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePattern {
    pub windows: Vec<WindowPattern>,
}

/// Symbolic left-to-right layout of each window.
pub fn figure_pattern(ladders: &[Ladder]) -> FigurePattern {
    FigurePattern {
        windows: ladders
            .iter()
            .map(|l| {
                let seq = l.sequence();
                WindowPattern {
                    k: l.k,
                    n_max: l.n_max,
                    subscripts: seq.iter().map(|p| p.subscript).collect(),
                    generations: seq.iter().map(|p| p.generation).collect(),
                }
            })
            .collect(),
    }
}

impl FigurePattern {
    /// One block per window: the subscript sequence, then one row per
    /// generation showing where its entries sit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.windows {
            let width = w.subscripts.iter().map(|s| s.to_string().len()).max().unwrap_or(1) + 1;
            let _ = writeln!(out, "window k={} [c_{}*, c_{}*] n_max={}", w.k, w.k, w.k + 1, w.n_max);
            let line: Vec<String> = w.subscripts.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "  {}", line.join(" "));
            let top = w.generations.iter().copied().max().unwrap_or(0);
            for g in 0..=top {
                let mut row = String::new();
                for (s, &gen) in w.subscripts.iter().zip(&w.generations) {
                    let cell = if gen == g { s.to_string() } else { ".".to_string() };
                    let _ = write!(row, "{cell:>width$}");
                }
                let _ = writeln!(out, "  g{g:<2}{row}");
            }
        }
        out
    }

    /// A number line per window; ticks at ordinal positions, labelled by
    /// subscript, raised by generation.
    pub fn to_svg(&self) -> String {
        const DX: usize = 28;
        const DY: usize = 22;
        const MARGIN: usize = 40;
        let cols = self.windows.iter().map(|w| w.subscripts.len()).max().unwrap_or(2);
        let levels: Vec<u32> = self
            .windows
            .iter()
            .map(|w| w.generations.iter().copied().max().unwrap_or(0))
            .collect();
        let band = |lv: u32| (lv as usize + 2) * DY + 20;
        let width = 2 * MARGIN + (cols.max(2) - 1) * DX + 60;
        let height = MARGIN + levels.iter().map(|&l| band(l)).sum::<usize>();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">"#
        );
        let mut y0 = MARGIN;
        for (w, &lv) in self.windows.iter().zip(&levels) {
            let axis = y0 + (lv as usize + 1) * DY;
            let x_end = MARGIN + (w.subscripts.len() - 1) * DX;
            let _ = writeln!(s, r#"  <g id="window-{}">"#, w.k);
            let _ = writeln!(
                s,
                r#"    <text x="{}" y="{}">k={}</text>"#,
                x_end + 16,
                axis + 4,
                w.k
            );
            let _ = writeln!(
                s,
                r#"    <line x1="{MARGIN}" y1="{axis}" x2="{x_end}" y2="{axis}" stroke="black"/>"#
            );
            for (j, (sub, &g)) in w.subscripts.iter().zip(&w.generations).enumerate() {
                let x = MARGIN + j * DX;
                let top = axis - 6 - g as usize * DY;
                let _ = writeln!(
                    s,
                    r#"    <line x1="{x}" y1="{}" x2="{x}" y2="{top}" stroke="{}"/>"#,
                    axis + 6,
                    if g == 0 { "black" } else { "gray" }
                );
                let _ = writeln!(
                    s,
                    r#"    <text x="{x}" y="{}" text-anchor="middle">{sub}</text>"#,
                    top - 3
                );
            }
            let _ = writeln!(s, "  </g>");
            y0 += band(lv);
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Quadratic;
    use crate::roots::FinderSettings;
    use std::sync::Arc;

    fn finder() -> RootFinder {
        RootFinder::new(Arc::new(Quadratic::new()), FinderSettings::default()).unwrap()
    }

    #[test]
    fn predicate_boundaries() {
        // k = 3, n = 6: (c_3*, c_5) has i = 3 at the left boundary.
        assert!(!gap_is_valid(3, 6, 3, true));
        assert!(gap_is_valid(3, 6, 4, false));
        assert!(gap_is_valid(3, 5, 3, true));
        assert!(!gap_is_valid(3, 8, 4, false));
        assert!(!gap_is_valid(3, 5, 5, false));
    }

    #[test]
    fn first_generations_k3() {
        let rf = finder();
        let l = enumerate(&rf, 3, 5).unwrap();
        assert_eq!(l.subscripts(), vec![3, 5, 4]);
        let l = enumerate(&rf, 3, 6).unwrap();
        assert_eq!(l.subscripts(), vec![3, 5, 6, 4]);
        assert_eq!(l.diagnostics.len(), 1);
        assert_eq!(l.diagnostics[0].severity, Severity::Info);
        let l = enumerate(&rf, 3, 8).unwrap();
        assert_eq!(l.subscripts(), vec![3, 5, 8, 7, 8, 6, 8, 7, 4]);
        assert_eq!(l.hard_diagnostics().count(), 0);
    }

    #[test]
    fn first_generation_k4_and_empty_window() {
        let rf = finder();
        assert_eq!(enumerate(&rf, 4, 6).unwrap().subscripts(), vec![4, 6, 5]);
        let empty = enumerate(&rf, 4, 5).unwrap();
        assert!(empty.entries.is_empty());
        assert!(init_ladder(&rf, 2).is_err());
    }

    #[test]
    fn entries_are_ordered_inside_the_window() {
        let rf = finder();
        let l = enumerate(&rf, 4, 10).unwrap();
        let seq = l.sequence();
        assert!(seq.windows(2).all(|w| w[0].value < w[1].value));
        assert!(l.entries.iter().all(|e| e.residual <= 1e-9));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let par = enumerate(&finder(), 3, 9).unwrap();
        let settings = FinderSettings {
            execution: crate::par::Execution::Sequential,
            ..FinderSettings::default()
        };
        let rf = RootFinder::new(Arc::new(Quadratic::new()), settings).unwrap();
        assert_eq!(enumerate(&rf, 3, 9).unwrap(), par);
    }

    #[test]
    fn remark1_ordering() {
        let c = remark1_chain(&finder(), 7).unwrap();
        assert!(c.ordering_ok);
        let subs: Vec<u32> = c.ascending().iter().map(|p| p.subscript).collect();
        assert_eq!(subs, vec![2, 4, 6, 7, 5, 3]);
        assert!((c.chain[0].value.hi() - 1.3107).abs() < 5e-4);
    }

    #[test]
    fn text_and_svg_render() {
        let rf = finder();
        let p = figure_pattern(&[enumerate(&rf, 4, 6).unwrap()]);
        let t = p.to_text();
        assert!(t.contains("  4 6 5\n"), "{t}");
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<text").count(), 1 + 3);
    }
}
