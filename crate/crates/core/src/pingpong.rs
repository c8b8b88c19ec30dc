//! The ping-pong recurrence: the conditions `d_r G(z) <= 0`, rewritten with
//! the ones-count `sum z_i` replaced by a parameter `k`, determine the cells
//! in the order `z_n, z_1, z_{n-1}, z_2, ...` up to a free bit whenever a
//! threshold argument lands in its ambiguous band.
//!
//! * Right volley, `r = n, .., n - floor(n/2) + 1`:
//!   `z_r = H^(k - n + floor(r/2) + sum_{j <= n-r} z_j)`
//! * Left volley, `m = n - r + 1`:
//!   `z_m = H~(2k - n - 1/2 + floor(m/2) - sum_{j >= r} z_j)`
//! * Middle cell for odd `n`:
//!   `z_{(n+1)/2} = H^(k - n + floor((n+1)/4) + sum_{j <= (n-1)/2} z_j)`
//!
//! A completed `z` with `sum z_i = k` is a Hamming local minimum of `G`, and
//! every such local minimum arises this way.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::{complement, RColoring};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

/// Default node budget for [`solve`].
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Default run-length slack for [`classify`].
pub const DEFAULT_SLACK: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VolleyParams {
    pub n: usize,
    pub k: usize,
}

impl VolleyParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n must be positive"));
        }
        if k > n {
            return Err(Error::param(format!("k = {k} exceeds n = {n}")));
        }
        Ok(VolleyParams { n, k })
    }

    /// `w = 2k - n`.
    pub fn w(&self) -> i64 {
        2 * self.k as i64 - self.n as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Volley {
    Right,
    Left,
    Middle,
}

/// A free bit taken at an ambiguous cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub position: usize,
    pub volley: Volley,
    pub value: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct PingPongSolution {
    pub bits: RColoring,
    pub k_param: usize,
    pub k_actual: usize,
    pub consistent: bool,
    pub choices: Vec<Choice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    All,
    ConsistentOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Complete,
    /// The node budget ran out; the emitted solutions are a subset.
    Truncated,
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub params: VolleyParams,
    pub solutions: Vec<PingPongSolution>,
    pub nodes: u64,
    pub outcome: Outcome,
}

/// `H^`: 0 above 1/2, 1 below 0, free on `[0, 1/2]`. `None` means free.
fn hat_rule(y: HalfInt) -> Option<u8> {
    if y > HalfInt::HALF {
        Some(0)
    } else if y < HalfInt::ZERO {
        Some(1)
    } else {
        None
    }
}

/// `H~`: 0 above 1, 1 below -1, free on `[-1, 1]`.
fn tilde_rule(y: HalfInt) -> Option<u8> {
    if y > HalfInt::ONE {
        Some(0)
    } else if y < -HalfInt::ONE {
        Some(1)
    } else {
        None
    }
}

/// Returns the bit and whether the ambiguous branch (and so `choice`) was used.
pub fn h_hat(y: HalfInt, choice: u8) -> (u8, bool) {
    match hat_rule(y) {
        Some(b) => (b, false),
        None => (choice & 1, true),
    }
}

pub fn h_tilde(y: HalfInt, choice: u8) -> (u8, bool) {
    match tilde_rule(y) {
        Some(b) => (b, false),
        None => (choice & 1, true),
    }
}

/// The solving order as `(position, volley)`.
fn schedule(n: usize) -> Vec<(usize, Volley)> {
    let mut cells = Vec::with_capacity(n);
    for idx in 0..n / 2 {
        cells.push((n - idx, Volley::Right));
        cells.push((idx + 1, Volley::Left));
    }
    if n % 2 == 1 {
        cells.push((n.div_ceil(2), Volley::Middle));
    }
    cells
}

/// Volley argument for `position`, given `low = z_1 + .. + z_{n-r}` for the
/// right/middle volleys, or `high = z_r + .. + z_n` for the left volley.
fn argument(n: usize, k: usize, position: usize, volley: Volley, partial: i64) -> HalfInt {
    let (n, k) = (n as i64, k as i64);
    match volley {
        Volley::Right => HalfInt::from_int(k - n + (position / 2) as i64 + partial),
        Volley::Middle => HalfInt::from_int(k - n + (n + 1) / 4 + partial),
        Volley::Left => {
            HalfInt::from_int(2 * k - n + (position / 2) as i64 - partial) - HalfInt::HALF
        }
    }
}

fn rule(volley: Volley, y: HalfInt) -> Option<u8> {
    match volley {
        Volley::Right | Volley::Middle => hat_rule(y),
        Volley::Left => tilde_rule(y),
    }
}

struct Search<'a, F> {
    params: VolleyParams,
    cells: Vec<(usize, Volley)>,
    budget: u64,
    nodes: u64,
    mode: Mode,
    truncated: bool,
    // z[p - 1] for position p
    z: Vec<u8>,
    choices: Vec<Choice>,
    visit: &'a mut F,
}

impl<F: FnMut(PingPongSolution)> Search<'_, F> {
    /// `low`: ones among left cells so far; `high`: ones among right cells.
    fn descend(&mut self, step: usize, low: i64, high: i64) {
        if self.truncated {
            return;
        }
        let VolleyParams { n, k } = self.params;
        let ones = low + high;
        if self.mode == Mode::ConsistentOnly {
            let remaining = (n - step) as i64;
            if ones > k as i64 || ones + remaining < k as i64 {
                return;
            }
        }
        if step == n {
            let k_actual = ones as usize;
            let bits = RColoring::from_bits(&self.z).expect("n >= 1");
            (self.visit)(PingPongSolution {
                bits,
                k_param: k,
                k_actual,
                consistent: k_actual == k,
                choices: self.choices.clone(),
            });
            return;
        }
        let (position, volley) = self.cells[step];
        let partial = match volley {
            Volley::Left => high,
            Volley::Right | Volley::Middle => low,
        };
        let y = argument(n, k, position, volley, partial);
        let forced = rule(volley, y);
        let options: &[u8] = match forced {
            Some(0) => &[0],
            Some(_) => &[1],
            None => &[0, 1],
        };
        for &bit in options {
            if self.nodes >= self.budget {
                self.truncated = true;
                return;
            }
            self.nodes += 1;
            self.z[position - 1] = bit;
            if forced.is_none() {
                self.choices.push(Choice {
                    position,
                    volley,
                    value: bit,
                });
            }
            let b = bit as i64;
            match volley {
                Volley::Right => self.descend(step + 1, low, high + b),
                Volley::Left | Volley::Middle => self.descend(step + 1, low + b, high),
            }
            if forced.is_none() {
                self.choices.pop();
            }
            self.z[position - 1] = 0;
        }
    }
}

/// Depth-first enumeration of the recurrence, branching both ways at every
/// ambiguous cell, streaming solutions to `visit`. `budget` caps the number
/// of cell assignments.
pub fn solve_with<F: FnMut(PingPongSolution)>(
    params: VolleyParams,
    budget: u64,
    mode: Mode,
    mut visit: F,
) -> Result<(u64, Outcome)> {
    if budget == 0 {
        return Err(Error::param("branch budget must be positive"));
    }
    let mut search = Search {
        params,
        cells: schedule(params.n),
        budget,
        nodes: 0,
        mode,
        truncated: false,
        z: vec![0; params.n],
        choices: Vec::new(),
        visit: &mut visit,
    };
    search.descend(0, 0, 0);
    let outcome = if search.truncated {
        Outcome::Truncated
    } else {
        Outcome::Complete
    };
    Ok((search.nodes, outcome))
}

pub fn solve(params: VolleyParams, budget: u64, mode: Mode) -> Result<Enumeration> {
    let mut solutions = Vec::new();
    let (nodes, outcome) = solve_with(params, budget, mode, |s| solutions.push(s))?;
    Ok(Enumeration {
        params,
        solutions,
        nodes,
        outcome,
    })
}

/// Random playouts: every ambiguous cell takes a uniformly random bit.
/// Returns the distinct solutions found, in first-seen order.
pub fn sample(
    params: VolleyParams,
    playouts: usize,
    seed: u64,
    mode: Mode,
) -> Vec<PingPongSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = schedule(params.n);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for _ in 0..playouts {
        let mut z = vec![0u8; params.n];
        let (mut low, mut high) = (0i64, 0i64);
        let mut choices = Vec::new();
        for &(position, volley) in &cells {
            let partial = if volley == Volley::Left { high } else { low };
            let y = argument(params.n, params.k, position, volley, partial);
            let bit = match rule(volley, y) {
                Some(b) => b,
                None => {
                    let b = rng.gen_range(0..2u8);
                    choices.push(Choice {
                        position,
                        volley,
                        value: b,
                    });
                    b
                }
            };
            z[position - 1] = bit;
            if volley == Volley::Right {
                high += bit as i64;
            } else {
                low += bit as i64;
            }
        }
        let k_actual = (low + high) as usize;
        let consistent = k_actual == params.k;
        if (mode == Mode::All || consistent) && seen.insert(z.clone()) {
            out.push(PingPongSolution {
                bits: RColoring::from_bits(&z).expect("n >= 1"),
                k_param: params.k,
                k_actual,
                consistent,
                choices,
            });
        }
    }
    out
}

/// Does some choice of free bits make every volley equation hold for `z`
/// with parameter `k`?
pub fn satisfies_volleys(z: &RColoring, k: usize) -> Result<bool> {
    z.require_binary()?;
    let n = z.n();
    let bits = z.colors();
    let mut prefix = vec![0i64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + bits[i] as i64;
    }
    Ok(schedule(n).into_iter().all(|(position, volley)| {
        let partial = match volley {
            // sum_{j >= n - m + 1} z_j
            Volley::Left => prefix[n] - prefix[n - position],
            Volley::Right | Volley::Middle => prefix[n - position],
        };
        match rule(volley, argument(n, k, position, volley, partial)) {
            Some(b) => b == bits[position - 1],
            None => true,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
    Unknown,
}

/// Template match of a solution against the case taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub case: Case,
    /// `None` stands for `s = infinity` (and for an undefined `s`).
    pub s: Option<u64>,
    pub w: i64,
    /// Largest deviation of a run length from its template value.
    pub slack: usize,
    /// Ones in the free middle block, where the template has one.
    pub q_ones: Option<usize>,
    pub diagnostic: Option<String>,
}

impl CaseLabel {
    /// Short tag such as `III(s=0)`, `IV` or `Unknown`.
    pub fn tag(&self) -> String {
        match (self.case, self.s) {
            (Case::Unknown, _) => "Unknown".into(),
            (Case::IV, _) | (_, None) => format!("{:?}", self.case),
            (case, Some(s)) => format!("{case:?}(s={s})"),
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} w={} slack={}", self.tag(), self.w, self.slack)
    }
}

/// The `s` with `n/(12s+14) <= w < n/(12s+2)`, for `0 < w < n/2`.
pub fn stage_of(n: usize, w: usize) -> u64 {
    let (n, w) = (n as u64, w as u64);
    let excess = n.saturating_sub(14 * w);
    excess.div_ceil(12 * w)
}

struct Segment {
    color: u8,
    len: i64,
}

fn seg(color: u8, len: i64) -> Segment {
    Segment { color, len }
}

/// Merge adjacent equal colors and drop nonpositive lengths.
fn merged(segments: Vec<Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for s in segments.into_iter().filter(|s| s.len > 0) {
        match out.last_mut() {
            Some(last) if last.color == s.color => last.len += s.len,
            _ => out.push(s),
        }
    }
    out
}

enum Template {
    Fixed(Vec<Segment>),
    Split {
        lead: Vec<Segment>,
        trail: Vec<Segment>,
        max_q_ones: i64,
    },
}

struct Fit {
    slack: usize,
    q_ones: Option<usize>,
}

fn dev(observed: usize, ideal: i64) -> usize {
    (observed as i64 - ideal).unsigned_abs() as usize
}

fn fit(
    z: &[u8],
    runs: &[(u8, usize)],
    template: &Template,
    slack_bound: usize,
) -> std::result::Result<Fit, String> {
    match template {
        Template::Fixed(segments) => {
            if runs.len() != segments.len() {
                return Err(format!(
                    "{} runs, template has {}",
                    runs.len(),
                    segments.len()
                ));
            }
            let mut slack = 0;
            for (i, (&(c, l), s)) in runs.iter().zip(segments).enumerate() {
                if c != s.color {
                    return Err(format!("run {} has color {c}, template {}", i + 1, s.color));
                }
                slack = slack.max(dev(l, s.len));
            }
            Ok(Fit {
                slack,
                q_ones: None,
            })
        }
        Template::Split {
            lead,
            trail,
            max_q_ones,
        } => {
            let (a, b, m) = (lead.len(), trail.len(), runs.len());
            if a == 0 || b == 0 || m < b || m - b + 1 < a {
                return Err(format!("{m} runs, template needs at least {}", a + b - 1));
            }
            let first_trail = m - b;
            for (i, s) in lead.iter().enumerate() {
                if runs[i].0 != s.color {
                    return Err(format!("leading run {} has color {}", i + 1, runs[i].0));
                }
            }
            for (j, s) in trail.iter().enumerate() {
                if runs[first_trail + j].0 != s.color {
                    return Err(format!(
                        "trailing run {} has color {}",
                        j + 1,
                        runs[first_trail + j].0
                    ));
                }
            }
            let mut slack = 0;
            for i in 0..a - 1 {
                slack = slack.max(dev(runs[i].1, lead[i].len));
            }
            for j in 1..b {
                slack = slack.max(dev(runs[first_trail + j].1, trail[j].len));
            }
            // the outermost lead and trail runs may spill into the free block
            let lead_last = &lead[a - 1];
            let trail_first = &trail[0];
            let (take_lead, take_trail) = if first_trail == a - 1 {
                let avail = runs[a - 1].1 as i64;
                let l = avail.min(lead_last.len);
                (l, (avail - l).min(trail_first.len))
            } else {
                (
                    (runs[a - 1].1 as i64).min(lead_last.len),
                    (runs[first_trail].1 as i64).min(trail_first.len),
                )
            };
            slack = slack
                .max(dev(take_lead as usize, lead_last.len))
                .max(dev(take_trail as usize, trail_first.len));
            let lead_end =
                runs[..a - 1].iter().map(|&(_, l)| l).sum::<usize>() + take_lead as usize;
            let trail_start = z.len()
                - runs[first_trail + 1..]
                    .iter()
                    .map(|&(_, l)| l)
                    .sum::<usize>()
                - take_trail as usize;
            let q_ones = z[lead_end..trail_start].iter().filter(|&&b| b == 1).count();
            if q_ones as i64 > max_q_ones + slack_bound as i64 {
                return Err(format!("free block has {q_ones} ones, bound {max_q_ones}"));
            }
            Ok(Fit {
                slack,
                q_ones: Some(q_ones),
            })
        }
    }
}

/// Blocks `(1^{6w} 0^{6w})` alternating for `s` half-periods in total, then the
/// free block, then the mirror image closing on `0^w`.
fn split_template(s: u64, w: i64, max_q_ones: i64) -> Template {
    let mut lead = vec![seg(0, 4 * w)];
    for i in 0..s {
        lead.push(seg(if i % 2 == 0 { 1 } else { 0 }, 6 * w));
    }
    let mut trail = Vec::new();
    for i in 0..s {
        // mirror: the block next to 0^w is a 1-block
        trail.push(seg(if i % 2 == 0 { 1 } else { 0 }, 6 * w));
    }
    trail.reverse();
    trail.push(seg(0, w));
    Template::Split {
        lead: merged(lead),
        trail: merged(trail),
        max_q_ones,
    }
}

fn case_iv_fit(runs: &[(u8, usize)], z: &[u8]) -> std::result::Result<Fit, String> {
    let mut idx = 0;
    let mut slack = 0;
    if let Some(&(0, g1)) = runs.first() {
        slack = g1.saturating_sub(2);
        idx = 1;
    }
    let periodic = |l: usize| (3..=11).contains(&l);
    let mut lo = idx;
    while lo < runs.len() && periodic(runs[lo].1) {
        lo += 1;
    }
    let mut hi = runs.len();
    while hi > lo && periodic(runs[hi - 1].1) {
        hi -= 1;
    }
    let start: usize = runs[..lo].iter().map(|&(_, l)| l).sum();
    let end: usize = z.len() - runs[hi..].iter().map(|&(_, l)| l).sum::<usize>();
    let q_ones = z[start..end].iter().filter(|&&b| b == 1).count();
    if q_ones > 22 {
        return Err(format!("free block has {q_ones} ones, bound 22"));
    }
    Ok(Fit {
        slack,
        q_ones: Some(q_ones),
    })
}

/// Classify with `k` taken as the ones-count of `z`.
pub fn classify(z: &RColoring, slack_bound: usize) -> Result<CaseLabel> {
    classify_with_k(z, z.ones(), slack_bound)
}

/// Match `z` against the case templates for parameter `k`. The pair is first
/// brought to `k >= n/2` by swapping colors.
pub fn classify_with_k(z: &RColoring, k: usize, slack_bound: usize) -> Result<CaseLabel> {
    z.require_binary()?;
    let n = z.n();
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds n = {n}")));
    }
    let (z, k) = if 2 * k < n {
        (complement(z)?, n - k)
    } else {
        (z.clone(), k)
    };
    let w = 2 * k - n;
    let runs = z.runs().runs;
    let bits = z.colors();
    let label = |case, s, fit: std::result::Result<Fit, String>| match fit {
        Ok(f) if f.slack <= slack_bound => CaseLabel {
            case,
            s,
            w: w as i64,
            slack: f.slack,
            q_ones: f.q_ones,
            diagnostic: None,
        },
        Ok(f) => CaseLabel {
            case: Case::Unknown,
            s,
            w: w as i64,
            slack: f.slack,
            q_ones: f.q_ones,
            diagnostic: Some(format!("closest template {case:?} needs slack {}", f.slack)),
        },
        Err(msg) => CaseLabel {
            case: Case::Unknown,
            s,
            w: w as i64,
            slack: 0,
            q_ones: None,
            diagnostic: Some(format!("{case:?}: {msg}")),
        },
    };

    if 2 * w >= n {
        let fit = if runs.len() == 1 {
            Ok(Fit {
                slack: 0,
                q_ones: None,
            })
        } else {
            Err("for w >= n/2 only constant solutions exist".to_string())
        };
        return Ok(label(Case::I, Some(0), fit));
    }
    if w == 0 {
        let direct = case_iv_fit(&runs, bits);
        let swapped_z = complement(&z)?;
        let swapped = case_iv_fit(&swapped_z.runs().runs, swapped_z.colors());
        let best = match (direct, swapped) {
            (Ok(a), Ok(b)) => Ok(if b.slack < a.slack { b } else { a }),
            (Ok(a), Err(_)) | (Err(_), Ok(a)) => Ok(a),
            (Err(e), Err(_)) => Err(e),
        };
        return Ok(label(Case::IV, None, best));
    }

    let s = stage_of(n, w);
    let wi = w as i64;
    let ni = n as i64;
    let half = ni / 2;
    let boundary = (12 * s as i64 + 8) * wi;
    let (case, template) = if s == 0 {
        if 8 * wi >= ni {
            (
                Case::I,
                Template::Fixed(merged(vec![
                    seg(0, half),
                    seg(1, ni - half - wi),
                    seg(0, wi),
                ])),
            )
        } else {
            (
                Case::III,
                Template::Fixed(merged(vec![
                    seg(0, 4 * wi),
                    seg(1, ni - 5 * wi),
                    seg(0, wi),
                ])),
            )
        }
    } else if boundary >= ni {
        if s == 1 {
            (
                Case::II,
                Template::Fixed(merged(vec![
                    seg(0, 4 * wi),
                    seg(1, half - 4 * wi),
                    seg(0, ni - half - 7 * wi),
                    seg(1, 6 * wi),
                    seg(0, wi),
                ])),
            )
        } else {
            (Case::II, split_template(s, wi, 12 * wi))
        }
    } else {
        (Case::III, split_template(s, wi, 6 * wi))
    };
    Ok(label(
        case,
        Some(s),
        fit(bits, &runs, &template, slack_bound),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurveyMode {
    Exhaustive { budget: u64 },
    Sampled { playouts: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveyRow {
    pub n: usize,
    pub k: usize,
    pub w: i64,
    pub consistent_count: usize,
    pub truncated: bool,
    pub case_histogram: BTreeMap<String, usize>,
    pub representative: Option<RColoring>,
    pub representative_label: Option<CaseLabel>,
}

impl SurveyRow {
    pub const CSV_HEADER: &'static str = "n,k,w,consistent_count,truncated,case_histogram";

    pub fn csv_line(&self) -> String {
        let hist: Vec<String> = self
            .case_histogram
            .iter()
            .map(|(tag, count)| format!("{tag}:{count}"))
            .collect();
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.k,
            self.w,
            self.consistent_count,
            self.truncated,
            hist.join(";")
        )
    }
}

/// For each `k` in `ceil(n/2)..=n`, enumerate (or sample) the consistent
/// solutions and classify them. The representative of a row is its
/// closest template match.
pub fn survey_w(n: usize, mode: SurveyMode, slack_bound: usize) -> Result<Vec<SurveyRow>> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if let SurveyMode::Exhaustive { budget: 0 } = mode {
        return Err(Error::param("branch budget must be positive"));
    }
    (n.div_ceil(2)..=n)
        .into_par_iter()
        .map(|k| {
            let params = VolleyParams::new(n, k)?;
            let (solutions, truncated) = match mode {
                SurveyMode::Exhaustive { budget } => {
                    let e = solve(params, budget, Mode::ConsistentOnly)?;
                    (e.solutions, e.outcome == Outcome::Truncated)
                }
                SurveyMode::Sampled { playouts, seed } => (
                    sample(params, playouts, seed ^ k as u64, Mode::ConsistentOnly),
                    false,
                ),
            };
            let mut case_histogram = BTreeMap::new();
            let mut labels = Vec::with_capacity(solutions.len());
            for s in &solutions {
                let label = classify_with_k(&s.bits, k, slack_bound)?;
                *case_histogram.entry(label.tag()).or_insert(0) += 1;
                labels.push(label);
            }
            // best-matching labelled solution, else the first one
            let pick = (0..labels.len())
                .min_by_key(|&i| (labels[i].case == Case::Unknown, labels[i].slack, i));
            Ok(SurveyRow {
                n,
                k,
                w: params.w(),
                consistent_count: solutions.len(),
                truncated,
                case_histogram,
                representative: pick.map(|i| solutions[i].bits.clone()),
                representative_label: pick.map(|i| labels[i].clone()),
            })
        })
        .collect()
}
