//! The `schur` command line. Every subcommand prints one JSON object per
//! result (carrying `schema_version`) unless `--csv`/`--format` asks for a
//! table or plain text.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{self, certify_local_min, delta_report, Objective};
use crate::coloring::{
    format_coloring, make_extension, make_zinf, make_zs, parse_coloring,
    parse_coloring_with_palette, FamilyParams, Format, RColoring,
};
use crate::counting::{count_fast, count_naive, TripleCount};
use crate::error::Error;
use crate::pingpong::{
    classify_with_k, sample, solve, survey_w, Mode, Outcome, SurveyMode, SurveyRow, VolleyParams,
    DEFAULT_BUDGET, DEFAULT_SLACK,
};
use crate::search::{
    self, brute_global_min_capped, brute_local_minima_capped, descend, multistart, Rule,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Schur(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "schur",
    version,
    about = "Monochromatic Schur triples in colorings of [1,n]"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Shorthand for --format csv
    #[arg(long, global = true)]
    pub csv: bool,

    /// Write results here instead of stdout
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for parallel sections (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Zs,
    Zinf,
    Extension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "G", alias = "g")]
    G,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::F => Objective::F,
            ObjectiveArg::G => Objective::G,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Best,
    First,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Best => Rule::BestImprovement,
            RuleArg::First => Rule::FirstImprovement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    Consistent,
}

/// A coloring given literally or by family parameters.
#[derive(Debug, Clone, Args)]
pub struct ColoringArgs {
    /// Raw digits ("00110") or runs ("0^4 1^6 0^1")
    #[arg(long, conflicts_with = "family")]
    pub coloring: Option<String>,

    /// Palette size for --coloring (default: smallest covering the digits)
    #[arg(long)]
    pub palette: Option<usize>,

    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,

    #[arg(long, default_value_t = 0)]
    pub s: u64,

    #[arg(long, default_value_t = 3)]
    pub t: usize,

    #[arg(long, default_value_t = 2)]
    pub r: usize,

    #[arg(long)]
    pub n: Option<usize>,
}

impl ColoringArgs {
    pub fn resolve(&self) -> Result<RColoring, CliError> {
        if let Some(text) = &self.coloring {
            return Ok(match self.palette {
                Some(r) => parse_coloring_with_palette(text, r)?,
                None => parse_coloring(text)?,
            });
        }
        let family = self
            .family
            .ok_or_else(|| CliError::Usage("give --coloring or --family".into()))?;
        let n = self
            .n
            .ok_or_else(|| CliError::Usage("--family needs --n".into()))?;
        let params = match family {
            FamilyArg::Zs => FamilyParams::zs(self.s, n),
            FamilyArg::Zinf => FamilyParams::zinf(self.t, n),
            FamilyArg::Extension => FamilyParams::extension(self.r, n),
        };
        Ok(params.build()?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count monochromatic triples
    Count {
        #[command(flatten)]
        coloring: ColoringArgs,
        /// Also count {i, i, 2i}
        #[arg(long)]
        include_equal: bool,
    },
    /// Tabulate F and normalized coefficients of Z_s and Z_inf^t
    Families {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        s: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "3,7,11")]
        t: Vec<usize>,
    },
    /// Discrete partial derivatives (closed form, oracle-checked at --index)
    Grad {
        #[command(flatten)]
        coloring: ColoringArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::F)]
        objective: ObjectiveArg,
        /// 1-based index; without it the whole closed-form gradient is printed
        #[arg(long)]
        index: Option<usize>,
    },
    /// Check whether a coloring is a Hamming local minimum
    Certify {
        #[command(flatten)]
        coloring: ColoringArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::F)]
        objective: ObjectiveArg,
        /// Include all n derivatives in the output
        #[arg(long)]
        deltas: bool,
    },
    /// Enumerate ping-pong solutions, or survey all k >= n/2
    Pingpong {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "survey")]
        k: Option<usize>,
        #[arg(long)]
        survey: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Emit every completed recurrence solution, or only those with k ones
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
        /// Random playouts instead of exhaustive search
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = search::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: usize,
    },
    /// Exhaustive minimum (or all local minima) for small n
    Brute {
        #[arg(long)]
        n: usize,
        /// List every local minimum of the objective
        #[arg(long)]
        local: bool,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::F)]
        objective: ObjectiveArg,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Bit-flip descent from a coloring
    Descend {
        #[command(flatten)]
        coloring: ColoringArgs,
        #[arg(long, value_enum, default_value_t = RuleArg::Best)]
        rule: RuleArg,
    },
    /// Best descent over seeded random starts
    Multistart {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = search::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RuleArg::Best)]
        rule: RuleArg,
    },
    /// The r-coloring construction against n^2 / (2^(2r-3) 11)
    Extend {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
    },
    /// Time the fast and naive counters on a random 2-coloring
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        /// Size for the naive counter (skipped when 0)
        #[arg(long, default_value_t = 20_000)]
        naive_n: usize,
        #[arg(long, default_value_t = search::DEFAULT_SEED)]
        seed: u64,
    },
}

impl Cli {
    /// `--csv` wins over `--format`.
    pub fn output_format(&self) -> OutputFormat {
        if self.csv {
            OutputFormat::Csv
        } else {
            self.format
        }
    }
}

/// Runs the parsed command. Returns `Ok(false)` when an enumeration was cut
/// short by its budget.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(threads) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let format = cli.output_format();
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let complete = execute(&cli.command, format, &mut out)?;
    out.flush()?;
    Ok(complete)
}

fn envelope(command: &str, body: impl Serialize) -> Result<Value, CliError> {
    let mut value = serde_json::to_value(body)?;
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        map.insert("command".into(), json!(command));
    }
    Ok(value)
}

fn emit_json(out: &mut dyn Write, command: &str, body: impl Serialize) -> Result<(), CliError> {
    writeln!(out, "{}", envelope(command, body)?)?;
    Ok(())
}

fn ratio_22(c: &RColoring, total: u64) -> Option<f64> {
    let n = c.n() as f64;
    c.is_binary().then(|| 22.0 * total as f64 / (n * n))
}

#[derive(Serialize)]
struct FamilyRow {
    family: String,
    n: usize,
    f: u64,
    coefficient: f64,
}

fn family_rows(ns: &[usize], ss: &[u64], ts: &[usize]) -> Result<Vec<FamilyRow>, CliError> {
    let mut rows = Vec::new();
    for &n in ns {
        for &s in ss {
            if (n as u64) < 12 * s + 11 {
                continue;
            }
            let f = count_fast(&make_zs(s, n)?).total;
            let nn = (n as f64) * (n as f64);
            rows.push(FamilyRow {
                family: format!("zs:s={s}"),
                n,
                f,
                coefficient: 16.0 * (12 * s + 11) as f64 * f as f64 / ((12 * s + 8) as f64 * nn),
            });
        }
        for &t in ts {
            if n < 2 * t {
                continue;
            }
            let f = count_fast(&make_zinf(t, n)?).total;
            rows.push(FamilyRow {
                family: format!("zinf:t={t}"),
                n,
                f,
                coefficient: 16.0 * f as f64 / ((n as f64) * (n as f64)),
            });
        }
    }
    Ok(rows)
}

/// Count of `make_extension(r, n)` with the bound `n^2 / (2^(2r-3) 11)` and
/// the linear constant `C = (total - bound) / n`.
#[derive(Debug, Serialize)]
pub struct ExtensionReport {
    pub r: usize,
    pub n: usize,
    pub per_color: Vec<u64>,
    pub total: u64,
    pub bound: f64,
    pub linear_constant: f64,
}

pub fn extension_report(r: usize, n: usize) -> Result<ExtensionReport, Error> {
    if r > 32 {
        return Err(Error::param("r above 32 is not supported"));
    }
    let c = make_extension(r, n)?;
    let TripleCount {
        per_color, total, ..
    } = count_fast(&c);
    let bound = (n as f64).powi(2) / ((1u64 << (2 * r - 3)) as f64 * 11.0);
    Ok(ExtensionReport {
        r,
        n,
        per_color,
        total,
        bound,
        linear_constant: (total as f64 - bound) / n as f64,
    })
}

fn random_coloring(n: usize, seed: u64) -> Result<RColoring, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RColoring::from_bits(&(0..n).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>())
}

pub fn execute(
    command: &Command,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    match command {
        Command::Count {
            coloring,
            include_equal,
        } => {
            let c = coloring.resolve()?;
            let counts = if *include_equal || c.n() < 512 {
                count_naive(&c, *include_equal)
            } else {
                count_fast(&c)
            };
            let ratio = ratio_22(&c, counts.total);
            match format {
                OutputFormat::Json => emit_json(
                    out,
                    "count",
                    json!({
                        "n": counts.n,
                        "r": counts.r,
                        "per_color": counts.per_color,
                        "total": counts.total,
                        "ratio_22": ratio,
                        "include_equal": include_equal,
                    }),
                )?,
                OutputFormat::Csv => {
                    writeln!(out, "n,r,total,per_color,ratio_22")?;
                    let per: Vec<String> = counts.per_color.iter().map(u64::to_string).collect();
                    let ratio = ratio.map(|v| v.to_string()).unwrap_or_default();
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        counts.n,
                        counts.r,
                        counts.total,
                        per.join(";"),
                        ratio
                    )?;
                }
                OutputFormat::Text => {
                    writeln!(out, "n = {}, r = {}", counts.n, counts.r)?;
                    for (color, v) in counts.per_color.iter().enumerate() {
                        writeln!(out, "color {color}: {v}")?;
                    }
                    writeln!(out, "total: {}", counts.total)?;
                    if let Some(ratio) = ratio {
                        writeln!(out, "22 F / n^2 = {ratio:.6}")?;
                    }
                }
            }
        }
        Command::Families { n, s, t } => {
            let rows = family_rows(n, s, t)?;
            match format {
                OutputFormat::Json => emit_json(out, "families", json!({ "rows": rows }))?,
                OutputFormat::Csv | OutputFormat::Text => {
                    writeln!(out, "family,n,F,coefficient")?;
                    for r in &rows {
                        writeln!(out, "{},{},{},{:.6}", r.family, r.n, r.f, r.coefficient)?;
                    }
                }
            }
        }
        Command::Grad {
            coloring,
            objective,
            index,
        } => {
            let c = coloring.resolve()?;
            match index {
                Some(r) => {
                    let report = delta_report(&c, *r)?;
                    match format {
                        OutputFormat::Json => emit_json(out, "grad", &report)?,
                        OutputFormat::Csv => {
                            writeln!(out, "r,delta_F,delta_G,closed_form_F,closed_form_G,agree")?;
                            writeln!(
                                out,
                                "{},{},{},{},{},{}",
                                report.r,
                                report.delta_f,
                                report.delta_g,
                                report.closed_form_f,
                                report.closed_form_g,
                                report.agree
                            )?;
                        }
                        OutputFormat::Text => writeln!(out, "{report:?}")?,
                    }
                }
                None => {
                    let grad = calculus::gradient(&c, (*objective).into())?;
                    match format {
                        OutputFormat::Json => emit_json(
                            out,
                            "grad",
                            json!({ "objective": Objective::from(*objective), "deltas": grad }),
                        )?,
                        OutputFormat::Csv | OutputFormat::Text => {
                            writeln!(out, "r,delta")?;
                            for (i, d) in grad.iter().enumerate() {
                                writeln!(out, "{},{}", i + 1, d)?;
                            }
                        }
                    }
                }
            }
        }
        Command::Certify {
            coloring,
            objective,
            deltas,
        } => {
            let c = coloring.resolve()?;
            let cert = certify_local_min(&c, (*objective).into())?;
            let positive = cert.deltas.iter().filter(|d| d.doubled() > 0).count();
            let max_delta = cert.deltas.iter().max().copied();
            match format {
                OutputFormat::Json => emit_json(
                    out,
                    "certify",
                    json!({
                        "coloring": cert.coloring,
                        "objective": cert.objective,
                        "is_local_min": cert.is_local_min,
                        "k": cert.k,
                        "w": cert.w,
                        "max_delta": max_delta,
                        "improving_flips": positive,
                        "deltas": deltas.then_some(&cert.deltas),
                    }),
                )?,
                OutputFormat::Csv => {
                    writeln!(out, "n,objective,is_local_min,k,w,improving_flips")?;
                    writeln!(
                        out,
                        "{},{:?},{},{},{},{}",
                        c.n(),
                        cert.objective,
                        cert.is_local_min,
                        cert.k,
                        cert.w,
                        positive
                    )?;
                }
                OutputFormat::Text => writeln!(
                    out,
                    "local minimum of {:?}: {} (k = {}, w = {}, improving flips: {})",
                    cert.objective, cert.is_local_min, cert.k, cert.w, positive
                )?,
            }
        }
        Command::Pingpong {
            n,
            k,
            survey,
            budget,
            mode,
            sample: playouts,
            seed,
            slack,
        } => {
            if *survey {
                let survey_mode = match playouts {
                    Some(p) => SurveyMode::Sampled {
                        playouts: *p,
                        seed: *seed,
                    },
                    None => SurveyMode::Exhaustive { budget: *budget },
                };
                let rows = survey_w(*n, survey_mode, *slack)?;
                let complete = rows.iter().all(|r| !r.truncated);
                match format {
                    OutputFormat::Json => {
                        emit_json(out, "pingpong-survey", json!({ "rows": rows }))?
                    }
                    OutputFormat::Csv | OutputFormat::Text => {
                        writeln!(out, "{}", SurveyRow::CSV_HEADER)?;
                        for r in &rows {
                            writeln!(out, "{}", r.csv_line())?;
                        }
                    }
                }
                return Ok(complete);
            }
            let k = k.ok_or_else(|| CliError::Usage("--k is required without --survey".into()))?;
            let params = VolleyParams::new(*n, k)?;
            let mode = match mode {
                ModeArg::All => Mode::All,
                ModeArg::Consistent => Mode::ConsistentOnly,
            };
            let (solutions, nodes, outcome) = match playouts {
                Some(p) => (sample(params, *p, *seed, mode), 0, Outcome::Complete),
                None => {
                    let e = solve(params, *budget, mode)?;
                    (e.solutions, e.nodes, e.outcome)
                }
            };
            let labelled = solutions
                .iter()
                .map(|s| Ok((s, classify_with_k(&s.bits, k, *slack)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            match format {
                OutputFormat::Json => {
                    let items: Vec<Value> = labelled
                        .iter()
                        .map(|(s, label)| {
                            json!({
                                "bits": s.bits,
                                "k_param": s.k_param,
                                "k_actual": s.k_actual,
                                "consistent": s.consistent,
                                "choices": s.choices,
                                "case": label,
                            })
                        })
                        .collect();
                    emit_json(
                        out,
                        "pingpong",
                        json!({
                            "n": n,
                            "k": k,
                            "w": params.w(),
                            "nodes": nodes,
                            "truncated": outcome == Outcome::Truncated,
                            "solutions": items,
                        }),
                    )?
                }
                OutputFormat::Csv => {
                    writeln!(out, "n,k,k_actual,consistent,free_choices,case,solution")?;
                    for (s, label) in &labelled {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            n,
                            k,
                            s.k_actual,
                            s.consistent,
                            s.choices.len(),
                            label.tag(),
                            s.bits
                        )?;
                    }
                }
                OutputFormat::Text => {
                    for (s, label) in &labelled {
                        let mark = if s.consistent { "" } else { "  inconsistent" };
                        writeln!(out, "{}  [{}]{mark}", s.bits, label)?;
                    }
                    if outcome == Outcome::Truncated {
                        writeln!(out, "(truncated after {nodes} nodes)")?;
                    }
                }
            }
            return Ok(outcome == Outcome::Complete);
        }
        Command::Brute {
            n,
            local,
            objective,
            cap,
        } => {
            let report = if *local {
                brute_local_minima_capped(
                    *n,
                    (*objective).into(),
                    cap.unwrap_or(search::LOCAL_CAP),
                )?
            } else {
                brute_global_min_capped(*n, cap.unwrap_or(search::GLOBAL_CAP))?
            };
            match format {
                OutputFormat::Json => emit_json(out, "brute", &report)?,
                OutputFormat::Csv | OutputFormat::Text => {
                    writeln!(out, "n,min_value,argmin_count,local_minima")?;
                    let locals = report
                        .local_minima
                        .as_ref()
                        .map(|l| l.len().to_string())
                        .unwrap_or_default();
                    writeln!(
                        out,
                        "{},{},{},{}",
                        report.n, report.min_value, report.argmin_count, locals
                    )?;
                }
            }
        }
        Command::Descend { coloring, rule } => {
            let c = coloring.resolve()?;
            let result = descend(&c, (*rule).into())?;
            emit_search(out, "descend", format, &result)?;
        }
        Command::Multistart {
            n,
            restarts,
            seed,
            rule,
        } => {
            let result = multistart(*n, *restarts, *seed, (*rule).into())?;
            emit_search(out, "multistart", format, &result)?;
        }
        Command::Extend { r, n } => {
            let report = extension_report(*r, *n)?;
            match format {
                OutputFormat::Json => emit_json(out, "extend", &report)?,
                OutputFormat::Csv | OutputFormat::Text => {
                    writeln!(out, "r,n,total,bound,linear_constant")?;
                    writeln!(
                        out,
                        "{},{},{},{:.3},{:.6}",
                        report.r, report.n, report.total, report.bound, report.linear_constant
                    )?;
                }
            }
        }
        Command::Bench { n, naive_n, seed } => {
            let c = random_coloring(*n, *seed)?;
            let start = Instant::now();
            let fast = count_fast(&c);
            let fast_secs = start.elapsed().as_secs_f64();
            let (naive_total, naive_secs) = if *naive_n > 0 {
                let c = random_coloring(*naive_n, seed.wrapping_add(1))?;
                let start = Instant::now();
                let total = count_naive(&c, false).total;
                (Some(total), Some(start.elapsed().as_secs_f64()))
            } else {
                (None, None)
            };
            match format {
                OutputFormat::Json => emit_json(
                    out,
                    "bench",
                    json!({
                        "n": n,
                        "fast_total": fast.total,
                        "fast_seconds": fast_secs,
                        "naive_n": naive_n,
                        "naive_total": naive_total,
                        "naive_seconds": naive_secs,
                    }),
                )?,
                OutputFormat::Csv | OutputFormat::Text => {
                    writeln!(out, "counter,n,total,seconds")?;
                    writeln!(out, "fast,{},{},{:.6}", n, fast.total, fast_secs)?;
                    if let (Some(t), Some(s)) = (naive_total, naive_secs) {
                        writeln!(out, "naive,{naive_n},{t},{s:.6}")?;
                    }
                }
            }
        }
    }
    Ok(true)
}

fn emit_search(
    out: &mut dyn Write,
    command: &str,
    format: OutputFormat,
    result: &search::SearchResult,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => emit_json(out, command, result),
        OutputFormat::Csv => {
            writeln!(out, "n,value,iterations,best")?;
            writeln!(
                out,
                "{},{},{},{}",
                result.best.n(),
                result.value,
                result.iterations,
                format_coloring(&result.best, Format::RunLength)
            )?;
            Ok(())
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "F = {} after {} flips: {}",
                result.value, result.iterations, result.best
            )?;
            Ok(())
        }
    }
}
