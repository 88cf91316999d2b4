//! Command dispatcher behind the `dejean` binary.
//!
//! [`run`] never prints or exits; it returns the rendered output together
//! with a status and exit code so that the binary and the tests share one
//! code path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dejean_core::carpi::{threshold_pipeline, MorphismTable};
use dejean_core::constructions::{
    alpha_prefix, beta_prefix, zm_count, zm_enumerate, zm_samples, FactorIndex,
    ZM_ENUMERATION_LIMIT,
};
use dejean_core::growth::{
    count_language, count_threshold_words, growth_estimate, CountOptions, GrowthTable,
    Z4Language, ZmLanguage,
};
use dejean_core::verifier::{
    binary_avoidance_max_length, check_lemma6, check_prop7_desk, compute_w, n26_stabilizing_check,
    verify_ew, verify_short_elimination, w_breakdown, Availability, Maximality, WSearch,
    CASE_II_ORDERS,
};
use dejean_core::words::find_forbidden_factor;
use dejean_core::{pansiot, repetition_threshold, Error, Exec, RationalExponent, Word};

/// Version of the JSON document layout.
pub const SCHEMA: u32 = 1;

/// `(kernel period, length, count)` groups expected in the default `W`.
pub const EXPECTED_W_BREAKDOWN: [(usize, usize, usize); 3] = [(76, 77, 160), (92, 93, 36), (112, 114, 4)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
    Unavailable,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Info => 0,
            Status::Fail => 1,
            Status::Unavailable => 3,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Unavailable => "UNAVAILABLE",
        }
    }
}

/// Exit code for malformed invocations and rejected inputs.
pub const USAGE_EXIT: i32 = 2;

#[derive(Clone, Debug)]
pub struct CommandResult {
    pub status: Status,
    /// The full structured document, `schema` included.
    pub payload: Value,
    pub exit_code: i32,
    /// What the binary writes to stdout.
    pub output: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    /// Only for `count`.
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "dejean", version, about = "Threshold words, Pansiot codes and growth checks")]
pub struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "DEJEAN_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Print every witness in text mode.
    #[arg(long, global = true)]
    witnesses: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Repetition threshold RT(n).
    Rt {
        #[arg(long)]
        n: usize,
    },
    /// Test a word for r-freeness (r+-freeness with --strict).
    Check {
        #[arg(long)]
        r: RationalExponent,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        word: String,
        #[arg(long)]
        alphabet: usize,
    },
    /// Decode a binary Pansiot code.
    Gamma {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        binary: String,
    },
    /// Look for a short stabilizing factor or a kernel repetition.
    ScanPansiot {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        binary: String,
    },
    /// Prefixes and factors of beta, alpha, Z_m and Z_4
    #[command(subcommand)]
    Gen(Gen),
    /// Length-by-length word counts with growth estimates
    #[command(subcommand)]
    Count(Count),
    /// Finite checks behind the threshold constructions
    #[command(subcommand)]
    Verify(Verify),
    /// Apply f_n and decode: gamma_n(f_n(w)).
    Pipeline {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        word: String,
        /// Also check the result for RT(n)+-freeness.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Prefix of the word beta.
    Beta {
        #[arg(long)]
        len: usize,
    },
    /// Prefix of the word alpha over A_m.
    Alpha {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        len: usize,
    },
    /// Members of Z_m: all of them, or seeded samples.
    Zm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Factors of Z_4 of the given length.
    Z4 {
        #[arg(long)]
        len: usize,
    },
}

#[derive(Args, Debug)]
struct CountCommon {
    /// Largest length counted.
    #[arg(long)]
    k: usize,
}

#[derive(Subcommand, Debug)]
enum Count {
    /// RT(n)+-free words over n letters.
    Threshold {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: CountCommon,
        /// Stop after visiting this many words.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        symmetry: bool,
        #[arg(long, default_value_t = 4)]
        split_depth: usize,
    },
    Zm {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        common: CountCommon,
    },
    Z4 {
        #[command(flatten)]
        common: CountCommon,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MaximalityArg {
    TwoSided,
    LeftOnly,
    RightOnly,
    Unchecked,
}

impl From<MaximalityArg> for Maximality {
    fn from(m: MaximalityArg) -> Self {
        match m {
            MaximalityArg::TwoSided => Maximality::TwoSided,
            MaximalityArg::LeftOnly => Maximality::LeftOnly,
            MaximalityArg::RightOnly => Maximality::RightOnly,
            MaximalityArg::Unchecked => Maximality::Unchecked,
        }
    }
}

#[derive(Args, Debug)]
struct WArgs {
    #[arg(long, default_value_t = 155)]
    max_len: usize,
    #[arg(long, default_value_t = 152)]
    max_period: usize,
    #[arg(long)]
    no_bound_filter: bool,
    #[arg(long, value_enum, default_value = "two-sided")]
    maximality: MaximalityArg,
}

impl WArgs {
    fn search(&self) -> WSearch {
        WSearch {
            max_len: self.max_len,
            max_period: self.max_period,
            bound_filter: !self.no_bound_filter,
            maximality: self.maximality.into(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// No short psi_n-kernel repetitions among Z_4 factors.
    Elimination {
        #[arg(long, default_value_t = 130)]
        max_len: usize,
        /// Orders n to test; defaults to 27..=32.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
    },
    /// The set W of maximal kernel repetitions.
    WSet(WArgs),
    /// The inequality for every member of W.
    Ew(WArgs),
    /// Longest binary word avoiding psi_n-kernel repetitions.
    Binary26 {
        #[arg(long, default_value_t = 26)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        depth_cap: usize,
    },
    /// Kernel factor lengths in Z_m members are multiples of 4^(m-1).
    Lemma6 {
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Check this word instead of seeded samples.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 2048)]
        length: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record every kernel factor length.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Seeded Z_m members contain no psi_n-kernel repetition.
    Prop7Desk {
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 33)]
        n: usize,
        #[arg(long, default_value_t = 2048)]
        length: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Short 15-stabilizing factors in f_26(a3); needs an f_26 table.
    N26Stab {
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

struct Outcome {
    status: Status,
    command: &'static str,
    summary: Vec<String>,
    details: Vec<String>,
    result: Value,
}

impl Outcome {
    fn new(status: Status, command: &'static str, summary: String, result: Value) -> Self {
        Outcome {
            status,
            command,
            summary: vec![summary],
            details: Vec::new(),
            result,
        }
    }

    fn with_details(mut self, details: Vec<String>) -> Self {
        self.details = details;
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pass_or_fail(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn usage_error(message: String) -> CommandResult {
    let payload = json!({ "schema": SCHEMA, "status": "fail", "error": message });
    CommandResult {
        status: Status::Fail,
        payload,
        exit_code: USAGE_EXIT,
        output: message,
    }
}

/// Parse `argv` (program name first) and execute it.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult {
                    status: Status::Info,
                    payload: json!({ "schema": SCHEMA, "status": "info" }),
                    exit_code: 0,
                    output: rendered,
                },
                _ => usage_error(rendered),
            };
        }
    };
    if cli.format == Format::Csv && !matches!(cli.command, Command::Count(_)) {
        return usage_error("--format csv is only available for count".into());
    }
    match with_jobs(cli.jobs, || dispatch(&cli)) {
        Ok(Ok(outcome)) => render(&cli, outcome),
        Ok(Err(e)) => usage_error(format!("error: {e}")),
        Err(e) => usage_error(format!("error: {e}")),
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    match jobs {
        Some(0) => Err("--jobs must be positive".into()),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| e.to_string()),
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    match jobs {
        Some(0) => Err("--jobs must be positive".into()),
        _ => Ok(f()),
    }
}

fn render(cli: &Cli, outcome: Outcome) -> CommandResult {
    let status = outcome.status;
    let payload = json!({
        "schema": SCHEMA,
        "command": outcome.command,
        "status": status,
        "result": outcome.result,
    });
    let output = match cli.format {
        Format::Json => serde_json::to_string_pretty(&payload).expect("json values serialize"),
        Format::Csv => outcome.details.join("\n"),
        Format::Text => {
            let mut lines: Vec<String> = outcome
                .summary
                .iter()
                .map(|s| format!("{} {}: {}", status.label(), outcome.command, s))
                .collect();
            if cli.witnesses || status == Status::Info {
                lines.extend(outcome.details.iter().cloned());
            }
            lines.join("\n")
        }
    };
    CommandResult {
        status,
        payload,
        exit_code: status.exit_code(),
        output,
    }
}

fn dispatch(cli: &Cli) -> dejean_core::Result<Outcome> {
    let exec = Exec::default();
    match &cli.command {
        Command::Rt { n } => {
            let r = repetition_threshold(*n)?;
            Ok(Outcome::new(
                Status::Info,
                "rt",
                r.to_string(),
                json!({ "n": n, "threshold": r }),
            ))
        }
        Command::Check {
            r,
            strict,
            word,
            alphabet,
        } => {
            let w = Word::parse(word, *alphabet)?;
            let report = find_forbidden_factor(w.letters(), *r, *strict);
            let summary = match &report {
                None => format!("{w} is {r}{}-free", if *strict { "+" } else { "" }),
                Some(rep) => format!("{rep}"),
            };
            Ok(Outcome::new(
                pass_or_fail(report.is_none()),
                "check",
                summary,
                json!({ "word": w, "r": r, "strict": strict, "report": report }),
            ))
        }
        Command::Gamma { n, binary } => {
            let u = Word::parse_binary(binary)?;
            let decoded = pansiot::gamma(*n, &u)?;
            Ok(Outcome::new(
                Status::Info,
                "gamma",
                decoded.to_string(),
                json!({ "n": n, "binary": u, "word": decoded }),
            ))
        }
        Command::ScanPansiot { n, binary } => {
            let u = Word::parse_binary(binary)?;
            let report = pansiot::scan_prop32(*n, &u)?;
            let summary = match &report {
                None => format!("{u}: no stabilizing factor or kernel repetition"),
                Some(rep) => format!("{rep}"),
            };
            Ok(Outcome::new(
                pass_or_fail(report.is_none()),
                "scan-pansiot",
                summary,
                json!({ "n": n, "binary": u, "report": report }),
            ))
        }
        Command::Gen(g) => gen(g),
        Command::Count(c) => count(c, exec),
        Command::Verify(v) => verify(v, exec),
        Command::Pipeline {
            table,
            word,
            verify,
        } => {
            let t = MorphismTable::load(table)?;
            let w = Word::parse(word, t.m())?;
            match threshold_pipeline(&t, w.letters(), *verify) {
                Ok(out) => {
                    let status = if *verify { Status::Pass } else { Status::Info };
                    Ok(Outcome::new(
                        status,
                        "pipeline",
                        format!("{} letters over A_{}", out.len(), t.n()),
                        json!({ "n": t.n(), "input": w, "output": out, "verified": verify }),
                    )
                    .with_details(vec![out.to_string()]))
                }
                Err(Error::NotThresholdFree(rep)) => Ok(Outcome::new(
                    Status::Fail,
                    "pipeline",
                    format!("{rep}"),
                    json!({ "n": t.n(), "input": w, "report": rep }),
                )),
                Err(e) => Err(e),
            }
        }
    }
}

fn word_list(command: &'static str, words: &[Word], extra: Value) -> Outcome {
    let mut result = json!({ "count": words.len(), "words": words });
    if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
        r.extend(e);
    }
    Outcome::new(Status::Info, command, format!("{} words", words.len()), result)
        .with_details(words.iter().map(Word::to_string).collect())
}

fn gen(g: &Gen) -> dejean_core::Result<Outcome> {
    match g {
        Gen::Beta { len } => {
            let w = beta_prefix(*len);
            Ok(word_list("gen beta", std::slice::from_ref(&w), json!({ "len": len })))
        }
        Gen::Alpha { m, len } => {
            let w = alpha_prefix(*m, *len)?;
            Ok(word_list("gen alpha", std::slice::from_ref(&w), json!({ "m": m, "len": len })))
        }
        Gen::Zm {
            m,
            len,
            samples,
            seed,
        } => match samples {
            Some(s) => {
                let words = zm_samples(*m, *len, *s, *seed)?;
                Ok(word_list("gen zm", &words, json!({ "m": m, "len": len, "seed": seed })))
            }
            None => {
                let words = zm_enumerate(*m, *len, ZM_ENUMERATION_LIMIT)?;
                Ok(word_list("gen zm", &words, json!({ "m": m, "len": len })))
            }
        },
        Gen::Z4 { len } => {
            let index = FactorIndex::z4((*len).max(1));
            let words: Vec<Word> = index
                .of_length(*len)
                .into_iter()
                .map(|v| Word::new(v.to_vec(), 4))
                .collect::<dejean_core::Result<_>>()?;
            Ok(word_list("gen z4", &words, json!({ "len": len })))
        }
    }
}

fn table_outcome(command: &'static str, table: GrowthTable, extra: Value) -> dejean_core::Result<Outcome> {
    let summary = match growth_estimate(&table) {
        Ok(s) => format!(
            "k={} C={} root={} ratio={}{}",
            s.k,
            s.last_count,
            s.last_kth_root,
            s.last_ratio.as_deref().unwrap_or("-"),
            if table.truncated { " (truncated)" } else { "" }
        ),
        Err(_) => "empty table".to_string(),
    };
    let estimate = growth_estimate(&table).ok();
    let csv = table.to_csv();
    let mut result = json!({ "table": table, "estimate": estimate });
    if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
        r.extend(e);
    }
    Ok(Outcome::new(Status::Info, command, summary, result)
        .with_details(csv.lines().map(str::to_string).collect()))
}

fn count(c: &Count, exec: Exec) -> dejean_core::Result<Outcome> {
    match c {
        Count::Threshold {
            n,
            common,
            budget,
            symmetry,
            split_depth,
        } => {
            let opts = CountOptions {
                exec,
                split_depth: *split_depth,
                budget: *budget,
                symmetry: *symmetry,
                bound: None,
            };
            table_outcome("count threshold", count_threshold_words(*n, common.k, &opts)?, json!({}))
        }
        Count::Zm { m, common } => {
            let table = count_language(&ZmLanguage { m: *m }, common.k, exec)?;
            let formula: Vec<String> = (1..=common.k).map(|k| zm_count(k).to_string()).collect();
            table_outcome("count zm", table, json!({ "formula": formula }))
        }
        Count::Z4 { common } => {
            let index = FactorIndex::z4(common.k.max(1));
            table_outcome("count z4", count_language(&Z4Language { index }, common.k, exec)?, json!({}))
        }
    }
}

fn verify(v: &Verify, exec: Exec) -> dejean_core::Result<Outcome> {
    match v {
        Verify::Elimination { max_len, orders } => {
            let orders: Vec<usize> = if orders.is_empty() {
                CASE_II_ORDERS.collect()
            } else {
                orders.clone()
            };
            let report = verify_short_elimination(*max_len, &orders, exec);
            let summary = format!(
                "{} kernel-period candidates up to length {}, {} violations",
                report.candidates,
                max_len,
                report.violations.len()
            );
            let details = report
                .violations
                .iter()
                .map(|v| format!("{} p={} n={:?}", v.word, v.kernel_period, v.orders))
                .collect();
            Ok(Outcome::new(pass_or_fail(report.passed()), "verify elimination", summary, to_value(&report))
                .with_details(details))
        }
        Verify::WSet(args) => {
            let search = args.search();
            let w = compute_w(&search, exec);
            let breakdown = w_breakdown(&w);
            let groups: Vec<(usize, usize, usize)> =
                breakdown.iter().map(|b| (b.kernel_period, b.length, b.count)).collect();
            let default_search = search.max_len == 155
                && search.max_period == 152
                && search.bound_filter
                && search.maximality == Maximality::TwoSided;
            let status = if default_search {
                pass_or_fail(groups == EXPECTED_W_BREAKDOWN)
            } else {
                Status::Info
            };
            let summary = format!(
                "{} words; {}",
                w.len(),
                groups
                    .iter()
                    .map(|(p, l, c)| format!("{c} with p={p} |v|={l}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let details = w
                .iter()
                .map(|r| format!("{} p={}", r.word, r.kernel_period))
                .collect();
            Ok(Outcome::new(
                status,
                "verify w-set",
                summary,
                json!({ "search": search, "count": w.len(), "breakdown": breakdown, "words": w }),
            )
            .with_details(details))
        }
        Verify::Ew(args) => {
            let w = compute_w(&args.search(), exec);
            let report = verify_ew(&w, exec);
            let failing = report.entries.iter().filter(|e| !e.holds).count();
            let min_margin = report.entries.iter().map(|e| e.margin).min();
            let summary = format!(
                "{} entries, {} failing, smallest margin {}",
                report.entries.len(),
                failing,
                min_margin.map_or("-".to_string(), |m| m.to_string())
            );
            let details = report
                .entries
                .iter()
                .map(|e| {
                    format!(
                        "{} p={} q={} {} > {}",
                        e.word, e.kernel_period, e.max_repetition, e.lhs, e.rhs
                    )
                })
                .collect();
            Ok(Outcome::new(pass_or_fail(report.all_hold), "verify ew", summary, to_value(&report))
                .with_details(details))
        }
        Verify::Binary26 { n, depth_cap } => {
            let report = binary_avoidance_max_length(*n, *depth_cap)?;
            let status = if *n == 26 {
                pass_or_fail(report.max_length == 15)
            } else {
                Status::Info
            };
            Ok(Outcome::new(
                status,
                "verify binary26",
                format!("n={} longest length {} ({})", n, report.max_length, report.witness),
                to_value(&report),
            ))
        }
        Verify::Lemma6 {
            m,
            word,
            length,
            samples,
            seed,
            exhaustive,
        } => {
            let words = match word {
                Some(text) => vec![Word::parse(text, *m)?],
                None => zm_samples(*m, *length, *samples, *seed)?,
            };
            let reports = words
                .iter()
                .map(|z| check_lemma6(*m, z.letters(), *exhaustive))
                .collect::<dejean_core::Result<Vec<_>>>()?;
            let violations: u64 = reports.iter().map(|r| r.violations).sum();
            let factors: u64 = reports.iter().map(|r| r.kernel_factors).sum();
            let modulus = 4usize.pow(*m as u32 - 1);
            Ok(Outcome::new(
                pass_or_fail(violations == 0),
                "verify lemma6",
                format!(
                    "{} words, {} kernel factors, {} not divisible by {}",
                    reports.len(),
                    factors,
                    violations,
                    modulus
                ),
                json!({
                    "m": m,
                    "seed": word.is_none().then_some(*seed),
                    "violations": violations,
                    "reports": reports,
                }),
            ))
        }
        Verify::Prop7Desk {
            m,
            n,
            length,
            samples,
            seed,
        } => {
            let report = check_prop7_desk(*m, *n, *length, *samples, *seed, exec)?;
            let details = report.findings.iter().map(|f| format!("sample {}: {}", f.sample, f.report)).collect();
            Ok(Outcome::new(
                pass_or_fail(report.passed()),
                "verify prop7-desk",
                format!(
                    "{} samples of length {} (seed {}), {} findings",
                    report.samples,
                    report.length,
                    seed,
                    report.findings.len()
                ),
                to_value(&report),
            )
            .with_details(details))
        }
        Verify::N26Stab { table } => {
            let t = table.as_ref().map(MorphismTable::load).transpose()?;
            let report = n26_stabilizing_check(t.as_ref())?;
            let (status, summary) = match report.status {
                Availability::Unavailable => (
                    Status::Unavailable,
                    "no f_26 table supplied (--table)".to_string(),
                ),
                Availability::Available => {
                    let lengths: Vec<String> = report
                        .entries
                        .iter()
                        .map(|e| {
                            e.witness
                                .as_ref()
                                .map_or("none".to_string(), |w| w.length.to_string())
                        })
                        .collect();
                    let ok = report.entries.iter().all(|e| e.witness.is_some());
                    (
                        pass_or_fail(ok),
                        format!("shortest witnesses below {}: {}", report.bound, lengths.join(",")),
                    )
                }
            };
            Ok(Outcome::new(status, "verify n26-stab", summary, to_value(&report)))
        }
    }
}
