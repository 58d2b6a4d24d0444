use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use pisot_core::decision::guess_prefix_len;
use pisot_core::family::parse_templates;
use pisot_core::scan::{scan_records, write_csv};
use pisot_core::sequence::parse_bfile;
use pisot_core::{
    builtin_templates, decide_with, end_to_end, generate, guess_recurrence, scan, verify_family, DecideOptions,
    LinearRecurrence, Offset, PisotParams, ScanConfig,
};

#[derive(Parser)]
#[command(
    name = "pisot",
    version,
    about = "Pisot sequences: generation, recurrence guessing and certified decisions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the first terms of E_r(x, y).
    Generate {
        #[command(flatten)]
        seq: SeqArgs,
        /// Number of terms.
        #[arg(long, default_value_t = 20)]
        print: usize,
        #[arg(long, value_enum, default_value_t = Format::Bfile)]
        format: Format,
    },
    /// Guess the minimal integer recurrence of a prefix.
    Guess {
        #[command(flatten)]
        seq: SeqArgs,
        /// Read the prefix from a b-file instead of generating it.
        #[arg(long, conflicts_with_all = ["x", "y"])]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        max_order: usize,
        /// Prefix length; defaults to the minimum for `--max-order`.
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Guess a recurrence and prove or refute that it generates the sequence.
    Decide {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 12)]
        max_order: usize,
        /// Terms to list before the report (also the guessing prefix length).
        #[arg(long, default_value_t = 60)]
        print: usize,
        /// Exact check limit.
        #[arg(long, default_value_t = 50_000)]
        check: usize,
        #[arg(long, default_value_t = pisot_core::roots::PRECISION_CAP)]
        precision_cap: u64,
        /// Use this recurrence (comma-separated A_1..A_k) instead of guessing.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rec: Option<Vec<BigInt>>,
        /// Print only the JSON report.
        #[arg(long)]
        succinct: bool,
    },
    /// Verify the polynomial family templates.
    Families {
        /// Only templates with this x.
        #[arg(long)]
        x: Option<u64>,
        /// Largest k to verify.
        #[arg(long, default_value_t = 5)]
        k_max: u64,
        /// Template file to use instead of the bundled one.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, value_parser = parse_offset, default_value = "1/2")]
        r: Offset,
        #[arg(long, default_value_t = 12)]
        max_order: usize,
        #[arg(long, default_value_t = 50_000)]
        check: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Decide every pair of a grid and write one CSV row per pair.
    Scan {
        /// x or an inclusive range a..b.
        #[arg(long, value_parser = parse_range)]
        x: RangeInclusive<u64>,
        /// y or an inclusive range a..b.
        #[arg(long, value_parser = parse_range)]
        y: RangeInclusive<u64>,
        #[arg(long, value_parser = parse_offset, default_value = "1/2")]
        r: Offset,
        #[arg(long, default_value_t = 12)]
        max_order: usize,
        #[arg(long, default_value_t = 5_000)]
        check: usize,
        #[arg(long, default_value_t = pisot_core::roots::PRECISION_CAP)]
        precision_cap: u64,
        /// Output CSV; resumable through `<out>.journal`. Without it rows go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SeqArgs {
    #[arg(long)]
    x: Option<BigInt>,
    #[arg(long)]
    y: Option<BigInt>,
    #[arg(long, value_parser = parse_offset, default_value = "1/2")]
    r: Offset,
    /// Order of the Hankel rule.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// The 2s-2 initial terms after x and y.
    #[arg(long, value_delimiter = ',')]
    extra: Vec<BigInt>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Bfile,
    Csv,
}

fn parse_offset(s: &str) -> Result<Offset, String> {
    s.parse().map_err(|e: pisot_core::SequenceError| e.to_string())
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.trim_start_matches('='))?),
        None => num(s).map(|v| v..=v),
    }
}

/// Problems with the arguments themselves; exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl SeqArgs {
    fn params(&self) -> anyhow::Result<PisotParams> {
        let (Some(x), Some(y)) = (&self.x, &self.y) else {
            return Err(usage("--x and --y are required"));
        };
        if self.s == 0 {
            return Err(usage("--s must be positive"));
        }
        let mut initial = vec![x.clone(), y.clone()];
        initial.extend(self.extra.iter().cloned());
        let params = if self.s == 1 && self.extra.is_empty() {
            PisotParams::new(x.clone(), y.clone(), self.r)
        } else if initial.len() != 2 * self.s {
            return Err(usage(format!(
                "--s {} needs {} values in --extra, got {}",
                self.s,
                2 * self.s - 2,
                self.extra.len()
            )));
        } else {
            PisotParams::with_initial_terms(initial, self.r)
        };
        params.map_err(|e| usage(e.to_string()))
    }
}

fn options(check: usize, precision_cap: u64) -> DecideOptions {
    DecideOptions {
        check_limit: check,
        precision_cap,
        ..DecideOptions::default()
    }
}

fn listing(terms: &[BigInt]) -> String {
    terms.iter().map(BigInt::to_string).collect::<Vec<_>>().join(", ")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Generate { seq, print, format } => {
            let prefix = generate(&seq.params()?, print)?;
            match format {
                Format::Json => writeln!(out, "{}", prefix.to_json())?,
                Format::Bfile => write!(out, "{}", prefix.to_bfile())?,
                Format::Csv => {
                    writeln!(out, "n,a_n")?;
                    for (n, t) in prefix.terms.iter().enumerate() {
                        writeln!(out, "{n},{t}")?;
                    }
                }
            }
            if let Some(why) = &prefix.truncated {
                eprintln!("stopped after {} terms: {why:?}", prefix.len());
            }
        }
        Command::Guess {
            seq,
            input,
            max_order,
            terms,
        } => {
            let prefix = match input {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    parse_bfile(&text)?
                }
                None => {
                    let len = terms.unwrap_or_else(|| guess_prefix_len(max_order, 0));
                    generate(&seq.params()?, len)?.terms
                }
            };
            let report = match guess_recurrence(&prefix, max_order) {
                Ok(rec) => json!({ "terms": prefix.len(), "order": rec.order(), "recurrence": rec }),
                Err(e) => json!({ "terms": prefix.len(), "order": null, "recurrence": null, "reason": e.to_string() }),
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Decide {
            seq,
            max_order,
            print,
            check,
            precision_cap,
            rec,
            succinct,
        } => {
            let params = seq.params()?;
            let opts = options(check, precision_cap);
            let (terms, report) = match rec {
                None => {
                    let (prefix, report) = end_to_end(&params, max_order, print, &opts)?;
                    (prefix.terms, report)
                }
                Some(coefficients) => {
                    let prefix = generate(&params, print.max(coefficients.len()))?;
                    let initial = prefix.terms[..coefficients.len()].to_vec();
                    let rec = LinearRecurrence::new(coefficients, initial).map_err(|e| usage(e.to_string()))?;
                    (prefix.terms, decide_with(&params, &rec, &opts)?)
                }
            };
            if !succinct {
                writeln!(out, "{}", listing(&terms[..print.min(terms.len())]))?;
            }
            writeln!(out, "{}", report.to_json())?;
        }
        Command::Families {
            x,
            k_max,
            fixture,
            r,
            max_order,
            check,
            format,
        } => {
            if format == Format::Bfile {
                return Err(usage("families supports --format json or csv"));
            }
            let templates = match fixture {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    parse_templates(&text).map_err(|e| usage(e.to_string()))?
                }
                None => builtin_templates(),
            };
            let opts = options(check, pisot_core::roots::PRECISION_CAP);
            let mut rows = Vec::new();
            for t in templates.iter().filter(|t| x.is_none_or(|x| t.x == x)) {
                for row in verify_family(t, &t.k_values(k_max), r, max_order, &opts) {
                    rows.push((t.label(), row));
                }
            }
            match format {
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(family, row)| json!({ "family": family, "passed": row.passed(), "row": row }))
                        .collect();
                    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
                }
                Format::Csv | Format::Bfile => {
                    writeln!(out, "family,k,y,status,recurrence")?;
                    for (family, row) in &rows {
                        let status = serde_json::to_value(&row.outcome)?["status"]
                            .as_str()
                            .unwrap_or("")
                            .to_string();
                        let rec = row.expected.as_ref().map(|r| r.to_string()).unwrap_or_default();
                        writeln!(out, "{family},{},{},{status},\"{rec}\"", row.k, row.y)?;
                    }
                }
            }
            let failed = rows.iter().filter(|(_, r)| !r.passed()).count();
            eprintln!("{} of {} instances proved", rows.len() - failed, rows.len());
        }
        Command::Scan {
            x,
            y,
            r,
            max_order,
            check,
            precision_cap,
            out: path,
        } => {
            let cfg = ScanConfig {
                x,
                y,
                r,
                max_order,
                opts: options(check, precision_cap),
            };
            match path {
                Some(path) => {
                    let rows = scan(&cfg, &path)?;
                    eprintln!("{} rows written to {}", rows.len(), path.display());
                }
                None => write_csv(&scan_records(&cfg), &mut out)?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
