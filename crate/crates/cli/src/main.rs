//! `mflab`: command-line front end for the Möbius-flow toolkit.

mod output;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mflab_core::admissible::{admissibility, Alphabet, Block, Block2, Block3, Enumerator, SupportSet};
use mflab_core::chowla::{verify_admissible_level, ChowlaMeasure, SignedCylinder, DEFAULT_TOL};
use mflab_core::empirical::{
    chowla_sum, orbit_block_coverage, AveragingMode, CorrelationSpec, LogNormalizer,
};
use mflab_core::mirsky::{mirsky_empirical, MirskyMeasure};
use mflab_core::sampler::{ChowlaSampler, SampleConfig, RNG_ALGORITHM};
use mflab_core::sieve::{sieve, sieve_with, ArithFunction, SieveOptions};
use mflab_core::walsh::{
    barker_search, circulant_from_row, is_hadamard, solve_uniform_system, walsh_det_log2,
    SignSequence,
};

use output::Report;

/// Largest `n` for which `walsh-solve` prints the full solution vector.
const WALSH_SOLVE_PRINT_MAX: u32 = 20;

#[derive(Parser, Debug)]
#[command(name = "mflab", version, about = "Möbius flow toolkit: sieves, admissible blocks, Mirsky/Chowla measures, Walsh systems, samplers")]
struct Cli {
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, env = "MFLAB_THREADS")]
    threads: Option<usize>,

    /// Add `wall_time` (seconds) to the output. Breaks byte-identical reruns.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FunctionArg {
    Mobius,
    Liouville,
    Squarefree,
}

impl From<FunctionArg> for ArithFunction {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::Mobius => ArithFunction::Mobius,
            FunctionArg::Liouville => ArithFunction::Liouville,
            FunctionArg::Squarefree => ArithFunction::SquareFree,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Cesaro,
    Log,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormalizerArg {
    #[value(name = "logN", alias = "logn")]
    LogN,
    #[value(name = "ellN", alias = "elln")]
    EllN,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlphabetArg {
    Binary,
    Ternary,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sieve a table of μ, λ or μ²; `--out FILE` writes the binary table.
    Sieve {
        #[arg(long, value_enum)]
        function: FunctionArg,
        #[arg(long = "max-n", visible_alias = "N", value_parser = parse_count)]
        max_n: u64,
        #[arg(long, default_value_t = 1 << 18)]
        segment_len: usize,
        /// Binary table destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Values echoed in the JSON output.
        #[arg(long, default_value_t = 20)]
        head: usize,
    },
    /// Admissibility of a block (`+0-0`, `101`) or an explicit support.
    Admissible {
        #[arg(long, conflicts_with = "support", required_unless_present_any = ["support", "enumerate"])]
        block: Option<String>,
        /// Comma-separated positions, e.g. `1,3,5`.
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<u64>>,
        /// Also count (and list, up to `--list`) admissible blocks of this length.
        #[arg(long)]
        enumerate: Option<usize>,
        #[arg(long, value_enum, default_value = "binary")]
        alphabet: AlphabetArg,
        #[arg(long, default_value_t = 0)]
        list: usize,
    },
    /// Truncated Mirsky measure of a binary cylinder.
    Mirsky {
        #[arg(long)]
        block: String,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        cutoff: u64,
        /// Also report the frequency among the first N windows of μ².
        #[arg(long, value_parser = parse_count)]
        empirical: Option<u64>,
    },
    /// Chowla measure of a signed cylinder, given as `--base` + `--signs` or `--block`.
    Chowla {
        #[arg(long, requires = "signs", required_unless_present = "block")]
        base: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        signs: Option<String>,
        #[arg(long, conflicts_with = "base", allow_hyphen_values = true)]
        block: Option<String>,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        cutoff: u64,
    },
    /// Admissibility checks of the Chowla measure at a finite level.
    VerifyAdmissible {
        #[arg(long)]
        level: usize,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        cutoff: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Walsh-matrix determinant and circulant Hadamard checks.
    Hadamard {
        /// Ground-set size of the Walsh matrix.
        #[arg(long, required_unless_present = "circulant")]
        det: Option<u32>,
        /// First row of a circulant, e.g. `1,1,1,-1` or `+++-`.
        #[arg(long, allow_hyphen_values = true)]
        circulant: Option<String>,
    },
    /// Solve the uniform Walsh system `C·ν = a·δ_∅`.
    WalshSolve {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
    },
    /// Exhaustive Barker-sequence search.
    Barker {
        #[arg(long, default_value_t = 16)]
        max_len: usize,
        /// Accepted for compatibility; JSON is the default.
        #[arg(long)]
        json: bool,
    },
    /// Cesàro or logarithmic correlation sums of μ or λ.
    Correlate {
        #[arg(long, value_enum)]
        function: FunctionArg,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        shifts: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        exponents: Vec<u8>,
        /// One or more comma-separated horizons.
        #[arg(long = "N", value_parser = parse_count, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_enum, default_value = "cesaro")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "logN")]
        normalizer: NormalizerArg,
        /// `json` (default) or `csv`.
        #[arg(long, default_value = "json")]
        out: String,
    },
    /// Fraction of admissible ternary blocks seen among windows of μ.
    OrbitCoverage {
        #[arg(long)]
        len: usize,
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
    },
    /// Monte Carlo samples of the Chowla measure.
    Sample {
        #[arg(long)]
        len: usize,
        /// Prime cutoff; defaults to 10⁵·len.
        #[arg(long, value_parser = parse_count)]
        cutoff: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// One `+`/`-`/`0` line per sample goes here instead of the JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite and emit a pass/fail summary.
    Report {
        /// Reduced problem sizes.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Integer count accepting `10000000`, `10_000_000`, `1e7` or `10^7`.
fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.parse().map_err(|_| format!("bad base in {s:?}"))?;
        let e: u32 = e.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        return b.checked_pow(e).ok_or_else(|| format!("{s} overflows"));
    }
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 9.007e15 => Ok(x as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

fn parse_signs(s: &str) -> anyhow::Result<Vec<i8>> {
    Ok(s.parse::<SignSequence>()?.as_slice().to_vec())
}

/// What a subcommand produced: printed output and whether its checks held.
struct Outcome {
    text: String,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = mflab_core::par::configure_threads(t) {
            eprintln!("mflab: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    match run(&cli, start) {
        Ok(out) => {
            println!("{}", out.text);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("mflab: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, start: Instant) -> anyhow::Result<Outcome> {
    let mut passed = true;
    let report = match &cli.command {
        Command::Sieve {
            function,
            max_n,
            segment_len,
            out,
            head,
        } => {
            let f = ArithFunction::from(*function);
            let opts = SieveOptions {
                segment_len: *segment_len,
                ..SieveOptions::default()
            };
            let table = sieve_with(f, *max_n, opts)?;
            let mut r = Report::new(
                "sieve",
                json!({"function": f, "max_n": max_n, "segment_len": segment_len}),
            );
            let values = table.values();
            let sum: i64 = values.iter().map(|&v| v as i64).sum();
            let zeros = values.iter().filter(|&&v| v == 0).count();
            r.set("sum", sum)
                .set("zeros", zeros)
                .set("head", &values[..(*head).min(values.len())]);
            if let Some(path) = out {
                table.save(path).with_context(|| format!("writing {}", path.display()))?;
                r.set("out", path);
            }
            r
        }
        Command::Admissible {
            block,
            support,
            enumerate,
            alphabet,
            list,
        } => {
            let mut r = Report::new(
                "admissible",
                json!({"block": block, "support": support, "enumerate": enumerate}),
            );
            let set = match (block, support) {
                (Some(b), _) => Some(Block3::parse(b)?.support()),
                (None, Some(s)) => Some(SupportSet::from_unsorted(s.clone())?),
                (None, None) => None,
            };
            if let Some(set) = set {
                let a = admissibility(&set);
                r.set("support", set.positions()).extend(&a);
            }
            if let Some(n) = enumerate {
                let e = Enumerator::default();
                let alpha = match alphabet {
                    AlphabetArg::Binary => Alphabet::Binary,
                    AlphabetArg::Ternary => Alphabet::Ternary,
                };
                r.set("alphabet", format!("{alphabet:?}").to_lowercase())
                    .set("count", e.count(*n, alpha)?);
                if *list > 0 {
                    let mut words = Vec::new();
                    e.visit(*n, alpha, &mut |w| {
                        words.push(match alpha {
                            Alphabet::Binary => w.iter().map(|&s| if s == 0 { '0' } else { '1' }).collect::<String>(),
                            Alphabet::Ternary => Block3::new(w.to_vec()).expect("ternary").to_string(),
                        });
                        words.len() < *list
                    })?;
                    r.set("blocks", words);
                }
            }
            r
        }
        Command::Mirsky {
            block,
            cutoff,
            empirical,
        } => {
            let b = Block2::parse(block)?;
            let d = MirskyMeasure::new(*cutoff)?.cylinder(&b)?;
            let mut r = Report::new(
                "mirsky",
                json!({"block": block, "cutoff": cutoff, "empirical": empirical}),
            );
            r.set("value", d.value)
                .set("ln_value", d.ln_value)
                .set("error_bound", d.error_bound)
                .set("P", d.prime_cutoff);
            if let Some(n) = empirical {
                let table = sieve(ArithFunction::SquareFree, n + b.len().max(1) as u64 - 1)?;
                let freq = mirsky_empirical(&b, &table, *n)?;
                r.set("empirical_value", freq)
                    .set("empirical_deviation", freq - d.value);
            }
            r
        }
        Command::Chowla {
            base,
            signs,
            block,
            cutoff,
        } => {
            let cyl = match (base, signs, block) {
                (Some(b), Some(s), _) => SignedCylinder::new(Block2::parse(b)?, &parse_signs(s)?)?,
                (_, _, Some(b)) => SignedCylinder::from_block3(&Block3::parse(b)?),
                _ => bail!("give --base with --signs, or --block"),
            };
            let d = ChowlaMeasure::new(*cutoff)?.cylinder(&cyl)?;
            let mut r = Report::new(
                "chowla",
                json!({"base": base, "signs": signs, "block": block, "cutoff": cutoff}),
            );
            r.set("block3", cyl.to_block3().to_string())
                .set("value", d.value)
                .set("ln_value", d.ln_value)
                .set("error_bound", d.error_bound)
                .set("P", d.prime_cutoff);
            r
        }
        Command::VerifyAdmissible { level, cutoff, tol } => {
            let measure = ChowlaMeasure::new(*cutoff)?;
            let table = measure.level(*level)?;
            let rep = verify_admissible_level(&table, measure.mirsky(), *tol)?;
            passed = rep.passed;
            let mut r = Report::new(
                "verify-admissible",
                json!({"level": level, "cutoff": cutoff, "tol": tol}),
            );
            r.extend(&rep);
            r
        }
        Command::Hadamard { det, circulant } => {
            let mut r = Report::new("hadamard", json!({"det": det, "circulant": circulant}));
            if let Some(n) = det {
                let d = walsh_det_log2(*n)?;
                r.set("sign", d.sign)
                    .set("log2_abs_det", d.log2_abs.to_string())
                    .set("exact_det", d.exact.map(|v| v.to_string()));
            }
            if let Some(row) = circulant {
                let row = parse_signs(row)?;
                let m = circulant_from_row(&row);
                r.set("circulant_order", row.len()).set("is_hadamard", is_hadamard(&m)?);
            }
            r
        }
        Command::WalshSolve { n, a } => {
            if *n > WALSH_SOLVE_PRINT_MAX {
                bail!("--n is limited to {WALSH_SOLVE_PRINT_MAX} for printed solutions");
            }
            let sol = solve_uniform_system(*n, *a)?;
            let mut r = Report::new("walsh-solve", json!({"n": n, "a": a}));
            r.set("nu", &sol.nu).set("residual", sol.residual);
            r
        }
        Command::Barker { max_len, .. } => {
            let found = barker_search(*max_len)?;
            let lengths: Vec<usize> = found.iter().filter(|(_, v)| !v.is_empty()).map(|(&n, _)| n).collect();
            let sequences: serde_json::Map<String, serde_json::Value> = found
                .iter()
                .map(|(n, v)| (n.to_string(), serde_json::to_value(v).expect("strings")))
                .collect();
            let mut r = Report::new("barker", json!({"max_len": max_len}));
            r.set("lengths", lengths).set("sequences", sequences);
            r
        }
        Command::Correlate {
            function,
            shifts,
            exponents,
            n,
            mode,
            normalizer,
            out,
        } => {
            let spec = CorrelationSpec::new(shifts.clone(), exponents.clone())?;
            let mode = match (mode, normalizer) {
                (ModeArg::Cesaro, _) => AveragingMode::Cesaro,
                (ModeArg::Log, NormalizerArg::LogN) => AveragingMode::Logarithmic(LogNormalizer::LogN),
                (ModeArg::Log, NormalizerArg::EllN) => AveragingMode::Logarithmic(LogNormalizer::EllN),
            };
            let top = *n.iter().max().expect("nonempty");
            let table = sieve(ArithFunction::from(*function), top + spec.max_shift())?;
            let values = n
                .iter()
                .map(|&horizon| chowla_sum(&table, &spec, horizon, mode))
                .collect::<mflab_core::Result<Vec<_>>>()?;
            match out.as_str() {
                "csv" => {
                    let mut text = String::from("N,mode,normalizer,value");
                    for v in &values {
                        text.push_str(&format!(
                            "\n{},{},{},{}",
                            v.n,
                            mode.name(),
                            mode.normalizer_name(),
                            output::round_sig(v.value)
                        ));
                    }
                    return Ok(Outcome { text, passed });
                }
                "json" => {}
                other => bail!("--out takes json or csv, got {other:?}"),
            }
            let rows: Vec<_> = values
                .iter()
                .map(|v| json!({"N": v.n, "value": v.value}))
                .collect();
            let mut r = Report::new(
                "correlate",
                json!({"function": ArithFunction::from(*function), "shifts": shifts, "exponents": exponents, "N": n}),
            );
            r.set("mode", mode.name())
                .set("normalizer", mode.normalizer_name())
                .set("density_mode", spec.is_density_mode())
                .set("values", rows);
            r
        }
        Command::OrbitCoverage { len, n } => {
            let table = sieve(ArithFunction::Mobius, n + *len as u64)?;
            let cov = orbit_block_coverage(&table, *len, *n, &Enumerator::default())?;
            let mut r = Report::new("orbit-coverage", json!({"len": len, "N": n}));
            r.extend(&cov);
            r
        }
        Command::Sample {
            len,
            cutoff,
            seed,
            count,
            out,
        } => {
            let cfg = match cutoff {
                Some(c) => SampleConfig {
                    cutoff: *c,
                    len: *len,
                    seed: *seed,
                },
                None => SampleConfig::with_default_cutoff(*len, *seed),
            };
            let sampler = ChowlaSampler::new(cfg)?;
            let samples = sampler.samples(*count);
            let mut r = Report::new(
                "sample",
                json!({"len": len, "cutoff": cfg.cutoff, "seed": seed, "count": count}),
            );
            r.set("seed", seed)
                .set("P", cfg.cutoff)
                .set("truncation_bound", cfg.truncation_bound())
                .set("rng", RNG_ALGORITHM);
            match out {
                Some(path) => {
                    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    let mut w = BufWriter::new(file);
                    for s in &samples {
                        writeln!(w, "{s}")?;
                    }
                    w.flush()?;
                    r.set("out", path);
                }
                None => {
                    r.set("samples", samples.iter().map(|s| s.to_string()).collect::<Vec<_>>());
                }
            }
            r
        }
        Command::Report { quick, seed } => {
            let suite = report::run_suite(*quick, *seed)?;
            passed = suite.passed;
            let mut r = Report::new("report", json!({"quick": quick, "seed": seed}));
            r.extend(&suite);
            r
        }
    };
    let wall = cli.timing.then(|| start.elapsed());
    Ok(Outcome {
        text: report.render(wall),
        passed,
    })
}
