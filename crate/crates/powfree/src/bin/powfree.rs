//! Command-line front end.
//!
//! Exit codes are uniform across subcommands: 0 when the checked
//! property holds (or output was produced), 1 when a witness or
//! counterexample was found, 2 on usage or hypothesis errors.

use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use powfree::detectors::{
    empirical_frequency, find_abelian_k_power, find_additive_k_power, has_k_power_ordinary,
    search_longest_avoiding, PowerReport, ScanCertificate,
};
use powfree::growth::{base_substitutions, best_composition};
use powfree::morphism::LinearMorphism;
use powfree::templates::{
    ancestor_closure, decide_additive_k_avoidance, parents_of, splits_of, DecideConfig, Template,
    Verdict,
};
use powfree::words::Word;

#[derive(Parser)]
#[command(
    name = "powfree",
    version,
    about = "Avoidability of abelian and additive powers"
)]
struct Cli {
    /// Worker threads for internally parallel computations; results are
    /// identical at any setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit timestamps from output headers (for diffable goldens).
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a morphic fixed-point prefix h^n(seed).
    Expand(ExpandArgs),
    /// Scan a word for abelian, additive, or ordinary powers.
    Detect(DetectArgs),
    /// Decide whether g(f^ω(seed)) avoids additive k-powers.
    Decide(DecideArgs),
    /// Compute the ancestor closure of the g-parents of the power template.
    Ancestors(AncestorsArgs),
    /// List the splits of a letter image (debug aid).
    Splits(SplitsArgs),
    /// Rank composition substitutions by growth-rate lower bound.
    Growth(GrowthArgs),
    /// Exhaustive search for the longest avoiding binary word.
    Longest(LongestArgs),
    /// Letter frequency in a morphic fixed point.
    Freq(FreqArgs),
}

#[derive(Args)]
struct ExpandArgs {
    /// Morphism rules, e.g. "0->001 1->012 2->212".
    #[arg(long)]
    morphism: String,
    #[arg(long, default_value_t = 0)]
    seed: u8,
    /// Number of iterations.
    #[arg(long, conflicts_with = "min_length")]
    iters: Option<u32>,
    /// Iterate until the prefix has at least this length.
    #[arg(long)]
    min_length: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    /// The word to scan, or '-' to read it from stdin.
    #[arg(long)]
    word: String,
    /// Power kind: abelian, additive, or ordinary.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Write the JSON certificate here instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct DecideArgs {
    /// Inner morphism rules for f.
    #[arg(long)]
    f: String,
    /// Outer morphism rules for g.
    #[arg(long)]
    g: String,
    #[arg(long, default_value_t = 0)]
    seed: u8,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Where to persist the ancestor set (newline-delimited JSON).
    #[arg(long)]
    ancestors_file: Option<String>,
    /// Where to write the full JSON decision report.
    #[arg(long)]
    report_file: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    closure_cap: usize,
}

#[derive(Args)]
struct AncestorsArgs {
    /// Inner morphism rules for f (the closure relation).
    #[arg(long)]
    f: String,
    /// Outer morphism rules for g (seeds are the g-parents of t_0).
    #[arg(long)]
    g: String,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Output file for the closed set, one JSON template per line.
    #[arg(long)]
    out: String,
    #[arg(long, default_value_t = 1_000_000)]
    closure_cap: usize,
}

#[derive(Args)]
struct SplitsArgs {
    #[arg(long)]
    morphism: String,
    /// The letter to split, or "eps" for the empty word.
    #[arg(long)]
    letter: String,
}

#[derive(Args)]
struct GrowthArgs {
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    /// Base substitutions to compose, a subset of "0123".
    #[arg(long, default_value = "01")]
    bases: String,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Letter-0 frequency of the backing avoiding word.
    #[arg(long)]
    alpha: Option<f64>,
    /// Rows per k: 1 shows the maximizer only.
    #[arg(long, default_value_t = 1)]
    top: usize,
}

#[derive(Args)]
struct LongestArgs {
    #[arg(long, default_value_t = 4)]
    k_abelian: usize,
    #[arg(long, default_value_t = 3)]
    k_ordinary: usize,
    #[arg(long, default_value_t = 100_000_000)]
    node_cap: u64,
}

#[derive(Args)]
struct FreqArgs {
    #[arg(long)]
    morphism: String,
    #[arg(long, default_value_t = 0)]
    seed: u8,
    #[arg(long, default_value_t = 0)]
    letter: u8,
    /// Also count occurrences in h^n(seed) for this n.
    #[arg(long)]
    empirical_iters: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn header(cli: &Cli, resolved: &str) {
    println!("# powfree {}", env!("CARGO_PKG_VERSION"));
    println!("# config: {resolved}");
    if !cli.no_timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        println!("# timestamp: {secs}");
    }
}

/// Accepts inline rules (`0->001 1->012 ...`) or the path of a file
/// containing them.
fn read_morphism(spec: &str) -> powfree::Result<LinearMorphism> {
    if !spec.contains("->") && std::path::Path::new(spec).is_file() {
        let text = fs::read_to_string(spec)
            .map_err(|e| powfree::Error::Parse(format!("read {spec}: {e}")))?;
        text.parse()
    } else {
        spec.parse()
    }
}

/// Accepts a digit string, `-` for stdin, or the path of a file
/// containing the word.
fn read_word(spec: &str) -> powfree::Result<Word> {
    if spec == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| powfree::Error::Parse(format!("stdin: {e}")))?;
        Word::from_str(buf.trim())
    } else if std::path::Path::new(spec).is_file() {
        let text = fs::read_to_string(spec)
            .map_err(|e| powfree::Error::Parse(format!("read {spec}: {e}")))?;
        Word::from_str(text.trim())
    } else {
        Word::from_str(spec)
    }
}

fn run(cli: &Cli) -> powfree::Result<ExitCode> {
    match &cli.command {
        Command::Expand(args) => {
            let h = read_morphism(&args.morphism)?;
            let word = match (args.iters, args.min_length) {
                (Some(n), _) => h.iterate_prefix(args.seed, n)?,
                (None, Some(len)) => {
                    let mut n = 0;
                    loop {
                        let w = h.iterate_prefix(args.seed, n)?;
                        if w.len() >= len || w.len() == h.iterate_prefix(args.seed, n + 1)?.len() {
                            break w;
                        }
                        n += 1;
                    }
                }
                (None, None) => {
                    return Err(powfree::Error::Domain(
                        "need --iters or --min-length".into(),
                    ))
                }
            };
            println!("{word}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Detect(args) => {
            let word = read_word(&args.word)?;
            let k = args.k;
            let (property, witness): (String, Option<PowerReport>) = match args.kind.as_str() {
                "additive" => (
                    format!("no additive {k}-power"),
                    find_additive_k_power(&word, k)?,
                ),
                "abelian" => (
                    format!("no abelian {k}-power"),
                    find_abelian_k_power(&word, k)?,
                ),
                "ordinary" => (
                    format!("no ordinary {k}-power"),
                    has_k_power_ordinary(&word, k)?,
                ),
                other => {
                    return Err(powfree::Error::Domain(format!(
                        "unknown power kind '{other}'"
                    )))
                }
            };
            let clean = witness.is_none();
            let cert = ScanCertificate {
                word_source: if args.word == "-" {
                    "stdin".into()
                } else if std::path::Path::new(&args.word).is_file() {
                    args.word.clone()
                } else {
                    "argument".into()
                },
                property,
                bound: word.len(),
                verdict: if clean {
                    "clean".into()
                } else {
                    "witness".into()
                },
                witness,
                parameters: serde_json::json!({ "k": k, "kind": args.kind, "length": word.len() }),
            };
            let json = serde_json::to_string_pretty(&cert).expect("certificate serializes");
            match &args.out {
                Some(path) => fs::write(path, json + "\n")
                    .map_err(|e| powfree::Error::Domain(format!("write {path}: {e}")))?,
                None => println!("{json}"),
            }
            Ok(if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Decide(args) => {
            let f = read_morphism(&args.f)?;
            let g = read_morphism(&args.g)?;
            let config = DecideConfig {
                closure_cap: args.closure_cap,
                ..DecideConfig::default()
            };
            header(
                cli,
                &format!(
                    "decide f=\"{}\" g=\"{}\" seed={} k={} closure_cap={}",
                    f.format_rules(),
                    g.format_rules(),
                    args.seed,
                    args.k,
                    args.closure_cap
                ),
            );
            let outcome = decide_additive_k_avoidance(&f, &g, args.seed, args.k, &config)?;
            let report = &outcome.report;
            if let Some(count) = report.g_parent_count {
                println!("g-parents of t0: {count}");
            }
            if let Some(generations) = &report.closure_generations {
                let rounds: Vec<String> = generations.iter().map(|n| format!("+{n}")).collect();
                println!("closure rounds: {}", rounds.join(" "));
            }
            if let Some(size) = report.closure_size {
                println!("ancestor set size: {size}");
            }
            if let (Some(bg), Some(bf), Some(delta)) =
                (report.bound_b_g_t0, report.max_bound_b_f, report.max_delta)
            {
                println!("B_g(t0)={bg} max B_f={bf} max delta={delta}");
            }
            if let Some(path) = &args.ancestors_file {
                if let Some(ancestors) = &outcome.ancestors {
                    fs::write(path, ancestors.to_jsonl())
                        .map_err(|e| powfree::Error::Domain(format!("write {path}: {e}")))?;
                    println!("ancestor set written to {path}");
                }
            }
            if let Some(path) = &args.report_file {
                let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
                fs::write(path, json)
                    .map_err(|e| powfree::Error::Domain(format!("write {path}: {e}")))?;
            }
            match &report.verdict {
                Verdict::Avoids => {
                    println!(
                        "verdict: AVOIDS additive {}-powers (both routes agree)",
                        args.k
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Witness { context, report } => {
                    println!(
                        "verdict: WITNESS in {context}: start={} block={}",
                        report.start, report.period
                    );
                    Ok(ExitCode::from(1))
                }
                Verdict::HypothesisViolated { clause } => {
                    println!("verdict: hypothesis violated: {clause}");
                    Ok(ExitCode::from(2))
                }
                Verdict::Inconclusive { detail } => {
                    println!("verdict: inconclusive: {detail}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Ancestors(args) => {
            let f = read_morphism(&args.f)?;
            let g = read_morphism(&args.g)?;
            header(
                cli,
                &format!(
                    "ancestors f=\"{}\" g=\"{}\" k={} closure_cap={}",
                    f.format_rules(),
                    g.format_rules(),
                    args.k,
                    args.closure_cap
                ),
            );
            let t0 = Template::power_template(args.k)?;
            let seeds = parents_of(&g, &t0)?;
            println!("g-parents of t0: {}", seeds.len());
            let closed = ancestor_closure(&f, &seeds, args.closure_cap)?;
            let rounds: Vec<String> = closed.generations.iter().map(|n| format!("+{n}")).collect();
            println!("closure rounds: {}", rounds.join(" "));
            println!("ancestor set size: {}", closed.len());
            fs::write(&args.out, closed.to_jsonl())
                .map_err(|e| powfree::Error::Domain(format!("write {}: {e}", args.out)))?;
            println!("ancestor set written to {}", args.out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Splits(args) => {
            let h = read_morphism(&args.morphism)?;
            let source = if args.letter == "eps" {
                Word::empty()
            } else {
                Word::from_str(&args.letter)?
            };
            for s in splits_of(&h, &source)? {
                println!("[{}|{}|{}]", s.prefix, s.middle, s.suffix);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Growth(args) => {
            let all = base_substitutions();
            let mut bases = Vec::new();
            for c in args.bases.chars() {
                let i = c
                    .to_digit(10)
                    .filter(|&i| i < 4)
                    .ok_or_else(|| powfree::Error::Domain(format!("bad base index '{c}'")))?;
                bases.push(all[i as usize].clone());
            }
            let alpha = args.alpha.unwrap_or((5f64.sqrt() - 1.0) / 2.0);
            header(
                cli,
                &format!(
                    "growth k={}..{} bases={} alpha={alpha} eps={}",
                    args.k_min, args.k_max, args.bases, args.eps
                ),
            );
            println!("k\tx\tl0\tl1\tlog10_m0\tlog10_m1\tbeta");
            for k in args.k_min..=args.k_max {
                let ranked = best_composition(k, &bases, alpha, args.eps)?;
                for row in ranked.iter().take(args.top) {
                    println!(
                        "{k}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
                        row.x,
                        row.ell0,
                        row.ell1,
                        row.log10_m0,
                        row.log10_m1,
                        row.beta_truncated()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Longest(args) => {
            header(
                cli,
                &format!(
                    "longest k_abelian={} k_ordinary={} node_cap={}",
                    args.k_abelian, args.k_ordinary, args.node_cap
                ),
            );
            let (len, words) =
                search_longest_avoiding(args.k_abelian, args.k_ordinary, args.node_cap)?;
            println!("max length: {len}");
            println!("maximal words: {}", words.len());
            for w in &words {
                println!("{w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Freq(args) => {
            let h = read_morphism(&args.morphism)?;
            let freq = h.letter_frequency(args.seed, args.letter, 1e-12)?;
            header(
                cli,
                &format!(
                    "freq morphism=\"{}\" seed={} letter={}",
                    h.format_rules(),
                    args.seed,
                    args.letter
                ),
            );
            println!("perron frequency: {freq:.12}");
            if let Some(n) = args.empirical_iters {
                let prefix = h.iterate_prefix(args.seed, n)?;
                let emp = empirical_frequency(&prefix, args.letter)?;
                println!(
                    "empirical on h^{n}(seed) (length {}): {} = {:.12}",
                    prefix.len(),
                    emp,
                    *emp.numer() as f64 / *emp.denom() as f64
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
