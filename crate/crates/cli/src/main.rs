//! `bifree`: command-line access to the bi-free combinatorics library.
//!
//! Exit codes: 0 when the computation succeeds or the checked property
//! holds, 1 when a counterexample is printed, 2 on usage or data errors.

use std::path::PathBuf;
use std::process::ExitCode;

use bifree::bnc::{
    bnc_mobius, classify_blocks, enumerate_bnc, is_bi_non_crossing, maximal_mono_intervals, BlockKind,
    BncPartition, ChiMap, EpsMap, PairId,
};
use bifree::cumulants::kappa;
use bifree::liberation::{one_per_face, taur, taur_test, ubm_eval, ubm_moment, Liberator};
use bifree::ncp::{all_words, Letter, MomentOracle, Word};
use bifree::partitions::SetPartition;
use bifree::rational::{render, zero};
use bifree::spec_file::DistributionSpec;
use bifree::vaccine::{vaccine_reconstruct_moment, vaccine_test};
use bifree::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bifree", version, about = "Exact bi-free probability computations")]
struct Cli {
    /// Output style; `lines` prints stable `key=value` records.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Lines,
}

#[derive(Subcommand)]
enum Command {
    /// Bi-non-crossing partition utilities.
    #[command(subcommand)]
    Bnc(BncCommand),
    /// Mixed moment of a word.
    Moment(MomentArgs),
    /// Scan for violations of a bi-freeness criterion.
    Check(CheckArgs),
    /// Moment of the free unitary Brownian motion.
    Ubm(UbmArgs),
    /// Print the taur tensor sum of a word.
    Taur(TaurArgs),
    /// Order-t liberation expansion of a word against the taur value.
    Liberate(TaurArgs),
}

#[derive(Subcommand)]
enum BncCommand {
    /// List BNC(chi).
    Enum {
        #[arg(long)]
        chi: String,
    },
    /// Test membership of a partition in BNC(chi).
    Check {
        #[arg(long)]
        chi: String,
        /// Blocks separated by `|`, e.g. "1|2 5 7|3 4|6 8".
        #[arg(long)]
        pi: String,
    },
    /// Maximal monochromatic chi-intervals.
    Intervals {
        #[arg(long)]
        chi: String,
        /// Comma-separated pair ids, one per position.
        #[arg(long)]
        eps: String,
    },
    /// Inner/outer label of each block.
    Classify {
        #[arg(long)]
        chi: String,
        #[arg(long)]
        pi: String,
    },
    /// Möbius function of BNC(chi) between two partitions.
    Mobius {
        #[arg(long)]
        chi: String,
        #[arg(long)]
        lower: String,
        #[arg(long)]
        upper: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MomentMode {
    Bifree,
    Vaccine,
    Conditional,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Cumulants,
    Vaccine,
    Taur,
    Liberation,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Space-separated generator symbols.
    #[arg(long)]
    word: String,
    #[arg(long, value_enum, default_value_t = MomentMode::Bifree)]
    mode: MomentMode,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Pair playing the role of ι; all pairs when omitted.
    #[arg(long)]
    pair: Option<String>,
    /// Use every generator instead of one per face.
    #[arg(long)]
    widen: bool,
}

#[derive(Args)]
struct UbmArgs {
    #[arg(long)]
    n: u64,
    /// Also evaluate at this time.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args)]
struct TaurArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    word: String,
    #[arg(long)]
    pair: String,
}

/// Successful runs end in `Holds` or `Violated`.
enum Outcome {
    Holds,
    Violated,
}

struct Out {
    format: Format,
}

impl Out {
    /// Prints `human` or `key=value` depending on the format.
    fn emit(&self, human: impl AsRef<str>, key: &str, value: impl AsRef<str>) {
        match self.format {
            Format::Human => println!("{}", human.as_ref()),
            Format::Lines => println!("{key}={}", value.as_ref()),
        }
    }

    fn seed(&self, seed: Option<u64>) -> Result<u64> {
        match (seed, self.format) {
            (Some(s), _) => Ok(s),
            (None, Format::Human) => Ok(0),
            (None, Format::Lines) => Err(Error::Mode("--seed is required with --format lines".into())),
        }
    }
}

fn chi(text: &str) -> Result<ChiMap> {
    text.parse()
}

fn partition(text: &str, chi: &ChiMap) -> Result<BncPartition> {
    let p: SetPartition = text.parse()?;
    BncPartition::new(p, chi.clone())
}

fn comma_list(block: &[usize]) -> String {
    block.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn run_bnc(out: &Out, cmd: BncCommand) -> Result<Outcome> {
    match cmd {
        BncCommand::Enum { chi: c } => {
            let all = enumerate_bnc(&chi(&c)?)?;
            for p in &all {
                out.emit(p.partition().to_string(), "partition", p.partition().to_string());
            }
            out.emit(format!("{} partitions", all.len()), "count", all.len().to_string());
        }
        BncCommand::Check { chi: c, pi } => {
            let chi = chi(&c)?;
            let p: SetPartition = pi.parse()?;
            let yes = if is_bi_non_crossing(&p, &chi)? { "yes" } else { "no" };
            out.emit(format!("BNC: {yes}"), "bnc", yes);
        }
        BncCommand::Intervals { chi: c, eps } => {
            let eps: EpsMap = eps.parse()?;
            for iv in maximal_mono_intervals(&chi(&c)?, &eps)? {
                out.emit(iv.to_string(), "interval", comma_list(&iv.indices));
            }
        }
        BncCommand::Classify { chi: c, pi } => {
            let p = partition(&pi, &chi(&c)?)?;
            for (block, kind) in classify_blocks(&p) {
                let kind = match kind {
                    BlockKind::Inner => "inner",
                    BlockKind::Outer => "outer",
                };
                out.emit(
                    format!("{{{}}}: {kind}", comma_list(&block)),
                    "block",
                    format!("{} kind={kind}", comma_list(&block)),
                );
            }
        }
        BncCommand::Mobius { chi: c, lower, upper } => {
            let chi = chi(&c)?;
            let mu = bnc_mobius(&partition(&lower, &chi)?, &partition(&upper, &chi)?)?;
            out.emit(format!("mobius = {mu}"), "mobius", mu.to_string());
        }
    }
    Ok(Outcome::Holds)
}

fn run_moment(out: &Out, args: MomentArgs) -> Result<Outcome> {
    let spec = DistributionSpec::load(&args.spec)?;
    let (label, value) = match args.mode {
        MomentMode::Bifree => {
            let d = spec.joint();
            ("phi", d.moment(&d.parse_word(&args.word)?)?)
        }
        MomentMode::Vaccine => {
            let seed = out.seed(args.seed)?;
            let w = spec.family.parse_word(&args.word)?;
            ("phi", vaccine_reconstruct_moment(&spec.family, &w, seed)?)
        }
        MomentMode::Conditional => {
            let d = spec.conditional()?;
            ("theta", d.theta(&d.parse_word(&args.word)?)?)
        }
    };
    out.emit(format!("{label}({}) = {}", args.word.trim(), render(&value)), "value", render(&value));
    Ok(Outcome::Holds)
}

fn iotas(letters: &[Letter], pair: &Option<String>) -> Result<Vec<PairId>> {
    let mut all: Vec<PairId> = letters.iter().map(|l| l.pair.clone()).collect();
    all.sort();
    all.dedup();
    match pair {
        Some(p) => {
            let p = PairId::new(p);
            if !all.contains(&p) {
                return Err(Error::UnknownPair(p.to_string()));
            }
            Ok(vec![p])
        }
        None => Ok(all),
    }
}

fn symbols(w: &Word) -> String {
    w.letters().iter().map(|l| l.symbol.as_str()).collect::<Vec<_>>().join(",")
}

fn run_check(out: &Out, args: CheckArgs) -> Result<Outcome> {
    let spec = DistributionSpec::load(&args.spec)?;
    let d = spec.joint();
    let alphabet = if args.widen { d.letters() } else { one_per_face(&d.letters()) };
    if !(1..=8).contains(&args.max_len) {
        return Err(Error::Domain(format!("--max-len must lie in 1..=8, got {}", args.max_len)));
    }
    match args.method {
        Method::Cumulants => {
            let words: Vec<Word> = all_words(&alphabet, 2, args.max_len).into_iter().filter(|w| !w.is_pure()).collect();
            for w in &words {
                let k = kappa(&d, w)?;
                if k != zero() {
                    println!("COUNTEREXAMPLE word={} value={}", symbols(w), render(&k));
                    return Ok(Outcome::Violated);
                }
            }
            println!("HOLDS words={}", words.len());
            Ok(Outcome::Holds)
        }
        Method::Vaccine => {
            let seed = out.seed(args.seed)?;
            let v = vaccine_test(&d, &d.letters(), args.max_len, args.trials, seed)?;
            println!("{v}");
            Ok(if v.holds() { Outcome::Holds } else { Outcome::Violated })
        }
        Method::Taur => {
            let mut result = Outcome::Holds;
            for iota in iotas(&alphabet, &args.pair)? {
                let v = taur_test(&d, &alphabet, &iota, args.max_len)?;
                println!("pair={iota} {v}");
                if !v.holds() {
                    result = Outcome::Violated;
                    break;
                }
            }
            Ok(result)
        }
        Method::Liberation => {
            let lib = Liberator::new(&spec.family)?;
            let iotas = iotas(&alphabet, &args.pair)?;
            let words: Vec<Word> = all_words(&alphabet, 1, args.max_len).into_iter().filter(|w| !w.is_pure()).collect();
            for iota in &iotas {
                for w in &words {
                    let r = lib.check(w, iota)?;
                    if !r.matches() {
                        println!("COUNTEREXAMPLE pair={iota} word={} {r}", symbols(w));
                        return Ok(Outcome::Violated);
                    }
                }
            }
            println!("HOLDS words={} pairs={}", words.len(), iotas.len());
            Ok(Outcome::Holds)
        }
    }
}

fn run_ubm(out: &Out, args: UbmArgs) -> Result<Outcome> {
    let e = ubm_moment(args.n);
    out.emit(e.to_string(), "expr", e.to_string());
    if let Some(t) = args.t {
        let v = ubm_eval(args.n, t)?;
        out.emit(format!("at t={t}: {v:.15e}"), "value", format!("{v:.15e}"));
    }
    Ok(Outcome::Holds)
}

fn run_taur(args: TaurArgs) -> Result<Outcome> {
    let spec = DistributionSpec::load(&args.spec)?;
    let w = spec.family.parse_word(&args.word)?;
    let iota = PairId::new(&args.pair);
    spec.family.pure(&iota)?;
    println!("{}", taur(&w, &iota));
    Ok(Outcome::Holds)
}

fn run_liberate(args: TaurArgs) -> Result<Outcome> {
    let spec = DistributionSpec::load(&args.spec)?;
    let w = spec.family.parse_word(&args.word)?;
    let iota = PairId::new(&args.pair);
    spec.family.pure(&iota)?;
    let r = Liberator::new(&spec.family)?.check(&w, &iota)?;
    println!("{r}");
    Ok(if r.matches() { Outcome::Holds } else { Outcome::Violated })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out { format: cli.format };
    let result = match cli.command {
        Command::Bnc(cmd) => run_bnc(&out, cmd),
        Command::Moment(args) => run_moment(&out, args),
        Command::Check(args) => run_check(&out, args),
        Command::Ubm(args) => run_ubm(&out, args),
        Command::Taur(args) => run_taur(args),
        Command::Liberate(args) => run_liberate(args),
    };
    match result {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
