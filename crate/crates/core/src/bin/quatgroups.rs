use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use quatgroups::classification::{
    classify_case, predicted_commutator_ab, predicted_gamma_ab, predicted_lambda_ab, predicted_t_constraint,
    r_invariant,
};
use quatgroups::harness::{
    cache_dir_from_env, conjecture_config, report_from_records, reproduce_table, sweep, write_records, Computation, OutputFormat,
    PairSource, ResidueFilter, SweepConfig,
};
use quatgroups::quaternion::t_invariant;
use quatgroups::subgroups::{subgroup_abelianization, SubgroupKind, DEFAULT_INDEX_CEILING};
use quatgroups::zmodule::abelianize_presentation;
use quatgroups::{GroupPresentation, PrimePair, Result};

/// Quaternion lattices on products of trees: invariants, presentations,
/// abelianizations and conjecture sweeps.
#[derive(Parser)]
#[command(name = "quatgroups", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Worker threads (0 = all cores).
    #[arg(long, short = 'j', default_value_t = 0)]
    jobs: usize,
    /// Cache directory (default: $QUATGROUPS_CACHE, else no cache).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Ignore cached values.
    #[arg(long)]
    recompute: bool,
    /// Largest subgroup index attempted.
    #[arg(long, default_value_t = DEFAULT_INDEX_CEILING)]
    ceiling: u64,
    /// Output format: text, json or csv.
    #[arg(long, default_value = "text")]
    format: OutputFormat,
    /// Write records to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Number of commuting pairs t_(p,l).
    Tcount { p: u64, l: u64 },
    /// Invariants, case label and predicted groups of a pair.
    Classify { p: u64, l: u64 },
    /// Print the square-complex presentation.
    Present {
        p: u64,
        l: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Abelianization of Γ_(p,l).
    Abelianize { p: u64, l: u64 },
    /// Abelianization of Λ_(p,l) or of [Γ, Γ].
    Subgroup {
        p: u64,
        l: u64,
        #[arg(long)]
        which: SubgroupKind,
        #[arg(long, default_value_t = DEFAULT_INDEX_CEILING)]
        ceiling: u64,
    },
    /// Compute invariants over a range of prime pairs.
    Sweep {
        /// All pairs of distinct odd primes up to this bound.
        #[arg(long, required_unless_present = "pairs")]
        bound: Option<u64>,
        /// Explicit pairs, e.g. `3,5 5,13`.
        #[arg(long, num_args = 1.., value_parser = parse_pair, conflicts_with = "bound")]
        pairs: Vec<PrimePair>,
        /// Residue filter: 1-1, 3-3, mixed or all.
        #[arg(long, default_value = "all")]
        filter: ResidueFilter,
        /// Computations: t, gamma_ab, commutator_ab, lambda_ab.
        #[arg(long, value_delimiter = ',', default_value = "t")]
        compute: Vec<Computation>,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Check one conjecture (1-12) over a range of pairs.
    Verify {
        #[arg(long)]
        conjecture: u8,
        #[arg(long, conflicts_with = "pairs")]
        bound: Option<u64>,
        #[arg(long, num_args = 1.., value_parser = parse_pair)]
        pairs: Vec<PrimePair>,
        /// Print every checked record, not only mismatches.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Rebuild a reference table and diff it.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        #[arg(long, short = 'j', default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> std::result::Result<PrimePair, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected p,l (got `{s}`)"))?;
    let p = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let l = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    PrimePair::new(p, l).map_err(|e| e.to_string())
}

/// Pairs checked by `verify` when no range is given: primes up to 61, or
/// up to 29 where the commutator subgroup is needed.
fn default_pairs(conjecture: u8) -> PairSource {
    match conjecture {
        8..=10 | 12 => PairSource::Bound(29),
        _ => PairSource::Bound(61),
    }
}

fn config_from(source: PairSource, filter: ResidueFilter, run: &RunOpts) -> SweepConfig {
    let mut cfg = match source {
        PairSource::Bound(b) => SweepConfig::bound(b),
        PairSource::Explicit(v) => SweepConfig::explicit(v),
    };
    cfg.filter = filter;
    cfg.jobs = run.jobs;
    cfg.cache_dir = run.cache.clone().or_else(cache_dir_from_env);
    cfg.recompute = run.recompute;
    cfg.index_ceiling = run.ceiling;
    cfg.format = run.format;
    cfg
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Tcount { p, l } => {
            let pair = PrimePair::new(p, l)?;
            println!("{}", t_invariant(pair.p(), pair.l())?);
        }
        Command::Classify { p, l } => {
            let pair = PrimePair::new(p, l)?;
            let case = classify_case(&pair);
            println!("pair          {pair}");
            if let Ok(r) = r_invariant(&pair) {
                println!("r             {r}");
            }
            println!("case          {case} ({})", case.description());
            println!("t             {}", t_invariant(pair.p(), pair.l())?);
            println!("t constraint  {}", predicted_t_constraint(&pair));
            println!("Γ^ab          {}", predicted_gamma_ab(&pair));
            println!("[Γ,Γ]^ab      {}", predicted_commutator_ab(&pair));
            println!("Λ^ab          {}", predicted_lambda_ab(&pair));
        }
        Command::Present { p, l, out } => {
            let text = GroupPresentation::build(p, l)?.to_text();
            output(&out)?.write_all(text.as_bytes())?;
        }
        Command::Abelianize { p, l } => {
            let pair = PrimePair::new(p, l)?;
            let (g, _) = abelianize_presentation(&GroupPresentation::build(p, l)?);
            let predicted = predicted_gamma_ab(&pair);
            println!("{g}");
            if g != predicted {
                eprintln!("differs from the predicted {predicted}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Subgroup { p, l, which, ceiling } => {
            let pair = PrimePair::new(p, l)?;
            let g = subgroup_abelianization(&GroupPresentation::build(p, l)?, which, ceiling)?;
            let predicted = match which {
                SubgroupKind::Lambda => predicted_lambda_ab(&pair),
                SubgroupKind::Commutator => predicted_commutator_ab(&pair),
            };
            println!("{g}");
            if g != predicted {
                eprintln!("differs from the predicted {predicted}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep { bound, pairs, filter, compute, run } => {
            let source = match bound {
                Some(b) => PairSource::Bound(b),
                None => PairSource::Explicit(pairs),
            };
            let cfg = config_from(source, filter, &run).computations(compute);
            let records = sweep(&cfg)?;
            write_records(&records, cfg.format, output(&run.out)?)?;
            if records.iter().any(|r| r.has_mismatch()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { conjecture, bound, pairs, all, run } => {
            let source = match (bound, pairs.is_empty()) {
                (Some(b), _) => PairSource::Bound(b),
                (None, false) => PairSource::Explicit(pairs),
                (None, true) => default_pairs(conjecture),
            };
            let cfg = conjecture_config(conjecture, &config_from(source, ResidueFilter::All, &run))?;
            let start = Instant::now();
            let records = sweep(&cfg)?;
            let report = report_from_records(conjecture, &records, start.elapsed().as_secs_f64());
            eprintln!("{}", report.statement);
            if all {
                write_records(&records, cfg.format, output(&run.out)?)?;
            } else if !report.mismatches.is_empty() {
                write_records(&report.mismatches, cfg.format, output(&run.out)?)?;
            }
            if !report.skipped.is_empty() {
                let list: Vec<String> = report.skipped.iter().map(|(p, l)| format!("({p},{l})")).collect();
                eprintln!("skipped: {}", list.join(" "));
            }
            println!("{}", report.summary());
            if !report.all_match() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Tables { which, jobs, cache } => {
            let report = reproduce_table(which, jobs, cache.or_else(cache_dir_from_env))?;
            print!("{}", report.rendered);
            for d in &report.diffs {
                println!("DIFF {d}");
            }
            println!("table {which}: {}", if report.matches() { "matches" } else { "differs" });
            if !report.matches() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
