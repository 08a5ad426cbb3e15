mod commands;
mod output;
mod repro;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use opprank::hermitian::DEFAULT_GENERATOR_CAP;
use opprank::modrank::DEFAULT_MAX_DIM;

use commands::{BoundQuery, CliqueArgs};
use output::{emit, usage, CliError, Format, Outcome};

/// Oppositeness matrices of Hermitian polar spaces and the Ree-Tits
/// octagon O(2): construction, p-ranks, scheme invariants, bounds and
/// maximum cliques.
///
/// Exit codes: 0 success, 1 a check failed, 2 usage error, 3 budget exhausted.
#[derive(Parser)]
#[command(name = "opprank", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; all cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write relation matrices PREFIX_A0.mat .. PREFIX_Ad.mat.
    #[command(subcommand)]
    Build(Build),
    /// Check incidence data against the generalized polygon axioms.
    #[command(subcommand)]
    Verify(Verify),
    /// Rank of a matrix modulo a prime or over the rationals.
    Rank {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "mod", conflicts_with = "rational", required_unless_present = "rational")]
        modulus: Option<u64>,
        #[arg(long)]
        rational: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
        max_dim: usize,
    },
    /// Association-scheme axioms, eigenmatrices and the idempotent congruence.
    Scheme {
        /// Relation matrices A_0, A_1, ... in order, or one prefix.
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        /// Check n p^(d-1) E_d = A_d (mod p) for the dual polar scheme of H(2d-1, p^2).
        #[arg(long)]
        congruence: Option<u64>,
    },
    /// Evaluate a bound or rank formula.
    #[command(subcommand)]
    Bound(Bound),
    /// Largest clique of a 0/1 adjacency matrix.
    Clique(CliqueCmd),
    /// Recompute the whole reproduction table.
    Repro {
        /// Also run the H(3, 81) rank (slow).
        #[arg(long)]
        slow: bool,
        /// Also prove optimality of the O(2) partial ovoid, first with an opposite
        /// pair fixed, then with one point fixed; each gets this many seconds.
        #[arg(long, value_name = "SECS")]
        exact_ovoid: Option<f64>,
        /// Include per-row wall-clock times (makes reports differ between runs).
        #[arg(long)]
        timings: bool,
        /// Incidence data for O(2).
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Build {
    /// Generators of H(2d-1, q^2) and their intersection-dimension relations.
    Hermitian {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GENERATOR_CAP)]
        cap: usize,
    },
    /// Distance relations on the points of a generalized octagon.
    Octagon {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Verify {
    Octagon {
        /// `ig` file; defaults to $OPPRANK_DATA_DIR/o2.ig, then the bundled O(2).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        s: usize,
        #[arg(long, default_value_t = 4)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum Bound {
    /// Clique bound from a p-rank.
    Lemma1 {
        #[arg(long)]
        rank: u64,
        #[arg(long)]
        p: u64,
    },
    /// Partial spreads of H(2d-1, q^2), q = p^t, d even.
    Thm1 {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value_t = 2)]
        d: u32,
    },
    /// Partial ovoids of O(2^t), t odd.
    Thm2 {
        #[arg(long)]
        t: u32,
    },
    /// Counting bounds for partial spreads of H(2d-1, q^2).
    Baseline {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u32,
    },
    /// Counting bound (sr)^2 + 1 for partial ovoids of an octagon of order (s, r).
    Ovoid {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        r: u64,
    },
    /// rank^t, the p-rank over GF(p^t) from the one over GF(p).
    Lift {
        #[arg(long)]
        rank: u64,
        #[arg(long)]
        t: u32,
    },
    /// Closed-form p-rank: h3_lines, h5_generators, triality_hexagon, h5_multiplicity_bound.
    Formula {
        #[arg(long)]
        name: String,
        #[arg(long)]
        p: u64,
    },
    /// ((2p^3+p)/3)^t + 1 against (q^3+q+2)/2 for d = 2.
    Crossover {
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        max_t: u32,
    },
}

#[derive(Args)]
struct CliqueCmd {
    #[arg(long = "in")]
    input: PathBuf,
    /// Run the exact branch and bound after the local search.
    #[arg(long)]
    exact: bool,
    /// Only search cliques through vertex 0 (needs a vertex-transitive graph).
    #[arg(long, requires = "exact")]
    fix_first: bool,
    /// Only search cliques through vertex 0 and its smallest neighbour
    /// (needs a group transitive on ordered adjacent pairs).
    #[arg(long, requires = "exact", conflicts_with = "fix_first")]
    fix_first_edge: bool,
    /// Proven upper bound; the search stops once it is reached.
    #[arg(long, requires = "exact")]
    ub: Option<usize>,
    /// Wall-clock budget for the exact search, in seconds.
    #[arg(long, requires = "exact")]
    budget: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    restarts: u64,
    #[arg(long, default_value_t = 400)]
    steps: usize,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(usage)?;
    }
    match cli.command {
        Command::Build(Build::Hermitian { d, q, out, cap }) => commands::build_hermitian(d, q, cap, &out),
        Command::Build(Build::Octagon { input, out }) => commands::build_octagon(input.as_deref(), &out),
        Command::Verify(Verify::Octagon { input, n, s, r }) => commands::verify_octagon(input.as_deref(), n, s, r),
        Command::Rank {
            input,
            modulus,
            rational: _,
            max_dim,
        } => commands::rank(&input, modulus, max_dim),
        Command::Scheme { inputs, congruence } => commands::scheme(&inputs, congruence),
        Command::Bound(b) => commands::bound(match b {
            Bound::Lemma1 { rank, p } => BoundQuery::Lemma1 { rank, p },
            Bound::Thm1 { p, t, d } => BoundQuery::Thm1 { p, t, d },
            Bound::Thm2 { t } => BoundQuery::Thm2 { t },
            Bound::Baseline { q, d } => BoundQuery::Baseline { q, d },
            Bound::Ovoid { s, r } => BoundQuery::Ovoid { s, r },
            Bound::Lift { rank, t } => BoundQuery::Lift { rank, t },
            Bound::Formula { name, p } => BoundQuery::Formula { name, p },
            Bound::Crossover { primes, max_t } => BoundQuery::Crossover { primes, max_t },
        }),
        Command::Clique(c) => commands::clique(
            &c.input,
            &CliqueArgs {
                exact: c.exact,
                fix_first: c.fix_first,
                fix_first_edge: c.fix_first_edge,
                upper_bound: c.ub,
                budget: c.budget,
                restarts: c.restarts,
                steps: c.steps,
                seed: cli.seed,
            },
        ),
        Command::Repro {
            slow,
            exact_ovoid,
            timings,
            input,
        } => {
            let exact_ovoid = match exact_ovoid {
                Some(s) if !(s > 0.0 && s.is_finite()) => return Err(usage("--exact-ovoid must be positive")),
                s => s.map(Duration::from_secs_f64),
            };
            let octagon = commands::load_octagon(input.as_deref())?;
            repro::repro(
                octagon,
                &repro::ReproArgs {
                    seed: cli.seed,
                    slow,
                    exact_ovoid,
                    timings,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome.report, format, io::stdout().lock()) {
                eprintln!("opprank: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            eprintln!("opprank: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
