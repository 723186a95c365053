use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use braidwork_core::RingKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Primes for which a finite-field backend is compiled in.
pub const SUPPORTED_PRIMES: [u32; 11] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    VerifySimplicial,
    VerifyBraid,
    VerifyProp21,
    VerifyMagnus,
    VerifyDbar0,
    MooreCheck,
    Lemma27,
    Lemma210,
    FixedCheck,
    MooreBasis,
    E1,
    D1Crosscheck,
    Differentials,
    Vanishing,
    Pi,
    ReportAll,
}

impl Command {
    pub const ALL: [Command; 16] = [
        Command::VerifySimplicial,
        Command::VerifyBraid,
        Command::VerifyProp21,
        Command::VerifyMagnus,
        Command::VerifyDbar0,
        Command::MooreCheck,
        Command::Lemma27,
        Command::Lemma210,
        Command::FixedCheck,
        Command::MooreBasis,
        Command::E1,
        Command::D1Crosscheck,
        Command::Differentials,
        Command::Vanishing,
        Command::Pi,
        Command::ReportAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifySimplicial => "verify-simplicial",
            Command::VerifyBraid => "verify-braid",
            Command::VerifyProp21 => "verify-prop21",
            Command::VerifyMagnus => "verify-magnus",
            Command::VerifyDbar0 => "verify-dbar0",
            Command::MooreCheck => "moore-check",
            Command::Lemma27 => "lemma27",
            Command::Lemma210 => "lemma210",
            Command::FixedCheck => "fixed-check",
            Command::MooreBasis => "moore-basis",
            Command::E1 => "e1",
            Command::D1Crosscheck => "d1-crosscheck",
            Command::Differentials => "differentials",
            Command::Vanishing => "vanishing",
            Command::Pi => "pi",
            Command::ReportAll => "report-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

fn parse_ring(s: &str) -> Result<RingKind, String> {
    let ring: RingKind = s.parse().map_err(|e: braidwork_core::Error| e.to_string())?;
    if let RingKind::ModP(p) = ring {
        if !SUPPORTED_PRIMES.contains(&p) {
            return Err(format!("prime {p} is not supported (largest supported prime is 31)"));
        }
    }
    Ok(ring)
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Debug, Args)]
pub struct Options {
    /// Largest braid index / simplicial dimension (default depends on the command)
    #[arg(long, value_parser = positive)]
    pub n_max: Option<usize>,
    /// Largest dimension for randomized suites
    #[arg(long, value_parser = positive)]
    pub dim_max: Option<usize>,
    /// Largest weight t
    #[arg(long, value_parser = positive)]
    pub t_max: Option<usize>,
    /// Largest series degree
    #[arg(long, value_parser = positive)]
    pub deg_max: Option<usize>,
    /// Largest stem for the homotopy assembly
    #[arg(long, value_parser = positive)]
    pub stem_max: Option<usize>,
    /// Samples per dimension for randomized suites
    #[arg(long, value_parser = positive)]
    pub samples: Option<usize>,
    /// Dimension parameter for lemma210
    #[arg(long)]
    pub n: Option<usize>,
    /// Braid power for lemma210
    #[arg(long, value_parser = positive)]
    pub k: Option<usize>,
    /// Word length bound for lemma210
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Ground ring: `z` or `zp:<prime>`
    #[arg(long, value_parser = parse_ring, default_value = "z")]
    pub ring: RingKind,
    /// Seed for the ChaCha8 generator
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (affects wall time only)
    #[arg(long, value_parser = positive, default_value = "1")]
    pub jobs: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Advance pages past undetermined differentials, treating them as zero
    #[arg(long)]
    pub assume_zero: bool,
    /// Exit with status 1 when any check is undetermined
    #[arg(long)]
    pub strict: bool,
    /// Record wall time in the report (makes output run-dependent)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Simplicial identities of F(S¹) as generator-map equalities
    VerifySimplicial(Options),
    /// Braid relations and the cycle characterization Z = N ∩ σ₋₁N
    VerifyBraid(Options),
    /// Compatibility of the braid action with faces and degeneracies
    VerifyProp21(Options),
    /// The Magnus representation commutes with the simplicial and braid structure
    VerifyMagnus(Options),
    /// The decomposition of the conjugated face into Steenrod components
    VerifyDbar0(Options),
    /// Moore kernels equal the span of non-degenerate monomials
    MooreCheck(Options),
    /// Face tables of the inversion witness σ_{k+1}s_{k+1}x
    Lemma27(Options),
    /// Brute-force search for words fixed by σ_j^k
    Lemma210(Options),
    /// Homotopy certificates for pure braids acting on cycles
    FixedCheck(Options),
    /// Non-degenerate Lie bases and the Moore boundary d0∘d0 = 0
    MooreBasis(Options),
    /// E¹ of the lower-central-series spectral sequence
    E1(Options),
    /// Two independent computations of d¹
    D1Crosscheck(Options),
    /// Differentials through the computed pages
    Differentials(Options),
    /// Weight vanishing and exponent pattern of E¹
    Vanishing(Options),
    /// Assembly of π_{n+1}(S²) against the reference table
    Pi(Options),
    /// Every suite at its default size
    ReportAll(Options),
    /// `verify <suite>` is shorthand for `verify-<suite>`
    Verify {
        suite: String,
        #[command(flatten)]
        options: Options,
    },
}

#[derive(Debug, Parser)]
#[command(name = "braidwork", version, about = "Braid actions on F(S¹) and the lower-central-series spectral sequence of S²")]
struct Cli {
    #[command(subcommand)]
    sub: Sub,
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub n_max: usize,
    pub dim_max: usize,
    pub t_max: usize,
    pub deg_max: usize,
    pub stem_max: usize,
    pub samples: usize,
    pub n: usize,
    pub k: usize,
    pub max_len: usize,
    pub ring: RingKind,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub assume_zero: bool,
    pub strict: bool,
    pub timing: bool,
}

#[derive(Debug)]
pub enum ParseOutcome {
    Run(RunConfig),
    /// Help or version text; exit code 0.
    Info(String),
    /// Usage error; exit code 2.
    Usage(String),
}

struct Defaults {
    n_max: usize,
    dim_max: usize,
    t_max: usize,
    deg_max: usize,
    stem_max: usize,
    samples: usize,
}

fn defaults(c: Command) -> Defaults {
    let base = Defaults { n_max: 6, dim_max: 5, t_max: 6, deg_max: 5, stem_max: 5, samples: 100 };
    match c {
        Command::VerifyBraid => Defaults { samples: 1000, ..base },
        Command::VerifyMagnus => Defaults { dim_max: 4, deg_max: 5, samples: 50, ..base },
        Command::VerifyDbar0 => Defaults { n_max: 4, deg_max: 6, ..base },
        Command::MooreCheck => Defaults { n_max: 3, deg_max: 5, ..base },
        Command::Lemma27 => Defaults { dim_max: 4, samples: 10, ..base },
        Command::FixedCheck => Defaults { dim_max: 4, samples: 5, ..base },
        Command::MooreBasis => Defaults { t_max: 6, n_max: 6, ..base },
        Command::E1 => Defaults { t_max: 6, n_max: 5, ..base },
        Command::D1Crosscheck => Defaults { t_max: 4, n_max: 4, ..base },
        Command::Differentials | Command::Pi => Defaults { t_max: 8, stem_max: 5, ..base },
        Command::Vanishing => Defaults { t_max: 7, n_max: 5, ..base },
        _ => base,
    }
}

impl RunConfig {
    pub fn from_options(command: Command, o: Options) -> RunConfig {
        let d = defaults(command);
        RunConfig {
            command,
            n_max: o.n_max.unwrap_or(d.n_max),
            dim_max: o.dim_max.unwrap_or(d.dim_max),
            t_max: o.t_max.unwrap_or(d.t_max),
            deg_max: o.deg_max.unwrap_or(d.deg_max),
            stem_max: o.stem_max.unwrap_or(d.stem_max),
            samples: o.samples.unwrap_or(d.samples),
            n: o.n.unwrap_or(1),
            k: o.k.unwrap_or(2),
            max_len: o.max_len.unwrap_or(6),
            ring: o.ring,
            seed: o.seed,
            jobs: o.jobs,
            out: o.out,
            format: o.format,
            assume_zero: o.assume_zero,
            strict: o.strict,
            timing: o.timing,
        }
    }

    /// Defaults for `command` with everything else unset.
    pub fn for_command(command: Command) -> RunConfig {
        let options = Options {
            n_max: None,
            dim_max: None,
            t_max: None,
            deg_max: None,
            stem_max: None,
            samples: None,
            n: None,
            k: None,
            max_len: None,
            ring: RingKind::Integers,
            seed: 0,
            jobs: 1,
            out: None,
            format: Format::Json,
            assume_zero: false,
            strict: false,
            timing: false,
        };
        RunConfig::from_options(command, options)
    }

    /// The parameters that determine the results. Jobs, output path, format
    /// and timing are left out so reports compare byte for byte.
    pub fn echo(&self) -> Value {
        json!({
            "n_max": self.n_max,
            "dim_max": self.dim_max,
            "t_max": self.t_max,
            "deg_max": self.deg_max,
            "stem_max": self.stem_max,
            "samples": self.samples,
            "n": self.n,
            "k": self.k,
            "max_len": self.max_len,
            "ring": self.ring.to_string(),
            "assume_zero": self.assume_zero,
        })
    }
}

pub fn parse_cli<I, S>(argv: I) -> ParseOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    ParseOutcome::Info(e.render().to_string())
                }
                _ => ParseOutcome::Usage(e.render().to_string()),
            };
        }
    };
    let (command, options) = match cli.sub {
        Sub::VerifySimplicial(o) => (Command::VerifySimplicial, o),
        Sub::VerifyBraid(o) => (Command::VerifyBraid, o),
        Sub::VerifyProp21(o) => (Command::VerifyProp21, o),
        Sub::VerifyMagnus(o) => (Command::VerifyMagnus, o),
        Sub::VerifyDbar0(o) => (Command::VerifyDbar0, o),
        Sub::MooreCheck(o) => (Command::MooreCheck, o),
        Sub::Lemma27(o) => (Command::Lemma27, o),
        Sub::Lemma210(o) => (Command::Lemma210, o),
        Sub::FixedCheck(o) => (Command::FixedCheck, o),
        Sub::MooreBasis(o) => (Command::MooreBasis, o),
        Sub::E1(o) => (Command::E1, o),
        Sub::D1Crosscheck(o) => (Command::D1Crosscheck, o),
        Sub::Differentials(o) => (Command::Differentials, o),
        Sub::Vanishing(o) => (Command::Vanishing, o),
        Sub::Pi(o) => (Command::Pi, o),
        Sub::ReportAll(o) => (Command::ReportAll, o),
        Sub::Verify { suite, options } => match format!("verify-{suite}").parse::<Command>() {
            Ok(c) => (c, options),
            Err(_) => return ParseOutcome::Usage(format!("error: unknown suite `{suite}` for `verify`\n")),
        },
    };
    ParseOutcome::Run(RunConfig::from_options(command, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> RunConfig {
        let mut argv = vec!["braidwork"];
        argv.extend_from_slice(args);
        match parse_cli(argv) {
            ParseOutcome::Run(c) => c,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verify_shorthand() {
        let c = run(&["verify", "braid", "--n-max", "6"]);
        assert_eq!(c.command, Command::VerifyBraid);
        assert_eq!(c.n_max, 6);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn e1_config() {
        let c = run(&["e1", "--t-max", "6", "--n-max", "5", "--ring", "z", "--out", "e1.json"]);
        assert_eq!((c.command, c.t_max, c.n_max, c.ring), (Command::E1, 6, 5, RingKind::Integers));
        assert_eq!(c.out, Some(PathBuf::from("e1.json")));
        assert_eq!(run(&["e1", "--ring", "zp:3"]).ring, RingKind::ModP(3));
    }

    #[test]
    fn usage_errors() {
        for bad in [
            vec!["braidwork", "e1", "--ring", "zp:1"],
            vec!["braidwork", "e1", "--bogus"],
            vec!["braidwork", "e1", "--t-max", "0"],
            vec!["braidwork", "verify", "nothing"],
            vec!["braidwork"],
        ] {
            assert!(matches!(parse_cli(bad.clone()), ParseOutcome::Usage(_)), "{bad:?}");
        }
        assert!(matches!(parse_cli(["braidwork", "--help"]), ParseOutcome::Info(_)));
    }
}
