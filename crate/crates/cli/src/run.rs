use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use braidwork_core::braid::{
    verify_braid_relations, verify_braided_identities, verify_cycle_characterization, verify_fixed_word_search,
    verify_inversion_witnesses, verify_pure_braid_fixed, verify_simplicial_identities,
};
use braidwork_core::check::Check;
use braidwork_core::curtis::{
    basis_independence_check, boundary_squares_vanish, connectivity_check, d1_crosscheck, e1_entry, e1_group,
    moore_rank, reference_orders, vanishing_report, Bidegree, MatchStatus, SpectralConfig, SpectralSequence,
    PRESENTATION_LIMIT,
};
use braidwork_core::exactla::AbelianGroup;
use braidwork_core::magnus::{nondegenerate_moore_check, verify_dbar0_decomposition, verify_magnus_representation};
use braidwork_core::{EuclideanRing, Fp, Integer, RingKind};
use rayon::prelude::*;

use crate::checkpoint::Checkpoints;
use crate::config::{Command, RunConfig};
use crate::report::{E1Row, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(String),
}

macro_rules! with_ring {
    ($ring:expr, $f:ident :: <R> ( $($arg:expr),* )) => {
        match $ring {
            RingKind::Integers => $f::<Integer>($($arg),*),
            RingKind::ModP(2) => $f::<Fp<2>>($($arg),*),
            RingKind::ModP(3) => $f::<Fp<3>>($($arg),*),
            RingKind::ModP(5) => $f::<Fp<5>>($($arg),*),
            RingKind::ModP(7) => $f::<Fp<7>>($($arg),*),
            RingKind::ModP(11) => $f::<Fp<11>>($($arg),*),
            RingKind::ModP(13) => $f::<Fp<13>>($($arg),*),
            RingKind::ModP(17) => $f::<Fp<17>>($($arg),*),
            RingKind::ModP(19) => $f::<Fp<19>>($($arg),*),
            RingKind::ModP(23) => $f::<Fp<23>>($($arg),*),
            RingKind::ModP(29) => $f::<Fp<29>>($($arg),*),
            RingKind::ModP(31) => $f::<Fp<31>>($($arg),*),
            RingKind::ModP(p) => return Err(CliError::Usage(format!("prime {p} is not supported"))),
        }
    };
}

/// Runs one command on a worker pool of `cfg.jobs` threads.
pub fn run_suite(cfg: &RunConfig) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let start = Instant::now();
    let mut report = pool.install(|| run_command(cfg))?;
    if cfg.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn capture(name: &str, r: braidwork_core::Result<Vec<Check>>) -> Vec<Check> {
    match r {
        Ok(c) => c,
        Err(e) => vec![Check::new(name, false, e.to_string())],
    }
}

fn integral_only(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.ring != RingKind::Integers {
        return Err(CliError::Usage(format!("{} runs over the integers only (use --ring z)", cfg.command)));
    }
    Ok(())
}

fn run_command(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(cfg);
    match cfg.command {
        Command::VerifySimplicial => {
            report.checks = capture("simplicial identities", verify_simplicial_identities(cfg.n_max));
        }
        Command::VerifyBraid => {
            report.checks = capture("braid relations", verify_braid_relations(cfg.n_max));
            report.checks.extend(verify_cycle_characterization(cfg.dim_max, cfg.samples, cfg.seed));
        }
        Command::VerifyProp21 => {
            report.checks = capture("braided identities", verify_braided_identities(cfg.n_max));
        }
        Command::VerifyMagnus => {
            report.checks = capture(
                "Magnus representation",
                verify_magnus_representation(cfg.dim_max, cfg.deg_max, cfg.samples, cfg.seed),
            );
        }
        Command::VerifyDbar0 => {
            fn dbar0<R: EuclideanRing>(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
                let mut out = Vec::new();
                for n in 1..=cfg.n_max {
                    out.extend(capture(
                        &format!("d̄0 decomposition n={n}"),
                        verify_dbar0_decomposition::<R>(n, cfg.deg_max, cfg.samples, cfg.seed),
                    ));
                }
                Ok(out)
            }
            report.checks = with_ring!(cfg.ring, dbar0::<R>(cfg))?;
        }
        Command::MooreCheck => {
            integral_only(cfg)?;
            for n in 1..=cfg.n_max {
                report.checks.extend(capture(
                    &format!("Moore kernel in dimension {}", n + 1),
                    nondegenerate_moore_check(n, cfg.deg_max),
                ));
            }
        }
        Command::Lemma27 => {
            report.checks =
                capture("inversion witnesses", verify_inversion_witnesses(cfg.dim_max, cfg.samples, cfg.seed));
        }
        Command::Lemma210 => {
            report.checks = capture("fixed word search", verify_fixed_word_search(cfg.n, cfg.k as u32, cfg.max_len));
        }
        Command::FixedCheck => {
            report.checks = capture("pure braid certificates", verify_pure_braid_fixed(cfg.dim_max, cfg.samples, cfg.seed));
        }
        Command::MooreBasis => {
            fn basis<R: EuclideanRing>(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
                let mut out = capture("d0∘d0", boundary_squares_vanish::<R>(cfg.t_max, cfg.n_max).map(|c| vec![c]));
                out.push(basis_size_check::<R>(cfg.t_max, cfg.n_max));
                Ok(out)
            }
            report.checks = with_ring!(cfg.ring, basis::<R>(cfg))?;
        }
        Command::E1 => {
            let bidegrees = grid(cfg.t_max, cfg.n_max);
            let (rows, failures) = with_ring!(cfg.ring, e1_rows::<R>(cfg, &bidegrees, true))?;
            report.checks = failures;
            let table: BTreeMap<Bidegree, AbelianGroup> = rows.iter().map(|r| (r.bidegree, r.group.clone())).collect();
            report.checks.push(connectivity_check(&table, cfg.ring));
            if cfg.ring == RingKind::Integers {
                let t = cfg.t_max.min(6);
                report.checks.extend(capture("basis independence", basis_independence_check(t, cfg.n_max).map(|c| vec![c])));
            }
            report.e1 = rows;
        }
        Command::D1Crosscheck => {
            integral_only(cfg)?;
            let pairs: Vec<(usize, usize)> =
                (1..=cfg.t_max).flat_map(|t| (1..=cfg.n_max.min(t)).map(move |n| (t, n))).collect();
            let results: Vec<Vec<Check>> = pairs
                .par_iter()
                .map(|&(t, n)| capture(&format!("d1 two-path agreement ({t},{n})"), d1_crosscheck(t, n)))
                .collect();
            report.checks = results.into_iter().flatten().collect();
        }
        Command::Differentials | Command::Pi => {
            integral_only(cfg)?;
            let sc = SpectralConfig { t_max: cfg.t_max, stem_max: cfg.stem_max, assume_zero: cfg.assume_zero, use_engine: true };
            let (rows, failures) = e1_rows::<Integer>(cfg, &sc.required_bidegrees(), true)?;
            report.checks = failures;
            if report.checks.is_empty() {
                let table: BTreeMap<Bidegree, AbelianGroup> = rows.iter().map(|r| (r.bidegree, r.group.clone())).collect();
                match SpectralSequence::compute(sc, table.clone()) {
                    Ok(ss) => {
                        report.checks.push(connectivity_check(&table, RingKind::Integers));
                        report.checks.extend(ss.page_checks());
                        if cfg.command == Command::Pi {
                            if let Err(e) = ss.require_determined() {
                                eprintln!("braidwork: {e}");
                                report.checks.push(Check::new("page advance", false, format!("refused: {e}")));
                            }
                            let stems = ss.assemble_stems(&reference_orders());
                            for s in &stems {
                                report.checks.push(stem_check(s));
                            }
                            report.stems = stems;
                        }
                        report.differentials = ss.differentials;
                    }
                    Err(e) => report.checks.push(Check::new("spectral sequence", false, e.to_string())),
                }
            }
            report.e1 = rows;
        }
        Command::Vanishing => {
            let bidegrees = grid(cfg.t_max, cfg.n_max);
            let mut differentials = Vec::new();
            let rows = if cfg.ring == RingKind::Integers {
                let sc = SpectralConfig { t_max: cfg.t_max, stem_max: cfg.n_max, assume_zero: cfg.assume_zero, use_engine: true };
                let (all, failures) = e1_rows::<Integer>(cfg, &sc.required_bidegrees(), false)?;
                report.checks.extend(failures);
                let table: BTreeMap<Bidegree, AbelianGroup> = all.iter().map(|r| (r.bidegree, r.group.clone())).collect();
                if report.checks.is_empty() {
                    match SpectralSequence::compute(sc, table) {
                        Ok(ss) => differentials = ss.differentials,
                        Err(e) => report.checks.push(Check::new("spectral sequence", false, e.to_string())),
                    }
                }
                all.into_iter().filter(|r| r.bidegree.n <= cfg.n_max).collect()
            } else {
                let (rows, failures) = with_ring!(cfg.ring, e1_rows::<R>(cfg, &bidegrees, false))?;
                report.checks.extend(failures);
                rows
            };
            let table: BTreeMap<Bidegree, AbelianGroup> = rows.iter().map(|r| (r.bidegree, r.group.clone())).collect();
            let v = vanishing_report(&table, cfg.ring, &differentials);
            report.checks.extend(v.checks);
            report.e1 = rows;
            report.differentials = differentials;
        }
        Command::ReportAll => {
            for c in Command::ALL {
                if c == Command::ReportAll {
                    continue;
                }
                let mut sub = RunConfig::for_command(c);
                sub.seed = cfg.seed;
                sub.jobs = cfg.jobs;
                sub.assume_zero = cfg.assume_zero;
                let r = run_command(&sub)?;
                report.checks.extend(r.checks.into_iter().map(|mut ch| {
                    ch.name = format!("[{c}] {}", ch.name);
                    ch
                }));
                if c == Command::Pi {
                    report.e1 = r.e1;
                    report.differentials = r.differentials;
                    report.stems = r.stems;
                }
            }
        }
    }
    Ok(report)
}

fn grid(t_max: usize, n_max: usize) -> Vec<Bidegree> {
    (1..=t_max).flat_map(|t| (1..=n_max).map(move |n| Bidegree::new(t, n))).collect()
}

fn stem_check(s: &braidwork_core::curtis::StemReport) -> Check {
    let name = format!("stem {} order", s.n);
    let reference = s.reference.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "none".into());
    let details = format!("total {}; reference {reference}", s.total);
    match s.matches {
        MatchStatus::Match => Check::new(name, true, details),
        MatchStatus::Mismatch => Check::new(name, false, details),
        MatchStatus::Consistent => Check::undetermined(name, format!("{details}; interval contains the reference")),
        MatchStatus::NoReference => Check::undetermined(name, details),
    }
}

type GroupMemo = Mutex<HashMap<(RingKind, Bidegree), AbelianGroup>>;

/// Entries already computed in this process.
fn memo() -> &'static GroupMemo {
    static MEMO: OnceLock<GroupMemo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

fn cached_group<R: EuclideanRing>(b: Bidegree, ckpt: Option<&Checkpoints>) -> braidwork_core::Result<AbelianGroup> {
    let key = (R::kind(), b);
    if let Some(g) = memo().lock().expect("memo").get(&key) {
        return Ok(g.clone());
    }
    let g = match ckpt.and_then(|c| c.load(R::kind(), b)) {
        Some(g) => g,
        None => {
            let g = e1_group::<R>(b.t, b.n)?;
            if let Some(c) = ckpt {
                c.store(R::kind(), b, &g);
            }
            g
        }
    };
    memo().lock().expect("memo").insert(key, g.clone());
    Ok(g)
}

fn presentable<R: EuclideanRing>(b: Bidegree) -> bool {
    (b.n.saturating_sub(1)..=b.n + 1)
        .filter(|&q| q >= 1)
        .all(|q| moore_rank::<R>(b.t, q).map_or(false, |r| r <= PRESENTATION_LIMIT))
}

/// E¹ entries in bidegree order, plus failed checks for entries that could
/// not be computed.
fn e1_rows<R: EuclideanRing>(
    cfg: &RunConfig,
    bidegrees: &[Bidegree],
    with_basis: bool,
) -> Result<(Vec<E1Row>, Vec<Check>), CliError> {
    let ckpt = Checkpoints::locate(cfg.out.as_deref());
    let results: Vec<(Bidegree, braidwork_core::Result<E1Row>)> = bidegrees
        .par_iter()
        .map(|&b| {
            let row = cached_group::<R>(b, ckpt.as_ref()).and_then(|group| {
                let mut basis = Vec::new();
                if with_basis && !group.is_trivial() && presentable::<R>(b) {
                    basis = e1_entry::<R>(b.t, b.n)?.generators.iter().map(|g| g.to_string()).collect();
                }
                Ok(E1Row { bidegree: b, group, basis })
            });
            (b, row)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (b, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(Check::new(format!("E1{b}"), false, e.to_string())),
        }
    }
    Ok((rows, failures))
}

fn mobius(n: u64) -> i128 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of Lyndon words of length `t` over `k` letters (necklace formula).
fn lyndon_count(k: u64, t: u64) -> i128 {
    let s: i128 = (1..=t).filter(|d| t % d == 0).map(|d| mobius(d) * (k as i128).pow((t / d) as u32)).sum();
    s / t as i128
}

fn binomial(n: u64, k: u64) -> i128 {
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

/// Lyndon words of length `t` using each of `q` letters (inclusion–exclusion).
pub fn surjective_lyndon_count(q: u64, t: u64) -> i128 {
    (0..=q).map(|i| if (q - i) % 2 == 0 { 1 } else { -1 } * binomial(q, i) * lyndon_count(i, t)).sum()
}

fn basis_size_check<R: EuclideanRing>(t_max: usize, q_max: usize) -> Check {
    let name = format!("non-degenerate basis sizes, t≤{t_max}, q≤{q_max}, ring {}", R::kind());
    let mut listing = Vec::new();
    let mut bad = Vec::new();
    for t in 1..=t_max {
        for q in 1..=q_max.min(t) {
            match moore_rank::<R>(t, q) {
                Ok(r) => {
                    listing.push(format!("N({t},{q})={r}"));
                    if R::kind() == RingKind::Integers && r as i128 != surjective_lyndon_count(q as u64, t as u64) {
                        bad.push(format!("({t},{q})"));
                    }
                }
                Err(e) => bad.push(format!("({t},{q}): {e}")),
            }
        }
    }
    if R::kind() != RingKind::Integers {
        return Check::undetermined(name, format!("no closed count with restricted powers; {}", listing.join(" ")));
    }
    Check::new(name, bad.is_empty(), if bad.is_empty() { listing.join(" ") } else { bad.join(", ") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use braidwork_core::check::Status;

    #[test]
    fn lyndon_counts() {
        assert_eq!(lyndon_count(2, 4), 3);
        assert_eq!(lyndon_count(3, 3), 8);
        assert_eq!(surjective_lyndon_count(2, 2), 1);
        assert_eq!(surjective_lyndon_count(3, 3), 2);
        assert_eq!(surjective_lyndon_count(1, 1), 1);
        assert_eq!(surjective_lyndon_count(1, 2), 0);
    }

    #[test]
    fn check_status_mapping() {
        let mut cfg = RunConfig::for_command(Command::E1);
        cfg.t_max = 4;
        cfg.n_max = 3;
        let r = run_suite(&cfg).unwrap();
        assert!(r.checks.iter().all(|c| c.status == Status::Pass), "{:?}", r.checks);
        assert_eq!(r.e1.len(), 12);
    }
}
