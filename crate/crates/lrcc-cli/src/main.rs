//! Command-line surface: generate and verify codes, encode streams, inject
//! erasures, repair, Monte-Carlo simulate, and emit bound/profile tables.
//!
//! Exit codes: 0 success, 2 verification/repair/construction failure,
//! 3 work budget exceeded, 4 input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lrcc_core::codespec::{
    pattern_from_json, pattern_to_json, profile_to_csv, report_to_csv, report_to_json, sim_to_csv,
    write_blocks, write_symbol_stream, parse_message_stream, parse_symbol_stream, CodeSpecFile,
    ConstructionManifest, RealizedSpec, VerificationReport,
};
use lrcc_core::conv::{compute_profile, is_j_mds, SumRankLayout};
use lrcc_core::locality::{build_construction1, is_partial_j_mds, is_partial_mdp, restricted_l_parameter, verify_locality};
use lrcc_core::msrd::{build_outer, empirical_min_m, verify_msrd, BuildOptions, MsrdParams};
use lrcc_core::repair::{
    adaptive_repair, clean_anchors, inject_erasures, tail_biting_repair, CommitRule, StallRule,
    WindowPolicy,
};
use lrcc_core::sim::{simulate, SimConfig};
use lrcc_core::workload::{Workload, DEFAULT_BUDGET};
use lrcc_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "lrcc", about = "Locally repairable convolutional codes toolkit", version)]
struct Cli {
    /// Work budget for the search oracles (default: LRCC_BUDGET or built-in).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads for sweeps: 1 forces sequential execution.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a code spec from construction parameters.
    Gen(GenArgs),
    /// Column-distance profile with bound columns, as CSV.
    Profile(ProfileArgs),
    /// Encode a message stream into a symbol stream.
    Encode(IoArgs),
    /// Inject erasures into a symbol stream.
    Corrupt(CorruptArgs),
    /// Repair an erased symbol stream.
    Repair(RepairArgs),
    /// Monte-Carlo erasure simulation, one CSV row per trial.
    Simulate(SimArgs),
    /// Verify code predicates, with witnesses on failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of local groups.
    #[arg(long)]
    g: usize,
    /// Locality r.
    #[arg(long)]
    r: usize,
    /// Local distance.
    #[arg(long)]
    pd: usize,
    /// Code dimension k.
    #[arg(long)]
    k: usize,
    /// Code degree.
    #[arg(long)]
    delta: usize,
    /// Subfield size (a prime power).
    #[arg(long)]
    q: u64,
    /// Extension degree; defaults to the proven bound when feasible.
    #[arg(long)]
    m: Option<u32>,
    /// Sweep m upward from 1 and keep the smallest verified extension.
    #[arg(long)]
    empirical_m: bool,
    /// Upper end of the empirical sweep.
    #[arg(long, default_value_t = 16)]
    m_max: u32,
    /// Skip the L-MSRD verification pass (manifest records null).
    #[arg(long)]
    no_verify: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 2)]
    j_max: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Input message stream (k tokens per block).
    #[arg(long = "in")]
    input: PathBuf,
    /// Terminate cyclically (the first mu blocks fold in the last mu).
    #[arg(long)]
    tail_biting: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// JSON file with a list of [t, coord] pairs.
    #[arg(long, conflicts_with_all = ["rate", "seed"])]
    pattern: Option<PathBuf>,
    /// i.i.d. per-symbol erasure probability.
    #[arg(long, requires = "seed")]
    rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the generated pattern here (random mode).
    #[arg(long)]
    emit_pattern: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StallArg {
    Error,
    Skip,
}

#[derive(Clone, Copy, ValueEnum)]
enum CommitArg {
    First,
    Window,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    report_csv: Option<PathBuf>,
    #[arg(long)]
    j_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = StallArg::Error)]
    stall: StallArg,
    #[arg(long, value_enum, default_value_t = CommitArg::First)]
    commit: CommitArg,
    /// Treat the stream as tail-biting and unroll at a clean anchor.
    #[arg(long)]
    tail_biting: bool,
    /// Anchor block for tail-biting repair; the first clean run otherwise.
    #[arg(long)]
    anchor: Option<usize>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    stream_len: usize,
    #[arg(long)]
    j_max: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    NonCatastrophic,
    Locality,
    Mds,
    Msrd,
    PartialMds,
    PartialMdp,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    level: VerifyLevel,
    /// Window index for the j-indexed predicates; defaults to L.
    #[arg(long)]
    j: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = cli
        .budget
        .or_else(|| std::env::var("LRCC_BUDGET").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(DEFAULT_BUDGET);
    let mut wl = Workload::new(budget);
    if let Some(jobs) = cli.jobs {
        if jobs <= 1 {
            wl = wl.sequential();
        } else {
            let _ = rayon_pool(jobs);
        }
    }
    match run(cli.cmd, &wl) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            classify(&e)
        }
    }
}

fn rayon_pool(jobs: usize) -> anyhow::Result<()> {
    // lrcc-core re-exports nothing from rayon; configure via the env knob
    // rayon reads at pool construction.
    std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
    Ok(())
}

fn classify(e: &anyhow::Error) -> ExitCode {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        return match core {
            CoreError::BudgetExceeded { .. } => ExitCode::from(3),
            CoreError::Io(_) | CoreError::Json(_) | CoreError::Schema(_)
            | CoreError::InvalidParameter(_) | CoreError::ErasureOutOfRange { .. } => ExitCode::from(4),
            _ => ExitCode::from(2),
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return ExitCode::from(4);
    }
    ExitCode::from(2)
}

fn run(cmd: Cmd, wl: &Workload) -> anyhow::Result<ExitCode> {
    match cmd {
        Cmd::Gen(a) => cmd_gen(a, wl),
        Cmd::Profile(a) => cmd_profile(a, wl),
        Cmd::Encode(a) => cmd_encode(a),
        Cmd::Corrupt(a) => cmd_corrupt(a),
        Cmd::Repair(a) => cmd_repair(a, wl),
        Cmd::Simulate(a) => cmd_simulate(a, wl),
        Cmd::Verify(a) => cmd_verify(a, wl),
    }
}

fn load_spec(path: &Path) -> anyhow::Result<(CodeSpecFile, RealizedSpec)> {
    let text = fs::read_to_string(path)?;
    let spec = CodeSpecFile::from_json(&text)?;
    let realized = spec.realize()?;
    Ok((spec, realized))
}

fn write_out(path: &Path, content: &str) -> anyhow::Result<()> {
    fs::write(path, content)?;
    Ok(())
}

fn cmd_gen(a: GenArgs, wl: &Workload) -> anyhow::Result<ExitCode> {
    let n_outer = a.g * a.r;
    let m = match a.m {
        Some(m) => m,
        None => {
            if a.empirical_m {
                0 // filled by the sweep below
            } else {
                let corank = n_outer.checked_sub(a.k).filter(|&c| c > 0).ok_or_else(|| {
                    CoreError::InvalidParameter("need k < g*r".into())
                })?;
                let t_size = corank.max(a.k);
                let l = a.delta / a.k + a.delta / corank;
                let bound = lrcc_core::msrd::field_bound(a.q, t_size, l);
                u32::try_from(&bound).map_err(|_| {
                    CoreError::InvalidParameter(format!(
                        "the proven bound m >= {bound} is not desk-feasible; pass --m or --empirical-m"
                    ))
                })?
            }
        }
    };
    let layout = SumRankLayout::new(a.g, a.r);
    let outer = if a.empirical_m && a.m.is_none() {
        let found = empirical_min_m(n_outer, a.k, a.delta, a.q, layout, a.m_max, wl)?;
        let m = found.ok_or_else(|| {
            CoreError::InvalidParameter(format!("no m <= {} verified in the empirical sweep", a.m_max))
        })?;
        build_outer(
            MsrdParams { n: n_outer, k: a.k, delta: a.delta, q: a.q, m },
            &BuildOptions { override_field_bound: true, ..Default::default() },
        )?
    } else {
        let params = MsrdParams { n: n_outer, k: a.k, delta: a.delta, q: a.q, m };
        let opts = BuildOptions { override_field_bound: a.empirical_m, ..Default::default() };
        build_outer(params, &opts)?
    };
    let l = outer.params.l();
    let verified = if a.no_verify {
        None
    } else {
        match verify_msrd(&outer.code, layout, l, wl) {
            Ok(true) => Some(l),
            Ok(false) => {
                return Err(CoreError::InvalidParameter(format!(
                    "constructed outer code failed the L-MSRD check at L = {l}"
                ))
                .into())
            }
            Err(CoreError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    };
    let manifest = ConstructionManifest::of(&outer, verified);
    let lrcc = build_construction1(outer.code, a.r, a.pd, a.g)?;
    let spec = CodeSpecFile::from_lrcc(&lrcc, Some(manifest));
    write_out(&a.out, &spec.to_json())?;
    println!(
        "wrote {} ({}, {}) code with {} groups, r = {}, partial distance = {}",
        a.out.display(),
        lrcc.code.n(),
        lrcc.code.k(),
        a.g,
        a.r,
        a.pd
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(a: ProfileArgs, wl: &Workload) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let profile = compute_profile(&realized.code, a.j_max, wl)?;
    let structure = realized.lrcc.as_ref().map(|l| &l.structure);
    let csv = profile_to_csv(&profile, realized.code.n(), realized.code.k(), structure);
    match a.out {
        Some(p) => write_out(&p, &csv)?,
        None => print!("{csv}"),
    }
    let inexact = profile.entries.values().any(|e| !e.exact);
    if inexact {
        eprintln!("note: some rows are budget-limited lower bounds (exact = false)");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_encode(a: IoArgs) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let text = fs::read_to_string(&a.input)?;
    let msgs = parse_message_stream(&text, realized.code.k(), &realized.field)?;
    let blocks = if a.tail_biting {
        lrcc_core::repair::tail_biting_encode(&realized.code, &msgs)?
    } else {
        realized.code.encode_stream(&msgs)?
    };
    write_out(&a.out, &write_blocks(&blocks))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_corrupt(a: CorruptArgs) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let text = fs::read_to_string(&a.input)?;
    let stream = parse_symbol_stream(&text, realized.code.n(), &realized.field)?;
    let blocks = stream
        .to_blocks()
        .ok_or_else(|| CoreError::Schema("input stream already contains erasures".into()))?;
    let pattern: Vec<(usize, usize)> = match (&a.pattern, a.rate) {
        (Some(p), _) => pattern_from_json(&fs::read_to_string(p)?)?,
        (None, Some(rate)) => {
            use std::collections::hash_map::DefaultHasher;
            use std::hash::{Hash, Hasher};
            // simple deterministic per-position coin from the seed
            let seed = a.seed.unwrap();
            let mut out = Vec::new();
            for t in 0..blocks.len() {
                for i in 0..realized.code.n() {
                    let mut h = DefaultHasher::new();
                    (seed, t, i).hash(&mut h);
                    let x = (h.finish() >> 11) as f64 / (1u64 << 53) as f64;
                    if x < rate {
                        out.push((t, i));
                    }
                }
            }
            out
        }
        (None, None) => {
            return Err(CoreError::InvalidParameter("pass --pattern or --rate with --seed".into()).into())
        }
    };
    let corrupted = inject_erasures(&blocks, &pattern)?;
    if let Some(p) = a.emit_pattern {
        write_out(&p, &pattern_to_json(&pattern))?;
    }
    write_out(&a.out, &write_symbol_stream(&corrupted))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_repair(a: RepairArgs, wl: &Workload) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let code = realized.lrcc.as_ref().map(|l| &l.code).unwrap_or(&realized.code);
    let structure = realized.lrcc.as_ref().map(|l| &l.structure);
    let text = fs::read_to_string(&a.input)?;
    let stream = parse_symbol_stream(&text, code.n(), &realized.field)?;
    let default_j = realized
        .lrcc
        .as_ref()
        .map(restricted_l_parameter)
        .unwrap_or_else(|| code.l_parameter());
    let mut policy = WindowPolicy::new(a.j_max.unwrap_or(default_j));
    policy.stall = match a.stall {
        StallArg::Error => StallRule::Error,
        StallArg::Skip => StallRule::SkipForward,
    };
    policy.commit = match a.commit {
        CommitArg::First => CommitRule::FirstBlock,
        CommitArg::Window => CommitRule::FullWindow,
    };
    let (repaired, report) = if a.tail_biting {
        let anchor = match a.anchor {
            Some(t0) => t0,
            None => *clean_anchors(code, &stream)
                .first()
                .ok_or(CoreError::NoCleanAnchor { mu: code.memory().max(1) })?,
        };
        tail_biting_repair(code, structure, &stream, anchor, &policy, wl)?
    } else {
        adaptive_repair(code, structure, &stream, &policy, wl)?
    };
    write_out(&a.out, &write_symbol_stream(&repaired))?;
    if let Some(p) = &a.report {
        write_out(p, &report_to_json(&report))?;
    }
    if let Some(p) = &a.report_csv {
        write_out(p, &report_to_csv(&report))?;
    }
    if !report.fully_repaired() {
        eprintln!("unrecovered erasures remain: {:?}", report.unrecovered);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(a: SimArgs, wl: &Workload) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let code = realized.lrcc.as_ref().map(|l| &l.code).unwrap_or(&realized.code);
    let structure = realized.lrcc.as_ref().map(|l| &l.structure);
    let j_max = a.j_max.unwrap_or_else(|| {
        realized.lrcc.as_ref().map(restricted_l_parameter).unwrap_or_else(|| code.l_parameter())
    });
    let cfg = SimConfig {
        trials: a.trials,
        stream_len: a.stream_len,
        erasure_rate: a.rate,
        seed: a.seed,
        j_max,
    };
    let results = simulate(code, structure, &cfg, wl)?;
    let csv = sim_to_csv(&results);
    match a.out {
        Some(p) => write_out(&p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs, wl: &Workload) -> anyhow::Result<ExitCode> {
    let (_, realized) = load_spec(&a.spec)?;
    let code = realized.lrcc.as_ref().map(|l| &l.code).unwrap_or(&realized.code);
    let report = match a.level {
        VerifyLevel::NonCatastrophic => {
            if code.is_non_catastrophic() {
                VerificationReport::pass("non-catastrophic")
            } else {
                let factors: Vec<String> = code
                    .generator()
                    .smith()
                    .invariant_factors()
                    .iter()
                    .map(|p| {
                        p.coeffs().iter().map(|c| c.0.to_string()).collect::<Vec<_>>().join(",")
                    })
                    .collect();
                let mut rep = VerificationReport::fail("non-catastrophic", None);
                rep.witness = Some(lrcc_core::codespec::WitnessJson {
                    delta: vec![],
                    j: 0,
                    pattern: None,
                    reason: format!("invariant factors [{}]", factors.join(" | ")),
                });
                rep
            }
        }
        VerifyLevel::Locality => {
            let lrcc = realized
                .lrcc
                .as_ref()
                .ok_or_else(|| CoreError::InvalidParameter("spec has no local structure".into()))?;
            match verify_locality(&lrcc.code, &lrcc.structure, wl) {
                Ok(true) => VerificationReport::pass("locality"),
                Ok(false) => VerificationReport::fail("locality", None),
                Err(CoreError::BudgetExceeded { .. }) => VerificationReport::inconclusive("locality"),
                Err(e) => return Err(e.into()),
            }
        }
        VerifyLevel::Mds => {
            let j = a.j.unwrap_or_else(|| code.l_parameter());
            let name = format!("{j}-MDS");
            match is_j_mds(code, j, wl) {
                Ok(true) => VerificationReport::pass(&name),
                Ok(false) => VerificationReport::fail(&name, None),
                Err(CoreError::BudgetExceeded { .. }) => VerificationReport::inconclusive(&name),
                Err(e) => return Err(e.into()),
            }
        }
        VerifyLevel::Msrd => {
            let lrcc = realized
                .lrcc
                .as_ref()
                .ok_or_else(|| CoreError::InvalidParameter("spec has no local structure".into()))?;
            let outer = lrcc
                .outer
                .as_ref()
                .ok_or_else(|| CoreError::InvalidParameter("spec has no construction manifest".into()))?;
            let layout = SumRankLayout::new(lrcc.structure.g(), lrcc.structure.r);
            let j = a.j.unwrap_or_else(|| outer.l_parameter());
            let name = format!("{j}-MSRD");
            match verify_msrd(outer, layout, j, wl) {
                Ok(true) => VerificationReport::pass(&name),
                Ok(false) => VerificationReport::fail(&name, None),
                Err(CoreError::BudgetExceeded { .. }) => VerificationReport::inconclusive(&name),
                Err(e) => return Err(e.into()),
            }
        }
        VerifyLevel::PartialMds | VerifyLevel::PartialMdp => {
            let lrcc = realized
                .lrcc
                .as_ref()
                .ok_or_else(|| CoreError::InvalidParameter("spec has no local structure".into()))?;
            let (name, outcome) = match a.level {
                VerifyLevel::PartialMds => {
                    let j = a.j.unwrap_or_else(|| restricted_l_parameter(lrcc));
                    (format!("partial {j}-MDS"), is_partial_j_mds(lrcc, j, wl))
                }
                _ => ("partial MDP".to_string(), is_partial_mdp(lrcc, wl)),
            };
            match outcome {
                Ok(out) if out.holds => VerificationReport::pass(&name),
                Ok(out) => VerificationReport::fail(&name, out.witness.as_ref()),
                Err(CoreError::BudgetExceeded { .. }) => VerificationReport::inconclusive(&name),
                Err(e) => return Err(e.into()),
            }
        }
    };
    let json = report.to_json();
    match a.out {
        Some(p) => write_out(&p, &json)?,
        None => print!("{json}"),
    }
    match report.result.as_str() {
        "pass" => Ok(ExitCode::SUCCESS),
        "inconclusive" => Ok(ExitCode::from(3)),
        _ => Ok(ExitCode::from(2)),
    }
}
