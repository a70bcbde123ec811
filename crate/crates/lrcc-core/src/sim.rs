//! Monte-Carlo erasure simulation: batches of independent trials with
//! per-trial RNG streams, so results are byte-identical regardless of how
//! the batch is partitioned across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conv::ConvCode;
use crate::error::Result;
use crate::field::Fe;
use crate::locality::LocalStructure;
use crate::repair::{adaptive_repair, inject_erasures, StallRule, WindowPolicy};
use crate::workload::{map_ordered, Workload};

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub trials: usize,
    pub stream_len: usize,
    /// i.i.d. per-symbol erasure probability.
    pub erasure_rate: f64,
    pub seed: u64,
    pub j_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub erasure_rate: f64,
    pub erasures: usize,
    /// Fraction of erased symbols recovered; 1.0 for a clean trial.
    pub repaired_fraction: f64,
    pub fully_repaired: bool,
    pub local_repairs: usize,
    pub window_repairs: usize,
    pub symbols_read: usize,
}

/// Run the trial batch. Each trial draws its randomness from a dedicated
/// ChaCha stream keyed by the trial index.
pub fn simulate(
    code: &ConvCode,
    structure: Option<&LocalStructure>,
    cfg: &SimConfig,
    wl: &Workload,
) -> Result<Vec<TrialResult>> {
    let trials: Vec<usize> = (0..cfg.trials).collect();
    map_ordered(wl, &trials, |&trial| run_trial(code, structure, cfg, trial, wl))
}

fn run_trial(
    code: &ConvCode,
    structure: Option<&LocalStructure>,
    cfg: &SimConfig,
    trial: usize,
    wl: &Workload,
) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64 + 1);
    let card = code.field().cardinality() as u32;
    let msgs: Vec<Vec<Fe>> = (0..cfg.stream_len)
        .map(|_| (0..code.k()).map(|_| Fe(rng.gen_range(0..card))).collect())
        .collect();
    let blocks = code.encode_stream(&msgs)?;
    let mut pattern = Vec::new();
    for t in 0..cfg.stream_len {
        for i in 0..code.n() {
            if rng.gen_bool(cfg.erasure_rate) {
                pattern.push((t, i));
            }
        }
    }
    let stream = inject_erasures(&blocks, &pattern)?;
    let erasures = pattern.len();
    let mut policy = WindowPolicy::new(cfg.j_max);
    policy.stall = StallRule::SkipForward;
    let (_, report) = adaptive_repair(code, structure, &stream, &policy, wl)?;
    let unrecovered = report.unrecovered.len();
    let repaired_fraction = if erasures == 0 {
        1.0
    } else {
        (erasures - unrecovered) as f64 / erasures as f64
    };
    Ok(TrialResult {
        trial,
        erasure_rate: cfg.erasure_rate,
        erasures,
        repaired_fraction,
        fully_repaired: unrecovered == 0,
        local_repairs: report.local_repairs,
        window_repairs: report.window_repairs,
        symbols_read: report.total_downloaded,
    })
}
