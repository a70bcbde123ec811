//! Erasure model and the repair engine: per-group local repair, adaptive
//! sliding-window global repair driven by the parity-check matrix, exact
//! read accounting, and tail-biting termination.

use std::collections::{BTreeMap, BTreeSet};

use crate::conv::ConvCode;
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::locality::LocalStructure;
use crate::mat::{Mat, SolveOutcome};
use crate::workload::Workload;

/// A stored stream over F extended with the erasure mark: None is the mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureStream {
    pub n: usize,
    pub blocks: Vec<Vec<Option<Fe>>>,
}

impl ErasureStream {
    pub fn from_blocks(blocks: &[Vec<Fe>]) -> Self {
        let n = blocks.first().map_or(0, |b| b.len());
        ErasureStream {
            n,
            blocks: blocks.iter().map(|b| b.iter().map(|&x| Some(x)).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn erased_positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (t, b) in self.blocks.iter().enumerate() {
            for (i, x) in b.iter().enumerate() {
                if x.is_none() {
                    out.push((t, i));
                }
            }
        }
        out
    }

    pub fn erasure_count(&self) -> usize {
        self.blocks.iter().map(|b| b.iter().filter(|x| x.is_none()).count()).sum()
    }

    pub fn block_fully_known(&self, t: usize) -> bool {
        self.blocks[t].iter().all(|x| x.is_some())
    }

    /// The underlying blocks when nothing is erased.
    pub fn to_blocks(&self) -> Option<Vec<Vec<Fe>>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|x| x.as_ref().copied()).collect::<Option<Vec<Fe>>>())
            .collect()
    }
}

/// Mark the listed (t, coord) positions as erased.
pub fn inject_erasures(blocks: &[Vec<Fe>], pattern: &[(usize, usize)]) -> Result<ErasureStream> {
    let mut s = ErasureStream::from_blocks(blocks);
    for &(t, coord) in pattern {
        if t >= s.len() || coord >= s.n {
            return Err(Error::ErasureOutOfRange { t, coord });
        }
        s.blocks[t][coord] = None;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    Local,
    Window,
    TailBiting,
}

/// One repair event with exact access accounting: `reads` is the set of
/// known positions whose symbols the solver actually consumed.
#[derive(Debug, Clone)]
pub struct RepairEvent {
    pub t: usize,
    pub mode: RepairMode,
    pub group: Option<usize>,
    pub j: Option<usize>,
    pub contacted_nodes: usize,
    pub downloaded_symbols: usize,
    pub window_symbols: usize,
    pub prefix_symbols: usize,
    pub solved_unknowns: usize,
    pub success: bool,
    pub reads: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct RepairReport {
    pub events: Vec<RepairEvent>,
    pub total_downloaded: usize,
    pub local_repairs: usize,
    pub window_repairs: usize,
    pub unrecovered: Vec<(usize, usize)>,
}

impl RepairReport {
    fn push(&mut self, e: RepairEvent) {
        if e.success {
            match e.mode {
                RepairMode::Local => self.local_repairs += 1,
                RepairMode::Window | RepairMode::TailBiting => self.window_repairs += 1,
            }
        }
        self.total_downloaded += e.downloaded_symbols;
        self.events.push(e);
    }

    pub fn fully_repaired(&self) -> bool {
        self.unrecovered.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallRule {
    /// Fail with a diagnosis naming the first stalled block.
    Error,
    /// Defer the stalled block and retry after later repairs, with a bounded
    /// number of passes; still-unrepaired erasures are reported.
    SkipForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitRule {
    /// Commit only the first window block before sliding (the recursion of
    /// the sliding-window theorem).
    FirstBlock,
    /// Commit every unknown of the window once the system is uniquely
    /// solvable for all of them.
    FullWindow,
}

#[derive(Debug, Clone, Copy)]
pub struct WindowPolicy {
    pub j_max: usize,
    pub local_first: bool,
    pub stall: StallRule,
    pub commit: CommitRule,
    pub max_passes: usize,
}

impl WindowPolicy {
    pub fn new(j_max: usize) -> Self {
        WindowPolicy {
            j_max,
            local_first: true,
            stall: StallRule::Error,
            commit: CommitRule::FirstBlock,
            max_passes: 4,
        }
    }
}

// ---- window system construction ---------------------------------------------

struct WindowSystem {
    /// Erased positions acting as unknowns, ascending (t, coord).
    unknowns: Vec<(usize, usize)>,
    mat: Mat,
    rhs: Vec<Fe>,
    reads: BTreeSet<(usize, usize)>,
}

/// Parity data hoisted out of the per-window loop: the coefficient matrices
/// of H and, per coefficient, which columns it actually references.
struct ParityCtx {
    hc: Vec<Mat>,
    rows_per_step: usize,
}

impl ParityCtx {
    fn new(code: &ConvCode) -> Result<ParityCtx> {
        let h = code.parity_check().ok_or(Error::Catastrophic)?;
        Ok(ParityCtx { hc: h.coefficients(), rows_per_step: h.rows() })
    }
}

/// Assemble the parity equations at times t..t+j (clipped at the stream end,
/// or wrapped mod T in cyclic mode). Known symbols with nonzero coefficients
/// move to the right-hand side and are recorded as reads; erased symbols in
/// the window become unknowns. Erased symbols outside the window (the known
/// prefix the theorem assumes) error unless `allow_outside_unknowns`.
fn build_window_system(
    code: &ConvCode,
    ctx: &ParityCtx,
    stream: &ErasureStream,
    t: usize,
    j: usize,
    cyclic: bool,
    allow_outside_unknowns: bool,
) -> Result<WindowSystem> {
    let f = code.field().clone();
    let hc = &ctx.hc;
    let rows_per_step = ctx.rows_per_step;
    let t_len = stream.len();
    let window: BTreeSet<usize> = if cyclic {
        (t..=t + j).map(|s| s % t_len).collect()
    } else {
        (t..=(t + j).min(t_len - 1)).collect()
    };
    let times: Vec<usize> = window.iter().copied().collect();
    // first pass: find the unknowns that the equations touch
    let mut unknown_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &s in &times {
        for (hh, hmat) in hc.iter().enumerate() {
            let u = if cyclic {
                (s + t_len - hh % t_len) % t_len
            } else {
                match s.checked_sub(hh) {
                    Some(u) => u,
                    None => continue,
                }
            };
            for i in 0..stream.n {
                if stream.blocks[u][i].is_some() {
                    continue;
                }
                let referenced = (0..rows_per_step).any(|r| !hmat.at(r, i).is_zero());
                if !referenced {
                    continue;
                }
                if window.contains(&u) || allow_outside_unknowns {
                    unknown_set.insert((u, i));
                } else {
                    return Err(Error::UnknownPrefix { t: u });
                }
            }
        }
    }
    let unknowns: Vec<(usize, usize)> = unknown_set.into_iter().collect();
    let index: BTreeMap<(usize, usize), usize> =
        unknowns.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let eq_count = times.len() * rows_per_step;
    let mut mat = Mat::zeros(f.clone(), eq_count, unknowns.len());
    let mut rhs = vec![Fe::ZERO; eq_count];
    let mut reads = BTreeSet::new();
    for (si, &s) in times.iter().enumerate() {
        for (hh, hmat) in hc.iter().enumerate() {
            let u = if cyclic {
                (s + t_len - hh % t_len) % t_len
            } else {
                match s.checked_sub(hh) {
                    Some(u) => u,
                    None => continue,
                }
            };
            for r in 0..rows_per_step {
                let eq = si * rows_per_step + r;
                for i in 0..stream.n {
                    let coef = hmat.at(r, i);
                    if coef.is_zero() {
                        continue;
                    }
                    match stream.blocks[u][i] {
                        Some(val) => {
                            rhs[eq] = f.sub(rhs[eq], f.mul(val, coef));
                            reads.insert((u, i));
                        }
                        None => {
                            let idx = index[&(u, i)];
                            mat.set(eq, idx, f.add(mat.at(eq, idx), coef));
                        }
                    }
                }
            }
        }
    }
    Ok(WindowSystem { unknowns, mat, rhs, reads })
}

/// True iff the parity equations over the window t..t+j determine every
/// erased symbol of the window uniquely (the restricted sliding parity
/// matrix has full column rank). Requires the prefix fully known.
pub fn window_correctable(
    code: &ConvCode,
    stream: &ErasureStream,
    t: usize,
    j: usize,
    wl: &Workload,
) -> Result<bool> {
    let ctx = ParityCtx::new(code)?;
    let sys = build_window_system(code, &ctx, stream, t, j, false, false)?;
    wl.charge((sys.mat.rows() * sys.mat.cols() * sys.mat.cols().max(1)) as u64)?;
    Ok(sys.mat.rank() == sys.unknowns.len())
}

/// True iff the window system determines the erased symbols of block t
/// itself uniquely (later window blocks may stay ambiguous). This is the
/// capability the sliding-window recursion needs: with at most d_j^c - 1
/// erasures in the window and a known prefix it always holds.
pub fn window_recovers_target(
    code: &ConvCode,
    stream: &ErasureStream,
    t: usize,
    j: usize,
    wl: &Workload,
) -> Result<bool> {
    let ctx = ParityCtx::new(code)?;
    let sys = build_window_system(code, &ctx, stream, t, j, false, false)?;
    wl.charge((sys.mat.rows() * sys.mat.cols() * sys.mat.cols().max(1)) as u64)?;
    let kernel = sys.mat.kernel();
    Ok(sys
        .unknowns
        .iter()
        .enumerate()
        .filter(|(_, &(u, _))| u == t)
        .all(|(i, _)| kernel.iter().all(|v| v[i].is_zero())))
}

fn solved_values(
    sys: &WindowSystem,
    particular: &[Fe],
    kernel: &[Vec<Fe>],
) -> Vec<((usize, usize), Option<Fe>)> {
    sys.unknowns
        .iter()
        .enumerate()
        .map(|(i, &pos)| {
            let unique = kernel.iter().all(|v| v[i].is_zero());
            (pos, unique.then(|| particular[i]))
        })
        .collect()
}

fn window_event(
    t: usize,
    j: usize,
    mode: RepairMode,
    sys: &WindowSystem,
    solved: usize,
    success: bool,
    window: &BTreeSet<usize>,
) -> RepairEvent {
    let reads: Vec<(usize, usize)> = sys.reads.iter().copied().collect();
    let window_symbols = reads.iter().filter(|(u, _)| window.contains(u)).count();
    RepairEvent {
        t,
        mode,
        group: None,
        j: Some(j),
        contacted_nodes: reads.len(),
        downloaded_symbols: reads.len(),
        window_symbols,
        prefix_symbols: reads.len() - window_symbols,
        solved_unknowns: solved,
        success,
        reads,
    }
}

/// One sliding-window repair step at block t with window parameter j.
/// Requires `window_correctable` (errors with the ambiguous system
/// otherwise); recovers v_t and opportunistically every unknown in the
/// window. Returns the updated stream and the event record.
pub fn sliding_window_repair(
    code: &ConvCode,
    stream: &ErasureStream,
    t: usize,
    j: usize,
    wl: &Workload,
) -> Result<(ErasureStream, RepairEvent)> {
    let ctx = ParityCtx::new(code)?;
    let sys = build_window_system(code, &ctx, stream, t, j, false, false)?;
    wl.charge((sys.mat.rows() * sys.mat.cols() * sys.mat.cols().max(1)) as u64)?;
    match sys.mat.solve(&sys.rhs)? {
        SolveOutcome::Inconsistent => Err(Error::InconsistentSystem),
        SolveOutcome::Solution { particular, kernel } => {
            if !kernel.is_empty() {
                return Err(Error::AmbiguousSystem);
            }
            let mut out = stream.clone();
            for ((u, i), val) in solved_values(&sys, &particular, &kernel) {
                out.blocks[u][i] = Some(val.expect("empty kernel means unique"));
            }
            let t_len = stream.len();
            let window: BTreeSet<usize> = (t..=(t + j).min(t_len - 1)).collect();
            let solved = sys.unknowns.len();
            Ok((out, window_event(t, j, RepairMode::Window, &sys, solved, true, &window)))
        }
    }
}

// ---- local repair ------------------------------------------------------------

/// Repair up to ∂-1 erasures inside group i of block t by erasure-decoding
/// the associated local block code, reading only symbols of that group at
/// that time index.
pub fn local_repair(
    code: &ConvCode,
    structure: &LocalStructure,
    stream: &ErasureStream,
    t: usize,
    group: usize,
    wl: &Workload,
) -> Result<(ErasureStream, RepairEvent)> {
    let gamma = &structure.groups[group];
    let erased: Vec<usize> = gamma.iter().copied().filter(|&c| stream.blocks[t][c].is_none()).collect();
    let max = structure.partial_distance - 1;
    if erased.len() > max {
        return Err(Error::TooManyErasuresInGroup { group, t, have: erased.len(), max });
    }
    let f = code.field().clone();
    let local_gen = code.associated_block_generator().select_cols(gamma);
    let known: Vec<usize> = (0..gamma.len()).filter(|li| !erased.contains(&gamma[*li])).collect();
    let erased_local: Vec<usize> =
        (0..gamma.len()).filter(|li| erased.contains(&gamma[*li])).collect();
    wl.charge((local_gen.rows() * local_gen.rows() * gamma.len()) as u64)?;
    // solve x * M_known = v_known for a message of the local code
    let m_known = local_gen.select_cols(&known);
    let rhs: Vec<Fe> = known.iter().map(|&li| stream.blocks[t][gamma[li]].unwrap()).collect();
    let outcome = m_known.transpose().solve(&rhs)?;
    let (particular, kernel) = match outcome {
        SolveOutcome::Inconsistent => return Err(Error::InconsistentSystem),
        SolveOutcome::Solution { particular, kernel } => (particular, kernel),
    };
    let m_erased = local_gen.select_cols(&erased_local);
    // the filled values must not depend on the residual message freedom
    for kv in &kernel {
        let shadow = m_erased.transpose().row_vec_mul(kv).ok();
        let dependent = match shadow {
            Some(v) => v.iter().any(|x| !x.is_zero()),
            None => {
                let mut dep = false;
                for (col, _) in erased_local.iter().enumerate() {
                    let mut acc = Fe::ZERO;
                    for (row, &kvi) in kv.iter().enumerate() {
                        acc = f.add(acc, f.mul(kvi, m_erased.at(row, col)));
                    }
                    if !acc.is_zero() {
                        dep = true;
                    }
                }
                dep
            }
        };
        if dependent {
            return Err(Error::AmbiguousSystem);
        }
    }
    let mut out = stream.clone();
    for (col, &li) in erased_local.iter().enumerate() {
        let mut acc = Fe::ZERO;
        for (row, &xr) in particular.iter().enumerate() {
            acc = f.add(acc, f.mul(xr, m_erased.at(row, col)));
        }
        out.blocks[t][gamma[li]] = Some(acc);
    }
    // reads: known group symbols whose generator column is nonzero
    let reads: Vec<(usize, usize)> = known
        .iter()
        .filter(|&&li| (0..local_gen.rows()).any(|r| !local_gen.at(r, li).is_zero()))
        .map(|&li| (t, gamma[li]))
        .collect();
    let event = RepairEvent {
        t,
        mode: RepairMode::Local,
        group: Some(group),
        j: None,
        contacted_nodes: reads.len(),
        downloaded_symbols: reads.len(),
        window_symbols: reads.len(),
        prefix_symbols: 0,
        solved_unknowns: erased.len(),
        success: true,
        reads,
    };
    Ok((out, event))
}

// ---- adaptive repair -----------------------------------------------------------

fn first_erased_block(stream: &ErasureStream, from: usize) -> Option<usize> {
    (from..stream.len()).find(|&t| !stream.block_fully_known(t))
}

/// Scan the stream in time order: local repairs first wherever a group has
/// at most ∂-1 erasures, then for the earliest remaining erased block select
/// the smallest window j <= j_max that is correctable and repair it. Commit
/// granularity and stall behavior follow the policy.
pub fn adaptive_repair(
    code: &ConvCode,
    structure: Option<&LocalStructure>,
    stream: &ErasureStream,
    policy: &WindowPolicy,
    wl: &Workload,
) -> Result<(ErasureStream, RepairReport)> {
    repair_driver(code, structure, stream, policy, wl, false)
}

fn repair_driver(
    code: &ConvCode,
    structure: Option<&LocalStructure>,
    stream: &ErasureStream,
    policy: &WindowPolicy,
    wl: &Workload,
    cyclic: bool,
) -> Result<(ErasureStream, RepairReport)> {
    if !code.is_non_catastrophic() {
        return Err(Error::Catastrophic);
    }
    let mode = if cyclic { RepairMode::TailBiting } else { RepairMode::Window };
    let ctx = ParityCtx::new(code)?;
    let mut cur = stream.clone();
    let mut report = RepairReport::default();
    let t_len = cur.len();
    for _pass in 0..policy.max_passes.max(1) {
        let mut progress = false;
        // local pass
        if policy.local_first {
            if let Some(s) = structure {
                for t in 0..t_len {
                    for g in 0..s.groups.len() {
                        let erased =
                            s.groups[g].iter().filter(|&&c| cur.blocks[t][c].is_none()).count();
                        if erased > 0 && erased <= s.partial_distance - 1 {
                            let (next, event) = local_repair(code, s, &cur, t, g, wl)?;
                            cur = next;
                            report.push(event);
                            progress = true;
                        }
                    }
                }
            }
        }
        // window pass
        let mut cursor = 0usize;
        while let Some(t) = first_erased_block(&cur, cursor) {
            let mut repaired = false;
            for j in 0..=policy.j_max {
                let sys = match build_window_system(
                    code,
                    &ctx,
                    &cur,
                    t,
                    j,
                    cyclic,
                    policy.stall == StallRule::SkipForward,
                ) {
                    Ok(sys) => sys,
                    Err(Error::UnknownPrefix { .. }) => break, // stalled until earlier repairs land
                    Err(e) => return Err(e),
                };
                wl.charge((sys.mat.rows() * sys.mat.cols() * sys.mat.cols().max(1)) as u64)?;
                let (particular, kernel) = match sys.mat.solve(&sys.rhs)? {
                    SolveOutcome::Inconsistent => return Err(Error::InconsistentSystem),
                    SolveOutcome::Solution { particular, kernel } => (particular, kernel),
                };
                let values = solved_values(&sys, &particular, &kernel);
                // selection: the target block must come out uniquely; later
                // window blocks may stay ambiguous and are picked up when the
                // window slides onto them
                let target_ok = values
                    .iter()
                    .filter(|((u, _), _)| *u == t)
                    .all(|(_, v)| v.is_some());
                if !target_ok {
                    continue;
                }
                let window: BTreeSet<usize> = if cyclic {
                    (t..=t + j).map(|s| s % t_len).collect()
                } else {
                    (t..=(t + j).min(t_len - 1)).collect()
                };
                let mut solved = 0usize;
                match policy.commit {
                    CommitRule::FirstBlock => {
                        for ((u, i), v) in &values {
                            if *u == t {
                                cur.blocks[*u][*i] = Some(v.expect("target block is determined"));
                                solved += 1;
                            }
                        }
                    }
                    CommitRule::FullWindow => {
                        // commit every uniquely determined unknown
                        for ((u, i), v) in &values {
                            if let Some(v) = v {
                                cur.blocks[*u][*i] = Some(*v);
                                solved += 1;
                            }
                        }
                    }
                }
                report.push(window_event(t, j, mode, &sys, solved, true, &window));
                repaired = true;
                progress = true;
                break;
            }
            if repaired {
                cursor = t; // re-examine: later blocks of the window may remain
            } else {
                match policy.stall {
                    StallRule::Error => {
                        return Err(Error::RepairStalled { t, j_max: policy.j_max })
                    }
                    StallRule::SkipForward => {
                        cursor = t + 1;
                    }
                }
            }
        }
        if cur.erasure_count() == 0 || !progress {
            break;
        }
    }
    report.unrecovered = cur.erased_positions();
    Ok((cur, report))
}

// ---- cost formulas --------------------------------------------------------------

/// Closed-form read counts for window repair on a systematic local-group
/// layout, plus the block-LRC baseline at comparison length lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRecord {
    /// k(j+1) + ceil(k(j+1)/r) - 1: remaining nodes in the repair window.
    pub window_read: usize,
    /// mu * (n - g(∂-1)): previous nodes, local parities skipped.
    pub prefix_read: usize,
    /// k(Λ+1) + ceil(k(Λ+1)/r) - 1 for the comparison length Λ.
    pub lrc_baseline_read: usize,
}

pub fn repair_cost_formulas(
    n: usize,
    k: usize,
    r: usize,
    pd: usize,
    mu: usize,
    j: usize,
    lambda: usize,
) -> Result<CostRecord> {
    if r == 0 || pd == 0 {
        return Err(Error::InvalidParameter("locality parameters must be positive".into()));
    }
    let size = r + pd - 1;
    if n % size != 0 {
        return Err(Error::InvalidParameter("n must be a multiple of r + ∂ - 1".into()));
    }
    let g = n / size;
    let kj = k * (j + 1);
    let kl = k * (lambda + 1);
    Ok(CostRecord {
        window_read: kj + kj.div_ceil(r) - 1,
        prefix_read: mu * (n - g * (pd - 1)),
        lrc_baseline_read: kl + kl.div_ceil(r) - 1,
    })
}

// ---- tail-biting ------------------------------------------------------------------

/// Tail-biting encoding over T > mu blocks: block row s contributes G_h to
/// block column (s + h) mod T.
pub fn tail_biting_encode(code: &ConvCode, msgs: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>> {
    let t_len = msgs.len();
    if t_len <= code.memory() {
        return Err(Error::StreamTooShort { t: t_len, mu: code.memory() });
    }
    let f = code.field().clone();
    let coeffs = code.generator().coefficients();
    for u in msgs {
        if u.len() != code.k() {
            return Err(Error::ShapeMismatch("message block length".into()));
        }
    }
    let mut out = vec![vec![Fe::ZERO; code.n()]; t_len];
    for (s, u) in msgs.iter().enumerate() {
        for (h, gh) in coeffs.iter().enumerate() {
            let col = (s + h) % t_len;
            for (row, &ur) in u.iter().enumerate() {
                if ur.is_zero() {
                    continue;
                }
                for c in 0..code.n() {
                    let a = gh.at(row, c);
                    if !a.is_zero() {
                        out[col][c] = f.add(out[col][c], f.mul(ur, a));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// All anchors t0 such that blocks t0..t0+mu-1 (mod T) are erasure-free.
pub fn clean_anchors(code: &ConvCode, stream: &ErasureStream) -> Vec<usize> {
    let t_len = stream.len();
    let mu = code.memory().max(1);
    (0..t_len)
        .filter(|&t0| (0..mu).all(|d| stream.block_fully_known((t0 + d) % t_len)))
        .collect()
}

/// Repair a tail-biting stream by unrolling at an erasure-free anchor run of
/// mu blocks and running the adaptive engine with wrapped parity equations.
/// The result is independent of which clean anchor is chosen.
pub fn tail_biting_repair(
    code: &ConvCode,
    structure: Option<&LocalStructure>,
    stream: &ErasureStream,
    anchor: usize,
    policy: &WindowPolicy,
    wl: &Workload,
) -> Result<(ErasureStream, RepairReport)> {
    let t_len = stream.len();
    if t_len <= code.memory() {
        return Err(Error::StreamTooShort { t: t_len, mu: code.memory() });
    }
    let mu = code.memory().max(1);
    if !(0..mu).all(|d| stream.block_fully_known((anchor + d) % t_len)) {
        return Err(Error::NoCleanAnchor { mu });
    }
    // unroll: w_s = v_{(anchor + s) mod T}
    let rotated = ErasureStream {
        n: stream.n,
        blocks: (0..t_len).map(|s| stream.blocks[(anchor + s) % t_len].clone()).collect(),
    };
    let (repaired, mut report) = repair_driver(code, structure, &rotated, policy, wl, true)?;
    // rotate back
    let mut blocks = vec![Vec::new(); t_len];
    for (s, b) in repaired.blocks.into_iter().enumerate() {
        blocks[(anchor + s) % t_len] = b;
    }
    for e in &mut report.events {
        e.t = (e.t + anchor) % t_len;
        for r in &mut e.reads {
            r.0 = (r.0 + anchor) % t_len;
        }
    }
    for u in &mut report.unrecovered {
        u.0 = (u.0 + anchor) % t_len;
    }
    report.unrecovered.sort_unstable();
    Ok((ErasureStream { n: stream.n, blocks }, report))
}
