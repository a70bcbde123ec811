//! Locality layer: local groups and their verification, the Singleton bound
//! with localities, the block-diagonal local-code construction, restriction
//! sweeps, and the partial j-MDS / partial MDP predicates.

use std::sync::Arc;

use crate::conv::{column_distance_rank, ConvCode};
use crate::error::{Error, Result};
use crate::field::{ExtField, QMat};
use crate::mat::Mat;
use crate::polymat::PolyMatrix;
use crate::workload::{find_first_map, Workload};

/// Local repair structure: coordinate groups over [n] plus the uniform
/// locality r and local distance ∂ (`partial_distance`). Per-group unequal
/// localities are reserved but unsupported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStructure {
    pub groups: Vec<Vec<usize>>,
    pub r: usize,
    pub partial_distance: usize,
    pub per_group: Option<Vec<(usize, usize)>>,
}

impl LocalStructure {
    pub fn new(groups: Vec<Vec<usize>>, r: usize, partial_distance: usize) -> Self {
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        LocalStructure { groups, r, partial_distance, per_group: None }
    }

    /// g(∂-1) consecutive groups of size r+∂-1 covering [n].
    pub fn consecutive(g: usize, r: usize, partial_distance: usize) -> Self {
        let size = r + partial_distance - 1;
        let groups = (0..g).map(|i| (i * size..(i + 1) * size).collect()).collect();
        Self::new(groups, r, partial_distance)
    }

    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.per_group.is_some() {
            return Err(Error::UnequalLocalities);
        }
        if self.r == 0 || self.partial_distance == 0 || self.groups.is_empty() {
            return Err(Error::InvalidParameter("locality parameters must be positive".into()));
        }
        let cap = self.r + self.partial_distance - 1;
        let mut covered = vec![false; n];
        for g in &self.groups {
            if g.is_empty() || g.len() > cap {
                return Err(Error::InvalidParameter(format!(
                    "group size must be in 1..={cap}"
                )));
            }
            for &c in g {
                if c >= n {
                    return Err(Error::BadCoordinateSet);
                }
                covered[c] = true;
            }
        }
        if covered.iter().any(|&c| !c) {
            return Err(Error::InvalidParameter("groups must cover all coordinates".into()));
        }
        Ok(())
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.groups {
            for &c in g {
                if !seen.insert(c) {
                    return false;
                }
            }
        }
        true
    }

    pub fn full_size(&self) -> bool {
        let size = self.r + self.partial_distance - 1;
        self.groups.iter().all(|g| g.len() == size)
    }
}

/// A convolutional code with an attached local structure; `local_gen` holds
/// the GF(q) local MDS generator when built by the block-diagonal
/// construction, and `outer` the outer code it came from.
#[derive(Debug, Clone)]
pub struct LrccCode {
    pub code: ConvCode,
    pub structure: LocalStructure,
    pub local_gen: Option<QMat>,
    pub outer: Option<ConvCode>,
}

/// Exact minimum Hamming distance of the row space of a constant matrix by
/// support search; None for the zero code.
pub fn block_min_distance(m: &Mat, wl: &Workload) -> Result<Option<u64>> {
    let full_rank = m.rank();
    if full_rank == 0 {
        return Ok(None);
    }
    let cols = m.cols();
    for e in 1..=cols {
        let combos: Vec<Vec<usize>> = combinations(cols, e);
        wl.charge((combos.len() * 2 * m.rows() * m.rows() * cols) as u64)?;
        for s in &combos {
            let complement: Vec<usize> = (0..cols).filter(|c| !s.contains(c)).collect();
            if m.select_cols(&complement).rank() < full_rank {
                return Ok(Some(e as u64));
            }
        }
    }
    Ok(Some(cols as u64))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// True iff every group satisfies the size cap and the associated block code
/// of the restricted convolutional code has minimum distance >= ∂.
pub fn verify_locality(code: &ConvCode, s: &LocalStructure, wl: &Workload) -> Result<bool> {
    s.validate(code.n())?;
    let cap = s.r + s.partial_distance - 1;
    let block = code.associated_block_generator();
    for g in &s.groups {
        if g.len() > cap {
            return Ok(false);
        }
        let restricted = block.select_cols(g);
        match block_min_distance(&restricted, wl)? {
            None => {} // zero restriction: nothing to repair, vacuously fine
            Some(d) => {
                if d < s.partial_distance as u64 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// The j = 0 Singleton bound with localities:
/// (n-k) - (ceil(k/r) - 1)(∂-1) + 1.
pub fn lrcc_bound_j0(n: usize, k: usize, r: usize, pd: usize) -> i64 {
    assert!(r >= 1 && pd >= 1, "locality parameters must be positive");
    (n - k) as i64 - (ceil_div(k, r) as i64 - 1) * (pd as i64 - 1) + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Exact quotient k(j+1)/r; requires r | k(j+1).
    Exact,
    /// Ceiling rounding of k(j+1)/r, the usual reporting convention when r
    /// does not divide k(j+1); the distance oracle stays the ground truth.
    Ceiling,
}

/// The windowed Singleton bound with localities:
/// (n-k)(j+1) - (k(j+1)/r - 1)(∂-1) + 1.
pub fn lrcc_bound(n: usize, k: usize, r: usize, pd: usize, j: usize, mode: BoundMode) -> Result<i64> {
    if r == 0 || pd == 0 {
        return Err(Error::InvalidParameter("locality parameters must be positive".into()));
    }
    let kj = k * (j + 1);
    let ell = match mode {
        BoundMode::Exact => {
            if kj % r != 0 {
                return Err(Error::InvalidParameter(format!(
                    "exact mode requires r | k(j+1); r = {r}, k(j+1) = {kj}"
                )));
            }
            kj / r
        }
        BoundMode::Ceiling => ceil_div(kj, r),
    };
    Ok(((n - k) * (j + 1)) as i64 - (ell as i64 - 1) * (pd as i64 - 1) + 1)
}

/// Systematic generator [I_r | P] of an (r+∂-1, r) MDS block code over GF(q),
/// deterministic in (r, ∂, q). Every r x r minor is verified nonsingular.
pub fn mds_local_generator(f: &ExtField, r: usize, pd: usize) -> Result<QMat> {
    let len = r + pd - 1;
    if (f.q() as u64) < len as u64 {
        return Err(Error::FieldTooSmall { q: f.q() as u64, needed: len as u64 });
    }
    let a = if pd == 1 {
        QMat::identity(r)
    } else if pd == 2 {
        // single parity: the all-ones column
        let mut m = QMat::zeros(r, len);
        for i in 0..r {
            m.set(i, i, 1);
            m.set(i, len - 1, 1);
        }
        m
    } else {
        // systematic Reed-Solomon on the first r+∂-1 field codes as points
        let mut v = QMat::zeros(r, len);
        for i in 0..r {
            for j in 0..len {
                // point_j^i in GF(q)
                let mut p = 1u16;
                for _ in 0..i {
                    p = f.q_mul(p, j as u16);
                }
                v.set(i, j, p);
            }
        }
        let first = v.select_cols(&(0..r).collect::<Vec<_>>());
        let inv = f.q_mat_inverse(&first).expect("Vandermonde block is invertible");
        f.q_mat_mul(&inv, &v)
    };
    // exhaustive minor check
    for sel in combinations(len, r) {
        if f.q_rank(&a.select_cols(&sel)) != r {
            return Err(Error::InvalidParameter("local generator failed the MDS minor check".into()));
        }
    }
    Ok(a)
}

/// Parity-check matrix of the systematic local code [I_r | P]: [-P^T | I].
fn local_parity(f: &ExtField, a: &QMat) -> QMat {
    let r = a.rows;
    let len = a.cols;
    let pd1 = len - r;
    let mut h = QMat::zeros(pd1, len);
    for i in 0..pd1 {
        for j in 0..r {
            h.set(i, j, f.q_neg(a.at(j, r + i)));
        }
        h.set(i, r + i, 1);
    }
    h
}

/// Block-diagonal local-code construction: the global code is the outer code
/// multiplied by diag_g(A) for a local MDS generator A over GF(q). Preserves
/// reduced/basic status, degree and memory. The attached parity check stacks
/// the degree-0 local parity rows over the outer parity check embedded at
/// the systematic coordinates.
pub fn build_construction1(outer: ConvCode, r: usize, pd: usize, g: usize) -> Result<LrccCode> {
    let f = outer.field().clone();
    let n_out = outer.n();
    if n_out != g * r {
        return Err(Error::BadOuterLength { n: n_out, gr: g * r });
    }
    let a = mds_local_generator(&f, r, pd)?;
    let size = r + pd - 1;
    let n = g * size;
    // diag_g(A) as an N x n constant matrix over the big field
    let mut diag = Mat::zeros(f.clone(), n_out, n);
    for gi in 0..g {
        for i in 0..r {
            for j in 0..size {
                diag.set(gi * r + i, gi * size + j, f.embed_subfield(a.at(i, j)));
            }
        }
    }
    let gen_glob = outer.generator().mul_const(&diag)?;
    let mut code = ConvCode::from_generator(gen_glob)?;
    debug_assert_eq!(code.degree(), outer.degree());
    debug_assert_eq!(code.memory(), outer.memory());
    if let Some(h_out) = outer.parity_check() {
        let h = structured_parity(&f, h_out, &a, g, r, pd)?;
        code = code.with_parity_check(h)?;
    }
    let structure = LocalStructure::consecutive(g, r, pd);
    Ok(LrccCode { code, structure, local_gen: Some(a), outer: Some(outer) })
}

/// Parity check of the constructed global code: one degree-0 local parity
/// row block per group stacked over the outer parity check embedded at the
/// systematic (first r per group) coordinates.
pub fn structured_parity(
    f: &Arc<ExtField>,
    h_out: &PolyMatrix,
    a: &QMat,
    g: usize,
    r: usize,
    pd: usize,
) -> Result<PolyMatrix> {
    let size = r + pd - 1;
    let n = g * size;
    let n_out = g * r;
    if h_out.cols() != n_out || a.rows != r || a.cols != size {
        return Err(Error::ShapeMismatch("structured parity inputs".into()));
    }
    let mut rows: Vec<PolyMatrix> = Vec::new();
    if pd > 1 {
        let hp = local_parity(f, a);
        let mut local_rows = PolyMatrix::zeros(f.clone(), g * (pd - 1), n);
        for gi in 0..g {
            for i in 0..pd - 1 {
                for j in 0..size {
                    let c = hp.at(i, j);
                    if c != 0 {
                        local_rows.set(
                            gi * (pd - 1) + i,
                            gi * size + j,
                            crate::poly::Poly::constant(f.embed_subfield(c)),
                        );
                    }
                }
            }
        }
        rows.push(local_rows);
    }
    let mut outer_rows = PolyMatrix::zeros(f.clone(), h_out.rows(), n);
    for row in 0..h_out.rows() {
        for c in 0..n_out {
            let (gi, off) = (c / r, c % r);
            outer_rows.set(row, gi * size + off, h_out.at(row, c).clone());
        }
    }
    rows.push(outer_rows);
    let mut h = rows[0].clone();
    for extra in &rows[1..] {
        h = h.vstack(extra)?;
    }
    Ok(h)
}

/// The greedy information-set search over local groups: grows a set of group
/// indices I and a coordinate set A until the restriction reaches dimension
/// k. Groups are visited in ascending index order; when a full group would
/// overshoot, the largest prefix of it keeping the dimension below k is
/// recorded and the search stops.
pub fn information_local_groups(c0_gen: &Mat, s: &LocalStructure) -> (Vec<usize>, Vec<usize>) {
    let k = c0_gen.rank();
    let dim = |coords: &[usize]| -> usize {
        if coords.is_empty() {
            0
        } else {
            c0_gen.select_cols(coords).rank()
        }
    };
    let mut chosen: Vec<usize> = Vec::new();
    let mut coords: Vec<usize> = Vec::new();
    while dim(&coords) < k {
        let next = (0..s.groups.len()).find(|i| !chosen.contains(i));
        let i = match next {
            Some(i) => i,
            None => break,
        };
        let mut with_full = coords.clone();
        with_full.extend(s.groups[i].iter().copied());
        with_full.sort_unstable();
        with_full.dedup();
        if dim(&with_full) < k {
            chosen.push(i);
            coords = with_full;
        } else {
            // grow a partial subset of the group while staying below k
            let mut partial = coords.clone();
            for &c in &s.groups[i] {
                let mut trial = partial.clone();
                trial.push(c);
                trial.sort_unstable();
                trial.dedup();
                if dim(&trial) < k {
                    partial = trial;
                }
            }
            chosen.push(i);
            coords = partial;
            break;
        }
    }
    (chosen, coords)
}

/// Restriction of the code to a per-group selection Δ_i ⊆ Γ_i with
/// |Γ_i \ Δ_i| <= ∂-1; the result is a full-rank (N, k) convolutional code,
/// re-reduced with its parity check re-derived.
pub fn restrict_code(code: &ConvCode, s: &LocalStructure, delta: &[Vec<usize>]) -> Result<ConvCode> {
    if delta.len() != s.groups.len() {
        return Err(Error::ShapeMismatch("one selection per group".into()));
    }
    let mut kept: Vec<usize> = Vec::new();
    for (i, (sel, grp)) in delta.iter().zip(&s.groups).enumerate() {
        let removed = grp.len() - sel.len();
        if removed > s.partial_distance - 1 || sel.iter().any(|c| !grp.contains(c)) {
            return Err(Error::BadSelection {
                group: i,
                removed,
                max: s.partial_distance - 1,
            });
        }
        kept.extend(sel.iter().copied());
    }
    kept.sort_unstable();
    kept.dedup();
    let restricted = code.generator().restrict_columns(&kept)?;
    ConvCode::from_generator(restricted)
}

/// All maximal-puncturing choices: for each group, every way of removing
/// exactly ∂-1 coordinates, in lexicographic order.
pub fn maximal_puncturings(s: &LocalStructure) -> Vec<Vec<Vec<usize>>> {
    let pd1 = s.partial_distance - 1;
    let per_group: Vec<Vec<Vec<usize>>> = s
        .groups
        .iter()
        .map(|g| {
            combinations(g.len(), pd1)
                .into_iter()
                .map(|remove| {
                    g.iter()
                        .enumerate()
                        .filter(|(idx, _)| !remove.contains(idx))
                        .map(|(_, &c)| c)
                        .collect::<Vec<usize>>()
                })
                .collect()
        })
        .collect();
    // cartesian product, lexicographic
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for group_choices in per_group {
        let mut next = Vec::with_capacity(out.len() * group_choices.len());
        for partial in &out {
            for choice in &group_choices {
                let mut p = partial.clone();
                p.push(choice.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialWitness {
    /// The kept coordinates per group of the failing restriction.
    pub delta: Vec<Vec<usize>>,
    pub j: usize,
    /// A support pattern witnessing the distance shortfall, when available.
    pub pattern: Option<Vec<usize>>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialOutcome {
    pub holds: bool,
    pub witness: Option<PartialWitness>,
}

/// Partial j-MDS: every maximal local puncturing leaves a non-catastrophic
/// j-MDS code. The Δ sweep is exhaustive, deterministic, and parallel.
pub fn is_partial_j_mds(lrcc: &LrccCode, j: usize, wl: &Workload) -> Result<PartialOutcome> {
    let s = &lrcc.structure;
    s.validate(lrcc.code.n())?;
    if !s.pairwise_disjoint() {
        return Err(Error::InvalidParameter(
            "partial j-MDS requires pairwise disjoint local groups".into(),
        ));
    }
    let choices = maximal_puncturings(s);
    let witness = find_first_map(wl, &choices, |delta| {
        let restricted = match restrict_code(&lrcc.code, s, delta) {
            Ok(c) => c,
            Err(e) => {
                return Ok(Some(PartialWitness {
                    delta: delta.clone(),
                    j,
                    pattern: None,
                    reason: format!("restriction failed: {e}"),
                }))
            }
        };
        if !restricted.is_non_catastrophic() {
            return Ok(Some(PartialWitness {
                delta: delta.clone(),
                j,
                pattern: None,
                reason: "restricted code is catastrophic".into(),
            }));
        }
        let nn = restricted.n();
        let kk = restricted.k();
        let bound = ((nn - kk) * (j + 1) + 1) as u64;
        let finding = column_distance_rank(&restricted, j, wl)?;
        if !finding.exact {
            return Err(Error::BudgetExceeded { limit: wl.limit() });
        }
        if finding.value != bound {
            return Ok(Some(PartialWitness {
                delta: delta.clone(),
                j,
                pattern: finding.witness,
                reason: format!("restricted d_{j}^c = {} < {bound}", finding.value),
            }));
        }
        Ok(None)
    })?;
    Ok(PartialOutcome { holds: witness.is_none(), witness })
}

/// The L parameter of the locality layer: N = n - g(∂-1).
pub fn restricted_l_parameter(lrcc: &LrccCode) -> usize {
    let s = &lrcc.structure;
    let n = lrcc.code.n();
    let big_n = n - s.g() * (s.partial_distance - 1);
    let delta = lrcc.code.degree();
    crate::conv::l_parameter(delta, lrcc.code.k(), big_n - lrcc.code.k())
}

/// Partial MDP: partial L-MDS at L = floor(δ/k) + floor(δ/(N-k)) with
/// N = n - g(∂-1).
pub fn is_partial_mdp(lrcc: &LrccCode, wl: &Workload) -> Result<PartialOutcome> {
    is_partial_j_mds(lrcc, restricted_l_parameter(lrcc), wl)
}

/// True iff d_j^c of the global code attains the locality Singleton bound
/// (exact mode when r | k(j+1), ceiling mode otherwise).
pub fn attainment_check(lrcc: &LrccCode, j: usize, wl: &Workload) -> Result<bool> {
    let c = &lrcc.code;
    let s = &lrcc.structure;
    let mode = if (c.k() * (j + 1)) % s.r == 0 { BoundMode::Exact } else { BoundMode::Ceiling };
    let bound = lrcc_bound(c.n(), c.k(), s.r, s.partial_distance, j, mode)?;
    let finding = column_distance_rank(c, j, wl)?;
    if !finding.exact {
        return Err(Error::BudgetExceeded { limit: wl.limit() });
    }
    Ok(finding.value as i64 == bound)
}
