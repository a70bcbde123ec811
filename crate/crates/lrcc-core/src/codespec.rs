//! File formats: the JSON code-spec (field descriptor, generator, local
//! structure, construction manifest), symbol-stream text files, erasure
//! pattern lists, and the CSV/JSON report emitters.
//!
//! Every format is deterministic: serializing a value parsed from one of our
//! own files reproduces it byte for byte. Field elements appear as their
//! little-endian base-p integer encodings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conv::{ConvCode, DistanceMethod, DistanceProfile};
use crate::error::{Error, Result};
use crate::field::{ExtField, Fe, QMat};
use crate::locality::{lrcc_bound, structured_parity, BoundMode, LocalStructure, LrccCode, PartialWitness};
use crate::msrd::{code_from_parity, MsrdOuter, MsrdParams};
use crate::poly::Poly;
use crate::polymat::PolyMatrix;
use crate::repair::{ErasureStream, RepairEvent, RepairMode, RepairReport};
use crate::sim::TrialResult;

pub const SCHEMA_VERSION: u32 = 1;

// ---- field descriptor -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub p: u64,
    pub a: u32,
    pub m: u32,
    /// Monic irreducible of degree a over GF(p), digit per coefficient.
    pub f_sub: Vec<u64>,
    /// Monic irreducible of degree m over GF(q), digits per coefficient.
    pub f_ext: Vec<Vec<u64>>,
}

fn q_code_digits(code: u16, p: u64, a: u32) -> Vec<u64> {
    let mut c = code as u64;
    let mut out = Vec::with_capacity(a as usize);
    for _ in 0..a {
        out.push(c % p);
        c /= p;
    }
    out
}

fn q_code_from_digits(digits: &[u64], p: u64, a: u32) -> Result<u16> {
    if digits.len() != a as usize || digits.iter().any(|&d| d >= p) {
        return Err(Error::Schema("bad GF(q) digit vector".into()));
    }
    let mut c = 0u64;
    for &d in digits.iter().rev() {
        c = c * p + d;
    }
    Ok(c as u16)
}

impl FieldDescriptor {
    pub fn of(f: &ExtField) -> Self {
        FieldDescriptor {
            p: f.p(),
            a: f.a(),
            m: f.m(),
            f_sub: f.f_sub().to_vec(),
            f_ext: f.f_ext().iter().map(|&c| q_code_digits(c, f.p(), f.a())).collect(),
        }
    }

    pub fn realize(&self) -> Result<Arc<ExtField>> {
        let f_ext: Result<Vec<u16>> =
            self.f_ext.iter().map(|d| q_code_from_digits(d, self.p, self.a)).collect();
        ExtField::from_moduli(self.p, self.a, self.m, self.f_sub.clone(), f_ext?)
    }
}

// ---- polynomial matrices ------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PolyMatrixSchema {
    pub rows: usize,
    pub cols: usize,
    /// entries[r][c] = coefficient element integers, lowest degree first.
    pub entries: Vec<Vec<Vec<u64>>>,
}

impl PolyMatrixSchema {
    pub fn of(m: &PolyMatrix) -> Self {
        PolyMatrixSchema {
            rows: m.rows(),
            cols: m.cols(),
            entries: (0..m.rows())
                .map(|r| {
                    (0..m.cols())
                        .map(|c| m.at(r, c).coeffs().iter().map(|x| x.0 as u64).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn realize(&self, f: &Arc<ExtField>) -> Result<PolyMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Schema("generator entry grid shape mismatch".into()));
        }
        let mut out = PolyMatrix::zeros(f.clone(), self.rows, self.cols);
        for (r, row) in self.entries.iter().enumerate() {
            for (c, coeffs) in row.iter().enumerate() {
                let fes: Result<Vec<Fe>> = coeffs
                    .iter()
                    .map(|&x| {
                        if (x as u128) < f.cardinality() {
                            Ok(Fe(x as u32))
                        } else {
                            Err(Error::Schema(format!("element {x} out of field range")))
                        }
                    })
                    .collect();
                out.set(r, c, Poly::from_coeffs(fes?));
            }
        }
        Ok(out)
    }
}

// ---- local structure & construction manifest -----------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LocalStructureSchema {
    pub groups: Vec<Vec<usize>>,
    pub r: usize,
    pub partial_distance: usize,
    /// Rows of the GF(q) local MDS generator, entries as GF(q) codes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_gen: Option<Vec<Vec<u16>>>,
}

impl LocalStructureSchema {
    pub fn of(s: &LocalStructure, local_gen: Option<&QMat>) -> Self {
        LocalStructureSchema {
            groups: s.groups.clone(),
            r: s.r,
            partial_distance: s.partial_distance,
            local_gen: local_gen.map(|a| {
                (0..a.rows).map(|i| (0..a.cols).map(|j| a.at(i, j)).collect()).collect()
            }),
        }
    }

    pub fn structure(&self) -> LocalStructure {
        LocalStructure::new(self.groups.clone(), self.r, self.partial_distance)
    }

    pub fn local_qmat(&self) -> Option<QMat> {
        self.local_gen.as_ref().map(|rows| {
            let r = rows.len();
            let c = rows.first().map_or(0, |x| x.len());
            let mut m = QMat::zeros(r, c);
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    m.set(i, j, v);
                }
            }
            m
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestParams {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    pub q: u64,
    pub m: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstructionManifest {
    pub params: ManifestParams,
    /// The primitive normal seed element, as its integer encoding.
    pub alpha: u64,
    #[serde(rename = "A")]
    pub a: PolyMatrixSchema,
    #[serde(rename = "B")]
    pub b: PolyMatrixSchema,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_up_to_j: Option<usize>,
}

impl ConstructionManifest {
    pub fn of(outer: &MsrdOuter, verified_up_to_j: Option<usize>) -> Self {
        ConstructionManifest {
            params: ManifestParams {
                n: outer.params.n,
                k: outer.params.k,
                delta: outer.params.delta,
                q: outer.params.q,
                m: outer.params.m,
            },
            alpha: outer.alpha.0 as u64,
            a: PolyMatrixSchema::of(&outer.a_mat),
            b: PolyMatrixSchema::of(&outer.b_mat),
            verified_up_to_j,
        }
    }

    pub fn msrd_params(&self) -> MsrdParams {
        MsrdParams {
            n: self.params.n,
            k: self.params.k,
            delta: self.params.delta,
            q: self.params.q,
            m: self.params.m,
        }
    }

    /// Rebuild the outer code from the stored parity parts H = (A, B).
    pub fn realize_outer(&self, f: &Arc<ExtField>) -> Result<ConvCode> {
        let a = self.a.realize(f)?;
        let b = self.b.realize(f)?;
        let corank = self.params.n - self.params.k;
        if a.rows() != corank || a.cols() != corank || b.rows() != corank || b.cols() != self.params.k {
            return Err(Error::Schema("manifest parity shapes mismatch".into()));
        }
        let mut h = PolyMatrix::zeros(f.clone(), corank, self.params.n);
        for r in 0..corank {
            for c in 0..corank {
                h.set(r, c, a.at(r, c).clone());
            }
            for c in 0..self.params.k {
                h.set(r, corank + c, b.at(r, c).clone());
            }
        }
        code_from_parity(h, Some(self.params.delta))
    }
}

// ---- the code-spec file ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeSpecFile {
    pub v: u32,
    pub field: FieldDescriptor,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "G")]
    pub generator: PolyMatrixSchema,
    #[serde(rename = "localStructure", skip_serializing_if = "Option::is_none")]
    pub local_structure: Option<LocalStructureSchema>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionManifest>,
}

/// A spec file realized back into live objects.
pub struct RealizedSpec {
    pub field: Arc<ExtField>,
    pub code: ConvCode,
    pub lrcc: Option<LrccCode>,
}

impl CodeSpecFile {
    pub fn from_code(code: &ConvCode) -> Self {
        CodeSpecFile {
            v: SCHEMA_VERSION,
            field: FieldDescriptor::of(code.field()),
            n: code.n(),
            k: code.k(),
            generator: PolyMatrixSchema::of(code.generator()),
            local_structure: None,
            construction: None,
        }
    }

    pub fn from_lrcc(lrcc: &LrccCode, manifest: Option<ConstructionManifest>) -> Self {
        let mut spec = Self::from_code(&lrcc.code);
        spec.local_structure =
            Some(LocalStructureSchema::of(&lrcc.structure, lrcc.local_gen.as_ref()));
        spec.construction = manifest;
        spec
    }

    pub fn realize(&self) -> Result<RealizedSpec> {
        if self.v != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema version {}", self.v)));
        }
        let field = self.field.realize()?;
        let gen = self.generator.realize(&field)?;
        if gen.rows() != self.k || gen.cols() != self.n {
            return Err(Error::Schema("generator shape disagrees with n, k".into()));
        }
        let mut code = ConvCode::from_generator(gen)?;
        let mut outer = None;
        if let Some(man) = &self.construction {
            outer = Some(man.realize_outer(&field)?);
        }
        let lrcc = match &self.local_structure {
            None => None,
            Some(ls) => {
                let structure = ls.structure();
                structure.validate(self.n)?;
                let local_gen = ls.local_qmat();
                // reattach the structured parity check when the construction
                // parts are available and still annihilate the generator; a
                // spec whose generator was edited keeps its self-derived
                // parity check so the verification predicates can witness
                // the damage instead of failing to load
                if let (Some(o), Some(a)) = (&outer, &local_gen) {
                    if let Some(h_out) = o.parity_check() {
                        let g = structure.g();
                        let h = structured_parity(
                            &field,
                            h_out,
                            a,
                            g,
                            structure.r,
                            structure.partial_distance,
                        )?;
                        if let Ok(reattached) = code.clone().with_parity_check(h) {
                            code = reattached;
                        }
                    }
                }
                Some(LrccCode { code: code.clone(), structure, local_gen, outer: outer.clone() })
            }
        };
        Ok(RealizedSpec { field, code, lrcc })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("schema serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<CodeSpecFile> {
        Ok(serde_json::from_str(text)?)
    }
}

// ---- symbol streams ---------------------------------------------------------------

/// One block per line, elements as their integer encodings, erasures as `*`.
pub fn write_symbol_stream(s: &ErasureStream) -> String {
    let mut out = String::new();
    for block in &s.blocks {
        let line: Vec<String> = block
            .iter()
            .map(|x| match x {
                Some(v) => v.0.to_string(),
                None => "*".to_string(),
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_blocks(blocks: &[Vec<Fe>]) -> String {
    write_symbol_stream(&ErasureStream::from_blocks(blocks))
}

/// Parse whitespace-separated tokens into blocks of width n.
pub fn parse_symbol_stream(text: &str, n: usize, f: &ExtField) -> Result<ErasureStream> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if n == 0 || tokens.len() % n != 0 {
        return Err(Error::Schema(format!(
            "token count {} is not a multiple of the block length {n}",
            tokens.len()
        )));
    }
    let mut blocks = Vec::with_capacity(tokens.len() / n);
    for chunk in tokens.chunks(n) {
        let mut block = Vec::with_capacity(n);
        for tok in chunk {
            if *tok == "*" {
                block.push(None);
            } else {
                let v: u64 =
                    tok.parse().map_err(|_| Error::Schema(format!("bad symbol token {tok:?}")))?;
                if (v as u128) >= f.cardinality() {
                    return Err(Error::Schema(format!("element {v} out of field range")));
                }
                block.push(Some(Fe(v as u32)));
            }
        }
        blocks.push(block);
    }
    Ok(ErasureStream { n, blocks })
}

/// Message streams are symbol streams with no erasures allowed.
pub fn parse_message_stream(text: &str, k: usize, f: &ExtField) -> Result<Vec<Vec<Fe>>> {
    let s = parse_symbol_stream(text, k, f)?;
    s.to_blocks().ok_or_else(|| Error::Schema("message stream contains erasure marks".into()))
}

// ---- erasure patterns ---------------------------------------------------------------

pub fn pattern_to_json(pattern: &[(usize, usize)]) -> String {
    let mut out = serde_json::to_string(&pattern).expect("pattern serializes");
    out.push('\n');
    out
}

pub fn pattern_from_json(text: &str) -> Result<Vec<(usize, usize)>> {
    Ok(serde_json::from_str(text)?)
}

// ---- repair reports ---------------------------------------------------------------

fn mode_str(m: RepairMode) -> &'static str {
    match m {
        RepairMode::Local => "local",
        RepairMode::Window => "window",
        RepairMode::TailBiting => "tailbiting",
    }
}

#[derive(Serialize)]
struct EventJson<'a> {
    t: usize,
    mode: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
    contacted_nodes: usize,
    downloaded_symbols: usize,
    window_symbols: usize,
    prefix_symbols: usize,
    solved_unknowns: usize,
    success: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    v: u32,
    events: Vec<EventJson<'a>>,
    total_downloaded: usize,
    local_repairs: usize,
    window_repairs: usize,
    unrecovered: &'a [(usize, usize)],
}

fn event_json(e: &RepairEvent) -> EventJson<'_> {
    EventJson {
        t: e.t,
        mode: mode_str(e.mode),
        group: e.group,
        j: e.j,
        contacted_nodes: e.contacted_nodes,
        downloaded_symbols: e.downloaded_symbols,
        window_symbols: e.window_symbols,
        prefix_symbols: e.prefix_symbols,
        solved_unknowns: e.solved_unknowns,
        success: e.success,
    }
}

pub fn report_to_json(r: &RepairReport) -> String {
    let json = ReportJson {
        v: SCHEMA_VERSION,
        events: r.events.iter().map(event_json).collect(),
        total_downloaded: r.total_downloaded,
        local_repairs: r.local_repairs,
        window_repairs: r.window_repairs,
        unrecovered: &r.unrecovered,
    };
    let mut out = serde_json::to_string_pretty(&json).expect("report serializes");
    out.push('\n');
    out
}

pub fn report_to_csv(r: &RepairReport) -> String {
    let mut out = String::from(
        "t,mode,group,j,contacted_nodes,downloaded_symbols,window_symbols,prefix_symbols,solved_unknowns,success\n",
    );
    for e in &r.events {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            e.t,
            mode_str(e.mode),
            e.group.map_or(String::new(), |g| g.to_string()),
            e.j.map_or(String::new(), |j| j.to_string()),
            e.contacted_nodes,
            e.downloaded_symbols,
            e.window_symbols,
            e.prefix_symbols,
            e.solved_unknowns,
            e.success,
        ));
    }
    out
}

// ---- distance profile CSV -----------------------------------------------------------

fn method_str(m: DistanceMethod) -> &'static str {
    match m {
        DistanceMethod::RankPattern => "rank-pattern",
        DistanceMethod::BruteForce => "brute-force",
        DistanceMethod::SumRankDirect => "sum-rank-direct",
        DistanceMethod::SumRankTransform => "sum-rank-transform",
    }
}

pub fn profile_to_csv(
    profile: &DistanceProfile,
    n: usize,
    k: usize,
    structure: Option<&LocalStructure>,
) -> String {
    let mut out = String::from("j,d_jc,bound_classical,bound_locality,method,exact\n");
    for (&j, e) in &profile.entries {
        let classical = (n - k) * (j + 1) + 1;
        let locality = structure.map(|s| {
            let mode = if (k * (j + 1)) % s.r == 0 { BoundMode::Exact } else { BoundMode::Ceiling };
            lrcc_bound(n, k, s.r, s.partial_distance, j, mode).expect("mode chosen to fit")
        });
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            j,
            e.value,
            classical,
            locality.map_or(String::new(), |b| b.to_string()),
            method_str(e.method),
            e.exact,
        ));
    }
    out
}

// ---- verification reports --------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessJson {
    pub delta: Vec<Vec<usize>>,
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<usize>>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct VerificationReport {
    pub v: u32,
    pub predicate: String,
    /// "pass", "fail", or "inconclusive" (budget exceeded).
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
}

impl VerificationReport {
    pub fn pass(predicate: &str) -> Self {
        VerificationReport {
            v: SCHEMA_VERSION,
            predicate: predicate.into(),
            result: "pass".into(),
            witness: None,
        }
    }

    pub fn fail(predicate: &str, witness: Option<&PartialWitness>) -> Self {
        VerificationReport {
            v: SCHEMA_VERSION,
            predicate: predicate.into(),
            result: "fail".into(),
            witness: witness.map(|w| WitnessJson {
                delta: w.delta.clone(),
                j: w.j,
                pattern: w.pattern.clone(),
                reason: w.reason.clone(),
            }),
        }
    }

    pub fn inconclusive(predicate: &str) -> Self {
        VerificationReport {
            v: SCHEMA_VERSION,
            predicate: predicate.into(),
            result: "inconclusive".into(),
            witness: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

// ---- simulation CSV -----------------------------------------------------------------

pub fn sim_to_csv(results: &[TrialResult]) -> String {
    let mut out = String::from(
        "trial,erasure_rate,erasures,repaired_fraction,fully_repaired,local_repairs,window_repairs,symbols_read\n",
    );
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.erasure_rate,
            r.erasures,
            r.repaired_fraction,
            r.fully_repaired,
            r.local_repairs,
            r.window_repairs,
            r.symbols_read,
        ));
    }
    out
}
