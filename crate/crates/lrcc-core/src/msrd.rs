//! Explicit construction of non-catastrophic outer convolutional codes with
//! optimal sum-rank column distances, driven by Hankel matrices of Frobenius
//! powers of a primitive normal element. The parity check H = (A, B) has
//! A_0 = I and B determined by prefix-matching the power series A^{-1}B
//! against the T_j sequence through degree L, realized as a finite linear
//! solve.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::conv::{is_j_msrd, ConvCode, SumRankLayout};
use crate::error::{Error, Result};
use crate::field::{factor_distinct, ExtField, Fe, DEFAULT_FACTOR_CUTOFF};
use crate::mat::{Mat, SolveOutcome};
use crate::polymat::PolyMatrix;
use crate::workload::Workload;

/// Shape parameters of the construction. N is the outer length, with
/// (N - k) | delta required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsrdParams {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    /// Subfield size q (a prime power).
    pub q: u64,
    /// Extension degree: the field is GF(q^m).
    pub m: u32,
}

impl MsrdParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidParameter("need 1 <= k < N".into()));
        }
        if self.delta % (self.n - self.k) != 0 {
            return Err(Error::DegreeNotDivisible { delta: self.delta, corank: self.n - self.k });
        }
        prime_power(self.q)?;
        Ok(())
    }

    /// nu = delta / (N - k): the degree of the parity-check coefficients.
    pub fn nu(&self) -> usize {
        self.delta / (self.n - self.k)
    }

    /// M = max(N - k, k): the size of the Hankel seed matrices.
    pub fn t_size(&self) -> usize {
        (self.n - self.k).max(self.k)
    }

    /// L = floor(delta/k) + delta/(N-k).
    pub fn l(&self) -> usize {
        self.delta / self.k + self.nu()
    }

    /// The proven sufficient field-extension bound q^(M(L+2) - 1).
    pub fn field_bound(&self) -> BigUint {
        field_bound(self.q, self.t_size(), self.l())
    }
}

/// q^(M(L+2) - 1) as an exact big integer.
pub fn field_bound(q: u64, t_size: usize, l: usize) -> BigUint {
    BigUint::from(q).pow((t_size * (l + 2) - 1) as u32)
}

/// Split a prime power into (p, a) with q = p^a.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let mut rest = q;
    let mut a = 0u32;
    while rest % p == 0 {
        rest /= p;
        a += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    Ok((p, a))
}

/// The Hankel seed matrix T_j: entry (u, w) = alpha^[Mj + u + w], constant
/// along anti-diagonals. `conj[i]` must hold alpha^[i] = alpha^(q^i).
pub fn build_t(f: &Arc<ExtField>, conj: &[Fe], t_size: usize, j: usize) -> Mat {
    let mut t = Mat::zeros(f.clone(), t_size, t_size);
    for u in 0..t_size {
        for w in 0..t_size {
            t.set(u, w, conj[t_size * j + u + w]);
        }
    }
    t
}

/// Construction output: the code plus the seed and parity data needed to
/// reproduce and audit it.
#[derive(Debug, Clone)]
pub struct MsrdOuter {
    pub params: MsrdParams,
    pub code: ConvCode,
    pub alpha: Fe,
    /// A part of H = (A, B): (N-k) x (N-k), A_0 = I.
    pub a_mat: PolyMatrix,
    /// B part of H = (A, B): (N-k) x k.
    pub b_mat: PolyMatrix,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Skip the m >= q^(M(L+2)-1) check (empirical mode).
    pub override_field_bound: bool,
    pub factor_cutoff: u64,
    /// How many primitive normal seeds to try when a solve degenerates.
    pub seed_retries: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { override_field_bound: false, factor_cutoff: DEFAULT_FACTOR_CUTOFF, seed_retries: 8 }
    }
}

/// Build the outer code from its parity check H = (A, B): A_0 = I and the
/// remaining A_i solved so that A^{-1}B matches sum T_j D^j through degree L;
/// then B_j = sum_{i <= min(j, nu)} A_i T_{j-i}. The generator is the kernel
/// of H, re-reduced, and must come out non-catastrophic with degree delta.
/// Degenerate solves retry with the next primitive normal element.
pub fn build_outer(params: MsrdParams, opts: &BuildOptions) -> Result<MsrdOuter> {
    params.validate()?;
    let (p, a) = prime_power(params.q)?;
    if !opts.override_field_bound {
        let bound = params.field_bound();
        if BigUint::from(params.m) < bound {
            return Err(Error::InvalidParameter(format!(
                "m = {} is below the proven bound {bound}; use the empirical override to go lower",
                params.m
            )));
        }
    }
    let f = ExtField::build(p, a, params.m)?;
    let factors = factor_distinct(f.multiplicative_order(), opts.factor_cutoff)?;
    let mut tried = 0usize;
    let mut last_err: Option<Error> = None;
    for alpha in f.elements().skip(1) {
        if tried >= opts.seed_retries {
            break;
        }
        if !is_primitive_normal(&f, alpha, &factors) {
            continue;
        }
        tried += 1;
        match try_seed(&f, params, alpha) {
            Ok(out) => return Ok(out),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::MatchingUnsolvable { retries: tried }))
}

fn is_primitive_normal(f: &ExtField, x: Fe, factors: &[u128]) -> bool {
    if x.is_zero() {
        return false;
    }
    let order = f.multiplicative_order();
    for &l in factors {
        if f.pow(x, order / l) == Fe::ONE {
            return false;
        }
    }
    f.is_normal(x)
}

fn try_seed(f: &Arc<ExtField>, params: MsrdParams, alpha: Fe) -> Result<MsrdOuter> {
    let corank = params.n - params.k;
    let k = params.k;
    let nu = params.nu();
    let l = params.l();
    let t_size = params.t_size();
    // alpha^[i] for all indices appearing in T_0..T_L
    let mut conj = Vec::with_capacity(t_size * (l + 2));
    let mut cur = alpha;
    for _ in 0..t_size * (l + 2) {
        conj.push(cur);
        cur = f.pow(cur, f.q() as u128);
    }
    // top-left (N-k) x k blocks of the Hankel seeds
    let t_hat: Vec<Mat> = (0..=l)
        .map(|j| {
            let full = build_t(f, &conj, t_size, j);
            let mut sub = Mat::zeros(f.clone(), corank, k);
            for u in 0..corank {
                for w in 0..k {
                    sub.set(u, w, full.at(u, w));
                }
            }
            sub
        })
        .collect();

    // solve for A_1..A_nu row by row: the coefficient matrix is shared, the
    // right-hand side depends on the row of A being solved
    let unknowns = nu * corank;
    let equations = (l - nu) * k;
    let mut a_coeffs: Vec<Mat> = (0..=nu)
        .map(|i| if i == 0 { Mat::identity(f.clone(), corank) } else { Mat::zeros(f.clone(), corank, corank) })
        .collect();
    if equations > 0 && unknowns > 0 {
        let mut coef = Mat::zeros(f.clone(), equations, unknowns);
        for (jj, j) in (nu + 1..=l).enumerate() {
            for c in 0..k {
                for i in 1..=nu {
                    for t in 0..corank {
                        coef.set(jj * k + c, (i - 1) * corank + t, t_hat[j - i].at(t, c));
                    }
                }
            }
        }
        for s in 0..corank {
            let mut rhs = vec![Fe::ZERO; equations];
            for (jj, j) in (nu + 1..=l).enumerate() {
                for c in 0..k {
                    rhs[jj * k + c] = f.neg(t_hat[j].at(s, c));
                }
            }
            match coef.solve(&rhs)? {
                SolveOutcome::Inconsistent => {
                    return Err(Error::MatchingUnsolvable { retries: 1 });
                }
                SolveOutcome::Solution { particular, .. } => {
                    for i in 1..=nu {
                        for t in 0..corank {
                            a_coeffs[i].set(s, t, particular[(i - 1) * corank + t]);
                        }
                    }
                }
            }
        }
    }
    // B_j = sum_{i=0}^{min(j, nu)} A_i * Th_{j-i}
    let mut b_coeffs: Vec<Mat> = Vec::with_capacity(nu + 1);
    for j in 0..=nu {
        let mut acc = Mat::zeros(f.clone(), corank, k);
        for i in 0..=j.min(nu) {
            let prod = a_coeffs[i].mul(&t_hat[j - i])?;
            for r in 0..corank {
                for c in 0..k {
                    acc.set(r, c, f.add(acc.at(r, c), prod.at(r, c)));
                }
            }
        }
        b_coeffs.push(acc);
    }
    let a_mat = PolyMatrix::from_coefficients(f.clone(), &a_coeffs)?;
    let b_mat = PolyMatrix::from_coefficients(f.clone(), &b_coeffs)?;
    // H = (A, B)
    let mut h = PolyMatrix::zeros(f.clone(), corank, params.n);
    for r in 0..corank {
        for c in 0..corank {
            h.set(r, c, a_mat.at(r, c).clone());
        }
        for c in 0..k {
            h.set(r, corank + c, b_mat.at(r, c).clone());
        }
    }
    let code = code_from_parity(h, Some(params.delta))?;
    Ok(MsrdOuter { params, code, alpha, a_mat, b_mat })
}

/// The code with the given polynomial parity-check matrix: its generator is
/// the kernel of H, reduced; the expected degree, non-catastrophicity and a
/// full-rank G_0 are enforced, and H is attached as the parity check.
pub fn code_from_parity(h: PolyMatrix, expected_delta: Option<usize>) -> Result<ConvCode> {
    let corank = h.rows();
    if h.rank() != corank {
        return Err(Error::RankDeficient);
    }
    let gen = h.annihilator_basis();
    let code = ConvCode::from_generator(gen)?;
    if let Some(delta) = expected_delta {
        if code.degree() != delta {
            return Err(Error::WrongDegree { expected: delta, got: code.degree() });
        }
    }
    if !code.is_non_catastrophic() {
        return Err(Error::Catastrophic);
    }
    if !code.g0_full_rank() {
        return Err(Error::G0NotFullRank);
    }
    code.with_parity_check(h)
}

/// Certify the j-th sum-rank column distance is Singleton-optimal for the
/// layout (delegates to the distance oracles).
pub fn verify_msrd(code: &ConvCode, layout: SumRankLayout, j: usize, wl: &Workload) -> Result<bool> {
    is_j_msrd(code, j, layout, wl)
}

/// Smallest extension degree m <= m_max for which the construction succeeds
/// and verifies L-MSRD for the layout; None when the sweep finds nothing.
/// Deterministic: the sweep runs in ascending m order.
pub fn empirical_min_m(
    n: usize,
    k: usize,
    delta: usize,
    q: u64,
    layout: SumRankLayout,
    m_max: u32,
    wl: &Workload,
) -> Result<Option<u32>> {
    let opts = BuildOptions { override_field_bound: true, ..Default::default() };
    for m in 1..=m_max {
        let params = MsrdParams { n, k, delta, q, m };
        params.validate()?;
        let outer = match build_outer(params, &opts) {
            Ok(o) => o,
            Err(Error::BudgetExceeded { limit }) => return Err(Error::BudgetExceeded { limit }),
            Err(_) => continue,
        };
        match verify_msrd(&outer.code, layout, params.l(), wl) {
            Ok(true) => return Ok(Some(m)),
            Ok(false) => continue,
            Err(Error::BudgetExceeded { limit }) => return Err(Error::BudgetExceeded { limit }),
            Err(_) => continue,
        }
    }
    Ok(None)
}
