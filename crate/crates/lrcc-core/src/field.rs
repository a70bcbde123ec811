//! Exact arithmetic in GF(p), GF(q) with q = p^a, and GF(q^m).
//!
//! The extension is built as an explicit tower with two moduli so that the
//! subfield GF(q) stays a first-class citizen: local generators and sum-rank
//! computations multiply GF(q^m) symbols by GF(q) matrices constantly.
//!
//! Moduli are chosen deterministically: the lexicographically smallest monic
//! irreducible of the required degree with nonzero constant term, comparing
//! coefficient tuples low-degree-first, each coefficient as its integer code.
//! An element is encoded as the integer formed by all its GF(p) digits in
//! little-endian positional base-p order (subfield digit fastest-varying);
//! this integer is the serialization contract for every file format.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Maximum extension degree over GF(q) supported by the stack buffers.
const MAX_M: usize = 64;
/// Subfield tables are quadratic in q.
const MAX_Q: u64 = 512;
/// Element codes must fit a u32.
const MAX_CARDINALITY: u128 = 1 << 31;
/// Whole-field exp/log tables are built below this cardinality.
const ACCEL_LIMIT: u128 = 1 << 16;

pub const DEFAULT_FACTOR_CUTOFF: u64 = 1_000_000;

/// An element of GF(q^m), stored as its integer encoding. All arithmetic
/// goes through the owning [`ExtField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// A matrix over the subfield GF(q), row-major, entries as GF(q) codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u16>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> u16 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u16) {
        self.data[r * self.cols + c] = v;
    }

    pub fn select_cols(&self, sel: &[usize]) -> QMat {
        let mut out = QMat::zeros(self.rows, sel.len());
        for i in 0..self.rows {
            for (jj, &j) in sel.iter().enumerate() {
                out.set(i, jj, self.at(i, j));
            }
        }
        out
    }
}

/// The field tower GF(p) ⊆ GF(q) ⊆ GF(q^m), immutable after construction.
pub struct ExtField {
    p: u64,
    a: u32,
    m: u32,
    q: u32,
    /// Monic irreducible of degree a over GF(p), coefficients low-to-high.
    f_sub: Vec<u64>,
    /// Monic irreducible of degree m over GF(q), coefficients as GF(q) codes.
    f_ext: Vec<u16>,
    /// Ordered GF(q)-basis of GF(q^m); defaults to the power basis.
    basis: Vec<Fe>,
    /// Inverse of the basis coordinate matrix over GF(q) (None = power basis).
    basis_inv: Option<QMat>,
    q_add: Vec<u16>,
    q_mul: Vec<u16>,
    q_inv: Vec<u16>,
    q_neg: Vec<u16>,
    /// x^(m+i) mod f_ext for i in 0..m-1, fully reduced coefficient rows.
    red: Vec<Vec<u16>>,
    /// Multiplicative group order q^m - 1.
    order: u128,
    accel: Option<Accel>,
}

struct Accel {
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl std::fmt::Debug for ExtField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{}^{})", self.p, self.a, self.m)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n` by trial division; errors if a composite
/// cofactor bigger than cutoff^2 remains.
pub fn factor_distinct(n: u128, cutoff: u64) -> Result<Vec<u128>> {
    let mut n = n;
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d <= cutoff as u128 && d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if n < (cutoff as u128) * (cutoff as u128) {
            out.push(n);
        } else {
            return Err(Error::FactorizationCutoff { n, cutoff });
        }
    }
    Ok(out)
}

// ---- small table-driven field used for both tower levels --------------------

struct SmallTables {
    q: u32,
    add: Vec<u16>,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl SmallTables {
    fn prime(p: u64) -> Self {
        let q = p as u32;
        let mut add = vec![0u16; (q * q) as usize];
        let mut mul = vec![0u16; (q * q) as usize];
        let mut inv = vec![0u16; q as usize];
        for x in 0..q as u64 {
            for y in 0..q as u64 {
                add[(x * q as u64 + y) as usize] = ((x + y) % p) as u16;
                mul[(x * q as u64 + y) as usize] = ((x * y) % p) as u16;
            }
        }
        for x in 1..q as u64 {
            for y in 1..q as u64 {
                if (x * y) % p == 1 {
                    inv[x as usize] = y as u16;
                }
            }
        }
        SmallTables { q, add, mul, inv }
    }

    /// GF(q) = GF(p)[y]/(f_sub), elements coded little-endian base p.
    fn extension(p: u64, a: u32, f_sub: &[u64]) -> Self {
        let q = (p as u128).pow(a) as u32;
        let digits = |mut code: u32| -> Vec<u64> {
            let mut d = vec![0u64; a as usize];
            for di in d.iter_mut() {
                *di = (code % p as u32) as u64;
                code /= p as u32;
            }
            d
        };
        let compose = |d: &[u64]| -> u32 {
            let mut c = 0u32;
            for &x in d.iter().rev() {
                c = c * p as u32 + x as u32;
            }
            c
        };
        let mut add = vec![0u16; (q as usize) * (q as usize)];
        let mut mul = vec![0u16; (q as usize) * (q as usize)];
        let mut inv = vec![0u16; q as usize];
        for x in 0..q {
            let dx = digits(x);
            for y in 0..q {
                let dy = digits(y);
                let sum: Vec<u64> = dx.iter().zip(&dy).map(|(u, v)| (u + v) % p).collect();
                add[(x as usize) * q as usize + y as usize] = compose(&sum) as u16;
                // schoolbook product then reduce by f_sub
                let mut t = vec![0u64; 2 * a as usize];
                for (i, &u) in dx.iter().enumerate() {
                    for (j, &v) in dy.iter().enumerate() {
                        t[i + j] = (t[i + j] + u * v) % p;
                    }
                }
                for i in (a as usize..2 * a as usize - 1).rev() {
                    let c = t[i];
                    if c != 0 {
                        t[i] = 0;
                        // x^i = x^(i-a) * (-(f_0..f_{a-1}))
                        for j in 0..a as usize {
                            let sub = (c * f_sub[j]) % p;
                            t[i - a as usize + j] = (t[i - a as usize + j] + p - sub) % p;
                        }
                    }
                }
                mul[(x as usize) * q as usize + y as usize] = compose(&t[..a as usize]) as u16;
            }
        }
        for x in 1..q {
            for y in 1..q {
                if mul[(x as usize) * q as usize + y as usize] == 1 {
                    inv[x as usize] = y as u16;
                }
            }
        }
        SmallTables { q, add, mul, inv }
    }

    fn add(&self, x: u16, y: u16) -> u16 {
        self.add[(x as usize) * self.q as usize + y as usize]
    }

    fn mul(&self, x: u16, y: u16) -> u16 {
        self.mul[(x as usize) * self.q as usize + y as usize]
    }

    fn neg(&self, x: u16) -> u16 {
        // -x is the additive inverse: scan-free via add table is not stored;
        // compute as (q_char - digits) through mul by (p-1)? For small q a scan
        // at build time would do, but p-1 scaling is exact: -x = (p-1)*x only
        // in prime fields. Use the additive search once.
        if x == 0 {
            return 0;
        }
        for y in 0..self.q as u16 {
            if self.add(x, y) == 0 {
                return y;
            }
        }
        unreachable!("additive inverse exists")
    }

    fn inv(&self, x: u16) -> u16 {
        debug_assert!(x != 0);
        self.inv[x as usize]
    }
}

// ---- polynomials over a SmallTables field, for modulus search ---------------

fn sp_trim(v: &mut Vec<u16>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn sp_rem(t: &SmallTables, num: &[u16], den: &[u16]) -> Vec<u16> {
    let mut r: Vec<u16> = num.to_vec();
    sp_trim(&mut r);
    let mut d = den.to_vec();
    sp_trim(&mut d);
    debug_assert!(!d.is_empty());
    let lead_inv = t.inv(*d.last().unwrap());
    while r.len() >= d.len() {
        let coef = t.mul(*r.last().unwrap(), lead_inv);
        let shift = r.len() - d.len();
        if coef != 0 {
            for (i, &dc) in d.iter().enumerate() {
                let s = t.mul(coef, dc);
                r[shift + i] = t.add(r[shift + i], t.neg(s));
            }
        }
        r.pop();
        sp_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn sp_mulmod(t: &SmallTables, x: &[u16], y: &[u16], f: &[u16]) -> Vec<u16> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u16; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in y.iter().enumerate() {
            prod[i + j] = t.add(prod[i + j], t.mul(a, b));
        }
    }
    sp_rem(t, &prod, f)
}

/// x^(q^e) mod f, by e-fold exponentiation to the q.
fn sp_frob_x(t: &SmallTables, e: u32, f: &[u16]) -> Vec<u16> {
    let mut cur = vec![0u16, 1]; // x
    cur = sp_rem(t, &cur, f);
    for _ in 0..e {
        // cur^q by square and multiply
        let mut result = vec![1u16];
        let mut base = cur.clone();
        let mut exp = t.q;
        while exp > 0 {
            if exp & 1 == 1 {
                result = sp_mulmod(t, &result, &base, f);
            }
            base = sp_mulmod(t, &base, &base, f);
            exp >>= 1;
        }
        cur = result;
    }
    cur
}

fn sp_gcd(t: &SmallTables, x: &[u16], y: &[u16]) -> Vec<u16> {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    sp_trim(&mut a);
    sp_trim(&mut b);
    while !b.is_empty() {
        let r = sp_rem(t, &a, &b);
        a = b;
        b = r;
    }
    a
}

/// Rabin irreducibility test for a monic f of degree d over the table field.
fn sp_irreducible(t: &SmallTables, f: &[u16]) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    // x^(q^d) == x mod f
    let xqd = sp_frob_x(t, d as u32, f);
    let mut x_poly = vec![0u16, 1];
    x_poly = sp_rem(t, &x_poly, f);
    let mut diff = xqd.clone();
    while diff.len() < x_poly.len() {
        diff.push(0);
    }
    for (i, &c) in x_poly.iter().enumerate() {
        diff[i] = t.add(diff[i], t.neg(c));
    }
    sp_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    // gcd(x^(q^(d/l)) - x, f) constant for every prime l | d
    let primes = factor_distinct(d as u128, 1 << 16).expect("tiny degree factors");
    for l in primes {
        let e = d / l as usize;
        let xe = sp_frob_x(t, e as u32, f);
        let mut diff = xe;
        while diff.len() < 2 {
            diff.push(0);
        }
        diff[1] = t.add(diff[1], t.neg(1));
        sp_trim(&mut diff);
        let g = sp_gcd(t, &diff, f);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible of degree d over the table field, with nonzero
/// constant term, coefficient tuples compared low-degree-first.
fn smallest_irreducible(t: &SmallTables, d: usize) -> Vec<u16> {
    let q = t.q as u64;
    let total = q.pow(d as u32);
    for idx in 0..total {
        let mut f = vec![0u16; d + 1];
        f[d] = 1;
        let mut rest = idx;
        // low-degree-first lexicographic: c_0 is the most significant key
        for i in (0..d).rev() {
            f[i] = (rest % q) as u16;
            rest /= q;
        }
        if f[0] == 0 {
            continue;
        }
        if sp_irreducible(t, &f) {
            return f;
        }
    }
    unreachable!("an irreducible of every degree exists")
}

// ---- the extension field -----------------------------------------------------

impl ExtField {
    /// Build GF(q^m) with q = p^a and deterministic moduli. See the module
    /// docs for the modulus selection and element encoding contracts.
    pub fn build(p: u64, a: u32, m: u32) -> Result<Arc<ExtField>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if a == 0 || m == 0 {
            return Err(Error::ZeroDegree);
        }
        let q128 = (p as u128).pow(a);
        if q128 > MAX_Q as u128 {
            return Err(Error::FieldTooLarge);
        }
        let card = q128.pow(m);
        if card > MAX_CARDINALITY || m as usize > MAX_M {
            return Err(Error::FieldTooLarge);
        }
        let prime_tables = SmallTables::prime(p);
        let f_sub_codes = smallest_irreducible(&prime_tables, a as usize);
        let f_sub: Vec<u64> = f_sub_codes.iter().map(|&c| c as u64).collect();
        let sub = SmallTables::extension(p, a, &f_sub);
        let f_ext = smallest_irreducible(&sub, m as usize);
        Self::assemble(p, a, m, f_sub, f_ext, sub)
    }

    /// Build from an explicit descriptor (deserialization path). The moduli
    /// are validated for monicity and irreducibility.
    pub fn from_moduli(p: u64, a: u32, m: u32, f_sub: Vec<u64>, f_ext: Vec<u16>) -> Result<Arc<ExtField>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if a == 0 || m == 0 {
            return Err(Error::ZeroDegree);
        }
        let q128 = (p as u128).pow(a);
        if q128 > MAX_Q as u128 || q128.pow(m) > MAX_CARDINALITY || m as usize > MAX_M {
            return Err(Error::FieldTooLarge);
        }
        if f_sub.len() != a as usize + 1 || *f_sub.last().unwrap() != 1 || f_sub.iter().any(|&c| c >= p) {
            return Err(Error::Schema("f_sub is not a monic degree-a polynomial over GF(p)".into()));
        }
        let prime_tables = SmallTables::prime(p);
        let f_sub_codes: Vec<u16> = f_sub.iter().map(|&c| c as u16).collect();
        if !sp_irreducible(&prime_tables, &f_sub_codes) {
            return Err(Error::Schema("f_sub is reducible".into()));
        }
        let sub = SmallTables::extension(p, a, &f_sub);
        if f_ext.len() != m as usize + 1
            || *f_ext.last().unwrap() != 1
            || f_ext.iter().any(|&c| c as u32 >= q128 as u32)
        {
            return Err(Error::Schema("f_ext is not a monic degree-m polynomial over GF(q)".into()));
        }
        if !sp_irreducible(&sub, &f_ext) {
            return Err(Error::Schema("f_ext is reducible".into()));
        }
        Self::assemble(p, a, m, f_sub, f_ext, sub)
    }

    fn assemble(p: u64, a: u32, m: u32, f_sub: Vec<u64>, f_ext: Vec<u16>, sub: SmallTables) -> Result<Arc<ExtField>> {
        let q = sub.q;
        // reduction rows: x^(m+i) mod f_ext
        let mut red: Vec<Vec<u16>> = Vec::with_capacity(m as usize);
        let mut cur: Vec<u16> = f_ext[..m as usize].iter().map(|&c| sub.neg(c)).collect();
        red.push(cur.clone());
        for _ in 1..m as usize {
            // multiply by x, reduce with red[0]
            let mut next = vec![0u16; m as usize];
            let top = cur[m as usize - 1];
            for i in (1..m as usize).rev() {
                next[i] = cur[i - 1];
            }
            next[0] = 0;
            if top != 0 {
                for j in 0..m as usize {
                    next[j] = sub.add(next[j], sub.mul(top, red[0][j]));
                }
            }
            red.push(next.clone());
            cur = next;
        }
        let order = (q as u128).pow(m) - 1;
        let basis: Vec<Fe> = (0..m).map(|i| Fe((q as u64).pow(i) as u32)).collect();
        let q_neg: Vec<u16> = (0..q as u16).map(|x| sub.neg(x)).collect();
        let mut field = ExtField {
            p,
            a,
            m,
            q,
            f_sub,
            f_ext,
            basis,
            basis_inv: None,
            q_add: sub.add,
            q_mul: sub.mul,
            q_inv: sub.inv,
            q_neg,
            red,
            order,
            accel: None,
        };
        field.build_accel();
        Ok(Arc::new(field))
    }

    /// Replace the default power basis with an explicit ordered basis.
    pub fn with_basis(self: &Arc<Self>, basis: Vec<Fe>) -> Result<Arc<ExtField>> {
        if basis.len() != self.m as usize {
            return Err(Error::InvalidParameter("basis length must equal m".into()));
        }
        let m = self.m as usize;
        let mut coord = QMat::zeros(m, m);
        for (i, &b) in basis.iter().enumerate() {
            let d = self.digits(b);
            for j in 0..m {
                coord.set(i, j, d[j]);
            }
        }
        let inv = self.q_mat_inverse(&coord).ok_or(Error::RankDeficient)?;
        let mut f = ExtField {
            p: self.p,
            a: self.a,
            m: self.m,
            q: self.q,
            f_sub: self.f_sub.clone(),
            f_ext: self.f_ext.clone(),
            basis,
            basis_inv: Some(inv),
            q_add: self.q_add.clone(),
            q_mul: self.q_mul.clone(),
            q_inv: self.q_inv.clone(),
            q_neg: self.q_neg.clone(),
            red: self.red.clone(),
            order: self.order,
            accel: None,
        };
        f.build_accel();
        Ok(Arc::new(f))
    }

    fn build_accel(&mut self) {
        let card = self.order + 1;
        if card > ACCEL_LIMIT || self.order == 0 {
            return;
        }
        let factors = match factor_distinct(self.order, 1 << 17) {
            Ok(f) => f,
            Err(_) => return,
        };
        let gen = (1..card as u32)
            .map(Fe)
            .find(|&x| self.is_primitive_with(x, &factors));
        let gen = match gen {
            Some(g) => g,
            None => return,
        };
        let n = self.order as usize;
        let mut exp = vec![0u32; n];
        let mut log = vec![0u32; card as usize];
        let mut cur = Fe::ONE;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = cur.0;
            log[cur.0 as usize] = i as u32;
            cur = self.mul_generic(cur, gen);
        }
        self.accel = Some(Accel { exp, log });
    }

    // -- parameters ------------------------------------------------------

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn cardinality(&self) -> u128 {
        self.order + 1
    }

    pub fn multiplicative_order(&self) -> u128 {
        self.order
    }

    pub fn f_sub(&self) -> &[u64] {
        &self.f_sub
    }

    pub fn f_ext(&self) -> &[u16] {
        &self.f_ext
    }

    pub fn basis(&self) -> &[Fe] {
        &self.basis
    }

    pub fn same_field(&self, other: &ExtField) -> bool {
        std::ptr::eq(self, other)
            || (self.p == other.p
                && self.a == other.a
                && self.m == other.m
                && self.f_sub == other.f_sub
                && self.f_ext == other.f_ext
                && self.basis == other.basis)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.cardinality() as u32).map(Fe)
    }

    fn check(&self, x: Fe) -> Fe {
        debug_assert!((x.0 as u128) < self.cardinality());
        x
    }

    // -- GF(q) level -------------------------------------------------------

    pub fn q_add(&self, x: u16, y: u16) -> u16 {
        self.q_add[(x as usize) * self.q as usize + y as usize]
    }

    pub fn q_mul(&self, x: u16, y: u16) -> u16 {
        self.q_mul[(x as usize) * self.q as usize + y as usize]
    }

    pub fn q_neg(&self, x: u16) -> u16 {
        self.q_neg[x as usize]
    }

    pub fn q_sub(&self, x: u16, y: u16) -> u16 {
        self.q_add(x, self.q_neg(y))
    }

    pub fn q_inv(&self, x: u16) -> u16 {
        debug_assert!(x != 0);
        self.q_inv[x as usize]
    }

    /// Embed a GF(q) code into GF(q^m) (first basis coordinate).
    pub fn embed_subfield(&self, c: u16) -> Fe {
        debug_assert!((c as u32) < self.q);
        Fe(c as u32)
    }

    // -- element decomposition ---------------------------------------------

    /// GF(q) coordinates of x in the power basis, low-to-high.
    pub fn digits(&self, x: Fe) -> Vec<u16> {
        let mut d = vec![0u16; self.m as usize];
        let mut code = self.check(x).0;
        for di in d.iter_mut() {
            *di = (code % self.q) as u16;
            code /= self.q;
        }
        d
    }

    pub fn compose(&self, d: &[u16]) -> Fe {
        let mut code: u64 = 0;
        for &x in d.iter().rev() {
            code = code * self.q as u64 + x as u64;
        }
        Fe(code as u32)
    }

    /// All GF(p) digits of x, little-endian, subfield digit fastest-varying.
    pub fn p_digits(&self, x: Fe) -> Vec<u64> {
        let mut out = Vec::with_capacity((self.a * self.m) as usize);
        for c in self.digits(x) {
            let mut c = c as u64;
            for _ in 0..self.a {
                out.push(c % self.p);
                c /= self.p;
            }
        }
        out
    }

    // -- arithmetic ----------------------------------------------------------

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        if self.p == 2 {
            return Fe(self.check(x).0 ^ self.check(y).0);
        }
        let dx = self.digits(x);
        let dy = self.digits(y);
        let sum: Vec<u16> = dx.iter().zip(&dy).map(|(&u, &v)| self.q_add(u, v)).collect();
        self.compose(&sum)
    }

    pub fn neg(&self, x: Fe) -> Fe {
        if self.p == 2 {
            return x;
        }
        let d: Vec<u16> = self.digits(x).iter().map(|&u| self.q_neg(u)).collect();
        self.compose(&d)
    }

    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        if let Some(acc) = &self.accel {
            if x.is_zero() || y.is_zero() {
                return Fe::ZERO;
            }
            let i = acc.log[x.0 as usize] as u128 + acc.log[y.0 as usize] as u128;
            return Fe(acc.exp[(i % self.order) as usize]);
        }
        self.mul_generic(x, y)
    }

    fn mul_generic(&self, x: Fe, y: Fe) -> Fe {
        let m = self.m as usize;
        let mut a = [0u16; MAX_M];
        let mut b = [0u16; MAX_M];
        let mut code = self.check(x).0;
        for ai in a.iter_mut().take(m) {
            *ai = (code % self.q) as u16;
            code /= self.q;
        }
        let mut code = self.check(y).0;
        for bi in b.iter_mut().take(m) {
            *bi = (code % self.q) as u16;
            code /= self.q;
        }
        let mut t = [0u16; 2 * MAX_M];
        for i in 0..m {
            if a[i] == 0 {
                continue;
            }
            for j in 0..m {
                if b[j] != 0 {
                    t[i + j] = self.q_add(t[i + j], self.q_mul(a[i], b[j]));
                }
            }
        }
        for i in 0..m.saturating_sub(1) {
            let c = t[m + i];
            if c != 0 {
                for j in 0..m {
                    if self.red[i][j] != 0 {
                        t[j] = self.q_add(t[j], self.q_mul(c, self.red[i][j]));
                    }
                }
            }
        }
        self.compose(&t[..m])
    }

    pub fn inv(&self, x: Fe) -> Fe {
        debug_assert!(!x.is_zero(), "inverse of zero");
        if let Some(acc) = &self.accel {
            let l = acc.log[x.0 as usize] as u128;
            return Fe(acc.exp[((self.order - l) % self.order) as usize]);
        }
        // x^(order - 1)
        self.pow(x, self.order - 1)
    }

    pub fn div(&self, x: Fe, y: Fe) -> Fe {
        self.mul(x, self.inv(y))
    }

    pub fn pow(&self, x: Fe, e: u128) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if x.is_zero() {
            return Fe::ZERO;
        }
        if let Some(acc) = &self.accel {
            let l = acc.log[x.0 as usize] as u128;
            let idx = (l * (e % self.order)) % self.order;
            return Fe(acc.exp[idx as usize]);
        }
        let mut e = e % self.order;
        if e == 0 {
            return Fe::ONE;
        }
        let mut base = x;
        let mut result = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_generic(result, base);
            }
            base = self.mul_generic(base, base);
            e >>= 1;
        }
        result
    }

    /// The q-power Frobenius applied i times: x^(q^i). The exponent i is used
    /// literally; i and i mod m give equal results.
    pub fn frobenius(&self, x: Fe, i: u32) -> Fe {
        let mut y = x;
        for _ in 0..i {
            y = self.pow(y, self.q as u128);
        }
        y
    }

    // -- primitive normal elements -----------------------------------------

    fn is_primitive_with(&self, x: Fe, order_factors: &[u128]) -> bool {
        if x.is_zero() {
            return false;
        }
        for &l in order_factors {
            if self.pow(x, self.order / l) == Fe::ONE {
                return false;
            }
        }
        true
    }

    /// True if x has multiplicative order q^m - 1. Requires factoring the
    /// group order, bounded by the trial-division cutoff.
    pub fn is_primitive(&self, x: Fe, cutoff: u64) -> Result<bool> {
        let factors = factor_distinct(self.order, cutoff)?;
        Ok(self.is_primitive_with(x, &factors))
    }

    /// True if {x, x^q, ..., x^(q^(m-1))} is linearly independent over GF(q).
    pub fn is_normal(&self, x: Fe) -> bool {
        let m = self.m as usize;
        let mut conj = Vec::with_capacity(m);
        let mut cur = x;
        for _ in 0..m {
            conj.push(cur);
            cur = self.pow(cur, self.q as u128);
        }
        let rep = self.matrix_representation(&conj);
        self.q_rank(&rep) == m
    }

    /// First element in canonical enumeration order that is both primitive
    /// and normal over GF(q).
    pub fn primitive_normal(&self, cutoff: u64) -> Result<Fe> {
        let factors = factor_distinct(self.order, cutoff)?;
        for x in self.elements().skip(1) {
            if self.is_primitive_with(x, &factors) && self.is_normal(x) {
                return Ok(x);
            }
        }
        unreachable!("a primitive normal element exists in every extension")
    }

    // -- matrix representation over GF(q) ------------------------------------

    /// Column j holds the basis coordinates of c[j]; the map is GF(q)-linear.
    pub fn matrix_representation(&self, c: &[Fe]) -> QMat {
        let m = self.m as usize;
        let mut out = QMat::zeros(m, c.len());
        for (j, &x) in c.iter().enumerate() {
            let coords = self.basis_coords(x);
            for i in 0..m {
                out.set(i, j, coords[i]);
            }
        }
        out
    }

    /// Coordinates of x in the field's ordered basis.
    pub fn basis_coords(&self, x: Fe) -> Vec<u16> {
        let d = self.digits(x);
        match &self.basis_inv {
            None => d,
            Some(inv) => {
                // row vector d times inv
                let m = self.m as usize;
                let mut out = vec![0u16; m];
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = 0u16;
                    for i in 0..m {
                        acc = self.q_add(acc, self.q_mul(d[i], inv.at(i, j)));
                    }
                    *o = acc;
                }
                out
            }
        }
    }

    /// Inverse of the matrix representation: sum_i basis_i * row_i.
    pub fn from_matrix_representation(&self, mat: &QMat) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; mat.cols];
        for j in 0..mat.cols {
            let mut acc = Fe::ZERO;
            for i in 0..mat.rows {
                let coef = self.embed_subfield(mat.at(i, j));
                acc = self.add(acc, self.mul(coef, self.basis[i]));
            }
            out[j] = acc;
        }
        out
    }

    // -- GF(q) linear algebra -------------------------------------------------

    /// Rank of a GF(q) matrix by Gaussian elimination on a copy.
    pub fn q_rank(&self, mat: &QMat) -> usize {
        let mut m = mat.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let piv = (rank..rows).find(|&r| m.at(r, c) != 0);
            let piv = match piv {
                Some(p) => p,
                None => continue,
            };
            for j in 0..cols {
                let t = m.at(rank, j);
                m.set(rank, j, m.at(piv, j));
                m.set(piv, j, t);
            }
            let inv = self.q_inv(m.at(rank, c));
            for r in 0..rows {
                if r != rank && m.at(r, c) != 0 {
                    let f = self.q_mul(m.at(r, c), inv);
                    for j in 0..cols {
                        let s = self.q_mul(f, m.at(rank, j));
                        m.set(r, j, self.q_sub(m.at(r, j), s));
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn q_mat_mul(&self, x: &QMat, y: &QMat) -> QMat {
        assert_eq!(x.cols, y.rows);
        let mut out = QMat::zeros(x.rows, y.cols);
        for i in 0..x.rows {
            for l in 0..x.cols {
                let a = x.at(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..y.cols {
                    let s = self.q_mul(a, y.at(l, j));
                    out.set(i, j, self.q_add(out.at(i, j), s));
                }
            }
        }
        out
    }

    /// Inverse of a square GF(q) matrix, or None if singular.
    pub fn q_mat_inverse(&self, mat: &QMat) -> Option<QMat> {
        assert_eq!(mat.rows, mat.cols);
        let n = mat.rows;
        let mut m = mat.clone();
        let mut inv = QMat::identity(n);
        for c in 0..n {
            let piv = (c..n).find(|&r| m.at(r, c) != 0)?;
            for j in 0..n {
                let t = m.at(c, j);
                m.set(c, j, m.at(piv, j));
                m.set(piv, j, t);
                let t = inv.at(c, j);
                inv.set(c, j, inv.at(piv, j));
                inv.set(piv, j, t);
            }
            let d = self.q_inv(m.at(c, c));
            for j in 0..n {
                m.set(c, j, self.q_mul(m.at(c, j), d));
                inv.set(c, j, self.q_mul(inv.at(c, j), d));
            }
            for r in 0..n {
                if r != c && m.at(r, c) != 0 {
                    let f = m.at(r, c);
                    for j in 0..n {
                        let s = self.q_mul(f, m.at(c, j));
                        m.set(r, j, self.q_sub(m.at(r, j), s));
                        let s = self.q_mul(f, inv.at(c, j));
                        inv.set(r, j, self.q_sub(inv.at(r, j), s));
                    }
                }
            }
        }
        Some(inv)
    }
}
