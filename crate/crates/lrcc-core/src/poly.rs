//! Univariate polynomials over GF(q^m), coefficients stored low-to-high in
//! canonical form (no trailing zero coefficient). Operations take the owning
//! field explicitly so elements stay plain codes.

use crate::field::{ExtField, Fe};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![Fe::ONE] }
    }

    pub fn constant(c: Fe) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { coeffs: vec![c] }
        }
    }

    pub fn from_coeffs(coeffs: Vec<Fe>) -> Self {
        let mut p = Poly { coeffs };
        p.normalize();
        p
    }

    /// c * D^d
    pub fn monomial(c: Fe, d: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Fe::ZERO; d + 1];
        coeffs[d] = c;
        Poly { coeffs }
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to -1.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn leading(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [Fe::ONE]
    }

    /// A nonzero constant, i.e. a unit of F[D].
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn add(&self, f: &ExtField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(f.add(self.coeff(i), other.coeff(i)));
        }
        Poly::from_coeffs(out)
    }

    pub fn neg(&self, f: &ExtField) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn sub(&self, f: &ExtField, other: &Poly) -> Poly {
        self.add(f, &other.neg(f))
    }

    pub fn mul(&self, f: &ExtField, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = f.add(out[i + j], f.mul(a, b));
                }
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn scale(&self, f: &ExtField, c: Fe) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect() }
    }

    /// Multiply by D^s.
    pub fn shift(&self, s: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Fe::ZERO; s];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Euclidean division: self = q * den + r with deg r < deg den.
    pub fn divmod(&self, f: &ExtField, den: &Poly) -> (Poly, Poly) {
        assert!(!den.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < den.coeffs.len() {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dd = den.coeffs.len() - 1;
        let lead_inv = f.inv(den.leading());
        let mut quo = vec![Fe::ZERO; rem.len() - dd];
        while rem.len() > dd {
            let top = *rem.last().unwrap();
            if !top.is_zero() {
                let c = f.mul(top, lead_inv);
                let shift = rem.len() - 1 - dd;
                quo[shift] = c;
                for (i, &dc) in den.coeffs.iter().enumerate() {
                    rem[shift + i] = f.sub(rem[shift + i], f.mul(c, dc));
                }
            }
            rem.pop();
            while rem.last().map_or(false, |c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::from_coeffs(quo), Poly::from_coeffs(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, f: &ExtField, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divmod(f, &b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let inv = f.inv(a.leading());
            a.scale(f, inv)
        }
    }

    pub fn eval(&self, f: &ExtField, x: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ExtField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_poly(f: &ExtField, max_deg: usize, rng: &mut ChaCha8Rng) -> Poly {
        let d = rng.gen_range(0..=max_deg);
        Poly::from_coeffs((0..=d).map(|_| Fe(rng.gen_range(0..f.cardinality() as u32))).collect())
    }

    #[test]
    fn divmod_reconstructs() {
        let f = ExtField::build(2, 1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let a = rand_poly(&f, 6, &mut rng);
            let mut b = rand_poly(&f, 3, &mut rng);
            if b.is_zero() {
                b = Poly::one();
            }
            let (q, r) = a.divmod(&f, &b);
            assert_eq!(q.mul(&f, &b).add(&f, &r), a);
            assert!(r.degree_i64() < b.degree_i64());
        }
    }

    #[test]
    fn gcd_divides_both() {
        let f = ExtField::build(3, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let g = rand_poly(&f, 2, &mut rng);
            if g.is_zero() {
                continue;
            }
            let a = rand_poly(&f, 3, &mut rng).mul(&f, &g);
            let b = rand_poly(&f, 3, &mut rng).mul(&f, &g);
            let d = a.gcd(&f, &b);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let (_, ra) = a.divmod(&f, &d);
            let (_, rb) = b.divmod(&f, &d);
            assert!(ra.is_zero() && rb.is_zero());
            // gcd is a multiple of g's contribution
            let (_, rg) = d.divmod(&f, &g.scale(&f, f.inv(g.leading())));
            assert!(rg.is_zero());
        }
    }

    #[test]
    fn eval_is_ring_hom() {
        let f = ExtField::build(2, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = rand_poly(&f, 4, &mut rng);
            let b = rand_poly(&f, 4, &mut rng);
            let x = Fe(rng.gen_range(0..f.cardinality() as u32));
            assert_eq!(a.add(&f, &b).eval(&f, x), f.add(a.eval(&f, x), b.eval(&f, x)));
            assert_eq!(a.mul(&f, &b).eval(&f, x), f.mul(a.eval(&f, x), b.eval(&f, x)));
        }
    }

    #[test]
    fn canonical_form_has_no_trailing_zeros() {
        let p = Poly::from_coeffs(vec![Fe(1), Fe(0), Fe(0)]);
        assert_eq!(p.degree(), Some(0));
        assert!(Poly::from_coeffs(vec![Fe(0), Fe(0)]).is_zero());
        assert_eq!(Poly::zero().degree_i64(), -1);
    }
}
