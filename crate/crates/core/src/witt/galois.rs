//! Independent Galois ring GR(p^n, r) = (Z/p^n)[t]/(g) used as an oracle for
//! Witt arithmetic over finite fields.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::ring::{FiniteRing, RingElem};
use crate::witt::{Witt, WittRing};

/// Galois ring with the modulus of the residue field lifted coefficientwise.
#[derive(Clone, Debug)]
pub struct GaloisRing {
    pub p: u64,
    pub n: u32,
    pub r: usize,
    modulus: u64,
    /// Lifted monic polynomial, coefficients of t^0..t^r.
    poly: Vec<u64>,
}

pub type GrElem = Vec<u64>;

impl GaloisRing {
    pub fn new(field: &FiniteRing, n: u32) -> Result<Self> {
        let r = field.field_degree().ok_or_else(|| Error::InvalidRingSpec("oracle needs a field".into()))?;
        let poly: Vec<u64> = field.modulus().expect("field modulus").iter().map(|&c| c as u64).collect();
        let p = field.p() as u64;
        Ok(GaloisRing { p, n, r: r as usize, modulus: p.pow(n), poly })
    }

    pub fn size(&self) -> u64 {
        self.modulus.pow(self.r as u32)
    }

    pub fn index(&self, a: &GrElem) -> u64 {
        a.iter().rev().fold(0, |acc, &c| acc * self.modulus + c)
    }

    pub fn element(&self, mut idx: u64) -> GrElem {
        (0..self.r)
            .map(|_| {
                let c = idx % self.modulus;
                idx /= self.modulus;
                c
            })
            .collect()
    }

    pub fn zero(&self) -> GrElem {
        vec![0; self.r]
    }

    pub fn one(&self) -> GrElem {
        let mut e = self.zero();
        e[0] = 1 % self.modulus;
        e
    }

    pub fn add(&self, a: &GrElem, b: &GrElem) -> GrElem {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    pub fn mul(&self, a: &GrElem, b: &GrElem) -> GrElem {
        let m = self.modulus;
        let mut prod = vec![0u64; 2 * self.r];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % m;
            }
        }
        for deg in (self.r..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (k, &g) in self.poly.iter().enumerate().take(self.r) {
                let idx = deg - self.r + k;
                prod[idx] = (prod[idx] + m - c * g % m) % m;
            }
        }
        prod.truncate(self.r);
        prod
    }

    pub fn pow(&self, a: &GrElem, mut e: u64) -> GrElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn scale(&self, a: &GrElem, k: u64) -> GrElem {
        a.iter().map(|x| x * k % self.modulus).collect()
    }

    /// Reduction mod p, as coordinates over the residue field basis.
    pub fn residue(&self, a: &GrElem) -> Vec<u32> {
        a.iter().map(|&x| (x % self.p) as u32).collect()
    }
}

/// Searches for the isomorphism W_n(F_q) -> GR(p^n, r) sending Witt vectors to
/// sums of p-power multiples of Teichmuller representatives, and verifies it is
/// bijective, additive and multiplicative on all elements.
pub fn galois_ring_oracle(field: &FiniteRing, n: usize) -> Result<Vec<u64>> {
    let w = WittRing::new(field, n)?;
    let gr = GaloisRing::new(field, n as u32)?;
    let q = field.size();
    // Teichmuller image of the field generator: the unique root of x^q = x
    // reducing to the generator, found by search.
    let gen_coords = field.coords(if field.dim() > 1 { field.basis(1) } else { field.one() });
    let generator = (0..gr.size())
        .map(|i| gr.element(i))
        .find(|u| gr.residue(u) == gen_coords && gr.pow(u, q) == *u)
        .ok_or_else(|| Error::Discrepancy("no Teichmuller root in the Galois ring".into()))?;
    let teich = |a: RingElem| -> GrElem {
        // Teichmuller rep of a = sum c_j g^j is the unique q-power-fixed lift,
        // reached by iterating x -> x^q from any lift.
        let c = field.coords(a);
        let mut lift = gr.zero();
        let mut g_pow = gr.one();
        for &cj in &c {
            lift = gr.add(&lift, &gr.scale(&g_pow, cj as u64));
            g_pow = gr.mul(&g_pow, &generator);
        }
        gr.pow(&lift, q.pow(n as u32 - 1))
    };
    let phi = |x: Witt| -> Result<GrElem> {
        let mut acc = gr.zero();
        let mut p_pow = 1u64;
        for (i, &xi) in w.coords(x).iter().enumerate() {
            let mut root = xi;
            for _ in 0..i {
                root = field.frobenius_inv(root)?;
            }
            acc = gr.add(&acc, &gr.scale(&teich(root), p_pow));
            p_pow *= gr.p;
        }
        Ok(acc)
    };
    let images: Vec<GrElem> = w.elements().map(phi).collect::<Result<_>>()?;
    let distinct: HashSet<u64> = images.iter().map(|e| gr.index(e)).collect();
    if distinct.len() as u64 != gr.size() || w.size() != gr.size() {
        return Err(Error::Discrepancy("map to the Galois ring is not bijective".into()));
    }
    if images[w.one().0 as usize] != gr.one() {
        return Err(Error::Discrepancy("1 is not mapped to 1".into()));
    }
    for a in w.elements() {
        for b in w.elements() {
            let (ia, ib) = (&images[a.0 as usize], &images[b.0 as usize]);
            if images[w.add(a, b).0 as usize] != gr.add(ia, ib) {
                return Err(Error::Discrepancy(format!("additivity fails at {} + {}", w.format(a), w.format(b))));
            }
            if images[w.mul(a, b).0 as usize] != gr.mul(ia, ib) {
                return Err(Error::Discrepancy(format!("multiplicativity fails at {} * {}", w.format(a), w.format(b))));
            }
        }
    }
    Ok(images.iter().map(|e| gr.index(e)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w2_f2_is_z4() {
        let f2 = FiniteRing::parse("GF(2)").unwrap();
        let images = galois_ring_oracle(&f2, 2).unwrap();
        let w = WittRing::new(&f2, 2).unwrap();
        assert_eq!(images[w.parse("w[0,1]").unwrap().0 as usize], 2);
        let one = images[w.one().0 as usize];
        assert!(one == 1 || one == 3);
    }

    #[test]
    fn small_cases() {
        for spec in ["GF(2)", "GF(3)", "GF(2^2)"] {
            let k = FiniteRing::parse(spec).unwrap();
            for n in 1..=2 {
                galois_ring_oracle(&k, n).unwrap();
            }
        }
    }
}
