//! W_n(R)^m as an explicit finite abelian p-group.
//!
//! Every x in W_n(R) has a unique expansion sum d_{kj} v^k[b_j] with digits
//! d_{kj} in [0, p), where b_j runs over the F_p-basis of R. The generators
//! v^k[b_j] with the relations p e_i = digits(p g_i) present W_n(R) as a
//! quotient of (Z/p^n)^{n dim R}, which turns kernels, images and preimages
//! of additive maps into linear algebra over Z/p^n.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::zpn::{self, Zpe};
use crate::witt::{Witt, WittRing};

/// Presentation of W_n(R)^m.
#[derive(Clone, Debug)]
pub struct AddGroup {
    w: WittRing,
    m: usize,
    /// v^k[b_j] at index k * dim + j
    gens: Vec<Witt>,
    /// digits of every element when the ring is small
    digit_table: Option<Vec<Vec<u8>>>,
}

impl AddGroup {
    pub fn new(w: &WittRing, m: usize) -> Self {
        let r = w.base();
        let dim = r.dim();
        let mut gens = Vec::with_capacity(w.level() * dim);
        for k in 0..w.level() {
            for j in 0..dim {
                gens.push(w.shift_pow(w.teichmuller(r.basis(j)), k));
            }
        }
        let mut g = AddGroup { w: w.clone(), m, gens, digit_table: None };
        if w.size() <= 4096 {
            let table = w.elements().map(|x| g.digits_one(x).into_iter().map(|d| d as u8).collect()).collect();
            g.digit_table = Some(table);
        }
        g
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    /// Number of digits per component.
    pub fn width(&self) -> usize {
        self.gens.len()
    }

    /// Total number of generators, also log_p of the group order.
    pub fn len(&self) -> usize {
        self.m * self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zpe(&self) -> Zpe {
        Zpe::new(self.w.p() as u64, self.w.level() as u32)
    }

    fn digits_one(&self, x: Witt) -> Vec<u64> {
        let w = &self.w;
        let r = w.base();
        let dim = r.dim();
        let mut rest = x;
        let mut out = vec![0; self.gens.len()];
        for k in 0..w.level() {
            let c = r.coords(w.coord(rest, k));
            let mut s = w.zero();
            for (j, &d) in c.iter().enumerate() {
                out[k * dim + j] = d as u64;
                s = w.add(s, w.mul_int(self.gens[k * dim + j], d as i64));
            }
            rest = w.sub(rest, s);
        }
        debug_assert_eq!(rest, w.zero());
        out
    }

    pub fn digits(&self, x: &[Witt]) -> Vec<u64> {
        assert_eq!(x.len(), self.m, "vector length");
        let mut out = Vec::with_capacity(self.len());
        for &xi in x {
            match &self.digit_table {
                Some(t) => out.extend(t[xi.0 as usize].iter().map(|&d| d as u64)),
                None => out.extend(self.digits_one(xi)),
            }
        }
        out
    }

    /// The element sum c_i g_i.
    pub fn combine(&self, coeffs: &[u64]) -> Vec<Witt> {
        let wd = self.width();
        (0..self.m)
            .map(|c| {
                (0..wd).fold(self.w.zero(), |acc, i| {
                    let k = coeffs[c * wd + i];
                    if k == 0 {
                        acc
                    } else {
                        self.w.add(acc, self.w.mul_int(self.gens[i], k as i64))
                    }
                })
            })
            .collect()
    }

    /// The i-th generator as a vector.
    pub fn generator(&self, i: usize) -> Vec<Witt> {
        let wd = self.width();
        let mut v = vec![self.w.zero(); self.m];
        v[i / wd] = self.gens[i % wd];
        v
    }

    /// Relation rows p e_i - digits(p g_i).
    pub fn relations(&self) -> Vec<Vec<u64>> {
        let z = self.zpe();
        let wd = self.width();
        let mut rows = Vec::with_capacity(self.len());
        for c in 0..self.m {
            for i in 0..wd {
                let pg = self.digits_one(self.w.mul_int(self.gens[i], self.w.p() as i64));
                let mut row = vec![0u64; self.len()];
                row[c * wd + i] = z.p;
                for (t, &d) in pg.iter().enumerate() {
                    row[c * wd + t] = z.reduce(row[c * wd + t] as i128 - d as i128);
                }
                rows.push(row);
            }
        }
        rows
    }

    /// log_p of the order of the subgroup generated by `elems`.
    pub fn subgroup_log_order(&self, elems: &[Vec<Witt>]) -> u64 {
        let z = self.zpe();
        let mut rows: Vec<Vec<u64>> = elems.iter().map(|e| self.digits(e)).collect();
        rows.extend(self.relations());
        let n = self.w.level() as u64;
        zpn::span_log_order(&z, &rows, self.len()) - (n - 1) * self.len() as u64
    }
}

/// An additive map W_n(R)^a -> W_n(R)^b.
pub struct AdditiveMap<'a> {
    pub src: &'a AddGroup,
    pub tgt: &'a AddGroup,
    pub f: &'a dyn Fn(&[Witt]) -> Vec<Witt>,
}

impl AdditiveMap<'_> {
    fn image_rows(&self) -> Vec<Vec<u64>> {
        (0..self.src.len()).map(|i| self.tgt.digits(&(self.f)(&self.src.generator(i)))).collect()
    }

    /// Generators of the kernel.
    pub fn kernel(&self) -> Vec<Vec<Witt>> {
        let z = self.tgt.zpe();
        let mut rows = self.image_rows();
        rows.extend(self.tgt.relations());
        let na = self.src.len();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for g in zpn::left_kernel(&z, &rows, self.tgt.len()) {
            let x = self.src.combine(&g[..na]);
            if x.iter().all(|&c| c == self.src.w.zero()) {
                continue;
            }
            debug_assert!((self.f)(&x).iter().all(|&c| c == self.tgt.w.zero()));
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
        out
    }

    /// log_p of the order of the image.
    pub fn image_log_order(&self) -> u64 {
        let z = self.tgt.zpe();
        let mut rows = self.image_rows();
        rows.extend(self.tgt.relations());
        let n = self.tgt.w.level() as u64;
        zpn::span_log_order(&z, &rows, self.tgt.len()) - (n - 1) * self.tgt.len() as u64
    }

    pub fn kernel_log_order(&self) -> u64 {
        self.src.len() as u64 - self.image_log_order()
    }

    /// Some x with f(x) = t.
    pub fn preimage(&self, t: &[Witt]) -> Option<Vec<Witt>> {
        let z = self.tgt.zpe();
        let mut rows = self.image_rows();
        rows.extend(self.tgt.relations());
        let x = zpn::solve_left(&z, &rows, &self.tgt.digits(t), self.tgt.len())?;
        let sol = self.src.combine(&x[..self.src.len()]);
        ((self.f)(&sol) == t).then_some(sol)
    }
}

/// All elements of the subgroup generated by `gens`, in sorted order.
pub fn enumerate_subgroup(w: &WittRing, len: usize, gens: &[Vec<Witt>], limit: usize) -> Result<Vec<Vec<Witt>>> {
    let zero = vec![w.zero(); len];
    let mut seen: HashSet<Vec<Witt>> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y: Vec<Witt> = x.iter().zip(g).map(|(&a, &b)| w.add(a, b)).collect();
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return Err(Error::GuardExceeded(format!("subgroup has more than {limit} elements")));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::FiniteRing;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    #[test]
    fn digits_round_trip() {
        for (spec, n) in [("GF(2)", 3), ("GF(2^2)", 2), ("GF(2)[x]/x^3", 2), ("GF(3)", 2)] {
            let w = wr(spec, n);
            let g = AddGroup::new(&w, 1);
            let mut seen = HashSet::new();
            for x in w.elements() {
                let d = g.digits(&[x]);
                assert!(d.iter().all(|&c| c < w.p() as u64));
                assert_eq!(g.combine(&d), vec![x]);
                assert!(seen.insert(d));
            }
            assert_eq!(g.subgroup_log_order(&[]), 0);
            assert_eq!(g.subgroup_log_order(&[vec![w.one()]]), n as u64);
        }
    }

    #[test]
    fn kernel_of_multiplication_by_p() {
        let w = wr("GF(2)[x]/x^3", 2);
        let g = AddGroup::new(&w, 1);
        let f = |x: &[Witt]| vec![w.mul_p(x[0])];
        let map = AdditiveMap { src: &g, tgt: &g, f: &f };
        // p x = (0, x_0^2): kernel = {x : x_0^2 = 0}, x_0 in (x^2) has 2 choices... x_0 in {0, x^2, x, x+x^2}
        let expected = w.elements().filter(|&x| w.mul_p(x) == w.zero()).count();
        let ker = enumerate_subgroup(&w, 1, &map.kernel(), 1 << 20).unwrap();
        assert_eq!(ker.len(), expected);
        assert_eq!(1u64 << map.kernel_log_order(), expected as u64);
        let t = vec![w.mul_p(w.one())];
        let pre = map.preimage(&t).unwrap();
        assert_eq!(f(&pre), t);
        assert!(map.preimage(&[w.one()]).is_none());
    }
}
