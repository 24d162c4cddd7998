//! Morphisms of truncated displays in normal representation.
//!
//! A morphism from (L1 + T1, M1) to (L2 + T2, M2) is given by blocks
//! A: L1 -> L2, B: T1 -> L2, C: L1 -> I (x) T2 (stored through f_1) and
//! D: T1 -> T2. On P it acts by [[A, B], [i(C), D]]; on the F_1-coordinates
//! (f(l), z) of Q it acts by [[f(A), p f(B)], [C, f(D)]]. The morphism
//! condition is g_P M1 = M2 g_Q.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::additive::{enumerate_subgroup, AddGroup, AdditiveMap};
use crate::linalg::Matrix;
use crate::witt::{Witt, WittRing};

use super::{sigma, TruncatedDisplay};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisplayHom {
    w: WittRing,
    pub a: Matrix<Witt>,
    pub b: Matrix<Witt>,
    pub c: Matrix<Witt>,
    pub d: Matrix<Witt>,
}

impl DisplayHom {
    /// Blocks with shapes (l2 x l1), (l2 x d1), (d2 x l1), (d2 x d1).
    pub fn new(w: &WittRing, a: Matrix<Witt>, b: Matrix<Witt>, c: Matrix<Witt>, d: Matrix<Witt>) -> Result<Self> {
        let ok = a.rows() == b.rows() && c.rows() == d.rows() && a.cols() == c.cols() && b.cols() == d.cols();
        if !ok {
            return Err(Error::ShapeMismatch("morphism blocks".into()));
        }
        Ok(DisplayHom { w: w.clone(), a, b, c, d })
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn identity(disp: &TruncatedDisplay) -> Self {
        let w = disp.witt();
        let (l, d) = (disp.dim_l(), disp.dim_t());
        DisplayHom {
            w: w.clone(),
            a: Matrix::identity(w, l),
            b: Matrix::zeros(w, l, d),
            c: Matrix::zeros(w, d, l),
            d: Matrix::identity(w, d),
        }
    }

    /// Splits a P-matrix and its Q-twist back into blocks.
    fn from_parts(w: &WittRing, gp: &Matrix<Witt>, gq: &Matrix<Witt>, l1: usize, l2: usize) -> Self {
        let (h2, h1) = (gp.rows(), gp.cols());
        DisplayHom {
            w: w.clone(),
            a: gp.submatrix(0..l2, 0..l1),
            b: gp.submatrix(0..l2, l1..h1),
            c: gq.submatrix(l2..h2, 0..l1),
            d: gp.submatrix(l2..h2, l1..h1),
        }
    }

    fn source_split(&self) -> (usize, usize) {
        (self.a.cols(), self.b.cols())
    }

    fn target_split(&self) -> (usize, usize) {
        (self.a.rows(), self.c.rows())
    }

    /// The induced map on P.
    pub fn g_p(&self) -> Matrix<Witt> {
        let w = &self.w;
        let ic = self.c.map(|x| w.shift(x));
        Matrix::blocks(&self.a, &self.b, &ic, &self.d)
    }

    /// The induced map on Q in F_1-coordinates.
    pub fn g_q(&self) -> Matrix<Witt> {
        let w = &self.w;
        let pb = sigma(w, &self.b).map(|x| w.mul_p(x));
        Matrix::blocks(&sigma(w, &self.a), &pb, &self.c, &sigma(w, &self.d))
    }

    pub fn is_hom(&self, src: &TruncatedDisplay, tgt: &TruncatedDisplay) -> bool {
        if self.source_split() != (src.dim_l(), src.dim_t()) || self.target_split() != (tgt.dim_l(), tgt.dim_t()) {
            return false;
        }
        let w = &self.w;
        self.g_p().mul(w, src.matrix()) == tgt.matrix().mul(w, &self.g_q())
    }

    /// Invertible on Coker(iota) and Coker(epsilon): the residues of A and D
    /// are invertible.
    pub fn is_iso(&self) -> bool {
        let w = &self.w;
        let (l1, d1) = self.source_split();
        (l1, d1) == self.target_split() && self.a.is_invertible(w) && self.d.is_invertible(w)
    }

    /// self after other.
    pub fn compose(&self, other: &DisplayHom) -> Result<Self> {
        if other.target_split() != self.source_split() {
            return Err(Error::ShapeMismatch("composable morphisms".into()));
        }
        let w = &self.w;
        let gp = self.g_p().mul(w, &other.g_p());
        let gq = self.g_q().mul(w, &other.g_q());
        Ok(DisplayHom::from_parts(w, &gp, &gq, other.source_split().0, self.target_split().0))
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_iso() {
            return Err(Error::NotInvertible);
        }
        let w = &self.w;
        let gp = self.g_p().inverse(w)?;
        let gq = self.g_q().inverse(w)?;
        let l = self.a.rows();
        Ok(DisplayHom::from_parts(w, &gp, &gq, l, l))
    }

    fn to_vec(&self) -> Vec<Witt> {
        [&self.a, &self.b, &self.c, &self.d].iter().flat_map(|m| m.data().to_vec()).collect()
    }

    fn from_vec(w: &WittRing, v: &[Witt], (l1, d1): (usize, usize), (l2, d2): (usize, usize)) -> Self {
        let mut it = v.iter().copied();
        let mut take = |r: usize, c: usize| Matrix::new(r, c, it.by_ref().take(r * c).collect());
        let a = take(l2, l1);
        let b = take(l2, d1);
        let c = take(d2, l1);
        let d = take(d2, d1);
        DisplayHom { w: w.clone(), a, b, c, d }
    }
}

fn check_compatible(d1: &TruncatedDisplay, d2: &TruncatedDisplay) -> Result<()> {
    if d1.witt() != d2.witt() {
        if d1.level() != d2.level() {
            return Err(Error::LevelMismatch(d1.level(), d2.level()));
        }
        return Err(Error::RingMismatch);
    }
    Ok(())
}

/// Generators of Hom(D1, D2) as an abelian group (over Z/p^n).
pub fn hom_displays(d1: &TruncatedDisplay, d2: &TruncatedDisplay) -> Result<Vec<DisplayHom>> {
    check_compatible(d1, d2)?;
    let w = d1.witt();
    let (s, t) = ((d1.dim_l(), d1.dim_t()), (d2.dim_l(), d2.dim_t()));
    let len = d1.rank() * d2.rank();
    let group = AddGroup::new(w, len);
    let f = |v: &[Witt]| -> Vec<Witt> {
        let g = DisplayHom::from_vec(w, v, s, t);
        let lhs = g.g_p().mul(w, d1.matrix());
        let rhs = d2.matrix().mul(w, &g.g_q());
        lhs.sub(w, &rhs).data().to_vec()
    };
    let map = AdditiveMap { src: &group, tgt: &group, f: &f };
    Ok(map.kernel().iter().map(|v| DisplayHom::from_vec(w, v, s, t)).collect())
}

/// log_p |Hom(D1, D2)|.
pub fn hom_log_order(d1: &TruncatedDisplay, d2: &TruncatedDisplay) -> Result<u64> {
    check_compatible(d1, d2)?;
    let w = d1.witt();
    let gens: Vec<Vec<Witt>> = hom_displays(d1, d2)?.iter().map(|g| g.to_vec()).collect();
    Ok(AddGroup::new(w, d1.rank() * d2.rank()).subgroup_log_order(&gens))
}

/// An isomorphism D1 -> D2 if one exists. The Hom group is enumerated when it
/// has at most `guard` elements and the lexicographically first isomorphism
/// is returned; otherwise `guard` seeded random elements are tried and
/// GuardExceeded is reported if none is an isomorphism.
pub fn isom_displays(d1: &TruncatedDisplay, d2: &TruncatedDisplay, guard: usize) -> Result<Option<DisplayHom>> {
    check_compatible(d1, d2)?;
    if d1.rank() != d2.rank() || d1.dim_t() != d2.dim_t() {
        return Ok(None);
    }
    if d1 == d2 {
        return Ok(Some(DisplayHom::identity(d1)));
    }
    let w = d1.witt();
    let split = (d1.dim_l(), d1.dim_t());
    let gens: Vec<Vec<Witt>> = hom_displays(d1, d2)?.iter().map(|g| g.to_vec()).collect();
    let len = d1.rank() * d1.rank();
    match enumerate_subgroup(w, len, &gens, guard) {
        Ok(elems) => Ok(elems.iter().map(|v| DisplayHom::from_vec(w, v, split, split)).find(|g| g.is_iso())),
        Err(Error::GuardExceeded(_)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let order = w.size().min(u32::MAX as u64) as u32;
            for _ in 0..guard {
                let mut v = vec![w.zero(); len];
                for g in &gens {
                    let k = w.from_int(rng.gen_range(0..order) as i64);
                    v = v.iter().zip(g).map(|(&x, &y)| w.add(x, w.mul(k, y))).collect();
                }
                let g = DisplayHom::from_vec(w, &v, split, split);
                if g.is_iso() && g.is_hom(d1, d2) {
                    return Ok(Some(g));
                }
            }
            Err(Error::GuardExceeded(format!("no isomorphism among {guard} random morphisms")))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::FiniteRing;
    use rand::SeedableRng;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    #[test]
    fn etale_to_multiplicative_is_zero() {
        for spec in ["GF(2)", "GF(2^2)", "GF(2)[x]/x^3"] {
            for n in 1..=3 {
                let w = wr(spec, n);
                let e = TruncatedDisplay::etale_unit(&w);
                let m = TruncatedDisplay::mult_unit(&w);
                assert!(hom_displays(&e, &m).unwrap().is_empty());
                assert_eq!(hom_log_order(&e, &m).unwrap(), 0);
                assert_eq!(hom_log_order(&m, &e).unwrap(), 0);
                if spec != "GF(2)[x]/x^3" {
                    assert_eq!(hom_log_order(&e, &e).unwrap(), n as u64);
                    assert_eq!(hom_log_order(&m, &m).unwrap(), n as u64);
                }
            }
        }
    }

    #[test]
    fn homs_verify_and_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = wr("GF(2)", 2);
        for _ in 0..5 {
            let d1 = TruncatedDisplay::random(&w, 2, 1, &mut rng);
            let d2 = TruncatedDisplay::random(&w, 2, 1, &mut rng);
            let d3 = TruncatedDisplay::random(&w, 1, 0, &mut rng);
            let h12 = hom_displays(&d1, &d2).unwrap();
            let h23 = hom_displays(&d2, &d3).unwrap();
            for g in &h12 {
                assert!(g.is_hom(&d1, &d2));
                for k in &h23 {
                    assert!(k.compose(g).unwrap().is_hom(&d1, &d3));
                }
            }
        }
    }

    #[test]
    fn isomorphism_and_inverse() {
        let w = wr("GF(2)", 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = TruncatedDisplay::random(&w, 2, 1, &mut rng);
        assert_eq!(isom_displays(&d, &d, 100).unwrap(), Some(DisplayHom::identity(&d)));
        let e = TruncatedDisplay::etale_unit(&w);
        let m = TruncatedDisplay::mult_unit(&w);
        assert_eq!(isom_displays(&e, &m, 100).unwrap(), None);
        let sum = e.direct_sum(&m).unwrap();
        for _ in 0..5 {
            let other = TruncatedDisplay::random(&w, 2, 1, &mut rng);
            if let Some(g) = isom_displays(&sum, &other, 1000).unwrap() {
                assert!(g.is_hom(&sum, &other));
                let inv = g.inverse().unwrap();
                assert!(inv.is_hom(&other, &sum));
                assert_eq!(inv.compose(&g).unwrap(), DisplayHom::identity(&sum));
            }
        }
    }
}
