//! Cokernels of isogenies between Dieudonne modules at working precision n.
//!
//! A map u: N0 -> N1 is a matrix U with U A0 = A1 f(U) and f(U) X0 = X1 U.
//! Over W_n(k) with k perfect, U = R^{-1} diag(p^e_i) C^{-1}; the cokernel is
//! the sum of the W_n(k)/p^e_i, and u counts as injective when every e_i < n.

use std::collections::HashMap;

use super::DieudonneModule;
use crate::display::{sigma, sigma_inv};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::witt::{Witt, WittRing};

const ELEMENT_LIMIT: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyCokernel {
    /// log_p of the order.
    pub log_order: u64,
    /// Exponents k of the cyclic factors Z/p^k, decreasing.
    pub invariants: Vec<u32>,
    /// Coordinates of the elements after the row transform, in
    /// lexicographic order; index 0 is zero.
    pub elements: Vec<Vec<Witt>>,
    pub f_table: Vec<usize>,
    pub v_table: Vec<usize>,
}

impl IsogenyCokernel {
    pub fn order(&self, p: u64) -> u64 {
        p.pow(self.log_order as u32)
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariants.len() <= 1
    }

    /// F is bijective on the cokernel.
    pub fn f_is_bijective(&self) -> bool {
        let mut seen = vec![false; self.f_table.len()];
        self.f_table.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
    }

    pub fn v_is_zero(&self) -> bool {
        self.v_table.iter().all(|&i| i == 0)
    }
}

/// a = p^v f^{-v}(b) with b a unit, for a of valuation v < n.
fn split_valuation(w: &WittRing, a: Witt) -> (usize, Witt) {
    let v = w.valuation(a);
    let q = w.base().size() as u32;
    let n = w.level();
    let shifted = Witt((a.0 as u64 * (q as u64).pow(v as u32) % (q as u64).pow(n as u32)) as u32);
    let mut b = shifted;
    for _ in 0..v {
        b = w.frobenius_inv(b).expect("perfect field");
    }
    (v, b)
}

/// f with f x = y, given val(y) >= val(x).
fn divide(w: &WittRing, y: Witt, x: Witt) -> Witt {
    let (v, ux) = split_valuation(w, x);
    let (vy, uy) = split_valuation(w, y);
    if vy >= w.level() {
        return w.zero();
    }
    let f = w.mul_p_pow(w.mul(uy, w.inv(ux).expect("unit")), vy - v);
    debug_assert_eq!(w.mul(f, x), y);
    f
}

/// R, C invertible and exponents e with R U C = diag(p^e_i); e_i = n marks a
/// zero diagonal entry.
fn witt_smith(w: &WittRing, u: &Matrix<Witt>) -> (Matrix<Witt>, Matrix<Witt>, Vec<usize>) {
    let n = w.level();
    let (rows, cols) = (u.rows(), u.cols());
    let mut d = u.clone();
    let mut r = Matrix::identity(w, rows);
    let mut c = Matrix::identity(w, cols);
    let mut exps = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let v = w.valuation(d.get(i, j));
                if v < n && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            exps.extend(std::iter::repeat_n(n, rows.min(cols) - t));
            break;
        };
        for m in [&mut d, &mut r] {
            for j in 0..m.cols() {
                let (a, b) = (m.get(t, j), m.get(pi, j));
                m.set(t, j, b);
                m.set(pi, j, a);
            }
        }
        for m in [&mut d, &mut c] {
            for i in 0..m.rows() {
                let (a, b) = (m.get(i, t), m.get(i, pj));
                m.set(i, t, b);
                m.set(i, pj, a);
            }
        }
        let x = d.get(t, t);
        for i in (0..rows).filter(|&i| i != t) {
            let f = divide(w, d.get(i, t), x);
            for m in [&mut d, &mut r] {
                for j in 0..m.cols() {
                    let val = w.sub(m.get(i, j), w.mul(f, m.get(t, j)));
                    m.set(i, j, val);
                }
            }
        }
        for j in (0..cols).filter(|&j| j != t) {
            let f = divide(w, d.get(t, j), x);
            for m in [&mut d, &mut c] {
                for i in 0..m.rows() {
                    let val = w.sub(m.get(i, j), w.mul(f, m.get(i, t)));
                    m.set(i, j, val);
                }
            }
        }
        let (_, unit) = split_valuation(w, x);
        let s = w.inv(unit).expect("unit");
        for m in [&mut d, &mut r] {
            for j in 0..m.cols() {
                let val = w.mul(s, m.get(t, j));
                m.set(t, j, val);
            }
        }
        exps.push(v);
    }
    (r, c, exps)
}

/// Keeps the first e Witt coordinates.
fn truncate_coords(w: &WittRing, a: Witt, e: usize) -> Witt {
    let q = w.base().size();
    let scale = q.pow((w.level() - e) as u32);
    Witt(((a.0 as u64 / scale) * scale) as u32)
}

/// The cokernel of u: N0 -> N1 with its induced F and V.
pub fn isogeny_cokernel(n0: &DieudonneModule, n1: &DieudonneModule, u: &Matrix<Witt>) -> Result<IsogenyCokernel> {
    let w = n0.witt();
    if w != n1.witt() {
        return Err(Error::RingMismatch);
    }
    let (h0, h1) = (n0.rank(), n1.rank());
    if u.rows() != h1 || u.cols() != h0 {
        return Err(Error::ShapeMismatch(format!("map must be {h1}x{h0}")));
    }
    if h0 != h1 {
        return Err(Error::ShapeMismatch("an isogeny needs equal ranks".into()));
    }
    let fu = sigma(w, u);
    if u.mul(w, n0.f_matrix()) != n1.f_matrix().mul(w, &fu) {
        return Err(Error::NotHomomorphism("u does not commute with F".into()));
    }
    if fu.mul(w, n0.v_matrix()) != n1.v_matrix().mul(w, u) {
        return Err(Error::NotHomomorphism("u does not commute with V".into()));
    }
    let (r, _, exps) = witt_smith(w, u);
    if exps.iter().any(|&e| e >= w.level()) {
        return Err(Error::NotInjective);
    }
    let rinv = r.inverse(w)?;
    let deg = w.base().field_degree().ok_or(Error::NotAField)? as u64;
    let log_order = deg * exps.iter().map(|&e| e as u64).sum::<u64>();
    let q = w.base().size() as usize;
    let count: usize = exps.iter().map(|&e| q.pow(e as u32)).product();
    if count > ELEMENT_LIMIT {
        return Err(Error::GuardExceeded(format!("cokernel has {count} elements")));
    }
    let key = |y: &[Witt]| -> Vec<Witt> {
        r.mul_vec(w, y).into_iter().zip(&exps).map(|(c, &e)| truncate_coords(w, c, e)).collect()
    };
    let mut elements: Vec<Vec<Witt>> = vec![Vec::new()];
    for &e in &exps {
        let choices: Vec<Witt> = {
            let mut v: Vec<Witt> = w.elements().filter(|&x| truncate_coords(w, x, e) == x).collect();
            v.sort();
            v
        };
        elements = elements
            .iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut next = prefix.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    let index: HashMap<Vec<Witt>, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let lift = |c: &[Witt]| rinv.mul_vec(w, c);
    let xinv = sigma_inv(w, n1.v_matrix())?;
    let mut f_table = Vec::with_capacity(elements.len());
    let mut v_table = Vec::with_capacity(elements.len());
    for c in &elements {
        let y = lift(c);
        let fy = n1.apply_f(&y);
        let vy: Vec<Witt> = xinv.mul_vec(w, &y.iter().map(|&t| w.frobenius_inv(t)).collect::<Result<Vec<_>>>()?);
        f_table.push(index[&key(&fy)]);
        v_table.push(index[&key(&vy)]);
    }
    for (i, c) in elements.iter().enumerate() {
        let py: Vec<Witt> = lift(c).into_iter().map(|t| w.mul_p(t)).collect();
        let p_idx = index[&key(&py)];
        if f_table[v_table[i]] != p_idx || v_table[f_table[i]] != p_idx {
            return Err(Error::DieudonneRelation("FV = VF = p fails on the cokernel".into()));
        }
    }
    let mut invariants: Vec<u32> =
        exps.iter().filter(|&&e| e > 0).flat_map(|&e| std::iter::repeat_n(e as u32, deg as usize)).collect();
    invariants.sort_unstable_by(|a, b| b.cmp(a));
    Ok(IsogenyCokernel { log_order, invariants, elements, f_table, v_table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display::TruncatedDisplay;
    use crate::ring::FiniteRing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    fn scalar(w: &WittRing, k: i64) -> Matrix<Witt> {
        Matrix::identity(w, 1).scale(w, w.from_int(k))
    }

    #[test]
    fn multiplication_by_p_on_rank_one() {
        let w = wr("GF(2)", 3);
        let m = DieudonneModule::from_display(&TruncatedDisplay::mult_unit(&w)).unwrap();
        let c = isogeny_cokernel(&m, &m, &scalar(&w, 2)).unwrap();
        assert_eq!(c.order(2), 2);
        assert!(c.f_is_bijective());
        assert!(c.v_is_zero());
        let e = DieudonneModule::from_display(&TruncatedDisplay::etale_unit(&w)).unwrap();
        let c = isogeny_cokernel(&e, &e, &scalar(&w, 2)).unwrap();
        assert_eq!(c.order(2), 2);
        assert!(!c.f_is_bijective());
    }

    #[test]
    fn identity_and_p_squared() {
        let w = wr("GF(2)", 3);
        let e = DieudonneModule::from_display(&TruncatedDisplay::etale_unit(&w)).unwrap();
        let c = isogeny_cokernel(&e, &e, &scalar(&w, 1)).unwrap();
        assert_eq!((c.log_order, c.elements.len()), (0, 1));
        let c = isogeny_cokernel(&e, &e, &scalar(&w, 4)).unwrap();
        assert_eq!(c.order(2), 4);
        assert!(c.is_cyclic());
        assert_eq!(c.invariants, vec![2]);
        assert_eq!(isogeny_cokernel(&e, &e, &scalar(&w, 8)), Err(Error::NotInjective));
    }

    #[test]
    fn non_morphism_rejected() {
        let w = wr("GF(2)", 2);
        let e = DieudonneModule::from_display(&TruncatedDisplay::etale_unit(&w)).unwrap();
        let m = DieudonneModule::from_display(&TruncatedDisplay::mult_unit(&w)).unwrap();
        assert!(matches!(isogeny_cokernel(&e, &m, &scalar(&w, 1)), Err(Error::NotHomomorphism(_))));
    }

    #[test]
    fn smith_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = wr("GF(2^2)", 2);
        for _ in 0..20 {
            let u = Matrix::from_fn(3, 3, |_, _| Witt(rand::Rng::gen_range(&mut rng, 0..w.size() as u32)));
            let (r, c, exps) = witt_smith(&w, &u);
            let d = r.mul(&w, &u).mul(&w, &c);
            for (i, &e) in exps.iter().enumerate() {
                for j in 0..3 {
                    let expected = if i == j && e < 2 { w.mul_p_pow(w.one(), e) } else { w.zero() };
                    assert_eq!(d.get(i, j), expected);
                }
            }
        }
    }

    #[test]
    fn p_on_random_module() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = wr("GF(2)", 2);
        let module = DieudonneModule::from_display(&TruncatedDisplay::random(&w, 2, 1, &mut rng)).unwrap();
        let c = isogeny_cokernel(&module, &module, &Matrix::identity(&w, 2).scale(&w, w.from_int(2))).unwrap();
        assert_eq!(c.log_order, 2);
        assert_eq!(c.invariants, vec![1, 1]);
    }
}
