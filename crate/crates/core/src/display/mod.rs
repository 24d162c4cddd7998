//! Truncated displays in normal representation.
//!
//! A display of level n, rank h and type d over R is stored as an invertible
//! h x h matrix M over W_n(R). With P = L + T (L of rank h - d first) and
//! Q = L + I_{n+1} (x) T, the operators are
//! F_1(l, a) = M (f(l), f_1(a)) and F(x) = M Delta f(x), where Delta scales the
//! L-block by p. Elements of I_{n+1} (x) T are carried through f_1, so Q is
//! coordinatised as W_n^h with the ideal part stored as z = f_1(a).

pub mod hom;
pub mod pair;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{field_rank, Matrix};
use crate::ring::{FiniteRing, RingHom, RingSpec};
use crate::witt::{Witt, WittRing};

pub use hom::{hom_displays, hom_log_order, isom_displays, DisplayHom};
pub use pair::{NormalDecomposition, PreDisplay, PresentedPair};

pub const DISPLAY_SCHEMA: &str = "truncdisp/display/v1";

/// Entrywise Frobenius of a matrix over W_n(R).
pub fn sigma(w: &WittRing, m: &Matrix<Witt>) -> Matrix<Witt> {
    m.map(|x| w.frobenius(x))
}

pub fn sigma_pow(w: &WittRing, m: &Matrix<Witt>, k: u32) -> Matrix<Witt> {
    m.map(|x| w.frobenius_iter(x, k))
}

/// Entrywise inverse Frobenius (perfect base rings only).
pub fn sigma_inv(w: &WittRing, m: &Matrix<Witt>) -> Result<Matrix<Witt>> {
    let data = m.data().iter().map(|&x| w.frobenius_inv(x)).collect::<Result<_>>()?;
    Ok(Matrix::new(m.rows(), m.cols(), data))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedDisplay {
    w: WittRing,
    h: usize,
    d: usize,
    m: Matrix<Witt>,
}

impl TruncatedDisplay {
    pub fn from_matrix(w: &WittRing, d: usize, m: Matrix<Witt>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch(format!("structure matrix is {}x{}", m.rows(), m.cols())));
        }
        let h = m.rows();
        if d > h {
            return Err(Error::ShapeMismatch(format!("type {d} exceeds rank {h}")));
        }
        if !m.is_invertible(w) {
            return Err(Error::NotInvertible);
        }
        Ok(TruncatedDisplay { w: w.clone(), h, d, m })
    }

    /// The rank-1 display with F_1 = f and F = p f on P = Q = W_n(R).
    pub fn etale_unit(w: &WittRing) -> Self {
        TruncatedDisplay { w: w.clone(), h: 1, d: 0, m: Matrix::identity(w, 1) }
    }

    /// The rank-1 display with Q = I_{n+1}, F_1 = f_1 and F = f.
    pub fn mult_unit(w: &WittRing) -> Self {
        TruncatedDisplay { w: w.clone(), h: 1, d: 1, m: Matrix::identity(w, 1) }
    }

    /// A uniformly random display of the given rank and type.
    pub fn random(w: &WittRing, h: usize, d: usize, rng: &mut impl Rng) -> Self {
        loop {
            let m = Matrix::from_fn(h, h, |_, _| Witt(rng.gen_range(0..w.size() as u32)));
            if let Ok(disp) = TruncatedDisplay::from_matrix(w, d, m) {
                return disp;
            }
        }
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn ring(&self) -> &FiniteRing {
        self.w.base()
    }

    pub fn level(&self) -> usize {
        self.w.level()
    }

    pub fn rank(&self) -> usize {
        self.h
    }

    /// Rank of T.
    pub fn dim_t(&self) -> usize {
        self.d
    }

    /// Rank of L.
    pub fn dim_l(&self) -> usize {
        self.h - self.d
    }

    pub fn matrix(&self) -> &Matrix<Witt> {
        &self.m
    }

    fn scaled_identity(&self, scale_l: bool) -> Matrix<Witt> {
        let w = &self.w;
        let p = w.from_int(w.p() as i64);
        let diag: Vec<Witt> = (0..self.h).map(|i| if (i < self.dim_l()) == scale_l { p } else { w.one() }).collect();
        Matrix::diagonal(w, &diag)
    }

    /// diag(p on L, 1 on T).
    pub fn delta(&self) -> Matrix<Witt> {
        self.scaled_identity(true)
    }

    /// diag(1 on L, p on T).
    pub fn delta_dual(&self) -> Matrix<Witt> {
        self.scaled_identity(false)
    }

    /// Matrix of the linearisation F#: P^(1) -> P.
    pub fn fsharp(&self) -> Matrix<Witt> {
        self.m.mul(&self.w, &self.delta())
    }

    /// Matrix of V#: P -> P^(1), the unique linear map with V#(F_1 x) = 1 (x) x.
    pub fn vsharp(&self) -> Matrix<Witt> {
        let inv = self.m.inverse(&self.w).expect("structure matrix is invertible");
        self.delta_dual().mul(&self.w, &inv)
    }

    /// F on P.
    pub fn apply_f(&self, x: &[Witt]) -> Vec<Witt> {
        let fx: Vec<Witt> = x.iter().map(|&c| self.w.frobenius(c)).collect();
        self.fsharp().mul_vec(&self.w, &fx)
    }

    /// F_1 on Q; `q` holds (l, z) with the ideal part given by z = f_1(a).
    pub fn apply_f1(&self, q: &[Witt]) -> Vec<Witt> {
        let w = &self.w;
        let v: Vec<Witt> =
            q.iter().enumerate().map(|(i, &c)| if i < self.dim_l() { w.frobenius(c) } else { c }).collect();
        self.m.mul_vec(w, &v)
    }

    /// iota: Q -> P; on the ideal part i(v(z)) is the shift of z.
    pub fn apply_iota(&self, q: &[Witt]) -> Vec<Witt> {
        q.iter().enumerate().map(|(i, &c)| if i < self.dim_l() { c } else { self.w.shift(c) }).collect()
    }

    /// The pre-display data on the canonical pair.
    pub fn to_predisplay(&self) -> Result<PreDisplay> {
        let w = &self.w;
        let pair = PresentedPair::canonical(w, self.h, self.d)?;
        let l: Vec<usize> = (0..self.dim_l()).collect();
        let t: Vec<usize> = (self.dim_l()..self.h).collect();
        PreDisplay::new(pair, self.fsharp(), self.m.select_cols(&l), self.m.select_cols(&t))
    }

    /// Checks F iota = p F_1 and F_1 epsilon = f_1 (x) F on generators.
    pub fn check_axioms(&self) -> Result<()> {
        self.to_predisplay()?.check_axioms()
    }

    /// Checks V#(F_1 q) = 1 (x) iota(q) on Q (exhaustively when |Q| <= 4096,
    /// on additive generators otherwise) and F# V# = V# F# = p.
    pub fn check_vsharp(&self) -> Result<()> {
        let w = &self.w;
        let v = self.vsharp();
        let check = |q: &[Witt]| -> Result<()> {
            let lhs = v.mul_vec(w, &self.apply_f1(q));
            let rhs: Vec<Witt> = self.apply_iota(q).into_iter().map(|c| w.frobenius(c)).collect();
            if lhs != rhs {
                return Err(Error::AxiomViolation(format!("V#(F_1 q) != 1 (x) q at q = {}", self.format_vec(q))));
            }
            Ok(())
        };
        let exhaustive = (w.size() as f64).powi(self.h as i32) <= 4096.0;
        if exhaustive {
            let mut q = vec![w.zero(); self.h];
            loop {
                check(&q)?;
                if !increment(&mut q, w.size() as u32) {
                    break;
                }
            }
        } else {
            let g = crate::linalg::additive::AddGroup::new(w, self.h);
            for i in 0..g.len() {
                check(&g.generator(i))?;
            }
        }
        let p = Matrix::identity(w, self.h).scale(w, w.from_int(w.p() as i64));
        let f = self.fsharp();
        if f.mul(w, &v) != p || v.mul(w, &f) != p {
            return Err(Error::AxiomViolation("F# V# = V# F# = p fails".into()));
        }
        Ok(())
    }

    fn format_vec(&self, v: &[Witt]) -> String {
        let parts: Vec<String> = v.iter().map(|&x| self.w.format(x)).collect();
        format!("({})", parts.join(", "))
    }

    /// Nilpotence: on every residue field k the twisted h-fold composite of
    /// the residue of V# vanishes.
    pub fn is_nilpotent(&self) -> bool {
        let v = self.vsharp();
        let r = self.ring();
        for (k, pi) in r.residue_fields() {
            let vbar = v.map(|x| pi.apply(self.w.residue(x)));
            let mut acc = vbar.clone();
            let mut twisted = vbar.clone();
            for _ in 1..self.h {
                twisted = twisted.map(|x| k.frobenius(x));
                acc = twisted.mul(&k, &acc);
            }
            if !acc.is_zero(&k) {
                return false;
            }
        }
        true
    }

    /// Truncation to level m <= n.
    pub fn truncate_to(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.level() {
            return Err(Error::LevelMismatch(m, self.level()));
        }
        let wm = WittRing::new(self.ring(), m)?;
        let mat = self.m.map(|x| self.w.restrict_to(x, m));
        Ok(TruncatedDisplay { w: wm, h: self.h, d: self.d, m: mat })
    }

    pub fn truncate(&self) -> Result<Self> {
        self.truncate_to(self.level() - 1)
    }

    /// Base change along a ring homomorphism.
    pub fn base_change(&self, alpha: &RingHom) -> Result<Self> {
        if alpha.source() != self.ring() {
            return Err(Error::RingMismatch);
        }
        let w2 = WittRing::new(alpha.target(), self.level())?;
        let mat = self.m.map(|x| self.w.map(x, alpha, &w2));
        TruncatedDisplay::from_matrix(&w2, self.d, mat)
    }

    /// Block sum with L-blocks first, then T-blocks.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.w != other.w {
            return Err(Error::RingMismatch);
        }
        let w = &self.w;
        let block = Matrix::block_diag(w, &self.m, &other.m);
        let (l1, l2) = (self.dim_l(), other.dim_l());
        let h1 = self.h;
        let mut perm: Vec<usize> = (0..l1).collect();
        perm.extend(h1..h1 + l2);
        perm.extend(l1..h1);
        perm.extend(h1 + l2..h1 + other.h);
        let m = Matrix::from_fn(perm.len(), perm.len(), |i, j| block.get(perm[i], perm[j]));
        TruncatedDisplay::from_matrix(w, self.d + other.d, m)
    }

    /// Canonical representative of M under M_L -> M_L + M_T Y with Y
    /// supported in the last Witt coordinate (these are isomorphic displays
    /// with the same Dieudonne module). Over a field, the first d rows where
    /// f^{n-1} of the residue of M_T is independent get last coordinate zero
    /// in the L-columns.
    pub fn gauge_fixed(&self) -> Result<Self> {
        let k = self.ring();
        if k.field_degree().is_none() {
            return Err(Error::NotAField);
        }
        let w = &self.w;
        let (l, d, n) = (self.dim_l(), self.d, self.level());
        if l == 0 || d == 0 {
            return Ok(self.clone());
        }
        let mt = self.m.submatrix(0..self.h, l..self.h);
        let nmat = mt.map(|x| k.frobenius_iter(w.residue(x), n as u32 - 1));
        let mut rows: Vec<usize> = Vec::new();
        for i in 0..self.h {
            let mut trial = rows.clone();
            trial.push(i);
            if field_rank(k, &nmat.select_rows(&trial)) == trial.len() {
                rows = trial;
            }
        }
        let lam = Matrix::from_fn(d, l, |i, j| k.neg(w.coord(self.m.get(rows[i], j), n - 1)));
        let c = nmat.select_rows(&rows).inverse(k)?.mul(k, &lam);
        let y = c.map(|x| w.last_coordinate(x));
        let ml = self.m.submatrix(0..self.h, 0..l).add(w, &mt.mul(w, &y));
        let m = ml.hstack(&mt);
        debug_assert!(rows.iter().all(|&i| (0..l).all(|j| w.coord(m.get(i, j), n - 1) == k.zero())));
        TruncatedDisplay::from_matrix(w, d, m)
    }

    pub fn to_file(&self) -> DisplayFile {
        DisplayFile {
            schema: DISPLAY_SCHEMA.into(),
            ring: self.ring().spec().to_string(),
            ring_spec: Some(self.ring().spec().clone()),
            n: self.level(),
            h: self.h,
            d: self.d,
            matrix: self.m.to_rows().iter().map(|r| r.iter().map(|&x| self.w.format(x)).collect()).collect(),
        }
    }

    pub fn from_file(file: &DisplayFile) -> Result<Self> {
        let spec: RingSpec = match &file.ring_spec {
            Some(s) => s.clone(),
            None => file.ring.parse()?,
        };
        let ring = FiniteRing::new(&spec)?;
        let w = WittRing::new(&ring, file.n)?;
        let rows: Vec<Vec<Witt>> =
            file.matrix.iter().map(|r| r.iter().map(|s| w.parse(s)).collect::<Result<_>>()).collect::<Result<_>>()?;
        if rows.len() != file.h {
            return Err(Error::ShapeMismatch(format!("matrix has {} rows, h = {}", rows.len(), file.h)));
        }
        let m = if rows.is_empty() { Matrix::new(0, 0, vec![]) } else { Matrix::from_rows(rows)? };
        TruncatedDisplay::from_matrix(&w, file.d, m)
    }
}

/// Odometer increment over [0, base)^len; false after wrapping to zero.
pub(crate) fn increment(v: &mut [Witt], base: u32) -> bool {
    for x in v.iter_mut().rev() {
        x.0 += 1;
        if x.0 < base {
            return true;
        }
        x.0 = 0;
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayFile {
    pub schema: String,
    pub ring: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_spec: Option<RingSpec>,
    pub n: usize,
    pub h: usize,
    pub d: usize,
    pub matrix: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    #[test]
    fn unit_displays() {
        let w = wr("GF(2)", 1);
        let e = TruncatedDisplay::etale_unit(&w);
        let m = TruncatedDisplay::mult_unit(&w);
        assert!(w.is_unit(e.vsharp().get(0, 0)));
        assert_eq!(w.residue(m.vsharp().get(0, 0)), w.base().zero());
        assert!(!e.is_nilpotent());
        assert!(m.is_nilpotent());
        assert!(!e.direct_sum(&m).unwrap().is_nilpotent());
        let s = e.direct_sum(&m).unwrap();
        assert_eq!((s.rank(), s.dim_t()), (2, 1));
        assert_eq!(*s.matrix(), Matrix::identity(&w, 2));
    }

    #[test]
    fn singular_matrix_rejected() {
        let w = wr("GF(2)", 2);
        let m = Matrix::new(1, 1, vec![w.from_int(2)]);
        assert_eq!(TruncatedDisplay::from_matrix(&w, 0, m), Err(Error::NotInvertible));
    }

    #[test]
    fn axioms_and_vsharp_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in ["GF(2)", "GF(2^2)", "GF(2)[x]/x^3"] {
            for n in 1..=2 {
                let w = wr(spec, n);
                for h in 1..=3 {
                    for d in 0..=h {
                        let disp = TruncatedDisplay::random(&w, h, d, &mut rng);
                        disp.check_axioms().unwrap();
                        disp.check_vsharp().unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_and_base_change() {
        let w2 = wr("GF(2)", 2);
        let e2 = TruncatedDisplay::etale_unit(&w2);
        assert_eq!(e2.truncate().unwrap(), TruncatedDisplay::etale_unit(&wr("GF(2)", 1)));
        let f2 = FiniteRing::parse("GF(2)").unwrap();
        let f4 = FiniteRing::parse("GF(2^2)").unwrap();
        let inc = RingHom::field_embedding(&f2, &f4).unwrap();
        assert_eq!(e2.base_change(&inc).unwrap(), TruncatedDisplay::etale_unit(&wr("GF(2^2)", 2)));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let d = TruncatedDisplay::random(&w2, 2, 1, &mut rng);
            let a = d.truncate().unwrap().base_change(&inc).unwrap();
            let b = d.base_change(&inc).unwrap().truncate().unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = TruncatedDisplay::random(&wr("GF(2^2)", 2), 2, 1, &mut rng);
        let json = serde_json::to_string(&d.to_file()).unwrap();
        let back: DisplayFile = serde_json::from_str(&json).unwrap();
        assert_eq!(TruncatedDisplay::from_file(&back).unwrap(), d);
    }
}
