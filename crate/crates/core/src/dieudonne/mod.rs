//! Truncated Dieudonne modules over finite fields.
//!
//! M = W_n(k)^h with F(x) = A f(x) and V(y) = f^{-1}(X y), so A and X are the
//! matrices of F#: M^(1) -> M and V#: M -> M^(1). The relations FV = VF = p
//! read AX = XA = p. A display with structure matrix M gives
//! A = M Delta and X = Delta' M^{-1}.

pub mod isogeny;
pub mod newton;

use serde::{Deserialize, Serialize};

use crate::display::{sigma, sigma_inv, TruncatedDisplay};
use crate::error::{Error, Result};
use crate::linalg::additive::{AddGroup, AdditiveMap};
use crate::linalg::{field_kernel, field_rank, Matrix};
use crate::ring::{FiniteRing, RingSpec};
use crate::witt::{Witt, WittRing};

pub use isogeny::{isogeny_cokernel, IsogenyCokernel};
pub use newton::NewtonPolygon;

pub const MODULE_SCHEMA: &str = "truncdisp/dieudonne/v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DieudonneModule {
    w: WittRing,
    a: Matrix<Witt>,
    x: Matrix<Witt>,
}

fn residue_matrix(w: &WittRing, m: &Matrix<Witt>) -> Matrix<crate::ring::RingElem> {
    m.map(|x| w.residue(x))
}

impl DieudonneModule {
    /// Checks AX = XA = p, and at level 1 also Ker F = Im V and Ker V = Im F.
    pub fn new(w: &WittRing, a: Matrix<Witt>, x: Matrix<Witt>) -> Result<Self> {
        let k = w.base();
        if !k.is_perfect() {
            return Err(Error::NotPerfect);
        }
        if k.field_degree().is_none() {
            return Err(Error::NotAField);
        }
        let h = a.rows();
        if !a.is_square() || x.rows() != h || x.cols() != h {
            return Err(Error::ShapeMismatch("Dieudonne operator matrices".into()));
        }
        let p = Matrix::identity(w, h).scale(w, w.from_int(w.p() as i64));
        if a.mul(w, &x) != p {
            return Err(Error::DieudonneRelation("FV != p".into()));
        }
        if x.mul(w, &a) != p {
            return Err(Error::DieudonneRelation("VF != p".into()));
        }
        let module = DieudonneModule { w: w.clone(), a, x };
        if !module.level_one_condition() {
            return Err(Error::LevelOneCondition);
        }
        Ok(module)
    }

    pub fn from_display(disp: &TruncatedDisplay) -> Result<Self> {
        DieudonneModule::new(disp.witt(), disp.fsharp(), disp.vsharp())
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn field(&self) -> &FiniteRing {
        self.w.base()
    }

    pub fn level(&self) -> usize {
        self.w.level()
    }

    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    pub fn f_matrix(&self) -> &Matrix<Witt> {
        &self.a
    }

    pub fn v_matrix(&self) -> &Matrix<Witt> {
        &self.x
    }

    /// h minus the rank of V on M/pM.
    pub fn type_d(&self) -> usize {
        self.rank() - field_rank(self.field(), &residue_matrix(&self.w, &self.x))
    }

    pub fn apply_f(&self, v: &[Witt]) -> Vec<Witt> {
        let fv: Vec<Witt> = v.iter().map(|&c| self.w.frobenius(c)).collect();
        self.a.mul_vec(&self.w, &fv)
    }

    pub fn apply_v(&self, v: &[Witt]) -> Vec<Witt> {
        self.x.mul_vec(&self.w, v).into_iter().map(|c| self.w.frobenius_inv(c).expect("perfect field")).collect()
    }

    /// Ker F = Im V and Ker V = Im F on M/pM.
    pub fn level_one_condition(&self) -> bool {
        let k = self.field();
        let (a, x) = (residue_matrix(&self.w, &self.a), residue_matrix(&self.w, &self.x));
        let h = self.rank();
        a.mul(k, &x).is_zero(k)
            && x.mul(k, &a).is_zero(k)
            && field_kernel(k, &a).len() == field_rank(k, &x)
            && field_kernel(k, &x).len() == field_rank(k, &a)
            && field_rank(k, &a) + field_rank(k, &x) == h
    }

    /// FV = VF = p on every element (when |M| <= limit) or on additive
    /// generators.
    pub fn check_relations(&self, limit: u64) -> Result<()> {
        let w = &self.w;
        let check = |v: &[Witt]| -> Result<()> {
            let pv: Vec<Witt> = v.iter().map(|&c| w.mul_p(c)).collect();
            if self.apply_f(&self.apply_v(v)) != pv || self.apply_v(&self.apply_f(v)) != pv {
                return Err(Error::DieudonneRelation("FV = VF = p fails on an element".into()));
            }
            Ok(())
        };
        let total = (w.size() as f64).powi(self.rank() as i32);
        if total <= limit as f64 {
            let mut v = vec![w.zero(); self.rank()];
            loop {
                check(&v)?;
                if !crate::display::increment(&mut v, w.size() as u32) {
                    return Ok(());
                }
            }
        }
        let g = AddGroup::new(w, self.rank());
        (0..g.len()).try_for_each(|i| check(&g.generator(i)))
    }

    /// The module in the basis given by the columns of S.
    pub fn change_basis(&self, s: &Matrix<Witt>) -> Result<Self> {
        let w = &self.w;
        let si = s.inverse(w)?;
        let fs = sigma(w, s);
        let fsi = fs.inverse(w)?;
        Ok(DieudonneModule { w: w.clone(), a: si.mul(w, &self.a).mul(w, &fs), x: fsi.mul(w, &self.x).mul(w, s) })
    }

    /// M/pM as a level-1 module.
    pub fn reduce_mod_p(&self) -> Result<Self> {
        if self.level() < 2 {
            return Err(Error::LevelMismatch(self.level(), 2));
        }
        let w1 = WittRing::new(self.field(), 1)?;
        let a = self.a.map(|x| self.w.restrict_to(x, 1));
        let x = self.x.map(|x| self.w.restrict_to(x, 1));
        DieudonneModule::new(&w1, a, x)
    }

    /// The linear dual with F^t = transpose of V# and V^t = transpose of F#.
    pub fn dual(&self) -> Self {
        DieudonneModule { w: self.w.clone(), a: self.x.transpose(), x: self.a.transpose() }
    }

    /// The display attached to the module.
    pub fn to_display(&self) -> Result<TruncatedDisplay> {
        Ok(self.to_display_with_basis()?.0)
    }

    /// The display together with the basis S of M it is normal in, so that
    /// from_display of the result equals `change_basis(S)`.
    pub fn to_display_with_basis(&self) -> Result<(TruncatedDisplay, Matrix<Witt>)> {
        let w = &self.w;
        let k = self.field();
        let h = self.rank();
        let b = sigma_inv(w, &self.x)?;
        let bbar = residue_matrix(w, &b);
        let mut span = bbar.clone();
        let mut t_idx = Vec::new();
        let mut rank = field_rank(k, &span);
        for j in 0..h {
            let mut e = Matrix::zeros(k, h, 1);
            e.set(j, 0, k.one());
            let trial = span.hstack(&e);
            let r = field_rank(k, &trial);
            if r > rank {
                span = trial;
                rank = r;
                t_idx.push(j);
            }
        }
        let l_idx: Vec<usize> = (0..h).filter(|j| !t_idx.contains(j)).collect();
        let d = t_idx.len();

        let g = AddGroup::new(w, h);
        let apply_b = |z: &[Witt]| b.mul_vec(w, z);
        let exact = AdditiveMap { src: &g, tgt: &g, f: &apply_b };
        let gt = AddGroup::new(w, h + d);
        let apply_bt = |zc: &[Witt]| {
            let mut out = b.mul_vec(w, &zc[..h]);
            for (i, &j) in t_idx.iter().enumerate() {
                out[j] = w.add(out[j], zc[h + i]);
            }
            out
        };
        let relaxed = AdditiveMap { src: &gt, tgt: &g, f: &apply_bt };
        let mut z_cols = Vec::with_capacity(l_idx.len());
        for &j in &l_idx {
            let mut e = vec![w.zero(); h];
            e[j] = w.one();
            let z = match exact.preimage(&e) {
                Some(z) => z,
                None => relaxed.preimage(&e).ok_or(Error::LevelOneCondition)?[..h].to_vec(),
            };
            z_cols.push(z);
        }
        let z_l = Matrix::from_fn(h, l_idx.len(), |i, j| z_cols[j][i]);
        let e_t = Matrix::identity(w, h).select_cols(&t_idx);
        let s = b.mul(w, &z_l).hstack(&e_t);
        let f1_basis = z_l.hstack(&sigma_inv(w, &self.a)?.mul(w, &e_t));
        if !f1_basis.is_invertible(w) {
            return Err(Error::LevelOneCondition);
        }
        let images = sigma(w, &z_l).hstack(&self.a.mul(w, &e_t));
        let m = s.inverse(w)?.mul(w, &images);
        let disp = TruncatedDisplay::from_matrix(w, d, m)?.gauge_fixed()?;
        Ok((disp, s))
    }

    /// Isomorphism test through the attached displays.
    pub fn is_isomorphic(&self, other: &Self, guard: usize) -> Result<bool> {
        let (a, b) = (self.to_display()?, other.to_display()?);
        Ok(crate::display::isom_displays(&a, &b, guard)?.is_some())
    }

    pub fn newton_polygon(&self) -> Result<NewtonPolygon> {
        NewtonPolygon::of_module(self)
    }

    pub fn to_file(&self) -> ModuleFile {
        let fmt =
            |m: &Matrix<Witt>| m.to_rows().iter().map(|r| r.iter().map(|&x| self.w.format(x)).collect()).collect();
        ModuleFile {
            schema: MODULE_SCHEMA.into(),
            field: self.field().spec().to_string(),
            n: self.level(),
            h: self.rank(),
            f_matrix: fmt(&self.a),
            v_matrix: fmt(&self.x),
        }
    }

    pub fn from_file(file: &ModuleFile) -> Result<Self> {
        let spec: RingSpec = file.field.parse()?;
        let w = WittRing::new(&FiniteRing::new(&spec)?, file.n)?;
        let parse = |rows: &[Vec<String>]| -> Result<Matrix<Witt>> {
            if rows.len() != file.h || rows.iter().any(|r| r.len() != file.h) {
                return Err(Error::ShapeMismatch(format!("expected {0}x{0} matrix", file.h)));
            }
            let data = rows.iter().flatten().map(|s| w.parse(s)).collect::<Result<_>>()?;
            Ok(Matrix::new(file.h, file.h, data))
        };
        DieudonneModule::new(&w, parse(&file.f_matrix)?, parse(&file.v_matrix)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFile {
    pub schema: String,
    pub field: String,
    pub n: usize,
    pub h: usize,
    #[serde(rename = "F_matrix")]
    pub f_matrix: Vec<Vec<String>>,
    #[serde(rename = "V_matrix")]
    pub v_matrix: Vec<Vec<String>>,
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
    fn unit_modules() {
        let w = wr("GF(2)", 1);
        let e = DieudonneModule::from_display(&TruncatedDisplay::etale_unit(&w)).unwrap();
        let m = DieudonneModule::from_display(&TruncatedDisplay::mult_unit(&w)).unwrap();
        // F = p f on the etale object, V = p f^{-1} on the multiplicative one
        assert_eq!(e.f_matrix().get(0, 0), w.zero());
        assert_eq!(e.v_matrix().get(0, 0), w.one());
        assert_eq!(m.f_matrix().get(0, 0), w.one());
        assert_eq!(m.v_matrix().get(0, 0), w.zero());
        assert_eq!((e.type_d(), m.type_d()), (0, 1));
        assert_eq!(e.dual(), m);
        assert_eq!(e.to_display().unwrap(), TruncatedDisplay::etale_unit(&w));
        assert_eq!(m.to_display().unwrap(), TruncatedDisplay::mult_unit(&w));
    }

    #[test]
    fn level_one_condition_enforced() {
        let w = wr("GF(2)", 1);
        let zero = Matrix::zeros(&w, 1, 1);
        assert_eq!(DieudonneModule::new(&w, zero.clone(), zero), Err(Error::LevelOneCondition));
    }

    #[test]
    fn non_perfect_rejected() {
        let w = wr("GF(2)[x]/x^2", 1);
        let d = TruncatedDisplay::etale_unit(&w);
        assert_eq!(DieudonneModule::from_display(&d), Err(Error::NotPerfect));
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for spec in ["GF(2)", "GF(2^2)", "GF(3)"] {
            for n in 1..=2 {
                let w = wr(spec, n);
                for h in 1..=3 {
                    for d in 0..=h {
                        let disp = TruncatedDisplay::random(&w, h, d, &mut rng);
                        let module = DieudonneModule::from_display(&disp).unwrap();
                        module.check_relations(4096).unwrap();
                        assert_eq!(module.type_d(), d);
                        let back = module.to_display().unwrap();
                        assert_eq!(back, disp.gauge_fixed().unwrap());
                        assert_eq!(DieudonneModule::from_display(&back).unwrap().to_display().unwrap(), back);

                        let u = TruncatedDisplay::random(&w, h, 0, &mut rng).matrix().clone();
                        let moved = module.change_basis(&u).unwrap();
                        let (disp2, s) = moved.to_display_with_basis().unwrap();
                        assert_eq!(DieudonneModule::from_display(&disp2).unwrap(), moved.change_basis(&s).unwrap());
                        assert!(crate::display::isom_displays(&disp, &disp2, 1 << 16).unwrap().is_some());
                    }
                }
            }
        }
    }

    #[test]
    fn reduction_and_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = wr("GF(2)", 2);
        for h in 1..=3 {
            for d in 0..=h {
                let module = DieudonneModule::from_display(&TruncatedDisplay::random(&w, h, d, &mut rng)).unwrap();
                let red = module.reduce_mod_p().unwrap();
                assert!(red.level_one_condition());
                assert_eq!(red.rank(), h);
                let dual = module.dual();
                assert_eq!(dual.type_d(), h - d);
                assert_eq!(dual.dual(), module);
                dual.check_relations(4096).unwrap();
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let module =
            DieudonneModule::from_display(&TruncatedDisplay::random(&wr("GF(2^2)", 2), 2, 1, &mut rng)).unwrap();
        let json = serde_json::to_string(&module.to_file()).unwrap();
        assert!(json.contains("\"F_matrix\""));
        let back: ModuleFile = serde_json::from_str(&json).unwrap();
        assert_eq!(DieudonneModule::from_file(&back).unwrap(), module);
    }
}
