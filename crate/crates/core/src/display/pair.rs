//! Truncated pairs and pre-displays presented by matrices, and the normal
//! decomposition of a pair.
//!
//! P = W_n^h. Q = W_n^a + I_{n+1}^b, with ideal coordinates stored through
//! f_1, so an element of Q is a vector (x, z) in W_n^{a+b} standing for
//! (x, v(z)). The structure maps are
//! iota(x, z) = J x + K i(v(z)) and
//! epsilon(v(g) (x) e_j) = (i(v(g)) E e_j, f(G e_j) g).
//! The second formula is the W_n-action s v(z) = v(f(s) z) on I_{n+1}.

use crate::error::{Error, Result};
use crate::linalg::additive::{AddGroup, AdditiveMap};
use crate::linalg::{field_rank, Matrix};
use crate::witt::{Witt, WittRing};

use super::{sigma, TruncatedDisplay};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedPair {
    w: WittRing,
    h: usize,
    a: usize,
    b: usize,
    iota_free: Matrix<Witt>,
    iota_ideal: Matrix<Witt>,
    eps_free: Matrix<Witt>,
    eps_ideal: Matrix<Witt>,
}

fn unit_vec(w: &WittRing, len: usize, i: usize) -> Vec<Witt> {
    let mut v = vec![w.zero(); len];
    v[i] = w.one();
    v
}

fn vadd(w: &WittRing, x: &[Witt], y: &[Witt]) -> Vec<Witt> {
    x.iter().zip(y).map(|(&a, &b)| w.add(a, b)).collect()
}

fn vscale(w: &WittRing, s: Witt, x: &[Witt]) -> Vec<Witt> {
    x.iter().map(|&a| w.mul(s, a)).collect()
}

/// The F_p-generators v^k[b_j] of W_n(R).
pub(crate) fn additive_generators(w: &WittRing) -> Vec<Witt> {
    let g = AddGroup::new(w, 1);
    (0..g.len()).map(|i| g.generator(i)[0]).collect()
}

impl PresentedPair {
    pub fn new(
        w: &WittRing,
        iota_free: Matrix<Witt>,
        iota_ideal: Matrix<Witt>,
        eps_free: Matrix<Witt>,
        eps_ideal: Matrix<Witt>,
    ) -> Result<Self> {
        let h = iota_free.rows();
        let (a, b) = (iota_free.cols(), iota_ideal.cols());
        let shapes_ok = iota_ideal.rows() == h
            && eps_free.rows() == a
            && eps_free.cols() == h
            && eps_ideal.rows() == b
            && eps_ideal.cols() == h;
        if !shapes_ok {
            return Err(Error::ShapeMismatch("pair structure matrices".into()));
        }
        Ok(PresentedPair { w: w.clone(), h, a, b, iota_free, iota_ideal, eps_free, eps_ideal })
    }

    /// The pair of a normal decomposition with ranks h - d and d.
    pub fn canonical(w: &WittRing, h: usize, d: usize) -> Result<Self> {
        if d > h {
            return Err(Error::ShapeMismatch(format!("type {d} exceeds rank {h}")));
        }
        let l = h - d;
        let id = Matrix::identity(w, h);
        let lcols: Vec<usize> = (0..l).collect();
        let tcols: Vec<usize> = (l..h).collect();
        PresentedPair::new(
            w,
            id.select_cols(&lcols),
            id.select_cols(&tcols),
            id.select_rows(&lcols),
            id.select_rows(&tcols),
        )
    }

    /// The same pair with P recoordinatised by x -> U x.
    pub fn transform_p(&self, u: &Matrix<Witt>) -> Result<Self> {
        let w = &self.w;
        let ui = u.inverse(w)?;
        PresentedPair::new(
            w,
            u.mul(w, &self.iota_free),
            u.mul(w, &self.iota_ideal),
            self.eps_free.mul(w, &ui),
            self.eps_ideal.mul(w, &ui),
        )
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn rank(&self) -> usize {
        self.h
    }

    pub fn q_len(&self) -> usize {
        self.a + self.b
    }

    pub fn iota(&self, q: &[Witt]) -> Vec<Witt> {
        let w = &self.w;
        let (x, z) = q.split_at(self.a);
        let sz: Vec<Witt> = z.iter().map(|&c| w.shift(c)).collect();
        vadd(w, &self.iota_free.mul_vec(w, x), &self.iota_ideal.mul_vec(w, &sz))
    }

    /// epsilon(v(g) (x) e_j).
    pub fn epsilon_basis(&self, g: Witt, j: usize) -> Vec<Witt> {
        let w = &self.w;
        let vg = w.shift(g);
        let mut out: Vec<Witt> = self.eps_free.col(j).into_iter().map(|e| w.mul(vg, e)).collect();
        out.extend(self.eps_ideal.col(j).into_iter().map(|e| w.mul(w.frobenius(e), g)));
        out
    }

    /// epsilon(v(g) (x) x) for x in P.
    pub fn epsilon(&self, g: Witt, x: &[Witt]) -> Vec<Witt> {
        let w = &self.w;
        let mut acc = vec![w.zero(); self.q_len()];
        for (j, &xj) in x.iter().enumerate() {
            acc = vadd(w, &acc, &self.epsilon_basis(w.mul(w.frobenius(xj), g), j));
        }
        acc
    }

    /// s * q for s in W_n.
    pub fn act(&self, s: Witt, q: &[Witt]) -> Vec<Witt> {
        let w = &self.w;
        let fs = w.frobenius(s);
        q.iter().enumerate().map(|(i, &c)| if i < self.a { w.mul(s, c) } else { w.mul(fs, c) }).collect()
    }

    /// v(g) * q, the multiplication I_{n+1} (x) Q -> Q.
    fn ideal_mult(&self, g: Witt, q: &[Witt]) -> Vec<Witt> {
        let w = &self.w;
        let vg = w.shift(g);
        q.iter().enumerate().map(|(i, &c)| if i < self.a { w.mul(vg, c) } else { w.mul_p(w.mul(g, c)) }).collect()
    }

    /// Checks that iota epsilon and epsilon (1 (x) iota) are the multiplication
    /// maps, on additive generators (both sides are biadditive).
    pub fn check_axioms(&self) -> Result<()> {
        let w = &self.w;
        let gens = additive_generators(w);
        let qg = AddGroup::new(w, self.q_len());
        for &g in &gens {
            for j in 0..self.h {
                let lhs = self.iota(&self.epsilon_basis(g, j));
                let rhs = vscale(w, w.shift(g), &unit_vec(w, self.h, j));
                if lhs != rhs {
                    return Err(Error::AxiomViolation(format!("iota epsilon is not multiplication on e_{j}")));
                }
            }
            for i in 0..qg.len() {
                let q = qg.generator(i);
                if self.epsilon(g, &self.iota(&q)) != self.ideal_mult(g, &q) {
                    return Err(Error::AxiomViolation("epsilon (1 (x) iota) is not multiplication".into()));
                }
            }
        }
        Ok(())
    }

    /// Verifies 0 -> J (x) Coker(iota) -> Q -> P -> Coker(iota) -> 0 by
    /// orders and explicit kernels; returns the rank d of Coker(iota).
    pub fn verify_exact_sequence(&self) -> Result<usize> {
        let w = &self.w;
        let dim = w.base().dim() as u64;
        let pg = AddGroup::new(w, self.h);
        let qg = AddGroup::new(w, self.q_len());
        let f = |q: &[Witt]| self.iota(q);
        let iota = AdditiveMap { src: &qg, tgt: &pg, f: &f };
        let im = iota.image_log_order();
        let coker = pg.len() as u64 - im;
        if !coker.is_multiple_of(dim) {
            return Err(Error::AxiomViolation("Coker(iota) is not free over R".into()));
        }
        let d = (coker / dim) as usize;
        let ker = iota.kernel_log_order();
        let mut j_image = Vec::new();
        for k in 0..w.base().dim() {
            let g = w.last_coordinate(w.base().basis(k));
            for j in 0..self.h {
                let e = self.epsilon_basis(g, j);
                if self.iota(&e).iter().any(|&c| c != w.zero()) {
                    return Err(Error::AxiomViolation("epsilon(J (x) P) not in Ker(iota)".into()));
                }
                j_image.push(e);
            }
        }
        let j_log = qg.subgroup_log_order(&j_image);
        if ker != coker || j_log != ker {
            return Err(Error::AxiomViolation(format!(
                "four-term sequence not exact: |Ker iota| = p^{ker}, |J (x) Coker| = p^{coker}, |eps(J (x) P)| = p^{j_log}"
            )));
        }
        Ok(d)
    }

    /// Lifts bases of Coker(iota) and Coker(epsilon) greedily from the
    /// standard generators and verifies that L + T -> P and
    /// L + I (x) T -> Q are bijective.
    pub fn normal_decompose(&self) -> Result<NormalDecomposition> {
        self.check_axioms()?;
        let d = self.verify_exact_sequence()?;
        let w = &self.w;
        if self.q_len() != self.h {
            return Err(Error::AxiomViolation("Q and P have different ranks".into()));
        }
        let gens = additive_generators(w);
        let pg = AddGroup::new(w, self.h);
        let qg = AddGroup::new(w, self.q_len());

        let mut span: Vec<Vec<Witt>> = (0..qg.len()).map(|i| self.iota(&qg.generator(i))).collect();
        let mut order = pg.subgroup_log_order(&span);
        let mut t = Vec::new();
        for j in 0..self.h {
            if order == pg.len() as u64 {
                break;
            }
            let e = unit_vec(w, self.h, j);
            let mut trial = span.clone();
            trial.extend(gens.iter().map(|&s| vscale(w, s, &e)));
            let o = pg.subgroup_log_order(&trial);
            if o > order {
                span = trial;
                order = o;
                t.push(e);
            }
        }
        if order != pg.len() as u64 || t.len() != d {
            return Err(Error::AxiomViolation("no basis of Coker(iota) among standard lifts".into()));
        }

        let mut span: Vec<Vec<Witt>> = Vec::new();
        for &g in &gens {
            for j in 0..self.h {
                span.push(self.epsilon_basis(g, j));
            }
        }
        let mut order = qg.subgroup_log_order(&span);
        let mut l = Vec::new();
        for i in 0..self.q_len() {
            if order == qg.len() as u64 {
                break;
            }
            let e = unit_vec(w, self.q_len(), i);
            let mut trial = span.clone();
            trial.extend(gens.iter().map(|&s| self.act(s, &e)));
            let o = qg.subgroup_log_order(&trial);
            if o > order {
                span = trial;
                order = o;
                l.push(e);
            }
        }
        if order != qg.len() as u64 || l.len() != self.h - d {
            return Err(Error::AxiomViolation("no basis of Coker(epsilon) among standard lifts".into()));
        }

        let dec = NormalDecomposition { l, t, basis: Matrix::zeros(w, self.h, self.h) };
        let dec = NormalDecomposition { basis: dec.p_basis(self), ..dec };
        dec.verify(self)?;
        Ok(dec)
    }
}

/// L given by elements of Q, T by elements of P, and the P-basis [iota(L) | T].
#[derive(Clone, Debug)]
pub struct NormalDecomposition {
    pub l: Vec<Vec<Witt>>,
    pub t: Vec<Vec<Witt>>,
    pub basis: Matrix<Witt>,
}

impl NormalDecomposition {
    fn p_basis(&self, pair: &PresentedPair) -> Matrix<Witt> {
        let cols: Vec<Vec<Witt>> = self.l.iter().map(|q| pair.iota(q)).chain(self.t.iter().cloned()).collect();
        Matrix::from_fn(pair.h, cols.len(), |i, j| cols[j][i])
    }

    /// Checks that L + T -> P and L + I (x) T -> Q are bijections.
    pub fn verify(&self, pair: &PresentedPair) -> Result<()> {
        let w = &pair.w;
        let h = pair.h;
        let nl = self.l.len();
        let src = AddGroup::new(w, h);
        let pg = AddGroup::new(w, h);
        let qg = AddGroup::new(w, pair.q_len());
        let to_p = |c: &[Witt]| -> Vec<Witt> {
            let mut acc = vec![w.zero(); h];
            for (i, q) in self.l.iter().enumerate() {
                acc = vadd(w, &acc, &vscale(w, c[i], &pair.iota(q)));
            }
            for (k, t) in self.t.iter().enumerate() {
                acc = vadd(w, &acc, &vscale(w, c[nl + k], t));
            }
            acc
        };
        let to_q = |c: &[Witt]| -> Vec<Witt> {
            let mut acc = vec![w.zero(); pair.q_len()];
            for (i, q) in self.l.iter().enumerate() {
                acc = vadd(w, &acc, &pair.act(c[i], q));
            }
            for (k, t) in self.t.iter().enumerate() {
                acc = vadd(w, &acc, &pair.epsilon(c[nl + k], t));
            }
            acc
        };
        let m1 = AdditiveMap { src: &src, tgt: &pg, f: &to_p };
        let m2 = AdditiveMap { src: &src, tgt: &qg, f: &to_q };
        if m1.kernel_log_order() != 0 || src.len() != pg.len() {
            return Err(Error::AxiomViolation("L + T -> P is not bijective".into()));
        }
        if m2.kernel_log_order() != 0 || src.len() != qg.len() {
            return Err(Error::AxiomViolation("L + I (x) T -> Q is not bijective".into()));
        }
        Ok(())
    }
}

/// A pre-display on a presented pair: F(x) = F_m f(x) and
/// F_1(x, z) = F_a f(x) + F_b z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreDisplay {
    pair: PresentedPair,
    fm: Matrix<Witt>,
    f1a: Matrix<Witt>,
    f1b: Matrix<Witt>,
}

impl PreDisplay {
    pub fn new(pair: PresentedPair, fm: Matrix<Witt>, f1a: Matrix<Witt>, f1b: Matrix<Witt>) -> Result<Self> {
        let h = pair.h;
        if fm.rows() != h
            || fm.cols() != h
            || f1a.rows() != h
            || f1a.cols() != pair.a
            || f1b.rows() != h
            || f1b.cols() != pair.b
        {
            return Err(Error::ShapeMismatch("pre-display operator matrices".into()));
        }
        Ok(PreDisplay { pair, fm, f1a, f1b })
    }

    pub fn pair(&self) -> &PresentedPair {
        &self.pair
    }

    pub fn f(&self, x: &[Witt]) -> Vec<Witt> {
        let w = &self.pair.w;
        let fx: Vec<Witt> = x.iter().map(|&c| w.frobenius(c)).collect();
        self.fm.mul_vec(w, &fx)
    }

    pub fn f1(&self, q: &[Witt]) -> Vec<Witt> {
        let w = &self.pair.w;
        let (x, z) = q.split_at(self.pair.a);
        let fx: Vec<Witt> = x.iter().map(|&c| w.frobenius(c)).collect();
        vadd(w, &self.f1a.mul_vec(w, &fx), &self.f1b.mul_vec(w, z))
    }

    /// The same pre-display with P recoordinatised by x -> U x.
    pub fn transform_p(&self, u: &Matrix<Witt>) -> Result<Self> {
        let w = &self.pair.w;
        let ui = u.inverse(w)?;
        PreDisplay::new(
            self.pair.transform_p(u)?,
            u.mul(w, &self.fm).mul(w, &sigma(w, &ui)),
            u.mul(w, &self.f1a),
            u.mul(w, &self.f1b),
        )
    }

    /// Pair axioms plus F iota = p F_1 and F_1 epsilon = f_1 (x) F, checked on
    /// additive generators.
    pub fn check_axioms(&self) -> Result<()> {
        self.pair.check_axioms()?;
        let w = &self.pair.w;
        let qg = AddGroup::new(w, self.pair.q_len());
        for i in 0..qg.len() {
            let q = qg.generator(i);
            let lhs = self.f(&self.pair.iota(&q));
            let rhs: Vec<Witt> = self.f1(&q).into_iter().map(|c| w.mul_p(c)).collect();
            if lhs != rhs {
                return Err(Error::AxiomViolation("F iota != p F_1".into()));
            }
        }
        for g in additive_generators(w) {
            for j in 0..self.pair.h {
                let lhs = self.f1(&self.pair.epsilon_basis(g, j));
                let rhs = vscale(w, g, &self.fm.col(j));
                if lhs != rhs {
                    return Err(Error::AxiomViolation(format!("F_1 epsilon != f_1 (x) F on e_{j}")));
                }
            }
        }
        Ok(())
    }

    /// True iff the image of F_1 generates P (full residue rank on every
    /// residue field).
    pub fn is_display(&self) -> bool {
        let w = &self.pair.w;
        let m = self.f1a.hstack(&self.f1b);
        w.base().residue_fields().iter().all(|(k, pi)| {
            let bar = m.map(|x| pi.apply(w.residue(x)));
            field_rank(k, &bar) == self.pair.h
        })
    }

    /// Structure matrix relative to a normal decomposition:
    /// M = S^{-1} [F_1(L) | F(T)] with S = [iota(L) | T].
    pub fn normal_form(&self) -> Result<TruncatedDisplay> {
        if !self.is_display() {
            return Err(Error::AxiomViolation("image of F_1 does not generate P".into()));
        }
        let dec = self.pair.normal_decompose()?;
        let w = &self.pair.w;
        let cols: Vec<Vec<Witt>> = dec.l.iter().map(|q| self.f1(q)).chain(dec.t.iter().map(|t| self.f(t))).collect();
        let psi = Matrix::from_fn(self.pair.h, cols.len(), |i, j| cols[j][i]);
        let m = dec.basis.inverse(w)?.mul(w, &psi);
        TruncatedDisplay::from_matrix(w, dec.t.len(), m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display::isom_displays;
    use crate::ring::FiniteRing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    #[test]
    fn exactness_on_canonical_pairs() {
        for spec in ["GF(2)", "GF(3)", "GF(2^2)", "GF(2)[x]/x^3", "GF(2)*GF(2)"] {
            for n in 1..=2 {
                let w = wr(spec, n);
                for h in 0..=2 {
                    for d in 0..=h {
                        let pair = PresentedPair::canonical(&w, h, d).unwrap();
                        pair.check_axioms().unwrap();
                        assert_eq!(pair.verify_exact_sequence().unwrap(), d);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_of_canonical_pair() {
        let w = wr("GF(2)", 1);
        let dec = PresentedPair::canonical(&w, 1, 0).unwrap().normal_decompose().unwrap();
        assert_eq!((dec.l.len(), dec.t.len()), (1, 0));
        let dec = PresentedPair::canonical(&w, 0, 0).unwrap().normal_decompose().unwrap();
        assert_eq!((dec.l.len(), dec.t.len()), (0, 0));
    }

    #[test]
    fn scrambled_pair_recovers_display() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (spec, n, h, d) in [("GF(2)", 2, 2, 0), ("GF(2)", 2, 2, 1), ("GF(2^2)", 1, 3, 1), ("GF(2)[x]/x^3", 1, 2, 1)]
        {
            let w = wr(spec, n);
            let disp = TruncatedDisplay::random(&w, h, d, &mut rng);
            let u = TruncatedDisplay::random(&w, h, 0, &mut rng).matrix().clone();
            let scrambled = disp.to_predisplay().unwrap().transform_p(&u).unwrap();
            scrambled.check_axioms().unwrap();
            let recovered = scrambled.normal_form().unwrap();
            assert_eq!(recovered.dim_t(), d);
            assert!(isom_displays(&disp, &recovered, 1 << 16).unwrap().is_some());
        }
    }

    #[test]
    fn broken_pair_rejected() {
        let w = wr("GF(2)", 1);
        let id = Matrix::identity(&w, 1);
        let zero = Matrix::zeros(&w, 1, 0);
        let pair = PresentedPair::new(&w, id.scale(&w, w.zero()), zero.clone(), id, zero.transpose()).unwrap();
        assert!(pair.verify_exact_sequence().is_err());
    }
}
