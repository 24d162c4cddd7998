//! Finite groupoids of truncated displays over F_q.
//!
//! X is the set of invertible h x h matrices over W_n(F_q) and G the group of
//! block morphisms (A, B, C, D) with A, D invertible. G acts on X by
//! g . M = g_P M g_Q^{-1}, so that g is an isomorphism from the display of M
//! to the display of g . M. Isomorphism classes are the orbits.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dieudonne::newton::SlopeRecord;
use crate::dieudonne::DieudonneModule;
use crate::display::{isom_displays, DisplayHom, TruncatedDisplay};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ring::FiniteRing;
use crate::witt::{Witt, WittRing};

pub const TABLE_SCHEMA: &str = "truncdisp/class-table/v1";
pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// |GL_m(W_n(F_q))| = q^{(n-1) m^2} |GL_m(F_q)|.
pub fn gl_order(q: u64, n: usize, m: usize) -> BigUint {
    let q = BigUint::from(q);
    let qm = q.pow(m as u32);
    let mut out = q.pow(((n - 1) * m * m) as u32);
    for i in 0..m {
        out *= &qm - q.pow(i as u32);
    }
    out
}

#[derive(Clone, Debug)]
pub struct ModuliInstance {
    w: WittRing,
    h: usize,
    d: usize,
}

/// A group element with its P-matrix and the inverse of its Q-matrix.
#[derive(Clone, Debug)]
pub struct GroupElem {
    pub hom: DisplayHom,
    gp: Matrix<Witt>,
    gq_inv: Matrix<Witt>,
}

impl GroupElem {
    pub fn new(hom: DisplayHom) -> Result<Self> {
        let gp = hom.g_p();
        let gq_inv = hom.g_q().inverse(hom.witt())?;
        Ok(GroupElem { hom, gp, gq_inv })
    }
}

impl ModuliInstance {
    pub fn new(w: &WittRing, h: usize, d: usize) -> Result<Self> {
        if w.base().field_degree().is_none() {
            return Err(Error::NotAField);
        }
        if d > h {
            return Err(Error::ShapeMismatch(format!("type {d} exceeds rank {h}")));
        }
        Ok(ModuliInstance { w: w.clone(), h, d })
    }

    pub fn witt(&self) -> &WittRing {
        &self.w
    }

    pub fn rank(&self) -> usize {
        self.h
    }

    pub fn dim_t(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u64 {
        self.w.base().size()
    }

    pub fn x_count(&self) -> BigUint {
        gl_order(self.q(), self.w.level(), self.h)
    }

    pub fn g_count(&self) -> BigUint {
        let (n, l, d) = (self.w.level(), self.h - self.d, self.d);
        gl_order(self.q(), n, l) * gl_order(self.q(), n, d) * BigUint::from(self.q()).pow((2 * n * d * l) as u32)
    }

    /// |X| / |G|.
    pub fn mass(&self) -> BigRational {
        BigRational::new(BigInt::from(self.x_count()), BigInt::from(self.g_count()))
    }

    /// Number of h x h matrices over W_n(F_q), the size of the search space.
    pub fn matrix_space(&self) -> BigUint {
        BigUint::from(self.w.size()).pow((self.h * self.h) as u32)
    }

    pub fn pack(&self, m: &Matrix<Witt>) -> u64 {
        let base = self.w.size();
        m.data().iter().fold(0u64, |acc, x| acc * base + x.0 as u64)
    }

    pub fn unpack(&self, mut idx: u64, size: usize) -> Matrix<Witt> {
        let base = self.w.size();
        let mut data = vec![Witt(0); size * size];
        for slot in data.iter_mut().rev() {
            *slot = Witt((idx % base) as u32);
            idx /= base;
        }
        Matrix::new(size, size, data)
    }

    fn display(&self, m: Matrix<Witt>) -> Result<TruncatedDisplay> {
        TruncatedDisplay::from_matrix(&self.w, self.d, m)
    }

    /// All invertible m x m matrices, lexicographically.
    fn general_linear(&self, m: usize) -> Vec<Matrix<Witt>> {
        let total = self.w.size().pow((m * m) as u32);
        (0..total).map(|i| self.unpack(i, m)).filter(|x| x.is_invertible(&self.w)).collect()
    }

    fn all_blocks(&self, rows: usize, cols: usize) -> Vec<Matrix<Witt>> {
        let total = self.w.size().pow((rows * cols) as u32);
        let base = self.w.size();
        (0..total)
            .map(|mut idx| {
                let mut data = vec![Witt(0); rows * cols];
                for slot in data.iter_mut().rev() {
                    *slot = Witt((idx % base) as u32);
                    idx /= base;
                }
                Matrix::new(rows, cols, data)
            })
            .collect()
    }

    /// Every element of G, in lexicographic block order.
    pub fn group(&self, budget: u64) -> Result<Vec<GroupElem>> {
        if self.g_count() > BigUint::from(budget) {
            return Err(Error::GuardExceeded(format!("|G| = {} exceeds the budget {budget}", self.g_count())));
        }
        let (l, d) = (self.h - self.d, self.d);
        let gl_l = self.general_linear(l);
        let gl_d = self.general_linear(d);
        let bs = self.all_blocks(l, d);
        let cs = self.all_blocks(d, l);
        let mut out = Vec::new();
        for a in &gl_l {
            for b in &bs {
                for c in &cs {
                    for dd in &gl_d {
                        let hom = DisplayHom::new(&self.w, a.clone(), b.clone(), c.clone(), dd.clone())?;
                        out.push(GroupElem::new(hom)?);
                    }
                }
            }
        }
        debug_assert_eq!(BigUint::from(out.len()), self.g_count());
        Ok(out)
    }

    /// g . M = g_P M g_Q^{-1}.
    pub fn act(&self, g: &GroupElem, m: &Matrix<Witt>) -> Matrix<Witt> {
        g.gp.mul(&self.w, m).mul(&self.w, &g.gq_inv)
    }

    /// Checks on a seeded sample that g is an isomorphism from M to g . M and
    /// that the action is compatible with composition.
    pub fn verify_action(&self, group: &[GroupElem], samples: usize, seed: u64) -> Result<()> {
        if group.is_empty() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let m = TruncatedDisplay::random(&self.w, self.h, self.d, &mut rng);
            let g = &group[rng.gen_range(0..group.len())];
            let g2 = &group[rng.gen_range(0..group.len())];
            let moved = self.display(self.act(g, m.matrix()))?;
            if !g.hom.is_iso() || !g.hom.is_hom(&m, &moved) {
                return Err(Error::ActionVerification(format!(
                    "g does not map the display of M to the display of g.M (M = {:?})",
                    self.pack(m.matrix())
                )));
            }
            let prod = GroupElem::new(g.hom.compose(&g2.hom)?)?;
            if self.act(&prod, m.matrix()) != self.act(g, &self.act(g2, m.matrix())) {
                return Err(Error::ActionVerification("action is not compatible with composition".into()));
            }
        }
        Ok(())
    }

    /// Orbit decomposition. Seeds are taken in lexicographic order, so each
    /// representative is the smallest matrix of its orbit.
    pub fn enumerate_orbits(&self, budget: u64, workers: usize, seed: u64) -> Result<Classification> {
        let space = self.matrix_space();
        if space > BigUint::from(budget) || self.x_count() > BigUint::from(budget) {
            return Err(Error::GuardExceeded(format!("matrix space of size {space} exceeds the budget {budget}")));
        }
        let group = self.group(budget)?;
        self.verify_action(&group, 32, seed)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        let space = space.to_u64().expect("checked against budget");
        let mut visited = vec![false; space as usize];
        let mut membership = HashMap::new();
        let mut classes = Vec::new();
        let mut reps = Vec::new();
        let mut actions: u64 = 0;
        for idx in 0..space {
            if visited[idx as usize] {
                continue;
            }
            let m = self.unpack(idx, self.h);
            if !m.is_invertible(&self.w) {
                continue;
            }
            actions += group.len() as u64;
            if actions > budget {
                return Err(Error::GuardExceeded(format!("more than {budget} group actions")));
            }
            let images: Vec<u64> = pool.install(|| group.par_iter().map(|g| self.pack(&self.act(g, &m))).collect());
            let stab = images.iter().filter(|&&i| i == idx).count() as u64;
            let orbit: BTreeSet<u64> = images.into_iter().collect();
            if orbit.len() as u64 * stab != group.len() as u64 {
                return Err(Error::ActionVerification("orbit size times stabilizer order differs from |G|".into()));
            }
            let class = classes.len();
            for &i in &orbit {
                visited[i as usize] = true;
                membership.insert(i, class);
            }
            let disp = self.display(m.clone())?;
            let nilpotent = disp.is_nilpotent();
            let slopes = DieudonneModule::from_display(&disp).and_then(|md| md.newton_polygon()).ok();
            for &i in &orbit {
                let other = self.display(self.unpack(i, self.h))?;
                if other.is_nilpotent() != nilpotent {
                    return Err(Error::Discrepancy("nilpotence is not constant on an orbit".into()));
                }
                let s = DieudonneModule::from_display(&other).and_then(|md| md.newton_polygon()).ok();
                if s != slopes {
                    return Err(Error::Discrepancy("Newton polygon is not constant on an orbit".into()));
                }
            }
            classes.push(ClassRecord {
                rep_matrix: format_matrix(&self.w, &m),
                orbit_size: orbit.len() as u64,
                aut_order: stab,
                d: self.d,
                nilpotent,
                slopes: slopes.map(|np| np.to_record()),
                dual_class: None,
            });
            reps.push(m);
        }
        let table = ClassTable {
            schema: TABLE_SCHEMA.into(),
            ring: self.w.base().spec().to_string(),
            p: self.w.p(),
            q: self.q(),
            n: self.w.level(),
            h: self.h,
            d: self.d,
            x_count: self.x_count().to_string(),
            g_count: self.g_count().to_string(),
            mass: String::new(),
            nilpotent_classes: classes.iter().filter(|c| c.nilpotent).count(),
            nilpotent_points: classes.iter().filter(|c| c.nilpotent).map(|c| c.orbit_size).sum(),
            classes,
        };
        let mut out = Classification { instance: self.clone(), table, reps, membership, actions };
        out.table.mass = out.mass_check().lhs.to_string();
        Ok(out)
    }
}

fn format_matrix(w: &WittRing, m: &Matrix<Witt>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(|&x| w.format(x)).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub rep_matrix: Vec<Vec<String>>,
    pub orbit_size: u64,
    pub aut_order: u64,
    pub d: usize,
    pub nilpotent: bool,
    /// Newton slopes with multiplicities, absent when the precision guard refuses.
    pub slopes: Option<Vec<SlopeRecord>>,
    /// Index of the dual class in the table of type h - d.
    pub dual_class: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTable {
    pub schema: String,
    pub ring: String,
    pub p: u32,
    pub q: u64,
    pub n: usize,
    pub h: usize,
    pub d: usize,
    pub x_count: String,
    pub g_count: String,
    pub mass: String,
    pub nilpotent_classes: usize,
    pub nilpotent_points: u64,
    pub classes: Vec<ClassRecord>,
}

impl ClassTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let header = ["rep_matrix", "orbit_size", "aut_order", "d", "nilpotent", "slopes", "dual_class"];
        wtr.write_record(header).expect("in-memory write");
        for c in &self.classes {
            let rep = c.rep_matrix.iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("; ");
            let slopes = match &c.slopes {
                Some(s) => s.iter().map(|r| format!("{}^{}", r.slope, r.multiplicity)).collect::<Vec<_>>().join(" "),
                None => "refused".into(),
            };
            let dual = c.dual_class.map(|i| i.to_string()).unwrap_or_default();
            let row =
                [rep, c.orbit_size.to_string(), c.aut_order.to_string(), c.d.to_string(), c.nilpotent.to_string()];
            wtr.write_record(row.iter().map(String::as_str).chain([slopes.as_str(), dual.as_str()]))
                .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Writes through a temporary file in the target directory and renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

/// An enumerated instance with orbit membership of every X-point.
#[derive(Clone, Debug)]
pub struct Classification {
    pub instance: ModuliInstance,
    pub table: ClassTable,
    pub reps: Vec<Matrix<Witt>>,
    pub membership: HashMap<u64, usize>,
    pub actions: u64,
}

impl Classification {
    /// Sum of 1/|Aut| over classes against |X|/|G|.
    pub fn mass_check(&self) -> MassCheck {
        let lhs = self
            .table
            .classes
            .iter()
            .fold(BigRational::zero(), |acc, c| acc + BigRational::new(BigInt::one(), BigInt::from(c.aut_order)));
        let rhs = self.instance.mass();
        MassCheck { equal: lhs == rhs, lhs, rhs }
    }

    /// Classes and X-points with nilpotent display.
    pub fn count_nilpotent_locus(&self) -> (usize, u64) {
        (self.table.nilpotent_classes, self.table.nilpotent_points)
    }

    /// Number of X-points found by enumeration.
    pub fn enumerated_points(&self) -> u64 {
        self.membership.len() as u64
    }

    pub fn class_of(&self, m: &Matrix<Witt>) -> Option<usize> {
        self.membership.get(&self.instance.pack(m)).copied()
    }

    /// Same orbit iff isom_displays finds an isomorphism, on every ordered
    /// pair of X-points; returns the number of pairs checked.
    pub fn cross_check_isom(&self, guard: usize) -> Result<u64> {
        let inst = &self.instance;
        let mut points: Vec<(&u64, &usize)> = self.membership.iter().collect();
        points.sort();
        let displays: Vec<(TruncatedDisplay, usize)> =
            points.iter().map(|(&i, &c)| Ok((inst.display(inst.unpack(i, inst.h))?, c))).collect::<Result<_>>()?;
        let mut checked = 0;
        for (d1, c1) in &displays {
            for (d2, c2) in &displays {
                let iso = isom_displays(d1, d2, guard)?;
                if let Some(g) = &iso {
                    if !g.is_hom(d1, d2) || !g.is_iso() {
                        return Err(Error::Discrepancy("isom_displays returned a non-isomorphism".into()));
                    }
                }
                if iso.is_some() != (c1 == c2) {
                    return Err(Error::Discrepancy(format!(
                        "orbit membership and isom_displays disagree on {:?} and {:?}",
                        inst.pack(d1.matrix()),
                        inst.pack(d2.matrix())
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }
}

/// |Aut(D)| by brute force over all block tuples; works over any base ring.
pub fn automorphism_order(disp: &TruncatedDisplay, budget: u64) -> Result<u64> {
    let w = disp.witt();
    let (h, l) = (disp.rank(), disp.dim_l());
    let space = BigUint::from(w.size()).pow((h * h) as u32);
    if space > BigUint::from(budget) {
        return Err(Error::GuardExceeded(format!("{space} candidate automorphisms exceed the budget {budget}")));
    }
    let base = w.size();
    let mut count = 0;
    for mut idx in 0..space.to_u64().expect("checked against budget") {
        let mut data = vec![Witt(0); h * h];
        for slot in data.iter_mut().rev() {
            *slot = Witt((idx % base) as u32);
            idx /= base;
        }
        let g = Matrix::new(h, h, data);
        let top: Vec<usize> = (0..l).collect();
        let bottom: Vec<usize> = (l..h).collect();
        let block = |r: &[usize], c: &[usize]| g.select_rows(r).select_cols(c);
        let hom =
            DisplayHom::new(w, block(&top, &top), block(&top, &bottom), block(&bottom, &top), block(&bottom, &bottom))?;
        if hom.is_iso() && hom.is_hom(disp, disp) {
            count += 1;
        }
    }
    Ok(count)
}

/// The display of the dual Dieudonne module.
pub fn dual_display(disp: &TruncatedDisplay) -> Result<TruncatedDisplay> {
    DieudonneModule::from_display(disp)?.dual().to_display()
}

/// Fills `dual_class` for every table whose partner of type h - d is present.
pub fn link_duals(tables: &mut [Classification]) -> Result<()> {
    let mut links = Vec::new();
    for (ti, t) in tables.iter().enumerate() {
        let (h, d) = (t.instance.h, t.instance.d);
        let Some(partner) = tables.iter().position(|u| u.instance.h == h && u.instance.d == h - d) else {
            continue;
        };
        for (ci, rep) in t.reps.iter().enumerate() {
            let dual = dual_display(&t.instance.display(rep.clone())?)?;
            if dual.dim_t() != h - d {
                return Err(Error::Discrepancy("dual does not have type h - d".into()));
            }
            let target = tables[partner]
                .class_of(dual.matrix())
                .ok_or_else(|| Error::Discrepancy("dual display not found in the partner table".into()))?;
            links.push((ti, ci, target));
        }
    }
    for (ti, ci, target) in links {
        tables[ti].table.classes[ci].dual_class = Some(target);
    }
    Ok(())
}

/// Re-derives a loaded table: representatives are invertible, and orbit and
/// stabilizer sizes, nilpotence, slopes and the mass are recomputed and
/// compared.
pub fn reverify(table: &ClassTable, budget: u64) -> Result<()> {
    if table.schema != TABLE_SCHEMA {
        return Err(Error::Parse(format!("unknown schema {}", table.schema)));
    }
    let ring = FiniteRing::parse(&table.ring)?;
    let w = WittRing::new(&ring, table.n)?;
    let inst = ModuliInstance::new(&w, table.h, table.d)?;
    let group = inst.group(budget)?;
    let mut total = BigUint::zero();
    for c in &table.classes {
        let rows: Vec<Vec<Witt>> =
            c.rep_matrix.iter().map(|r| r.iter().map(|s| w.parse(s)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let m = Matrix::from_rows(rows)?;
        let disp = inst.display(m.clone())?;
        let stab = group.iter().filter(|g| inst.act(g, &m) == m).count() as u64;
        let slopes =
            DieudonneModule::from_display(&disp).and_then(|md| md.newton_polygon()).ok().map(|np| np.to_record());
        let same = stab == c.aut_order
            && c.orbit_size * stab == group.len() as u64
            && disp.is_nilpotent() == c.nilpotent
            && slopes == c.slopes
            && c.d == table.d;
        if !same {
            return Err(Error::Discrepancy(format!("class with representative {:?} does not re-verify", c.rep_matrix)));
        }
        total += BigUint::from(c.orbit_size);
    }
    if total.to_string() != table.x_count || inst.x_count().to_string() != table.x_count {
        return Err(Error::Discrepancy("orbit sizes do not sum to |X|".into()));
    }
    let lhs = table
        .classes
        .iter()
        .fold(BigRational::zero(), |acc, c| acc + BigRational::new(BigInt::one(), BigInt::from(c.aut_order)));
    if lhs != inst.mass() || lhs.to_string() != table.mass {
        return Err(Error::Discrepancy("mass does not re-verify".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(spec: &str, n: usize, h: usize, d: usize) -> ModuliInstance {
        let w = WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap();
        ModuliInstance::new(&w, h, d).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(gl_order(2, 1, 2), BigUint::from(6u32));
        assert_eq!(gl_order(2, 2, 1), BigUint::from(2u32));
        assert_eq!(gl_order(3, 1, 2), BigUint::from(48u32));
        let i = inst("GF(2)", 1, 2, 1);
        assert_eq!((i.x_count(), i.g_count()), (BigUint::from(6u32), BigUint::from(4u32)));
        assert_eq!(i.mass(), rat(3, 2));
        let i = inst("GF(2)", 2, 2, 1);
        assert_eq!((i.x_count(), i.g_count()), (BigUint::from(96u32), BigUint::from(64u32)));
        for (n, h, d) in [(1, 2, 0), (1, 2, 1), (2, 2, 1), (2, 1, 1), (1, 3, 1)] {
            let i = inst("GF(2)", n, h, d);
            let exhaustive_x =
                (0..i.matrix_space().to_u64().unwrap()).filter(|&k| i.unpack(k, h).is_invertible(i.witt())).count();
            assert_eq!(BigUint::from(exhaustive_x), i.x_count());
            assert_eq!(BigUint::from(i.group(1 << 20).unwrap().len()), i.g_count());
        }
    }

    #[test]
    fn action_axioms_exhaustive() {
        let i = inst("GF(2)", 1, 2, 1);
        let g = i.group(100).unwrap();
        assert_eq!(g.len(), 4);
        let id = GroupElem::new(DisplayHom::identity(
            &TruncatedDisplay::etale_unit(i.witt()).direct_sum(&TruncatedDisplay::mult_unit(i.witt())).unwrap(),
        ))
        .unwrap();
        for k in 0..16 {
            let m = i.unpack(k, 2);
            if !m.is_invertible(i.witt()) {
                continue;
            }
            assert_eq!(i.act(&id, &m), m);
            for a in &g {
                for b in &g {
                    let ab = GroupElem::new(a.hom.compose(&b.hom).unwrap()).unwrap();
                    assert_eq!(i.act(&ab, &m), i.act(a, &i.act(b, &m)));
                }
            }
        }
        i.verify_action(&g, 20, 1).unwrap();
    }

    #[test]
    fn small_classifications() {
        let c = inst("GF(2)", 1, 1, 0).enumerate_orbits(DEFAULT_BUDGET, 1, DEFAULT_SEED).unwrap();
        assert_eq!(c.table.classes.len(), 1);
        assert_eq!(c.table.classes[0].aut_order, 1);
        assert_eq!(c.count_nilpotent_locus(), (0, 0));
        let c = inst("GF(2)", 1, 1, 1).enumerate_orbits(DEFAULT_BUDGET, 1, DEFAULT_SEED).unwrap();
        assert_eq!(c.count_nilpotent_locus(), (1, 1));
        let c = inst("GF(2)", 1, 2, 1).enumerate_orbits(DEFAULT_BUDGET, 2, DEFAULT_SEED).unwrap();
        assert_eq!(c.table.classes.iter().map(|r| r.orbit_size).sum::<u64>(), 6);
        let mc = c.mass_check();
        assert!(mc.equal);
        assert_eq!(mc.lhs, rat(3, 2));
        assert_eq!(c.cross_check_isom(1 << 12).unwrap(), 36);
        reverify(&c.table, DEFAULT_BUDGET).unwrap();
        for (rep, class) in c.reps.iter().zip(&c.table.classes) {
            let disp = TruncatedDisplay::from_matrix(c.instance.witt(), 1, rep.clone()).unwrap();
            assert_eq!(automorphism_order(&disp, DEFAULT_BUDGET).unwrap(), class.aut_order);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let i = inst("GF(2)", 2, 2, 1);
        let a = i.enumerate_orbits(DEFAULT_BUDGET, 1, DEFAULT_SEED).unwrap();
        let b = i.enumerate_orbits(DEFAULT_BUDGET, 3, DEFAULT_SEED).unwrap();
        assert_eq!(a.table.to_json(), b.table.to_json());
        assert_eq!(a.mass_check().lhs, rat(3, 2));
    }

    #[test]
    fn guard_on_large_instance() {
        let i = inst("GF(2)", 3, 6, 3);
        assert!(matches!(i.enumerate_orbits(DEFAULT_BUDGET, 1, DEFAULT_SEED), Err(Error::GuardExceeded(_))));
    }

    #[test]
    fn duals_link_types() {
        let w = WittRing::new(&FiniteRing::parse("GF(2)").unwrap(), 1).unwrap();
        let mut tables: Vec<Classification> = (0..=2)
            .map(|d| ModuliInstance::new(&w, 2, d).unwrap().enumerate_orbits(DEFAULT_BUDGET, 1, DEFAULT_SEED).unwrap())
            .collect();
        link_duals(&mut tables).unwrap();
        for t in &tables {
            assert!(t.table.classes.iter().all(|c| c.dual_class.is_some()));
        }
    }
}
