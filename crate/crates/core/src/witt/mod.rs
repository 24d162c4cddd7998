//! Truncated p-typical Witt vectors W_n(R) over a finite F_p-algebra.
//!
//! A vector (x_0, ..., x_{n-1}) is packed as the base-|R| integer with x_0
//! most significant, so numeric order on [`Witt`] is the lexicographic order
//! on Witt coordinates. The packing makes the shift maps cheap: prepending a
//! zero coordinate leaves the packed value unchanged and dropping the last
//! coordinate is division by |R|.

pub mod galois;
pub mod tables;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::CommRing;
use crate::ring::{FiniteRing, RingElem, RingHom, RingSpec};

pub use tables::{default_max_level, witt_tables, witt_tables_with_limit, WittTables};

/// Rings with at most this many elements get full operation tables.
const TABLE_LIMIT: u64 = 1024;

/// A packed element of some W_n(R); meaningful only together with its [`WittRing`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Witt(pub u32);

/// An element of the ideal I_{n+1,R} = ker(W_{n+1}(R) -> R), stored at level n+1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdealElem(pub Witt);

struct OpTables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
}

struct WittData {
    ring: FiniteRing,
    n: usize,
    q: u32,
    size: u64,
    tables: Arc<WittTables>,
    ops: Option<OpTables>,
    coef: Vec<RingElem>,
}

/// The ring W_n(R) for a fixed base ring and level.
#[derive(Clone)]
pub struct WittRing(Arc<WittData>);

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}({})", self.0.n, self.0.ring.spec())
    }
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.ring == other.0.ring)
    }
}

impl Eq for WittRing {}

fn ring_cache() -> &'static Mutex<HashMap<(RingSpec, usize), WittRing>> {
    static CACHE: OnceLock<Mutex<HashMap<(RingSpec, usize), WittRing>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl WittRing {
    pub fn new(ring: &FiniteRing, n: usize) -> Result<Self> {
        Self::with_limit(ring, n, default_max_level(ring.p()))
    }

    /// Like [`WittRing::new`] with an explicit level guard.
    pub fn with_limit(ring: &FiniteRing, n: usize, limit: usize) -> Result<Self> {
        let key = (ring.spec().clone(), n);
        if let Some(w) = ring_cache().lock().expect("witt cache").get(&key) {
            return Ok(w.clone());
        }
        let tables = witt_tables_with_limit(ring.p(), n, limit)?;
        let q = ring.size() as u32;
        let size = (q as u64)
            .checked_pow(n as u32)
            .filter(|&s| s <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidRingSpec(format!("W_{n}({}) too large to index", ring.spec())))?;
        let coef = (0..ring.p()).map(|c| ring.from_int(c as i64)).collect();
        let mut w = WittRing(Arc::new(WittData { ring: ring.clone(), n, q, size, tables, ops: None, coef }));
        if size <= TABLE_LIMIT {
            let ops = w.build_ops();
            Arc::get_mut(&mut w.0).expect("fresh witt ring").ops = Some(ops);
        }
        ring_cache().lock().expect("witt cache").insert(key, w.clone());
        Ok(w)
    }

    pub fn base(&self) -> &FiniteRing {
        &self.0.ring
    }

    pub fn level(&self) -> usize {
        self.0.n
    }

    pub fn p(&self) -> u32 {
        self.0.ring.p()
    }

    /// Number of elements, |R|^n.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn tables(&self) -> &WittTables {
        &self.0.tables
    }

    /// W_{n+1}(R).
    pub fn up(&self) -> Result<WittRing> {
        WittRing::new(&self.0.ring, self.0.n + 1)
    }

    /// W_{n-1}(R); errors at level 1.
    pub fn down(&self) -> Result<WittRing> {
        if self.0.n == 1 {
            return Err(Error::LevelMismatch(1, 0));
        }
        WittRing::new(&self.0.ring, self.0.n - 1)
    }

    pub fn elements(&self) -> impl Iterator<Item = Witt> {
        (0..self.0.size as u32).map(Witt)
    }

    pub fn from_coords(&self, coords: &[RingElem]) -> Result<Witt> {
        if coords.len() != self.0.n {
            return Err(Error::LevelMismatch(coords.len(), self.0.n));
        }
        Ok(self.pack(coords))
    }

    fn pack(&self, coords: &[RingElem]) -> Witt {
        Witt(coords.iter().fold(0u32, |acc, c| acc * self.0.q + c.0))
    }

    pub fn coords(&self, x: Witt) -> Vec<RingElem> {
        let mut out = vec![RingElem(0); self.0.n];
        let mut v = x.0;
        for i in (0..self.0.n).rev() {
            out[i] = RingElem(v % self.0.q);
            v /= self.0.q;
        }
        out
    }

    pub fn coord(&self, x: Witt, i: usize) -> RingElem {
        RingElem(x.0 / self.0.q.pow((self.0.n - 1 - i) as u32) % self.0.q)
    }

    /// Zeroth coordinate, the image under W_n(R) -> R.
    pub fn residue(&self, x: Witt) -> RingElem {
        RingElem(x.0 / self.0.q.pow(self.0.n as u32 - 1))
    }

    pub fn teichmuller(&self, a: RingElem) -> Witt {
        Witt(a.0 * self.0.q.pow(self.0.n as u32 - 1))
    }

    pub fn zero(&self) -> Witt {
        Witt(0)
    }

    pub fn one(&self) -> Witt {
        self.teichmuller(self.0.ring.one())
    }

    fn eval(&self, poly: &tables::ModPoly, x: &[RingElem], y: &[RingElem], pows: &mut PowCache) -> RingElem {
        let r = &self.0.ring;
        let n = self.0.n;
        let mut acc = r.zero();
        for m in &poly.terms {
            let mut t = self.0.coef[m.coef as usize];
            for &(v, e) in &m.factors {
                let v = v as usize;
                let val = if v < n { x[v] } else { y[v - n] };
                t = r.mul(t, pows.get(r, v, val, e as usize));
            }
            acc = r.add(acc, t);
        }
        acc
    }

    fn add_slow(&self, a: Witt, b: Witt) -> Witt {
        let (x, y) = (self.coords(a), self.coords(b));
        let mut pows = PowCache::new(2 * self.0.n);
        let out: Vec<RingElem> = (0..self.0.n).map(|k| self.eval(&self.0.tables.sum[k], &x, &y, &mut pows)).collect();
        self.pack(&out)
    }

    fn mul_slow(&self, a: Witt, b: Witt) -> Witt {
        let (x, y) = (self.coords(a), self.coords(b));
        let mut pows = PowCache::new(2 * self.0.n);
        let out: Vec<RingElem> = (0..self.0.n).map(|k| self.eval(&self.0.tables.prod[k], &x, &y, &mut pows)).collect();
        self.pack(&out)
    }

    fn neg_slow(&self, a: Witt) -> Witt {
        let r = &self.0.ring;
        let x = self.coords(a);
        if r.p() != 2 {
            let out: Vec<RingElem> = x.iter().map(|&c| r.neg(c)).collect();
            return self.pack(&out);
        }
        // Solve S_k(x, y) = 0 one coordinate at a time.
        let mut y = vec![r.zero(); self.0.n];
        for k in 0..self.0.n {
            let mut pows = PowCache::new(2 * self.0.n);
            let s = self.eval(&self.0.tables.sum[k], &x, &y, &mut pows);
            y[k] = r.neg(s);
        }
        self.pack(&y)
    }

    fn build_ops(&self) -> OpTables {
        let s = self.0.size as usize;
        let mut add = vec![0; s * s];
        let mut mul = vec![0; s * s];
        for a in 0..s {
            for b in a..s {
                let sum = self.add_slow(Witt(a as u32), Witt(b as u32)).0;
                let prod = self.mul_slow(Witt(a as u32), Witt(b as u32)).0;
                add[a * s + b] = sum;
                add[b * s + a] = sum;
                mul[a * s + b] = prod;
                mul[b * s + a] = prod;
            }
        }
        let neg = (0..s).map(|a| self.neg_slow(Witt(a as u32)).0).collect();
        OpTables { add, mul, neg }
    }

    pub fn add(&self, a: Witt, b: Witt) -> Witt {
        match &self.0.ops {
            Some(t) => Witt(t.add[a.0 as usize * self.0.size as usize + b.0 as usize]),
            None => self.add_slow(a, b),
        }
    }

    pub fn mul(&self, a: Witt, b: Witt) -> Witt {
        match &self.0.ops {
            Some(t) => Witt(t.mul[a.0 as usize * self.0.size as usize + b.0 as usize]),
            None => self.mul_slow(a, b),
        }
    }

    pub fn neg(&self, a: Witt) -> Witt {
        match &self.0.ops {
            Some(t) => Witt(t.neg[a.0 as usize]),
            None => self.neg_slow(a),
        }
    }

    pub fn sub(&self, a: Witt, b: Witt) -> Witt {
        self.add(a, self.neg(b))
    }

    /// k * a for an integer k.
    pub fn mul_int(&self, a: Witt, k: i64) -> Witt {
        let mut base = if k < 0 { self.neg(a) } else { a };
        let mut k = k.unsigned_abs();
        let mut acc = self.zero();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn from_int(&self, k: i64) -> Witt {
        self.mul_int(self.one(), k)
    }

    /// f: coordinatewise p-th power.
    pub fn frobenius(&self, a: Witt) -> Witt {
        let r = &self.0.ring;
        let c: Vec<RingElem> = self.coords(a).into_iter().map(|x| r.frobenius(x)).collect();
        self.pack(&c)
    }

    pub fn frobenius_iter(&self, a: Witt, k: u32) -> Witt {
        (0..k).fold(a, |x, _| self.frobenius(x))
    }

    /// Inverse of f on a perfect base ring.
    pub fn frobenius_inv(&self, a: Witt) -> Result<Witt> {
        let r = &self.0.ring;
        let c: Vec<RingElem> = self.coords(a).into_iter().map(|x| r.frobenius_inv(x)).collect::<Result<_>>()?;
        Ok(self.pack(&c))
    }

    /// Verschiebung inside W_n: (x_0, ..., x_{n-1}) -> (0, x_0, ..., x_{n-2}).
    pub fn shift(&self, a: Witt) -> Witt {
        Witt(a.0 / self.0.q)
    }

    /// k-fold shift inside W_n.
    pub fn shift_pow(&self, a: Witt, k: usize) -> Witt {
        Witt(a.0 / self.0.q.pow(k.min(self.0.n) as u32))
    }

    /// p * a, computed as V(F(a)) (valid in characteristic p).
    pub fn mul_p(&self, a: Witt) -> Witt {
        self.shift(self.frobenius(a))
    }

    /// p^k * a.
    pub fn mul_p_pow(&self, a: Witt, k: usize) -> Witt {
        (0..k).fold(a, |x, _| self.mul_p(x))
    }

    /// v: W_n -> I_{n+1}, (x_0, ..., x_{n-1}) -> (0, x_0, ..., x_{n-1}) in `up`.
    pub fn verschiebung(&self, a: Witt, up: &WittRing) -> Result<IdealElem> {
        self.check_up(up)?;
        Ok(IdealElem(a))
    }

    /// f_1: I_{n+1} -> W_n, the inverse of v.
    pub fn f1(&self, a: IdealElem, up: &WittRing) -> Result<Witt> {
        self.check_up(up)?;
        if up.residue(a.0) != up.base().zero() {
            return Err(Error::NotInIdeal);
        }
        Ok(a.0)
    }

    /// Checks and wraps an element of W_{n+1} lying in I_{n+1}; `self` is W_{n+1}.
    pub fn ideal_elem(&self, a: Witt) -> Result<IdealElem> {
        if self.residue(a) != self.0.ring.zero() {
            return Err(Error::NotInIdeal);
        }
        Ok(IdealElem(a))
    }

    /// Restriction W_{n+1} -> W_n (drop the last coordinate); `self` is the source.
    pub fn restrict(&self, a: Witt) -> Witt {
        Witt(a.0 / self.0.q)
    }

    /// Restriction to any lower level m <= n.
    pub fn restrict_to(&self, a: Witt, m: usize) -> Witt {
        Witt(a.0 / self.0.q.pow((self.0.n - m) as u32))
    }

    /// The lift to W_{n+1} with last coordinate zero.
    pub fn lift(&self, a: Witt) -> Witt {
        Witt(a.0 * self.0.q)
    }

    /// Action of s in W_n on a in I_{n+1}: multiplication by any lift of s to
    /// W_{n+1}; in coordinates s * v(z) = v(f(s) z).
    pub fn ideal_action(&self, s: Witt, a: IdealElem, up: &WittRing) -> Result<IdealElem> {
        let z = self.f1(a, up)?;
        self.verschiebung(self.mul(self.frobenius(s), z), up)
    }

    /// i: I_{n+1} -> W_n, the restriction of an ideal element.
    pub fn ideal_to_level(&self, a: IdealElem, up: &WittRing) -> Result<Witt> {
        self.check_up(up)?;
        Ok(up.restrict(a.0))
    }

    fn check_up(&self, up: &WittRing) -> Result<()> {
        if up.level() != self.level() + 1 || up.base() != self.base() {
            return Err(Error::LevelMismatch(up.level(), self.level() + 1));
        }
        Ok(())
    }

    /// True iff the element is supported in the last coordinate (lies in J).
    pub fn in_last_coordinate(&self, a: Witt) -> bool {
        a.0 < self.0.q
    }

    /// Element with only the last coordinate set.
    pub fn last_coordinate(&self, c: RingElem) -> Witt {
        Witt(c.0)
    }

    pub fn is_unit(&self, a: Witt) -> bool {
        self.0.ring.is_unit(self.residue(a))
    }

    pub fn inv(&self, a: Witt) -> Option<Witt> {
        let r = &self.0.ring;
        let r0 = r.inv(self.residue(a))?;
        let two = self.from_int(2);
        let mut w = self.teichmuller(r0);
        for _ in 0..=2 * self.0.n {
            let next = self.mul(w, self.sub(two, self.mul(a, w)));
            if next == w {
                break;
            }
            w = next;
        }
        (self.mul(a, w) == self.one()).then_some(w)
    }

    /// p-adic valuation on W_n(k) for a field k: index of the first nonzero
    /// coordinate, or n for zero.
    pub fn valuation(&self, a: Witt) -> usize {
        (0..self.0.n).find(|&i| self.coord(a, i) != RingElem(0)).unwrap_or(self.0.n)
    }

    /// W_n(alpha) for a ring homomorphism alpha: R -> R'.
    pub fn map(&self, a: Witt, alpha: &RingHom, target: &WittRing) -> Witt {
        let c: Vec<RingElem> = self.coords(a).into_iter().map(|x| alpha.apply(x)).collect();
        target.pack(&c)
    }

    pub fn format(&self, a: Witt) -> String {
        let parts: Vec<String> = self.coords(a).into_iter().map(|c| self.0.ring.format_elem(c)).collect();
        format!("w[{}]", parts.join(","))
    }

    /// Parses `w[a0,a1,...]`; each ai is a ring element literal. The literal
    /// length must equal the level.
    pub fn parse(&self, s: &str) -> Result<Witt> {
        let coords = parse_witt_literal(s)?;
        if coords.len() != self.0.n {
            return Err(Error::LevelMismatch(coords.len(), self.0.n));
        }
        let c: Vec<RingElem> = coords.iter().map(|t| self.0.ring.parse_elem(t)).collect::<Result<_>>()?;
        Ok(self.pack(&c))
    }
}

/// Splits `w[a0,a1,...]` into coordinate literals, respecting parentheses.
pub fn parse_witt_literal(s: &str) -> Result<Vec<String>> {
    let s = s.trim();
    let inner = s
        .strip_prefix("w[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected w[...], got {s:?}")))?;
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or_else(|| Error::Parse(format!("unbalanced {s:?}")))?;
                cur.push(ch);
            }
            ',' if depth == 0 => parts.push(std::mem::take(&mut cur)),
            c if c.is_whitespace() => {}
            c => cur.push(c),
        }
    }
    parts.push(cur);
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("empty coordinate in {s:?}")));
    }
    Ok(parts)
}

/// Per-evaluation cache of powers of the variable values.
struct PowCache {
    pows: Vec<Vec<RingElem>>,
}

impl PowCache {
    fn new(vars: usize) -> Self {
        PowCache { pows: vec![Vec::new(); vars] }
    }

    fn get(&mut self, r: &FiniteRing, var: usize, val: RingElem, e: usize) -> RingElem {
        let list = &mut self.pows[var];
        if list.is_empty() {
            list.push(r.one());
        }
        while list.len() <= e {
            let next = r.mul(*list.last().unwrap(), val);
            list.push(next);
        }
        list[e]
    }
}

impl CommRing for WittRing {
    type E = Witt;

    fn zero(&self) -> Witt {
        Witt(0)
    }

    fn one(&self) -> Witt {
        WittRing::one(self)
    }

    fn add(&self, a: Witt, b: Witt) -> Witt {
        WittRing::add(self, a, b)
    }

    fn neg(&self, a: Witt) -> Witt {
        WittRing::neg(self, a)
    }

    fn mul(&self, a: Witt, b: Witt) -> Witt {
        WittRing::mul(self, a, b)
    }

    fn inv(&self, a: Witt) -> Option<Witt> {
        WittRing::inv(self, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    #[test]
    fn examples_over_f2() {
        let w2 = w("GF(2)", 2);
        let one = w2.parse("w[1,0]").unwrap();
        assert_eq!(w2.format(w2.add(one, one)), "w[0,1]");
        let two = w2.parse("w[0,1]").unwrap();
        assert_eq!(w2.add(two, two), w2.zero());
        for x in w2.elements() {
            assert_eq!(w2.add(x, w2.zero()), x);
            assert_eq!(w2.mul(x, w2.one()), x);
        }
    }

    #[test]
    fn negation_and_inverse() {
        for (spec, n) in [("GF(2)", 3), ("GF(3)", 2), ("GF(2^2)", 2), ("GF(2)[x]/x^2", 2)] {
            let wr = w(spec, n);
            for x in wr.elements() {
                assert_eq!(wr.add(x, wr.neg(x)), wr.zero());
                match wr.inv(x) {
                    Some(y) => assert_eq!(wr.mul(x, y), wr.one()),
                    None => assert!(!wr.is_unit(x)),
                }
            }
        }
    }

    #[test]
    fn mul_p_matches_repeated_addition() {
        for (spec, n) in [("GF(2)", 3), ("GF(3)", 2), ("GF(2^2)", 2), ("GF(2)[x]/x^3", 2)] {
            let wr = w(spec, n);
            for x in wr.elements() {
                assert_eq!(wr.mul_p(x), wr.mul_int(x, wr.p() as i64));
            }
        }
    }

    #[test]
    fn shifts_and_lifts() {
        let w2 = w("GF(2)", 2);
        let w3 = w2.up().unwrap();
        let a = w3.parse("w[0,1,0]").unwrap();
        let ia = w3.ideal_elem(a).unwrap();
        assert_eq!(w2.format(w2.f1(ia, &w3).unwrap()), "w[1,0]");
        assert!(w3.ideal_elem(w3.one()).is_err());
        let v1 = w2.down().unwrap().verschiebung(w2.down().unwrap().one(), &w2).unwrap();
        assert_eq!(w2.format(v1.0), "w[0,1]");
        assert_eq!(w2.down().unwrap().format(w2.restrict(w2.parse("w[1,1]").unwrap())), "w[1]");
    }

    #[test]
    fn parse_literals() {
        let w4 = w("GF(2^2)", 2);
        let x = w4.parse("w[(0,1), 1]").unwrap();
        assert_eq!(w4.format(x), "w[(0,1),(1,0)]");
        assert!(w4.parse("w[1]").is_err());
        assert!(w4.parse("[1,0]").is_err());
    }
}
