//! Finite commutative F_p-algebras.
//!
//! Every ring is stored through structure constants on a fixed F_p-basis.
//! Elements are packed base-p integers of their coordinate vectors with the
//! first coordinate most significant, so the numeric order of the packed
//! value is the lexicographic order on coordinates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rings up to this many elements get precomputed operation tables.
const TABLE_LIMIT: u64 = 256;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RingSpec {
    PrimeField {
        p: u32,
    },
    GaloisField {
        p: u32,
        r: u32,
        /// Monic modulus, coefficients from degree 0 upwards. `None` uses the
        /// built-in table.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<u32>>,
    },
    TruncatedPoly {
        base: Box<RingSpec>,
        k: u32,
    },
    Product {
        factors: Vec<RingSpec>,
    },
}

impl RingSpec {
    pub fn gf(p: u32, r: u32) -> Self {
        if r == 1 {
            RingSpec::PrimeField { p }
        } else {
            RingSpec::GaloisField { p, r, modulus: None }
        }
    }

    pub fn truncated(base: RingSpec, k: u32) -> Self {
        RingSpec::TruncatedPoly { base: Box::new(base), k }
    }

    pub fn product(factors: Vec<RingSpec>) -> Self {
        RingSpec::Product { factors }
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            RingSpec::PrimeField { p } | RingSpec::GaloisField { p, .. } => *p,
            RingSpec::TruncatedPoly { base, .. } => base.characteristic(),
            RingSpec::Product { factors } => factors.first().map_or(0, |f| f.characteristic()),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::PrimeField { p } => write!(f, "GF({p})"),
            RingSpec::GaloisField { p, r, .. } => write!(f, "GF({p}^{r})"),
            RingSpec::TruncatedPoly { base, k } => {
                if matches!(**base, RingSpec::Product { .. }) {
                    write!(f, "({base})[x]/x^{k}")
                } else {
                    write!(f, "{base}[x]/x^{k}")
                }
            }
            RingSpec::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

/// Grammar: `product := factor ('*' factor)*`,
/// `factor := atom ('[' v ']' '/' v '^' k)*`, `atom := 'GF(' p ('^' r)? ')' | '(' product ')'`.
impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = SpecParser { s: cleaned.as_bytes(), pos: 0 };
        let spec = parser.product()?;
        if parser.pos != parser.s.len() {
            return Err(Error::InvalidRingSpec(format!("trailing input in {s:?}")));
        }
        Ok(spec)
    }
}

struct SpecParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl SpecParser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::InvalidRingSpec(format!("{what} at offset {} in {:?}", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }

    fn number(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected number"))
    }

    fn product(&mut self) -> Result<RingSpec> {
        let mut factors = vec![self.factor()?];
        while self.eat("*") {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { RingSpec::Product { factors } })
    }

    fn factor(&mut self) -> Result<RingSpec> {
        let mut spec = self.atom()?;
        while self.eat("[") {
            let var = self.s.get(self.pos).copied().ok_or_else(|| self.err("expected variable"))?;
            self.pos += 1;
            self.expect("]")?;
            self.expect("/")?;
            let again = self.s.get(self.pos).copied();
            if again != Some(var) {
                return Err(self.err("quotient variable differs"));
            }
            self.pos += 1;
            self.expect("^")?;
            let k = self.number()?;
            spec = RingSpec::TruncatedPoly { base: Box::new(spec), k };
        }
        Ok(spec)
    }

    fn atom(&mut self) -> Result<RingSpec> {
        if self.eat("(") {
            let inner = self.product()?;
            self.expect(")")?;
            return Ok(inner);
        }
        if !(self.eat("GF(") || self.eat("F(")) {
            return Err(self.err("expected GF("));
        }
        let p = self.number()?;
        let r = if self.eat("^") { self.number()? } else { 1 };
        self.expect(")")?;
        Ok(RingSpec::gf(p, r))
    }
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Built-in irreducible moduli for p in {2,3,5}, r <= 4.
pub fn builtin_modulus(p: u32, r: u32) -> Option<Vec<u32>> {
    let m: &[u32] = match (p, r) {
        (_, 1) => &[0, 1],
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (3, 2) => &[1, 0, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 1, 0, 0, 1],
        (5, 2) => &[2, 0, 1],
        (5, 3) => &[1, 1, 0, 1],
        (5, 4) => &[2, 0, 0, 0, 1],
        _ => return None,
    };
    Some(m.to_vec())
}

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` modulo the monic-able polynomial `b` over F_p.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    poly_trim(&mut a);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while a.len() > db {
        let da = a.len() - 1;
        let c = a[da] * lead_inv % p;
        for (i, &bi) in b.iter().enumerate() {
            let idx = da - db + i;
            a[idx] = (a[idx] + p * p - c * bi % p) % p;
        }
        poly_trim(&mut a);
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|x| a * x % p == 1).expect("nonzero residue mod prime")
}

pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let mut m = modulus.to_vec();
    poly_trim(&mut m);
    if m.len() < 2 {
        return false;
    }
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        // monic divisors of degree d
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                cand.push((t % p as u64) as u32);
                t /= p as u64;
            }
            cand.push(1);
            if poly_rem(&m, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RingElem(pub u32);

#[derive(Debug)]
enum Kind {
    Field { r: u32, modulus: Vec<u32> },
    Truncated { base: FiniteRing },
    Product { factors: Vec<FiniteRing> },
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    frob: Vec<u32>,
}

struct RingData {
    spec: RingSpec,
    p: u32,
    dim: usize,
    size: u64,
    /// basis_mul[i][j] = coordinates of b_i * b_j
    basis_mul: Vec<Vec<Vec<u32>>>,
    one: RingElem,
    kind: Kind,
    tables: Option<Tables>,
    perfect: bool,
}

/// Handle to an immutable finite ring; cheap to clone and share.
#[derive(Clone)]
pub struct FiniteRing(Arc<RingData>);

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing({})", self.0.spec)
    }
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for FiniteRing {}

impl FiniteRing {
    pub fn new(spec: &RingSpec) -> Result<Self> {
        let p = spec.characteristic();
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let (dim, basis_mul, one, kind) = match spec {
            RingSpec::PrimeField { .. } => (1, vec![vec![vec![1]]], vec![1], Kind::Field { r: 1, modulus: vec![0, 1] }),
            RingSpec::GaloisField { r, modulus, .. } => {
                if *r == 0 {
                    return Err(Error::InvalidRingSpec("extension degree 0".into()));
                }
                let modulus = match modulus {
                    Some(m) => m.clone(),
                    None => builtin_modulus(p, *r).ok_or(Error::NoModulus { p, r: *r })?,
                };
                if modulus.len() != *r as usize + 1 || modulus.last() != Some(&1) {
                    return Err(Error::InvalidRingSpec(format!("modulus {modulus:?} is not monic of degree {r}")));
                }
                if modulus.iter().any(|&c| c >= p) || !is_irreducible(&modulus, p) {
                    return Err(Error::ReducibleModulus(modulus, p));
                }
                let r = *r as usize;
                let mut bm = vec![vec![vec![0; r]; r]; r];
                for i in 0..r {
                    for j in 0..r {
                        let mut mono = vec![0; i + j + 1];
                        mono[i + j] = 1;
                        let red = poly_rem(&mono, &modulus, p);
                        for (t, c) in red.into_iter().enumerate() {
                            bm[i][j][t] = c;
                        }
                    }
                }
                let mut one = vec![0; r];
                one[0] = 1;
                (r, bm, one, Kind::Field { r: r as u32, modulus })
            }
            RingSpec::TruncatedPoly { base, k } => {
                if *k == 0 {
                    return Err(Error::InvalidRingSpec("truncation exponent 0".into()));
                }
                let base = FiniteRing::new(base)?;
                let bd = base.dim();
                let k = *k as usize;
                let dim = bd * k;
                // basis index a*bd + i  <->  x^a * b_i
                let mut bm = vec![vec![vec![0; dim]; dim]; dim];
                for a in 0..k {
                    for b in 0..k {
                        if a + b >= k {
                            continue;
                        }
                        for i in 0..bd {
                            for j in 0..bd {
                                let prod = &base.0.basis_mul[i][j];
                                for (t, &c) in prod.iter().enumerate() {
                                    bm[a * bd + i][b * bd + j][(a + b) * bd + t] = c;
                                }
                            }
                        }
                    }
                }
                let mut one = vec![0; dim];
                one[..bd].copy_from_slice(&base.coords(base.one()));
                (dim, bm, one, Kind::Truncated { base })
            }
            RingSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidRingSpec("empty product".into()));
                }
                let rings: Vec<FiniteRing> = factors.iter().map(FiniteRing::new).collect::<Result<_>>()?;
                if rings.iter().any(|r| r.p() != p) {
                    return Err(Error::InvalidRingSpec("product of different characteristics".into()));
                }
                let dim: usize = rings.iter().map(|r| r.dim()).sum();
                let mut bm = vec![vec![vec![0; dim]; dim]; dim];
                let mut one = vec![0; dim];
                let mut off = 0;
                for r in &rings {
                    let d = r.dim();
                    for i in 0..d {
                        for j in 0..d {
                            for (t, &c) in r.0.basis_mul[i][j].iter().enumerate() {
                                bm[off + i][off + j][off + t] = c;
                            }
                        }
                    }
                    one[off..off + d].copy_from_slice(&r.coords(r.one()));
                    off += d;
                }
                (dim, bm, one, Kind::Product { factors: rings })
            }
        };
        let size = (p as u64)
            .checked_pow(dim as u32)
            .filter(|&s| s < u32::MAX as u64)
            .ok_or_else(|| Error::InvalidRingSpec("ring too large".into()))?;
        let mut data = RingData {
            spec: spec.clone(),
            p,
            dim,
            size,
            basis_mul,
            one: RingElem(0),
            kind,
            tables: None,
            perfect: false,
        };
        data.one = pack(&one, p);
        let mut ring = FiniteRing(Arc::new(data));
        let tables = if size <= TABLE_LIMIT { Some(ring.build_tables()) } else { None };
        let perfect = ring.compute_perfect();
        let data = Arc::get_mut(&mut ring.0).expect("fresh ring handle");
        data.tables = tables;
        data.perfect = perfect;
        Ok(ring)
    }

    pub fn parse(s: &str) -> Result<Self> {
        FiniteRing::new(&s.parse()?)
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    /// Dimension over F_p.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn is_perfect(&self) -> bool {
        self.0.perfect
    }

    /// Some(r) when the ring is the field F_{p^r}.
    pub fn field_degree(&self) -> Option<u32> {
        match &self.0.kind {
            Kind::Field { r, .. } => Some(*r),
            _ => None,
        }
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        match &self.0.kind {
            Kind::Field { modulus, .. } => Some(modulus),
            _ => None,
        }
    }

    pub fn zero(&self) -> RingElem {
        RingElem(0)
    }

    pub fn one(&self) -> RingElem {
        self.0.one
    }

    /// Elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = RingElem> + '_ {
        (0..self.0.size as u32).map(RingElem)
    }

    /// Basis element b_i.
    pub fn basis(&self, i: usize) -> RingElem {
        let mut c = vec![0; self.dim()];
        c[i] = 1;
        self.from_coords(&c)
    }

    pub fn coords(&self, a: RingElem) -> Vec<u32> {
        unpack(a, self.0.p, self.0.dim)
    }

    pub fn from_coords(&self, c: &[u32]) -> RingElem {
        debug_assert_eq!(c.len(), self.0.dim);
        pack(c, self.0.p)
    }

    /// The image of the integer `k` under Z -> R.
    pub fn from_int(&self, k: i64) -> RingElem {
        let p = self.0.p as i64;
        let c = k.rem_euclid(p) as u32;
        let one = self.coords(self.one());
        self.from_coords(&one.iter().map(|&x| x * c % self.0.p).collect::<Vec<_>>())
    }

    pub fn add(&self, a: RingElem, b: RingElem) -> RingElem {
        if let Some(t) = &self.0.tables {
            return RingElem(t.add[(a.0 as u64 * self.0.size + b.0 as u64) as usize]);
        }
        self.add_slow(a, b)
    }

    fn add_slow(&self, a: RingElem, b: RingElem) -> RingElem {
        let p = self.0.p;
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..self.0.dim {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place = place.wrapping_mul(p);
        }
        RingElem(out)
    }

    pub fn neg(&self, a: RingElem) -> RingElem {
        if let Some(t) = &self.0.tables {
            return RingElem(t.neg[a.0 as usize]);
        }
        let p = self.0.p;
        let c: Vec<u32> = self.coords(a).into_iter().map(|x| (p - x) % p).collect();
        self.from_coords(&c)
    }

    pub fn sub(&self, a: RingElem, b: RingElem) -> RingElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: RingElem, b: RingElem) -> RingElem {
        if let Some(t) = &self.0.tables {
            return RingElem(t.mul[(a.0 as u64 * self.0.size + b.0 as u64) as usize]);
        }
        self.mul_slow(a, b)
    }

    fn mul_slow(&self, a: RingElem, b: RingElem) -> RingElem {
        let p = self.0.p as u64;
        let ca = self.coords(a);
        let cb = self.coords(b);
        let mut out = vec![0u64; self.0.dim];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let xy = x as u64 * y as u64;
                for (t, &c) in self.0.basis_mul[i][j].iter().enumerate() {
                    out[t] = (out[t] + xy * c as u64) % p;
                }
            }
        }
        let out: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
        self.from_coords(&out)
    }

    pub fn pow(&self, a: RingElem, mut e: u64) -> RingElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// a -> a^p
    pub fn frobenius(&self, a: RingElem) -> RingElem {
        if let Some(t) = &self.0.tables {
            return RingElem(t.frob[a.0 as usize]);
        }
        self.pow(a, self.0.p as u64)
    }

    pub fn frobenius_iter(&self, a: RingElem, k: u32) -> RingElem {
        (0..k).fold(a, |x, _| self.frobenius(x))
    }

    /// Inverse of the Frobenius on a perfect ring.
    pub fn frobenius_inv(&self, a: RingElem) -> Result<RingElem> {
        if !self.is_perfect() {
            return Err(Error::NotPerfect);
        }
        // On a finite perfect ring the Frobenius has finite order; walk the cycle.
        let mut prev = a;
        let mut cur = self.frobenius(a);
        while cur != a {
            prev = cur;
            cur = self.frobenius(cur);
        }
        Ok(prev)
    }

    pub fn is_unit(&self, a: RingElem) -> bool {
        self.residue_fields().iter().all(|(_, hom)| hom.apply(a) != RingElem(0))
    }

    pub fn inv(&self, a: RingElem) -> Option<RingElem> {
        if !self.is_unit(a) {
            return None;
        }
        let mut x = a;
        loop {
            let next = self.mul(x, a);
            if next == self.one() {
                return Some(x);
            }
            x = next;
        }
    }

    /// Residue fields with their surjections from this ring.
    pub fn residue_fields(&self) -> Vec<(FiniteRing, RingHom)> {
        match &self.0.kind {
            Kind::Field { .. } => vec![(self.clone(), RingHom::identity(self))],
            Kind::Truncated { base, .. } => {
                let bd = base.dim();
                let mut m = vec![vec![0; self.dim()]; bd];
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = 1;
                }
                let to_base = RingHom::from_matrix_unchecked(self, base, m);
                base.residue_fields().into_iter().map(|(k, h)| (k, to_base.then(&h))).collect()
            }
            Kind::Product { factors } => {
                let mut out = Vec::new();
                let mut off = 0;
                for f in factors {
                    let mut m = vec![vec![0; self.dim()]; f.dim()];
                    for (i, row) in m.iter_mut().enumerate() {
                        row[off + i] = 1;
                    }
                    let proj = RingHom::from_matrix_unchecked(self, f, m);
                    for (k, h) in f.residue_fields() {
                        out.push((k, proj.then(&h)));
                    }
                    off += f.dim();
                }
                out
            }
        }
    }

    pub fn format_elem(&self, a: RingElem) -> String {
        let c = self.coords(a);
        if c.len() == 1 {
            c[0].to_string()
        } else {
            let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        }
    }

    /// Parses `"k"` (the integer k times 1) or `"(c0,c1,...)"` (coordinates).
    pub fn parse_elem(&self, s: &str) -> Result<RingElem> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let c: Vec<u32> = inner
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad coordinate {t:?}"))))
                .collect::<Result<_>>()?;
            if c.len() != self.dim() || c.iter().any(|&x| x >= self.p()) {
                return Err(Error::Parse(format!("{s:?} is not an element of {}", self.spec())));
            }
            return Ok(self.from_coords(&c));
        }
        let k: i64 = s.parse().map_err(|_| Error::Parse(format!("bad ring element {s:?}")))?;
        Ok(self.from_int(k))
    }

    fn build_tables(&self) -> Tables {
        let n = self.0.size as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                add[a * n + b] = self.add_slow(RingElem(a as u32), RingElem(b as u32)).0;
                mul[a * n + b] = self.mul_slow(RingElem(a as u32), RingElem(b as u32)).0;
            }
        }
        let neg = (0..n)
            .map(|a| {
                let p = self.0.p;
                let c: Vec<u32> = self.coords(RingElem(a as u32)).into_iter().map(|x| (p - x) % p).collect();
                self.from_coords(&c).0
            })
            .collect();
        let frob = (0..n)
            .map(|a| {
                let x = RingElem(a as u32);
                let mut acc = self.one();
                for _ in 0..self.0.p {
                    acc = self.mul_slow(acc, x);
                }
                acc.0
            })
            .collect();
        Tables { add, mul, neg, frob }
    }

    fn compute_perfect(&self) -> bool {
        let mut seen = vec![false; self.0.size as usize];
        for a in self.elements() {
            let b = if let Some(t) = &self.0.tables {
                RingElem(t.frob[a.0 as usize])
            } else {
                self.pow(a, self.0.p as u64)
            };
            if std::mem::replace(&mut seen[b.0 as usize], true) {
                return false;
            }
        }
        true
    }
}

fn pack(c: &[u32], p: u32) -> RingElem {
    RingElem(c.iter().fold(0u32, |acc, &x| acc * p + x % p))
}

fn unpack(a: RingElem, p: u32, dim: usize) -> Vec<u32> {
    let mut out = vec![0; dim];
    let mut x = a.0;
    for i in (0..dim).rev() {
        out[i] = x % p;
        x /= p;
    }
    out
}

/// An F_p-linear ring homomorphism, stored as a matrix on coordinates.
#[derive(Clone, Debug)]
pub struct RingHom {
    source: FiniteRing,
    target: FiniteRing,
    /// target.dim() rows, source.dim() columns
    matrix: Vec<Vec<u32>>,
}

impl RingHom {
    pub fn identity(r: &FiniteRing) -> Self {
        let m = (0..r.dim()).map(|i| (0..r.dim()).map(|j| u32::from(i == j)).collect()).collect();
        RingHom { source: r.clone(), target: r.clone(), matrix: m }
    }

    fn from_matrix_unchecked(source: &FiniteRing, target: &FiniteRing, matrix: Vec<Vec<u32>>) -> Self {
        RingHom { source: source.clone(), target: target.clone(), matrix }
    }

    /// Builds the F_p-linear map sending basis element b_i to `images[i]` and
    /// checks multiplicativity on basis pairs and unitality.
    pub fn from_basis_images(source: &FiniteRing, target: &FiniteRing, images: &[RingElem]) -> Result<Self> {
        if source.p() != target.p() {
            return Err(Error::NotHomomorphism("characteristics differ".into()));
        }
        if images.len() != source.dim() {
            return Err(Error::NotHomomorphism("wrong number of basis images".into()));
        }
        let cols: Vec<Vec<u32>> = images.iter().map(|&x| target.coords(x)).collect();
        let matrix = (0..target.dim()).map(|i| (0..source.dim()).map(|j| cols[j][i]).collect()).collect();
        let hom = RingHom { source: source.clone(), target: target.clone(), matrix };
        hom.verify()?;
        Ok(hom)
    }

    fn verify(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if self.apply(s.one()) != t.one() {
            return Err(Error::NotHomomorphism("1 is not mapped to 1".into()));
        }
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let (bi, bj) = (s.basis(i), s.basis(j));
                if self.apply(s.mul(bi, bj)) != t.mul(self.apply(bi), self.apply(bj)) {
                    return Err(Error::NotHomomorphism(format!("fails on basis pair ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    /// The embedding of a field into a larger field of the same characteristic,
    /// sending the generator to the first root of its modulus in element order.
    pub fn field_embedding(small: &FiniteRing, big: &FiniteRing) -> Result<Self> {
        let (rs, rb) = match (small.field_degree(), big.field_degree()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::NotHomomorphism("field embedding needs two fields".into())),
        };
        if small.p() != big.p() || rb % rs != 0 {
            return Err(Error::NotHomomorphism(format!("no embedding of degree {rs} into degree {rb}")));
        }
        if rs == 1 {
            return RingHom::from_basis_images(small, big, &[big.one()]);
        }
        let modulus = small.modulus().expect("field").to_vec();
        for cand in big.elements() {
            let mut acc = big.zero();
            for &c in modulus.iter().rev() {
                acc = big.add(big.mul(acc, cand), big.from_int(c as i64));
            }
            if acc == big.zero() {
                let images: Vec<RingElem> = (0..rs).map(|i| big.pow(cand, i as u64)).collect();
                return RingHom::from_basis_images(small, big, &images);
            }
        }
        Err(Error::NotHomomorphism("modulus has no root in the target".into()))
    }

    pub fn source(&self) -> &FiniteRing {
        &self.source
    }

    pub fn target(&self) -> &FiniteRing {
        &self.target
    }

    pub fn apply(&self, a: RingElem) -> RingElem {
        let p = self.source.p() as u64;
        let c = self.source.coords(a);
        let out: Vec<u32> = self
            .matrix
            .iter()
            .map(|row| (row.iter().zip(&c).map(|(&m, &x)| m as u64 * x as u64).sum::<u64>() % p) as u32)
            .collect();
        self.target.from_coords(&out)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &RingHom) -> RingHom {
        let p = self.source.p() as u64;
        let rows = next.matrix.len();
        let cols = self.source.dim();
        let inner = self.matrix.len();
        let matrix = (0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        ((0..inner).map(|k| next.matrix[i][k] as u64 * self.matrix[k][j] as u64).sum::<u64>() % p)
                            as u32
                    })
                    .collect()
            })
            .collect();
        RingHom { source: self.source.clone(), target: next.target.clone(), matrix }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rings_under_64() -> Vec<FiniteRing> {
        [
            "GF(2)",
            "GF(3)",
            "GF(5)",
            "GF(2^2)",
            "GF(2^3)",
            "GF(3^2)",
            "GF(2)[x]/x^3",
            "GF(2)[x]/x^2",
            "GF(3)[x]/x^2",
            "GF(2)*GF(2^2)",
            "GF(2^2)[x]/x^2",
            "GF(2)*GF(2)*GF(2)",
        ]
        .iter()
        .map(|s| FiniteRing::parse(s).unwrap())
        .collect()
    }

    #[test]
    fn builtin_moduli_are_irreducible() {
        for p in [2, 3, 5] {
            for r in 2..=4 {
                let m = builtin_modulus(p, r).unwrap();
                assert!(is_irreducible(&m, p), "p={p} r={r}");
            }
        }
        assert!(!is_irreducible(&[1, 0, 1], 2));
    }

    #[test]
    fn sizes_and_perfectness() {
        let f2 = FiniteRing::parse("GF(2)").unwrap();
        assert_eq!(f2.size(), 2);
        assert!(f2.is_perfect());
        let t = FiniteRing::parse("GF(2)[x]/x^3").unwrap();
        assert_eq!(t.size(), 8);
        assert!(!t.is_perfect());
        let image: std::collections::BTreeSet<_> = t.elements().map(|a| t.frobenius(a)).collect();
        assert_eq!(image.len(), 4);
        let f4 = FiniteRing::parse("GF(2^2)").unwrap();
        assert_eq!(f4.size(), 4);
        assert!(f4.is_perfect());
        for a in f4.elements() {
            assert_eq!(f4.frobenius(f4.frobenius(a)), a);
        }
        let prod = FiniteRing::parse("GF(2)*GF(2^2)").unwrap();
        assert_eq!(prod.size(), 8);
        assert!(prod.is_perfect());
    }

    #[test]
    fn frobenius_examples() {
        let f2 = FiniteRing::parse("GF(2)").unwrap();
        assert_eq!(f2.frobenius(f2.one()), f2.one());
        let f4 = FiniteRing::parse("GF(2^2)").unwrap();
        let g = f4.basis(1);
        assert_eq!(f4.frobenius(g), f4.add(g, f4.one()));
        let t = FiniteRing::parse("GF(2)[x]/x^3").unwrap();
        let x = t.basis(1);
        assert_eq!(t.frobenius(x), t.mul(x, x));
        assert_eq!(t.coords(t.mul(x, x)), vec![0, 0, 1]);
    }

    #[test]
    fn ring_axioms_exhaustive() {
        for r in rings_under_64() {
            let els: Vec<_> = r.elements().collect();
            for &a in &els {
                assert_eq!(r.add(a, r.zero()), a);
                assert_eq!(r.mul(a, r.one()), a);
                assert_eq!(r.add(a, r.neg(a)), r.zero());
                for &b in &els {
                    assert_eq!(r.add(a, b), r.add(b, a));
                    assert_eq!(r.mul(a, b), r.mul(b, a));
                    assert_eq!(r.frobenius(r.add(a, b)), r.add(r.frobenius(a), r.frobenius(b)));
                    assert_eq!(r.frobenius(r.mul(a, b)), r.mul(r.frobenius(a), r.frobenius(b)));
                    for &c in &els {
                        assert_eq!(r.mul(a, r.mul(b, c)), r.mul(r.mul(a, b), c));
                        assert_eq!(r.add(a, r.add(b, c)), r.add(r.add(a, b), c));
                        assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
                    }
                }
            }
            let bijective =
                els.iter().map(|&a| r.frobenius(a)).collect::<std::collections::BTreeSet<_>>().len() == els.len();
            assert_eq!(bijective, r.is_perfect(), "{:?}", r);
        }
    }

    #[test]
    fn residue_fields_examples() {
        let f4 = FiniteRing::parse("GF(2^2)").unwrap();
        let res = f4.residue_fields();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].0, f4);
        let t = FiniteRing::parse("GF(2)[x]/x^3").unwrap();
        let res = t.residue_fields();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].0.size(), 2);
        assert_eq!(res[0].1.apply(t.basis(1)), res[0].0.zero());
        let prod = FiniteRing::parse("GF(2)*GF(2^2)").unwrap();
        let res = prod.residue_fields();
        assert_eq!(res.iter().map(|(k, _)| k.size()).collect::<Vec<_>>(), vec![2, 4]);
        for (k, h) in &res {
            for a in prod.elements() {
                for b in prod.elements() {
                    assert_eq!(h.apply(prod.mul(a, b)), k.mul(h.apply(a), h.apply(b)));
                }
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert_eq!(FiniteRing::parse("GF(4)").unwrap_err(), Error::NotPrime(4));
        let bad = RingSpec::GaloisField { p: 2, r: 2, modulus: Some(vec![1, 0, 1]) };
        assert!(matches!(FiniteRing::new(&bad), Err(Error::ReducibleModulus(..))));
        assert!("GF(2)[x]/y^2".parse::<RingSpec>().is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["GF(2)", "GF(3^2)", "GF(2)[x]/x^3", "GF(2)*GF(2^2)", "GF(2^2)[x]/x^2*GF(3)"] {
            let spec: RingSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<RingSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn field_embedding_and_units() {
        let f2 = FiniteRing::parse("GF(2)").unwrap();
        let f4 = FiniteRing::parse("GF(2^2)").unwrap();
        let f16 = FiniteRing::parse("GF(2^4)").unwrap();
        RingHom::field_embedding(&f2, &f4).unwrap();
        let e = RingHom::field_embedding(&f4, &f16).unwrap();
        for a in f4.elements() {
            for b in f4.elements() {
                assert_eq!(e.apply(f4.mul(a, b)), f16.mul(e.apply(a), e.apply(b)));
            }
        }
        let t = FiniteRing::parse("GF(2)[x]/x^3").unwrap();
        let u = t.add(t.one(), t.basis(1));
        let ui = t.inv(u).unwrap();
        assert_eq!(t.mul(u, ui), t.one());
        assert!(t.inv(t.basis(1)).is_none());
    }
}
