//! Universal sum and product polynomials for p-typical Witt vectors.
//!
//! Polynomials are generated over the integers from the ghost recursion and
//! kept in both integer form (for symbolic verification) and mod-p form (for
//! evaluation).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Bits per variable in a packed exponent vector.
const EXP_BITS: u32 = 8;
const EXP_MASK: u128 = (1 << EXP_BITS) - 1;
/// Hard cap on variable count imposed by the packing (X_0..X_{n-1}, Y_0..Y_{n-1}).
const MAX_VARS: usize = (128 / EXP_BITS) as usize;

/// Default maximum level per prime.
pub fn default_max_level(p: u32) -> usize {
    match p {
        2 => 5,
        3 => 4,
        5 => 3,
        _ => 2,
    }
}

/// Integer polynomial in variables X_0..X_{n-1} (indices 0..n) and
/// Y_0..Y_{n-1} (indices n..2n), keyed by packed exponent vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntPoly {
    pub terms: HashMap<u128, BigInt>,
}

fn exp_of(key: u128, var: usize) -> u32 {
    ((key >> (EXP_BITS as usize * var)) & EXP_MASK) as u32
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly::default()
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = IntPoly::zero();
        if !c.is_zero() {
            p.terms.insert(0, c);
        }
        p
    }

    pub fn var(v: usize) -> Self {
        let mut p = IntPoly::zero();
        p.terms.insert(1u128 << (EXP_BITS as usize * v), BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: u128, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        if s.is_zero() {
            return IntPoly::zero();
        }
        IntPoly { terms: self.terms.iter().map(|(&k, c)| (k, c * s)).collect() }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = IntPoly::zero();
        for (&k1, c1) in &self.terms {
            for (&k2, c2) in &other.terms {
                // Exponents never overflow a field: degrees are bounded by p^(n-1) < 256.
                out.add_term(k1 + k2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> IntPoly {
        let mut base = self.clone();
        let mut acc = IntPoly::constant(BigInt::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division by an integer; fails if some coefficient is not divisible.
    pub fn div_exact(&self, d: &BigInt) -> Option<IntPoly> {
        let mut out = IntPoly::zero();
        for (&k, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.terms.insert(k, q);
        }
        Some(out)
    }

    pub fn max_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|&k| (0..MAX_VARS).map(move |v| exp_of(k, v))).max().unwrap_or(0)
    }
}

/// A monomial reduced mod p: coefficient and (variable, exponent) factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coef: u32,
    pub factors: Vec<(u8, u16)>,
}

/// Polynomial with coefficients reduced mod p, in a deterministic term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPoly {
    pub terms: Vec<Monomial>,
}

impl ModPoly {
    fn from_int(poly: &IntPoly, p: u32) -> ModPoly {
        let pb = BigInt::from(p);
        let mut keys: Vec<u128> = poly.terms.keys().copied().collect();
        keys.sort_unstable();
        let mut terms = Vec::new();
        for k in keys {
            let c = poly.terms[&k].mod_floor(&pb).to_u32().expect("reduced coefficient");
            if c == 0 {
                continue;
            }
            let factors = (0..MAX_VARS)
                .filter_map(|v| {
                    let e = exp_of(k, v);
                    (e > 0).then_some((v as u8, e as u16))
                })
                .collect();
            terms.push(Monomial { coef: c, factors });
        }
        ModPoly { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Sum and product polynomials for a prime up to a given level.
#[derive(Debug)]
pub struct WittTables {
    pub p: u32,
    pub n: usize,
    pub sum_int: Vec<IntPoly>,
    pub prod_int: Vec<IntPoly>,
    pub sum: Vec<ModPoly>,
    pub prod: Vec<ModPoly>,
}

/// Ghost component w_k in variables starting at `offset`.
fn ghost(p: u32, k: usize, offset: usize) -> IntPoly {
    let mut out = IntPoly::zero();
    for i in 0..=k {
        let term = IntPoly::var(offset + i).pow(p.pow((k - i) as u32));
        out = out.add(&term.scale(&BigInt::from(p).pow(i as u32)));
    }
    out
}

/// Ghost component w_k evaluated on a sequence of polynomials.
fn ghost_of(p: u32, k: usize, polys: &[IntPoly]) -> IntPoly {
    let mut out = IntPoly::zero();
    for (i, poly) in polys.iter().enumerate().take(k + 1) {
        let term = poly.pow(p.pow((k - i) as u32));
        out = out.add(&term.scale(&BigInt::from(p).pow(i as u32)));
    }
    out
}

/// Solves w_k(Z) = target for Z_k given Z_0..Z_{k-1}.
fn next_from_ghost(p: u32, k: usize, target: &IntPoly, prev: &[IntPoly]) -> Result<IntPoly> {
    let mut rest = target.clone();
    for (i, z) in prev.iter().enumerate() {
        let term = z.pow(p.pow((k - i) as u32)).scale(&BigInt::from(p).pow(i as u32));
        rest = rest.sub(&term);
    }
    rest.div_exact(&BigInt::from(p).pow(k as u32))
        .ok_or_else(|| Error::Discrepancy(format!("ghost recursion not divisible at level {k}")))
}

fn extend(p: u32, n: usize, sum: &mut Vec<IntPoly>, prod: &mut Vec<IntPoly>) -> Result<()> {
    // Variables are indexed relative to the final level n so that Y_i = var(n + i).
    while sum.len() < n {
        let k = sum.len();
        let gx = ghost(p, k, 0);
        let gy = ghost(p, k, n);
        let s = next_from_ghost(p, k, &gx.add(&gy), sum)?;
        let m = next_from_ghost(p, k, &gx.mul(&gy), prod)?;
        sum.push(s);
        prod.push(m);
    }
    Ok(())
}

type TableCache = Mutex<HashMap<(u32, usize), Arc<WittTables>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Tables for prime p up to level n, honouring the default resource guard.
pub fn witt_tables(p: u32, n: usize) -> Result<Arc<WittTables>> {
    witt_tables_with_limit(p, n, default_max_level(p))
}

pub fn witt_tables_with_limit(p: u32, n: usize, limit: usize) -> Result<Arc<WittTables>> {
    if !crate::ring::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::LevelMismatch(0, 1));
    }
    let degree_ok = (p as u64).pow(n as u32 - 1) < (1 << EXP_BITS);
    if n > limit || 2 * n > MAX_VARS || !degree_ok {
        return Err(Error::WittGuard { p, n, limit });
    }
    if let Some(t) = cache().lock().expect("table cache").get(&(p, n)) {
        return Ok(t.clone());
    }
    let mut sum = Vec::new();
    let mut prod = Vec::new();
    extend(p, n, &mut sum, &mut prod)?;
    let tables = Arc::new(WittTables {
        p,
        n,
        sum: sum.iter().map(|s| ModPoly::from_int(s, p)).collect(),
        prod: prod.iter().map(|s| ModPoly::from_int(s, p)).collect(),
        sum_int: sum,
        prod_int: prod,
    });
    cache().lock().expect("table cache").insert((p, n), tables.clone());
    Ok(tables)
}

impl WittTables {
    /// Checks w_k(S) = w_k(X) + w_k(Y) and w_k(P) = w_k(X) w_k(Y) as integer
    /// polynomials for every k < n.
    pub fn verify_ghost_identities(&self) -> Result<()> {
        for k in 0..self.n {
            let gx = ghost(self.p, k, 0);
            let gy = ghost(self.p, k, self.n);
            let ds = ghost_of(self.p, k, &self.sum_int).sub(&gx.add(&gy));
            if !ds.is_zero() {
                return Err(Error::Discrepancy(format!("sum ghost identity fails at k = {k}")));
            }
            let dp = ghost_of(self.p, k, &self.prod_int).sub(&gx.mul(&gy));
            if !dp.is_zero() {
                return Err(Error::Discrepancy(format!("product ghost identity fails at k = {k}")));
            }
        }
        Ok(())
    }

    /// Largest absolute integer coefficient, for diagnostics.
    pub fn max_coefficient(&self) -> BigInt {
        self.sum_int
            .iter()
            .chain(&self.prod_int)
            .flat_map(|p| p.terms.values())
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(poly: &ModPoly, n: usize) -> Vec<String> {
        poly.terms
            .iter()
            .map(|m| {
                let vars: Vec<String> = m
                    .factors
                    .iter()
                    .map(|&(v, e)| {
                        let name = if (v as usize) < n { format!("X{}", v) } else { format!("Y{}", v as usize - n) };
                        if e == 1 {
                            name
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect();
                format!("{}*{}", m.coef, vars.join("*"))
            })
            .collect()
    }

    #[test]
    fn level_one_tables() {
        let t = witt_tables(2, 1).unwrap();
        let mut s = render(&t.sum[0], 1);
        s.sort();
        assert_eq!(s, vec!["1*X0", "1*Y0"]);
        assert_eq!(render(&t.prod[0], 1), vec!["1*X0*Y0"]);
    }

    #[test]
    fn second_sum_polynomial_mod_two() {
        let t = witt_tables(2, 2).unwrap();
        let mut s = render(&t.sum[1], 2);
        s.sort();
        assert_eq!(s, vec!["1*X0*Y0", "1*X1", "1*Y1"]);
        // Over the integers the cross term carries coefficient -1.
        let key = 1u128 | (1u128 << (EXP_BITS as usize * 2));
        assert_eq!(t.sum_int[1].terms[&key], BigInt::from(-1));
    }

    #[test]
    fn ghost_identities_small() {
        for (p, n) in [(2, 3), (3, 2), (5, 2)] {
            witt_tables(p, n).unwrap().verify_ghost_identities().unwrap();
        }
    }

    #[test]
    fn guard() {
        assert!(matches!(witt_tables(2, 6), Err(Error::WittGuard { .. })));
        assert!(matches!(witt_tables(5, 4), Err(Error::WittGuard { .. })));
        assert!(matches!(witt_tables(4, 1), Err(Error::NotPrime(4))));
    }
}
