//! Linear algebra over Z/p^e via a Smith-type reduction with tracked row
//! operations.

/// Arithmetic context for Z/p^e.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zpe {
    pub p: u64,
    pub e: u32,
    pub modulus: u64,
}

impl Zpe {
    pub fn new(p: u64, e: u32) -> Self {
        Zpe { p, e, modulus: p.pow(e) }
    }

    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn valuation(&self, mut x: u64) -> u32 {
        x %= self.modulus;
        if x == 0 {
            return self.e;
        }
        let mut v = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        if !self.is_unit(x) {
            return None;
        }
        // extended Euclid on (x, modulus)
        let (mut a, mut b) = (x as i128 % self.modulus as i128, self.modulus as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while b != 0 {
            let q = a / b;
            (a, b) = (b, a - q * b);
            (s0, s1) = (s1, s0 - q * s1);
        }
        Some(self.reduce(s0))
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b % self.modulus) % self.modulus
    }
}

/// Result of reducing a matrix A (m x c): U A V = diag(p^v_0, ..., p^v_{t-1}, 0...).
pub struct SmithForm {
    /// Row transform U, m x m, invertible.
    pub u: Vec<Vec<u64>>,
    /// Valuations of the nonzero diagonal entries.
    pub vals: Vec<u32>,
}

pub fn smith(z: &Zpe, a: &[Vec<u64>], cols: usize) -> SmithForm {
    let m = a.len();
    let mut b: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| x % z.modulus).collect()).collect();
    let mut u: Vec<Vec<u64>> = (0..m).map(|i| (0..m).map(|j| u64::from(i == j)).collect()).collect();
    let mut vals = Vec::new();
    let mut t = 0;
    while t < m.min(cols) {
        // pivot of minimal valuation
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in b.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = z.valuation(x);
                if v < z.e && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break;
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((v, pi, pj)) = best else { break };
        b.swap(t, pi);
        u.swap(t, pi);
        for row in b.iter_mut() {
            row.swap(t, pj);
        }
        let pv = z.p.pow(v);
        let unit = z.inv(b[t][t] / pv).expect("pivot unit part");
        for x in b[t].iter_mut() {
            *x = z.mul(*x, unit);
        }
        for x in u[t].iter_mut() {
            *x = z.mul(*x, unit);
        }
        for i in 0..m {
            if i == t || b[i][t] == 0 {
                continue;
            }
            let f = b[i][t] / pv;
            let (bt, ut) = (b[t].clone(), u[t].clone());
            for (x, &y) in b[i].iter_mut().zip(&bt) {
                *x = z.sub(*x, z.mul(f, y));
            }
            for (x, &y) in u[i].iter_mut().zip(&ut) {
                *x = z.sub(*x, z.mul(f, y));
            }
        }
        for j in 0..cols {
            if j == t || b[t][j] == 0 {
                continue;
            }
            let f = b[t][j] / pv;
            for row in b.iter_mut() {
                let y = row[t];
                row[j] = z.sub(row[j], z.mul(f, y));
            }
        }
        vals.push(v);
        t += 1;
    }
    SmithForm { u, vals }
}

/// Generators of the left kernel {x : x A = 0} of an m x c matrix.
pub fn left_kernel(z: &Zpe, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    let sf = smith(z, a, cols);
    let mut gens = Vec::new();
    for (i, row) in sf.u.iter().enumerate() {
        let scale = match sf.vals.get(i) {
            Some(&0) => continue,
            Some(&v) => z.p.pow(z.e - v),
            None => 1,
        };
        gens.push(row.iter().map(|&x| z.mul(x, scale)).collect());
    }
    gens
}

/// log_p of the order of the row span.
pub fn span_log_order(z: &Zpe, a: &[Vec<u64>], cols: usize) -> u64 {
    smith(z, a, cols).vals.iter().map(|&v| (z.e - v) as u64).sum()
}

/// Some x with x A = b, if one exists.
pub fn solve_left(z: &Zpe, a: &[Vec<u64>], b: &[u64], cols: usize) -> Option<Vec<u64>> {
    let mut stacked = a.to_vec();
    stacked.push(b.to_vec());
    let m = a.len();
    for g in left_kernel(z, &stacked, cols) {
        if let Some(inv) = z.inv(g[m]) {
            let s = z.sub(0, inv);
            return Some(g[..m].iter().map(|&x| z.mul(x, s)).collect());
        }
    }
    None
}

/// Invariant factors of the quotient (Z/p^e)^cols / rowspan(A), as exponents
/// k of the cyclic factors Z/p^k (only k > 0 listed, in decreasing order).
pub fn quotient_invariants(z: &Zpe, a: &[Vec<u64>], cols: usize) -> Vec<u32> {
    let sf = smith(z, a, cols);
    let mut out: Vec<u32> = sf.vals.iter().filter(|&&v| v > 0).copied().collect();
    out.extend(std::iter::repeat_n(z.e, cols - sf.vals.len()));
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}
