//! Newton polygons of truncated Dieudonne modules.
//!
//! Over F_{p^r}, V^r is linear with matrix Y = f^{r-1}(X) ... f(X) X. The
//! slopes are the p-adic Newton slopes of det(t - Y), divided by r. They lie
//! in [0, 1] and sum to the type d; the etale unit object has slope 0 and the
//! multiplicative one slope 1.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::DieudonneModule;
use crate::display::sigma_pow;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NewtonPolygon {
    slopes: Vec<Ratio<i64>>,
}

/// Lower convex hull of points sorted by abscissa.
fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

impl NewtonPolygon {
    pub fn from_slopes(mut slopes: Vec<Ratio<i64>>) -> Self {
        slopes.sort();
        NewtonPolygon { slopes }
    }

    /// Refuses with InsufficientLevel when some coefficient that vanishes at
    /// the working precision could still lie below the computed hull.
    pub fn of_module(module: &DieudonneModule) -> Result<Self> {
        let w = module.witt();
        let n = w.level() as i64;
        let h = module.rank();
        let r = module.field().field_degree().ok_or(Error::NotAField)?;
        let x = module.v_matrix();
        let mut y = Matrix::identity(w, h);
        for i in 0..r {
            y = sigma_pow(w, x, i).mul(w, &y);
        }
        let coeffs = y.charpoly(w);
        let end = (h as i64, r as i64 * module.type_d() as i64);
        let mut points = vec![(0, 0)];
        let mut unknown = Vec::new();
        for (k, &c) in coeffs.iter().enumerate().take(h).skip(1) {
            let v = w.valuation(c) as i64;
            if v < n {
                points.push((k as i64, v));
            } else {
                unknown.push(k as i64);
            }
        }
        if h > 0 {
            points.push(end);
        }
        let hull = lower_hull(&points);
        for &k in &unknown {
            let seg = hull.windows(2).find(|s| s[0].0 <= k && k <= s[1].0).expect("abscissa inside hull");
            let (a, b) = (seg[0], seg[1]);
            // hull value at k is a.1 + (b.1 - a.1) (k - a.0) / (b.0 - a.0)
            if a.1 * (b.0 - a.0) + (b.1 - a.1) * (k - a.0) > n * (b.0 - a.0) {
                return Err(Error::InsufficientLevel { n: n as usize });
            }
        }
        let mut slopes = Vec::with_capacity(h);
        for s in hull.windows(2) {
            let len = s[1].0 - s[0].0;
            let slope = Ratio::new(s[1].1 - s[0].1, len * r as i64);
            slopes.extend(std::iter::repeat_n(slope, len as usize));
        }
        Ok(NewtonPolygon::from_slopes(slopes))
    }

    pub fn slopes(&self) -> &[Ratio<i64>] {
        &self.slopes
    }

    pub fn height(&self) -> usize {
        self.slopes.len()
    }

    pub fn min_slope(&self) -> Option<Ratio<i64>> {
        self.slopes.first().copied()
    }

    pub fn total(&self) -> Ratio<i64> {
        self.slopes.iter().sum()
    }

    /// Distinct slopes with multiplicities, increasing.
    pub fn multiplicities(&self) -> Vec<(Ratio<i64>, usize)> {
        let mut out: Vec<(Ratio<i64>, usize)> = Vec::new();
        for &s in &self.slopes {
            match out.last_mut() {
                Some((t, m)) if *t == s => *m += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    pub fn to_record(&self) -> Vec<SlopeRecord> {
        self.multiplicities().into_iter().map(|(s, m)| SlopeRecord { slope: s.to_string(), multiplicity: m }).collect()
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.slopes.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub slope: String,
    pub multiplicity: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display::TruncatedDisplay;
    use crate::ring::FiniteRing;
    use crate::witt::WittRing;

    fn wr(spec: &str, n: usize) -> WittRing {
        WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
    }

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn unit_slopes() {
        for (spec, n) in [("GF(2)", 1), ("GF(2)", 2), ("GF(2^2)", 2), ("GF(3)", 1)] {
            let w = wr(spec, n);
            let e = DieudonneModule::from_display(&TruncatedDisplay::etale_unit(&w)).unwrap();
            let m = DieudonneModule::from_display(&TruncatedDisplay::mult_unit(&w)).unwrap();
            assert_eq!(e.newton_polygon().unwrap().slopes(), &[r(0, 1)]);
            assert_eq!(m.newton_polygon().unwrap().slopes(), &[r(1, 1)]);
        }
    }

    #[test]
    fn supersingular_antidiagonal() {
        let w = wr("GF(2)", 2);
        let m = Matrix::new(2, 2, vec![w.zero(), w.one(), w.one(), w.zero()]);
        let disp = TruncatedDisplay::from_matrix(&w, 1, m).unwrap();
        let np = DieudonneModule::from_display(&disp).unwrap().newton_polygon().unwrap();
        assert_eq!(np.slopes(), &[r(1, 2), r(1, 2)]);
        assert_eq!(np.to_string(), "[1/2, 1/2]");
        assert_eq!(np.to_record(), vec![SlopeRecord { slope: "1/2".into(), multiplicity: 2 }]);
        // at level 1 the middle coefficient is invisible and the hull reaches 1/2 < 1
        let w1 = wr("GF(2)", 1);
        let disp1 = disp.truncate().unwrap();
        assert_eq!(disp1.witt(), &w1);
        let np1 = DieudonneModule::from_display(&disp1).unwrap().newton_polygon().unwrap();
        assert_eq!(np1.slopes(), &[r(1, 2), r(1, 2)]);
    }

    #[test]
    fn ordinary_needs_precision() {
        // E + M at level 1: charpoly t^2 - (1 + p) t + p, the middle
        // coefficient is a unit so the polygon is visible
        let w = wr("GF(2)", 1);
        let e = TruncatedDisplay::etale_unit(&w);
        let m = TruncatedDisplay::mult_unit(&w);
        let np = DieudonneModule::from_display(&e.direct_sum(&m).unwrap()).unwrap().newton_polygon().unwrap();
        assert_eq!(np.slopes(), &[r(0, 1), r(1, 1)]);
    }

    #[test]
    fn hull_guard() {
        let w = wr("GF(2)", 1);
        let m = TruncatedDisplay::mult_unit(&w);
        let sum = m.direct_sum(&m).unwrap().direct_sum(&m).unwrap();
        // V = p on rank 3 at level 1: all coefficients vanish, the hull from
        // (0,0) to (3,3) has value 1 at k = 1, allowed, and 2 at k = 2, refused
        assert_eq!(
            DieudonneModule::from_display(&sum).unwrap().newton_polygon(),
            Err(Error::InsufficientLevel { n: 1 })
        );
    }
}
