//! The acceptance grid. Each criterion is an exact check plus a wall-clock
//! limit; both must hold for a pass.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::{classify, ClassifyArgs};
use crate::dieudonne::DieudonneModule;
use crate::display::{hom_log_order, TruncatedDisplay};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::moduli::{dual_display, link_duals, Classification, ModuliInstance, DEFAULT_BUDGET};
use crate::ring::FiniteRing;
use crate::witt::galois::galois_ring_oracle;
use crate::witt::tables::{default_max_level, witt_tables};
use crate::witt::{Witt, WittRing};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// p = 2 only.
    Quick,
    /// Adds p = 3 and p = 5 where the criterion covers them.
    Full,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub limit: Duration,
    check: fn(Profile, u64) -> Result<String>,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "witt arithmetic", limit: Duration::from_secs(10), check: witt_correctness },
    Criterion { id: 2, name: "pre-display axioms", limit: Duration::from_secs(30), check: predisplay_axioms },
    Criterion { id: 3, name: "V# contract", limit: Duration::from_secs(30), check: vsharp_contract },
    Criterion { id: 4, name: "Hom(etale, mult) = 0", limit: Duration::from_secs(5), check: unit_homs },
    Criterion { id: 5, name: "mass formula", limit: Duration::from_secs(120), check: mass_formula },
    Criterion { id: 6, name: "orbit/isom oracle", limit: Duration::from_secs(120), check: oracle_equivalence },
    Criterion { id: 7, name: "Dieudonne round trip", limit: Duration::from_secs(60), check: dieudonne_round_trip },
    Criterion { id: 8, name: "nilpotence vs slopes", limit: Duration::from_secs(60), check: nilpotence_slopes },
    Criterion { id: 9, name: "duality", limit: Duration::from_secs(30), check: duality },
    Criterion { id: 10, name: "determinism", limit: Duration::from_secs(60), check: determinism },
];

pub fn run_criterion(c: &Criterion, profile: Profile, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = (c.check)(profile, seed);
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(d) if elapsed <= c.limit => (true, d),
        Ok(d) => (false, format!("{d}; took {:.1}s, limit {}s", elapsed.as_secs_f64(), c.limit.as_secs())),
        Err(e) => (false, e.to_string()),
    };
    Outcome { id: c.id, name: c.name, passed, detail, elapsed, limit: c.limit }
}

pub fn run_all(profile: Profile, seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run_criterion(c, profile, seed)).collect()
}

pub fn render(outcomes: &[Outcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let _ = writeln!(
            s,
            "{} [{:>2}] {:<22} {:>7.2}s  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(s, "{passed}/{} criteria passed", outcomes.len());
    s
}

fn primes(profile: Profile, all: &[u32]) -> Vec<u32> {
    match profile {
        Profile::Quick => all.iter().copied().filter(|&p| p == 2).collect(),
        Profile::Full => all.to_vec(),
    }
}

fn witt(spec: &str, n: usize) -> Result<WittRing> {
    WittRing::new(&FiniteRing::parse(spec)?, n)
}

fn fail(msg: String) -> Error {
    Error::Discrepancy(msg)
}

/// Ghost identities, the Galois ring oracle and the frame identities.
fn witt_correctness(profile: Profile, _seed: u64) -> Result<String> {
    let mut tables = 0;
    for p in primes(profile, &[2, 3, 5]) {
        for n in 1..=default_max_level(p) {
            witt_tables(p, n)?.verify_ghost_identities()?;
            tables += 1;
        }
    }
    let mut oracles = 0;
    for p in primes(profile, &[2, 3]) {
        for n in 1..=3 {
            galois_ring_oracle(&FiniteRing::parse(&format!("GF({p})"))?, n)?;
            oracles += 1;
        }
    }
    let rings = match profile {
        Profile::Quick => vec!["GF(2)", "GF(2^2)", "GF(2^3)", "GF(2)[x]/x^2", "GF(2)[x]/x^3", "GF(2)*GF(2)"],
        Profile::Full => vec![
            "GF(2)",
            "GF(2^2)",
            "GF(2^3)",
            "GF(2)[x]/x^2",
            "GF(2)[x]/x^3",
            "GF(2)*GF(2)",
            "GF(3)",
            "GF(3^2)",
            "GF(3)[x]/x^2",
            "GF(5)",
        ],
    };
    let mut frames = 0;
    for spec in rings {
        let ring = FiniteRing::parse(spec)?;
        for n in 1.. {
            if ring.size().pow(n as u32 + 1) > 64 {
                break;
            }
            let w = WittRing::new(&ring, n)?;
            let up = WittRing::with_limit(&ring, n + 1, n + 1)?;
            check_frame(&w, &up).map_err(|e| fail(format!("{spec}, n = {n}: {e}")))?;
            frames += 1;
        }
    }
    Ok(format!("{tables} ghost tables, {oracles} Galois ring oracles, {frames} frame checks"))
}

/// f v = p and f1 v = id on W_n, p f1 = f on I_{n+1}, all exhaustively
/// (callers keep |W_{n+1}| <= 64).
/// Here f: W_{n+1} -> W_n is the Frobenius followed by restriction.
fn check_frame(w: &WittRing, up: &WittRing) -> Result<()> {
    let frame_f = |y: Witt| up.restrict(up.frobenius(y));
    for x in w.elements() {
        let vx = w.verschiebung(x, up)?;
        if frame_f(vx.0) != w.mul_p(x) {
            return Err(fail(format!("f(v(x)) != p x at {}", w.format(x))));
        }
        if w.f1(vx, up)? != x {
            return Err(fail(format!("f1(v(x)) != x at {}", w.format(x))));
        }
    }
    for y in up.elements() {
        if let Ok(iy) = up.ideal_elem(y) {
            if w.mul_p(w.f1(iy, up)?) != frame_f(y) {
                return Err(fail(format!("p f1(y) != f(y) at {}", up.format(y))));
            }
        }
    }
    Ok(())
}

fn display_suite(seed: u64) -> Result<Vec<TruncatedDisplay>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Vec::new();
    for spec in ["GF(2)", "GF(2^2)", "GF(2)[x]/x^3"] {
        for n in 1..=2 {
            let w = witt(spec, n)?;
            for h in 1..=3 {
                for d in 0..=h {
                    grid.push((w.clone(), h, d));
                }
            }
        }
    }
    Ok((0..200)
        .map(|i| {
            let (w, h, d) = &grid[i % grid.len()];
            TruncatedDisplay::random(w, *h, *d, &mut rng)
        })
        .collect())
}

fn predisplay_axioms(_profile: Profile, seed: u64) -> Result<String> {
    let suite = display_suite(seed)?;
    for disp in &suite {
        disp.check_axioms()?;
    }
    Ok(format!("{} displays", suite.len()))
}

fn vsharp_contract(_profile: Profile, seed: u64) -> Result<String> {
    let suite = display_suite(seed)?;
    for disp in &suite {
        disp.check_vsharp()?;
    }
    Ok(format!("{} displays", suite.len()))
}

fn unit_homs(_profile: Profile, _seed: u64) -> Result<String> {
    let mut count = 0;
    for spec in ["GF(2)", "GF(2^2)", "GF(2)[x]/x^3"] {
        for n in 1..=3 {
            let w = witt(spec, n)?;
            let (e, m) = (TruncatedDisplay::etale_unit(&w), TruncatedDisplay::mult_unit(&w));
            if hom_log_order(&e, &m)? != 0 {
                return Err(fail(format!("nonzero Hom(etale, mult) over {spec}, n = {n}")));
            }
            count += 1;
        }
    }
    Ok(format!("{count} rings, all zero"))
}

fn enumerate(spec: &str, n: usize, h: usize, d: usize, seed: u64) -> Result<Classification> {
    ModuliInstance::new(&witt(spec, n)?, h, d)?.enumerate_orbits(DEFAULT_BUDGET, 1, seed)
}

fn mass_formula(profile: Profile, seed: u64) -> Result<String> {
    let mut grid = Vec::new();
    for p in primes(profile, &[2, 3]) {
        for n in 1..=2 {
            for h in 1..=2 {
                for d in 0..=h {
                    grid.push((p, n, h, d));
                }
            }
        }
    }
    grid.extend((0..=3).map(|d| (2, 1, 3, d)));
    let mut three_halves = false;
    for &(p, n, h, d) in &grid {
        let c = enumerate(&format!("GF({p})"), n, h, d, seed)?;
        let mc = c.mass_check();
        if !mc.equal {
            return Err(fail(format!("({p},{n},{h},{d}): {} != {}", mc.lhs, mc.rhs)));
        }
        if c.enumerated_points().to_string() != c.table.x_count {
            return Err(fail(format!("({p},{n},{h},{d}): enumerated |X| differs from the closed form")));
        }
        if (p, n, h, d) == (2, 1, 2, 1) {
            three_halves = mc.lhs == BigRational::new(BigInt::from(3), BigInt::from(2));
        }
    }
    if !three_halves {
        return Err(fail("(2,1,2,1) mass is not 3/2".into()));
    }
    Ok(format!("{} instances, (2,1,2,1) mass 3/2", grid.len()))
}

fn oracle_equivalence(_profile: Profile, seed: u64) -> Result<String> {
    let mut pairs = 0;
    for (n, h, d) in [(1, 2, 0), (1, 2, 1), (1, 2, 2), (2, 1, 0), (2, 1, 1)] {
        pairs += enumerate("GF(2)", n, h, d, seed)?.cross_check_isom(1 << 16)?;
    }
    Ok(format!("{pairs} ordered pairs agree"))
}

fn dieudonne_round_trip(_profile: Profile, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Vec::new();
    for spec in ["GF(2)", "GF(2^2)"] {
        for n in 1..=2 {
            let w = witt(spec, n)?;
            for h in 1..=3 {
                for d in 0..=h {
                    grid.push((w.clone(), h, d));
                }
            }
        }
    }
    for i in 0..50 {
        let (w, h, d) = &grid[i % grid.len()];
        let normal = TruncatedDisplay::random(w, *h, *d, &mut rng).gauge_fixed()?;
        if DieudonneModule::from_display(&normal)?.to_display()? != normal {
            return Err(fail(format!("to_display(from_display(D)) != D for instance {i}")));
        }
        let module = DieudonneModule::from_display(&TruncatedDisplay::random(w, *h, *d, &mut rng))?;
        let (disp, s) = module.to_display_with_basis()?;
        if DieudonneModule::from_display(&disp)? != module.change_basis(&s)? {
            return Err(fail(format!("from_display(to_display(M)) is not M in the returned basis, instance {i}")));
        }
    }
    Ok("50 instances".into())
}

fn nilpotence_slopes(_profile: Profile, seed: u64) -> Result<String> {
    let (mut checked, mut refused) = (0, 0);
    for h in 1..=2 {
        for d in 0..=h {
            let c = enumerate("GF(2)", 2, h, d, seed)?;
            for class in &c.table.classes {
                let Some(slopes) = &class.slopes else {
                    refused += 1;
                    continue;
                };
                let min: Ratio<i64> = slopes[0].slope.parse().map_err(|_| fail("bad slope".into()))?;
                if class.nilpotent != (min > Ratio::from_integer(0)) {
                    return Err(fail(format!(
                        "class {:?}: nilpotent = {}, min slope {min}",
                        class.rep_matrix, class.nilpotent
                    )));
                }
                checked += 1;
            }
        }
    }
    let w = witt("GF(2)", 2)?;
    let anti = Matrix::new(2, 2, vec![w.zero(), w.one(), w.one(), w.zero()]);
    let np = DieudonneModule::from_display(&TruncatedDisplay::from_matrix(&w, 1, anti)?)?.newton_polygon()?;
    if np.slopes() != [Ratio::new(1, 2), Ratio::new(1, 2)] {
        return Err(fail(format!("supersingular slopes {np}")));
    }
    Ok(format!("{checked} classes agree, {refused} refused by the precision guard, supersingular {np}"))
}

fn duality(_profile: Profile, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for spec in ["GF(2)", "GF(2^2)"] {
        for n in 1..=2 {
            let w = witt(spec, n)?;
            let (e, m) = (TruncatedDisplay::etale_unit(&w), TruncatedDisplay::mult_unit(&w));
            if dual_display(&e)? != m || dual_display(&m)? != e {
                return Err(fail(format!("dual does not exchange the unit objects over {spec}, n = {n}")));
            }
            for h in 1..=3 {
                for d in 0..=h {
                    let module = DieudonneModule::from_display(&TruncatedDisplay::random(&w, h, d, &mut rng))?;
                    if module.dual().dual() != module || module.dual().type_d() != h - d {
                        return Err(fail(format!(
                            "dual is not an involution exchanging d and h - d ({spec}, {n}, {h}, {d})"
                        )));
                    }
                }
            }
        }
    }
    let mut entries = 0;
    for (n, h) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let mut tables: Vec<Classification> =
            (0..=h).map(|d| enumerate("GF(2)", n, h, d, seed)).collect::<Result<_>>()?;
        link_duals(&mut tables)?;
        for t in &tables {
            let partner = &tables[h - t.instance.dim_t()];
            for (i, class) in t.table.classes.iter().enumerate() {
                let j = class.dual_class.ok_or_else(|| fail("missing dual class".into()))?;
                let back = &partner.table.classes[j];
                if back.d != h - class.d || back.dual_class != Some(i) {
                    return Err(fail(format!("dual class table is inconsistent at (n={n}, h={h}, d={})", class.d)));
                }
                entries += 1;
            }
        }
    }
    Ok(format!("{entries} class table entries map d to h - d"))
}

fn determinism(_profile: Profile, seed: u64) -> Result<String> {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir()?;
        let mut args = ClassifyArgs::new("GF(2)", 2, 2, None, dir.path());
        args.seed = seed;
        args.workers = 2;
        let report = classify(&args)?;
        let bytes: Vec<Vec<u8>> = report.files.iter().map(std::fs::read).collect::<std::io::Result<_>>()?;
        outputs.push(bytes);
    }
    if outputs[0] != outputs[1] {
        return Err(fail("two classify runs produced different files".into()));
    }
    Ok(format!("{} files byte-identical", outputs[0].len()))
}
