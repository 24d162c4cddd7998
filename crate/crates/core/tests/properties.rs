use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use truncdisp::dieudonne::DieudonneModule;
use truncdisp::display::{isom_displays, DisplayHom, TruncatedDisplay};
use truncdisp::linalg::Matrix;
use truncdisp::moduli::{GroupElem, ModuliInstance};
use truncdisp::ring::{FiniteRing, RingHom};
use truncdisp::witt::{Witt, WittRing};
use truncdisp::Error;

const RINGS: [&str; 5] = ["GF(2)", "GF(3)", "GF(2^2)", "GF(2)[x]/x^2", "GF(2)*GF(2)"];

fn wr(spec: &str, n: usize) -> WittRing {
    WittRing::new(&FiniteRing::parse(spec).unwrap(), n).unwrap()
}

fn elem(w: &WittRing, rng: &mut ChaCha8Rng) -> Witt {
    Witt(rng.gen_range(0..w.size() as u32))
}

fn random_iso(inst: &ModuliInstance, rng: &mut ChaCha8Rng) -> GroupElem {
    let w = inst.witt();
    let (l, d) = (inst.rank() - inst.dim_t(), inst.dim_t());
    let unit = |k: usize, rng: &mut ChaCha8Rng| TruncatedDisplay::random(w, k, 0, rng).matrix().clone();
    let block = |r: usize, c: usize, rng: &mut ChaCha8Rng| {
        Matrix::from_fn(r, c, |_, _| Witt(rng.gen_range(0..w.size() as u32)))
    };
    let hom = DisplayHom::new(w, unit(l, rng), block(l, d, rng), block(d, l, rng), unit(d, rng)).unwrap();
    GroupElem::new(hom).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witt_ring_axioms(seed: u64, ring in 0..RINGS.len(), n in 1usize..=3) {
        let w = wr(RINGS[ring], n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (elem(&w, &mut rng), elem(&w, &mut rng), elem(&w, &mut rng));
        prop_assert_eq!(w.add(a, b), w.add(b, a));
        prop_assert_eq!(w.mul(a, b), w.mul(b, a));
        prop_assert_eq!(w.mul(a, w.mul(b, c)), w.mul(w.mul(a, b), c));
        prop_assert_eq!(w.mul(a, w.add(b, c)), w.add(w.mul(a, b), w.mul(a, c)));
        prop_assert_eq!(w.add(a, w.neg(a)), w.zero());
        prop_assert_eq!(w.frobenius(w.add(a, b)), w.add(w.frobenius(a), w.frobenius(b)));
        prop_assert_eq!(w.frobenius(w.mul(a, b)), w.mul(w.frobenius(a), w.frobenius(b)));
        prop_assert_eq!(w.mul_p(a), w.mul_int(a, w.p() as i64));
        if w.is_unit(a) {
            prop_assert_eq!(w.mul(a, w.inv(a).unwrap()), w.one());
        }
    }

    #[test]
    fn verschiebung_is_additive_and_split(seed: u64, ring in 0..RINGS.len(), n in 1usize..=2) {
        let (w, up) = (wr(RINGS[ring], n), wr(RINGS[ring], n + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (elem(&w, &mut rng), elem(&w, &mut rng));
        let v = |x| w.verschiebung(x, &up).unwrap().0;
        prop_assert_eq!(up.add(v(a), v(b)), v(w.add(a, b)));
        prop_assert_eq!(w.f1(w.verschiebung(a, &up).unwrap(), &up).unwrap(), a);
        prop_assert_eq!(up.restrict(up.add(up.lift(a), up.lift(b))), w.add(a, b));
    }

    #[test]
    fn display_contracts(seed: u64, ring in 0..RINGS.len(), n in 1usize..=2, h in 1usize..=3, d in 0usize..=3) {
        prop_assume!(d <= h);
        let w = wr(RINGS[ring], n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disp = TruncatedDisplay::random(&w, h, d, &mut rng);
        prop_assert!(disp.check_axioms().is_ok());
        prop_assert!(disp.check_vsharp().is_ok());
        if w.base().field_degree().is_some() {
            let g = disp.gauge_fixed().unwrap();
            prop_assert_eq!(g.gauge_fixed().unwrap(), g.clone());
        } else {
            prop_assert_eq!(disp.gauge_fixed(), Err(Error::NotAField));
        }
        if n == 2 {
            prop_assert_eq!(disp.truncate().unwrap(), disp.truncate_to(1).unwrap());
        }
    }

    #[test]
    fn truncation_commutes_with_base_change(seed: u64, h in 1usize..=3, d in 0usize..=3) {
        prop_assume!(d <= h);
        let (w2, w4) = (wr("GF(2)", 2), wr("GF(2^2)", 2));
        let alpha = RingHom::field_embedding(w2.base(), w4.base()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disp = TruncatedDisplay::random(&w2, h, d, &mut rng);
        prop_assert_eq!(
            disp.truncate().unwrap().base_change(&alpha).unwrap(),
            disp.base_change(&alpha).unwrap().truncate().unwrap()
        );
    }

    #[test]
    fn dieudonne_round_trip_and_slopes(seed: u64, ring in 0usize..3, n in 1usize..=2, h in 1usize..=3, d in 0usize..=3) {
        prop_assume!(d <= h);
        let w = wr(RINGS[ring], n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disp = TruncatedDisplay::random(&w, h, d, &mut rng).gauge_fixed().unwrap();
        let module = DieudonneModule::from_display(&disp).unwrap();
        prop_assert_eq!(module.to_display().unwrap(), disp);
        prop_assert_eq!(module.dual().dual(), module.clone());
        prop_assert_eq!(module.dual().type_d(), h - d);
        match module.newton_polygon() {
            Ok(np) => {
                prop_assert!(np.slopes().iter().all(|s| *s >= Ratio::from_integer(0) && *s <= Ratio::from_integer(1)));
                prop_assert_eq!(np.total(), Ratio::from_integer(d as i64));
                prop_assert_eq!(np.height(), h);
            }
            Err(e) => prop_assert_eq!(e, Error::InsufficientLevel { n }),
        }
    }

    #[test]
    fn invariants_constant_under_action(seed: u64, ring in 0usize..3, h in 1usize..=2, d in 0usize..=2) {
        prop_assume!(d <= h);
        let w = wr(RINGS[ring], 2);
        let inst = ModuliInstance::new(&w, h, d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disp = TruncatedDisplay::random(&w, h, d, &mut rng);
        let g = random_iso(&inst, &mut rng);
        let moved = TruncatedDisplay::from_matrix(&w, d, inst.act(&g, disp.matrix())).unwrap();
        prop_assert!(g.hom.is_hom(&disp, &moved));
        prop_assert_eq!(moved.is_nilpotent(), disp.is_nilpotent());
        let slopes = |x: &TruncatedDisplay| DieudonneModule::from_display(x).unwrap().newton_polygon().ok();
        prop_assert_eq!(slopes(&moved), slopes(&disp));
        prop_assert!(isom_displays(&disp, &moved, 1 << 14).unwrap().is_some());
    }
}
