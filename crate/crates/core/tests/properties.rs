mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use z2cover::classify::{classify, cremona_reduce, infer_g_prime};
use z2cover::cover::{check_prod_relations, derive_building_data, CoverModel};
use z2cover::group::GroupElement;
use z2cover::invariants::{canonical_square, euler_characteristic, riemann_hurwitz_genus};
use z2cover::lattice::{reflect_at, DivisorClass};
use z2cover::normalize::{normalize, normalize_ordered, resolve};

use common::*;

fn shuffled<T: Clone>(v: &[T], seed: u64) -> Vec<T> {
    let mut out = v.to_vec();
    rand::seq::SliceRandom::shuffle(&mut out[..], &mut StdRng::seed_from_u64(seed));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent_and_order_free(seed in any::<u64>(), r in 1u8..=4, order_seed in any::<u64>()) {
        let m = random_branch(&mut StdRng::seed_from_u64(seed), r);
        let n = normalize(&m).unwrap();
        prop_assert!(n.is_normal());
        prop_assert_eq!(&normalize(&n).unwrap(), &n);
        let comps: Vec<_> = m.components.iter().map(|c| c.id).collect();
        let gs = GroupElement::nonzero(r).unwrap();
        let other = normalize_ordered(&m, &shuffled(&comps, order_seed), &shuffled(&gs, order_seed ^ 1)).unwrap();
        prop_assert_eq!(other, n);
    }

    #[test]
    fn product_relations_hold_on_valid_models(seed in any::<u64>(), r in 2u8..=4) {
        let m = random_valid(&mut StdRng::seed_from_u64(seed), r);
        let l = derive_building_data(&m).unwrap();
        prop_assert!(check_prod_relations(&m, &l).unwrap().is_ok());
    }

    #[test]
    fn plane_canonical_square(seed in any::<u64>(), r in 2u8..=4) {
        // curves with no declared points: K^2 = 2^r (T - 6)^2 / 4 for total degree T,
        // which is 2^r (t - 3)^2 when T = 2t
        let mut m = random_valid(&mut StdRng::seed_from_u64(seed), r);
        m.pending.clear();
        for c in m.components.iter_mut() {
            c.mults.clear();
        }
        let total: i64 = m.components.iter().map(|c| c.class.degree()).sum();
        prop_assert_eq!(canonical_square(&m).unwrap(), (1i64 << r) * (total - 6) * (total - 6) / 4);
        if total % 2 == 0 {
            let t = total / 2;
            prop_assert_eq!(canonical_square(&m).unwrap(), (1i64 << r) * (t - 3) * (t - 3));
        }
    }

    #[test]
    fn hurwitz_parity(sheets in 1i64..=16, g0 in 0i64..=5, e in 2i64..=4, count in 0i64..=20) {
        let total = sheets * (2 * g0 - 2) + (e - 1) * count;
        let got = riemann_hurwitz_genus(sheets, g0, &[(e, count)]);
        if e > sheets || total % 2 != 0 || total < -2 {
            prop_assert!(got.is_err());
        } else {
            prop_assert_eq!(2 * got.unwrap() - 2, total);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reflection_is_an_involutive_isometry(
        a in prop::collection::vec(-8i64..=8, 7),
        b in prop::collection::vec(-8i64..=8, 7),
        picks in Just((1..=6usize).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| [v[0], v[1], v[2]]),
    ) {
        let (a, b) = (DivisorClass::new(a), DivisorClass::new(b));
        let ra = reflect_at(&a, picks).class;
        let rb = reflect_at(&b, picks).class;
        prop_assert_eq!(&reflect_at(&ra, picks).class, &a);
        prop_assert_eq!(ra.dot(&rb), a.dot(&b));
        let k = DivisorClass::new(vec![-3, 1, 1, 1, 1, 1, 1]);
        prop_assert_eq!(reflect_at(&k, picks).class, k);
    }
}

#[test]
fn parity_errors_exactly_on_mixed_degrees() {
    for a in 0..=6i64 {
        for b in 0..=6i64 {
            for c in 0..=6i64 {
                let mut m = CoverModel::new(2).unwrap();
                for (el, d) in [("10", a), ("01", b), ("11", c)] {
                    if d > 0 {
                        let id = m.add_curve(&format!("D{el}"), d, &[], true).unwrap();
                        m.assign(el.parse().unwrap(), id, 1).unwrap();
                    }
                }
                let same = (a - b) % 2 == 0 && (b - c) % 2 == 0;
                assert_eq!(derive_building_data(&m).is_ok(), same, "({a},{b},{c})");
            }
        }
    }
}

#[test]
fn prod_relations_on_fixtures_and_resolutions() {
    for name in all_fixture_names() {
        let m = fixture(&name);
        for model in [m.clone(), resolve(&m, 32).unwrap().model] {
            let l = derive_building_data(&model).unwrap();
            assert!(check_prod_relations(&model, &l).unwrap().is_ok(), "{name}");
        }
    }
}

#[test]
fn chi_survives_reduction() {
    for (name, _) in PROPOSITIONS.iter().chain(EXTRA) {
        let m = fixture(name);
        let (red, _) = cremona_reduce(&m).unwrap();
        let chi = |x: &CoverModel| euler_characteristic(&resolve(x, 32).unwrap().model).unwrap();
        assert_eq!(chi(&m), chi(&red), "{name}");
        assert_eq!(chi(&m), 1, "{name}");
    }
}

#[test]
fn g_prime_bounds_on_accepted_configurations() {
    for (name, _) in PROPOSITIONS.iter().chain(EXTRA) {
        let m = fixture(name);
        if let Some(p) = m.pencil {
            let gp = infer_g_prime(&m, p).unwrap();
            assert!(gp.s <= 2 && m.r - gp.s <= 2, "{name}");
            assert_eq!(gp.complement.len() as u8, m.r - gp.s, "{name}");
        }
    }
}

#[test]
fn every_fixture_has_exactly_one_label() {
    for (name, want) in PROPOSITIONS.iter().chain(EXTRA) {
        assert_eq!(classify(&fixture(name)).unwrap().to_string(), *want, "{name}");
    }
}
