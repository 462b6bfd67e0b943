use rand::Rng;

use sheaf_logic::fixtures;
use sheaf_logic::gen;
use sheaf_logic::vsets::{
    build_hierarchy, extends, separating_extension, HfSet, Universe, VSetError,
};

#[test]
fn separation_on_random_conditions() {
    let mut rng = gen::rng(7);
    for _ in 0..1000 {
        let t = gen::random_condition(&mut rng, 20, 3);
        let h = rng.gen_range(0..3);
        let m = (h + 1 + rng.gen_range(0..2)) % 3;
        let s = separating_extension(&t, &format!("H{h}"), &format!("H{m}")).unwrap();
        assert!(extends(&s, &t));
        assert_eq!(s.len(), t.len() + 2);
    }
}

#[test]
fn hierarchy_levels_are_cumulative_and_restriction_closed() {
    for site in [fixtures::p1(), fixtures::p2(), fixtures::pv()] {
        let mut u = Universe::new(site.clone()).unwrap();
        let level = build_hierarchy(&mut u, 2).unwrap();
        for p in site.nodes() {
            for q in site.up(p).iter() {
                for &f in level.at(p) {
                    let r = u.restrict_vset(f, q).unwrap();
                    assert!(level.at(q).contains(&r));
                }
            }
            for &f in level.level(1, p) {
                assert!(level.at(p).contains(&f));
            }
        }
    }
}

#[test]
fn hats_at_maximal_nodes_are_classical() {
    let mut u = Universe::new(fixtures::pv()).unwrap();
    let b = fixtures::pv().node("b").unwrap();
    for a in HfSet::all_below_rank(4) {
        let f = u.hat_embed(&a, b).unwrap();
        assert_eq!(u.collapse_iso(b, f).unwrap(), a);
        assert_eq!(u.rank(f), a.rank());
    }
}

#[test]
fn preorders_are_rejected() {
    assert!(matches!(
        Universe::new(fixtures::cycle()),
        Err(VSetError::NotPartialOrder)
    ));
}
