use proptest::prelude::*;

use sheaf_logic::fixtures;
use sheaf_logic::gen::{self, SheafShape};
use sheaf_logic::logic::parse_formula;
use sheaf_logic::sheaf::parse_sheaf;
use sheaf_logic::site::{NodeSet, Site};

fn site_from(seed: u64) -> Site {
    gen::random_site(&mut gen::rng(seed), 5)
}

fn subset(site: &Site, bits: u64) -> NodeSet {
    NodeSet::from_bits(bits & site.all_nodes().bits())
}

proptest! {
    #[test]
    fn closure_and_interior(seed in any::<u64>(), bits in any::<u64>()) {
        let site = site_from(seed);
        let s = subset(&site, bits);
        let int = site.interior(s);
        let cl = site.up_closure(s);
        prop_assert!(int.nodes().is_subset(s));
        prop_assert!(s.is_subset(cl.nodes()));
        prop_assert_eq!(site.interior(int.nodes()), int);
        prop_assert_eq!(site.up_closure(cl.nodes()), cl);
        prop_assert!(site.is_up_closed(int.nodes()) && site.is_up_closed(cl.nodes()));
    }

    #[test]
    fn heyting_adjunction(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let site = site_from(seed);
        let h = site.heyting(site.whole());
        let [u, v, w] = [a, b, c].map(|x| site.interior(subset(&site, x)));
        // w ∧ u ≤ v iff w ≤ (u → v)
        let left = h.meet(w, u).unwrap().is_subset(v);
        let right = w.is_subset(h.implies(u, v).unwrap());
        prop_assert_eq!(left, right);
        prop_assert_eq!(h.neg(u).unwrap(), h.implies(u, site.interior(NodeSet::default())).unwrap());
        prop_assert!(h.meet(u, h.neg(u).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>(), depth in 0usize..4) {
        let mut rng = gen::rng(seed);
        let s = gen::random_sheaf_on_random_site(&mut rng, 3, SheafShape::default());
        let sig = s.signature();
        let f = gen::random_formula(&mut rng, &sig, depth, &["y".to_string()]);
        let back = parse_formula(&f.to_string(), &sig).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn sheaf_text_round_trip(seed in any::<u64>()) {
        let s = gen::random_sheaf_on_random_site(&mut gen::rng(seed), 4, SheafShape::default());
        let text = s.to_text();
        let back = parse_sheaf(&text, None).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert!(back.validate().is_empty());
    }
}

#[test]
fn fixtures_are_valid_and_print_back() {
    for s in fixtures::all_sheaves() {
        assert!(s.validate().is_empty());
        assert_eq!(
            parse_sheaf(&s.to_text(), None).unwrap().to_text(),
            s.to_text()
        );
    }
}
