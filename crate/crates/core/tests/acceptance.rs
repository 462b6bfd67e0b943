//! Acceptance criteria 1 to 11. Each criterion prints one PASS or FAIL line;
//! the process fails when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use clap::Parser;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sheaf_logic::cli::{run, Cli};
use sheaf_logic::fixtures;
use sheaf_logic::forcing::{
    classical_check, forces_at, truth_value, truth_value_pointwise, Environment, Oracle,
};
use sheaf_logic::gen::{self, SheafShape};
use sheaf_logic::generic::{check_generic, fundamental_check, subformula_closure, OpenFilter};
use sheaf_logic::logic::{parse_formula, Formula, Signature};
use sheaf_logic::sheaf::SheafOfStructures;
use sheaf_logic::site::Site;
use sheaf_logic::vsets::{
    axiom_check, build_hierarchy, chi_check, extends, no_surjection_check, omega_classifier,
    separating_extension, Axiom, HfSet, Universe,
};

const SEED: u64 = 0x5eaf;
/// Random sheaves per criterion that samples them.
const SHEAVES: usize = 120;
const MAX_NODES: usize = 4;
/// Smaller sites for the exhaustive open-set oracle.
const ORACLE_NODES: usize = 3;
const ORACLE_SHEAVES: usize = 100;
const RANDOM_FORMULAS: usize = 30;
const CONDITIONS: usize = 1000;
const MAX_ENTRIES: usize = 20;

const LIMIT_1: Duration = Duration::from_secs(1);
const LIMIT_2: Duration = Duration::from_secs(30);
const LIMIT_4: Duration = Duration::from_secs(60);
const LIMIT_7: Duration = Duration::from_secs(1);
const LIMIT_9: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn random_sheaves(seed: u64, count: usize, max_nodes: usize) -> Vec<SheafOfStructures> {
    let mut rng = gen::rng(seed);
    (0..count)
        .map(|_| gen::random_sheaf_on_random_site(&mut rng, max_nodes, SheafShape::default()))
        .collect()
}

fn unary_r() -> Signature {
    Signature::new().with_relation("R", 1)
}

fn has_unary_r(s: &SheafOfStructures) -> bool {
    s.signature().relation_arity("R") == Some(1)
}

fn free_x() -> Vec<String> {
    vec!["x".to_string()]
}

/// Principal-section environments binding `vars` at node `x`, one per
/// tuple of fiber elements.
fn principal_envs(s: &SheafOfStructures, x: usize, vars: &[String]) -> Vec<Environment> {
    let mut out = vec![Environment::new(s.site().up(x))];
    for v in vars {
        let mut next = Vec::new();
        for env in &out {
            for a in 0..s.fiber_len(x) {
                next.push(env.clone().with(v, s.principal_section(x, a).unwrap()));
            }
        }
        out = next;
    }
    out
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let s = fixtures::s2();
    let site = s.site();
    let env = Environment::named(&s, ["s".to_string()]);
    let sig = s.signature();
    let value = |text: &str| {
        let f = parse_formula(text, &sig).unwrap();
        site.show(truth_value(&s, site.whole(), &f, &env).unwrap())
    };
    ensure(value("R(s)") == "{q}", || {
        format!("[[R]] = {}", value("R(s)"))
    })?;
    ensure(value("~R(s)") == "{}", || {
        format!("[[~R]] = {}", value("~R(s)"))
    })?;
    let lem = value("R(s) | ~R(s)");
    ensure(lem == "{q}", || format!("[[R | ~R]] = {lem}"))?;
    ensure(lem != site.show(site.whole()), || {
        "excluded middle holds".into()
    })?;
    let cli = Cli::try_parse_from(["sheaf", "force", "--at", "p", "R(s) | ~R(s)"]).unwrap();
    let out = run(&cli).map_err(|e| e.to_string())?;
    ensure(
        out.report.plain == "not forced\n" && out.exit_code() == 0,
        || format!("cli printed {:?}", out.report.plain),
    )?;
    within(LIMIT_1, started)?;
    Ok(format!("[[R | ~R]] = {lem} in {:?}", started.elapsed()))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut rng = gen::rng(SEED + 2);
    let vars: Vec<String> = ["x", "y"].map(String::from).to_vec();
    let mut checked = 0;
    for s in random_sheaves(SEED + 2, SHEAVES, MAX_NODES) {
        let sig = s.signature();
        for x in s.site().nodes() {
            for _ in 0..3 {
                let atoms: Vec<Formula> = (0..3)
                    .map(|_| gen::random_formula(&mut rng, &sig, 0, &vars))
                    .collect();
                let Some(env) = gen::random_env(&mut rng, &s, x, &vars) else {
                    continue;
                };
                for scheme in gen::ipc_schemes(&atoms[0], &atoms[1], &atoms[2]) {
                    checked += 1;
                    let forced = forces_at(&s, x, &scheme, &env).map_err(|e| e.to_string())?;
                    ensure(forced, || {
                        format!("{scheme} not forced at {}", s.site().name(x))
                    })?;
                }
            }
        }
    }
    within(LIMIT_2, started)?;
    Ok(format!(
        "{checked} instances on {SHEAVES} sheaves in {:?}",
        started.elapsed()
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = gen::rng(SEED + 3);
    let closed = gen::all_formulas(&unary_r(), 2, &[]);
    let mut checked = 0;
    for s in random_sheaves(SEED + 3, SHEAVES, MAX_NODES) {
        let sig = s.signature();
        let site = s.site();
        let mut formulas = closed.clone();
        formulas.extend((0..RANDOM_FORMULAS).map(|_| gen::random_formula(&mut rng, &sig, 3, &[])));
        let env = Environment::global(&s);
        for f in &formulas {
            checked += 1;
            truth_value_pointwise(&s, site.whole(), f, &env).map_err(|e| format!("{f}: {e}"))?;
        }
        for x in site.nodes() {
            for _ in 0..2 {
                let f = gen::random_formula(&mut rng, &sig, 3, &free_x());
                let Some(env) = gen::random_env(&mut rng, &s, x, &free_x()) else {
                    continue;
                };
                checked += 1;
                truth_value_pointwise(&s, site.up(x), &f, &env).map_err(|e| format!("{f}: {e}"))?;
            }
        }
    }
    Ok(format!("{checked} truth sets are up-sets"))
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let closed = gen::all_formulas(&unary_r(), 2, &[]);
    let open_x = gen::all_formulas(&unary_r(), 2, &free_x());
    let mut rng = gen::rng(SEED + 4);
    let mut checked = 0;
    for (i, s) in random_sheaves(SEED + 4, ORACLE_SHEAVES, ORACLE_NODES)
        .into_iter()
        .enumerate()
    {
        let site = s.site();
        let oracle = Oracle::new(&s).map_err(|e| e.to_string())?;
        let opens = site
            .enumerate_opens(ORACLE_NODES)
            .map_err(|e| e.to_string())?;
        let sig = s.signature();
        let mut compare = |f: &Formula, env: &Environment, u| -> Result<(), String> {
            checked += 1;
            let rec = truth_value(&s, u, f, env).map_err(|e| e.to_string())?;
            let point = truth_value_pointwise(&s, u, f, env).map_err(|e| e.to_string())?;
            let brute = oracle.truth_value(u, f, env).map_err(|e| e.to_string())?;
            ensure(rec == point && point == brute, || {
                format!(
                    "{f} on {}: recursive {}, pointwise {}, all opens {}",
                    site.show(u),
                    site.show(rec),
                    site.show(point),
                    site.show(brute)
                )
            })
        };
        let global = Environment::global(&s);
        let mut sampled = closed.clone();
        sampled.extend((0..RANDOM_FORMULAS).map(|_| gen::random_formula(&mut rng, &sig, 2, &[])));
        for f in &sampled {
            for &u in &opens {
                compare(f, &global, u)?;
            }
        }
        // formulas with a free variable: all of them on a tenth of the
        // sheaves, random ones on the rest
        let with_x: Vec<Formula> = if i % 10 == 0 {
            open_x.clone()
        } else {
            (0..RANDOM_FORMULAS)
                .map(|_| gen::random_formula(&mut rng, &sig, 2, &free_x()))
                .collect()
        };
        for x in site.nodes() {
            for env in principal_envs(&s, x, &free_x()) {
                for f in &with_x {
                    compare(f, &env, site.up(x))?;
                }
            }
        }
    }
    within(LIMIT_4, started)?;
    Ok(format!("{checked} comparisons in {:?}", started.elapsed()))
}

fn criterion_5() -> Outcome {
    let mut rng = gen::rng(SEED + 5);
    let closed = gen::all_formulas(&unary_r(), 3, &[]);
    let open_x = gen::all_formulas(&unary_r(), 2, &free_x());
    let mut checked = 0;
    for s in fixtures::all_sheaves() {
        let sig = s.signature();
        let site = s.site();
        let mut formulas: Vec<Formula> = if has_unary_r(&s) {
            closed.clone()
        } else {
            Vec::new()
        };
        formulas.extend((0..200).map(|_| gen::random_formula(&mut rng, &sig, 3, &[])));
        let mut with_x: Vec<Formula> = if has_unary_r(&s) {
            open_x.clone()
        } else {
            Vec::new()
        };
        with_x.extend((0..200).map(|_| gen::random_formula(&mut rng, &sig, 3, &free_x())));
        for m in site.maximal_nodes() {
            let global = Environment::new(site.up(m));
            for f in &formulas {
                checked += 1;
                let c = classical_check(&s, m, f, &global).map_err(|e| e.to_string())?;
                ensure(c.agrees(), || format!("{f} at {}: {c:?}", site.name(m)))?;
            }
            for env in principal_envs(&s, m, &free_x()) {
                for f in &with_x {
                    checked += 1;
                    let c = classical_check(&s, m, f, &env).map_err(|e| e.to_string())?;
                    ensure(c.agrees(), || format!("{f} at {}: {c:?}", site.name(m)))?;
                }
            }
        }
    }
    Ok(format!("{checked} checks at maximal nodes"))
}

fn criterion_6() -> Outcome {
    let mut rng = gen::rng(SEED + 6);
    let closed = gen::all_formulas(&unary_r(), 2, &[]);
    let mut checked = 0;
    for s in fixtures::all_sheaves() {
        let sig = s.signature();
        let site = s.site();
        let mut base: Vec<Formula> = if has_unary_r(&s) {
            closed.clone()
        } else {
            Vec::new()
        };
        base.extend((0..60).map(|_| gen::random_formula(&mut rng, &sig, 2, &[])));
        base.extend((0..60).map(|_| gen::random_formula(&mut rng, &sig, 2, &free_x())));
        let formulas = subformula_closure(&base);
        for m in site.maximal_nodes() {
            let filter = OpenFilter::point_filter(site, m).map_err(|e| e.to_string())?;
            let g = check_generic(&s, &filter, &formulas).map_err(|e| e.to_string())?;
            ensure(g.is_generic(), || {
                format!("not generic at {}: {}", site.name(m), g.failures[0])
            })?;
            let r = fundamental_check(&s, &filter, &formulas).map_err(|e| e.to_string())?;
            ensure(r.holds(), || {
                format!("at {}: {}", site.name(m), r.discrepancies[0])
            })?;
            checked += g.checked + r.checked;
        }
    }
    Ok(format!("{checked} genericity and collapse checks"))
}

fn counts(site: Site, alpha: usize) -> Result<Vec<usize>, String> {
    let mut u = Universe::new(site).map_err(|e| e.to_string())?;
    Ok(build_hierarchy(&mut u, alpha)
        .map_err(|e| e.to_string())?
        .counts())
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let v1 = counts(fixtures::p2(), 1)?;
    let v2 = counts(fixtures::p2(), 2)?;
    let c1 = counts(fixtures::p1(), 2)?;
    ensure(v1[0] == 1, || format!("|V1(p)| = {}", v1[0]))?;
    ensure(v2 == [3, 2], || format!("V2 on P2 = {v2:?}"))?;
    ensure(c1 == [2], || format!("V2 on P1 = {c1:?}"))?;
    within(LIMIT_7, started)?;
    Ok(format!(
        "P2 V1 {v1:?}, V2 {v2:?}; P1 V2 {c1:?} in {:?}",
        started.elapsed()
    ))
}

fn criterion_8() -> Outcome {
    let sets = HfSet::all_below_rank(3);
    let mut checked = 0;
    for site in [fixtures::p2(), fixtures::pv()] {
        let mut u = Universe::new(site.clone()).map_err(|e| e.to_string())?;
        let e = |e: sheaf_logic::vsets::VSetError| e.to_string();
        for p in site.nodes() {
            let hats: Vec<_> = sets
                .iter()
                .map(|a| u.hat_embed(a, p))
                .collect::<Result<_, _>>()
                .map_err(e)?;
            for (i, a) in sets.iter().enumerate() {
                for q in site.up(p).iter() {
                    checked += 1;
                    let direct = u.hat_embed(a, q).map_err(e)?;
                    ensure(u.restrict_vset(hats[i], q).map_err(e)? == direct, || {
                        format!(
                            "restriction of {a} from {} to {}",
                            site.name(p),
                            site.name(q)
                        )
                    })?;
                    for (j, b) in sets.iter().enumerate() {
                        let member = u.membership(hats[j], hats[i], q).map_err(e)?;
                        ensure(member == a.contains(b), || {
                            format!("{b} in {a} at {}", site.name(q))
                        })?;
                    }
                }
                for (j, b) in sets.iter().enumerate() {
                    ensure((hats[i] == hats[j]) == (a == b), || {
                        format!("hat({a}) vs hat({b})")
                    })?;
                }
                if site.is_maximal(p) {
                    ensure(u.collapse_iso(p, hats[i]).map_err(e)? == *a, || {
                        format!("collapse of hat({a})")
                    })?;
                }
            }
        }
    }
    Ok(format!("{} sets, {checked} restrictions", sets.len()))
}

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for (name, site) in [("P2", fixtures::p2()), ("Pv", fixtures::pv())] {
        let mut u = Universe::new(site).map_err(|e| e.to_string())?;
        for alpha in 1..=2 {
            for axiom in Axiom::ALL {
                let r = axiom_check(&mut u, alpha, axiom).map_err(|e| e.to_string())?;
                ensure(r.holds(), || {
                    format!("{axiom} on {name} at {alpha}: {}", r.failures[0])
                })?;
                checked += r.checked;
            }
        }
    }
    within(LIMIT_9, started)?;
    Ok(format!("{checked} checks in {:?}", started.elapsed()))
}

fn criterion_10() -> Outcome {
    let e = |e: sheaf_logic::vsets::VSetError| e.to_string();
    let mut u2 = Universe::new(fixtures::p2()).map_err(e)?;
    let omega = omega_classifier(&mut u2, 0).map_err(e)?;
    let at_p = u2.graph(omega, 0).map_or(0, <[_]>::len);
    ensure(at_p == 3, || format!("Omega(p) on P2 has {at_p}"))?;
    let mut u1 = Universe::new(fixtures::p1()).map_err(e)?;
    let omega1 = omega_classifier(&mut u1, 0).map_err(e)?;
    let on_p1 = u1.graph(omega1, 0).map_or(0, <[_]>::len);
    ensure(on_p1 == 2, || format!("Omega on P1 has {on_p1}"))?;
    let mut runs = vec![];
    for k in 0..=2 {
        runs.push(("P1", 0, k));
    }
    runs.push(("P2", 0, 1));
    runs.push(("P2", 1, 1));
    for (name, p, k) in runs {
        let u = if name == "P1" { &mut u1 } else { &mut u2 };
        let chi = chi_check(u, p, k).map_err(e)?;
        ensure(chi.holds(), || {
            format!("chi on {name} node {p} k {k}: {chi:?}")
        })?;
        let none = no_surjection_check(u, p, k).map_err(e)?;
        ensure(none.holds(), || {
            format!("surjection on {name} node {p} k {k}: {none:?}")
        })?;
    }
    Ok(format!(
        "Omega sizes {at_p} and {on_p1}; chi bijective and no surjections"
    ))
}

fn criterion_11() -> Outcome {
    let mut rng: ChaCha8Rng = gen::rng(SEED + 11);
    for _ in 0..CONDITIONS {
        let t = gen::random_condition(&mut rng, MAX_ENTRIES, 4);
        let h = rng.gen_range(0..4);
        let m = (h + rng.gen_range(1..4)) % 4;
        let (h, m) = (format!("H{h}"), format!("H{m}"));
        let s = separating_extension(&t, &h, &m).map_err(|e| e.to_string())?;
        ensure(extends(&s, &t) && s.len() == t.len() + 2, || {
            format!("bad extension of {t:?}")
        })?;
        let col = s.keys().find(|k| !t.contains_key(*k)).unwrap().1;
        ensure(s[&(h.clone(), col)] && !s[&(m.clone(), col)], || {
            format!("rows not separated in {s:?}")
        })?;
    }
    let mut checked = 0;
    let vars: Vec<String> = ["x", "y"].map(String::from).to_vec();
    for s in random_sheaves(SEED + 11, SHEAVES, MAX_NODES) {
        let sig = s.signature();
        for x in s.site().nodes() {
            let Some(env) = gen::random_env(&mut rng, &s, x, &vars) else {
                continue;
            };
            let a = gen::random_formula(&mut rng, &sig, 1, &vars);
            let b = gen::random_formula(&mut rng, &sig, 1, &vars);
            let phi = gen::random_formula(&mut rng, &sig, 2, &["z".to_string()]);
            let (l1, r1) = gen::int1(&a, &b);
            let (l2, r2) = gen::int2("z", &phi);
            let global = Environment::new(s.site().up(x));
            for (l, r, env) in [(l1, r1, &env), (l2, r2, &global)] {
                checked += 1;
                let fl = forces_at(&s, x, &l, env).map_err(|e| e.to_string())?;
                let fr = forces_at(&s, x, &r, env).map_err(|e| e.to_string())?;
                ensure(fl == fr, || format!("{l} vs {r} at {}", s.site().name(x)))?;
            }
        }
    }
    Ok(format!("{CONDITIONS} conditions; {checked} equivalences"))
}

fn main() {
    // `cargo test` passes harness flags; a name filter selects criteria.
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [Criterion; 11] = [
        ("excluded middle fails on S2", criterion_1),
        ("intuitionistic schemes are forced", criterion_2),
        ("truth sets are up-sets", criterion_3),
        (
            "recursive, pointwise and all-opens values agree",
            criterion_4,
        ),
        ("forcing is classical at maximal nodes", criterion_5),
        (
            "point filters at maximal nodes are generic and collapse correctly",
            criterion_6,
        ),
        ("hierarchy cardinalities", criterion_7),
        ("hat embedding", criterion_8),
        ("axioms at rank two", criterion_9),
        ("classifier and characteristic functions", criterion_10),
        ("density kernel and double negation laws", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| name.contains(f.as_str()) || *f == n.to_string())
        {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
