use carleson_core::geometry::{dyadic_length, DyadicArc};
use carleson_core::measure::{split_measure, EpsSchedule, PointMassMeasure};
use carleson_core::outer::{Modulus, OuterFunction};
use carleson_core::taming::{
    bands, construct_a, construct_b, heavy_squares, scan_depth, stopping_tree, BandSelection,
    StoppingTree, VANISHING_SLACK,
};
use carleson_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn brute_mass(mu: &PointMassMeasure, arc: &DyadicArc) -> f64 {
    let (s, l) = (arc.start(), arc.length());
    mu.atoms()
        .iter()
        .filter(|a| a.point.gap() <= l && a.point.angle() >= s && a.point.angle() < s + l)
        .map(|a| a.weight)
        .sum()
}

/// Atoms piled up towards a few boundary points, each cluster finer than
/// the last, so that several generations of heavy squares appear.
fn cascade(seed: u64, depth: u32) -> PointMassMeasure {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let center: f64 = rng.gen();
        let weight = rng.gen_range(0.2..1.0);
        for k in 1..=depth {
            let gap = dyadic_length(k);
            for _ in 0..4 {
                let angle = (center + rng.gen_range(-gap..gap)).rem_euclid(1.0);
                triples.push((1.0 - gap * rng.gen_range(0.5..1.0), angle, weight * gap));
            }
        }
    }
    PointMassMeasure::from_polar(triples).unwrap()
}

/// Independent recomputation of every tree invariant from the node list.
fn check_tree(tree: &StoppingTree, part: &PointMassMeasure) {
    let nodes = &tree.nodes;
    let mut sandwich = 0;
    for (k, n) in nodes.iter().enumerate() {
        let mass = brute_mass(part, &n.arc);
        assert!((mass - n.mass).abs() <= 1e-12 * (1.0 + mass), "node {k}");
        assert!((n.ratio - mass / n.arc.length()).abs() <= 1e-12 * (1.0 + n.ratio));
        assert!(
            n.ratio >= n.threshold * (1.0 - 1e-12),
            "node {k} below its threshold"
        );
        if n.ratio > 2.0 * n.threshold * (1.0 + 1e-12) {
            sandwich += 1;
        }
        if let Some(p) = n.parent {
            let parent = &nodes[p];
            assert_eq!(n.generation, parent.generation + 1);
            assert!((n.threshold - 10.0 * parent.threshold).abs() <= 1e-12 * n.threshold);
            assert!(n.arc.level > parent.arc.level && parent.arc.contains_arc(&n.arc));
            // Maximal: no strict ancestor below the parent reaches the threshold.
            for l in parent.arc.level + 1..n.arc.level {
                let a = n.arc.ancestor(l);
                assert!(
                    brute_mass(part, &a) / a.length() < n.threshold,
                    "node {k} not maximal"
                );
            }
        } else {
            assert_eq!(n.generation, 0);
        }
    }
    assert_eq!(sandwich, tree.certificate.sandwich_violations.len());

    let mut packing = 0;
    for (k, n) in nodes.iter().enumerate() {
        let kids: Vec<&DyadicArc> = nodes
            .iter()
            .filter(|c| c.parent == Some(k))
            .map(|c| &c.arc)
            .collect();
        for (i, a) in kids.iter().enumerate() {
            for b in &kids[i + 1..] {
                assert!(
                    !a.contains_arc(b) && !b.contains_arc(a),
                    "overlapping siblings under {k}"
                );
            }
        }
        let total: f64 = kids.iter().map(|a| a.length()).sum();
        if total > n.arc.length() / 5.0 + 1e-12 {
            packing += 1;
        }
    }
    assert_eq!(packing, tree.certificate.packing_violations.len());

    let mut generations = 0;
    for &r in &tree.roots {
        for g in 1..=tree.certificate.max_generation {
            let total: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(k, n)| n.generation == g && tree.root_of(*k) == r)
                .map(|(_, n)| n.arc.length())
                .sum();
            if total > nodes[r].arc.length() * 5f64.powi(-(g as i32)) + 1e-12 {
                generations += 1;
            }
        }
    }
    assert_eq!(generations, tree.certificate.generation_violations.len());
    assert_eq!(
        tree.certificate.holds,
        sandwich == 0 && packing == 0 && generations == 0
    );
}

#[test]
fn stopping_trees_on_cascades() {
    let max_level = 12;
    let mut deepest = 0;
    for seed in 0..8 {
        let mu = cascade(seed, 11);
        let eps = EpsSchedule::preset("slow", mu.total_mass()).unwrap();
        let split = match split_measure(&mu, &eps, max_level) {
            Ok(s) => s,
            Err(Error::RadiiExhausted { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        for part in [1u8, 2] {
            let heavy = heavy_squares(&split, part, &eps, max_level);
            let tree = stopping_tree(split.part(part), &heavy, max_level);
            assert_eq!(tree.roots.len(), heavy.count());
            check_tree(&tree, split.part(part));
            deepest = deepest.max(tree.certificate.max_generation);
        }
    }
    assert!(deepest >= 1, "fixtures never grew a second generation");
}

#[test]
fn heavy_squares_are_maximal_within_their_band() {
    let max_level = 12;
    let mu = cascade(3, 11);
    let eps = EpsSchedule::preset("slow", mu.total_mass()).unwrap();
    let split = split_measure(&mu, &eps, max_level).unwrap();
    for part in [1u8, 2] {
        let heavy = heavy_squares(&split, part, &eps, max_level);
        assert_eq!(
            heavy.bands.len(),
            bands(&split, part, &eps, max_level).len()
        );
        for sel in &heavy.bands {
            let t = sel.band.threshold;
            let sum: f64 = sel.squares.iter().map(|q| q.arc.length()).sum();
            assert!((sum - sel.length_sum).abs() <= 1e-12);
            for q in &sel.squares {
                assert!(sel.band.contains_level(q.arc.level));
                assert!(q.ratio >= t);
                for l in sel.band.top_level..q.arc.level {
                    let a = q.arc.ancestor(l);
                    assert!(brute_mass(split.part(part), &a) / a.length() < t);
                }
            }
        }
    }
}

/// Brute-force `int_Q |E| dmu_part / (eps l(Q))` over every band level, split
/// into squares outside and strictly inside the band's heavy squares.
fn vanishing_ratios(
    mu_part: &PointMassMeasure,
    e: &dyn Modulus,
    sel: &BandSelection,
) -> (f64, f64) {
    let weighted = mu_part.reweighted(|a| e.modulus_at(&a.point).0);
    let b = sel.band;
    let (mut outside, mut inside) = (0.0f64, 0.0f64);
    for level in b.top_level..=b.bottom_level {
        for i in 0..1u64 << level {
            let arc = DyadicArc::new(level, i);
            let r = brute_mass(&weighted, &arc) / (b.threshold * arc.length());
            if sel
                .squares
                .iter()
                .any(|q| q.arc.level < level && q.arc.contains_arc(&arc))
            {
                inside = inside.max(r);
            } else {
                outside = outside.max(r);
            }
        }
    }
    (outside, inside)
}

#[test]
fn first_construction_on_cascades() {
    let depth = 12;
    let mut interiors = 0;
    for seed in 0..4 {
        let mu = cascade(seed, 9);
        let eps = EpsSchedule::preset("geometric", mu.total_mass()).unwrap();
        let c = match construct_a(&mu, &eps, depth) {
            Ok(c) => c,
            Err(Error::RadiiExhausted { .. }) | Err(Error::NotCarleson { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        assert!(c.holds(), "seed {seed}");
        assert!(c.outer().log_modulus().values().iter().all(|&v| v <= 0.0));
        for p in &c.parts {
            let e_part = OuterFunction::new(p.f.scaled(-1.0));
            let split = split_measure(&mu, &eps, scan_depth(depth)).unwrap();
            for sel in &p.heavy.bands {
                let (outside, inside) = vanishing_ratios(split.part(p.part), &e_part, sel);
                assert!(
                    outside <= VANISHING_SLACK,
                    "seed {seed} part {} band {}: {outside}",
                    p.part,
                    sel.band.n
                );
                let check = c
                    .vanishing
                    .bands
                    .iter()
                    .find(|b| b.part == p.part && b.n == sel.band.n)
                    .unwrap();
                assert!((check.worst_ratio - outside).abs() <= 1e-9 * (1.0 + outside));
                assert!((check.interior_worst_ratio - inside).abs() <= 1e-9 * (1.0 + inside));
                interiors += check.interior_checked;
            }
        }
    }
    assert!(interiors > 0, "no fixture reached a heavy-square interior");
}

#[test]
fn log_modulus_has_a_group_floor_on_subdivision_arcs() {
    let depth = 14;
    let mut seen = 0;
    for seed in 0..4 {
        let mu = cascade(seed, 9);
        let eps = EpsSchedule::preset("geometric", mu.total_mass()).unwrap();
        let Ok(c) = construct_a(&mu, &eps, depth) else {
            continue;
        };
        for p in &c.parts {
            for &(level, index, group) in &p.arc_groups {
                let arc = DyadicArc::new(level, index).to_general();
                let cells = p.f.cells_in(&arc);
                let floor = cells
                    .iter()
                    .map(|&j| p.f.values()[j])
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    floor >= group as f64 * (1.0 - 1e-12),
                    "arc ({level}, {index}) group {group}: {floor}"
                );
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn empty_measure_gives_the_unit_function() {
    let mu = PointMassMeasure::empty();
    let eps = EpsSchedule::preset("geometric", 1.0).unwrap();
    match construct_a(&mu, &eps, 8) {
        Ok(c) => assert!(c.outer().log_modulus().values().iter().all(|&v| v == 0.0)),
        Err(Error::RadiiExhausted { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn deep_concentration_is_rejected_as_not_carleson() {
    let mu = PointMassMeasure::single(1.0 - dyadic_length(10), 0.4, 1.0).unwrap();
    let eps = EpsSchedule::preset("geometric", 1.0).unwrap();
    assert!(matches!(
        construct_a(&mu, &eps, 12),
        Err(Error::NotCarleson { .. })
    ));
}

#[test]
fn second_construction_on_a_boundary_atom() {
    let mu = PointMassMeasure::single(1.0 - dyadic_length(10), 0.0, 1.0).unwrap();
    let eps = EpsSchedule::explicit(vec![1.0, 0.5]).unwrap();
    let c = construct_b(&mu, &eps, 14).unwrap();
    assert!(c.holds());
    assert!(c.outer().log_modulus().values().iter().all(|&v| v <= 0.0));
    for p in &c.parts {
        assert!(p.tree.certificate.holds);
        assert_eq!(p.depth_check.violations, 0);
    }
}

fn clustered_strategy() -> impl Strategy<Value = PointMassMeasure> {
    (
        0.0f64..1.0,
        prop::collection::vec((1u32..10, -1.0f64..1.0, 0.01f64..1.0), 1..40),
    )
        .prop_map(|(c, v)| {
            PointMassMeasure::from_polar(v.into_iter().map(|(k, off, w)| {
                let gap = dyadic_length(k);
                (1.0 - gap, (c + off * gap).rem_euclid(1.0), w * gap)
            }))
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trees_satisfy_their_invariants(mu in clustered_strategy()) {
        let max_level = 10;
        let eps = EpsSchedule::preset("slow", mu.total_mass()).unwrap();
        if let Ok(split) = split_measure(&mu, &eps, max_level) {
            for part in [1u8, 2] {
                let heavy = heavy_squares(&split, part, &eps, max_level);
                check_tree(&stopping_tree(split.part(part), &heavy, max_level), split.part(part));
            }
        }
    }

    #[test]
    fn first_construction_never_amplifies(mu in clustered_strategy()) {
        let eps = EpsSchedule::preset("geometric", mu.total_mass()).unwrap();
        match construct_a(&mu, &eps, 10) {
            Ok(c) => prop_assert!(c.outer().log_modulus().values().iter().all(|&v| v <= 0.0)),
            Err(Error::RadiiExhausted { .. }) | Err(Error::NotCarleson { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
