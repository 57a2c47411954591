use std::collections::HashSet;
use std::sync::OnceLock;

use apollonian::cli_io::ExperimentConfig;
use apollonian::conformal_metrics::{vol_f, ConformalMetric, Region};
use apollonian::counting_asymptotics::{count_curve, fit_exponent, geometric_grid, CountCurve};
use apollonian::group_orbits::{
    displacement, patterson_truncated, poincare_series, GroupPresentation, HalfSpacePoint, ReducedWord,
};
use apollonian::inversive_geometry::{
    circle_from_center_radius, inversive_product, standard_bounded_root, MobiusMap, Orientation, OrientedCircle,
};
use apollonian::packing_generator::{cache, generate, GenerationCutoff, PackingSpec, PackingStore, Records};
use apollonian::residual_set::{gap_cover, hausdorff_sum, weighted_sum};
use proptest::prelude::*;

fn circle() -> impl Strategy<Value = OrientedCircle> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..2.0f64, any::<bool>()).prop_map(|(x, y, r, pos)| {
        let o = if pos { Orientation::Positive } else { Orientation::Negative };
        circle_from_center_radius((x, y), r, o).unwrap()
    })
}

fn reduced(rank: u8, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..rank, 0..=max_len).prop_map(|mut w| {
        w.dedup();
        w
    })
}

fn rows(store: &PackingStore) -> HashSet<[i128; 4]> {
    match &store.records {
        Records::Exact4 { rows, .. } => rows.iter().copied().collect(),
        _ => panic!("exact store expected"),
    }
}

fn bounded_store() -> &'static PackingStore {
    static STORE: OnceLock<PackingStore> = OnceLock::new();
    STORE.get_or_init(|| generate(&PackingSpec::standard_bounded(), GenerationCutoff::MaxCurvature(400.0)).unwrap())
}

fn strip_presentation() -> &'static GroupPresentation {
    static PRES: OnceLock<GroupPresentation> = OnceLock::new();
    PRES.get_or_init(|| GroupPresentation::from_spec(&PackingSpec::strip()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_maps_preserve_products(u in circle(), v in circle(), m1 in circle(), m2 in circle()) {
        let m = MobiusMap::inversion(&m1).compose(&MobiusMap::inversion(&m2));
        let (mu, mv) = (m.apply(&u), m.apply(&v));
        // rounding error grows with the size of the coordinates
        let norm = |c: &OrientedCircle| c.v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = norm(&mu).max(1.0) * norm(&mv).max(1.0);
        prop_assert!((mu.quadratic_form() - 1.0).abs() <= 1e-12 * norm(&mu).max(1.0).powi(2));
        let before = inversive_product(&u, &v).unwrap();
        let after = inversive_product(&mu, &mv).unwrap();
        prop_assert!((before - after).abs() <= 1e-12 * scale, "{before} {after}");
        prop_assert!(MobiusMap::inversion(&m1).is_involution());
    }

    #[test]
    fn exact_reflection_is_an_involution(word in reduced(4, 30), slot in 0usize..4) {
        let letters: Vec<usize> = word.iter().map(|&k| k as usize).collect();
        let q = standard_bounded_root().reflect_word(&letters).unwrap();
        prop_assert!(q.descartes_identity_holds());
        let back = q.reflect(slot).unwrap().reflect(slot).unwrap();
        prop_assert_eq!(back.members, q.members);
    }

    #[test]
    fn euclidean_volume_scales(x in -3.0..3.0f64, y in -3.0..3.0f64, r in 0.01..2.0f64, lambda in 0.1..10.0f64) {
        let a = circle_from_center_radius((x, y), r, Orientation::Positive).unwrap();
        let b = circle_from_center_radius((lambda * x, lambda * y), lambda * r, Orientation::Positive).unwrap();
        let va = vol_f(&ConformalMetric::Euclidean, &a).unwrap().value;
        let vb = vol_f(&ConformalMetric::Euclidean, &b).unwrap().value;
        prop_assert!((vb - lambda * lambda * va).abs() <= 1e-12 * vb);
    }

    #[test]
    fn nested_disks_have_ordered_volumes(
        x in -2.0..2.0f64, y in 0.5..3.0f64, frac in 0.05..0.9f64, inner in 0.05..0.95f64,
        angle in 0.0..std::f64::consts::TAU, k in 0.3..1.7f64,
    ) {
        let r = frac * y;
        let ri = inner * r;
        let off = (r - ri) * 0.99;
        let outer = circle_from_center_radius((x, y), r, Orientation::Positive).unwrap();
        let small = circle_from_center_radius((x + off * angle.cos(), y + off * angle.sin()), ri, Orientation::Positive).unwrap();
        for m in [ConformalMetric::Hyperbolic, ConformalMetric::Spherical, ConformalMetric::PowerLaw { k }] {
            let a = vol_f(&m, &small).unwrap().value;
            let b = vol_f(&m, &outer).unwrap().value;
            prop_assert!(a <= b * (1.0 + 1e-12), "{m}: {a} > {b}");
        }
    }

    #[test]
    fn band_meets_are_mirror_symmetric(x in -3.0..3.0f64, y in 0.0..12.0f64, r in 0.01..3.0f64, n in 1u32..8) {
        let band = Region::Band { n };
        let c = circle_from_center_radius((x, y), r, Orientation::Positive).unwrap();
        let m = circle_from_center_radius((-x, y), r, Orientation::Positive).unwrap();
        prop_assert_eq!(band.intersects(&c), band.intersects(&m));
    }

    #[test]
    fn counts_never_increase_with_t(cx in -0.8..0.8f64, cy in -0.8..0.8f64, r in 0.05..0.6f64) {
        let region = Region::Disk { center: (cx, cy), r };
        let grid = geometric_grid(1e-5, 1.0, 8).unwrap();
        for m in [ConformalMetric::Euclidean, ConformalMetric::Spherical] {
            let curve = count_curve(bounded_store(), &m, &region, &grid).unwrap();
            prop_assert!(curve.points.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }

    #[test]
    fn pure_power_laws_fit_exactly(s in 0.2..2.5f64, c in 1e3..1e6f64) {
        let grid = geometric_grid(1e-6, 1e-2, 16).unwrap();
        let xs: Vec<f64> = grid.iter().map(|t| 1.0 / t).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(s)).collect();
        let (e, lc, _) = apollonian::counting_asymptotics::fit_power_law(&xs, &ys).unwrap();
        prop_assert!((e - s).abs() < 1e-9 && (lc - c.ln()).abs() < 1e-7);
        let pts = grid.iter().map(|&t| (t, (1e18 * (t / 1e-6).powf(-s)).round() as u64)).collect();
        let curve = CountCurve::from_points("synthetic", "none", pts).unwrap();
        prop_assert!((fit_exponent(&curve, None).unwrap().exponent - s).abs() < 1e-6);
    }

    #[test]
    fn inverse_words_have_equal_displacement(word in reduced(4, 12)) {
        let pres = strip_presentation();
        let w = ReducedWord::new(word, 4).unwrap();
        let d = displacement(&w.to_map(pres));
        let di = displacement(&w.inverse().to_map(pres));
        prop_assert!(d >= 0.0 && (d - di).abs() <= 1e-10 * (1.0 + d));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stores_grow_with_the_cutoff(t1 in 10.0..200.0f64, extra in 0.0..300.0f64) {
        let spec = PackingSpec::standard_bounded();
        let a = generate(&spec, GenerationCutoff::MaxCurvature(t1)).unwrap();
        let b = generate(&spec, GenerationCutoff::MaxCurvature(t1 + extra)).unwrap();
        prop_assert!(rows(&a).is_subset(&rows(&b)));
    }

    #[test]
    fn valid_counts_survive_a_larger_cutoff(t1 in 50.0..300.0f64, cx in -0.5..0.5f64, cy in -0.5..0.5f64) {
        let spec = PackingSpec::standard_bounded();
        let small = generate(&spec, GenerationCutoff::MaxCurvature(t1)).unwrap();
        let region = Region::Disk { center: (cx, cy), r: 0.4 };
        let grid = geometric_grid(1e-6, 1.0, 8).unwrap();
        let a = count_curve(&small, &ConformalMetric::Euclidean, &region, &grid).unwrap();
        let b = count_curve(bounded_store(), &ConformalMetric::Euclidean, &region, &grid).unwrap();
        prop_assume!(t1 <= 400.0);
        for (p, q) in a.points.iter().zip(&b.points) {
            if p.0 >= a.validity.0 {
                prop_assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn poincare_partials_and_patterson_mass(s in 1.0..3.0f64, len in 0u32..9) {
        let pres = strip_presentation();
        let series = poincare_series(pres, s, len).unwrap();
        prop_assert!(series.rows.windows(2).all(|w| w[1].log_partial >= w[0].log_partial));
        let nu = patterson_truncated(pres, &HalfSpacePoint::base(2), s, len).unwrap();
        prop_assert!((nu.total_mass() - 1.0).abs() < 1e-13);
        prop_assert!(nu.atoms.iter().all(|a| a.weight > 0.0 && a.height > 0.0));
    }

    #[test]
    fn config_round_trips(
        t_min in 1e-9..1e-3f64, per in 1u32..40, k in 0.1..3.0f64, len in 1u32..20,
        key in "[a-z]{3,10}",
    ) {
        let text = format!("packing = strip\nt_min = {t_min:e}\nper_decade = {per}\nmetric = power_law:{k}\nlength = {len}\n");
        let cfg = ExperimentConfig::parse(&text, &[]).unwrap();
        let again = ExperimentConfig::parse(&cfg.resolved(), &[]).unwrap();
        prop_assert_eq!(&cfg, &again);
        let known = cfg.resolved().lines().any(|l| l.starts_with(&format!("{key} ")))
            || ["output", "workers"].contains(&key.as_str());
        prop_assume!(!known);
        let line = format!("{key} = 1");
        prop_assert!(ExperimentConfig::parse(&line, &[]).is_err());
    }
}

#[test]
fn generation_is_independent_of_worker_count() {
    let spec = PackingSpec::strip();
    let bytes = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| cache::to_bytes(&generate(&spec, GenerationCutoff::MaxCurvature(2000.0)).unwrap()))
    };
    assert_eq!(bytes(1), bytes(3));
}

#[test]
fn unweighted_euclidean_sum_matches_the_covering_sum() {
    let disk = Region::Disk {
        center: (0.0, 0.0),
        r: 1.0,
    };
    let cover = gap_cover(&PackingSpec::standard_bounded(), &disk, 8).unwrap();
    for s in [1.0, 1.3, 1.7] {
        assert_eq!(weighted_sum(&cover, &ConformalMetric::Euclidean, s).unwrap(), hausdorff_sum(&cover, s));
    }
}

#[test]
fn covering_sums_bracket_the_dimension() {
    let disk = Region::Disk {
        center: (0.0, 0.0),
        r: 1.0,
    };
    let covers: Vec<_> = (6..=12)
        .map(|l| gap_cover(&PackingSpec::standard_bounded(), &disk, l).unwrap())
        .collect();
    for w in covers.windows(2) {
        assert!(hausdorff_sum(&w[1], 1.4) < hausdorff_sum(&w[0], 1.4));
        assert!(hausdorff_sum(&w[1], 1.2) > hausdorff_sum(&w[0], 1.2));
    }
}
