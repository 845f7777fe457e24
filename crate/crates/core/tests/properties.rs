use pu_convex::experiment::{
    read_records, run_experiment, run_experiment_detailed, with_threads, write_records, ExperimentConfig, RunRecord,
};
use pu_convex::prelude::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn volume_fractions_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for shape in Shape::ALL {
        let dim = shape.native_dim().unwrap_or(2);
        let domain = make_domain(shape, dim).unwrap();
        let mut p = vec![0.0; dim];
        let trials = 1_000_000;
        let hits = (0..trials)
            .filter(|_| {
                p.iter_mut().for_each(|x| *x = rng.gen());
                domain.contains(&p).unwrap()
            })
            .count();
        let estimate = hits as f64 / trials as f64;
        assert!(
            (estimate - shape.volume_fraction()).abs() <= 0.005,
            "{shape}: {estimate} vs {}",
            shape.volume_fraction()
        );
    }
}

#[test]
fn filter_agrees_with_contains() {
    for shape in Shape::ALL {
        let dim = shape.native_dim().unwrap_or(3);
        let domain = make_domain(shape, dim).unwrap();
        let pts = halton_points(5000, dim).unwrap();
        let (kept, fraction) = filter_points(&domain, &pts).unwrap();
        let expected: Vec<&[f64]> = pts.iter().filter(|p| domain.contains(p).unwrap()).collect();
        assert_eq!(kept.iter().collect::<Vec<_>>(), expected);
        assert_eq!(fraction, expected.len() as f64 / 5000.0);
    }
}

#[test]
fn every_data_point_lies_in_a_solved_subdomain() {
    for shape in [Shape::Triangle, Shape::Disk, Shape::Hexagon, Shape::Pyramid] {
        let run = run_experiment_detailed(&ExperimentConfig::builtin(shape, 2)).unwrap();
        for p in run.dataset.points.iter() {
            assert!(!run.model.weights_at(p).unwrap().is_empty(), "{shape} {p:?}");
        }
    }
}

fn strip_timings(mut r: RunRecord) -> RunRecord {
    r.generate_ms = 0.0;
    r.build_ms = 0.0;
    r.assemble_ms = 0.0;
    r.evaluate_ms = 0.0;
    r
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    for shape in [Shape::Disk, Shape::Cylinder] {
        let cfg = ExperimentConfig::builtin(shape, 2);
        let one = with_threads(1, || run_experiment(&cfg)).unwrap().unwrap();
        let many = with_threads(4, || run_experiment(&cfg)).unwrap().unwrap();
        let again = run_experiment(&cfg).unwrap();
        assert_eq!(strip_timings(one.clone()), strip_timings(many));
        assert_eq!(strip_timings(one), strip_timings(again));
    }
}

#[test]
fn record_counts_are_consistent() {
    let run = run_experiment_detailed(&ExperimentConfig::builtin(Shape::Hexagon, 3)).unwrap();
    let r = &run.record;
    assert_eq!(r.n, run.dataset.points.len());
    assert_eq!(r.s, run.eval_points.len());
    assert!(r.d <= r.grid_total);
    assert!(r.empty_count <= r.d);
    assert!(r.max_overlap >= 1);
    assert!(r.mae >= r.rmse);
    for t in [r.generate_ms, r.build_ms, r.assemble_ms, r.evaluate_ms] {
        assert!(t >= 0.0);
    }
}

fn record_strategy() -> impl Strategy<Value = RunRecord> {
    let float = prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        1e-300f64..1e300,
        Just(0.0),
    ];
    (
        "[a-z:/._]{1,12}",
        (0usize..1_000_000, 0usize..1_000_000, 0usize..1_000_000),
        proptest::collection::vec(float, 8),
    )
        .prop_map(|(domain, (n, d, s), f)| RunRecord {
            domain,
            dim: 2 + n % 2,
            candidates: n * 2,
            n,
            d,
            grid_total: d + 3,
            radius: f[0],
            kernel_shape: f[1],
            s,
            mae: f[2],
            rmse: f[3],
            max_overlap: d % 17,
            empty_count: d % 5,
            uncovered_count: s % 3,
            generate_ms: f[4],
            build_ms: f[5],
            assemble_ms: f[6],
            evaluate_ms: f[7],
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(records in proptest::collection::vec(record_strategy(), 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        write_records(&path, &records).unwrap();
        prop_assert_eq!(read_records(&path).unwrap(), records);
    }
}

#[test]
fn real_record_round_trips() {
    let record = run_experiment(&ExperimentConfig::builtin(Shape::Triangle, 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_records(&path, std::slice::from_ref(&record)).unwrap();
    assert_eq!(read_records(&path).unwrap(), vec![record]);
}
