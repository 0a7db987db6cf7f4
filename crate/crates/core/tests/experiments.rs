use occupancy::dist::{build_distribution, DistributionSpec, RegVarProfile};
use occupancy::experiments::{
    estimate_theta, run_study, scaled_gaps, sup_deviation, ExperimentConfig, Study,
};
use occupancy::moments::normalizer;
use occupancy::sim::{run_coupled_with_counts, run_many, CheckpointGrid, OccupancySnapshot};
use occupancy::sim::{Checkpoint, Trajectory};
use occupancy::Error;

#[test]
fn forcing_poisson_count_to_n_gives_zero_gap() {
    let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
    let grid = CheckpointGrid::log_spaced(100, 100_000, 7, 3).unwrap();
    let counts = grid.points().to_vec();
    let tr = run_coupled_with_counts(&d, &grid, 11, &counts).unwrap();
    let b = vec![1.0; grid.len()];
    for k in 1..=3 {
        assert!(scaled_gaps(&tr, k, &b).iter().all(|&g| g == 0.0));
    }
}

#[test]
fn scaled_gap_is_monotone_in_normalizer() {
    let d = build_distribution(DistributionSpec::zipf(1.5)).unwrap();
    let grid = CheckpointGrid::log_spaced(100, 100_000, 7, 2).unwrap();
    let tr = &run_many(&d, &grid, 5, 1)[0];
    let nz = normalizer(RegVarProfile::of(&d), 1).unwrap();
    let b: Vec<f64> = grid.points().iter().map(|&n| nz.b(n as f64).unwrap()).collect();
    let doubled: Vec<f64> = b.iter().map(|x| 2.0 * x).collect();
    for (lo, hi) in scaled_gaps(tr, 1, &b).iter().zip(scaled_gaps(tr, 1, &doubled)) {
        assert!(*lo <= hi);
    }
}

#[test]
fn deterministic_unit_rate_has_no_deviation() {
    assert_eq!(sup_deviation(1e6, 0.6, |from, to| to - from), 0.0);
}

fn stub_trajectory(n: u64, rstar1: u64) -> Trajectory {
    let snap = OccupancySnapshot {
        balls: n,
        at_least: vec![rstar1],
        exactly: vec![rstar1],
    };
    Trajectory {
        seed: 0,
        checkpoints: vec![Checkpoint {
            n,
            poisson_count: n,
            fixed: snap.clone(),
            poissonized: snap,
        }],
    }
}

#[test]
fn theta_estimate_of_linear_occupancy_is_one() {
    assert_eq!(estimate_theta(&stub_trajectory(1_000_000, 1_000_000)).unwrap(), 1.0);
    assert!(estimate_theta(&stub_trajectory(50, 50)).is_err());
}

#[test]
fn theta_estimate_for_zipf_two() {
    let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
    let grid = CheckpointGrid::new(vec![10_000_000], 1).unwrap();
    let tr = &run_many(&d, &grid, 1, 1)[0];
    let est = estimate_theta(tr).unwrap();
    assert!((est - 0.5).abs() < 0.1, "estimate {est}");
}

#[test]
fn deviation_study_refuses_geometric() {
    let mut cfg = ExperimentConfig::default_for(Study::Corollary1);
    cfg.distribution = DistributionSpec::geometric(0.5);
    assert!(matches!(run_study(&cfg), Err(Error::Precondition(_))));
}

#[test]
fn deviation_study_on_a_single_checkpoint() {
    let mut cfg = ExperimentConfig::default_for(Study::Corollary1);
    cfg.n_min = 100_000;
    cfg.n_max = 100_000;
    cfg.points = 1;
    cfg.seeds = 50;
    let res = run_study(&cfg).unwrap();
    assert_eq!(res.series[0].points.len(), 1);
    assert!(res.passed(), "{:?}", res.checks);
}

#[test]
fn study_output_is_deterministic() {
    let mut cfg = ExperimentConfig::default_for(Study::Theorem1);
    cfg.n_max = 100_000;
    cfg.points = 5;
    cfg.seeds = 8;
    let a = run_study(&cfg).unwrap();
    let b = run_study(&cfg).unwrap();
    assert_eq!(a.summary_json().unwrap(), b.summary_json().unwrap());
}
