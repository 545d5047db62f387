use routing_bench::experiment::{parse_variants, read_results, write_results, ExperimentOptions};
use routing_bench::{run_experiment, run_experiment_sequential, Outcome, RunRecord};
use warehouse_routing::generate_suite;

fn without_times(records: &[RunRecord]) -> Vec<RunRecord> {
    records
        .iter()
        .map(|r| RunRecord {
            times_ms: vec![0.0; r.times_ms.len()],
            ..r.clone()
        })
        .collect()
}

#[test]
fn desk_suite_shape() {
    let suite = generate_suite(8, 8, 5, 50, 20, 0).unwrap();
    let variants = parse_variants("CARP,CARP10,Proposed_4").unwrap();
    let records = run_experiment_sequential(&suite, &variants, 20).unwrap();
    assert_eq!(records.len(), 750);
    for r in &records {
        assert_eq!(r.violations, 0, "{r:?}");
        assert_eq!(r.total_actions.is_some(), r.succeeded());
        match r.outcome {
            Outcome::Success => assert_eq!(r.times_ms.len(), 20),
            Outcome::Fail { robot } => assert_eq!(r.times_ms.len(), robot + 1),
        }
    }
}

#[test]
fn single_cell_and_determinism() {
    let suite = generate_suite(8, 8, 5, 3, 20, 4).unwrap();
    let options = ExperimentOptions {
        maps: Some(vec![4]),
        assignments: Some(1),
        ..ExperimentOptions::new(20)
    };
    let cells = run_experiment(&suite, &parse_variants("CARP").unwrap(), &options).unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].record.times_ms.len(), 20);

    let variants = parse_variants("CARP,CARP10,LF,Proposed_3,Proposed_7@20").unwrap();
    let options = ExperimentOptions {
        seeds: vec![1, 2],
        assignments: Some(2),
        maps: Some(vec![1, 3]),
        ..ExperimentOptions::new(12)
    };
    let first: Vec<_> = run_experiment(&suite, &variants, &options)
        .unwrap()
        .into_iter()
        .map(|c| c.record)
        .collect();
    let again: Vec<_> = run_experiment(
        &suite,
        &variants,
        &ExperimentOptions {
            parallel: false,
            ..options
        },
    )
    .unwrap()
    .into_iter()
    .map(|c| c.record)
    .collect();
    assert_eq!(first.len(), 2 * 2 * 5 * 2);
    assert_eq!(without_times(&first), without_times(&again));

    let mut csv = Vec::new();
    write_results(&first, &mut csv).unwrap();
    assert_eq!(
        without_times(&read_results(csv.as_slice()).unwrap()),
        without_times(&first)
    );
}

#[test]
fn fallback_rescues_failed_additions() {
    let suite = generate_suite(8, 8, 5, 20, 20, 0).unwrap();
    let variants = parse_variants("Proposed_2").unwrap();
    let base = ExperimentOptions {
        maps: Some(vec![0, 1]),
        ..ExperimentOptions::new(20)
    };
    let plain = run_experiment(&suite, &variants, &base).unwrap();
    let rescued = run_experiment(
        &suite,
        &variants,
        &ExperimentOptions {
            fallback: true,
            ..base
        },
    )
    .unwrap();
    let failures = |cells: &[routing_bench::CellResult]| {
        cells.iter().filter(|c| !c.record.succeeded()).count()
    };
    assert!(failures(&rescued) <= failures(&plain));
    assert!(rescued.iter().any(|c| c.record.fallbacks > 0));
    assert!(rescued.iter().all(|c| c.record.violations == 0));
}
