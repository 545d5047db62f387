use std::collections::BTreeSet;

use proptest::prelude::*;
use warehouse_routing::graph::{grid_edges, ResourceDefaults};
use warehouse_routing::{generate_map_family, generate_suite, ScenarioSuite};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn families_grow_from_a_tree_to_the_grid(seed in any::<u64>(), w in 2i32..9, h in 2i32..9, count in 2usize..6) {
        let extra = (grid_edges(w, h).len() - (w * h) as usize + 1).max(1);
        let Ok(family) = generate_map_family(w, h, count.min(extra + 1), seed) else { return Ok(()) };
        let maps = &family.maps;
        prop_assert_eq!(maps[0].len(), (w * h) as usize - 1);
        prop_assert_eq!(maps.last().unwrap().len(), grid_edges(w, h).len());
        for pair in maps.windows(2) {
            let small: BTreeSet<_> = pair[0].iter().collect();
            let large: BTreeSet<_> = pair[1].iter().collect();
            prop_assert!(small.is_subset(&large));
            prop_assert!(small.len() < large.len());
        }
        for i in 0..maps.len() {
            prop_assert!(family.graph(i, ResourceDefaults::default()).is_ok());
        }
    }
}

#[test]
fn suite_survives_a_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate_suite(6, 5, 4, 7, 9, 31).unwrap();
    suite.write(dir.path()).unwrap();
    let back = ScenarioSuite::read(dir.path()).unwrap();
    assert_eq!(back, suite);

    let graph = back.family.graph(0, ResourceDefaults::default()).unwrap();
    for fleet in &back.assignments {
        let tasks = fleet.to_assignment(&graph, Some(5)).unwrap();
        assert_eq!(tasks.len(), 5);
    }
}
