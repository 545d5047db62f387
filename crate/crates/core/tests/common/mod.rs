#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warehouse_routing::graph::ResourceDefaults;
use warehouse_routing::{generate_map_family, Assignment, ResourceGraph, ResourceId, Task};

/// Map `map` (0 sparsest, 2 full) of a seeded 6x6 family.
pub fn family_graph(seed: u64, map: usize) -> ResourceGraph {
    generate_map_family(6, 6, 3, seed)
        .unwrap()
        .graph(map, ResourceDefaults::default())
        .unwrap()
}

/// Distinct starts and distinct goals for robots `0..robots`.
pub fn random_assignment(graph: &ResourceGraph, robots: usize, seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<ResourceId> = (0..graph.node_count() as u32).map(ResourceId).collect();
    let starts: Vec<_> = nodes.choose_multiple(&mut rng, robots).copied().collect();
    let goals: Vec<_> = nodes.choose_multiple(&mut rng, robots).copied().collect();
    let tasks: Vec<Task> = starts
        .into_iter()
        .zip(goals)
        .map(|(start, goal)| Task { start, goal })
        .collect();
    Assignment::from_tasks(&tasks).unwrap()
}
