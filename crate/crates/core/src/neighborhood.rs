//! Adding one robot to a running fleet by neighborhood replanning.
//!
//! The new robot starts alone in its neighborhood. Each round pulls in the
//! already-planned robot whose trajectory runs closest to the neighborhood,
//! replans every robot outside the neighborhood in their original order, and
//! then tries every priority order of the neighborhood on top of that. The
//! cheapest joint plan seen over all rounds wins.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::ResourceGraph;
use crate::planner::{Assignment, Carp, PlanError, PlanSet, Task};
use crate::router::{shortest_path, RoutePlan};
use crate::RobotId;

/// Mean Euclidean distance between the two robots' positions, sampled at
/// every tick from the first departure to the last arrival of the pair.
///
/// Before departure a robot sits on its start, after arrival on its goal.
/// When neither robot moves at all the result is the distance between their
/// fixed positions.
pub fn trajectory_distance(graph: &ResourceGraph, a: &RoutePlan, b: &RoutePlan) -> f64 {
    let span = |p: &RoutePlan| (p.arrival > p.depart()).then_some((p.depart(), p.arrival));
    let (first, last) = match (span(a), span(b)) {
        (None, None) => return a.position(graph, 0).distance(b.position(graph, 0)),
        (Some(s), None) | (None, Some(s)) => s,
        (Some(x), Some(y)) => (x.0.min(y.0), x.1.max(y.1)),
    };
    let total: f64 = (first..=last)
        .map(|t| a.position(graph, t).distance(b.position(graph, t)))
        .sum();
    total / (last - first + 1) as f64
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NeighborhoodError {
    #[error("no candidate robots left outside the neighborhood")]
    NoCandidates,
    #[error("robot {0} has no trajectory")]
    MissingTrajectory(RobotId),
}

/// Robot in `remaining` closest to any member of `neighborhood`; ties go to
/// the robot that comes first in `remaining`.
pub fn nearest_to_neighborhood(
    graph: &ResourceGraph,
    remaining: &[RobotId],
    neighborhood: &[RobotId],
    trajectories: &BTreeMap<RobotId, RoutePlan>,
) -> Result<RobotId, NeighborhoodError> {
    let lookup = |r: RobotId| {
        trajectories
            .get(&r)
            .ok_or(NeighborhoodError::MissingTrajectory(r))
    };
    let members = neighborhood
        .iter()
        .map(|&r| lookup(r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<(f64, RobotId)> = None;
    for &candidate in remaining {
        let t = lookup(candidate)?;
        let d = members
            .iter()
            .map(|m| trajectory_distance(graph, t, m))
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, candidate));
        }
    }
    best.map(|(_, r)| r).ok_or(NeighborhoodError::NoCandidates)
}

/// Whether consecutive permutations share the plans of their common head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixReuse {
    Enabled,
    Disabled,
}

/// One evaluated priority order of the neighborhood.
#[derive(Debug)]
pub struct PermutationOutcome<'a> {
    pub permutation: &'a [RobotId],
    /// The base plans followed by the neighborhood in this order, or the
    /// first neighborhood robot that could not be routed.
    pub plans: Result<&'a PlanSet, RobotId>,
    /// Searches spent on this permutation.
    pub astar_calls: u64,
}

/// Advances `perm` to the next permutation in lexicographic order.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm
        .iter()
        .rposition(|&x| x > perm[i])
        .expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// All `n!` index permutations in lexicographic order.
pub fn lexicographic_permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = Some((0..n).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut following = current.clone();
        if next_permutation(&mut following) {
            next = Some(following);
        }
        Some(current)
    })
}

/// `n!`, saturating.
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .unwrap_or(u64::MAX)
}

/// Up to `budget` distinct index permutations drawn uniformly, always
/// including the identity, sorted lexicographically. Returns every
/// permutation when there are no more than `budget` of them.
pub fn sample_permutations(n: usize, budget: usize, seed: u64) -> Vec<Vec<usize>> {
    if factorial(n) <= budget as u64 {
        return lexicographic_permutations(n).collect();
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut chosen = BTreeSet::new();
    chosen.insert(identity.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while chosen.len() < budget {
        let mut p = identity.clone();
        p.shuffle(&mut rng);
        chosen.insert(p);
    }
    chosen.into_iter().collect()
}

/// Plans the neighborhood on top of `base` once per order in `orders`
/// (index permutations into `neighborhood`) and reports each result.
///
/// With [`PrefixReuse::Enabled`] the plans of the head shared with the
/// previous order are kept and only the tail is replanned; the reported
/// plans are identical either way.
pub fn evaluate_permutations<I>(
    carp: &mut Carp<'_>,
    neighborhood: &[RobotId],
    tasks: &Assignment,
    base: &PlanSet,
    orders: I,
    reuse: PrefixReuse,
    mut visit: impl FnMut(PermutationOutcome<'_>),
) -> Result<(), PlanError>
where
    I: IntoIterator<Item = Vec<usize>>,
{
    let base_len = base.len();
    let mut current = base.clone();
    let mut previous: Vec<usize> = Vec::new();
    // Position in `previous` of the robot that failed, if it did.
    let mut failed_at: Option<usize> = None;
    let mut robots = Vec::with_capacity(neighborhood.len());

    for order in orders {
        robots.clear();
        robots.extend(order.iter().map(|&i| neighborhood[i]));
        let shared = match reuse {
            PrefixReuse::Enabled => previous
                .iter()
                .zip(&order)
                .take_while(|(a, b)| a == b)
                .count(),
            PrefixReuse::Disabled => 0,
        };
        if let Some(f) = failed_at.filter(|&f| shared > f) {
            visit(PermutationOutcome {
                permutation: &robots,
                plans: Err(robots[f]),
                astar_calls: 0,
            });
            previous = order;
            continue;
        }
        let keep = shared.min(current.len() - base_len);
        current.truncate(base_len + keep);
        let before = carp.astar_calls();
        let result = carp.extend(&mut current, tasks, &robots[keep..]);
        let astar_calls = carp.astar_calls() - before;
        let plans = match result {
            Ok(()) => {
                failed_at = None;
                Ok(&current)
            }
            Err(PlanError::Failed { robot }) => {
                failed_at = Some(current.len() - base_len);
                Err(robot)
            }
            Err(e) => return Err(e),
        };
        visit(PermutationOutcome {
            permutation: &robots,
            plans,
            astar_calls,
        });
        previous = order;
    }
    Ok(())
}

/// Exhaustive lexicographic evaluation over the neighborhood in insertion
/// order.
pub fn permutations_with_prefix_reuse(
    carp: &mut Carp<'_>,
    neighborhood: &[RobotId],
    tasks: &Assignment,
    base: &PlanSet,
    reuse: PrefixReuse,
    visit: impl FnMut(PermutationOutcome<'_>),
) -> Result<(), PlanError> {
    evaluate_permutations(
        carp,
        neighborhood,
        tasks,
        base,
        lexicographic_permutations(neighborhood.len()),
        reuse,
        visit,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermutationBudget {
    Exhaustive,
    /// At most this many orders per round, sampled with the update's seed.
    Sampled(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateParams {
    /// Largest neighborhood size, counting the new robot.
    pub neighborhood_limit: usize,
    pub budget: PermutationBudget,
    pub seed: u64,
    /// Keep plans of robots ahead of the removed one when replanning the
    /// rest of the fleet.
    pub suffix_reuse: bool,
    pub prefix_reuse: PrefixReuse,
    pub trace: bool,
}

impl UpdateParams {
    pub fn exhaustive(neighborhood_limit: usize) -> Self {
        Self {
            neighborhood_limit,
            budget: PermutationBudget::Exhaustive,
            seed: 0,
            suffix_reuse: true,
            prefix_reuse: PrefixReuse::Enabled,
            trace: false,
        }
    }

    pub fn sampled(neighborhood_limit: usize, budget: usize, seed: u64) -> Self {
        Self {
            budget: PermutationBudget::Sampled(budget),
            seed,
            ..Self::exhaustive(neighborhood_limit)
        }
    }
}

/// One candidate joint plan considered by [`plan_update`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    /// 0 for the new robot inserted alone, then one per neighborhood round.
    pub iteration: usize,
    pub permutation: Vec<RobotId>,
    pub feasible: bool,
    pub total_actions: Option<u64>,
    pub astar_calls: u64,
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "iteration,permutation,feasible,total_actions,astar_calls"
    )?;
    for r in records {
        let perm: Vec<String> = r.permutation.iter().map(|p| p.0.to_string()).collect();
        let total = r.total_actions.map(|t| t.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            perm.join(" "),
            r.feasible,
            total,
            r.astar_calls
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct UpdateOutcome {
    pub plans: PlanSet,
    /// Free-window searches performed, all phases together.
    pub astar_calls: u64,
    /// Searches spent replanning robots outside the neighborhood.
    pub replan_calls: u64,
    /// Searches spent on neighborhood permutations, including the initial
    /// insertion of the new robot alone.
    pub permutation_calls: u64,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UpdateError {
    #[error("no feasible joint plan found when adding robot {robot}")]
    NoFeasibleCandidate { robot: RobotId },
    #[error("neighborhood limit must be at least 1")]
    InvalidLimit,
    #[error("robot {0} is already planned")]
    AlreadyPlanned(RobotId),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
}

/// Adds `robot` with `task` to the feasible joint plan `existing`.
pub fn plan_update(
    graph: &ResourceGraph,
    existing: &PlanSet,
    robot: RobotId,
    task: Task,
    params: &UpdateParams,
) -> Result<UpdateOutcome, UpdateError> {
    if params.neighborhood_limit == 0 {
        return Err(UpdateError::InvalidLimit);
    }
    if existing.plan_of(robot).is_some() {
        return Err(UpdateError::AlreadyPlanned(robot));
    }
    let tasks = Assignment::new(existing.tasks().iter().chain([(robot, task)]))?;
    let mut carp = Carp::new(graph);
    let mut trace = Vec::new();
    let mut best: Option<PlanSet> = None;

    let mut trajectories: BTreeMap<RobotId, RoutePlan> = existing
        .plans()
        .iter()
        .map(|p| (p.robot, p.clone()))
        .collect();
    trajectories.insert(
        robot,
        shortest_path(graph, robot, task.start, task.goal).map_err(PlanError::from)?,
    );

    // The new robot alone on top of the untouched fleet.
    let mut inserted = existing.clone();
    let result = carp.push(&mut inserted, robot, task);
    record(
        &mut trace,
        params.trace,
        0,
        &[robot],
        result.as_ref().ok().map(|_| &inserted),
        1,
    );
    match result {
        Ok(()) => best = Some(inserted),
        Err(PlanError::Failed { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    let mut permutation_calls = carp.astar_calls();
    let mut replan_calls = 0;

    let mut remaining: Vec<RobotId> = existing.order().to_vec();
    let mut neighborhood = vec![robot];
    // Plans of `remaining` in order; may hold only a prefix after a failure.
    let mut context = existing.clone();

    for iteration in 1..params.neighborhood_limit {
        if remaining.is_empty() {
            break;
        }
        let nearest = nearest_to_neighborhood(graph, &remaining, &neighborhood, &trajectories)?;
        let at = remaining
            .iter()
            .position(|&r| r == nearest)
            .expect("nearest comes from remaining");
        remaining.remove(at);
        neighborhood.push(nearest);

        let keep = if params.suffix_reuse {
            at.min(context.len())
        } else {
            0
        };
        context.truncate(keep);
        let before = carp.astar_calls();
        let replanned = carp.extend(&mut context, &tasks, &remaining[keep..]);
        replan_calls += carp.astar_calls() - before;
        match replanned {
            Ok(()) => {
                for p in context.plans() {
                    trajectories.insert(p.robot, p.clone());
                }
            }
            Err(PlanError::Failed { .. }) => continue,
            Err(e) => return Err(e.into()),
        }

        let orders = match params.budget {
            PermutationBudget::Exhaustive => {
                lexicographic_permutations(neighborhood.len()).collect()
            }
            PermutationBudget::Sampled(budget) => sample_permutations(
                neighborhood.len(),
                budget,
                params.seed.wrapping_add(iteration as u64),
            ),
        };
        let mut improved = false;
        let before = carp.astar_calls();
        evaluate_permutations(
            &mut carp,
            &neighborhood,
            &tasks,
            &context,
            orders,
            params.prefix_reuse,
            |outcome| {
                let plans = outcome.plans.ok();
                record(
                    &mut trace,
                    params.trace,
                    iteration,
                    outcome.permutation,
                    plans,
                    outcome.astar_calls,
                );
                if let Some(p) = plans {
                    if best
                        .as_ref()
                        .is_none_or(|b| p.total_actions() < b.total_actions())
                    {
                        best = Some(p.clone());
                        improved = true;
                    }
                }
            },
        )?;
        permutation_calls += carp.astar_calls() - before;
        if improved {
            let best = best.as_ref().expect("just improved");
            for &r in &neighborhood {
                let plan = best.plan_of(r).expect("best covers the neighborhood");
                trajectories.insert(r, plan.clone());
            }
        }
    }

    let plans = best.ok_or(UpdateError::NoFeasibleCandidate { robot })?;
    Ok(UpdateOutcome {
        plans,
        astar_calls: carp.astar_calls(),
        replan_calls,
        permutation_calls,
        trace,
    })
}

fn record(
    trace: &mut Vec<TraceRecord>,
    enabled: bool,
    iteration: usize,
    permutation: &[RobotId],
    plans: Option<&PlanSet>,
    astar_calls: u64,
) {
    if enabled {
        trace.push(TraceRecord {
            iteration,
            permutation: permutation.to_vec(),
            feasible: plans.is_some(),
            total_actions: plans.map(PlanSet::total_actions),
            astar_calls,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_resource_graph, grid_cells, grid_edges, Cell};
    use crate::reservation::TimeInterval;
    use crate::router::Visit;
    use crate::{Tick, INFINITY};

    fn graph_with(cells: &[Cell]) -> ResourceGraph {
        let edges: Vec<(Cell, Cell)> = cells.windows(2).map(|w| (w[0], w[1])).collect();
        build_resource_graph(cells, &edges, 1, 1).unwrap()
    }

    /// Plan hopping between node resources, one tick each, ignoring
    /// adjacency; only positions matter for the distance.
    fn hops(g: &ResourceGraph, robot: u32, cells: &[Cell]) -> RoutePlan {
        let n = cells.len();
        let visits = cells
            .iter()
            .enumerate()
            .map(|(i, &c)| Visit {
                resource: g.node_at(c).unwrap(),
                interval: TimeInterval {
                    start: i as Tick,
                    end: if i + 1 == n { INFINITY } else { i as Tick + 1 },
                },
            })
            .collect();
        RoutePlan::from_visits(RobotId(robot), visits)
    }

    #[test]
    fn distance_of_identical_plans_is_zero() {
        let g = graph_with(&[Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)]);
        let p = hops(&g, 0, &[Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)]);
        assert_eq!(trajectory_distance(&g, &p, &p), 0.0);
    }

    #[test]
    fn distance_with_constant_gap() {
        let cells = [
            Cell::new(0, 0),
            Cell::new(3, 4),
            Cell::new(4, 3),
            Cell::new(5, 0),
        ];
        let g = graph_with(&cells);
        let still = hops(&g, 0, &[Cell::new(0, 0)]);
        let arc = hops(&g, 1, &[Cell::new(3, 4), Cell::new(4, 3), Cell::new(5, 0)]);
        assert!((trajectory_distance(&g, &still, &arc) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn distance_samples_inclusive_span() {
        let cells = [
            Cell::new(0, 1),
            Cell::new(0, 0),
            Cell::new(1, 0),
            Cell::new(2, 0),
        ];
        let g = graph_with(&cells);
        let mover = hops(&g, 0, &[Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)]);
        let still = hops(&g, 1, &[Cell::new(0, 1)]);
        let expected = (1.0 + 2f64.sqrt() + 5f64.sqrt()) / 3.0;
        assert!((trajectory_distance(&g, &mover, &still) - expected).abs() < 1e-12);
        assert_eq!(
            trajectory_distance(&g, &mover, &still),
            trajectory_distance(&g, &still, &mover)
        );
    }

    #[test]
    fn distance_of_static_pair() {
        let cells = [Cell::new(0, 0), Cell::new(0, 3), Cell::new(4, 3)];
        let g = graph_with(&cells);
        let a = hops(&g, 0, &[Cell::new(0, 0)]);
        let b = hops(&g, 1, &[Cell::new(4, 3)]);
        assert_eq!(trajectory_distance(&g, &a, &b), 5.0);
    }

    #[test]
    fn nearest_single_and_ties() {
        let cells = [
            Cell::new(0, 0),
            Cell::new(1, 0),
            Cell::new(2, 0),
            Cell::new(3, 0),
        ];
        let g = graph_with(&cells);
        let mut t = BTreeMap::new();
        t.insert(RobotId(0), hops(&g, 0, &[Cell::new(1, 0)]));
        t.insert(RobotId(1), hops(&g, 1, &[Cell::new(0, 0)]));
        t.insert(RobotId(2), hops(&g, 2, &[Cell::new(2, 0)]));
        t.insert(RobotId(3), hops(&g, 3, &[Cell::new(3, 0)]));
        let n = [RobotId(0)];
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(3)], &n, &t),
            Ok(RobotId(3))
        );
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(2), RobotId(1)], &n, &t),
            Ok(RobotId(2))
        );
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(1), RobotId(2)], &n, &t),
            Ok(RobotId(1))
        );
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(3), RobotId(2)], &n, &t),
            Ok(RobotId(2))
        );
        assert_eq!(
            nearest_to_neighborhood(&g, &[], &n, &t),
            Err(NeighborhoodError::NoCandidates)
        );
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(9)], &n, &t),
            Err(NeighborhoodError::MissingTrajectory(RobotId(9)))
        );
    }

    #[test]
    fn nearest_uses_closest_member() {
        let cells: Vec<Cell> = (0..8).map(|x| Cell::new(x, 0)).collect();
        let g = graph_with(&cells);
        let mut t = BTreeMap::new();
        t.insert(RobotId(0), hops(&g, 0, &[Cell::new(0, 0)]));
        t.insert(RobotId(1), hops(&g, 1, &[Cell::new(7, 0)]));
        t.insert(RobotId(2), hops(&g, 2, &[Cell::new(3, 0)]));
        t.insert(RobotId(3), hops(&g, 3, &[Cell::new(6, 0)]));
        // Robot 3 is 1 away from member 1, robot 2 is 3 away from member 0.
        assert_eq!(
            nearest_to_neighborhood(&g, &[RobotId(2), RobotId(3)], &[RobotId(0), RobotId(1)], &t),
            Ok(RobotId(3))
        );
    }

    #[test]
    fn lexicographic_enumeration() {
        let all: Vec<Vec<usize>> = lexicographic_permutations(3).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(lexicographic_permutations(5).count(), 120);
        assert_eq!(lexicographic_permutations(1).count(), 1);
        assert_eq!(factorial(6), 720);
    }

    #[test]
    fn sampling_includes_identity_and_is_sorted() {
        let s = sample_permutations(7, 150, 3);
        assert_eq!(s.len(), 150);
        assert!(s.contains(&(0..7).collect::<Vec<_>>()));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, sample_permutations(7, 150, 3));
        assert_eq!(sample_permutations(4, 150, 3).len(), 24);
    }

    fn open_grid(n: i32) -> ResourceGraph {
        build_resource_graph(&grid_cells(n, n), &grid_edges(n, n), 1, 1).unwrap()
    }

    fn task(g: &ResourceGraph, s: (i32, i32), t: (i32, i32)) -> Task {
        Task {
            start: g.node_at(Cell::new(s.0, s.1)).unwrap(),
            goal: g.node_at(Cell::new(t.0, t.1)).unwrap(),
        }
    }

    #[test]
    fn update_on_empty_fleet_is_shortest_path() {
        let g = open_grid(4);
        let t = task(&g, (0, 0), (3, 2));
        for m in 1..4 {
            let out = plan_update(
                &g,
                &PlanSet::empty(&g),
                RobotId(0),
                t,
                &UpdateParams::exhaustive(m),
            )
            .unwrap();
            assert_eq!(out.plans.len(), 1);
            assert_eq!(
                out.plans.plans()[0],
                shortest_path(&g, RobotId(0), t.start, t.goal).unwrap()
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = open_grid(3);
        let empty = PlanSet::empty(&g);
        let t = task(&g, (0, 0), (2, 2));
        assert_eq!(
            plan_update(&g, &empty, RobotId(0), t, &UpdateParams::exhaustive(0)).unwrap_err(),
            UpdateError::InvalidLimit
        );
        let mut carp = Carp::new(&g);
        let mut one = PlanSet::empty(&g);
        carp.push(&mut one, RobotId(0), t).unwrap();
        assert_eq!(
            plan_update(
                &g,
                &one,
                RobotId(0),
                task(&g, (1, 1), (1, 0)),
                &UpdateParams::exhaustive(2)
            )
            .unwrap_err(),
            UpdateError::AlreadyPlanned(RobotId(0))
        );
    }

    #[test]
    fn trace_lists_every_candidate() {
        let g = open_grid(5);
        let tasks = [
            task(&g, (0, 0), (4, 4)),
            task(&g, (4, 4), (0, 0)),
            task(&g, (0, 4), (4, 0)),
            task(&g, (4, 0), (0, 4)),
        ];
        let a = Assignment::from_tasks(&tasks[..3]).unwrap();
        let existing = Carp::new(&g).plan_all(&a, &a.robots()).unwrap();
        let mut params = UpdateParams::exhaustive(3);
        params.trace = true;
        let out = plan_update(&g, &existing, RobotId(3), tasks[3], &params).unwrap();
        // 1 + 2! + 3! candidates.
        assert_eq!(out.trace.len(), 1 + 2 + 6);
        let best = out
            .trace
            .iter()
            .filter_map(|r| r.total_actions)
            .min()
            .unwrap();
        assert_eq!(out.plans.total_actions(), best);
        assert_eq!(out.astar_calls, out.replan_calls + out.permutation_calls);
        let mut buf = Vec::new();
        write_trace_csv(&out.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(
            text.starts_with("iteration,permutation,feasible,total_actions,astar_calls\n0,3,true,")
        );
    }
}
