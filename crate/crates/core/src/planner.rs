//! Prioritized planning: robots are routed one after another, each treating
//! the robots planned before it as moving obstacles.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ResourceGraph, ResourceId};
use crate::reservation::ReservationTable;
use crate::router::{plan_route, shortest_path, RouteError, RoutePlan};
use crate::{RobotId, Tick};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub start: ResourceId,
    pub goal: ResourceId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("no route for robot {robot}")]
    Failed { robot: RobotId },
    #[error("robot {0} has no task")]
    UnknownRobot(RobotId),
    #[error("order is not a permutation of the assigned robots")]
    InvalidOrder,
    #[error("robots {0} and {1} share a start node")]
    SharedStart(RobotId, RobotId),
    #[error("robots {0} and {1} share a goal node")]
    SharedGoal(RobotId, RobotId),
    #[error("index {index} is beyond the plan order (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Route(#[from] RouteError),
}

impl PlanError {
    /// The robot that could not be routed, for planning failures.
    pub fn failed_robot(&self) -> Option<RobotId> {
        match self {
            PlanError::Failed { robot } => Some(*robot),
            _ => None,
        }
    }
}

/// Start and goal node per robot. Starts are pairwise distinct, as are goals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    tasks: BTreeMap<RobotId, Task>,
}

impl Assignment {
    pub fn new(tasks: impl IntoIterator<Item = (RobotId, Task)>) -> Result<Self, PlanError> {
        let tasks: BTreeMap<RobotId, Task> = tasks.into_iter().collect();
        let mut starts: BTreeMap<ResourceId, RobotId> = BTreeMap::new();
        let mut goals: BTreeMap<ResourceId, RobotId> = BTreeMap::new();
        for (&robot, task) in &tasks {
            if let Some(&other) = starts.get(&task.start) {
                return Err(PlanError::SharedStart(other, robot));
            }
            if let Some(&other) = goals.get(&task.goal) {
                return Err(PlanError::SharedGoal(other, robot));
            }
            starts.insert(task.start, robot);
            goals.insert(task.goal, robot);
        }
        Ok(Self { tasks })
    }

    /// Robots `0..tasks.len()` in order.
    pub fn from_tasks(tasks: &[Task]) -> Result<Self, PlanError> {
        Self::new(
            tasks
                .iter()
                .enumerate()
                .map(|(i, &t)| (RobotId(i as u32), t)),
        )
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, robot: RobotId) -> Option<Task> {
        self.tasks.get(&robot).copied()
    }

    /// Robot ids in ascending order.
    pub fn robots(&self) -> Vec<RobotId> {
        self.tasks.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RobotId, Task)> + '_ {
        self.tasks.iter().map(|(&r, &t)| (r, t))
    }

    /// Sub-assignment containing only `robots`.
    pub fn restrict(&self, robots: &[RobotId]) -> Result<Self, PlanError> {
        let tasks = robots
            .iter()
            .map(|&r| {
                self.task(r)
                    .map(|t| (r, t))
                    .ok_or(PlanError::UnknownRobot(r))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Ok(Self { tasks })
    }
}

/// Joint plan: routes in priority order plus the table holding all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanSet {
    order: Vec<RobotId>,
    plans: Vec<RoutePlan>,
    table: ReservationTable,
    total_actions: u64,
    makespan: Tick,
}

impl PlanSet {
    pub fn empty(graph: &ResourceGraph) -> Self {
        Self {
            order: Vec::new(),
            plans: Vec::new(),
            table: ReservationTable::new(graph),
            total_actions: 0,
            makespan: 0,
        }
    }

    pub fn order(&self) -> &[RobotId] {
        &self.order
    }

    /// Plans aligned with [`PlanSet::order`].
    pub fn plans(&self) -> &[RoutePlan] {
        &self.plans
    }

    pub fn table(&self) -> &ReservationTable {
        &self.table
    }

    pub fn total_actions(&self) -> u64 {
        self.total_actions
    }

    pub fn makespan(&self) -> Tick {
        self.makespan
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn plan_of(&self, robot: RobotId) -> Option<&RoutePlan> {
        self.order
            .iter()
            .position(|&r| r == robot)
            .map(|i| &self.plans[i])
    }

    /// Start and goal of every planned robot, read back from the routes.
    pub fn tasks(&self) -> Assignment {
        Assignment {
            tasks: self
                .plans
                .iter()
                .map(|p| {
                    (
                        p.robot,
                        Task {
                            start: p.start(),
                            goal: p.goal(),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Keeps the first `len` plans and releases the rest.
    pub fn truncate(&mut self, len: usize) {
        if len >= self.order.len() {
            return;
        }
        for plan in self.plans.drain(len..) {
            self.table.release(plan.robot);
        }
        self.order.truncate(len);
        self.total_actions = self.plans.iter().map(|p| p.actions).sum();
        self.makespan = self.plans.iter().map(|p| p.arrival).max().unwrap_or(0);
    }

    /// Routes `robot` against the current reservations and appends it.
    pub fn push(
        &mut self,
        graph: &ResourceGraph,
        robot: RobotId,
        task: Task,
    ) -> Result<&RoutePlan, PlanError> {
        let plan = plan_route(graph, &self.table, robot, task.start, task.goal, 0).map_err(
            |e| match e {
                RouteError::NoRoute { robot } => PlanError::Failed { robot },
                other => PlanError::Route(other),
            },
        )?;
        self.table
            .reserve(graph, &plan)
            .expect("router output must fit the table it was planned against");
        self.total_actions += plan.actions;
        self.makespan = self.makespan.max(plan.arrival);
        self.order.push(robot);
        self.plans.push(plan);
        Ok(&self.plans[self.plans.len() - 1])
    }
}

/// Sequential planner. Counts every single-robot search it performs.
#[derive(Debug)]
pub struct Carp<'g> {
    graph: &'g ResourceGraph,
    astar_calls: u64,
}

impl<'g> Carp<'g> {
    pub fn new(graph: &'g ResourceGraph) -> Self {
        Self {
            graph,
            astar_calls: 0,
        }
    }

    pub fn graph(&self) -> &'g ResourceGraph {
        self.graph
    }

    pub fn astar_calls(&self) -> u64 {
        self.astar_calls
    }

    /// Routes `robot` on top of `set`.
    pub fn push(&mut self, set: &mut PlanSet, robot: RobotId, task: Task) -> Result<(), PlanError> {
        self.astar_calls += 1;
        set.push(self.graph, robot, task).map(|_| ())
    }

    /// Appends `robots` in order. On failure `set` holds the robots planned
    /// before the failing one.
    pub fn extend(
        &mut self,
        set: &mut PlanSet,
        tasks: &Assignment,
        robots: &[RobotId],
    ) -> Result<(), PlanError> {
        for &robot in robots {
            let task = tasks.task(robot).ok_or(PlanError::UnknownRobot(robot))?;
            self.push(set, robot, task)?;
        }
        Ok(())
    }

    pub fn plan_all(
        &mut self,
        assignment: &Assignment,
        order: &[RobotId],
    ) -> Result<PlanSet, PlanError> {
        check_permutation(assignment, order)?;
        let mut set = PlanSet::empty(self.graph);
        self.extend(&mut set, assignment, order)?;
        Ok(set)
    }

    /// Keeps the first `from_index` plans of `existing` and replans the rest
    /// of its order from scratch.
    pub fn plan_suffix(
        &mut self,
        existing: &PlanSet,
        assignment: &Assignment,
        from_index: usize,
    ) -> Result<PlanSet, PlanError> {
        if from_index > existing.len() {
            return Err(PlanError::IndexOutOfRange {
                index: from_index,
                len: existing.len(),
            });
        }
        let mut set = existing.clone();
        set.truncate(from_index);
        self.extend(&mut set, assignment, &existing.order[from_index..])?;
        Ok(set)
    }

    /// Plans `base_order` and `shuffles` random permutations of it; keeps
    /// the best successful attempt by (total actions, makespan, order).
    ///
    /// Permutations are drawn sequentially from one seeded stream, so the
    /// attempts for `n` shuffles are a prefix of those for `n + 1`.
    pub fn best_of_shuffles(
        &mut self,
        assignment: &Assignment,
        base_order: &[RobotId],
        shuffles: usize,
        seed: u64,
    ) -> Result<PlanSet, PlanError> {
        check_permutation(assignment, base_order)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = base_order.to_vec();
        let mut best: Option<PlanSet> = None;
        let mut first_failure = None;
        for attempt in 0..=shuffles {
            if attempt > 0 {
                order.copy_from_slice(base_order);
                order.shuffle(&mut rng);
            }
            match self.plan_all(assignment, &order) {
                Ok(set) => {
                    if best.as_ref().is_none_or(|b| better(&set, b)) {
                        best = Some(set);
                    }
                }
                Err(PlanError::Failed { robot }) => {
                    first_failure.get_or_insert(robot);
                }
                Err(e) => return Err(e),
            }
        }
        best.ok_or_else(|| PlanError::Failed {
            robot: first_failure.expect("at least one attempt ran"),
        })
    }
}

fn better(candidate: &PlanSet, incumbent: &PlanSet) -> bool {
    (
        candidate.total_actions,
        candidate.makespan,
        &candidate.order,
    ) < (
        incumbent.total_actions,
        incumbent.makespan,
        &incumbent.order,
    )
}

fn check_permutation(assignment: &Assignment, order: &[RobotId]) -> Result<(), PlanError> {
    let unique: HashSet<RobotId> = order.iter().copied().collect();
    if unique.len() != order.len() || order.len() != assignment.len() {
        return Err(PlanError::InvalidOrder);
    }
    match order.iter().find(|r| assignment.task(**r).is_none()) {
        Some(&r) => Err(PlanError::UnknownRobot(r)),
        None => Ok(()),
    }
}

/// Robots by descending unconstrained route length, ties by ascending id.
pub fn longest_first_order(
    graph: &ResourceGraph,
    assignment: &Assignment,
) -> Result<Vec<RobotId>, PlanError> {
    let keyed = assignment
        .iter()
        .map(|(robot, task)| {
            Ok((
                robot,
                shortest_path(graph, robot, task.start, task.goal)?.actions,
            ))
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    Ok(sort_longest_first(keyed))
}

fn sort_longest_first(mut keyed: Vec<(RobotId, Tick)>) -> Vec<RobotId> {
    keyed.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    keyed.into_iter().map(|(r, _)| r).collect()
}
