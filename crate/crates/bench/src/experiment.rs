//! Sequential-addition experiments: every variant receives the robots of an
//! assignment one at a time and must produce a joint plan after each one.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;
use warehouse_routing::graph::ResourceDefaults;
use warehouse_routing::neighborhood::TraceRecord;
use warehouse_routing::scenario::ScenarioError;
use warehouse_routing::{
    longest_first_order, plan_update, Assignment, Carp, PlanError, PlanSet, ResourceGraph,
    ScenarioSuite, UpdateError, UpdateParams,
};

use crate::validate::validate_planset;

/// Permutations tried per round by `Proposed_M` for `M` of 7 and up unless
/// a budget is given explicitly.
pub const DEFAULT_SAMPLED_BUDGET: usize = 150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// One pass in insertion order.
    Carp,
    /// Insertion order plus this many random orders; best one kept.
    CarpShuffled(usize),
    /// Longest unconstrained route first.
    LongestFirst,
    /// Neighborhood replanning with at most `m` robots per neighborhood.
    Proposed { m: usize, budget: Option<usize> },
}

impl Variant {
    /// Permutations per round, `None` when all are tried.
    pub fn permutation_budget(&self) -> Option<usize> {
        match *self {
            Variant::Proposed {
                budget: Some(b), ..
            } => Some(b),
            Variant::Proposed { m, budget: None } if m >= 7 => Some(DEFAULT_SAMPLED_BUDGET),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Carp => write!(f, "CARP"),
            Variant::CarpShuffled(n) => write!(f, "CARP{n}"),
            Variant::LongestFirst => write!(f, "LF"),
            Variant::Proposed { m, budget: None } => write!(f, "Proposed_{m}"),
            Variant::Proposed { m, budget: Some(b) } => write!(f, "Proposed_{m}@{b}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error(
    "unknown variant `{0}` (expected CARP, CARP<n>, LF, Proposed_<m> or Proposed_<m>@<budget>)"
)]
pub struct ParseVariantError(String);

impl FromStr for Variant {
    type Err = ParseVariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseVariantError(s.to_string());
        let s = s.trim();
        if s == "CARP" {
            return Ok(Variant::Carp);
        }
        if s == "LF" {
            return Ok(Variant::LongestFirst);
        }
        if let Some(n) = s.strip_prefix("CARP") {
            return n.parse().map(Variant::CarpShuffled).map_err(|_| bad());
        }
        let rest = s.strip_prefix("Proposed_").ok_or_else(bad)?;
        let (m, budget) = match rest.split_once('@') {
            Some((m, b)) => (m, Some(b.parse::<usize>().map_err(|_| bad())?)),
            None => (rest, None),
        };
        let m: usize = m.parse().map_err(|_| bad())?;
        if m == 0 || budget == Some(0) {
            return Err(bad());
        }
        Ok(Variant::Proposed { m, budget })
    }
}

/// Parses a comma-separated variant list.
pub fn parse_variants(list: &str) -> Result<Vec<Variant>, ParseVariantError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Robot `robot` (0-based, also the addition index) could not be added.
    Fail {
        robot: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub map: usize,
    pub assignment: usize,
    pub variant: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub total_actions: Option<u64>,
    pub makespan: Option<u64>,
    /// Wall time of each addition in milliseconds, including a failed last one.
    pub times_ms: Vec<f64>,
    pub astar_calls: u64,
    /// Validator findings summed over every intermediate joint plan.
    pub violations: u64,
    /// Additions rescued by the CARP100 fallback.
    pub fallbacks: u32,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub record: RunRecord,
    /// Final joint plan when `keep_plans` was requested and the run succeeded.
    pub plans: Option<PlanSet>,
    /// `(addition index, record)` from every plan update, when tracing.
    pub trace: Vec<(usize, TraceRecord)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    pub fleet: usize,
    pub seeds: Vec<u64>,
    /// Map indices to run; all when `None`.
    pub maps: Option<Vec<usize>>,
    /// Only the first this many assignments.
    pub assignments: Option<usize>,
    /// When a Proposed addition fails, replan everyone with CARP100.
    pub fallback: bool,
    pub parallel: bool,
    pub keep_plans: bool,
    pub trace: bool,
}

impl ExperimentOptions {
    pub fn new(fleet: usize) -> Self {
        Self {
            fleet,
            seeds: vec![0],
            maps: None,
            assignments: None,
            fallback: false,
            parallel: true,
            keep_plans: false,
            trace: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("fleet of {fleet} exceeds the suite's {robots} robots")]
    FleetTooLarge { fleet: usize, robots: usize },
    #[error("map {0} is not in the suite")]
    UnknownMap(usize),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Graph(#[from] warehouse_routing::graph::GraphError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("plan update: {0}")]
    Update(UpdateError),
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for the addition of the `k`-th robot in one cell. Shared by all
/// variants so that CARP10's shuffles are the first ten of CARP100's.
pub fn step_seed(seed: u64, map: usize, assignment: usize, k: usize) -> u64 {
    splitmix(splitmix(splitmix(seed ^ map as u64) ^ assignment as u64) ^ k as u64)
}

/// Runs one variant on one assignment, adding `fleet.len()` robots in
/// id order.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    graph: &ResourceGraph,
    fleet: &Assignment,
    variant: Variant,
    seed: u64,
    map: usize,
    assignment: usize,
    fallback: bool,
    keep_plans: bool,
    trace: bool,
) -> Result<CellResult, ExperimentError> {
    let robots = fleet.robots();
    let mut record = RunRecord {
        map,
        assignment,
        variant: variant.to_string(),
        seed,
        outcome: Outcome::Success,
        total_actions: None,
        makespan: None,
        times_ms: Vec::with_capacity(robots.len()),
        astar_calls: 0,
        violations: 0,
        fallbacks: 0,
    };
    let mut traces = Vec::new();
    let mut current = PlanSet::empty(graph);

    for k in 1..=robots.len() {
        let added = robots[k - 1];
        let tasks = fleet.restrict(&robots[..k])?;
        let step = step_seed(seed, map, assignment, k);
        let clock = Instant::now();
        let mut carp = Carp::new(graph);
        let result = match variant {
            Variant::Carp => carp.plan_all(&tasks, &robots[..k]),
            Variant::CarpShuffled(n) => carp.best_of_shuffles(&tasks, &robots[..k], n, step),
            Variant::LongestFirst => {
                let order = longest_first_order(graph, &tasks)?;
                carp.plan_all(&tasks, &order)
            }
            Variant::Proposed { m, .. } => {
                let mut params = match variant.permutation_budget() {
                    Some(b) => UpdateParams::sampled(m, b, step),
                    None => UpdateParams::exhaustive(m),
                };
                params.trace = trace;
                let task = tasks.task(added).expect("restricted to the added robot");
                match plan_update(graph, &current, added, task, &params) {
                    Ok(outcome) => {
                        record.astar_calls += outcome.astar_calls;
                        traces.extend(outcome.trace.into_iter().map(|t| (k, t)));
                        Ok(outcome.plans)
                    }
                    Err(UpdateError::NoFeasibleCandidate { robot }) => {
                        if fallback {
                            let rescued = carp.best_of_shuffles(&tasks, &robots[..k], 100, step);
                            if rescued.is_ok() {
                                record.fallbacks += 1;
                            }
                            rescued
                        } else {
                            Err(PlanError::Failed { robot })
                        }
                    }
                    Err(e) => return Err(ExperimentError::Update(e)),
                }
            }
        };
        record.times_ms.push(clock.elapsed().as_secs_f64() * 1e3);
        record.astar_calls += carp.astar_calls();
        match result {
            Ok(set) => {
                record.violations += validate_planset(graph, &set).len() as u64;
                current = set;
            }
            Err(PlanError::Failed { .. }) => {
                record.outcome = Outcome::Fail { robot: k - 1 };
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let plans = if record.succeeded() {
        record.total_actions = Some(current.total_actions());
        record.makespan = Some(current.makespan());
        keep_plans.then_some(current)
    } else {
        None
    };
    Ok(CellResult {
        record,
        plans,
        trace: traces,
    })
}

/// Every (map, assignment, variant, seed) cell of the suite, ordered by
/// map, assignment, variant position, then seed.
pub fn run_experiment(
    suite: &ScenarioSuite,
    variants: &[Variant],
    options: &ExperimentOptions,
) -> Result<Vec<CellResult>, ExperimentError> {
    if options.fleet > suite.robots {
        return Err(ExperimentError::FleetTooLarge {
            fleet: options.fleet,
            robots: suite.robots,
        });
    }
    let map_ids: Vec<usize> = match &options.maps {
        Some(list) => list.clone(),
        None => (0..suite.family.maps.len()).collect(),
    };
    let mut graphs = Vec::with_capacity(map_ids.len());
    for &m in &map_ids {
        if m >= suite.family.maps.len() {
            return Err(ExperimentError::UnknownMap(m));
        }
        graphs.push(suite.family.graph(m, ResourceDefaults::default())?);
    }
    let assignment_count = options
        .assignments
        .unwrap_or(suite.assignments.len())
        .min(suite.assignments.len());

    let mut cells = Vec::new();
    for (gi, &m) in map_ids.iter().enumerate() {
        for a in 0..assignment_count {
            let fleet = suite.assignments[a].to_assignment(&graphs[gi], Some(options.fleet))?;
            for &variant in variants {
                for &seed in &options.seeds {
                    cells.push((gi, m, a, fleet.clone(), variant, seed));
                }
            }
        }
    }
    let run =
        |(gi, m, a, fleet, variant, seed): &(usize, usize, usize, Assignment, Variant, u64)| {
            run_cell(
                &graphs[*gi],
                fleet,
                *variant,
                *seed,
                *m,
                *a,
                options.fallback,
                options.keep_plans,
                options.trace,
            )
        };
    if options.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}

/// All maps and assignments of `suite` with seed 0 and no extras.
pub fn run_experiment_sequential(
    suite: &ScenarioSuite,
    variants: &[Variant],
    fleet_size: usize,
) -> Result<Vec<RunRecord>, ExperimentError> {
    Ok(
        run_experiment(suite, variants, &ExperimentOptions::new(fleet_size))?
            .into_iter()
            .map(|c| c.record)
            .collect(),
    )
}

pub const RESULTS_HEADER: [&str; 12] = [
    "map",
    "assignment",
    "variant",
    "seed",
    "outcome",
    "failed_robot",
    "total_actions",
    "makespan",
    "astar_calls",
    "violations",
    "fallbacks",
    "times_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results<W: Write>(records: &[RunRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        let (outcome, failed) = match r.outcome {
            Outcome::Success => ("success", None),
            Outcome::Fail { robot } => ("fail", Some(robot)),
        };
        let times: Vec<String> = r.times_ms.iter().map(|t| format!("{t:.4}")).collect();
        w.write_record([
            r.map.to_string(),
            r.assignment.to_string(),
            r.variant.clone(),
            r.seed.to_string(),
            outcome.to_string(),
            opt(failed),
            opt(r.total_actions),
            opt(r.makespan),
            r.astar_calls.to_string(),
            r.violations.to_string(),
            r.fallbacks.to_string(),
            times.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("results row {row}: {message}")]
    Format { row: usize, message: String },
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<RunRecord>, ResultsError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |message: String| ResultsError::Format {
            row: i + 1,
            message,
        };
        if row.len() != RESULTS_HEADER.len() {
            return Err(bad(format!("expected {} fields", RESULTS_HEADER.len())));
        }
        fn num<T: FromStr>(s: &str) -> Option<T> {
            s.trim().parse().ok()
        }
        let field = |k: usize| -> Result<u64, ResultsError> {
            num(&row[k]).ok_or_else(|| bad(format!("bad {} `{}`", RESULTS_HEADER[k], &row[k])))
        };
        let optional = |k: usize| -> Result<Option<u64>, ResultsError> {
            if row[k].trim().is_empty() {
                Ok(None)
            } else {
                field(k).map(Some)
            }
        };
        let outcome = match &row[4] {
            "success" => Outcome::Success,
            "fail" => Outcome::Fail {
                robot: field(5)? as usize,
            },
            other => return Err(bad(format!("bad outcome `{other}`"))),
        };
        let times_ms = row[11]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| num::<f64>(s).ok_or_else(|| bad(format!("bad time `{s}`"))))
            .collect::<Result<_, _>>()?;
        records.push(RunRecord {
            map: field(0)? as usize,
            assignment: field(1)? as usize,
            variant: row[2].to_string(),
            seed: field(3)?,
            outcome,
            total_actions: optional(6)?,
            makespan: optional(7)?,
            times_ms,
            astar_calls: field(8)?,
            violations: field(9)?,
            fallbacks: field(10)? as u32,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for name in [
            "CARP",
            "CARP10",
            "CARP100",
            "LF",
            "Proposed_4",
            "Proposed_10@40",
        ] {
            assert_eq!(name.parse::<Variant>().unwrap().to_string(), name);
        }
        assert_eq!(
            "Proposed_4"
                .parse::<Variant>()
                .unwrap()
                .permutation_budget(),
            None
        );
        assert_eq!(
            "Proposed_10"
                .parse::<Variant>()
                .unwrap()
                .permutation_budget(),
            Some(DEFAULT_SAMPLED_BUDGET)
        );
        for bad in [
            "",
            "carp",
            "CARPx",
            "Proposed_0",
            "Proposed_",
            "Proposed_3@0",
            "LF2",
        ] {
            assert!(bad.parse::<Variant>().is_err(), "{bad}");
        }
        assert_eq!(
            parse_variants("CARP, LF").unwrap(),
            vec![Variant::Carp, Variant::LongestFirst]
        );
    }

    #[test]
    fn results_round_trip() {
        let records = vec![
            RunRecord {
                map: 2,
                assignment: 7,
                variant: "CARP10".into(),
                seed: 3,
                outcome: Outcome::Success,
                total_actions: Some(120),
                makespan: Some(30),
                times_ms: vec![0.5, 1.25],
                astar_calls: 44,
                violations: 0,
                fallbacks: 0,
            },
            RunRecord {
                map: 0,
                assignment: 1,
                variant: "Proposed_4".into(),
                seed: 3,
                outcome: Outcome::Fail { robot: 1 },
                total_actions: None,
                makespan: None,
                times_ms: vec![0.125, 2.0],
                astar_calls: 9,
                violations: 0,
                fallbacks: 1,
            },
        ];
        let mut buf = Vec::new();
        write_results(&records, &mut buf).unwrap();
        assert_eq!(read_results(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn step_seeds_differ() {
        let a = step_seed(0, 0, 0, 1);
        assert_ne!(a, step_seed(0, 0, 0, 2));
        assert_ne!(a, step_seed(0, 0, 1, 1));
        assert_ne!(a, step_seed(0, 1, 0, 1));
        assert_eq!(a, step_seed(0, 0, 0, 1));
    }
}
