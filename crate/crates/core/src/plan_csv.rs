//! CSV dump of route plans: `robot,seq,resource,entry,exit`, with `inf` for
//! the open end of a final visit. A joint plan dump is preceded by one
//! comment line carrying the priority order, total actions and makespan.

use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::graph::ResourceId;
use crate::planner::PlanSet;
use crate::reservation::TimeInterval;
use crate::router::{RoutePlan, Visit};
use crate::{RobotId, Tick, INFINITY};

pub const HEADER: [&str; 5] = ["robot", "seq", "resource", "entry", "exit"];

#[derive(Debug, Error)]
pub enum PlanCsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

/// Plans read back from a dump, in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanDump {
    pub order: Vec<RobotId>,
    pub total_actions: Option<u64>,
    pub makespan: Option<Tick>,
    pub plans: Vec<RoutePlan>,
}

fn tick_field(t: Tick) -> String {
    if t == INFINITY {
        "inf".to_string()
    } else {
        t.to_string()
    }
}

pub fn write_plans<'a, W: Write>(
    plans: impl IntoIterator<Item = &'a RoutePlan>,
    out: W,
) -> Result<(), PlanCsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for plan in plans {
        for (seq, v) in plan.visits.iter().enumerate() {
            w.write_record([
                plan.robot.0.to_string(),
                seq.to_string(),
                v.resource.0.to_string(),
                tick_field(v.interval.start),
                tick_field(v.interval.end),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_planset<W: Write>(set: &PlanSet, mut out: W) -> Result<(), PlanCsvError> {
    let order: Vec<String> = set.order().iter().map(|r| r.0.to_string()).collect();
    writeln!(
        out,
        "# order={}; total_actions={}; makespan={}",
        order.join(" "),
        set.total_actions(),
        set.makespan()
    )?;
    write_plans(set.plans(), out)
}

pub fn read_plans<R: Read>(input: R) -> Result<PlanDump, PlanCsvError> {
    let mut reader = BufReader::new(input);
    let mut dump = PlanDump {
        order: Vec::new(),
        total_actions: None,
        makespan: None,
        plans: Vec::new(),
    };
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let body: Box<dyn Read> = if let Some(meta) = first.trim().strip_prefix('#') {
        parse_meta(meta, &mut dump)?;
        Box::new(reader)
    } else {
        Box::new(std::io::Cursor::new(first.into_bytes()).chain(reader))
    };

    let mut rows = csv::Reader::from_reader(body);
    let mut visits: Vec<Visit> = Vec::new();
    let mut current: Option<RobotId> = None;
    for (i, record) in rows.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let bad = |message: String| PlanCsvError::Format { line, message };
        if record.len() != HEADER.len() {
            return Err(bad(format!("expected {} fields", HEADER.len())));
        }
        let int = |k: usize| -> Result<u64, PlanCsvError> {
            match record[k].trim() {
                "inf" => Ok(INFINITY),
                s => s
                    .parse()
                    .map_err(|_| bad(format!("bad {} `{s}`", HEADER[k]))),
            }
        };
        let robot = RobotId(int(0)? as u32);
        let seq = int(1)? as usize;
        if current != Some(robot) {
            if let Some(r) = current.take() {
                dump.plans
                    .push(RoutePlan::from_visits(r, std::mem::take(&mut visits)));
            }
            current = Some(robot);
        }
        if seq != visits.len() {
            return Err(bad(format!("visit {seq} of robot {robot} out of sequence")));
        }
        let (start, end) = (int(3)?, int(4)?);
        if start >= end {
            return Err(bad(format!("empty interval [{start}, {end})")));
        }
        visits.push(Visit {
            resource: ResourceId(int(2)? as u32),
            interval: TimeInterval { start, end },
        });
    }
    if let Some(r) = current {
        dump.plans.push(RoutePlan::from_visits(r, visits));
    }
    if dump.order.is_empty() {
        dump.order = dump.plans.iter().map(|p| p.robot).collect();
    }
    Ok(dump)
}

fn parse_meta(meta: &str, dump: &mut PlanDump) -> Result<(), PlanCsvError> {
    let bad = |message: String| PlanCsvError::Format { line: 1, message };
    for part in meta.split(';') {
        let Some((key, value)) = part.split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "order" => {
                dump.order = value
                    .split_whitespace()
                    .map(|v| {
                        v.parse()
                            .map(RobotId)
                            .map_err(|_| bad(format!("bad robot `{v}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "total_actions" => {
                dump.total_actions =
                    Some(value.parse().map_err(|_| bad("bad total_actions".into()))?)
            }
            "makespan" => {
                dump.makespan = Some(value.parse().map_err(|_| bad("bad makespan".into()))?)
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_resource_graph, Cell};
    use crate::planner::{Assignment, Carp, Task};

    #[test]
    fn planset_dump_round_trip() {
        let cells = [Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)];
        let g = build_resource_graph(&cells, &[(cells[0], cells[1]), (cells[1], cells[2])], 1, 1)
            .unwrap();
        let a = Assignment::from_tasks(&[
            Task {
                start: ResourceId(0),
                goal: ResourceId(2),
            },
            Task {
                start: ResourceId(2),
                goal: ResourceId(0),
            },
        ])
        .unwrap();
        let set = Carp::new(&g)
            .plan_all(&a, &[RobotId(1), RobotId(0)])
            .unwrap();
        let mut buf = Vec::new();
        write_planset(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "# order=1 0; total_actions=9; makespan=5\nrobot,seq,resource,entry,exit\n"
        ));
        assert!(text.lines().any(|l| l.ends_with(",inf")));

        let dump = read_plans(buf.as_slice()).unwrap();
        assert_eq!(dump.order, set.order());
        assert_eq!(dump.total_actions, Some(9));
        assert_eq!(dump.makespan, Some(5));
        assert_eq!(dump.plans, set.plans());

        let mut bare = Vec::new();
        write_plans(set.plans(), &mut bare).unwrap();
        let dump = read_plans(bare.as_slice()).unwrap();
        assert_eq!(dump.plans, set.plans());
        assert_eq!(dump.total_actions, None);
    }

    #[test]
    fn rejects_malformed_rows() {
        let text = "robot,seq,resource,entry,exit\n0,0,1,0,1\n0,2,3,1,inf\n";
        assert!(matches!(
            read_plans(text.as_bytes()),
            Err(PlanCsvError::Format { line: 3, .. })
        ));
        let text = "robot,seq,resource,entry,exit\n0,0,1,4,4\n";
        assert!(read_plans(text.as_bytes()).is_err());
    }
}
