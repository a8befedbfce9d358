//! Record of the merge and split operations applied during formation.
//!
//! The text form has one event per line:
//!
//! ```text
//! MERGE [1,4]|[2] -> [1,2,4]
//! SPLIT [1,2,4] -> [1]|[2,4]
//! ```

use std::fmt;

use super::MemberSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormationEvent {
    Merge { parts: Vec<MemberSet>, result: MemberSet },
    Split { source: MemberSet, parts: Vec<MemberSet> },
}

impl FormationEvent {
    /// Coalitions removed by the event.
    pub fn before(&self) -> Vec<MemberSet> {
        match self {
            FormationEvent::Merge { parts, .. } => parts.clone(),
            FormationEvent::Split { source, .. } => vec![*source],
        }
    }

    /// Coalitions created by the event.
    pub fn after(&self) -> Vec<MemberSet> {
        match self {
            FormationEvent::Merge { result, .. } => vec![*result],
            FormationEvent::Split { parts, .. } => parts.clone(),
        }
    }
}

fn join(sets: &[MemberSet]) -> String {
    sets.iter().map(ToString::to_string).collect::<Vec<_>>().join("|")
}

impl fmt::Display for FormationEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormationEvent::Merge { parts, result } => write!(f, "MERGE {} -> {}", join(parts), result),
            FormationEvent::Split { source, parts } => write!(f, "SPLIT {} -> {}", source, join(parts)),
        }
    }
}

fn parse_set(text: &str) -> Result<MemberSet> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::domain(format!("expected [ids], got `{text}`")))?;
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&id| (1..=crate::network::MAX_SUS).contains(&id))
                .ok_or_else(|| Error::domain(format!("bad node id `{t}`")))
        })
        .collect()
}

fn parse_sets(text: &str) -> Result<Vec<MemberSet>> {
    text.split('|').map(parse_set).collect()
}

impl std::str::FromStr for FormationEvent {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (kind, rest) = line
            .trim()
            .split_once(' ')
            .ok_or_else(|| Error::domain(format!("malformed trace line `{line}`")))?;
        let (lhs, rhs) = rest
            .split_once("->")
            .ok_or_else(|| Error::domain(format!("trace line without `->`: `{line}`")))?;
        match kind {
            "MERGE" => Ok(FormationEvent::Merge {
                parts: parse_sets(lhs)?,
                result: parse_set(rhs)?,
            }),
            "SPLIT" => Ok(FormationEvent::Split {
                source: parse_set(lhs)?,
                parts: parse_sets(rhs)?,
            }),
            other => Err(Error::domain(format!("unknown trace event `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormationTrace {
    pub events: Vec<FormationEvent>,
    /// Number of merge-then-split rounds executed.
    pub iterations: usize,
    pub terminated: bool,
}

impl FormationTrace {
    pub fn to_log(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn parse_log(text: &str) -> Result<Vec<FormationEvent>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect()
    }

    /// Applies `events` to `initial`, checking that every removed coalition is present.
    pub fn replay(initial: &[MemberSet], events: &[FormationEvent]) -> Result<Vec<MemberSet>> {
        let mut sets = initial.to_vec();
        for event in events {
            for gone in event.before() {
                let pos = sets
                    .iter()
                    .position(|s| *s == gone)
                    .ok_or_else(|| Error::domain(format!("replay: {gone} not in partition at `{event}`")))?;
                sets.swap_remove(pos);
            }
            sets.extend(event.after());
        }
        sets.sort_by_key(|s| s.min_id());
        Ok(sets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ids: &[usize]) -> MemberSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn text_round_trip() {
        let events = vec![
            FormationEvent::Merge {
                parts: vec![s(&[1, 4]), s(&[2])],
                result: s(&[1, 2, 4]),
            },
            FormationEvent::Split {
                source: s(&[1, 2, 4]),
                parts: vec![s(&[1]), s(&[2, 4])],
            },
        ];
        let trace = FormationTrace {
            events: events.clone(),
            iterations: 2,
            terminated: true,
        };
        let log = trace.to_log();
        assert_eq!(log, "MERGE [1,4]|[2] -> [1,2,4]\nSPLIT [1,2,4] -> [1]|[2,4]\n");
        assert_eq!(FormationTrace::parse_log(&log).unwrap(), events);
    }

    #[test]
    fn replay_applies_events() {
        let initial = vec![s(&[1]), s(&[2]), s(&[3])];
        let events = vec![
            FormationEvent::Merge {
                parts: vec![s(&[1]), s(&[3])],
                result: s(&[1, 3]),
            },
            FormationEvent::Split {
                source: s(&[1, 3]),
                parts: vec![s(&[1]), s(&[3])],
            },
            FormationEvent::Merge {
                parts: vec![s(&[2]), s(&[3])],
                result: s(&[2, 3]),
            },
        ];
        assert_eq!(FormationTrace::replay(&initial, &events).unwrap(), vec![s(&[1]), s(&[2, 3])]);
        let bad = vec![FormationEvent::Split {
            source: s(&[1, 2]),
            parts: vec![s(&[1]), s(&[2])],
        }];
        assert!(FormationTrace::replay(&initial, &bad).is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!("JOIN [1] -> [1]".parse::<FormationEvent>().is_err());
        assert!("MERGE [1]|[x] -> [1]".parse::<FormationEvent>().is_err());
        assert!("MERGE [1]".parse::<FormationEvent>().is_err());
    }
}
