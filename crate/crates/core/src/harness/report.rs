//! The scenario × variant property matrix.

use std::fmt::Write as _;

use super::scenario::{self, Scenario, ScenarioConfig, ScenarioOutcome};
use super::world::happy_path;
use super::{map_with, Execution};
use crate::engine::{Check, Role};
use crate::Variant;

/// Aggregate over all seeds of one scenario × variant cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Succeeds,
    Blocked,
    /// Some seeds succeeded and some did not.
    Mixed,
    Error,
}

impl Cell {
    pub fn label(self) -> &'static str {
        match self {
            Cell::Succeeds => "SUCCEEDS",
            Cell::Blocked => "BLOCKED",
            Cell::Mixed => "MIXED",
            Cell::Error => "ERROR",
        }
    }

    fn table_value(self) -> &'static str {
        match self {
            Cell::Succeeds => "true",
            Cell::Blocked => "false",
            Cell::Mixed => "mixed",
            Cell::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatrixRow {
    pub scenario: Scenario,
    pub variant: Variant,
    pub cell: Cell,
    pub expected: bool,
    pub outcomes: Vec<ScenarioOutcome>,
    pub errors: Vec<(u64, String)>,
}

impl MatrixRow {
    pub fn matches_expectation(&self) -> bool {
        match self.cell {
            Cell::Succeeds => self.expected,
            Cell::Blocked => !self.expected,
            Cell::Mixed | Cell::Error => false,
        }
    }

    pub fn evidence_file(&self) -> String {
        match self.outcomes.first() {
            Some(o) => o.evidence_file(),
            None => "-".into(),
        }
    }
}

/// Which role runs which check on an honest run, per variant.
#[derive(Clone, Debug)]
pub struct CheckRow {
    pub variant: Variant,
    pub checks: Vec<(Role, Vec<Check>)>,
}

#[derive(Clone, Debug)]
pub struct MatrixReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<MatrixRow>,
    pub checks: Vec<CheckRow>,
}

pub fn run_matrix(seeds: &[u64]) -> MatrixReport {
    run_matrix_with(seeds, Execution::default())
}

pub fn run_matrix_with(seeds: &[u64], exec: Execution) -> MatrixReport {
    let cfg = ScenarioConfig::default();
    let jobs: Vec<(Scenario, Variant, u64)> = Scenario::ALL
        .into_iter()
        .flat_map(|sc| {
            Variant::ALL
                .into_iter()
                .flat_map(move |v| seeds.iter().map(move |s| (sc, v, *s)))
        })
        .collect();
    let results = map_with(jobs, exec, |(sc, v, s)| {
        (sc, v, s, scenario::run(sc, v, s, &cfg))
    });

    let mut rows: Vec<MatrixRow> = Vec::new();
    for (sc, v, seed, res) in results {
        if rows
            .last()
            .is_none_or(|r| r.scenario != sc || r.variant != v)
        {
            rows.push(MatrixRow {
                scenario: sc,
                variant: v,
                cell: Cell::Error,
                expected: sc.expected_success(v),
                outcomes: Vec::new(),
                errors: Vec::new(),
            });
        }
        let row = rows.last_mut().expect("row pushed above");
        match res {
            Ok(o) => row.outcomes.push(o),
            Err(e) => row.errors.push((seed, e.to_string())),
        }
    }
    for row in &mut rows {
        row.cell = if !row.errors.is_empty() || row.outcomes.is_empty() {
            Cell::Error
        } else if row.outcomes.iter().all(|o| o.attack_succeeded) {
            Cell::Succeeds
        } else if row.outcomes.iter().all(|o| !o.attack_succeeded) {
            Cell::Blocked
        } else {
            Cell::Mixed
        };
    }

    let check_seed = seeds.first().copied().unwrap_or(0);
    let checks = map_with(Variant::ALL.to_vec(), exec, |v| CheckRow {
        variant: v,
        checks: match happy_path(v, check_seed) {
            Ok(r) => r
                .transcript
                .outcomes
                .iter()
                .map(|o| (o.role, o.checks.clone()))
                .collect(),
            Err(_) => Vec::new(),
        },
    });

    MatrixReport {
        seeds: seeds.to_vec(),
        rows,
        checks,
    }
}

impl MatrixReport {
    pub fn row(&self, scenario: Scenario, variant: Variant) -> Option<&MatrixRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.variant == variant)
    }

    /// Cells that are missing from the report.
    pub fn missing(&self) -> Vec<(Scenario, Variant)> {
        Scenario::ALL
            .into_iter()
            .flat_map(|sc| Variant::ALL.into_iter().map(move |v| (sc, v)))
            .filter(|(sc, v)| self.row(*sc, *v).is_none())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }

    pub fn violations(&self) -> Vec<&MatrixRow> {
        self.rows
            .iter()
            .filter(|r| !r.matches_expectation())
            .collect()
    }

    /// Human-readable report: the attack grid, then the check grid.
    pub fn to_text(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = format!("# akasim attack matrix\n# seeds {}\n\n", seeds.join(","));
        let width = Scenario::ALL
            .iter()
            .map(|s| s.name().len())
            .max()
            .unwrap_or(0);
        let _ = write!(out, "{:width$}", "scenario");
        for v in Variant::ALL {
            let _ = write!(out, "  {:>19}", v.name());
        }
        out.push('\n');
        for sc in Scenario::ALL {
            let _ = write!(out, "{:width$}", sc.name());
            for v in Variant::ALL {
                let label = self.row(sc, v).map_or("MISSING", |r| r.cell.label());
                let _ = write!(out, "  {label:>19}");
            }
            out.push('\n');
        }

        out.push_str("\n# checks on an honest run\n");
        for row in &self.checks {
            let _ = write!(out, "{:19}", row.variant.name());
            for (role, checks) in &row.checks {
                let names: Vec<&str> = checks.iter().map(|c| c.name()).collect();
                let list = if names.is_empty() {
                    "-".to_string()
                } else {
                    names.join(",")
                };
                let _ = write!(out, "  {role}={list}");
            }
            out.push('\n');
        }

        let violations = self.violations();
        let missing = self.missing();
        if violations.is_empty() && missing.is_empty() {
            out.push_str("\n# all cells match expectation\n");
        } else {
            out.push_str("\n# violations\n");
            out.push_str(&self.diff());
        }
        out
    }

    /// Machine-readable table: `scenario variant attack_succeeded evidence_file`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("scenario variant attack_succeeded evidence_file\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                r.scenario,
                r.variant,
                r.cell.table_value(),
                r.evidence_file()
            );
        }
        out
    }

    /// One line per cell that disagrees with expectation.
    pub fn diff(&self) -> String {
        let mut out = String::new();
        for (sc, v) in self.missing() {
            let _ = writeln!(out, "- {sc} {v}: missing");
        }
        for r in self.violations() {
            let want = if r.expected {
                Cell::Succeeds
            } else {
                Cell::Blocked
            };
            let _ = writeln!(
                out,
                "- {} {}: expected {} got {}",
                r.scenario,
                r.variant,
                want.label(),
                r.cell.label()
            );
            for (seed, e) in &r.errors {
                let _ = writeln!(out, "    seed {seed}: {e}");
            }
            for o in r
                .outcomes
                .iter()
                .filter(|o| o.attack_succeeded != r.expected)
            {
                let _ = writeln!(out, "    seed {}: {}", o.seed, o.detail);
            }
        }
        out
    }

    /// Every outcome, for writing evidence files.
    pub fn outcomes(&self) -> impl Iterator<Item = &ScenarioOutcome> {
        self.rows.iter().flat_map(|r| r.outcomes.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_complete_and_matches() {
        let r = run_matrix(&[7]);
        assert!(r.is_complete());
        assert!(r.violations().is_empty(), "{}", r.diff());
        assert_eq!(r.rows.len(), 64);
        assert_eq!(
            r.row(Scenario::FalseBaseStation, Variant::Gsm)
                .unwrap()
                .cell,
            Cell::Succeeds
        );
        assert_eq!(
            r.row(Scenario::FalseBaseStation, Variant::Umts)
                .unwrap()
                .cell,
            Cell::Blocked
        );
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = run_matrix_with(&[3, 4], Execution::Sequential);
        let b = run_matrix_with(&[3, 4], Execution::Parallel);
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.to_table(), b.to_table());
    }
}
