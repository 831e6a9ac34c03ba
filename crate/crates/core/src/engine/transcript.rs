//! Ordered record of one run, with a line-based text form.
//!
//! ```text
//! # akasim transcript
//! variant <variant>
//! status <completed|idle|stalled>
//! <t> <sender> <receiver> <kind> <hexpayload|->
//! outcome <role> <verdict|pending> <checks_csv|->
//! ```

use std::fmt;

use super::message::{AkaMessage, Role};
use super::party::{Check, Verdict};
use super::Endpoint;
use crate::error::{Error, Result};
use crate::Variant;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub t: u64,
    pub from: Role,
    pub to: Role,
    pub msg: AkaMessage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyOutcome {
    pub role: Role,
    pub verdict: Option<Verdict>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Every party terminated and the bus drained.
    Completed,
    /// The bus drained with some party still waiting (e.g. a dropped message).
    Idle,
    /// Still exchanging messages after the round limit.
    Stalled,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Idle => "idle",
            RunStatus::Stalled => "stalled",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        [RunStatus::Completed, RunStatus::Idle, RunStatus::Stalled]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::MalformedInput(format!("unknown status '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolTranscript {
    pub variant: Variant,
    pub status: RunStatus,
    pub entries: Vec<TranscriptEntry>,
    pub outcomes: Vec<PartyOutcome>,
}

impl ProtocolTranscript {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            status: RunStatus::Completed,
            entries: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn outcome(&self, role: Role) -> Option<&PartyOutcome> {
        self.outcomes.iter().find(|o| o.role == role)
    }

    pub fn verdict(&self, role: Role) -> Option<Verdict> {
        self.outcome(role).and_then(|o| o.verdict)
    }

    pub fn verdicts(&self) -> Vec<(Role, Option<Verdict>)> {
        self.outcomes.iter().map(|o| (o.role, o.verdict)).collect()
    }

    /// Entries whose sender or receiver is `role`.
    pub fn involving(&self, role: Role) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries
            .iter()
            .filter(move |e| e.from == role || e.to == role)
    }

    /// Every message payload concatenated, for leak scans.
    pub fn wire_bytes(&self) -> Vec<u8> {
        self.entries.iter().flat_map(|e| e.msg.payload()).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut variant = None;
        let mut status = RunStatus::Completed;
        let mut entries = Vec::new();
        let mut outcomes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |reason: String| Error::Parse {
                line: idx + 1,
                reason,
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "variant" if f.len() == 2 => {
                    variant = Some(f[1].parse::<Variant>().map_err(|e| perr(e.to_string()))?)
                }
                "status" if f.len() == 2 => {
                    status = RunStatus::parse(f[1]).map_err(|e| perr(e.to_string()))?
                }
                "outcome" if f.len() == 4 => {
                    let role = Role::parse(f[1]).map_err(|e| perr(e.to_string()))?;
                    let verdict = match f[2] {
                        "pending" => None,
                        v => Some(Verdict::parse(v).map_err(|e| perr(e.to_string()))?),
                    };
                    let checks = match f[3] {
                        "-" => Vec::new(),
                        csv => csv
                            .split(',')
                            .map(Check::parse)
                            .collect::<Result<_>>()
                            .map_err(|e| perr(e.to_string()))?,
                    };
                    outcomes.push(PartyOutcome {
                        role,
                        verdict,
                        checks,
                    });
                }
                _ if f.len() == 5 => {
                    let t = f[0]
                        .parse()
                        .map_err(|_| perr(format!("bad timestamp '{}'", f[0])))?;
                    let from = Role::parse(f[1]).map_err(|e| perr(e.to_string()))?;
                    let to = Role::parse(f[2]).map_err(|e| perr(e.to_string()))?;
                    let payload = if f[4] == "-" {
                        Vec::new()
                    } else {
                        hex::decode(f[4]).map_err(|e| perr(format!("bad payload hex: {e}")))?
                    };
                    let msg =
                        AkaMessage::decode(f[3], &payload).map_err(|e| perr(e.to_string()))?;
                    entries.push(TranscriptEntry { t, from, to, msg });
                }
                _ => return Err(perr(format!("unrecognized line '{line}'"))),
            }
        }
        let variant = variant.ok_or_else(|| Error::Parse {
            line: 0,
            reason: "missing variant line".into(),
        })?;
        Ok(Self {
            variant,
            status,
            entries,
            outcomes,
        })
    }

    /// Re-delivers every recorded message, one at a time and in order, to fresh
    /// parties, discarding what they send. Returns the verdicts they reach.
    pub fn replay(&self, parties: &mut [&mut dyn Endpoint]) -> Vec<(Role, Option<Verdict>)> {
        for p in parties.iter_mut() {
            p.step(Vec::new());
        }
        for e in &self.entries {
            if let Some(p) = parties.iter_mut().find(|p| p.role() == e.to) {
                p.step(vec![(e.from, e.msg.clone())]);
            }
        }
        let mut out: Vec<_> = parties.iter().map(|p| (p.role(), p.verdict())).collect();
        out.sort_by_key(|(r, _)| *r);
        out
    }
}

impl fmt::Display for ProtocolTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# akasim transcript")?;
        writeln!(f, "variant {}", self.variant)?;
        writeln!(f, "status {}", self.status.name())?;
        for e in &self.entries {
            let p = e.msg.payload();
            let hex = if p.is_empty() {
                "-".to_string()
            } else {
                hex::encode(p)
            };
            writeln!(f, "{} {} {} {} {}", e.t, e.from, e.to, e.msg.kind(), hex)?;
        }
        for o in &self.outcomes {
            let v = o.verdict.map_or("pending", Verdict::name);
            let checks: Vec<&str> = o.checks.iter().map(|c| c.name()).collect();
            let checks = if checks.is_empty() {
                "-".to_string()
            } else {
                checks.join(",")
            };
            writeln!(f, "outcome {} {} {}", o.role, v, checks)?;
        }
        Ok(())
    }
}
