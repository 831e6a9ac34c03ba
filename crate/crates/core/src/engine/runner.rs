use super::message::Role;
use super::transcript::{PartyOutcome, ProtocolTranscript, RunStatus, TranscriptEntry};
use super::Endpoint;
use crate::error::{Error, Result};
use crate::harness::bus::{Bus, Tap};

/// Delivery rounds before a run is declared stalled.
pub const MAX_ROUNDS: usize = 64;

/// Steps the parties over `bus` until all are terminal or the bus drains.
pub fn run_to_completion(
    parties: &mut [&mut dyn Endpoint],
    bus: &mut Bus,
) -> Result<ProtocolTranscript> {
    run_with_tap(parties, bus, None)
}

/// As [`run_to_completion`], with `tap` seeing every delivery first.
pub fn run_with_tap(
    parties: &mut [&mut dyn Endpoint],
    bus: &mut Bus,
    mut tap: Option<&mut dyn Tap>,
) -> Result<ProtocolTranscript> {
    let Some(first) = parties.first() else {
        return Err(Error::Configuration("no parties to run".into()));
    };
    let variant = first.variant();
    for role in Role::ALL {
        let n = parties.iter().filter(|p| p.role() == role).count();
        if n != 1 {
            return Err(Error::Configuration(format!(
                "need exactly one {role} party, got {n}"
            )));
        }
    }
    if parties.iter().any(|p| p.variant() != variant) {
        return Err(Error::Configuration(
            "parties disagree on the variant".into(),
        ));
    }
    parties.sort_by_key(|p| p.role());

    let mut transcript = ProtocolTranscript::new(variant);
    for p in parties.iter_mut() {
        let role = p.role();
        for (to, msg) in p.step(Vec::new()) {
            bus.send(role, to, msg);
        }
    }

    let mut status = RunStatus::Stalled;
    for _ in 0..MAX_ROUNDS {
        if bus.is_idle() {
            status = idle_status(parties);
            break;
        }
        let mut batch = bus.tick();
        if let Some(tap) = tap.as_deref_mut() {
            batch = batch.into_iter().flat_map(|e| tap.on_deliver(e)).collect();
        }
        for e in &batch {
            transcript.entries.push(TranscriptEntry {
                t: bus.now(),
                from: e.from,
                to: e.to,
                msg: e.msg.clone(),
            });
        }
        for p in parties.iter_mut() {
            let role = p.role();
            let inbox: Vec<_> = batch
                .iter()
                .filter(|e| e.to == role)
                .map(|e| (e.from, e.msg.clone()))
                .collect();
            if inbox.is_empty() {
                continue;
            }
            for (to, msg) in p.step(inbox) {
                bus.send(role, to, msg);
            }
        }
    }
    if status == RunStatus::Stalled && bus.is_idle() {
        status = idle_status(parties);
    }
    transcript.status = status;
    transcript.outcomes = parties
        .iter()
        .map(|p| PartyOutcome {
            role: p.role(),
            verdict: p.verdict(),
            checks: p.checks(),
        })
        .collect();
    Ok(transcript)
}

fn idle_status(parties: &[&mut dyn Endpoint]) -> RunStatus {
    if parties.iter().all(|p| p.verdict().is_some()) {
        RunStatus::Completed
    } else {
        RunStatus::Idle
    }
}
