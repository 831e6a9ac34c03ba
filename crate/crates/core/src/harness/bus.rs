//! Logical-time message bus with an optional seeded fault schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::engine::{AkaMessage, Link, Role};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub seq: u64,
    pub from: Role,
    pub to: Role,
    pub msg: AkaMessage,
    pub sent_at: u64,
    pub deliver_at: u64,
}

impl Envelope {
    pub fn link(&self) -> Link {
        Link::between(self.from, self.to)
    }
}

/// Per-message fault probabilities. All zero means FIFO and lossless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaultSchedule {
    pub drop: f64,
    pub duplicate: f64,
    pub delay: f64,
    /// Upper bound on extra ticks a delayed message waits.
    pub max_delay: u64,
    pub seed: u64,
}

impl FaultSchedule {
    pub fn none() -> Self {
        Self {
            drop: 0.0,
            duplicate: 0.0,
            delay: 0.0,
            max_delay: 0,
            seed: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.drop == 0.0 && self.duplicate == 0.0 && (self.delay == 0.0 || self.max_delay == 0)
    }
}

impl Default for FaultSchedule {
    fn default() -> Self {
        Self::none()
    }
}

/// Sees every message as it is delivered and may drop, alter or add to it.
pub trait Tap {
    fn on_deliver(&mut self, env: Envelope) -> Vec<Envelope>;
}

#[derive(Debug)]
pub struct Bus {
    pending: Vec<Envelope>,
    now: u64,
    next_seq: u64,
    faults: FaultSchedule,
    rng: ChaCha20Rng,
    dropped: usize,
}

impl Bus {
    pub fn new() -> Self {
        Self::with_faults(FaultSchedule::none())
    }

    pub fn with_faults(faults: FaultSchedule) -> Self {
        Self {
            pending: Vec::new(),
            now: 0,
            next_seq: 0,
            rng: ChaCha20Rng::seed_from_u64(faults.seed),
            faults,
            dropped: 0,
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.gen_bool(p.min(1.0))
    }

    pub fn send(&mut self, from: Role, to: Role, msg: AkaMessage) {
        if self.chance(self.faults.drop) {
            self.dropped += 1;
            return;
        }
        let copies = if self.chance(self.faults.duplicate) {
            2
        } else {
            1
        };
        for _ in 0..copies {
            let mut deliver_at = self.now + 1;
            if self.faults.max_delay > 0 && self.chance(self.faults.delay) {
                deliver_at += self.rng.gen_range(1..=self.faults.max_delay);
            }
            self.enqueue(Envelope {
                seq: 0,
                from,
                to,
                msg: msg.clone(),
                sent_at: self.now,
                deliver_at,
            });
        }
    }

    /// Queues an already-built envelope, e.g. one injected by a tap.
    pub fn enqueue(&mut self, mut env: Envelope) {
        env.seq = self.next_seq;
        self.next_seq += 1;
        env.deliver_at = env.deliver_at.max(self.now + 1);
        self.pending.push(env);
    }

    /// Advances one tick and returns everything due, ordered by due time then send order.
    pub fn tick(&mut self) -> Vec<Envelope> {
        self.now += 1;
        let now = self.now;
        let (mut due, rest): (Vec<_>, Vec<_>) =
            self.pending.drain(..).partition(|e| e.deliver_at <= now);
        self.pending = rest;
        due.sort_by_key(|e| (e.deliver_at, e.seq));
        due
    }
}

impl Default for Bus {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn msg(i: u8) -> AkaMessage {
        AkaMessage::AuthResponse { res: vec![i] }
    }

    proptest! {
        #[test]
        fn empty_schedule_is_fifo_and_lossless(n in 1usize..40) {
            let mut bus = Bus::new();
            for i in 0..n {
                bus.send(Role::Ue, Role::Serving, msg(i as u8));
            }
            let got: Vec<_> = bus.tick().into_iter().map(|e| e.msg).collect();
            prop_assert_eq!(got, (0..n).map(|i| msg(i as u8)).collect::<Vec<_>>());
            prop_assert!(bus.is_idle());
        }
    }

    #[test]
    fn faults_are_seeded() {
        let run = |seed| {
            let mut bus = Bus::with_faults(FaultSchedule {
                drop: 0.3,
                duplicate: 0.3,
                delay: 0.3,
                max_delay: 3,
                seed,
            });
            for i in 0..50 {
                bus.send(Role::Ue, Role::Serving, msg(i));
            }
            let mut out = Vec::new();
            while !bus.is_idle() {
                out.extend(bus.tick().into_iter().map(|e| (e.deliver_at, e.msg)));
            }
            (out, bus.dropped())
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
        let (out, dropped) = run(5);
        assert!(dropped > 0 && out.len() != 50);
    }
}
