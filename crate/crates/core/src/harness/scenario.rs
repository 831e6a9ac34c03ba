//! Named attack scenarios and the predicates that score them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::adversary::{
    Absent, Adversary, AdversaryKind, ChallengeReuse, Eavesdropper, FakeNetwork, RogueServing,
    Tamperer,
};
use super::bus::Bus;
use super::world::{RunRecord, Side, World, WorldConfig};
use crate::engine::{
    run_to_completion, sharing_boundary, AkaMessage, EapPayload, Endpoint, MobileIdentity,
    ProtocolTranscript, Role, Verdict,
};
use crate::error::{Error, Result};
use crate::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    FalseBaseStation,
    Replay,
    AutnTamper,
    CrossNetworkKeyReuse,
    IdentityExposure,
    HomePresenceCheck,
    AmfSeparation,
    ServingNetworkSpoof,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::FalseBaseStation,
        Scenario::Replay,
        Scenario::AutnTamper,
        Scenario::CrossNetworkKeyReuse,
        Scenario::IdentityExposure,
        Scenario::HomePresenceCheck,
        Scenario::AmfSeparation,
        Scenario::ServingNetworkSpoof,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FalseBaseStation => "false_base_station",
            Scenario::Replay => "replay",
            Scenario::AutnTamper => "autn_tamper",
            Scenario::CrossNetworkKeyReuse => "cross_network_key_reuse",
            Scenario::IdentityExposure => "identity_exposure",
            Scenario::HomePresenceCheck => "home_presence_check",
            Scenario::AmfSeparation => "amf_separation",
            Scenario::ServingNetworkSpoof => "serving_network_spoof",
        }
    }

    /// Whether the attack is expected to work against `variant`.
    pub fn expected_success(self, variant: Variant) -> bool {
        use Variant::*;
        match self {
            // No network authentication at all in 2G.
            Scenario::FalseBaseStation | Scenario::Replay | Scenario::AutnTamper => variant == Gsm,
            // Nothing network-specific goes into the keys.
            Scenario::CrossNetworkKeyReuse | Scenario::ServingNetworkSpoof => {
                matches!(variant, Gsm | Umts | EcGsmIot | EapAka)
            }
            Scenario::IdentityExposure => !variant.is_5g(),
            // Serving-terminated variants: the home network takes the serving network's word.
            Scenario::HomePresenceCheck => matches!(variant, Gsm | Umts | EcGsmIot | Eps),
            // Only EPS, EAP-AKA' and 5G look at AMF bit 0.
            Scenario::AmfSeparation => !variant.checks_amf(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::NotFound(format!("scenario '{s}'")))
    }
}

/// Knobs shared by all scenarios.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub res_len: usize,
    pub abba: Vec<u8>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            res_len: 8,
            abba: vec![0, 0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SessionVerdicts {
    pub session: String,
    pub verdicts: Vec<(Role, Option<Verdict>)>,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub variant: Variant,
    pub seed: u64,
    pub sessions: Vec<SessionVerdicts>,
    pub attack_succeeded: bool,
    pub detail: String,
    pub evidence: Vec<(String, ProtocolTranscript)>,
}

impl ScenarioOutcome {
    pub fn expected(&self) -> bool {
        self.scenario.expected_success(self.variant)
    }

    pub fn evidence_file(&self) -> String {
        format!(
            "evidence/{}-{}-seed{}.txt",
            self.scenario, self.variant, self.seed
        )
    }

    pub fn evidence_text(&self) -> String {
        let mut out = format!(
            "# scenario {} variant {} seed {}\n# attack_succeeded {}\n# {}\n",
            self.scenario, self.variant, self.seed, self.attack_succeeded, self.detail
        );
        for (label, t) in &self.evidence {
            out.push_str(&format!("## session {label}\n"));
            out.push_str(&t.to_text());
        }
        out
    }

    pub fn verdict(&self, session: &str, role: Role) -> Option<Verdict> {
        self.sessions
            .iter()
            .find(|s| s.session == session)
            .and_then(|s| s.verdicts.iter().find(|(r, _)| *r == role))
            .and_then(|(_, v)| *v)
    }
}

struct Builder {
    scenario: Scenario,
    variant: Variant,
    seed: u64,
    sessions: Vec<SessionVerdicts>,
    evidence: Vec<(String, ProtocolTranscript)>,
}

impl Builder {
    fn record(&mut self, label: &str, t: &ProtocolTranscript) {
        self.sessions.push(SessionVerdicts {
            session: label.into(),
            verdicts: t.verdicts(),
        });
        self.evidence.push((label.into(), t.clone()));
    }

    fn finish(self, attack_succeeded: bool, detail: String) -> ScenarioOutcome {
        ScenarioOutcome {
            scenario: self.scenario,
            variant: self.variant,
            seed: self.seed,
            sessions: self.sessions,
            attack_succeeded,
            detail,
            evidence: self.evidence,
        }
    }
}

fn world(variant: Variant, seed: u64, cfg: &ScenarioConfig) -> WorldConfig {
    let mut w = WorldConfig::new(variant, seed);
    w.res_len = cfg.res_len;
    w.abba = cfg.abba.clone();
    w
}

/// Fails the scenario if the adversary ended up holding key material.
fn sound(w: &World, adv: &Adversary) -> Result<()> {
    if w.root_leaks_into(&adv.material()) {
        return Err(Error::Integrity(format!(
            "{} holds root key material",
            adv.kind.name()
        )));
    }
    Ok(())
}

pub fn run_scenario(
    name: &str,
    variant: Variant,
    seed: u64,
    config: &ScenarioConfig,
) -> Result<ScenarioOutcome> {
    run(name.parse()?, variant, seed, config)
}

pub fn run(
    scenario: Scenario,
    variant: Variant,
    seed: u64,
    cfg: &ScenarioConfig,
) -> Result<ScenarioOutcome> {
    let mut b = Builder {
        scenario,
        variant,
        seed,
        sessions: Vec::new(),
        evidence: Vec::new(),
    };
    match scenario {
        Scenario::FalseBaseStation | Scenario::Replay => {
            let (kind, reuse) = if scenario == Scenario::Replay {
                (AdversaryKind::Replayer, ChallengeReuse::Verbatim)
            } else {
                (
                    AdversaryKind::FalseBaseStation,
                    ChallengeReuse::ForgeFreshSqn,
                )
            };
            let mut w = World::build(world(variant, seed, cfg))?;
            let mut ears = Eavesdropper::new();
            let first = w.run(Some(&mut ears))?;
            b.record("capture", &first.transcript);
            let mut fake = FakeNetwork::new(kind, variant, ears.0, reuse)
                .ok_or_else(|| Error::Unavailable("no challenge observed to reuse".into()))?;
            let mut ue = w.next_ue(1)?;
            let mut home = Absent {
                role: Role::Home,
                variant,
            };
            let mut parties: [&mut dyn Endpoint; 3] = [&mut ue, &mut fake, &mut home];
            let t = run_to_completion(&mut parties, &mut Bus::new())?;
            b.record("attack", &t);
            sound(&w, &fake.adversary)?;
            let ue_v = t.verdict(Role::Ue);
            Ok(b.finish(
                ue_v == Some(Verdict::Success),
                format!("UE facing the fake network: {}", verdict_name(ue_v)),
            ))
        }
        Scenario::AutnTamper => {
            let bit = ChaCha20Rng::seed_from_u64(seed ^ 0x7a3b).gen_range(0..128);
            let mut w = World::build(world(variant, seed, cfg))?;
            let mut tamper = Tamperer::new(bit);
            let r = w.run(Some(&mut tamper))?;
            b.record("tampered", &r.transcript);
            sound(&w, &tamper.adversary)?;
            let ue_v = r.transcript.verdict(Role::Ue);
            let field = if variant.has_autn() { "AUTN" } else { "RAND" };
            // The attack works if the UE answers the altered challenge instead of catching it.
            let answered = r.transcript.entries.iter().any(|e| {
                e.from == Role::Ue
                    && matches!(
                        e.msg,
                        AkaMessage::AuthResponse { .. }
                            | AkaMessage::EapResponse(EapPayload::ChallengeResponse { .. })
                    )
            });
            Ok(b.finish(
                answered,
                format!(
                    "flipped {field} bit {bit}; UE answered: {answered}; UE {}",
                    verdict_name(ue_v)
                ),
            ))
        }
        Scenario::CrossNetworkKeyReuse => {
            let mut adv = Adversary::new(AdversaryKind::CrossNetworkKeyReuse);
            let mut runs: Vec<RunRecord> = Vec::new();
            for (label, side) in [("network_a", Side::A), ("network_b", Side::B)] {
                let mut w = World::build(world(variant, seed, cfg).with_networks(side, side))?;
                let mut ears = Eavesdropper::new();
                let r = w.run(Some(&mut ears))?;
                sound(&w, &ears.0)?;
                adv.captured.extend(ears.0.captured);
                b.record(label, &r.transcript);
                runs.push(r);
            }
            let challenges: Vec<&AkaMessage> = adv
                .captured
                .iter()
                .map(|c| &c.msg)
                .filter(|m| m.is_challenge())
                .collect();
            let same_rand = challenges.len() == 2
                && challenges[0].clone().challenge_rand_mut()
                    == challenges[1].clone().challenge_rand_mut();
            let names = sharing_boundary(variant, Role::Serving);
            let (a, bk) = (runs[0].ue_keys.as_ref(), runs[1].ue_keys.as_ref());
            let equal = match (a, bk) {
                (Some(a), Some(bk)) => a.agrees_with(bk, names),
                _ => false,
            };
            Ok(b.finish(
                same_rand && equal,
                format!(
                    "same RAND on both networks: {same_rand}; {} equal: {equal}",
                    names.join("/")
                ),
            ))
        }
        Scenario::IdentityExposure => {
            let mut w = World::build(world(variant, seed, cfg))?;
            let mut ears = Eavesdropper::new();
            let r = w.run(Some(&mut ears))?;
            b.record("observed", &r.transcript);
            sound(&w, &ears.0)?;
            let seen = ears.0.material();
            let imsi = w.imsi.as_str().as_bytes();
            let exposed = seen.windows(imsi.len()).any(|win| win == imsi);
            let kind = match ears.0.first_identity() {
                Some(MobileIdentity::Imsi(_)) => "imsi",
                Some(MobileIdentity::Suci(_)) => "suci",
                None => "none",
            };
            Ok(b.finish(
                exposed,
                format!("identity on radio: {kind}; IMSI digits visible: {exposed}"),
            ))
        }
        Scenario::HomePresenceCheck => {
            let mut w = World::build(world(variant, seed, cfg))?;
            let mut ears = Eavesdropper::new();
            let first = w.run(Some(&mut ears))?;
            b.record("capture", &first.transcript);
            let mut rogue = RogueServing::new(variant, ears.0, w.config.serving_network.clone())
                .ok_or_else(|| Error::Unavailable("no identity observed".into()))?;
            let mut ue = Absent {
                role: Role::Ue,
                variant,
            };
            let mut home = w.next_home(1)?;
            let mut parties: [&mut dyn Endpoint; 3] = [&mut ue, &mut rogue, &mut home];
            let t = run_to_completion(&mut parties, &mut Bus::new())?;
            b.record("ue_absent", &t);
            sound(&w, &rogue.adversary)?;
            let home_v = t.verdict(Role::Home);
            let checks: Vec<&str> = home.checks().iter().map(|c| c.name()).collect();
            Ok(b.finish(
                home_v == Some(Verdict::Success),
                format!(
                    "home with no UE present: {}; home checks: [{}]",
                    verdict_name(home_v),
                    checks.join(",")
                ),
            ))
        }
        Scenario::AmfSeparation => {
            let mut wc = world(variant, seed, cfg);
            wc.clear_separation_bit = true;
            let mut w = World::build(wc)?;
            let r = w.run(None)?;
            b.record("legacy_vector", &r.transcript);
            let ue_v = r.transcript.verdict(Role::Ue);
            Ok(b.finish(
                ue_v == Some(Verdict::Success),
                format!("AMF bit 0 cleared; UE {}", verdict_name(ue_v)),
            ))
        }
        Scenario::ServingNetworkSpoof => {
            let mut w = World::build(world(variant, seed, cfg).with_networks(Side::B, Side::A))?;
            let r = w.run(None)?;
            b.record("spoofed", &r.transcript);
            let ue_v = r.transcript.verdict(Role::Ue);
            let names = sharing_boundary(variant, Role::Serving);
            let agreed = match (&r.ue_keys, &r.serving_keys) {
                (Some(u), Some(s)) => u.agrees_with(s, names),
                _ => false,
            };
            Ok(b.finish(
                ue_v == Some(Verdict::Success) && agreed,
                format!(
                    "UE in B, network claims A; UE {}; keys agree: {agreed}",
                    verdict_name(ue_v)
                ),
            ))
        }
    }
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    v.map_or("pending", Verdict::name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_not_found() {
        assert!(matches!(
            run_scenario("bogus", Variant::Gsm, 1, &ScenarioConfig::default()),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn every_cell_matches_expectation() {
        for sc in Scenario::ALL {
            for v in Variant::ALL {
                let o = run(sc, v, 7, &ScenarioConfig::default()).unwrap();
                assert_eq!(o.attack_succeeded, o.expected(), "{sc} {v}: {}", o.detail);
            }
        }
    }

    #[test]
    fn false_base_station_verdicts() {
        let cfg = ScenarioConfig::default();
        let o = run(Scenario::FalseBaseStation, Variant::Umts, 3, &cfg).unwrap();
        assert_eq!(o.verdict("attack", Role::Ue), Some(Verdict::MacFailure));
        let o = run(Scenario::Replay, Variant::Eps, 3, &cfg).unwrap();
        assert_eq!(o.verdict("attack", Role::Ue), Some(Verdict::SyncFailure));
        let o = run(Scenario::FalseBaseStation, Variant::Gsm, 3, &cfg).unwrap();
        assert_eq!(o.verdict("attack", Role::Ue), Some(Verdict::Success));
    }

    #[test]
    fn deterministic_outcomes() {
        let cfg = ScenarioConfig::default();
        let a = run(Scenario::CrossNetworkKeyReuse, Variant::FiveGAka, 9, &cfg).unwrap();
        let b = run(Scenario::CrossNetworkKeyReuse, Variant::FiveGAka, 9, &cfg).unwrap();
        assert_eq!(a.evidence_text(), b.evidence_text());
    }
}
