//! Attackers. None of them holds a root key: everything they send is built
//! from bytes they observed on the bus.

use super::bus::{Envelope, Tap};
use crate::engine::{
    AkaMessage, EapPayload, Endpoint, Link, MobileIdentity, ResultCode, Role, ServingVector,
    Verdict,
};
use crate::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    PassiveEavesdropper,
    FalseBaseStation,
    Replayer,
    CrossNetworkKeyReuse,
    /// Flips bits of challenges in flight.
    Tamperer,
    /// A serving network that talks to the home network without the UE.
    RogueServingNetwork,
}

impl AdversaryKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::PassiveEavesdropper => "passive_eavesdropper",
            Self::FalseBaseStation => "false_base_station",
            Self::Replayer => "replayer",
            Self::CrossNetworkKeyReuse => "cross_network_key_reuse",
            Self::Tamperer => "tamperer",
            Self::RogueServingNetwork => "rogue_serving_network",
        }
    }
}

/// One observed message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Capture {
    pub t: u64,
    pub from: Role,
    pub to: Role,
    pub msg: AkaMessage,
}

#[derive(Clone, Debug)]
pub struct Adversary {
    pub kind: AdversaryKind,
    pub captured: Vec<Capture>,
}

impl Adversary {
    pub fn new(kind: AdversaryKind) -> Self {
        Self {
            kind,
            captured: Vec::new(),
        }
    }

    fn observe(&mut self, env: &Envelope) {
        self.captured.push(Capture {
            t: env.deliver_at,
            from: env.from,
            to: env.to,
            msg: env.msg.clone(),
        });
    }

    /// Everything the adversary holds, as raw bytes.
    pub fn material(&self) -> Vec<u8> {
        self.captured.iter().flat_map(|c| c.msg.payload()).collect()
    }

    pub fn first_challenge(&self) -> Option<&AkaMessage> {
        self.captured
            .iter()
            .map(|c| &c.msg)
            .find(|m| m.is_challenge())
    }

    pub fn first_identity(&self) -> Option<&MobileIdentity> {
        self.captured.iter().find_map(|c| match &c.msg {
            AkaMessage::Identity(id) => Some(id),
            _ => None,
        })
    }

    /// RES-like value the UE sent in the first captured response.
    pub fn first_response(&self) -> Option<Vec<u8>> {
        self.captured.iter().find_map(|c| match &c.msg {
            AkaMessage::AuthResponse { res } => Some(res.clone()),
            AkaMessage::EapResponse(EapPayload::ChallengeResponse { res }) => Some(res.clone()),
            _ => None,
        })
    }
}

/// Radio-only passive listener.
pub struct Eavesdropper(pub Adversary);

impl Eavesdropper {
    pub fn new() -> Self {
        Self(Adversary::new(AdversaryKind::PassiveEavesdropper))
    }
}

impl Default for Eavesdropper {
    fn default() -> Self {
        Self::new()
    }
}

impl Tap for Eavesdropper {
    fn on_deliver(&mut self, env: Envelope) -> Vec<Envelope> {
        if env.link() == Link::Radio {
            self.0.observe(&env);
        }
        vec![env]
    }
}

/// Flips one bit of the first challenge on the radio link: bit `bit` of the
/// AUTN, or of the RAND when the variant carries no AUTN.
pub struct Tamperer {
    pub adversary: Adversary,
    pub bit: usize,
    pub done: bool,
}

impl Tamperer {
    pub fn new(bit: usize) -> Self {
        Self {
            adversary: Adversary::new(AdversaryKind::Tamperer),
            bit: bit % 128,
            done: false,
        }
    }
}

impl Tap for Tamperer {
    fn on_deliver(&mut self, mut env: Envelope) -> Vec<Envelope> {
        if env.link() == Link::Radio {
            self.adversary.observe(&env);
            if !self.done && env.to == Role::Ue && env.msg.is_challenge() {
                let (byte, mask) = (self.bit / 8, 0x80u8 >> (self.bit % 8));
                if let Some(autn) = env.msg.challenge_autn_mut() {
                    autn.0[byte] ^= mask;
                } else if let Some(rand) = env.msg.challenge_rand_mut() {
                    rand[byte] ^= mask;
                }
                self.done = true;
            }
        }
        vec![env]
    }
}

/// How a fake network dresses up a captured challenge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChallengeReuse {
    /// Send it exactly as captured.
    Verbatim,
    /// Push the concealed SQN forward so it looks fresh; the MAC cannot be recomputed.
    ForgeFreshSqn,
}

/// A base station the attacker runs, posing as the serving network.
pub struct FakeNetwork {
    pub adversary: Adversary,
    variant: Variant,
    challenge: AkaMessage,
    reuse: ChallengeReuse,
    verdict: Option<Verdict>,
}

impl FakeNetwork {
    pub fn new(
        kind: AdversaryKind,
        variant: Variant,
        captured: Adversary,
        reuse: ChallengeReuse,
    ) -> Option<Self> {
        let challenge = captured.first_challenge()?.clone();
        let mut adversary = captured;
        adversary.kind = kind;
        Some(Self {
            adversary,
            variant,
            challenge,
            reuse,
            verdict: None,
        })
    }

    fn forged(&self) -> AkaMessage {
        let mut msg = self.challenge.clone();
        if self.reuse == ChallengeReuse::ForgeFreshSqn {
            if let Some(autn) = msg.challenge_autn_mut() {
                // Bit 40 of SQN^AK: far ahead in SQN space once AK is removed.
                autn.0[0] ^= 0x01;
            }
        }
        msg
    }
}

impl Endpoint for FakeNetwork {
    fn role(&self) -> Role {
        Role::Serving
    }

    fn variant(&self) -> Variant {
        self.variant
    }

    fn step(&mut self, inbox: Vec<(Role, AkaMessage)>) -> Vec<(Role, AkaMessage)> {
        let mut out = Vec::new();
        for (from, msg) in inbox {
            self.adversary.captured.push(Capture {
                t: 0,
                from,
                to: Role::Serving,
                msg: msg.clone(),
            });
            match msg {
                AkaMessage::Identity(_) => out.push((Role::Ue, self.forged())),
                AkaMessage::AuthResponse { .. } => self.verdict = Some(Verdict::Success),
                AkaMessage::EapResponse(EapPayload::ChallengeResponse { .. }) => {
                    // EAP success carries no proof in this model, so the fake network can send it.
                    out.push((
                        Role::Ue,
                        AkaMessage::EapRequest {
                            payload: EapPayload::Success,
                            abba: None,
                        },
                    ));
                    self.verdict = Some(Verdict::Success);
                }
                _ => self.verdict = Some(Verdict::AuthReject),
            }
        }
        out
    }

    fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }
}

/// A serving network that asks the home network for a vector using a
/// captured identity, never contacts the UE, and then claims success.
pub struct RogueServing {
    pub adversary: Adversary,
    variant: Variant,
    identity: MobileIdentity,
    network: Option<crate::crypto::ServingNetworkId>,
    started: bool,
    verdict: Option<Verdict>,
}

impl RogueServing {
    pub fn new(
        variant: Variant,
        captured: Adversary,
        network: Option<crate::crypto::ServingNetworkId>,
    ) -> Option<Self> {
        let identity = captured.first_identity()?.clone();
        let mut adversary = captured;
        adversary.kind = AdversaryKind::RogueServingNetwork;
        Some(Self {
            adversary,
            variant,
            identity,
            network,
            started: false,
            verdict: None,
        })
    }
}

impl Endpoint for RogueServing {
    fn role(&self) -> Role {
        Role::Serving
    }

    fn variant(&self) -> Variant {
        self.variant
    }

    fn step(&mut self, inbox: Vec<(Role, AkaMessage)>) -> Vec<(Role, AkaMessage)> {
        if !self.started {
            self.started = true;
            let req = AkaMessage::VectorRequest {
                identity: self.identity.clone(),
                serving_network: self.network.clone(),
            };
            return vec![(Role::Home, req)];
        }
        let mut out = Vec::new();
        for (from, msg) in inbox {
            self.adversary.captured.push(Capture {
                t: 0,
                from,
                to: Role::Serving,
                msg: msg.clone(),
            });
            match msg {
                AkaMessage::VectorResponse(ServingVector::FiveGSe(se)) => {
                    // The best it has is HXRES*; RES* needs the USIM.
                    out.push((
                        Role::Home,
                        AkaMessage::AuthConfirm {
                            res_star: se.hxres_star,
                        },
                    ));
                }
                AkaMessage::VectorResponse(_) => {
                    out.push((
                        Role::Home,
                        AkaMessage::AuthResult {
                            code: ResultCode::Success,
                            supi: None,
                            key: None,
                        },
                    ));
                    self.verdict = Some(Verdict::Success);
                }
                AkaMessage::EapRequest { .. } => {
                    let res = self
                        .adversary
                        .first_response()
                        .unwrap_or_else(|| vec![0; 8]);
                    out.push((
                        Role::Home,
                        AkaMessage::EapResponse(EapPayload::ChallengeResponse { res }),
                    ));
                }
                AkaMessage::AuthResult { code, .. } => {
                    self.verdict = Some(if code == ResultCode::Success {
                        Verdict::Success
                    } else {
                        Verdict::AuthReject
                    });
                }
                _ => {}
            }
        }
        out
    }

    fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }
}

/// A role slot with nobody in it.
pub struct Absent {
    pub role: Role,
    pub variant: Variant,
}

impl Endpoint for Absent {
    fn role(&self) -> Role {
        self.role
    }

    fn variant(&self) -> Variant {
        self.variant
    }

    fn step(&mut self, _inbox: Vec<(Role, AkaMessage)>) -> Vec<(Role, AkaMessage)> {
        Vec::new()
    }

    fn verdict(&self) -> Option<Verdict> {
        None
    }
}
