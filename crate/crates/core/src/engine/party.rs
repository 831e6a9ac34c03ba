//! UE, serving CN and home CN state machines for all eight variants.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::keys::SessionKeys;
use super::message::{
    AkaMessage, EapPayload, FailureCause, MobileIdentity, ResultCode, Role, ServingVector,
};
use super::usim::Usim;
use super::Endpoint;
use crate::crypto::kdf::{derive_kamf, derive_kseaf};
use crate::crypto::types::xor;
use crate::crypto::{
    build_auts, derive_ck_ik_prime, derive_hres_star, derive_kasme, derive_kausf_kseaf_kamf,
    derive_res_star, eap_aka_keys, eap_aka_prime_keys, kc128_ki128, suci_conceal, suci_deconceal,
    Autn, FiveGMode, HomeNetworkKey, Key256, Key512, Rand, ServingNetworkId, Sqn, SuciScheme,
};
use crate::error::{Error, Result};
use crate::subscriber::{accept_sqn, Imsi, SqnVerdict, SubscriberStore};
use crate::vectors::{reduce_to_se_av, EapAv, EapKeyBlock, EapVariant, FiveGHeAv, VectorFactory};
use crate::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Success,
    AuthReject,
    MacFailure,
    SyncFailure,
    ResMismatch,
    /// A message arrived that the current phase cannot accept.
    ProtocolViolation,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::Success,
        Verdict::AuthReject,
        Verdict::MacFailure,
        Verdict::SyncFailure,
        Verdict::ResMismatch,
        Verdict::ProtocolViolation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::AuthReject => "auth_reject",
            Verdict::MacFailure => "mac_failure",
            Verdict::SyncFailure => "sync_failure",
            Verdict::ResMismatch => "res_mismatch",
            Verdict::ProtocolViolation => "protocol_violation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Verdict::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::MalformedInput(format!("unknown verdict '{s}'")))
    }

    fn from_code(code: ResultCode) -> Self {
        match code {
            ResultCode::Success => Verdict::Success,
            ResultCode::ResMismatch => Verdict::ResMismatch,
            ResultCode::SyncFailure => Verdict::SyncFailure,
            ResultCode::Rejected => Verdict::AuthReject,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A verification a party performed during the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Mac,
    Sqn,
    AmfSeparation,
    /// EAP-AKA' network name compared against the UE's own view.
    NetworkName,
    ResVsXres,
    HresVsHxres,
    ResStarVsXresStar,
    Auts,
    SuciDeconceal,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Mac => "mac",
            Check::Sqn => "sqn",
            Check::AmfSeparation => "amf_separation",
            Check::NetworkName => "network_name",
            Check::ResVsXres => "res",
            Check::HresVsHxres => "hres_star",
            Check::ResStarVsXresStar => "res_star",
            Check::Auts => "auts",
            Check::SuciDeconceal => "suci",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        use Check::*;
        [
            Mac,
            Sqn,
            AmfSeparation,
            NetworkName,
            ResVsXres,
            HresVsHxres,
            ResStarVsXresStar,
            Auts,
            SuciDeconceal,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::MalformedInput(format!("unknown check '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Initial,
    AwaitingChallenge,
    AwaitingEapResult,
    AwaitingVector,
    AwaitingResponse,
    AwaitingHomeResult,
    AwaitingReport,
    AwaitingConfirm,
    AwaitingEapResponse,
    Terminal(Verdict),
}

pub struct UeConfig {
    pub usim: Option<Usim>,
    /// The serving network the UE believes it is attached to.
    pub serving_network: Option<ServingNetworkId>,
    pub suci_scheme: SuciScheme,
    /// `(key id, X25519 public key)` of the home network, for SUCI.
    pub home_network_pubkey: Option<(u8, [u8; 32])>,
    /// Seeds SUCI ephemeral keys.
    pub seed: u64,
}

impl UeConfig {
    pub fn new(usim: Usim) -> Self {
        Self {
            usim: Some(usim),
            serving_network: None,
            suci_scheme: SuciScheme::EciesProfileA,
            home_network_pubkey: None,
            seed: 0,
        }
    }
}

pub struct ServingConfig {
    pub network: Option<ServingNetworkId>,
    pub abba: Vec<u8>,
}

impl ServingConfig {
    pub fn new(network: Option<ServingNetworkId>) -> Self {
        Self {
            network,
            abba: vec![0, 0],
        }
    }
}

pub struct HomeConfig {
    pub store: Option<SubscriberStore>,
    pub factory: VectorFactory,
    pub hn_key: Option<HomeNetworkKey>,
}

impl HomeConfig {
    pub fn new(store: SubscriberStore, factory: VectorFactory) -> Self {
        Self {
            store: Some(store),
            factory,
            hn_key: None,
        }
    }
}

pub enum PartyConfig {
    Ue(UeConfig),
    Serving(ServingConfig),
    Home(HomeConfig),
}

struct UeState {
    usim: Usim,
    network: Option<ServingNetworkId>,
    suci_scheme: SuciScheme,
    hn_pub: Option<(u8, [u8; 32])>,
    rng: ChaCha20Rng,
}

struct ServingState {
    network: Option<ServingNetworkId>,
    abba: Vec<u8>,
    vector: Option<ServingVector>,
}

struct HomeState {
    store: SubscriberStore,
    factory: VectorFactory,
    hn_key: Option<HomeNetworkKey>,
    imsi: Option<Imsi>,
    rand: Option<Rand>,
    he: Option<FiveGHeAv>,
    eap: Option<EapAv>,
}

enum Inner {
    Ue(Box<UeState>),
    Serving(ServingState),
    Home(Box<HomeState>),
}

struct Common {
    role: Role,
    variant: Variant,
    phase: Phase,
    checks: Vec<Check>,
    keys: SessionKeys,
    peer_identity: Option<String>,
    reject_cause: Option<FailureCause>,
    note: Option<String>,
    late_messages: usize,
    last_in: Option<(Role, AkaMessage)>,
}

impl Common {
    fn finish(&mut self, v: Verdict) {
        self.phase = Phase::Terminal(v);
    }
}

/// One protocol participant.
pub struct Party {
    c: Common,
    inner: Inner,
}

type Outbox = Vec<(Role, AkaMessage)>;

fn check_network(variant: Variant, sn: Option<&ServingNetworkId>, who: &str) -> Result<()> {
    let Some(kind) = variant.serving_network_kind() else {
        return Ok(());
    };
    match sn {
        Some(sn) if sn.kind() == kind => Ok(()),
        Some(sn) => Err(Error::Configuration(format!(
            "{who} for {variant} needs a {kind} serving network, got {}",
            sn.kind()
        ))),
        None => Err(Error::Configuration(format!(
            "{who} for {variant} needs a {kind} serving network"
        ))),
    }
}

/// Builds a party in its initial phase.
pub fn new_party(role: Role, variant: Variant, config: PartyConfig) -> Result<Party> {
    let inner = match (role, config) {
        (Role::Ue, PartyConfig::Ue(cfg)) => {
            let usim = cfg.usim.ok_or_else(|| {
                Error::Configuration("UE needs a USIM holding its root key".into())
            })?;
            check_network(variant, cfg.serving_network.as_ref(), "UE")?;
            if variant.is_5g()
                && cfg.suci_scheme != SuciScheme::Null
                && cfg.home_network_pubkey.is_none()
            {
                return Err(Error::Configuration(
                    "UE needs the home network public key for SUCI".into(),
                ));
            }
            Inner::Ue(Box::new(UeState {
                usim,
                network: cfg.serving_network,
                suci_scheme: cfg.suci_scheme,
                hn_pub: cfg.home_network_pubkey,
                rng: ChaCha20Rng::seed_from_u64(cfg.seed),
            }))
        }
        (Role::Serving, PartyConfig::Serving(cfg)) => {
            check_network(variant, cfg.network.as_ref(), "serving network")?;
            Inner::Serving(ServingState {
                network: cfg.network,
                abba: cfg.abba,
                vector: None,
            })
        }
        (Role::Home, PartyConfig::Home(cfg)) => {
            let store = cfg.store.ok_or_else(|| {
                Error::Configuration("home network needs a subscriber store".into())
            })?;
            Inner::Home(Box::new(HomeState {
                store,
                factory: cfg.factory,
                hn_key: cfg.hn_key,
                imsi: None,
                rand: None,
                he: None,
                eap: None,
            }))
        }
        (role, _) => {
            return Err(Error::Configuration(format!(
                "configuration does not match role {role}"
            )))
        }
    };
    Ok(Party {
        c: Common {
            role,
            variant,
            phase: Phase::Initial,
            checks: Vec::new(),
            keys: SessionKeys::default(),
            peer_identity: None,
            reject_cause: None,
            note: None,
            late_messages: 0,
            last_in: None,
        },
        inner,
    })
}

/// Keys the party holds after a successful run.
pub fn extract_session_keys(party: &Party) -> Result<SessionKeys> {
    if party.c.phase != Phase::Terminal(Verdict::Success) {
        return Err(Error::Unavailable(format!(
            "{} party is in phase {:?}, not success",
            party.c.role, party.c.phase
        )));
    }
    Ok(party.c.keys.clone())
}

/// Key names shared between the UE and `role` for a variant.
pub fn sharing_boundary(variant: Variant, role: Role) -> &'static [&'static str] {
    match (role, variant) {
        (Role::Ue, _) => &[],
        (Role::Serving, Variant::Gsm) => &["kc"],
        (Role::Serving, Variant::Umts) => &["ck", "ik"],
        (Role::Serving, Variant::EcGsmIot) => &["kc128", "ki128"],
        (Role::Serving, Variant::Eps) => &["kasme"],
        (Role::Serving, Variant::EapAka | Variant::EapAkaPrime) => &["msk"],
        (Role::Serving, Variant::FiveGAka | Variant::FiveGEapAkaPrime) => &["kseaf", "kamf"],
        (Role::Home, Variant::EapAka | Variant::EapAkaPrime) => &["emsk"],
        (Role::Home, Variant::FiveGAka | Variant::FiveGEapAkaPrime) => &["kausf"],
        (Role::Home, _) => &[],
    }
}

impl Party {
    pub fn role(&self) -> Role {
        self.c.role
    }

    pub fn variant(&self) -> Variant {
        self.c.variant
    }

    pub fn phase(&self) -> Phase {
        self.c.phase
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match self.c.phase {
            Phase::Terminal(v) => Some(v),
            _ => None,
        }
    }

    pub fn checks(&self) -> &[Check] {
        &self.c.checks
    }

    /// Identifier the peer claimed (serving) or that was resolved (home).
    pub fn peer_identity(&self) -> Option<&str> {
        self.c.peer_identity.as_deref()
    }

    pub fn reject_cause(&self) -> Option<FailureCause> {
        self.c.reject_cause
    }

    /// Diagnostic attached to a protocol violation.
    pub fn note(&self) -> Option<&str> {
        self.c.note.as_deref()
    }

    /// Messages that reached the party after it had terminated.
    pub fn late_messages(&self) -> usize {
        self.c.late_messages
    }

    pub fn home_store(&self) -> Option<&SubscriberStore> {
        match &self.inner {
            Inner::Home(h) => Some(&h.store),
            _ => None,
        }
    }

    pub fn into_home_store(self) -> Option<SubscriberStore> {
        match self.inner {
            Inner::Home(h) => Some(h.store),
            _ => None,
        }
    }

    pub fn usim(&self) -> Option<&Usim> {
        match &self.inner {
            Inner::Ue(u) => Some(&u.usim),
            _ => None,
        }
    }

    /// Processes `inbox` in order. A step with an empty inbox only does
    /// something for a UE in its initial phase: it sends its identity.
    pub fn step(&mut self, inbox: Vec<(Role, AkaMessage)>) -> Outbox {
        let mut out = Vec::new();
        if inbox.is_empty() {
            if let (Inner::Ue(ue), Phase::Initial) = (&mut self.inner, self.c.phase) {
                let r = ue_start(&mut self.c, ue);
                self.absorb(r, &mut out);
            }
            return out;
        }
        for (from, msg) in inbox {
            if let Phase::Terminal(v) = self.c.phase {
                after_terminal(&mut self.c, v, from, &msg);
                continue;
            }
            // A retransmission of what was just handled is dropped.
            if self.c.last_in.as_ref() == Some(&(from, msg.clone())) {
                self.c.late_messages += 1;
                continue;
            }
            self.c.last_in = Some((from, msg.clone()));
            let r = match &mut self.inner {
                Inner::Ue(ue) => ue_on(&mut self.c, ue, from, msg),
                Inner::Serving(s) => serving_on(&mut self.c, s, from, msg),
                Inner::Home(h) => home_on(&mut self.c, h, from, msg),
            };
            self.absorb(r, &mut out);
        }
        out
    }

    fn absorb(&mut self, r: Result<Outbox>, out: &mut Outbox) {
        match r {
            Ok(mut o) => out.append(&mut o),
            Err(e) => {
                self.c.note = Some(e.to_string());
                self.c.finish(Verdict::ProtocolViolation);
            }
        }
    }
}

impl Endpoint for Party {
    fn role(&self) -> Role {
        self.c.role
    }

    fn step(&mut self, inbox: Vec<(Role, AkaMessage)>) -> Outbox {
        Party::step(self, inbox)
    }

    fn variant(&self) -> Variant {
        self.c.variant
    }

    fn verdict(&self) -> Option<Verdict> {
        Party::verdict(self)
    }

    fn checks(&self) -> Vec<Check> {
        self.c.checks.clone()
    }
}

impl fmt::Debug for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Party")
            .field("role", &self.c.role)
            .field("variant", &self.c.variant)
            .field("phase", &self.c.phase)
            .field("checks", &self.c.checks)
            .field("keys", &self.c.keys)
            .finish_non_exhaustive()
    }
}

fn unexpected(c: &Common, from: Role, msg: &AkaMessage) -> Error {
    Error::Domain(format!(
        "{} in phase {:?} cannot accept {} from {from}",
        c.role,
        c.phase,
        msg.kind()
    ))
}

/// A network-side rejection can still overturn a UE that already derived keys.
fn after_terminal(c: &mut Common, v: Verdict, from: Role, msg: &AkaMessage) {
    let rejected = matches!(msg, AkaMessage::AuthResult { code, .. } if *code != ResultCode::Success)
        || matches!(
            msg,
            AkaMessage::EapRequest {
                payload: EapPayload::Failure,
                ..
            }
        );
    if c.role == Role::Ue && v == Verdict::Success && from == Role::Serving && rejected {
        c.finish(Verdict::AuthReject);
    } else {
        c.late_messages += 1;
    }
}

// ---------------------------------------------------------------- UE

fn ue_start(c: &mut Common, ue: &mut UeState) -> Result<Outbox> {
    let identity = if c.variant.is_5g() {
        let (id, pk) = ue.hn_pub.unwrap_or((0, [0; 32]));
        let env = suci_conceal(
            ue.usim.supi.as_bytes(),
            ue.suci_scheme,
            id,
            &pk,
            &mut ue.rng,
        )?;
        MobileIdentity::Suci(env)
    } else {
        MobileIdentity::Imsi(ue.usim.imsi.as_str().to_string())
    };
    c.phase = Phase::AwaitingChallenge;
    Ok(vec![(Role::Serving, AkaMessage::Identity(identity))])
}

struct ChallengeIn {
    rand: Rand,
    autn: Option<Autn>,
    abba: Option<Vec<u8>>,
    kdf_input: Option<Vec<u8>>,
    eap: bool,
}

fn ue_on(c: &mut Common, ue: &mut UeState, from: Role, msg: AkaMessage) -> Result<Outbox> {
    if from != Role::Serving {
        return Err(unexpected(c, from, &msg));
    }
    let awaiting = matches!(c.phase, Phase::Initial | Phase::AwaitingChallenge);
    match msg {
        AkaMessage::AuthRequest { rand, autn, abba } if awaiting && !c.variant.is_eap() => {
            ue_challenge(
                c,
                ue,
                ChallengeIn {
                    rand,
                    autn,
                    abba,
                    kdf_input: None,
                    eap: false,
                },
            )
        }
        AkaMessage::EapRequest {
            payload:
                EapPayload::Challenge {
                    rand,
                    autn,
                    kdf_input,
                },
            abba,
        } if awaiting && c.variant.is_eap() => ue_challenge(
            c,
            ue,
            ChallengeIn {
                rand,
                autn: Some(autn),
                abba,
                kdf_input,
                eap: true,
            },
        ),
        AkaMessage::AuthResult { code, .. } if code != ResultCode::Success && awaiting => {
            c.finish(Verdict::AuthReject);
            Ok(vec![])
        }
        AkaMessage::EapRequest {
            payload: EapPayload::Success,
            ..
        } if c.phase == Phase::AwaitingEapResult => {
            c.finish(Verdict::Success);
            Ok(vec![])
        }
        AkaMessage::EapRequest {
            payload: EapPayload::Failure,
            ..
        } if matches!(c.phase, Phase::AwaitingEapResult | Phase::AwaitingChallenge) => {
            c.finish(Verdict::AuthReject);
            Ok(vec![])
        }
        other => Err(unexpected(c, from, &other)),
    }
}

fn ue_challenge(c: &mut Common, ue: &mut UeState, ch: ChallengeIn) -> Result<Outbox> {
    let v = c.variant;
    let usim = &mut ue.usim;
    if v == Variant::Gsm {
        // No AUTN, no network authentication: any RAND is answered.
        let (sres, kc) = usim.a3a8().derive(usim.root(), &ch.rand);
        c.keys = SessionKeys {
            kc: Some(kc),
            ..Default::default()
        };
        c.finish(Verdict::Success);
        return Ok(vec![(
            Role::Serving,
            AkaMessage::AuthResponse { res: sres.to_vec() },
        )]);
    }
    let autn = ch
        .autn
        .ok_or_else(|| Error::MalformedInput(format!("{v} challenge without AUTN")))?;
    let eap = ch.eap;
    let reply = move |p: EapPayload, plain: AkaMessage| {
        vec![(
            Role::Serving,
            if eap {
                AkaMessage::EapResponse(p)
            } else {
                plain
            },
        )]
    };
    let reject = |c: &mut Common, cause: FailureCause| {
        c.reject_cause = Some(cause);
        c.finish(Verdict::AuthReject);
        reply(
            EapPayload::ClientReject { cause },
            AkaMessage::AuthFailure { cause },
        )
    };

    // f5 does not depend on SQN, so AK comes first and unmasks SQN for f1.
    let alg = usim.algorithm();
    let ak = alg
        .compute(usim.root(), &ch.rand, Sqn::default(), autn.amf())
        .ak;
    let sqn = Sqn::from_bytes(xor(&autn.sqn_xor_ak(), &ak));
    let out = alg.compute(usim.root(), &ch.rand, sqn, autn.amf());

    c.checks.push(Check::Mac);
    if out.mac_a != autn.mac() {
        c.finish(Verdict::MacFailure);
        let cause = FailureCause::MacFailure;
        return Ok(reply(
            EapPayload::ClientReject { cause },
            AkaMessage::AuthFailure { cause },
        ));
    }
    c.checks.push(Check::Sqn);
    if accept_sqn(sqn, usim.sqn_ms, usim.policy) == SqnVerdict::SyncFailure {
        let auts = build_auts(usim.root(), &ch.rand, usim.sqn_ms);
        c.finish(Verdict::SyncFailure);
        return Ok(reply(
            EapPayload::SyncFailure { auts },
            AkaMessage::Resync {
                rand: ch.rand,
                auts,
            },
        ));
    }
    usim.sqn_ms = sqn;

    if v.checks_amf() {
        c.checks.push(Check::AmfSeparation);
        if !autn.separation_bit() {
            return Ok(reject(c, FailureCause::AmfSeparation));
        }
    }
    if matches!(v, Variant::EapAkaPrime | Variant::FiveGEapAkaPrime) {
        c.checks.push(Check::NetworkName);
        if ch.kdf_input.as_deref() != ue.network.as_ref().map(ServingNetworkId::as_bytes) {
            return Ok(reject(c, FailureCause::NetworkNameMismatch));
        }
    }

    let res = out.res[..usim.res_len].to_vec();
    let (ck, ik, sqn_xor_ak) = (out.ck, out.ik, autn.sqn_xor_ak());
    let network = || {
        ue.network
            .as_ref()
            .ok_or_else(|| Error::Configuration("UE has no serving network".into()))
    };
    let abba = || {
        ch.abba
            .clone()
            .ok_or_else(|| Error::MalformedInput(format!("{v} challenge without ABBA")))
    };
    let mut keys = SessionKeys::default();
    let (response, next) = match v {
        Variant::Gsm => unreachable!("handled above"),
        Variant::Umts => {
            keys.ck = Some(ck);
            keys.ik = Some(ik);
            (
                AkaMessage::AuthResponse { res },
                Phase::Terminal(Verdict::Success),
            )
        }
        Variant::EcGsmIot => {
            let (kc128, ki128) = kc128_ki128(&ck, &ik);
            keys.kc128 = Some(kc128);
            keys.ki128 = Some(ki128);
            (
                AkaMessage::AuthResponse { res },
                Phase::Terminal(Verdict::Success),
            )
        }
        Variant::Eps => {
            keys.kasme = Some(derive_kasme(&ck, &ik, network()?, &sqn_xor_ak)?);
            (
                AkaMessage::AuthResponse { res },
                Phase::Terminal(Verdict::Success),
            )
        }
        Variant::EapAka => {
            let k = eap_aka_keys(usim.imsi.as_str().as_bytes(), &ik, &ck)?;
            keys.msk = Some(k.msk);
            keys.emsk = Some(k.emsk);
            (
                AkaMessage::EapResponse(EapPayload::ChallengeResponse { res }),
                Phase::AwaitingEapResult,
            )
        }
        Variant::EapAkaPrime => {
            let (ckp, ikp) = derive_ck_ik_prime(&ck, &ik, network()?, &sqn_xor_ak)?;
            let k = eap_aka_prime_keys(usim.imsi.as_str().as_bytes(), &ikp, &ckp)?;
            keys.msk = Some(k.msk);
            keys.emsk = Some(k.emsk);
            (
                AkaMessage::EapResponse(EapPayload::ChallengeResponse { res }),
                Phase::AwaitingEapResult,
            )
        }
        Variant::FiveGAka => {
            let snn = network()?;
            let res_star = derive_res_star(&ck, &ik, snn, &ch.rand, &res)?;
            let k = derive_kausf_kseaf_kamf(
                &ck,
                &ik,
                snn,
                &sqn_xor_ak,
                usim.supi.as_bytes(),
                &abba()?,
                FiveGMode::FiveGAka,
                None,
            )?;
            keys.kausf = Some(k.kausf);
            keys.kseaf = Some(k.kseaf);
            keys.kamf = Some(k.kamf);
            (
                AkaMessage::AuthResponse {
                    res: res_star.to_vec(),
                },
                Phase::Terminal(Verdict::Success),
            )
        }
        Variant::FiveGEapAkaPrime => {
            let snn = network()?;
            let (ckp, ikp) = derive_ck_ik_prime(&ck, &ik, snn, &sqn_xor_ak)?;
            let eap = eap_aka_prime_keys(usim.supi.as_bytes(), &ikp, &ckp)?;
            let k = derive_kausf_kseaf_kamf(
                &ck,
                &ik,
                snn,
                &sqn_xor_ak,
                usim.supi.as_bytes(),
                &abba()?,
                FiveGMode::FiveGEapAkaPrime,
                Some(&eap.emsk),
            )?;
            keys.kausf = Some(k.kausf);
            keys.kseaf = Some(k.kseaf);
            keys.kamf = Some(k.kamf);
            (
                AkaMessage::EapResponse(EapPayload::ChallengeResponse { res }),
                Phase::AwaitingEapResult,
            )
        }
    };
    c.keys = keys;
    c.phase = next;
    Ok(vec![(Role::Serving, response)])
}

// ---------------------------------------------------------------- serving CN

fn vector_rand(v: &ServingVector) -> Rand {
    match v {
        ServingVector::Triplet(t) => t.rand,
        ServingVector::Quintet(q) => q.rand,
        ServingVector::Eps(e) => e.rand,
        ServingVector::FiveGSe(s) => s.rand,
    }
}

fn serving_on(c: &mut Common, s: &mut ServingState, from: Role, msg: AkaMessage) -> Result<Outbox> {
    let v = c.variant;
    let abba = v.is_5g().then(|| s.abba.clone());
    match (c.phase, from, msg) {
        (Phase::Initial, Role::Ue, AkaMessage::Identity(identity)) => {
            c.peer_identity = Some(match &identity {
                MobileIdentity::Imsi(i) => i.clone(),
                MobileIdentity::Suci(env) => format!("suci:{}", hex::encode(env.to_bytes())),
            });
            c.phase = Phase::AwaitingVector;
            let req = AkaMessage::VectorRequest {
                identity,
                serving_network: s.network.clone(),
            };
            Ok(vec![(Role::Home, req)])
        }
        (Phase::AwaitingVector, Role::Home, AkaMessage::VectorResponse(vector)) if !v.is_eap() => {
            let fits = matches!(
                (&vector, v),
                (ServingVector::Triplet(_), Variant::Gsm)
                    | (ServingVector::Quintet(_), Variant::Umts | Variant::EcGsmIot)
                    | (ServingVector::Eps(_), Variant::Eps)
                    | (ServingVector::FiveGSe(_), Variant::FiveGAka)
            );
            if !fits {
                return Err(Error::Domain(format!("vector does not fit variant {v}")));
            }
            let (rand, autn) = match &vector {
                ServingVector::Triplet(t) => (t.rand, None),
                ServingVector::Quintet(q) => (q.rand, Some(q.autn)),
                ServingVector::Eps(e) => (e.rand, Some(e.autn)),
                ServingVector::FiveGSe(x) => (x.rand, Some(x.autn)),
            };
            s.vector = Some(vector);
            c.phase = Phase::AwaitingResponse;
            Ok(vec![(
                Role::Ue,
                AkaMessage::AuthRequest { rand, autn, abba },
            )])
        }
        (Phase::AwaitingVector, Role::Home, AkaMessage::EapRequest { payload, .. })
            if v.is_eap() && matches!(payload, EapPayload::Challenge { .. }) =>
        {
            c.phase = Phase::AwaitingResponse;
            Ok(vec![(Role::Ue, AkaMessage::EapRequest { payload, abba })])
        }
        (Phase::AwaitingVector, Role::Home, AkaMessage::AuthResult { code, .. })
            if code != ResultCode::Success =>
        {
            c.finish(Verdict::from_code(code));
            let to_ue = if v.is_eap() {
                AkaMessage::EapRequest {
                    payload: EapPayload::Failure,
                    abba: None,
                }
            } else {
                AkaMessage::AuthResult {
                    code: ResultCode::Rejected,
                    supi: None,
                    key: None,
                }
            };
            Ok(vec![(Role::Ue, to_ue)])
        }
        (Phase::AwaitingResponse, Role::Ue, AkaMessage::AuthResponse { res }) if !v.is_eap() => {
            serving_response(c, s, res)
        }
        (Phase::AwaitingResponse, Role::Ue, AkaMessage::AuthFailure { cause }) if !v.is_eap() => {
            c.reject_cause = Some(cause);
            c.finish(Verdict::ResMismatch);
            let report = AkaMessage::AuthResult {
                code: ResultCode::ResMismatch,
                supi: None,
                key: None,
            };
            Ok(vec![(Role::Home, report)])
        }
        (Phase::AwaitingResponse, Role::Ue, AkaMessage::Resync { auts, .. }) if !v.is_eap() => {
            // The RAND is the one this network issued, not whatever the UE echoes.
            let rand = vector_rand(
                s.vector
                    .as_ref()
                    .expect("vector present while awaiting response"),
            );
            c.finish(Verdict::SyncFailure);
            Ok(vec![(Role::Home, AkaMessage::Resync { rand, auts })])
        }
        (Phase::AwaitingResponse, Role::Ue, AkaMessage::EapResponse(p)) if v.is_eap() => {
            c.phase = Phase::AwaitingHomeResult;
            Ok(vec![(Role::Home, AkaMessage::EapResponse(p))])
        }
        (Phase::AwaitingHomeResult, Role::Home, AkaMessage::AuthResult { code, supi, key }) => {
            serving_home_result(c, s, code, supi, key)
        }
        (_, from, other) => Err(unexpected(c, from, &other)),
    }
}

fn serving_response(c: &mut Common, s: &mut ServingState, res: Vec<u8>) -> Result<Outbox> {
    let vector = s
        .vector
        .as_ref()
        .expect("vector present while awaiting response");
    let mut keys = SessionKeys::default();
    let matched = match vector {
        ServingVector::Triplet(t) => {
            c.checks.push(Check::ResVsXres);
            keys.kc = Some(t.kc);
            res == t.xres
        }
        ServingVector::Quintet(q) => {
            c.checks.push(Check::ResVsXres);
            if c.variant == Variant::EcGsmIot {
                let (kc128, ki128) = kc128_ki128(&q.ck, &q.ik);
                keys.kc128 = Some(kc128);
                keys.ki128 = Some(ki128);
            } else {
                keys.ck = Some(q.ck);
                keys.ik = Some(q.ik);
            }
            res == q.xres
        }
        ServingVector::Eps(e) => {
            c.checks.push(Check::ResVsXres);
            keys.kasme = Some(e.kasme);
            res == e.xres
        }
        ServingVector::FiveGSe(se) => {
            c.checks.push(Check::HresVsHxres);
            let Ok(res_star) = <[u8; 16]>::try_from(res.as_slice()) else {
                return Ok(serving_mismatch(c));
            };
            if derive_hres_star(&se.rand, &res_star) != se.hxres_star {
                return Ok(serving_mismatch(c));
            }
            // The home network has the final word in 5G AKA.
            c.phase = Phase::AwaitingHomeResult;
            return Ok(vec![(Role::Home, AkaMessage::AuthConfirm { res_star })]);
        }
    };
    if !matched {
        return Ok(serving_mismatch(c));
    }
    c.keys = keys;
    c.finish(Verdict::Success);
    let report = AkaMessage::AuthResult {
        code: ResultCode::Success,
        supi: None,
        key: None,
    };
    Ok(vec![(Role::Home, report)])
}

fn serving_mismatch(c: &mut Common) -> Outbox {
    c.finish(Verdict::ResMismatch);
    vec![
        (
            Role::Home,
            AkaMessage::AuthResult {
                code: ResultCode::ResMismatch,
                supi: None,
                key: None,
            },
        ),
        (
            Role::Ue,
            AkaMessage::AuthResult {
                code: ResultCode::Rejected,
                supi: None,
                key: None,
            },
        ),
    ]
}

fn serving_home_result(
    c: &mut Common,
    s: &mut ServingState,
    code: ResultCode,
    supi: Option<String>,
    key: Option<Vec<u8>>,
) -> Result<Outbox> {
    let v = c.variant;
    let failure_to_ue = |v: Variant| {
        if v.is_eap() {
            AkaMessage::EapRequest {
                payload: EapPayload::Failure,
                abba: None,
            }
        } else {
            AkaMessage::AuthResult {
                code: ResultCode::Rejected,
                supi: None,
                key: None,
            }
        }
    };
    if code != ResultCode::Success {
        c.finish(Verdict::from_code(code));
        return Ok(vec![(Role::Ue, failure_to_ue(v))]);
    }
    let mut keys = SessionKeys::default();
    match v {
        Variant::FiveGAka | Variant::FiveGEapAkaPrime => {
            let supi =
                supi.ok_or_else(|| Error::MalformedInput("home result without SUPI".into()))?;
            let kseaf: Key256 = if v == Variant::FiveGAka {
                match &s.vector {
                    Some(ServingVector::FiveGSe(se)) => se.kseaf,
                    _ => return Err(Error::Domain("no 5G SE AV held".into())),
                }
            } else {
                crate::crypto::types::fixed(&key.unwrap_or_default(), "KSEAF")?
            };
            keys.kseaf = Some(kseaf);
            keys.kamf = Some(derive_kamf(&kseaf, supi.as_bytes(), &s.abba)?);
            c.peer_identity = Some(supi);
        }
        Variant::EapAka | Variant::EapAkaPrime => {
            let msk: Key512 = crate::crypto::types::fixed(&key.unwrap_or_default(), "MSK")?;
            keys.msk = Some(msk);
        }
        _ => return Err(Error::Domain(format!("{v} has no home result phase"))),
    }
    c.keys = keys;
    c.finish(Verdict::Success);
    if v.is_eap() {
        Ok(vec![(
            Role::Ue,
            AkaMessage::EapRequest {
                payload: EapPayload::Success,
                abba: None,
            },
        )])
    } else {
        Ok(vec![])
    }
}

// ---------------------------------------------------------------- home CN

fn home_reject(c: &mut Common, reason: String) -> Outbox {
    c.note = Some(reason);
    c.finish(Verdict::AuthReject);
    vec![(
        Role::Serving,
        AkaMessage::AuthResult {
            code: ResultCode::Rejected,
            supi: None,
            key: None,
        },
    )]
}

fn home_resolve(c: &mut Common, h: &HomeState, identity: &MobileIdentity) -> Result<Imsi> {
    match (identity, c.variant.is_5g()) {
        (MobileIdentity::Imsi(s), false) => Ok(h.store.get(&Imsi::new(s.clone())?)?.imsi.clone()),
        (MobileIdentity::Suci(env), true) => {
            c.checks.push(Check::SuciDeconceal);
            let secret = match (&h.hn_key, env.scheme) {
                (_, SuciScheme::Null) => [0u8; 32],
                (Some(k), _) if k.id == env.home_network_pubkey_id => k.secret_bytes(),
                _ => {
                    return Err(Error::NotFound(format!(
                        "home network key {}",
                        env.home_network_pubkey_id
                    )))
                }
            };
            let supi = String::from_utf8(suci_deconceal(env, &secret)?)
                .map_err(|_| Error::MalformedInput("SUPI is not UTF-8".into()))?;
            Ok(h.store.get_by_supi(&supi)?.imsi.clone())
        }
        (MobileIdentity::Imsi(_), true) => Err(Error::Domain("5G identity must be a SUCI".into())),
        (MobileIdentity::Suci(_), false) => Err(Error::Domain("SUCI is only used in 5G".into())),
    }
}

fn home_on(c: &mut Common, h: &mut HomeState, from: Role, msg: AkaMessage) -> Result<Outbox> {
    if from != Role::Serving {
        return Err(unexpected(c, from, &msg));
    }
    let v = c.variant;
    match (c.phase, msg) {
        (
            Phase::Initial,
            AkaMessage::VectorRequest {
                identity,
                serving_network,
            },
        ) => {
            let imsi = match home_resolve(c, h, &identity) {
                Ok(i) => i,
                Err(e) => return Ok(home_reject(c, e.to_string())),
            };
            let record = h.store.get(&imsi)?;
            if !record.generations.contains(&v) {
                return Ok(home_reject(c, format!("{imsi} is not subscribed to {v}")));
            }
            c.peer_identity = Some(record.supi.clone());
            h.imsi = Some(imsi.clone());
            match home_issue(c, h, &imsi, serving_network.as_ref()) {
                Ok(out) => Ok(out),
                Err(e @ (Error::Domain(_) | Error::SqnExhausted(_) | Error::NotFound(_))) => {
                    Ok(home_reject(c, e.to_string()))
                }
                Err(e) => Err(e),
            }
        }
        (Phase::AwaitingReport | Phase::AwaitingConfirm, AkaMessage::AuthResult { code, .. }) => {
            // Serving-terminated variants: the report is taken on trust.
            if code == ResultCode::Success && c.phase == Phase::AwaitingConfirm {
                return Err(Error::Domain(
                    "5G AKA success needs RES*, not a bare report".into(),
                ));
            }
            c.finish(Verdict::from_code(code));
            Ok(vec![])
        }
        (Phase::AwaitingReport | Phase::AwaitingConfirm, AkaMessage::Resync { rand, auts }) => {
            home_resync(c, h, &rand, &auts);
            Ok(vec![])
        }
        (Phase::AwaitingConfirm, AkaMessage::AuthConfirm { res_star }) => {
            let he =
                h.he.as_ref()
                    .expect("HE AV present while awaiting confirmation");
            c.checks.push(Check::ResStarVsXresStar);
            if res_star != he.xres_star {
                c.finish(Verdict::ResMismatch);
                let r = AkaMessage::AuthResult {
                    code: ResultCode::ResMismatch,
                    supi: None,
                    key: None,
                };
                return Ok(vec![(Role::Serving, r)]);
            }
            c.keys = SessionKeys {
                kausf: Some(he.kausf),
                ..Default::default()
            };
            c.finish(Verdict::Success);
            let r = AkaMessage::AuthResult {
                code: ResultCode::Success,
                supi: c.peer_identity.clone(),
                key: None,
            };
            Ok(vec![(Role::Serving, r)])
        }
        (Phase::AwaitingEapResponse, AkaMessage::EapResponse(p)) => home_eap_response(c, h, p),
        (_, other) => Err(unexpected(c, from, &other)),
    }
}

fn home_issue(
    c: &mut Common,
    h: &mut HomeState,
    imsi: &Imsi,
    sn: Option<&ServingNetworkId>,
) -> Result<Outbox> {
    let v = c.variant;
    let need = |kind: &str| -> Result<&ServingNetworkId> {
        sn.filter(|n| n.kind() == kind).ok_or_else(|| {
            Error::Domain(format!(
                "{v} vector request without a {kind} serving network"
            ))
        })
    };
    let vector = match v {
        Variant::Gsm => ServingVector::Triplet(h.factory.gen_triplet(&h.store, imsi)?),
        Variant::Umts | Variant::EcGsmIot => {
            ServingVector::Quintet(h.factory.gen_quintet(&mut h.store, imsi)?)
        }
        Variant::Eps => {
            ServingVector::Eps(h.factory.gen_eps_av(&mut h.store, imsi, need("snid")?)?)
        }
        Variant::FiveGAka => {
            let he = h.factory.gen_5g_he_av(&mut h.store, imsi, need("snn")?)?;
            let se = reduce_to_se_av(&he)?;
            h.rand = Some(he.rand);
            h.he = Some(he);
            c.phase = Phase::AwaitingConfirm;
            return Ok(vec![(
                Role::Serving,
                AkaMessage::VectorResponse(ServingVector::FiveGSe(se)),
            )]);
        }
        Variant::EapAka | Variant::EapAkaPrime | Variant::FiveGEapAkaPrime => {
            let (ev, name) = match v {
                Variant::EapAka => (EapVariant::EapAka, None),
                Variant::EapAkaPrime => (EapVariant::EapAkaPrime, Some(need("ani")?)),
                _ => (EapVariant::EapAkaPrime, Some(need("snn")?)),
            };
            let av = h.factory.gen_eap_material(&mut h.store, imsi, ev, name)?;
            let payload = EapPayload::Challenge {
                rand: av.rand,
                autn: av.autn,
                kdf_input: av.net_name.as_ref().map(|n| n.as_bytes().to_vec()),
            };
            h.rand = Some(av.rand);
            h.eap = Some(av);
            c.phase = Phase::AwaitingEapResponse;
            return Ok(vec![(
                Role::Serving,
                AkaMessage::EapRequest {
                    payload,
                    abba: None,
                },
            )]);
        }
    };
    h.rand = Some(vector_rand(&vector));
    c.phase = Phase::AwaitingReport;
    Ok(vec![(Role::Serving, AkaMessage::VectorResponse(vector))])
}

fn home_resync(c: &mut Common, h: &mut HomeState, rand: &Rand, auts: &[u8; 14]) {
    c.checks.push(Check::Auts);
    let imsi = h
        .imsi
        .clone()
        .expect("subscriber resolved before any vector was issued");
    if h.rand.as_ref() != Some(rand) {
        c.note = Some("resync RAND does not match the issued challenge".into());
        c.finish(Verdict::AuthReject);
        return;
    }
    match h.store.resynchronize(&imsi, rand, auts) {
        Ok(()) => c.finish(Verdict::SyncFailure),
        Err(e) => {
            c.note = Some(e.to_string());
            c.finish(Verdict::AuthReject);
        }
    }
}

fn home_eap_response(c: &mut Common, h: &mut HomeState, p: EapPayload) -> Result<Outbox> {
    let result = |code: ResultCode, supi: Option<String>, key: Option<Vec<u8>>| {
        vec![(Role::Serving, AkaMessage::AuthResult { code, supi, key })]
    };
    let av = h
        .eap
        .clone()
        .expect("EAP AV present while awaiting response");
    match p {
        EapPayload::ChallengeResponse { res } => {
            c.checks.push(Check::ResVsXres);
            if res != av.xres {
                c.finish(Verdict::ResMismatch);
                return Ok(result(ResultCode::ResMismatch, None, None));
            }
            let (mine, to_serving) = match (c.variant, &av.keys) {
                (Variant::FiveGEapAkaPrime, EapKeyBlock::AkaPrime(k)) => {
                    let kausf: Key256 = k.emsk[..32].try_into().unwrap();
                    let snn = av
                        .net_name
                        .as_ref()
                        .expect("5G EAP-AKA' AV carries the SNN");
                    let kseaf = derive_kseaf(&kausf, snn)?;
                    (
                        SessionKeys {
                            kausf: Some(kausf),
                            ..Default::default()
                        },
                        kseaf.to_vec(),
                    )
                }
                (_, keys) => (
                    SessionKeys {
                        emsk: Some(*keys.emsk()),
                        ..Default::default()
                    },
                    keys.msk().to_vec(),
                ),
            };
            c.keys = mine;
            c.finish(Verdict::Success);
            Ok(result(
                ResultCode::Success,
                c.peer_identity.clone(),
                Some(to_serving),
            ))
        }
        EapPayload::SyncFailure { auts } => {
            home_resync(c, h, &av.rand, &auts);
            let code = if c.phase == Phase::Terminal(Verdict::SyncFailure) {
                ResultCode::SyncFailure
            } else {
                ResultCode::Rejected
            };
            Ok(result(code, None, None))
        }
        EapPayload::ClientReject { cause } => {
            c.reject_cause = Some(cause);
            c.finish(Verdict::ResMismatch);
            Ok(result(ResultCode::ResMismatch, None, None))
        }
        other => Err(Error::Domain(format!(
            "unexpected EAP payload {other:?} at home"
        ))),
    }
}
