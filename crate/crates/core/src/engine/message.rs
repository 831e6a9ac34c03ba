//! Typed protocol messages and their canonical byte form.
//!
//! The byte form is a flat TLV list (`tag:u8 | len:u16be | value`) with fields
//! in a fixed order per message kind. The kind itself travels beside the
//! payload (see the transcript format), not inside it.

use std::fmt;

use crate::crypto::{Autn, Key128, Key256, Key64, Rand, ServingNetworkId, SuciEnvelope, AUTS_LEN};
use crate::error::{Error, Result};
use crate::vectors::{EpsAv, FiveGSeAv, GsmTriplet, UmtsQuintet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Ue,
    Serving,
    Home,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Ue, Role::Serving, Role::Home];

    pub fn name(self) -> &'static str {
        match self {
            Role::Ue => "ue",
            Role::Serving => "serving",
            Role::Home => "home",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::MalformedInput(format!("unknown role '{s}'")))
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Link {
    /// UE to serving network: the only link an outside attacker can reach.
    Radio,
    /// Serving network to home network.
    Core,
}

impl Link {
    pub fn between(a: Role, b: Role) -> Link {
        if a == Role::Ue || b == Role::Ue {
            Link::Radio
        } else {
            Link::Core
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MobileIdentity {
    Imsi(String),
    Suci(SuciEnvelope),
}

/// Why a UE refused a challenge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FailureCause {
    MacFailure,
    /// AMF bit 0 was not set for a service that requires it.
    AmfSeparation,
    /// EAP-AKA' network name differs from the one the UE is attached to.
    NetworkNameMismatch,
}

impl FailureCause {
    fn code(self) -> u8 {
        match self {
            Self::MacFailure => 1,
            Self::AmfSeparation => 2,
            Self::NetworkNameMismatch => 3,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            1 => Self::MacFailure,
            2 => Self::AmfSeparation,
            3 => Self::NetworkNameMismatch,
            _ => return Err(Error::MalformedInput(format!("failure cause {c}"))),
        })
    }
}

/// Outcome carried in `auth_result`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResultCode {
    Success,
    ResMismatch,
    SyncFailure,
    Rejected,
}

impl ResultCode {
    fn code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::ResMismatch => 1,
            Self::SyncFailure => 2,
            Self::Rejected => 3,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            0 => Self::Success,
            1 => Self::ResMismatch,
            2 => Self::SyncFailure,
            3 => Self::Rejected,
            _ => return Err(Error::MalformedInput(format!("result code {c}"))),
        })
    }
}

/// Vectors the home network may hand to a serving network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ServingVector {
    Triplet(GsmTriplet),
    Quintet(UmtsQuintet),
    Eps(EpsAv),
    FiveGSe(FiveGSeAv),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EapPayload {
    Challenge {
        rand: Rand,
        autn: Autn,
        kdf_input: Option<Vec<u8>>,
    },
    ChallengeResponse {
        res: Vec<u8>,
    },
    SyncFailure {
        auts: [u8; AUTS_LEN],
    },
    ClientReject {
        cause: FailureCause,
    },
    Success,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AkaMessage {
    Identity(MobileIdentity),
    VectorRequest {
        identity: MobileIdentity,
        serving_network: Option<ServingNetworkId>,
    },
    VectorResponse(ServingVector),
    AuthRequest {
        rand: Rand,
        autn: Option<Autn>,
        abba: Option<Vec<u8>>,
    },
    AuthResponse {
        res: Vec<u8>,
    },
    AuthFailure {
        cause: FailureCause,
    },
    AuthConfirm {
        res_star: Key128,
    },
    AuthResult {
        code: ResultCode,
        supi: Option<String>,
        key: Option<Vec<u8>>,
    },
    Resync {
        rand: Rand,
        auts: [u8; AUTS_LEN],
    },
    EapRequest {
        payload: EapPayload,
        abba: Option<Vec<u8>>,
    },
    EapResponse(EapPayload),
}

mod tag {
    pub const IMSI: u8 = 0x01;
    pub const SUCI: u8 = 0x02;
    pub const NETWORK: u8 = 0x03;
    pub const AV_KIND: u8 = 0x04;
    pub const RAND: u8 = 0x10;
    pub const AUTN: u8 = 0x11;
    pub const XRES: u8 = 0x12;
    pub const KC: u8 = 0x13;
    pub const CK: u8 = 0x14;
    pub const IK: u8 = 0x15;
    pub const KASME: u8 = 0x16;
    pub const HXRES_STAR: u8 = 0x17;
    pub const KSEAF: u8 = 0x18;
    pub const ABBA: u8 = 0x20;
    pub const RES: u8 = 0x21;
    pub const CAUSE: u8 = 0x22;
    pub const RES_STAR: u8 = 0x23;
    pub const RESULT: u8 = 0x24;
    pub const SUPI: u8 = 0x25;
    pub const KEY: u8 = 0x26;
    pub const AUTS: u8 = 0x27;
    pub const EAP_CODE: u8 = 0x30;
    pub const KDF_INPUT: u8 = 0x31;
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn put(&mut self, tag: u8, value: &[u8]) -> &mut Self {
        self.0.push(tag);
        self.0
            .extend_from_slice(&(value.len() as u16).to_be_bytes());
        self.0.extend_from_slice(value);
        self
    }

    fn opt(&mut self, tag: u8, value: Option<&[u8]>) -> &mut Self {
        if let Some(v) = value {
            self.put(tag, v);
        }
        self
    }

    fn identity(&mut self, id: &MobileIdentity) -> &mut Self {
        match id {
            MobileIdentity::Imsi(s) => self.put(tag::IMSI, s.as_bytes()),
            MobileIdentity::Suci(env) => self.put(tag::SUCI, &env.to_bytes()),
        }
    }

    fn network(&mut self, sn: &ServingNetworkId) -> &mut Self {
        let kind = match sn {
            ServingNetworkId::Snid(_) => 0u8,
            ServingNetworkId::Ani(_) => 1,
            ServingNetworkId::Snn(_) => 2,
        };
        self.put(tag::NETWORK, &[&[kind], sn.as_bytes()].concat())
    }
}

struct Reader<'a> {
    fields: Vec<(u8, &'a [u8])>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(b: &'a [u8]) -> Result<Self> {
        let mut fields = Vec::new();
        let mut rest = b;
        while !rest.is_empty() {
            if rest.len() < 3 {
                return Err(Error::MalformedInput("truncated TLV header".into()));
            }
            let len = u16::from_be_bytes([rest[1], rest[2]]) as usize;
            let value = rest
                .get(3..3 + len)
                .ok_or_else(|| Error::MalformedInput("truncated TLV value".into()))?;
            fields.push((rest[0], value));
            rest = &rest[3 + len..];
        }
        Ok(Self { fields, pos: 0 })
    }

    fn peek(&self) -> Option<u8> {
        self.fields.get(self.pos).map(|f| f.0)
    }

    fn opt(&mut self, t: u8) -> Option<&'a [u8]> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Some(self.fields[self.pos - 1].1)
        } else {
            None
        }
    }

    fn req(&mut self, t: u8) -> Result<&'a [u8]> {
        self.opt(t)
            .ok_or_else(|| Error::MalformedInput(format!("missing field {t:#04x}")))
    }

    fn fixed<const N: usize>(&mut self, t: u8) -> Result<[u8; N]> {
        crate::crypto::types::fixed(self.req(t)?, "message field")
    }

    fn opt_fixed<const N: usize>(&mut self, t: u8) -> Result<Option<[u8; N]>> {
        self.opt(t)
            .map(|v| crate::crypto::types::fixed(v, "message field"))
            .transpose()
    }

    fn byte(&mut self, t: u8) -> Result<u8> {
        Ok(self.fixed::<1>(t)?[0])
    }

    fn string(&mut self, t: u8) -> Result<String> {
        String::from_utf8(self.req(t)?.to_vec())
            .map_err(|_| Error::MalformedInput("non-UTF-8 identifier".into()))
    }

    fn identity(&mut self) -> Result<MobileIdentity> {
        if let Some(v) = self.opt(tag::IMSI) {
            let s = String::from_utf8(v.to_vec())
                .map_err(|_| Error::MalformedInput("non-UTF-8 IMSI".into()))?;
            return Ok(MobileIdentity::Imsi(s));
        }
        Ok(MobileIdentity::Suci(SuciEnvelope::from_bytes(
            self.req(tag::SUCI)?,
        )?))
    }

    fn network(&mut self) -> Result<Option<ServingNetworkId>> {
        let Some(v) = self.opt(tag::NETWORK) else {
            return Ok(None);
        };
        let (kind, body) = v
            .split_first()
            .ok_or_else(|| Error::MalformedInput("empty network field".into()))?;
        Ok(Some(match kind {
            0 => ServingNetworkId::snid_from_slice(body)?,
            1 => ServingNetworkId::ani(body.to_vec())?,
            2 => ServingNetworkId::snn(body.to_vec())?,
            k => return Err(Error::MalformedInput(format!("network kind {k}"))),
        }))
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.fields.len() {
            return Err(Error::MalformedInput("unexpected trailing fields".into()));
        }
        Ok(())
    }
}

fn encode_eap(w: &mut Writer, p: &EapPayload) {
    match p {
        EapPayload::Challenge {
            rand,
            autn,
            kdf_input,
        } => {
            w.put(tag::EAP_CODE, &[1])
                .put(tag::RAND, rand)
                .put(tag::AUTN, &autn.0);
            w.opt(tag::KDF_INPUT, kdf_input.as_deref());
        }
        EapPayload::ChallengeResponse { res } => {
            w.put(tag::EAP_CODE, &[2]).put(tag::RES, res);
        }
        EapPayload::SyncFailure { auts } => {
            w.put(tag::EAP_CODE, &[3]).put(tag::AUTS, auts);
        }
        EapPayload::ClientReject { cause } => {
            w.put(tag::EAP_CODE, &[4]).put(tag::CAUSE, &[cause.code()]);
        }
        EapPayload::Success => {
            w.put(tag::EAP_CODE, &[5]);
        }
        EapPayload::Failure => {
            w.put(tag::EAP_CODE, &[6]);
        }
    }
}

fn decode_eap(r: &mut Reader) -> Result<EapPayload> {
    Ok(match r.byte(tag::EAP_CODE)? {
        1 => EapPayload::Challenge {
            rand: r.fixed(tag::RAND)?,
            autn: Autn(r.fixed(tag::AUTN)?),
            kdf_input: r.opt(tag::KDF_INPUT).map(<[u8]>::to_vec),
        },
        2 => EapPayload::ChallengeResponse {
            res: r.req(tag::RES)?.to_vec(),
        },
        3 => EapPayload::SyncFailure {
            auts: r.fixed(tag::AUTS)?,
        },
        4 => EapPayload::ClientReject {
            cause: FailureCause::from_code(r.byte(tag::CAUSE)?)?,
        },
        5 => EapPayload::Success,
        6 => EapPayload::Failure,
        c => return Err(Error::MalformedInput(format!("EAP code {c}"))),
    })
}

impl AkaMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Identity(_) => "identity",
            Self::VectorRequest { .. } => "vector_request",
            Self::VectorResponse(_) => "vector_response",
            Self::AuthRequest { .. } => "auth_request",
            Self::AuthResponse { .. } => "auth_response",
            Self::AuthFailure { .. } => "auth_failure",
            Self::AuthConfirm { .. } => "auth_confirm",
            Self::AuthResult { .. } => "auth_result",
            Self::Resync { .. } => "resync",
            Self::EapRequest { .. } => "eap_request",
            Self::EapResponse(_) => "eap_response",
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        let mut w = Writer::default();
        match self {
            Self::Identity(id) => {
                w.identity(id);
            }
            Self::VectorRequest {
                identity,
                serving_network,
            } => {
                w.identity(identity);
                if let Some(sn) = serving_network {
                    w.network(sn);
                }
            }
            Self::VectorResponse(v) => match v {
                ServingVector::Triplet(t) => {
                    w.put(tag::AV_KIND, &[0])
                        .put(tag::RAND, &t.rand)
                        .put(tag::XRES, &t.xres);
                    w.put(tag::KC, &t.kc);
                }
                ServingVector::Quintet(q) => {
                    w.put(tag::AV_KIND, &[1])
                        .put(tag::RAND, &q.rand)
                        .put(tag::XRES, &q.xres);
                    w.put(tag::CK, &q.ck)
                        .put(tag::IK, &q.ik)
                        .put(tag::AUTN, &q.autn.0);
                }
                ServingVector::Eps(e) => {
                    w.put(tag::AV_KIND, &[2])
                        .put(tag::RAND, &e.rand)
                        .put(tag::XRES, &e.xres);
                    w.put(tag::AUTN, &e.autn.0)
                        .put(tag::KASME, &e.kasme)
                        .network(&e.snid);
                }
                ServingVector::FiveGSe(s) => {
                    w.put(tag::AV_KIND, &[3])
                        .put(tag::RAND, &s.rand)
                        .put(tag::AUTN, &s.autn.0);
                    w.put(tag::HXRES_STAR, &s.hxres_star)
                        .put(tag::KSEAF, &s.kseaf);
                }
            },
            Self::AuthRequest { rand, autn, abba } => {
                w.put(tag::RAND, rand);
                w.opt(tag::AUTN, autn.as_ref().map(|a| a.0.as_slice()));
                w.opt(tag::ABBA, abba.as_deref());
            }
            Self::AuthResponse { res } => {
                w.put(tag::RES, res);
            }
            Self::AuthFailure { cause } => {
                w.put(tag::CAUSE, &[cause.code()]);
            }
            Self::AuthConfirm { res_star } => {
                w.put(tag::RES_STAR, res_star);
            }
            Self::AuthResult { code, supi, key } => {
                w.put(tag::RESULT, &[code.code()]);
                w.opt(tag::SUPI, supi.as_ref().map(String::as_bytes));
                w.opt(tag::KEY, key.as_deref());
            }
            Self::Resync { rand, auts } => {
                w.put(tag::RAND, rand).put(tag::AUTS, auts);
            }
            Self::EapRequest { payload, abba } => {
                encode_eap(&mut w, payload);
                w.opt(tag::ABBA, abba.as_deref());
            }
            Self::EapResponse(p) => encode_eap(&mut w, p),
        }
        w.0
    }

    pub fn decode(kind: &str, payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload)?;
        let msg = match kind {
            "identity" => Self::Identity(r.identity()?),
            "vector_request" => Self::VectorRequest {
                identity: r.identity()?,
                serving_network: r.network()?,
            },
            "vector_response" => Self::VectorResponse(match r.byte(tag::AV_KIND)? {
                0 => ServingVector::Triplet(GsmTriplet {
                    rand: r.fixed(tag::RAND)?,
                    xres: r.fixed(tag::XRES)?,
                    kc: r.fixed::<8>(tag::KC)? as Key64,
                }),
                1 => ServingVector::Quintet(UmtsQuintet {
                    rand: r.fixed(tag::RAND)?,
                    xres: r.req(tag::XRES)?.to_vec(),
                    ck: r.fixed(tag::CK)?,
                    ik: r.fixed(tag::IK)?,
                    autn: Autn(r.fixed(tag::AUTN)?),
                }),
                2 => ServingVector::Eps(EpsAv {
                    rand: r.fixed(tag::RAND)?,
                    xres: r.req(tag::XRES)?.to_vec(),
                    autn: Autn(r.fixed(tag::AUTN)?),
                    kasme: r.fixed::<32>(tag::KASME)? as Key256,
                    snid: r
                        .network()?
                        .ok_or_else(|| Error::MalformedInput("EPS AV without SNID".into()))?,
                }),
                3 => ServingVector::FiveGSe(FiveGSeAv {
                    rand: r.fixed(tag::RAND)?,
                    autn: Autn(r.fixed(tag::AUTN)?),
                    hxres_star: r.fixed(tag::HXRES_STAR)?,
                    kseaf: r.fixed(tag::KSEAF)?,
                }),
                k => return Err(Error::MalformedInput(format!("vector kind {k}"))),
            }),
            "auth_request" => Self::AuthRequest {
                rand: r.fixed(tag::RAND)?,
                autn: r.opt_fixed(tag::AUTN)?.map(Autn),
                abba: r.opt(tag::ABBA).map(<[u8]>::to_vec),
            },
            "auth_response" => Self::AuthResponse {
                res: r.req(tag::RES)?.to_vec(),
            },
            "auth_failure" => Self::AuthFailure {
                cause: FailureCause::from_code(r.byte(tag::CAUSE)?)?,
            },
            "auth_confirm" => Self::AuthConfirm {
                res_star: r.fixed(tag::RES_STAR)?,
            },
            "auth_result" => Self::AuthResult {
                code: ResultCode::from_code(r.byte(tag::RESULT)?)?,
                supi: if r.peek() == Some(tag::SUPI) {
                    Some(r.string(tag::SUPI)?)
                } else {
                    None
                },
                key: r.opt(tag::KEY).map(<[u8]>::to_vec),
            },
            "resync" => Self::Resync {
                rand: r.fixed(tag::RAND)?,
                auts: r.fixed(tag::AUTS)?,
            },
            "eap_request" => {
                let payload = decode_eap(&mut r)?;
                Self::EapRequest {
                    payload,
                    abba: r.opt(tag::ABBA).map(<[u8]>::to_vec),
                }
            }
            "eap_response" => Self::EapResponse(decode_eap(&mut r)?),
            other => {
                return Err(Error::MalformedInput(format!(
                    "unknown message kind '{other}'"
                )))
            }
        };
        r.finish()?;
        Ok(msg)
    }

    /// The AUTN carried by a challenge, if this message is one.
    pub fn challenge_autn(&self) -> Option<&Autn> {
        match self {
            Self::AuthRequest { autn, .. } => autn.as_ref(),
            Self::EapRequest {
                payload: EapPayload::Challenge { autn, .. },
                ..
            } => Some(autn),
            _ => None,
        }
    }

    pub fn challenge_autn_mut(&mut self) -> Option<&mut Autn> {
        match self {
            Self::AuthRequest { autn, .. } => autn.as_mut(),
            Self::EapRequest {
                payload: EapPayload::Challenge { autn, .. },
                ..
            } => Some(autn),
            _ => None,
        }
    }

    pub fn challenge_rand_mut(&mut self) -> Option<&mut Rand> {
        match self {
            Self::AuthRequest { rand, .. } => Some(rand),
            Self::EapRequest {
                payload: EapPayload::Challenge { rand, .. },
                ..
            } => Some(rand),
            _ => None,
        }
    }

    pub fn is_challenge(&self) -> bool {
        matches!(
            self,
            Self::AuthRequest { .. }
                | Self::EapRequest {
                    payload: EapPayload::Challenge { .. },
                    ..
                }
        )
    }
}
