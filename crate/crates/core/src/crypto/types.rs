//! Fixed-width value types shared by the derivations.

use std::fmt;

use crate::error::{Error, Result};

pub type Rand = [u8; 16];
pub type Key64 = [u8; 8];
pub type Key128 = [u8; 16];
pub type Key256 = [u8; 32];
pub type Key512 = [u8; 64];
pub type Amf = [u8; 2];

/// Bit 0 of the AMF field, counted from the most significant bit.
pub const AMF_SEPARATION_BIT: u16 = 0x8000;

pub(crate) fn fixed<const N: usize>(bytes: &[u8], what: &str) -> Result<[u8; N]> {
    bytes.try_into().map_err(|_| {
        Error::MalformedInput(format!("{what} must be {N} octets, got {}", bytes.len()))
    })
}

pub(crate) fn fixed_hex<const N: usize>(s: &str, what: &str) -> Result<[u8; N]> {
    let raw = hex::decode(s).map_err(|e| Error::MalformedInput(format!("{what}: {e}")))?;
    fixed(&raw, what)
}

/// The long-term subscriber secret: K and the per-subscriber OPc.
///
/// Deliberately has no serializer and a redacting `Debug`. Only the
/// subscriber store and the USIM model hold one.
#[derive(Clone, PartialEq, Eq)]
pub struct RootKey {
    k: Key128,
    op_c: Key128,
}

impl RootKey {
    pub fn new(k: Key128, op_c: Key128) -> Self {
        Self { k, op_c }
    }

    pub fn from_slices(k: &[u8], op_c: &[u8]) -> Result<Self> {
        Ok(Self::new(fixed(k, "K")?, fixed(op_c, "OPc")?))
    }

    pub fn from_hex(k: &str, op_c: &str) -> Result<Self> {
        Ok(Self::new(fixed_hex(k, "K")?, fixed_hex(op_c, "OPc")?))
    }

    pub(crate) fn k(&self) -> &Key128 {
        &self.k
    }

    pub(crate) fn op_c(&self) -> &Key128 {
        &self.op_c
    }

    /// True if either half of the key occurs anywhere in `haystack`.
    ///
    /// Used by the harness to prove that adversaries never hold key material.
    pub fn appears_in(&self, haystack: &[u8]) -> bool {
        haystack.windows(16).any(|w| w == self.k || w == self.op_c)
    }
}

impl fmt::Debug for RootKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RootKey(<redacted>)")
    }
}

/// A 48-bit sequence number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Sqn(u64);

impl Sqn {
    pub const MAX: u64 = (1 << 48) - 1;

    pub fn new(value: u64) -> Result<Self> {
        if value > Self::MAX {
            return Err(Error::MalformedInput(format!(
                "SQN {value:#x} exceeds 48 bits"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn to_bytes(self) -> [u8; 6] {
        let b = self.0.to_be_bytes();
        [b[2], b[3], b[4], b[5], b[6], b[7]]
    }

    pub fn from_bytes(b: [u8; 6]) -> Self {
        Self(u64::from_be_bytes([
            0, 0, b[0], b[1], b[2], b[3], b[4], b[5],
        ]))
    }
}

pub(crate) fn xor<const N: usize>(a: &[u8; N], b: &[u8; N]) -> [u8; N] {
    let mut out = [0u8; N];
    for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b)) {
        *o = x ^ y;
    }
    out
}

/// Network authentication token: `SQN^AK || AMF || MAC-A`, big-endian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Autn(pub [u8; 16]);

impl Autn {
    pub fn assemble(sqn_xor_ak: [u8; 6], amf: Amf, mac_a: [u8; 8]) -> Self {
        let mut b = [0u8; 16];
        b[..6].copy_from_slice(&sqn_xor_ak);
        b[6..8].copy_from_slice(&amf);
        b[8..].copy_from_slice(&mac_a);
        Self(b)
    }

    pub fn sqn_xor_ak(&self) -> [u8; 6] {
        self.0[..6].try_into().unwrap()
    }

    pub fn amf(&self) -> Amf {
        [self.0[6], self.0[7]]
    }

    pub fn mac(&self) -> [u8; 8] {
        self.0[8..].try_into().unwrap()
    }

    pub fn separation_bit(&self) -> bool {
        u16::from_be_bytes(self.amf()) & AMF_SEPARATION_BIT != 0
    }
}

/// Challenge material the UE receives: RAND plus AUTN from 3G onwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Challenge {
    pub rand: Rand,
    pub autn: Option<Autn>,
}

/// Serving-network binding input.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ServingNetworkId {
    /// 4G SNID: PLMN identity, three octets.
    Snid([u8; 3]),
    /// Access network identity (4G trusted non-3GPP access).
    Ani(Vec<u8>),
    /// 5G serving network name, `5G:<network identifier>`.
    Snn(Vec<u8>),
}

impl ServingNetworkId {
    /// Packs MCC/MNC digits into the three-octet BCD PLMN encoding.
    pub fn snid_from_plmn(mcc: &str, mnc: &str) -> Result<Self> {
        let digits = |s: &str| -> Result<Vec<u8>> {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::MalformedInput(format!("non-digit in PLMN: {s}")))
                })
                .collect()
        };
        let mcc = digits(mcc)?;
        let mnc = digits(mnc)?;
        if mcc.len() != 3 || !(2..=3).contains(&mnc.len()) {
            return Err(Error::MalformedInput(
                "PLMN needs 3-digit MCC and 2-3 digit MNC".into(),
            ));
        }
        let mnc3 = mnc.get(2).copied().unwrap_or(0xf);
        Ok(Self::Snid([
            (mcc[1] << 4) | mcc[0],
            (mnc3 << 4) | mcc[2],
            (mnc[1] << 4) | mnc[0],
        ]))
    }

    pub fn snid_from_slice(b: &[u8]) -> Result<Self> {
        Ok(Self::Snid(fixed(b, "SNID")?))
    }

    pub fn ani(name: impl Into<Vec<u8>>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::MalformedInput(
                "empty access network identity".into(),
            ));
        }
        Ok(Self::Ani(name))
    }

    /// Validates the `5G:` service-code prefix.
    pub fn snn(name: impl Into<Vec<u8>>) -> Result<Self> {
        let name = name.into();
        if name.len() <= 3 || !name.starts_with(b"5G:") {
            return Err(Error::MalformedInput(
                "serving network name must be \"5G:\" followed by a network identifier".into(),
            ));
        }
        Ok(Self::Snn(name))
    }

    /// Builds the SNN for a PLMN in the usual `5G:mncXXX.mccYYY.3gppnetwork.org` form.
    pub fn snn_for_plmn(mcc: &str, mnc: &str) -> Result<Self> {
        Self::snn(format!("5G:mnc{mnc:0>3}.mcc{mcc}.3gppnetwork.org"))
    }

    pub fn as_bytes(&self) -> &[u8] {
        match self {
            Self::Snid(b) => b,
            Self::Ani(b) | Self::Snn(b) => b,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Snid(_) => "snid",
            Self::Ani(_) => "ani",
            Self::Snn(_) => "snn",
        }
    }
}

impl fmt::Display for ServingNetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Snid(b) => write!(f, "snid:{}", hex::encode(b)),
            Self::Ani(b) => write!(f, "ani:{}", String::from_utf8_lossy(b)),
            Self::Snn(b) => write!(f, "snn:{}", String::from_utf8_lossy(b)),
        }
    }
}
