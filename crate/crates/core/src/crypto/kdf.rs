//! The 3GPP generic key derivation function and the 4G/5G key hierarchy built on it.
//!
//! `KDF(key, S) = HMAC-SHA-256(key, FC || P0 || L0 || P1 || L1 || ...)` where each
//! `Li` is the 16-bit big-endian length of `Pi`.

use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};

use super::types::{Key128, Key256, Key512, Rand, ServingNetworkId};
use crate::error::{Error, Result};

type HmacSha256 = Hmac<Sha256>;

/// FC code registry. One code per derivation.
pub mod fc {
    /// KASME from CK||IK, SNID and SQN^AK.
    pub const KASME: u8 = 0x10;
    /// CK'||IK' from CK||IK, access network name and SQN^AK.
    pub const CK_IK_PRIME: u8 = 0x20;
    /// Kc128||Ki128 from CK||IK (EC-GSM-IoT).
    pub const KC128_KI128: u8 = 0x32;
    /// KAUSF from CK||IK, SNN and SQN^AK (5G AKA).
    pub const KAUSF: u8 = 0x6a;
    /// RES*/XRES* from CK||IK, SNN, RAND and RES.
    pub const RES_STAR: u8 = 0x6b;
    /// KSEAF from KAUSF and SNN.
    pub const KSEAF: u8 = 0x6c;
    /// KAMF from KSEAF, SUPI and ABBA.
    pub const KAMF: u8 = 0x6d;

    pub const ALL: [(&str, u8); 7] = [
        ("kasme", KASME),
        ("ck_ik_prime", CK_IK_PRIME),
        ("kc128_ki128", KC128_KI128),
        ("kausf", KAUSF),
        ("res_star", RES_STAR),
        ("kseaf", KSEAF),
        ("kamf", KAMF),
    ];
}

pub fn kdf(key: &[u8], fc: u8, params: &[&[u8]]) -> Result<Key256> {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(&[fc]);
    for p in params {
        let len = u16::try_from(p.len()).map_err(|_| {
            Error::MalformedInput(format!("KDF parameter of {} octets exceeds 65535", p.len()))
        })?;
        mac.update(p);
        mac.update(&len.to_be_bytes());
    }
    Ok(mac.finalize().into_bytes().into())
}

fn ck_ik(ck: &Key128, ik: &Key128) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(ck);
    key[16..].copy_from_slice(ik);
    key
}

fn split(out: Key256) -> (Key128, Key128) {
    (out[..16].try_into().unwrap(), out[16..].try_into().unwrap())
}

pub fn derive_kasme(
    ck: &Key128,
    ik: &Key128,
    snid: &ServingNetworkId,
    sqn_xor_ak: &[u8; 6],
) -> Result<Key256> {
    let ServingNetworkId::Snid(snid) = snid else {
        return Err(Error::Domain(format!(
            "KASME needs a 4G SNID, got {}",
            snid.kind()
        )));
    };
    kdf(&ck_ik(ck, ik), fc::KASME, &[snid, sqn_xor_ak])
}

pub fn derive_ck_ik_prime(
    ck: &Key128,
    ik: &Key128,
    net_name: &ServingNetworkId,
    sqn_xor_ak: &[u8; 6],
) -> Result<(Key128, Key128)> {
    let name = match net_name {
        ServingNetworkId::Ani(n) | ServingNetworkId::Snn(n) => n,
        ServingNetworkId::Snid(_) => {
            return Err(Error::Domain(
                "CK'/IK' need an access network name or SNN".into(),
            ))
        }
    };
    Ok(split(kdf(
        &ck_ik(ck, ik),
        fc::CK_IK_PRIME,
        &[name, sqn_xor_ak],
    )?))
}

/// RES* (UE) or XRES* (home network); the low 128 bits of the KDF output.
pub fn derive_res_star(
    ck: &Key128,
    ik: &Key128,
    snn: &ServingNetworkId,
    rand: &Rand,
    res: &[u8],
) -> Result<Key128> {
    let ServingNetworkId::Snn(snn) = snn else {
        return Err(Error::Domain(format!(
            "RES* needs an SNN, got {}",
            snn.kind()
        )));
    };
    Ok(split(kdf(&ck_ik(ck, ik), fc::RES_STAR, &[snn, rand, res])?).1)
}

/// HRES*/HXRES*: the low 128 bits of SHA-256(RAND || RES*).
pub fn derive_hres_star(rand: &Rand, res_star: &Key128) -> Key128 {
    let digest: [u8; 32] = Sha256::new()
        .chain_update(rand)
        .chain_update(res_star)
        .finalize()
        .into();
    split(digest).1
}

pub fn kc128_ki128(ck: &Key128, ik: &Key128) -> (Key128, Key128) {
    split(kdf(&ck_ik(ck, ik), fc::KC128_KI128, &[]).expect("no parameters"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiveGMode {
    FiveGAka,
    FiveGEapAkaPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiveGKeys {
    pub kausf: Key256,
    pub kseaf: Key256,
    pub kamf: Key256,
}

pub fn derive_kseaf(kausf: &Key256, snn: &ServingNetworkId) -> Result<Key256> {
    let ServingNetworkId::Snn(snn) = snn else {
        return Err(Error::Domain(format!(
            "KSEAF needs an SNN, got {}",
            snn.kind()
        )));
    };
    kdf(kausf, fc::KSEAF, &[snn])
}

pub fn derive_kamf(kseaf: &Key256, supi: &[u8], abba: &[u8]) -> Result<Key256> {
    kdf(kseaf, fc::KAMF, &[supi, abba])
}

/// The 5G anchor chain. In EAP-AKA' mode KAUSF is the leading 256 bits of EMSK;
/// in 5G AKA mode it is derived from CK||IK.
#[allow(clippy::too_many_arguments)]
pub fn derive_kausf_kseaf_kamf(
    ck: &Key128,
    ik: &Key128,
    snn: &ServingNetworkId,
    sqn_xor_ak: &[u8; 6],
    supi: &[u8],
    abba: &[u8],
    mode: FiveGMode,
    emsk: Option<&Key512>,
) -> Result<FiveGKeys> {
    let ServingNetworkId::Snn(name) = snn else {
        return Err(Error::Domain(format!(
            "5G anchor keys need an SNN, got {}",
            snn.kind()
        )));
    };
    let kausf = match (mode, emsk) {
        (FiveGMode::FiveGAka, _) => kdf(&ck_ik(ck, ik), fc::KAUSF, &[name, sqn_xor_ak])?,
        (FiveGMode::FiveGEapAkaPrime, Some(emsk)) => emsk[..32].try_into().unwrap(),
        (FiveGMode::FiveGEapAkaPrime, None) => {
            return Err(Error::Domain("5G EAP-AKA' KAUSF requires EMSK".into()))
        }
    };
    let kseaf = derive_kseaf(&kausf, snn)?;
    let kamf = derive_kamf(&kseaf, supi, abba)?;
    Ok(FiveGKeys { kausf, kseaf, kamf })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snn() -> ServingNetworkId {
        ServingNetworkId::snn("5G:mnc015.mcc234.3gppnetwork.org").unwrap()
    }

    #[test]
    fn empty_params_allowed() {
        assert_eq!(kdf(b"key", 0x10, &[]).unwrap().len(), 32);
    }

    #[test]
    fn oversized_param_rejected() {
        let big = vec![0u8; 65536];
        assert!(matches!(
            kdf(b"k", 1, &[&big]),
            Err(Error::MalformedInput(_))
        ));
        assert!(kdf(b"k", 1, &[&big[..65535]]).is_ok());
    }

    #[test]
    fn fc_codes_distinct() {
        let mut codes: Vec<u8> = fc::ALL.iter().map(|(_, c)| *c).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), fc::ALL.len());
    }

    #[test]
    fn variant_checks() {
        let ani = ServingNetworkId::ani("WLAN").unwrap();
        let snid = ServingNetworkId::Snid([0x32, 0xf4, 0x51]);
        assert!(matches!(
            derive_kasme(&[0; 16], &[0; 16], &ani, &[0; 6]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            derive_ck_ik_prime(&[0; 16], &[0; 16], &snid, &[0; 6]),
            Err(Error::Domain(_))
        ));
        assert!(derive_ck_ik_prime(&[0; 16], &[0; 16], &snn(), &[0; 6]).is_ok());
        assert!(matches!(
            derive_res_star(&[0; 16], &[0; 16], &ani, &[0; 16], &[0; 8]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eap_mode_needs_emsk() {
        let r = derive_kausf_kseaf_kamf(
            &[1; 16],
            &[2; 16],
            &snn(),
            &[0; 6],
            b"001010123456789",
            &[0, 0],
            FiveGMode::FiveGEapAkaPrime,
            None,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn abba_binds_kamf() {
        let k = |abba: &[u8]| {
            derive_kausf_kseaf_kamf(
                &[1; 16],
                &[2; 16],
                &snn(),
                &[0; 6],
                b"001010123456789",
                abba,
                FiveGMode::FiveGAka,
                None,
            )
            .unwrap()
        };
        let (a, b) = (k(&[0, 0]), k(&[0, 1]));
        assert_eq!((a.kausf, a.kseaf), (b.kausf, b.kseaf));
        assert_ne!(a.kamf, b.kamf);
    }
}
