//! EAP-AKA (RFC 4187) and EAP-AKA' (RFC 5448) key schedules.

use hmac::{Hmac, Mac};
use sha1::digest::generic_array::GenericArray;
use sha1::{Digest, Sha1};
use sha2::Sha256;

use super::types::{Key128, Key256, Key512};
use crate::error::{Error, Result};

const SHA1_IV: [u32; 5] = [0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476, 0xc3d2e1f0];

/// Method string that seeds the EAP-AKA' PRF.
pub const EAP_AKA_PRIME_METHOD: &[u8] = b"EAP-AKA'";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EapAkaKeys {
    pub k_encr: Key128,
    pub k_aut: Key128,
    pub msk: Key512,
    pub emsk: Key512,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EapAkaPrimeKeys {
    pub k_encr: Key128,
    pub k_aut: Key256,
    pub k_re: Key256,
    pub msk: Key512,
    pub emsk: Key512,
}

/// FIPS 186-2 (change notice 1) PRF with XSEED = 0, as profiled by RFC 4187.
fn fips186_prf(mk: &[u8; 20], out: &mut [u8]) {
    let mut xkey = *mk;
    for chunk in out.chunks_mut(20) {
        let mut block = [0u8; 64];
        block[..20].copy_from_slice(&xkey);
        let mut state = SHA1_IV;
        sha1::compress(&mut state, &[GenericArray::clone_from_slice(&block)]);
        let mut w = [0u8; 20];
        for (dst, word) in w.chunks_mut(4).zip(state) {
            dst.copy_from_slice(&word.to_be_bytes());
        }
        chunk.copy_from_slice(&w[..chunk.len()]);

        // XKEY = (1 + XKEY + w) mod 2^160
        let mut carry = 1u16;
        for i in (0..20).rev() {
            let sum = xkey[i] as u16 + w[i] as u16 + carry;
            xkey[i] = sum as u8;
            carry = sum >> 8;
        }
    }
}

pub fn eap_aka_keys(identity: &[u8], ik: &Key128, ck: &Key128) -> Result<EapAkaKeys> {
    if identity.is_empty() {
        return Err(Error::MalformedInput(
            "EAP identity must not be empty".into(),
        ));
    }
    let mk: [u8; 20] = Sha1::new()
        .chain_update(identity)
        .chain_update(ik)
        .chain_update(ck)
        .finalize()
        .into();
    let mut block = [0u8; 160];
    fips186_prf(&mk, &mut block);
    Ok(EapAkaKeys {
        k_encr: block[0..16].try_into().unwrap(),
        k_aut: block[16..32].try_into().unwrap(),
        msk: block[32..96].try_into().unwrap(),
        emsk: block[96..160].try_into().unwrap(),
    })
}

/// PRF' from RFC 5448: T1 = HMAC(K, S | 0x01), Tn = HMAC(K, Tn-1 | S | n).
fn prf_prime(key: &[u8], seed: &[u8], out: &mut [u8]) {
    let mut prev: Vec<u8> = Vec::new();
    for (i, chunk) in out.chunks_mut(32).enumerate() {
        let mut mac = Hmac::<Sha256>::new_from_slice(key).expect("any key length");
        mac.update(&prev);
        mac.update(seed);
        mac.update(&[(i + 1) as u8]);
        let t = mac.finalize().into_bytes();
        chunk.copy_from_slice(&t[..chunk.len()]);
        prev = t.to_vec();
    }
}

pub fn eap_aka_prime_keys(
    identity: &[u8],
    ik_prime: &Key128,
    ck_prime: &Key128,
) -> Result<EapAkaPrimeKeys> {
    if identity.is_empty() {
        return Err(Error::MalformedInput(
            "EAP identity must not be empty".into(),
        ));
    }
    let key = [ik_prime.as_slice(), ck_prime].concat();
    let seed = [EAP_AKA_PRIME_METHOD, identity].concat();
    let mut block = [0u8; 208];
    prf_prime(&key, &seed, &mut block);
    Ok(EapAkaPrimeKeys {
        k_encr: block[0..16].try_into().unwrap(),
        k_aut: block[16..48].try_into().unwrap(),
        k_re: block[48..80].try_into().unwrap(),
        msk: block[80..144].try_into().unwrap(),
        emsk: block[144..208].try_into().unwrap(),
    })
}
