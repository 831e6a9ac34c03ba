//! Resynchronization token `AUTS = (SQN_MS ^ AK*) || MAC-S`, with AMF* fixed to zero.

use super::milenage::milenage;
use super::types::{xor, Rand, RootKey, Sqn};
use crate::error::{Error, Result};

pub const AUTS_LEN: usize = 14;

/// AMF value used for MAC-S computation.
pub const RESYNC_AMF: [u8; 2] = [0, 0];

pub fn build_auts(root: &RootKey, rand: &Rand, sqn_ms: Sqn) -> [u8; AUTS_LEN] {
    let out = milenage(root, rand, sqn_ms, RESYNC_AMF);
    let mut auts = [0u8; AUTS_LEN];
    auts[..6].copy_from_slice(&xor(&sqn_ms.to_bytes(), &out.ak_s));
    auts[6..].copy_from_slice(&out.mac_s);
    auts
}

/// Recovers SQN_MS and checks MAC-S.
pub fn verify_auts(root: &RootKey, rand: &Rand, auts: &[u8; AUTS_LEN]) -> Result<Sqn> {
    // f5* does not depend on SQN
    let ak_s = milenage(root, rand, Sqn::default(), RESYNC_AMF).ak_s;
    let sqn_ms = Sqn::from_bytes(xor(&auts[..6].try_into().unwrap(), &ak_s));
    let expected = milenage(root, rand, sqn_ms, RESYNC_AMF).mac_s;
    if expected != auts[6..] {
        return Err(Error::Integrity("AUTS MAC-S mismatch".into()));
    }
    Ok(sqn_ms)
}
