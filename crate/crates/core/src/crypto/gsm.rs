//! 2G A3/A8. The operator picks the algorithm; the default is the 3G-to-2G
//! conversion on top of MILENAGE (c2 for SRES, c3 for Kc).

use std::sync::Arc;

use super::milenage::milenage;
use super::types::{xor, Key128, Key64, Rand, RootKey, Sqn};

pub trait A3A8: Send + Sync {
    /// Returns `(SRES, Kc)`.
    fn derive(&self, root: &RootKey, rand: &Rand) -> ([u8; 4], Key64);
}

/// A3/A8 built from MILENAGE outputs via the c2/c3 conversion functions.
#[derive(Clone, Copy, Debug, Default)]
pub struct MilenageConversion;

impl A3A8 for MilenageConversion {
    fn derive(&self, root: &RootKey, rand: &Rand) -> ([u8; 4], Key64) {
        // f2-f5 ignore SQN and AMF.
        let out = milenage(root, rand, Sqn::default(), [0, 0]);
        (c2(&out.res), c3(&out.ck, &out.ik))
    }
}

pub fn default_a3a8() -> Arc<dyn A3A8> {
    Arc::new(MilenageConversion)
}

pub fn gsm_derive(root: &RootKey, rand: &Rand) -> ([u8; 4], Key64) {
    MilenageConversion.derive(root, rand)
}

/// SRES from a 64-bit RES: fold the two 32-bit halves.
pub fn c2(res: &[u8; 8]) -> [u8; 4] {
    xor(&res[..4].try_into().unwrap(), &res[4..].try_into().unwrap())
}

/// Kc = CK1 ^ CK2 ^ IK1 ^ IK2 over 64-bit halves.
pub fn c3(ck: &Key128, ik: &Key128) -> Key64 {
    let half = |k: &Key128, i: usize| -> Key64 { k[i * 8..i * 8 + 8].try_into().unwrap() };
    xor(
        &xor(&half(ck, 0), &half(ck, 1)),
        &xor(&half(ik, 0), &half(ik, 1)),
    )
}
