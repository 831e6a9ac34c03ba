//! MILENAGE f1, f1*, f2, f3, f4, f5 and f5* over AES-128 with a personalized OPc.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;

use super::types::{xor, Amf, Key128, Rand, RootKey, Sqn};

/// Every output of one MILENAGE evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MilenageOutput {
    pub res: [u8; 8],
    pub ck: Key128,
    pub ik: Key128,
    pub ak: [u8; 6],
    pub mac_a: [u8; 8],
    pub mac_s: [u8; 8],
    pub ak_s: [u8; 6],
}

/// The f1-f5 algorithm slot. MILENAGE is the only set shipped; TUAK would plug in here.
pub trait AuthAlgorithm: Send + Sync {
    fn compute(&self, root: &RootKey, rand: &Rand, sqn: Sqn, amf: Amf) -> MilenageOutput;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Milenage;

impl AuthAlgorithm for Milenage {
    fn compute(&self, root: &RootKey, rand: &Rand, sqn: Sqn, amf: Amf) -> MilenageOutput {
        milenage(root, rand, sqn, amf)
    }
}

fn rotate(block: &[u8; 16], bits: u32) -> [u8; 16] {
    u128::from_be_bytes(*block).rotate_left(bits).to_be_bytes()
}

fn encrypt(cipher: &Aes128, input: &[u8; 16]) -> [u8; 16] {
    let mut block = (*input).into();
    cipher.encrypt_block(&mut block);
    block.into()
}

/// `OUTi = E_K(rot(TEMP ^ OPc, r) ^ c) ^ OPc` with `c` having only bit `i-2` set.
fn out_block(cipher: &Aes128, temp: &[u8; 16], op_c: &[u8; 16], r: u32, c_bit: u8) -> [u8; 16] {
    let mut input = rotate(&xor(temp, op_c), r);
    input[15] ^= c_bit;
    xor(&encrypt(cipher, &input), op_c)
}

pub fn milenage(root: &RootKey, rand: &Rand, sqn: Sqn, amf: Amf) -> MilenageOutput {
    let cipher = Aes128::new(root.k().into());
    let op_c = root.op_c();
    let temp = encrypt(&cipher, &xor(rand, op_c));

    let sqn = sqn.to_bytes();
    let mut in1 = [0u8; 16];
    in1[..6].copy_from_slice(&sqn);
    in1[6..8].copy_from_slice(&amf);
    in1[8..14].copy_from_slice(&sqn);
    in1[14..].copy_from_slice(&amf);

    // c1 is all zeroes, r1 = 64
    let out1 = xor(
        &encrypt(&cipher, &xor(&temp, &rotate(&xor(&in1, op_c), 64))),
        op_c,
    );
    let out2 = out_block(&cipher, &temp, op_c, 0, 0x01);
    let out3 = out_block(&cipher, &temp, op_c, 32, 0x02);
    let out4 = out_block(&cipher, &temp, op_c, 64, 0x04);
    let out5 = out_block(&cipher, &temp, op_c, 96, 0x08);

    MilenageOutput {
        res: out2[8..].try_into().unwrap(),
        ck: out3,
        ik: out4,
        ak: out2[..6].try_into().unwrap(),
        mac_a: out1[..8].try_into().unwrap(),
        mac_s: out1[8..].try_into().unwrap(),
        ak_s: out5[..6].try_into().unwrap(),
    }
}
