//! Scratch reference implementations used as test oracles. Nothing here
//! touches the library's crypto stack: AES, SHA-1, SHA-256 and HMAC are
//! written out from their definitions.

#![allow(dead_code)]

use std::path::PathBuf;

pub mod equiv;

// ---------- AES-128 (encrypt only) ----------

fn sbox() -> [u8; 256] {
    // Built from the GF(2^8) inverse plus the affine map, not copied as a table.
    let mut s = [0u8; 256];
    let (mut p, mut q) = (1u8, 1u8);
    loop {
        p = p ^ (p << 1) ^ if p & 0x80 != 0 { 0x1b } else { 0 };
        q ^= q << 1;
        q ^= q << 2;
        q ^= q << 4;
        if q & 0x80 != 0 {
            q ^= 0x09;
        }
        let x = q ^ q.rotate_left(1) ^ q.rotate_left(2) ^ q.rotate_left(3) ^ q.rotate_left(4);
        s[p as usize] = x ^ 0x63;
        if p == 1 {
            break;
        }
    }
    s[0] = 0x63;
    s
}

fn xtime(b: u8) -> u8 {
    (b << 1) ^ if b & 0x80 != 0 { 0x1b } else { 0 }
}

pub fn aes128(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    let s = sbox();
    let mut w = [[0u8; 4]; 44];
    for i in 0..4 {
        w[i].copy_from_slice(&key[4 * i..4 * i + 4]);
    }
    let mut rcon = 1u8;
    for i in 4..44 {
        let mut t = w[i - 1];
        if i % 4 == 0 {
            t = [
                s[t[1] as usize] ^ rcon,
                s[t[2] as usize],
                s[t[3] as usize],
                s[t[0] as usize],
            ];
            rcon = xtime(rcon);
        }
        for j in 0..4 {
            w[i][j] = w[i - 4][j] ^ t[j];
        }
    }
    let mut st = *block;
    let add = |st: &mut [u8; 16], r: usize| {
        for c in 0..4 {
            for j in 0..4 {
                st[4 * c + j] ^= w[4 * r + c][j];
            }
        }
    };
    add(&mut st, 0);
    for round in 1..=10 {
        for b in st.iter_mut() {
            *b = s[*b as usize];
        }
        let old = st;
        for c in 0..4 {
            for r in 0..4 {
                st[4 * c + r] = old[4 * ((c + r) % 4) + r];
            }
        }
        if round != 10 {
            for c in 0..4 {
                let a = [st[4 * c], st[4 * c + 1], st[4 * c + 2], st[4 * c + 3]];
                let all = a[0] ^ a[1] ^ a[2] ^ a[3];
                for r in 0..4 {
                    st[4 * c + r] = a[r] ^ all ^ xtime(a[r] ^ a[(r + 1) % 4]);
                }
            }
        }
        add(&mut st, round);
    }
    st
}

// ---------- SHA-1 / SHA-256 ----------

pub const SHA1_IV: [u32; 5] = [0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0];

pub fn sha1_compress(state: [u32; 5], block: &[u8; 64]) -> [u32; 5] {
    let mut w = [0u32; 80];
    for t in 0..16 {
        w[t] = u32::from_be_bytes(block[4 * t..4 * t + 4].try_into().unwrap());
    }
    for t in 16..80 {
        w[t] = (w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]).rotate_left(1);
    }
    let [mut a, mut b, mut c, mut d, mut e] = state;
    for (t, wt) in w.iter().enumerate() {
        let (f, k) = match t {
            0..=19 => ((b & c) | (!b & d), 0x5A827999),
            20..=39 => (b ^ c ^ d, 0x6ED9EBA1),
            40..=59 => ((b & c) | (b & d) | (c & d), 0x8F1BBCDC),
            _ => (b ^ c ^ d, 0xCA62C1D6),
        };
        let tmp = a
            .rotate_left(5)
            .wrapping_add(f)
            .wrapping_add(e)
            .wrapping_add(k)
            .wrapping_add(*wt);
        e = d;
        d = c;
        c = b.rotate_left(30);
        b = a;
        a = tmp;
    }
    let mut out = state;
    for (o, v) in out.iter_mut().zip([a, b, c, d, e]) {
        *o = o.wrapping_add(v);
    }
    out
}

fn md_pad(msg: &[u8]) -> Vec<u8> {
    let mut m = msg.to_vec();
    m.push(0x80);
    while m.len() % 64 != 56 {
        m.push(0);
    }
    m.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
    m
}

pub fn sha1(msg: &[u8]) -> [u8; 20] {
    let mut st = SHA1_IV;
    for blk in md_pad(msg).chunks(64) {
        st = sha1_compress(st, blk.try_into().unwrap());
    }
    let mut out = [0u8; 20];
    for (i, v) in st.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&v.to_be_bytes());
    }
    out
}

fn sha256_k() -> [u32; 64] {
    // Fractional parts of cube roots of the first 64 primes.
    let mut primes = Vec::new();
    let mut n = 2u32;
    while primes.len() < 64 {
        if (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0) {
            primes.push(n);
        }
        n += 1;
    }
    let mut k = [0u32; 64];
    for (i, p) in primes.iter().enumerate() {
        k[i] = frac_root(*p as u64, 3);
    }
    k
}

/// First 32 bits of the fractional part of p^(1/r), by integer search.
fn frac_root(p: u64, r: u32) -> u32 {
    // Find x = floor(p^(1/r) * 2^32) exactly with u128 arithmetic.
    let target = (p as u128) << (32 * r);
    let (mut lo, mut hi) = (0u128, 1u128 << 40);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if mid.pow(r) <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as u32
}

pub fn sha256(msg: &[u8]) -> [u8; 32] {
    let k = sha256_k();
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19];
    let mut h: Vec<u32> = primes.iter().map(|p| frac_root(*p, 2)).collect();
    for blk in md_pad(msg).chunks(64) {
        let mut w = [0u32; 64];
        for t in 0..16 {
            w[t] = u32::from_be_bytes(blk[4 * t..4 * t + 4].try_into().unwrap());
        }
        for t in 16..64 {
            let s0 = w[t - 15].rotate_right(7) ^ w[t - 15].rotate_right(18) ^ (w[t - 15] >> 3);
            let s1 = w[t - 2].rotate_right(17) ^ w[t - 2].rotate_right(19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16]
                .wrapping_add(s0)
                .wrapping_add(w[t - 7])
                .wrapping_add(s1);
        }
        let mut v = [h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]];
        for t in 0..64 {
            let [a, b, c, d, e, f, g, hh] = v;
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh
                .wrapping_add(s1)
                .wrapping_add(ch)
                .wrapping_add(k[t])
                .wrapping_add(w[t]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            v = [t1.wrapping_add(t2), a, b, c, d.wrapping_add(t1), e, f, g];
        }
        for (x, y) in h.iter_mut().zip(v) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 32];
    for (i, x) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&x.to_be_bytes());
    }
    out
}

pub fn hmac_sha256(key: &[u8], msg: &[u8]) -> [u8; 32] {
    let mut k = if key.len() > 64 {
        sha256(key).to_vec()
    } else {
        key.to_vec()
    };
    k.resize(64, 0);
    let ipad: Vec<u8> = k.iter().map(|b| b ^ 0x36).collect();
    let opad: Vec<u8> = k.iter().map(|b| b ^ 0x5c).collect();
    let inner = sha256(&[ipad, msg.to_vec()].concat());
    sha256(&[opad, inner.to_vec()].concat())
}

// ---------- AKA functions over the scratch primitives ----------

fn xor16(a: &[u8; 16], b: &[u8; 16]) -> [u8; 16] {
    let mut o = [0u8; 16];
    for i in 0..16 {
        o[i] = a[i] ^ b[i];
    }
    o
}

fn rot(x: &[u8; 16], bits: usize) -> [u8; 16] {
    let v = u128::from_be_bytes(*x).rotate_left(bits as u32);
    v.to_be_bytes()
}

pub struct Milenage {
    pub res: [u8; 8],
    pub ck: [u8; 16],
    pub ik: [u8; 16],
    pub ak: [u8; 6],
    pub mac_a: [u8; 8],
    pub mac_s: [u8; 8],
    pub ak_s: [u8; 6],
}

pub fn milenage(
    k: &[u8; 16],
    opc: &[u8; 16],
    rand: &[u8; 16],
    sqn: &[u8; 6],
    amf: &[u8; 2],
) -> Milenage {
    let temp = aes128(k, &xor16(rand, opc));
    let mut in1 = [0u8; 16];
    in1[..6].copy_from_slice(sqn);
    in1[6..8].copy_from_slice(amf);
    in1[8..14].copy_from_slice(sqn);
    in1[14..].copy_from_slice(amf);
    let out1 = xor16(&aes128(k, &xor16(&temp, &rot(&xor16(&in1, opc), 64))), opc);
    let out = |r: usize, c: u8| {
        let mut cst = [0u8; 16];
        if c > 0 {
            cst[15] = 1 << (c - 1);
        }
        xor16(&aes128(k, &xor16(&rot(&xor16(&temp, opc), r), &cst)), opc)
    };
    let (o2, o3, o4, o5) = (out(0, 1), out(32, 2), out(64, 3), out(96, 4));
    Milenage {
        res: o2[8..].try_into().unwrap(),
        ck: o3,
        ik: o4,
        ak: o2[..6].try_into().unwrap(),
        mac_a: out1[..8].try_into().unwrap(),
        mac_s: out1[8..].try_into().unwrap(),
        ak_s: o5[..6].try_into().unwrap(),
    }
}

pub fn kdf(key: &[u8], fc: u8, params: &[&[u8]]) -> [u8; 32] {
    let mut s = vec![fc];
    for p in params {
        s.extend_from_slice(p);
        s.extend_from_slice(&(p.len() as u16).to_be_bytes());
    }
    hmac_sha256(key, &s)
}

fn fips_prf(xkey: &[u8; 20], n: usize) -> Vec<u8> {
    let mut x = *xkey;
    let mut out = Vec::new();
    while out.len() < n {
        let mut blk = [0u8; 64];
        blk[..20].copy_from_slice(&x);
        let st = sha1_compress(SHA1_IV, &blk);
        let mut wv = [0u8; 20];
        for (i, v) in st.iter().enumerate() {
            wv[4 * i..4 * i + 4].copy_from_slice(&v.to_be_bytes());
        }
        // x = (1 + x + w) mod 2^160
        let mut carry = 1u16;
        for i in (0..20).rev() {
            let s = x[i] as u16 + wv[i] as u16 + carry;
            x[i] = s as u8;
            carry = s >> 8;
        }
        out.extend_from_slice(&wv);
    }
    out.truncate(n);
    out
}

pub struct EapAka {
    pub k_encr: Vec<u8>,
    pub k_aut: Vec<u8>,
    pub msk: Vec<u8>,
    pub emsk: Vec<u8>,
}

pub fn eap_aka(identity: &[u8], ik: &[u8], ck: &[u8]) -> EapAka {
    let mk = sha1(&[identity, ik, ck].concat());
    let b = fips_prf(&mk, 160);
    EapAka {
        k_encr: b[..16].to_vec(),
        k_aut: b[16..32].to_vec(),
        msk: b[32..96].to_vec(),
        emsk: b[96..].to_vec(),
    }
}

pub struct EapAkaPrime {
    pub k_encr: Vec<u8>,
    pub k_aut: Vec<u8>,
    pub k_re: Vec<u8>,
    pub msk: Vec<u8>,
    pub emsk: Vec<u8>,
}

pub fn eap_aka_prime(identity: &[u8], ik_p: &[u8], ck_p: &[u8]) -> EapAkaPrime {
    let key = [ik_p, ck_p].concat();
    let s = [b"EAP-AKA'".as_slice(), identity].concat();
    let (mut out, mut t) = (Vec::new(), Vec::new());
    let mut i = 1u8;
    while out.len() < 208 {
        t = hmac_sha256(&key, &[t.as_slice(), &s, &[i]].concat()).to_vec();
        out.extend_from_slice(&t);
        i += 1;
    }
    EapAkaPrime {
        k_encr: out[..16].to_vec(),
        k_aut: out[16..48].to_vec(),
        k_re: out[48..80].to_vec(),
        msk: out[80..144].to_vec(),
        emsk: out[144..208].to_vec(),
    }
}

pub fn res_star(ck: &[u8], ik: &[u8], snn: &[u8], rand: &[u8], res: &[u8]) -> [u8; 16] {
    kdf(&[ck, ik].concat(), 0x6B, &[snn, rand, res])[16..]
        .try_into()
        .unwrap()
}

pub fn hres_star(rand: &[u8], res_star: &[u8]) -> [u8; 16] {
    sha256(&[rand, res_star].concat())[16..].try_into().unwrap()
}

// ---------- deterministic inputs and frozen files ----------

/// SplitMix64, so the live vectors do not depend on the library's RNG choice.
pub struct Mix(pub u64);

impl Mix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn bytes<const N: usize>(&mut self) -> [u8; N] {
        let mut o = [0u8; N];
        for b in o.iter_mut() {
            *b = self.next() as u8;
        }
        o
    }

    pub fn vec(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.next() as u8).collect()
    }
}

/// Frozen data lives in the core crate; the acceptance run reaches it from the cli crate.
pub fn data_path(name: &str) -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    [here.join("tests/data"), here.join("../core/tests/data")]
        .into_iter()
        .map(|d| d.join(name))
        .find(|p| p.exists())
        .unwrap_or_else(|| panic!("frozen vector file {name} not found"))
}

/// Rows of a frozen vector file, whitespace split, comments dropped.
pub fn frozen(name: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(data_path(name))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

pub fn unhex(s: &str) -> Vec<u8> {
    if s == "-" {
        return Vec::new();
    }
    hex::decode(s).unwrap_or_else(|e| panic!("bad hex {s}: {e}"))
}

pub fn arr<const N: usize>(s: &str) -> [u8; N] {
    unhex(s)
        .try_into()
        .unwrap_or_else(|_| panic!("{s} is not {N} octets"))
}

/// Sanity checks of the scratch primitives against published answers.
pub fn self_check() {
    // FIPS-197 appendix C.1
    let k: [u8; 16] = arr("000102030405060708090a0b0c0d0e0f");
    let p: [u8; 16] = arr("00112233445566778899aabbccddeeff");
    assert_eq!(
        hex::encode(aes128(&k, &p)),
        "69c4e0d86a7b0430d8cdb78070b4c55a"
    );
    assert_eq!(
        hex::encode(sha1(b"abc")),
        "a9993e364706816aba3e25717850c26c9cd0d89d"
    );
    assert_eq!(
        hex::encode(sha256(b"abc")),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    // RFC 4231 case 2
    assert_eq!(
        hex::encode(hmac_sha256(b"Jefe", b"what do ya want for nothing?")),
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"
    );
}
