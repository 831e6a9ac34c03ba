//! Library-vs-oracle comparisons. Each check counts the frozen vectors
//! (produced by `tests/data/gen_vectors.py`) plus live vectors recomputed by
//! the scratch oracle in this directory.

use akasim::crypto::{
    derive_ck_ik_prime, derive_hres_star, derive_kasme, derive_kausf_kseaf_kamf, derive_res_star,
    eap_aka_keys, eap_aka_prime_keys, kc128_ki128, kdf, milenage, FiveGMode, RootKey,
    ServingNetworkId, Sqn,
};

use super::*;

/// How many vectors matched out of how many were tried.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub matched: usize,
    pub total: usize,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.matched += ok as usize;
    }

    pub fn all(&self) -> bool {
        self.total > 0 && self.matched == self.total
    }
}

pub const LIVE: usize = 64;

fn snn(b: &[u8]) -> ServingNetworkId {
    ServingNetworkId::snn(b.to_vec()).unwrap()
}

fn name(b: &[u8]) -> ServingNetworkId {
    if b.starts_with(b"5G:") {
        snn(b)
    } else {
        ServingNetworkId::ani(b.to_vec()).unwrap()
    }
}

fn random_snn(m: &mut Mix) -> Vec<u8> {
    format!(
        "5G:mnc{:03}.mcc{:03}.3gppnetwork.org",
        m.next() % 1000,
        m.next() % 1000
    )
    .into_bytes()
}

pub fn milenage_tally() -> Tally {
    let mut t = Tally::default();
    let lib = |k: [u8; 16], opc: [u8; 16], r: [u8; 16], sqn: [u8; 6], amf: [u8; 2]| {
        let o = milenage(&RootKey::new(k, opc), &r, Sqn::from_bytes(sqn), amf);
        [
            o.res.to_vec(),
            o.ck.to_vec(),
            o.ik.to_vec(),
            o.ak.to_vec(),
            o.mac_a.to_vec(),
            o.mac_s.to_vec(),
            o.ak_s.to_vec(),
        ]
    };
    let oracle = |k: [u8; 16], opc: [u8; 16], r: [u8; 16], sqn: [u8; 6], amf: [u8; 2]| {
        let o = super::milenage(&k, &opc, &r, &sqn, &amf);
        [
            o.res.to_vec(),
            o.ck.to_vec(),
            o.ik.to_vec(),
            o.ak.to_vec(),
            o.mac_a.to_vec(),
            o.mac_s.to_vec(),
            o.ak_s.to_vec(),
        ]
    };
    for f in frozen("milenage.txt") {
        let args = (arr(&f[1]), arr(&f[2]), arr(&f[3]), arr(&f[4]), arr(&f[5]));
        let want: Vec<Vec<u8>> = f[6..13].iter().map(|h| unhex(h)).collect();
        let got = lib(args.0, args.1, args.2, args.3, args.4);
        let scratch = oracle(args.0, args.1, args.2, args.3, args.4);
        t.add(got.to_vec() == want && scratch.to_vec() == want);
    }
    let mut m = Mix(0x11);
    for _ in 0..LIVE {
        let args = (m.bytes(), m.bytes(), m.bytes(), m.bytes(), m.bytes());
        t.add(
            lib(args.0, args.1, args.2, args.3, args.4)
                == oracle(args.0, args.1, args.2, args.3, args.4),
        );
    }
    t
}

pub fn kdf_tally() -> Tally {
    let mut t = Tally::default();
    for f in frozen("kdf.txt") {
        let key = unhex(&f[1]);
        let fc = u8::from_str_radix(&f[2], 16).unwrap();
        let params: Vec<Vec<u8>> = match f[3].as_str() {
            "-" => Vec::new(),
            s => s
                .split(',')
                .map(|p| if p == "_" { Vec::new() } else { unhex(p) })
                .collect(),
        };
        let refs: Vec<&[u8]> = params.iter().map(Vec::as_slice).collect();
        let want = unhex(&f[4]);
        t.add(
            kdf(&key, fc, &refs).unwrap().to_vec() == want
                && super::kdf(&key, fc, &refs).to_vec() == want,
        );
    }
    let mut m = Mix(0x22);
    for _ in 0..LIVE {
        let n = if m.next() % 2 == 0 { 16 } else { 32 };
        let key = m.vec(n);
        let fc = m.next() as u8;
        let count = m.next() % 5;
        let params: Vec<Vec<u8>> = (0..count)
            .map(|_| {
                let n = (m.next() % 70) as usize;
                m.vec(n)
            })
            .collect();
        let refs: Vec<&[u8]> = params.iter().map(Vec::as_slice).collect();
        t.add(kdf(&key, fc, &refs).unwrap() == super::kdf(&key, fc, &refs));
    }
    t
}

pub fn eap_aka_tally() -> Tally {
    let mut t = Tally::default();
    let cmp = |id: &[u8], ik: [u8; 16], ck: [u8; 16]| {
        let l = eap_aka_keys(id, &ik, &ck).unwrap();
        let o = eap_aka(id, &ik, &ck);
        (
            [
                l.k_encr.to_vec(),
                l.k_aut.to_vec(),
                l.msk.to_vec(),
                l.emsk.to_vec(),
            ],
            [o.k_encr, o.k_aut, o.msk, o.emsk],
        )
    };
    for f in frozen("eap_aka.txt") {
        let (l, o) = cmp(&unhex(&f[1]), arr(&f[2]), arr(&f[3]));
        let want: Vec<Vec<u8>> = f[4..8].iter().map(|h| unhex(h)).collect();
        t.add(l.to_vec() == want && o.to_vec() == want);
    }
    let mut m = Mix(0x33);
    for _ in 0..LIVE {
        let n = 1 + (m.next() % 40) as usize;
        let id = m.vec(n);
        let (l, o) = cmp(&id, m.bytes(), m.bytes());
        t.add(l == o);
    }
    t
}

pub fn eap_aka_prime_tally() -> Tally {
    let mut t = Tally::default();
    let cmp = |id: &[u8], ik: [u8; 16], ck: [u8; 16]| {
        let l = eap_aka_prime_keys(id, &ik, &ck).unwrap();
        let o = eap_aka_prime(id, &ik, &ck);
        (
            [
                l.k_encr.to_vec(),
                l.k_aut.to_vec(),
                l.k_re.to_vec(),
                l.msk.to_vec(),
                l.emsk.to_vec(),
            ],
            [o.k_encr, o.k_aut, o.k_re, o.msk, o.emsk],
        )
    };
    for f in frozen("eap_aka_prime.txt") {
        let (l, o) = cmp(&unhex(&f[1]), arr(&f[2]), arr(&f[3]));
        let want: Vec<Vec<u8>> = f[4..9].iter().map(|h| unhex(h)).collect();
        t.add(l.to_vec() == want && o.to_vec() == want);
    }
    let mut m = Mix(0x44);
    for _ in 0..LIVE {
        let n = 1 + (m.next() % 40) as usize;
        let id = m.vec(n);
        let (l, o) = cmp(&id, m.bytes(), m.bytes());
        t.add(l == o);
    }
    t
}

pub fn res_star_tally() -> Tally {
    let mut t = Tally::default();
    for f in frozen("res_star.txt") {
        let (ck, ik): ([u8; 16], [u8; 16]) = (arr(&f[1]), arr(&f[2]));
        let (sn, r, res) = (unhex(&f[3]), arr::<16>(&f[4]), unhex(&f[5]));
        let want = unhex(&f[6]);
        let l = derive_res_star(&ck, &ik, &snn(&sn), &r, &res).unwrap();
        t.add(l.to_vec() == want && res_star(&ck, &ik, &sn, &r, &res).to_vec() == want);
    }
    let mut m = Mix(0x55);
    for _ in 0..LIVE {
        let (ck, ik, r): ([u8; 16], [u8; 16], [u8; 16]) = (m.bytes(), m.bytes(), m.bytes());
        let sn = random_snn(&mut m);
        let n = 4 + (m.next() % 13) as usize;
        let res = m.vec(n);
        t.add(
            derive_res_star(&ck, &ik, &snn(&sn), &r, &res).unwrap()
                == res_star(&ck, &ik, &sn, &r, &res),
        );
    }
    t
}

pub fn hres_star_tally() -> Tally {
    let mut t = Tally::default();
    for f in frozen("hres_star.txt") {
        let (r, rs): ([u8; 16], [u8; 16]) = (arr(&f[1]), arr(&f[2]));
        let want = unhex(&f[3]);
        t.add(derive_hres_star(&r, &rs).to_vec() == want && hres_star(&r, &rs).to_vec() == want);
    }
    let mut m = Mix(0x66);
    for _ in 0..LIVE {
        let (r, rs): ([u8; 16], [u8; 16]) = (m.bytes(), m.bytes());
        t.add(derive_hres_star(&r, &rs) == hres_star(&r, &rs));
    }
    t
}

/// The other hierarchy derivations, frozen vectors only.
pub fn hierarchy_tally() -> Tally {
    let mut t = Tally::default();
    for f in frozen("kasme.txt") {
        let sn = ServingNetworkId::snid_from_slice(&unhex(&f[3])).unwrap();
        let got = derive_kasme(&arr(&f[1]), &arr(&f[2]), &sn, &arr(&f[4])).unwrap();
        t.add(got.to_vec() == unhex(&f[5]));
    }
    for f in frozen("ck_ik_prime.txt") {
        let (ckp, ikp) =
            derive_ck_ik_prime(&arr(&f[1]), &arr(&f[2]), &name(&unhex(&f[3])), &arr(&f[4]))
                .unwrap();
        t.add(ckp.to_vec() == unhex(&f[5]) && ikp.to_vec() == unhex(&f[6]));
    }
    for f in frozen("kc128.txt") {
        let (kc, ki) = kc128_ki128(&arr(&f[1]), &arr(&f[2]));
        t.add(kc.to_vec() == unhex(&f[3]) && ki.to_vec() == unhex(&f[4]));
    }
    for f in frozen("fiveg_keys.txt") {
        let mode = if f[1] == "fiveg_aka" {
            FiveGMode::FiveGAka
        } else {
            FiveGMode::FiveGEapAkaPrime
        };
        let emsk: Option<[u8; 64]> = (f[8] != "-").then(|| arr(&f[8]));
        let k = derive_kausf_kseaf_kamf(
            &arr(&f[2]),
            &arr(&f[3]),
            &snn(&unhex(&f[4])),
            &arr(&f[5]),
            &unhex(&f[6]),
            &unhex(&f[7]),
            mode,
            emsk.as_ref(),
        )
        .unwrap();
        t.add(
            k.kausf.to_vec() == unhex(&f[9])
                && k.kseaf.to_vec() == unhex(&f[10])
                && k.kamf.to_vec() == unhex(&f[11]),
        );
    }
    t
}
