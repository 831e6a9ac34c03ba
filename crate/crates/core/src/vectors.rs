//! Home-network authentication vector generation for every generation.
//!
//! All randomness comes from one seeded ChaCha20 stream owned by the factory,
//! so a fixed seed reproduces every RAND bit for bit.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crypto::gsm::default_a3a8;
use crate::crypto::kdf::derive_kseaf;
use crate::crypto::types::xor;
use crate::crypto::{
    derive_ck_ik_prime, derive_hres_star, derive_kasme, derive_kausf_kseaf_kamf, derive_res_star,
    eap_aka_keys, eap_aka_prime_keys, Amf, AuthAlgorithm, Autn, EapAkaKeys, EapAkaPrimeKeys,
    FiveGMode, Key128, Key256, Key512, Key64, Milenage, MilenageOutput, Rand, ServingNetworkId,
    Sqn, A3A8, AMF_SEPARATION_BIT,
};
use crate::error::{Error, Result};
use crate::subscriber::{Imsi, SubscriberStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GsmTriplet {
    pub rand: Rand,
    pub xres: [u8; 4],
    pub kc: Key64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UmtsQuintet {
    pub rand: Rand,
    pub xres: Vec<u8>,
    pub ck: Key128,
    pub ik: Key128,
    pub autn: Autn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsAv {
    pub rand: Rand,
    pub xres: Vec<u8>,
    pub autn: Autn,
    pub kasme: Key256,
    pub snid: ServingNetworkId,
}

/// 5G home-environment AV, held by the AUSF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiveGHeAv {
    pub rand: Rand,
    pub autn: Autn,
    pub xres_star: Key128,
    pub kausf: Key256,
    pub snn: ServingNetworkId,
}

/// 5G serving-environment AV. Carries only the hashed expected response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiveGSeAv {
    pub rand: Rand,
    pub autn: Autn,
    pub hxres_star: Key128,
    pub kseaf: Key256,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EapVariant {
    EapAka,
    EapAkaPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EapKeyBlock {
    Aka(EapAkaKeys),
    AkaPrime(EapAkaPrimeKeys),
}

impl EapKeyBlock {
    pub fn msk(&self) -> &Key512 {
        match self {
            Self::Aka(k) => &k.msk,
            Self::AkaPrime(k) => &k.msk,
        }
    }

    pub fn emsk(&self) -> &Key512 {
        match self {
            Self::Aka(k) => &k.emsk,
            Self::AkaPrime(k) => &k.emsk,
        }
    }
}

/// EAP-AKA / EAP-AKA' challenge plus the key block the EAP server derives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EapAv {
    pub variant: EapVariant,
    pub rand: Rand,
    pub autn: Autn,
    pub xres: Vec<u8>,
    pub net_name: Option<ServingNetworkId>,
    pub identity: Vec<u8>,
    pub keys: EapKeyBlock,
}

/// Any authentication vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuthVector {
    Triplet(GsmTriplet),
    Quintet(UmtsQuintet),
    Eps(EpsAv),
    FiveGHe(FiveGHeAv),
    FiveGSe(FiveGSeAv),
    Eap(EapAv),
}

impl AuthVector {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Triplet(_) => "gsm-triplet",
            Self::Quintet(_) => "umts-quintet",
            Self::Eps(_) => "eps-av",
            Self::FiveGHe(_) => "5g-he-av",
            Self::FiveGSe(_) => "5g-se-av",
            Self::Eap(av) => match av.variant {
                EapVariant::EapAka => "eap-aka-av",
                EapVariant::EapAkaPrime => "eap-aka-prime-av",
            },
        }
    }

    /// Named hex fields in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        fn h(b: impl AsRef<[u8]>) -> String {
            hex::encode(b)
        }
        match self {
            Self::Triplet(t) => vec![("rand", h(t.rand)), ("xres", h(t.xres)), ("kc", h(t.kc))],
            Self::Quintet(q) => vec![
                ("rand", h(q.rand)),
                ("xres", h(&q.xres)),
                ("ck", h(q.ck)),
                ("ik", h(q.ik)),
                ("autn", h(q.autn.0)),
            ],
            Self::Eps(e) => vec![
                ("rand", h(e.rand)),
                ("xres", h(&e.xres)),
                ("autn", h(e.autn.0)),
                ("kasme", h(e.kasme)),
                ("snid", h(e.snid.as_bytes())),
            ],
            Self::FiveGHe(a) => vec![
                ("rand", h(a.rand)),
                ("autn", h(a.autn.0)),
                ("xres_star", h(a.xres_star)),
                ("kausf", h(a.kausf)),
                ("snn", h(a.snn.as_bytes())),
            ],
            Self::FiveGSe(a) => vec![
                ("rand", h(a.rand)),
                ("autn", h(a.autn.0)),
                ("hxres_star", h(a.hxres_star)),
                ("kseaf", h(a.kseaf)),
            ],
            Self::Eap(a) => {
                let mut v = vec![
                    ("rand", h(a.rand)),
                    ("autn", h(a.autn.0)),
                    ("xres", h(&a.xres)),
                    ("identity", h(&a.identity)),
                ];
                if let Some(n) = &a.net_name {
                    v.push(("net_name", h(n.as_bytes())));
                }
                v.push(("msk", h(a.keys.msk())));
                v.push(("emsk", h(a.keys.emsk())));
                v
            }
        }
    }

    /// `[kind]` header followed by `field value` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("[{}]\n", self.kind());
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k} {v}");
        }
        out
    }
}

/// Output of the shared f1-f5 step behind every AUTN-bearing vector.
struct QuintetCore {
    rand: Rand,
    out: MilenageOutput,
    xres: Vec<u8>,
    autn: Autn,
}

pub struct VectorFactory {
    rng: ChaCha20Rng,
    res_len: usize,
    clear_separation_bit: bool,
    algorithm: Arc<dyn AuthAlgorithm>,
    a3a8: Arc<dyn A3A8>,
}

impl VectorFactory {
    pub fn from_seed(seed: u64) -> Self {
        Self::with_rng(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn from_entropy() -> Self {
        Self::with_rng(ChaCha20Rng::from_entropy())
    }

    fn with_rng(rng: ChaCha20Rng) -> Self {
        Self {
            rng,
            res_len: 8,
            clear_separation_bit: false,
            algorithm: Arc::new(Milenage),
            a3a8: default_a3a8(),
        }
    }

    /// XRES length in octets. MILENAGE f2 yields 64 bits, so 4..=8.
    pub fn with_res_len(mut self, octets: usize) -> Result<Self> {
        if !(4..=8).contains(&octets) {
            return Err(Error::Configuration(format!(
                "XRES length {octets} octets outside the 4..=8 range MILENAGE provides"
            )));
        }
        self.res_len = octets;
        Ok(self)
    }

    pub fn res_len(&self) -> usize {
        self.res_len
    }

    /// Issues every vector with AMF bit 0 cleared, as a legacy 3G vector would be.
    pub fn with_cleared_separation_bit(mut self, clear: bool) -> Self {
        self.clear_separation_bit = clear;
        self
    }

    pub fn with_a3a8(mut self, a3a8: Arc<dyn A3A8>) -> Self {
        self.a3a8 = a3a8;
        self
    }

    pub fn with_algorithm(mut self, algorithm: Arc<dyn AuthAlgorithm>) -> Self {
        self.algorithm = algorithm;
        self
    }

    fn fresh_rand(&mut self) -> Rand {
        let mut r = [0u8; 16];
        self.rng.fill_bytes(&mut r);
        r
    }

    fn amf_for(&self, base: Amf, separation: bool) -> Amf {
        let mut v = u16::from_be_bytes(base);
        if separation {
            v |= AMF_SEPARATION_BIT;
        }
        if self.clear_separation_bit {
            v &= !AMF_SEPARATION_BIT;
        }
        v.to_be_bytes()
    }

    fn quintet_core(
        &mut self,
        store: &mut SubscriberStore,
        imsi: &Imsi,
        separation: bool,
    ) -> Result<QuintetCore> {
        let amf = self.amf_for(store.get(imsi)?.amf, separation);
        let sqn: Sqn = store.next_sqn(imsi)?;
        let rand = self.fresh_rand();
        let root = &store.get(imsi)?.root;
        let out = self.algorithm.compute(root, &rand, sqn, amf);
        let autn = Autn::assemble(xor(&sqn.to_bytes(), &out.ak), amf, out.mac_a);
        let xres = out.res[..self.res_len].to_vec();
        Ok(QuintetCore {
            rand,
            out,
            xres,
            autn,
        })
    }

    pub fn gen_triplet(&mut self, store: &SubscriberStore, imsi: &Imsi) -> Result<GsmTriplet> {
        let root = &store.get(imsi)?.root;
        let rand = self.fresh_rand();
        let (xres, kc) = self.a3a8.derive(root, &rand);
        Ok(GsmTriplet { rand, xres, kc })
    }

    pub fn gen_quintet(&mut self, store: &mut SubscriberStore, imsi: &Imsi) -> Result<UmtsQuintet> {
        let c = self.quintet_core(store, imsi, false)?;
        Ok(UmtsQuintet {
            rand: c.rand,
            xres: c.xres,
            ck: c.out.ck,
            ik: c.out.ik,
            autn: c.autn,
        })
    }

    pub fn gen_eps_av(
        &mut self,
        store: &mut SubscriberStore,
        imsi: &Imsi,
        snid: &ServingNetworkId,
    ) -> Result<EpsAv> {
        if !matches!(snid, ServingNetworkId::Snid(_)) {
            return Err(Error::Domain(format!(
                "EPS AV needs a 4G SNID, got {}",
                snid.kind()
            )));
        }
        let c = self.quintet_core(store, imsi, true)?;
        let kasme = derive_kasme(&c.out.ck, &c.out.ik, snid, &c.autn.sqn_xor_ak())?;
        Ok(EpsAv {
            rand: c.rand,
            xres: c.xres,
            autn: c.autn,
            kasme,
            snid: snid.clone(),
        })
    }

    pub fn gen_5g_he_av(
        &mut self,
        store: &mut SubscriberStore,
        imsi: &Imsi,
        snn: &ServingNetworkId,
    ) -> Result<FiveGHeAv> {
        if !matches!(snn, ServingNetworkId::Snn(_)) {
            return Err(Error::Domain(format!(
                "5G HE AV needs an SNN, got {}",
                snn.kind()
            )));
        }
        let supi = store.get(imsi)?.supi.clone();
        let c = self.quintet_core(store, imsi, true)?;
        let xres_star = derive_res_star(&c.out.ck, &c.out.ik, snn, &c.rand, &c.xres)?;
        // ABBA only reaches KAMF, which the home network does not derive.
        let keys = derive_kausf_kseaf_kamf(
            &c.out.ck,
            &c.out.ik,
            snn,
            &c.autn.sqn_xor_ak(),
            supi.as_bytes(),
            &[],
            FiveGMode::FiveGAka,
            None,
        )?;
        Ok(FiveGHeAv {
            rand: c.rand,
            autn: c.autn,
            xres_star,
            kausf: keys.kausf,
            snn: snn.clone(),
        })
    }

    /// EAP-AKA uses CK/IK directly; EAP-AKA' first binds `net_name` into CK'/IK'.
    /// The EAP identity is the IMSI, or the SUPI when `net_name` is a 5G SNN.
    pub fn gen_eap_material(
        &mut self,
        store: &mut SubscriberStore,
        imsi: &Imsi,
        variant: EapVariant,
        net_name: Option<&ServingNetworkId>,
    ) -> Result<EapAv> {
        if variant == EapVariant::EapAkaPrime {
            match net_name {
                None => return Err(Error::Domain("EAP-AKA' requires a network name".into())),
                Some(ServingNetworkId::Snid(_)) => {
                    return Err(Error::Domain(
                        "EAP-AKA' network name must be an ANI or SNN".into(),
                    ))
                }
                Some(_) => {}
            }
        }
        let identity = match net_name {
            Some(ServingNetworkId::Snn(_)) => store.get(imsi)?.supi.clone().into_bytes(),
            _ => imsi.as_str().as_bytes().to_vec(),
        };
        let c = self.quintet_core(store, imsi, variant == EapVariant::EapAkaPrime)?;
        let keys = match variant {
            EapVariant::EapAka => EapKeyBlock::Aka(eap_aka_keys(&identity, &c.out.ik, &c.out.ck)?),
            EapVariant::EapAkaPrime => {
                let name = net_name.expect("checked above");
                let (ck_p, ik_p) =
                    derive_ck_ik_prime(&c.out.ck, &c.out.ik, name, &c.autn.sqn_xor_ak())?;
                EapKeyBlock::AkaPrime(eap_aka_prime_keys(&identity, &ik_p, &ck_p)?)
            }
        };
        Ok(EapAv {
            variant,
            rand: c.rand,
            autn: c.autn,
            xres: c.xres,
            net_name: net_name.cloned(),
            identity,
            keys,
        })
    }
}

/// Strips XRES* and KAUSF, leaving what the serving network may hold.
pub fn reduce_to_se_av(he: &FiveGHeAv) -> Result<FiveGSeAv> {
    Ok(FiveGSeAv {
        rand: he.rand,
        autn: he.autn,
        hxres_star: derive_hres_star(&he.rand, &he.xres_star),
        kseaf: derive_kseaf(&he.kausf, &he.snn)?,
    })
}
