//! Stateless cryptographic building blocks.
//!
//! Everything here is a pure function of its arguments. None of it is
//! constant-time: this is a simulator, not production crypto.

pub mod auts;
pub mod eap;
pub mod gsm;
pub mod kdf;
pub mod milenage;
pub mod suci;
pub mod testvec;
pub mod types;

pub use auts::{build_auts, verify_auts, AUTS_LEN};
pub use eap::{eap_aka_keys, eap_aka_prime_keys, EapAkaKeys, EapAkaPrimeKeys};
pub use gsm::{gsm_derive, A3A8};
pub use kdf::{
    derive_ck_ik_prime, derive_hres_star, derive_kamf, derive_kasme, derive_kausf_kseaf_kamf,
    derive_kseaf, derive_res_star, kc128_ki128, kdf, FiveGKeys, FiveGMode,
};
pub use milenage::{milenage, AuthAlgorithm, Milenage, MilenageOutput};
pub use suci::{suci_conceal, suci_deconceal, HomeNetworkKey, SuciEnvelope, SuciScheme};
pub use types::{
    Amf, Autn, Challenge, Key128, Key256, Key512, Key64, Rand, RootKey, ServingNetworkId, Sqn,
    AMF_SEPARATION_BIT,
};

/// Short SHA-256 fingerprint used wherever keys would otherwise be printed.
pub fn fingerprint(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(&Sha256::digest(bytes)[..8])
}
