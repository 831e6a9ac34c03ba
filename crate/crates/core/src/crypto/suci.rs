//! SUPI concealment: the null scheme and ECIES profile A
//! (X25519, ANSI X9.63 KDF over SHA-256, AES-128-CTR, HMAC-SHA-256 truncated to 64 bits).

use aes::Aes128;
use ctr::cipher::{KeyIvInit, StreamCipher};
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use x25519_dalek::{PublicKey, StaticSecret};

use crate::error::{Error, Result};

type Aes128Ctr = ctr::Ctr128BE<Aes128>;

const TAG_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuciScheme {
    Null,
    EciesProfileA,
}

impl SuciScheme {
    pub fn id(self) -> u8 {
        match self {
            Self::Null => 0,
            Self::EciesProfileA => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(Self::Null),
            1 => Ok(Self::EciesProfileA),
            other => Err(Error::UnsupportedScheme(format!(
                "protection scheme {other}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuciEnvelope {
    pub scheme: SuciScheme,
    pub home_network_pubkey_id: u8,
    pub ephemeral_pubkey: Vec<u8>,
    pub ciphertext: Vec<u8>,
    pub mac_tag: Vec<u8>,
}

impl SuciEnvelope {
    /// `scheme | key id | (len16 | bytes) x 3`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.scheme.id(), self.home_network_pubkey_id];
        for field in [&self.ephemeral_pubkey, &self.ciphertext, &self.mac_tag] {
            out.extend_from_slice(&(field.len() as u16).to_be_bytes());
            out.extend_from_slice(field);
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let short = || Error::MalformedInput("truncated SUCI envelope".into());
        if b.len() < 2 {
            return Err(short());
        }
        let scheme = SuciScheme::from_id(b[0])?;
        let mut rest = &b[2..];
        let mut fields = Vec::with_capacity(3);
        for _ in 0..3 {
            if rest.len() < 2 {
                return Err(short());
            }
            let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
            let value = rest.get(2..2 + len).ok_or_else(short)?;
            fields.push(value.to_vec());
            rest = &rest[2 + len..];
        }
        if !rest.is_empty() {
            return Err(Error::MalformedInput(
                "trailing bytes after SUCI envelope".into(),
            ));
        }
        let mac_tag = fields.pop().unwrap();
        let ciphertext = fields.pop().unwrap();
        let ephemeral_pubkey = fields.pop().unwrap();
        Ok(Self {
            scheme,
            home_network_pubkey_id: b[1],
            ephemeral_pubkey,
            ciphertext,
            mac_tag,
        })
    }
}

/// Home network SIDF key pair.
#[derive(Clone)]
pub struct HomeNetworkKey {
    pub id: u8,
    secret: StaticSecret,
}

impl HomeNetworkKey {
    pub fn generate<R: RngCore + CryptoRng>(id: u8, rng: &mut R) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        Self {
            id,
            secret: StaticSecret::from(bytes),
        }
    }

    pub fn from_secret_bytes(id: u8, bytes: [u8; 32]) -> Self {
        Self {
            id,
            secret: StaticSecret::from(bytes),
        }
    }

    pub fn public_bytes(&self) -> [u8; 32] {
        PublicKey::from(&self.secret).to_bytes()
    }

    pub fn secret_bytes(&self) -> [u8; 32] {
        self.secret.to_bytes()
    }
}

impl std::fmt::Debug for HomeNetworkKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "HomeNetworkKey {{ id: {}, public: {} }}",
            self.id,
            hex::encode(self.public_bytes())
        )
    }
}

struct SessionKeys {
    enc: [u8; 16],
    icb: [u8; 16],
    mac: [u8; 32],
}

/// ANSI X9.63 KDF with SHA-256, SharedInfo = ephemeral public key.
fn x963_kdf(shared: &[u8; 32], shared_info: &[u8]) -> SessionKeys {
    let mut keydata = [0u8; 64];
    for (i, chunk) in keydata.chunks_mut(32).enumerate() {
        let counter = (i as u32 + 1).to_be_bytes();
        let d = Sha256::new()
            .chain_update(shared)
            .chain_update(counter)
            .chain_update(shared_info)
            .finalize();
        chunk.copy_from_slice(&d);
    }
    SessionKeys {
        enc: keydata[..16].try_into().unwrap(),
        icb: keydata[16..32].try_into().unwrap(),
        mac: keydata[32..].try_into().unwrap(),
    }
}

fn tag(mac_key: &[u8; 32], ciphertext: &[u8]) -> Vec<u8> {
    let mut mac = Hmac::<Sha256>::new_from_slice(mac_key).expect("any key length");
    mac.update(ciphertext);
    mac.finalize().into_bytes()[..TAG_LEN].to_vec()
}

fn pubkey_from(bytes: &[u8]) -> Result<PublicKey> {
    let b: [u8; 32] = bytes
        .try_into()
        .map_err(|_| Error::MalformedInput("X25519 public key must be 32 octets".into()))?;
    Ok(PublicKey::from(b))
}

pub fn suci_conceal<R: RngCore + CryptoRng>(
    supi: &[u8],
    scheme: SuciScheme,
    hn_pubkey_id: u8,
    hn_pubkey: &[u8],
    rng: &mut R,
) -> Result<SuciEnvelope> {
    match scheme {
        SuciScheme::Null => Ok(SuciEnvelope {
            scheme,
            home_network_pubkey_id: 0,
            ephemeral_pubkey: Vec::new(),
            ciphertext: supi.to_vec(),
            mac_tag: Vec::new(),
        }),
        SuciScheme::EciesProfileA => {
            let hn_pub = pubkey_from(hn_pubkey)?;
            let mut eph_bytes = [0u8; 32];
            rng.fill_bytes(&mut eph_bytes);
            let eph = StaticSecret::from(eph_bytes);
            let eph_pub = PublicKey::from(&eph).to_bytes();
            let shared = eph.diffie_hellman(&hn_pub).to_bytes();
            let keys = x963_kdf(&shared, &eph_pub);
            let mut ciphertext = supi.to_vec();
            Aes128Ctr::new(&keys.enc.into(), &keys.icb.into()).apply_keystream(&mut ciphertext);
            let mac_tag = tag(&keys.mac, &ciphertext);
            Ok(SuciEnvelope {
                scheme,
                home_network_pubkey_id: hn_pubkey_id,
                ephemeral_pubkey: eph_pub.to_vec(),
                ciphertext,
                mac_tag,
            })
        }
    }
}

pub fn suci_deconceal(env: &SuciEnvelope, hn_privkey: &[u8]) -> Result<Vec<u8>> {
    match env.scheme {
        SuciScheme::Null => Ok(env.ciphertext.clone()),
        SuciScheme::EciesProfileA => {
            let secret: [u8; 32] = hn_privkey.try_into().map_err(|_| {
                Error::MalformedInput("X25519 private key must be 32 octets".into())
            })?;
            let eph_pub = pubkey_from(&env.ephemeral_pubkey)?;
            let shared = StaticSecret::from(secret)
                .diffie_hellman(&eph_pub)
                .to_bytes();
            let keys = x963_kdf(&shared, &env.ephemeral_pubkey);
            let mut mac = Hmac::<Sha256>::new_from_slice(&keys.mac).expect("any key length");
            mac.update(&env.ciphertext);
            mac.verify_truncated_left(&env.mac_tag)
                .ok()
                .filter(|_| env.mac_tag.len() == TAG_LEN)
                .ok_or_else(|| Error::Integrity("SUCI MAC tag mismatch".into()))?;
            let mut plain = env.ciphertext.clone();
            Aes128Ctr::new(&keys.enc.into(), &keys.icb.into()).apply_keystream(&mut plain);
            Ok(plain)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn null_scheme_passes_through() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let env = suci_conceal(b"001010123456789", SuciScheme::Null, 0, &[], &mut rng).unwrap();
        assert_eq!(env.ciphertext, b"001010123456789");
        assert!(env.ephemeral_pubkey.is_empty() && env.mac_tag.is_empty());
        assert_eq!(suci_deconceal(&env, &[]).unwrap(), b"001010123456789");
    }

    #[test]
    fn ecies_round_trip_and_hides_supi() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let hn = HomeNetworkKey::generate(3, &mut rng);
        let supi = b"001010123456789";
        let env = suci_conceal(
            supi,
            SuciScheme::EciesProfileA,
            hn.id,
            &hn.public_bytes(),
            &mut rng,
        )
        .unwrap();
        assert_ne!(env.ciphertext, supi);
        assert_eq!(env.mac_tag.len(), TAG_LEN);
        assert_eq!(env.home_network_pubkey_id, 3);
        assert_eq!(suci_deconceal(&env, &hn.secret_bytes()).unwrap(), supi);
    }

    #[test]
    fn wrong_key_and_tamper_fail_integrity() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let hn = HomeNetworkKey::generate(1, &mut rng);
        let other = HomeNetworkKey::generate(1, &mut rng);
        let env = suci_conceal(
            b"001010000000001",
            SuciScheme::EciesProfileA,
            1,
            &hn.public_bytes(),
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            suci_deconceal(&env, &other.secret_bytes()),
            Err(Error::Integrity(_))
        ));
        let mut bad = env.clone();
        bad.ciphertext[0] ^= 1;
        assert!(matches!(
            suci_deconceal(&bad, &hn.secret_bytes()),
            Err(Error::Integrity(_))
        ));
        let mut short_tag = env;
        short_tag.mac_tag.truncate(4);
        assert!(matches!(
            suci_deconceal(&short_tag, &hn.secret_bytes()),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn unknown_scheme() {
        assert!(matches!(
            SuciScheme::from_id(2),
            Err(Error::UnsupportedScheme(_))
        ));
        assert!(matches!(
            SuciEnvelope::from_bytes(&[7, 0, 0, 0, 0, 0, 0, 0]),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    #[test]
    fn envelope_bytes_round_trip() {
        let env = SuciEnvelope {
            scheme: SuciScheme::EciesProfileA,
            home_network_pubkey_id: 9,
            ephemeral_pubkey: vec![1; 32],
            ciphertext: vec![2; 8],
            mac_tag: vec![3; 8],
        };
        assert_eq!(SuciEnvelope::from_bytes(&env.to_bytes()).unwrap(), env);
        assert!(SuciEnvelope::from_bytes(&env.to_bytes()[..10]).is_err());
    }
}
