//! Flows over a provisioned subscriber database, as the command line runs them.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::bus::Bus;
use super::world::RunRecord;
use crate::crypto::{HomeNetworkKey, ServingNetworkId, Sqn, SuciScheme};
use crate::engine::{
    extract_session_keys, new_party, run_to_completion, Endpoint, HomeConfig, PartyConfig, Role,
    ServingConfig, UeConfig, Usim,
};
use crate::error::{Error, Result};
use crate::subscriber::{Imsi, SubscriberStore};
use crate::vectors::{reduce_to_se_av, AuthVector, EapVariant, VectorFactory};
use crate::Variant;

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub variant: Variant,
    pub seed: u64,
    pub network: Option<ServingNetworkId>,
    pub abba: Vec<u8>,
    pub res_len: usize,
}

impl SessionConfig {
    pub fn new(variant: Variant, seed: u64, network: Option<ServingNetworkId>) -> Self {
        Self {
            variant,
            seed,
            network,
            abba: vec![0, 0],
            res_len: 8,
        }
    }
}

/// Rejects a missing or wrong-kind serving network identifier for `variant`.
pub fn check_network(variant: Variant, network: Option<&ServingNetworkId>) -> Result<()> {
    match (variant.serving_network_kind(), network) {
        (None, _) => Ok(()),
        (Some(kind), Some(n)) if n.kind() == kind => Ok(()),
        (Some(kind), Some(n)) => Err(Error::Configuration(format!(
            "{variant} binds a {kind}, got a {}",
            n.kind()
        ))),
        (Some(kind), None) => Err(Error::Configuration(format!("{variant} requires --{kind}"))),
    }
}

/// The home network's SUCI key pair. Not persisted: derived from the session seed.
pub fn home_network_key(seed: u64) -> HomeNetworkKey {
    HomeNetworkKey::generate(1, &mut ChaCha20Rng::seed_from_u64(seed ^ 0x5a5a_0001))
}

/// Issues one vector of the kind `variant` uses, advancing the stored SQN.
pub fn issue_vector(
    store: &mut SubscriberStore,
    imsi: &Imsi,
    variant: Variant,
    network: Option<&ServingNetworkId>,
    seed: u64,
) -> Result<Vec<AuthVector>> {
    check_network(variant, network)?;
    let mut f = VectorFactory::from_seed(seed);
    let net = || {
        network.ok_or_else(|| Error::Configuration(format!("{variant} requires a serving network")))
    };
    Ok(match variant {
        Variant::Gsm => vec![AuthVector::Triplet(f.gen_triplet(store, imsi)?)],
        Variant::Umts | Variant::EcGsmIot => vec![AuthVector::Quintet(f.gen_quintet(store, imsi)?)],
        Variant::Eps => vec![AuthVector::Eps(f.gen_eps_av(store, imsi, net()?)?)],
        Variant::EapAka => vec![AuthVector::Eap(f.gen_eap_material(
            store,
            imsi,
            EapVariant::EapAka,
            None,
        )?)],
        Variant::EapAkaPrime | Variant::FiveGEapAkaPrime => vec![AuthVector::Eap(
            f.gen_eap_material(store, imsi, EapVariant::EapAkaPrime, Some(net()?))?,
        )],
        Variant::FiveGAka => {
            let he = f.gen_5g_he_av(store, imsi, net()?)?;
            let se = reduce_to_se_av(&he)?;
            vec![AuthVector::FiveGHe(he), AuthVector::FiveGSe(se)]
        }
    })
}

/// Runs one honest flow for the subscriber `imsi`. The USIM starts at the
/// last SQN the home network issued; the returned store carries the advanced SQN.
pub fn run_session(
    store: SubscriberStore,
    imsi: &Imsi,
    cfg: &SessionConfig,
) -> Result<(RunRecord, SubscriberStore)> {
    check_network(cfg.variant, cfg.network.as_ref())?;
    let rec = store.get(imsi)?;
    if !rec.generations.contains(&cfg.variant) {
        return Err(Error::Configuration(format!(
            "{imsi} is not provisioned for {}",
            cfg.variant
        )));
    }
    let policy = store.policy();
    let sqn_ms = Sqn::new(rec.sqn_hn.value().saturating_sub(policy.step()))?;
    let usim = Usim::new(imsi.clone(), rec.root.clone())
        .with_supi(rec.supi.clone())
        .with_sqn_ms(sqn_ms)
        .with_policy(policy)
        .with_res_len(cfg.res_len)?;

    let hn_key = home_network_key(cfg.seed);
    let v = cfg.variant;
    let mut ue = new_party(
        Role::Ue,
        v,
        PartyConfig::Ue(UeConfig {
            usim: Some(usim),
            serving_network: cfg.network.clone(),
            suci_scheme: SuciScheme::EciesProfileA,
            home_network_pubkey: Some((hn_key.id, hn_key.public_bytes())),
            seed: cfg.seed,
        }),
    )?;
    let mut serving = new_party(
        Role::Serving,
        v,
        PartyConfig::Serving(ServingConfig {
            network: cfg.network.clone(),
            abba: cfg.abba.clone(),
        }),
    )?;
    let factory = VectorFactory::from_seed(cfg.seed.wrapping_add(1)).with_res_len(cfg.res_len)?;
    let mut home = new_party(
        Role::Home,
        v,
        PartyConfig::Home(HomeConfig {
            store: Some(store),
            factory,
            hn_key: Some(hn_key),
        }),
    )?;

    let transcript = {
        let mut parties: [&mut dyn Endpoint; 3] = [&mut ue, &mut serving, &mut home];
        run_to_completion(&mut parties, &mut Bus::new())?
    };
    let record = RunRecord {
        transcript,
        ue_keys: extract_session_keys(&ue).ok(),
        serving_keys: extract_session_keys(&serving).ok(),
        home_keys: extract_session_keys(&home).ok(),
    };
    let store = home
        .into_home_store()
        .ok_or_else(|| Error::Unavailable("home party lost its store".into()))?;
    Ok((record, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::RootKey;
    use crate::harness::network_for;
    use crate::harness::Side;
    use crate::subscriber::SubscriberRecord;

    fn store() -> (SubscriberStore, Imsi) {
        let imsi = Imsi::new("001010000000001").unwrap();
        let mut s = SubscriberStore::default();
        s.provision(SubscriberRecord::new(
            imsi.clone(),
            RootKey::new([7; 16], [9; 16]),
        ))
        .unwrap();
        (s, imsi)
    }

    #[test]
    fn consecutive_sessions_advance_sqn() {
        let (mut s, imsi) = store();
        for v in Variant::ALL {
            let cfg = SessionConfig::new(v, 5, network_for(v, Side::A));
            let before = s.get(&imsi).unwrap().sqn_hn;
            let (r, next) = run_session(s, &imsi, &cfg).unwrap();
            assert!(r.all_succeeded() && r.keys_agree(), "{v}: {}", r.transcript);
            if v != Variant::Gsm {
                assert!(next.get(&imsi).unwrap().sqn_hn > before);
            }
            s = next;
        }
    }

    #[test]
    fn missing_network_is_configuration_error() {
        let (s, imsi) = store();
        let cfg = SessionConfig::new(Variant::Eps, 1, None);
        assert!(matches!(
            run_session(s, &imsi, &cfg),
            Err(Error::Configuration(_))
        ));
        let wrong = network_for(Variant::FiveGAka, Side::A);
        assert!(matches!(
            check_network(Variant::Eps, wrong.as_ref()),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn vector_kinds() {
        let (mut s, imsi) = store();
        let kinds: Vec<Vec<&str>> = Variant::ALL
            .into_iter()
            .map(|v| {
                let n = network_for(v, Side::A);
                issue_vector(&mut s, &imsi, v, n.as_ref(), 3)
                    .unwrap()
                    .iter()
                    .map(|a| a.kind())
                    .collect()
            })
            .collect();
        assert_eq!(kinds[0], ["gsm-triplet"]);
        assert_eq!(kinds[6], ["5g-he-av", "5g-se-av"]);
        assert_eq!(kinds[7], ["eap-aka-prime-av"]);
    }
}
