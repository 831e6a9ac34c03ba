//! A seeded three-party setup: one subscriber, its UE, a serving network and the home network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::bus::{Bus, FaultSchedule, Tap};
use crate::crypto::{HomeNetworkKey, RootKey, ServingNetworkId, SuciScheme};
use crate::engine::{
    extract_session_keys, new_party, run_with_tap, sharing_boundary, Endpoint, HomeConfig, Party,
    PartyConfig, ProtocolTranscript, Role, ServingConfig, SessionKeys, UeConfig, Usim, Verdict,
};
use crate::error::Result;
use crate::subscriber::{Imsi, SubscriberRecord, SubscriberStore};
use crate::vectors::VectorFactory;
use crate::Variant;

/// Which of the two reference serving networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// The reference serving network identifier a variant binds, for side A or B.
pub fn network_for(variant: Variant, side: Side) -> Option<ServingNetworkId> {
    let mnc = match side {
        Side::A => "15",
        Side::B => "16",
    };
    let sn = match variant.serving_network_kind()? {
        "snid" => ServingNetworkId::snid_from_plmn("234", mnc),
        "ani" => ServingNetworkId::ani(match side {
            Side::A => "WLAN-net-A",
            Side::B => "WLAN-net-B",
        }),
        _ => ServingNetworkId::snn_for_plmn("234", mnc),
    };
    Some(sn.expect("reference network names are well-formed"))
}

#[derive(Clone, Debug)]
pub struct WorldConfig {
    pub variant: Variant,
    pub seed: u64,
    pub res_len: usize,
    pub abba: Vec<u8>,
    pub suci_scheme: SuciScheme,
    /// Network the UE believes it is in.
    pub ue_network: Option<ServingNetworkId>,
    /// Network the serving CN identifies itself as towards the home CN.
    pub serving_network: Option<ServingNetworkId>,
    /// Issue legacy vectors with AMF bit 0 cleared.
    pub clear_separation_bit: bool,
    /// Provision the USIM with a different K than the home network holds.
    pub wrong_ue_key: bool,
    pub faults: FaultSchedule,
}

impl WorldConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        Self {
            variant,
            seed,
            res_len: 8,
            abba: vec![0, 0],
            suci_scheme: SuciScheme::EciesProfileA,
            ue_network: network_for(variant, Side::A),
            serving_network: network_for(variant, Side::A),
            clear_separation_bit: false,
            wrong_ue_key: false,
            faults: FaultSchedule::none(),
        }
    }

    pub fn with_networks(mut self, ue: Side, serving: Side) -> Self {
        self.ue_network = network_for(self.variant, ue);
        self.serving_network = network_for(self.variant, serving);
        self
    }
}

pub struct World {
    pub config: WorldConfig,
    pub imsi: Imsi,
    pub ue: Party,
    pub serving: Party,
    pub home: Party,
    root: RootKey,
    hn_key: HomeNetworkKey,
    factory_seed: u64,
    ue_seed: u64,
}

/// What one honest run produced.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub transcript: ProtocolTranscript,
    pub ue_keys: Option<SessionKeys>,
    pub serving_keys: Option<SessionKeys>,
    pub home_keys: Option<SessionKeys>,
}

impl RunRecord {
    pub fn all_succeeded(&self) -> bool {
        [Role::Ue, Role::Serving, Role::Home]
            .iter()
            .all(|r| self.transcript.verdict(*r) == Some(Verdict::Success))
    }

    /// UE keys equal the network's at both sharing boundaries.
    pub fn keys_agree(&self) -> bool {
        let (Some(ue), Some(sn), Some(hn)) = (&self.ue_keys, &self.serving_keys, &self.home_keys)
        else {
            return false;
        };
        let v = self.transcript.variant;
        let s = sharing_boundary(v, Role::Serving);
        let h = sharing_boundary(v, Role::Home);
        ue.agrees_with(sn, s) && ue.agrees_with(hn, h) && sn.names() == s && hn.names() == h
    }
}

impl World {
    pub fn build(config: WorldConfig) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let k: [u8; 16] = rng.gen();
        let opc: [u8; 16] = rng.gen();
        let root = RootKey::new(k, opc);
        let imsi = Imsi::new(format!("00101{:010}", rng.gen_range(0..10_000_000_000u64)))?;
        let hn_key = HomeNetworkKey::generate(1, &mut rng);
        let factory_seed: u64 = rng.gen();
        let ue_seed: u64 = rng.gen();
        let ue_root = if config.wrong_ue_key {
            RootKey::new(rng.gen(), opc)
        } else {
            root.clone()
        };

        let mut store = SubscriberStore::default();
        store.provision(SubscriberRecord::new(imsi.clone(), root.clone()))?;
        let factory = VectorFactory::from_seed(factory_seed)
            .with_res_len(config.res_len)?
            .with_cleared_separation_bit(config.clear_separation_bit);
        let hn_public = (hn_key.id, hn_key.public_bytes());
        let hn_key_copy = hn_key.clone();

        let usim = Usim::new(imsi.clone(), ue_root).with_res_len(config.res_len)?;
        let v = config.variant;
        let ue = Self::ue_party(&config, usim, hn_public, ue_seed)?;
        let serving = new_party(
            Role::Serving,
            v,
            PartyConfig::Serving(ServingConfig {
                network: config.serving_network.clone(),
                abba: config.abba.clone(),
            }),
        )?;
        let home = new_party(
            Role::Home,
            v,
            PartyConfig::Home(HomeConfig {
                store: Some(store),
                factory,
                hn_key: Some(hn_key),
            }),
        )?;
        Ok(Self {
            config,
            imsi,
            ue,
            serving,
            home,
            root,
            hn_key: hn_key_copy,
            factory_seed,
            ue_seed,
        })
    }

    fn ue_party(
        config: &WorldConfig,
        usim: Usim,
        hn_public: (u8, [u8; 32]),
        seed: u64,
    ) -> Result<Party> {
        new_party(
            Role::Ue,
            config.variant,
            PartyConfig::Ue(UeConfig {
                usim: Some(usim),
                serving_network: config.ue_network.clone(),
                suci_scheme: config.suci_scheme,
                home_network_pubkey: Some(hn_public),
                seed,
            }),
        )
    }

    /// A new UE party carrying the current USIM state (SQN_MS included).
    pub fn next_ue(&self, session: u64) -> Result<Party> {
        let usim = self.ue.usim().expect("UE party holds a USIM").clone();
        let hn_public = (self.hn_key.id, self.hn_key.public_bytes());
        Self::ue_party(
            &self.config,
            usim,
            hn_public,
            self.ue_seed.wrapping_add(session),
        )
    }

    /// A new home party over the current subscriber store.
    pub fn next_home(&self, session: u64) -> Result<Party> {
        let store = self
            .home
            .home_store()
            .expect("home party holds the store")
            .clone();
        let factory = VectorFactory::from_seed(self.factory_seed.wrapping_add(session))
            .with_res_len(self.config.res_len)?
            .with_cleared_separation_bit(self.config.clear_separation_bit);
        new_party(
            Role::Home,
            self.config.variant,
            PartyConfig::Home(HomeConfig {
                store: Some(store),
                factory,
                hn_key: Some(self.hn_key.clone()),
            }),
        )
    }

    /// Only for leak checks: does `bytes` contain this subscriber's K or OPc?
    pub fn root_leaks_into(&self, bytes: &[u8]) -> bool {
        self.root.appears_in(bytes)
    }

    pub fn run(&mut self, tap: Option<&mut dyn Tap>) -> Result<RunRecord> {
        let mut bus = Bus::with_faults(self.config.faults);
        let mut parties: [&mut dyn Endpoint; 3] = [&mut self.ue, &mut self.serving, &mut self.home];
        let transcript = run_with_tap(&mut parties, &mut bus, tap)?;
        Ok(RunRecord {
            transcript,
            ue_keys: extract_session_keys(&self.ue).ok(),
            serving_keys: extract_session_keys(&self.serving).ok(),
            home_keys: extract_session_keys(&self.home).ok(),
        })
    }
}

/// One honest run with default configuration.
pub fn happy_path(variant: Variant, seed: u64) -> Result<RunRecord> {
    World::build(WorldConfig::new(variant, seed))?.run(None)
}

/// Honest runs for every `(variant, seed)` pair, in input order.
pub fn run_happy_batch(
    variants: &[Variant],
    seeds: &[u64],
) -> Vec<(Variant, u64, Result<RunRecord>)> {
    let jobs: Vec<(Variant, u64)> = variants
        .iter()
        .flat_map(|v| seeds.iter().map(move |s| (*v, *s)))
        .collect();
    super::par_map(jobs, |(v, s)| (v, s, happy_path(v, s)))
}
