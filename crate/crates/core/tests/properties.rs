mod common;

use akasim::crypto::{
    build_auts, derive_kamf, derive_kasme, derive_kausf_kseaf_kamf, derive_res_star, suci_conceal,
    suci_deconceal, FiveGMode, HomeNetworkKey, RootKey, ServingNetworkId, Sqn, SuciScheme,
};
use akasim::engine::{ProtocolTranscript, Role, Verdict};
use akasim::harness::{happy_path, World, WorldConfig};
use akasim::subscriber::{
    accept_sqn, Imsi, SqnPolicy, SqnVerdict, SubscriberRecord, SubscriberStore,
};
use akasim::Variant;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn flip(bytes: &[u8], bit: usize) -> Vec<u8> {
    let mut b = bytes.to_vec();
    let bit = bit % (b.len() * 8);
    b[bit / 8] ^= 0x80 >> (bit % 8);
    b
}

#[derive(Clone, Debug)]
enum StoreOp {
    Next,
    Resync(u64),
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accept_sqn_is_the_window(ms in 0u64..1 << 40, delta in 0u64..20_000, window in 1u64..200, step in 1u64..64) {
        let policy = SqnPolicy::new(window, step).unwrap();
        let received = ms + delta;
        let v = accept_sqn(Sqn::new(received).unwrap(), Sqn::new(ms).unwrap(), policy);
        let want = delta >= step && delta <= window * step;
        prop_assert_eq!(v == SqnVerdict::Accept, want);
        // pure: same inputs, same verdict
        prop_assert_eq!(v, accept_sqn(Sqn::new(received).unwrap(), Sqn::new(ms).unwrap(), policy));
    }

    #[test]
    fn home_sqn_never_decreases(ops in prop::collection::vec(
        prop_oneof![Just(StoreOp::Next), (0u64..5_000).prop_map(StoreOp::Resync)], 1..60)) {
        let imsi = Imsi::new("001010123456789").unwrap();
        let root = RootKey::new([3; 16], [4; 16]);
        let mut store = SubscriberStore::default();
        store.provision(SubscriberRecord::new(imsi.clone(), root.clone())).unwrap();
        let mut last = store.get(&imsi).unwrap().sqn_hn;
        let mut issued = Vec::new();
        for op in ops {
            match op {
                StoreOp::Next => issued.push(store.next_sqn(&imsi).unwrap()),
                StoreOp::Resync(ms) => {
                    let rand = [ms as u8; 16];
                    let auts = build_auts(&root, &rand, Sqn::new(ms).unwrap());
                    store.resynchronize(&imsi, &rand, &auts).unwrap();
                }
            }
            let now = store.get(&imsi).unwrap().sqn_hn;
            prop_assert!(now >= last);
            last = now;
        }
        // no SQN is ever handed out twice
        let mut sorted = issued.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), issued.len());
    }

    #[test]
    fn serving_network_binding_avalanche(ck: [u8; 16], ik: [u8; 16], sqn_ak: [u8; 6], rand: [u8; 16], bit in 0usize..1000) {
        let snn = b"5G:mnc015.mcc234.3gppnetwork.org".to_vec();
        let mut other = flip(&snn, bit);
        // keep the 5G: prefix so the name stays well-formed
        other[..3].copy_from_slice(b"5G:");
        prop_assume!(other != snn);
        let (a, b) = (ServingNetworkId::snn(snn).unwrap(), ServingNetworkId::snn(other).unwrap());
        let ka = derive_kausf_kseaf_kamf(&ck, &ik, &a, &sqn_ak, b"001010000000001", &[0, 0], FiveGMode::FiveGAka, None).unwrap();
        let kb = derive_kausf_kseaf_kamf(&ck, &ik, &b, &sqn_ak, b"001010000000001", &[0, 0], FiveGMode::FiveGAka, None).unwrap();
        prop_assert_ne!(ka.kausf, kb.kausf);
        prop_assert_ne!(ka.kseaf, kb.kseaf);
        prop_assert_ne!(ka.kamf, kb.kamf);
        let res = [7u8; 8];
        prop_assert_ne!(derive_res_star(&ck, &ik, &a, &rand, &res).unwrap(), derive_res_star(&ck, &ik, &b, &rand, &res).unwrap());

        let snid = [0x32, 0xf4, 0x51];
        let other = flip(&snid, bit);
        let ka = derive_kasme(&ck, &ik, &ServingNetworkId::snid_from_slice(&snid).unwrap(), &sqn_ak).unwrap();
        let kb = derive_kasme(&ck, &ik, &ServingNetworkId::snid_from_slice(&other).unwrap(), &sqn_ak).unwrap();
        prop_assert_ne!(ka, kb);
    }

    #[test]
    fn kamf_binds_abba_and_supi(kseaf: [u8; 32], abba in prop::collection::vec(any::<u8>(), 1..8), bit in 0usize..64) {
        let supi = b"001010000000001";
        let base = derive_kamf(&kseaf, supi, &abba).unwrap();
        prop_assert_ne!(base, derive_kamf(&kseaf, supi, &flip(&abba, bit)).unwrap());
        prop_assert_ne!(base, derive_kamf(&kseaf, &flip(supi, bit), &abba).unwrap());
    }

    #[test]
    fn suci_round_trips(digits in "[0-9]{15}", seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let hn = HomeNetworkKey::generate(1, &mut rng);
        let env = suci_conceal(digits.as_bytes(), SuciScheme::EciesProfileA, 1, &hn.public_bytes(), &mut rng).unwrap();
        prop_assert!(!env.to_bytes().windows(15).any(|w| w == digits.as_bytes()));
        prop_assert_eq!(suci_deconceal(&env, &hn.secret_bytes()).unwrap(), digits.as_bytes().to_vec());
    }

    #[test]
    fn happy_path_agrees_for_any_seed(v in variant(), seed: u64) {
        let r = happy_path(v, seed).unwrap();
        prop_assert!(r.all_succeeded());
        prop_assert!(r.keys_agree());
        let text = r.transcript.to_text();
        prop_assert_eq!(ProtocolTranscript::parse(&text).unwrap(), r.transcript);
    }

    #[test]
    fn any_autn_bit_flip_is_rejected(v in variant(), seed in 0u64..1000, bit in 0usize..128) {
        prop_assume!(v.has_autn());
        let mut w = World::build(WorldConfig::new(v, seed)).unwrap();
        let mut tamper = akasim::harness::Tamperer::new(bit);
        let r = w.run(Some(&mut tamper)).unwrap();
        prop_assert!(tamper.done);
        let ue = r.transcript.verdict(Role::Ue);
        prop_assert!(ue != Some(Verdict::Success), "{v} bit {bit}: {ue:?}");
        prop_assert!(matches!(ue, Some(Verdict::MacFailure | Verdict::SyncFailure | Verdict::AuthReject)));
    }

    #[test]
    fn milenage_agrees_with_scratch_oracle(k: [u8; 16], opc: [u8; 16], rand: [u8; 16], sqn: [u8; 6], amf: [u8; 2]) {
        let lib = akasim::crypto::milenage(&RootKey::new(k, opc), &rand, Sqn::from_bytes(sqn), amf);
        let o = common::milenage(&k, &opc, &rand, &sqn, &amf);
        prop_assert_eq!((lib.res, lib.ck, lib.ik, lib.ak, lib.mac_a, lib.mac_s, lib.ak_s), (o.res, o.ck, o.ik, o.ak, o.mac_a, o.mac_s, o.ak_s));
    }
}
