//! Home-network subscriber database (the AuC/HLR/HSS/UDM role) and SQN policy.

mod persist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::crypto::{verify_auts, Amf, Rand, RootKey, Sqn, AUTS_LEN};
use crate::error::{Error, Result};
use crate::Variant;

pub use persist::FORMAT_VERSION;

/// A 15-digit IMSI.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Imsi(String);

impl Imsi {
    pub fn new(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        if s.len() != 15 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::MalformedInput(format!(
                "IMSI must be 15 decimal digits: '{s}'"
            )));
        }
        Ok(Self(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Imsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Acceptance window for incoming SQNs and the home-side increment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SqnPolicy {
    window_size: u64,
    step: u64,
}

impl SqnPolicy {
    pub fn new(window_size: u64, step: u64) -> Result<Self> {
        if window_size == 0 || step == 0 {
            return Err(Error::Configuration(
                "SQN window and step must both be >= 1".into(),
            ));
        }
        Ok(Self { window_size, step })
    }

    pub fn window_size(&self) -> u64 {
        self.window_size
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

impl Default for SqnPolicy {
    fn default() -> Self {
        Self {
            window_size: 100,
            step: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqnVerdict {
    Accept,
    SyncFailure,
}

/// UE-side freshness check: accept iff `sqn_ms + step <= received <= sqn_ms + window * step`.
pub fn accept_sqn(received: Sqn, sqn_ms: Sqn, policy: SqnPolicy) -> SqnVerdict {
    let lo = sqn_ms.value().saturating_add(policy.step);
    let hi = sqn_ms
        .value()
        .saturating_add(policy.window_size.saturating_mul(policy.step));
    if (lo..=hi).contains(&received.value()) {
        SqnVerdict::Accept
    } else {
        SqnVerdict::SyncFailure
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubscriberRecord {
    pub imsi: Imsi,
    pub supi: String,
    pub root: RootKey,
    pub sqn_hn: Sqn,
    pub amf: Amf,
    pub generations: BTreeSet<Variant>,
}

impl SubscriberRecord {
    /// A record with SUPI = IMSI, every variant enabled, AMF 0x0000 and the
    /// first SQN one default step above zero so a fresh USIM accepts it.
    pub fn new(imsi: Imsi, root: RootKey) -> Self {
        Self {
            supi: imsi.as_str().to_string(),
            imsi,
            root,
            sqn_hn: Sqn::new(SqnPolicy::default().step).unwrap(),
            amf: [0, 0],
            generations: Variant::ALL.into_iter().collect(),
        }
    }

    pub fn with_sqn(mut self, sqn: Sqn) -> Self {
        self.sqn_hn = sqn;
        self
    }

    pub fn with_amf(mut self, amf: Amf) -> Self {
        self.amf = amf;
        self
    }

    pub fn with_supi(mut self, supi: impl Into<String>) -> Self {
        self.supi = supi.into();
        self
    }

    pub fn with_generations(mut self, g: impl IntoIterator<Item = Variant>) -> Self {
        self.generations = g.into_iter().collect();
        self
    }
}

/// The home network's subscriber database.
///
/// Single writer: every mutation goes through `&mut self`, so no two vectors
/// can be issued the same SQN.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubscriberStore {
    policy: SqnPolicy,
    records: BTreeMap<Imsi, SubscriberRecord>,
}

impl SubscriberStore {
    pub fn new(policy: SqnPolicy) -> Self {
        Self {
            policy,
            records: BTreeMap::new(),
        }
    }

    pub fn policy(&self) -> SqnPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &SubscriberRecord> {
        self.records.values()
    }

    pub fn provision(&mut self, record: SubscriberRecord) -> Result<()> {
        if self.records.contains_key(&record.imsi) {
            return Err(Error::Conflict(format!(
                "IMSI {} already provisioned",
                record.imsi
            )));
        }
        if self.records.values().any(|r| r.supi == record.supi) {
            return Err(Error::Conflict(format!(
                "SUPI {} already provisioned",
                record.supi
            )));
        }
        self.records.insert(record.imsi.clone(), record);
        Ok(())
    }

    pub fn get(&self, imsi: &Imsi) -> Result<&SubscriberRecord> {
        self.records
            .get(imsi)
            .ok_or_else(|| Error::NotFound(format!("IMSI {imsi}")))
    }

    pub fn get_by_supi(&self, supi: &str) -> Result<&SubscriberRecord> {
        self.records
            .values()
            .find(|r| r.supi == supi)
            .ok_or_else(|| Error::NotFound(format!("SUPI {supi}")))
    }

    fn get_mut(&mut self, imsi: &Imsi) -> Result<&mut SubscriberRecord> {
        self.records
            .get_mut(imsi)
            .ok_or_else(|| Error::NotFound(format!("IMSI {imsi}")))
    }

    /// Returns the current home-side SQN and advances it by one step.
    pub fn next_sqn(&mut self, imsi: &Imsi) -> Result<Sqn> {
        let step = self.policy.step;
        let rec = self.get_mut(imsi)?;
        let current = rec.sqn_hn;
        let next = current
            .value()
            .checked_add(step)
            .and_then(|v| Sqn::new(v).ok())
            .ok_or_else(|| Error::SqnExhausted(imsi.to_string()))?;
        rec.sqn_hn = next;
        Ok(current)
    }

    /// Processes a verified AUTS: the home SQN moves to `SQN_MS + step` unless it is already past it.
    pub fn resynchronize(&mut self, imsi: &Imsi, rand: &Rand, auts: &[u8; AUTS_LEN]) -> Result<()> {
        let step = self.policy.step;
        let rec = self.get_mut(imsi)?;
        let sqn_ms = verify_auts(&rec.root, rand, auts)?;
        let target = sqn_ms
            .value()
            .checked_add(step)
            .and_then(|v| Sqn::new(v).ok())
            .ok_or_else(|| Error::SqnExhausted(imsi.to_string()))?;
        if target > rec.sqn_hn {
            rec.sqn_hn = target;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::build_auts;

    fn imsi(n: u64) -> Imsi {
        Imsi::new(format!("{n:015}")).unwrap()
    }

    fn record(n: u64) -> SubscriberRecord {
        SubscriberRecord::new(imsi(n), RootKey::new([n as u8; 16], [0x55; 16]))
    }

    #[test]
    fn provision_and_lookup() {
        let mut store = SubscriberStore::default();
        store.provision(record(1)).unwrap();
        assert_eq!(store.get(&imsi(1)).unwrap(), &record(1));
        assert_eq!(store.get_by_supi("000000000000001").unwrap().imsi, imsi(1));
        assert!(matches!(
            store.provision(record(1)),
            Err(Error::Conflict(_))
        ));
        assert!(matches!(store.get(&imsi(2)), Err(Error::NotFound(_))));
    }

    #[test]
    fn imsi_must_be_15_digits() {
        assert!(matches!(
            Imsi::new("00101012345678"),
            Err(Error::MalformedInput(_))
        ));
        assert!(Imsi::new("00101012345678x").is_err());
        assert!(Imsi::new("001010123456789").is_ok());
    }

    #[test]
    fn policy_validation() {
        assert!(SqnPolicy::new(0, 32).is_err());
        assert!(SqnPolicy::new(100, 0).is_err());
        assert_eq!(SqnPolicy::default(), SqnPolicy::new(100, 32).unwrap());
    }

    #[test]
    fn next_sqn_steps() {
        let mut store = SubscriberStore::default();
        store
            .provision(record(1).with_sqn(Sqn::new(0).unwrap()))
            .unwrap();
        assert_eq!(store.next_sqn(&imsi(1)).unwrap().value(), 0);
        assert_eq!(store.next_sqn(&imsi(1)).unwrap().value(), 32);
        assert!(matches!(store.next_sqn(&imsi(9)), Err(Error::NotFound(_))));
    }

    #[test]
    fn next_sqn_exhaustion() {
        let mut store = SubscriberStore::default();
        store
            .provision(record(1).with_sqn(Sqn::new(Sqn::MAX).unwrap()))
            .unwrap();
        assert!(matches!(
            store.next_sqn(&imsi(1)),
            Err(Error::SqnExhausted(_))
        ));
        // state untouched on failure
        assert_eq!(store.get(&imsi(1)).unwrap().sqn_hn.value(), Sqn::MAX);
    }

    #[test]
    fn next_sqn_strictly_increasing() {
        let mut store = SubscriberStore::default();
        store.provision(record(1)).unwrap();
        let seq: Vec<u64> = (0..1000)
            .map(|_| store.next_sqn(&imsi(1)).unwrap().value())
            .collect();
        assert!(seq.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn accept_sqn_examples() {
        let p = SqnPolicy::new(100, 32).unwrap();
        let s = |v| Sqn::new(v).unwrap();
        assert_eq!(accept_sqn(s(32), s(0), p), SqnVerdict::Accept);
        assert_eq!(accept_sqn(s(64), s(64), p), SqnVerdict::SyncFailure);
        assert_eq!(accept_sqn(s(0), s(0), p), SqnVerdict::SyncFailure);
        assert_eq!(
            accept_sqn(s(Sqn::MAX), s(Sqn::MAX - 32), p),
            SqnVerdict::Accept
        );
    }

    #[test]
    fn resync_moves_home_ahead() {
        let mut store = SubscriberStore::default();
        let rec = record(1);
        let root = rec.root.clone();
        store.provision(rec).unwrap();
        let rand = [7u8; 16];
        let auts = build_auts(&root, &rand, Sqn::new(10_000).unwrap());
        store.resynchronize(&imsi(1), &rand, &auts).unwrap();
        assert_eq!(store.get(&imsi(1)).unwrap().sqn_hn.value(), 10_032);
        // repeating the same token is a no-op
        store.resynchronize(&imsi(1), &rand, &auts).unwrap();
        assert_eq!(store.get(&imsi(1)).unwrap().sqn_hn.value(), 10_032);
        // an older SQN_MS never moves the counter back
        let old = build_auts(&root, &rand, Sqn::new(5).unwrap());
        store.resynchronize(&imsi(1), &rand, &old).unwrap();
        assert_eq!(store.get(&imsi(1)).unwrap().sqn_hn.value(), 10_032);

        let mut bad = auts;
        bad[13] ^= 1;
        assert!(matches!(
            store.resynchronize(&imsi(1), &rand, &bad),
            Err(Error::Integrity(_))
        ));
    }
}
