//! Text persistence for the subscriber store.
//!
//! ```text
//! # comment
//! version 1
//! policy <window_size> <step>
//! <imsi> <supi> <k_hex> <opc_hex> <sqn_hex> <amf_hex> <generations_csv>
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Imsi, SqnPolicy, SubscriberRecord, SubscriberStore};
use crate::crypto::types::fixed_hex;
use crate::crypto::{RootKey, Sqn};
use crate::error::{Error, Result};
use crate::Variant;

pub const FORMAT_VERSION: u32 = 1;

impl SubscriberStore {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# akasim subscriber database\n");
        out.push_str(&format!("version {FORMAT_VERSION}\n"));
        out.push_str(&format!(
            "policy {} {}\n",
            self.policy.window_size, self.policy.step
        ));
        for r in self.records.values() {
            let gens: Vec<&str> = r.generations.iter().map(|v| v.name()).collect();
            let gens = if gens.is_empty() {
                "-".to_string()
            } else {
                gens.join(",")
            };
            out.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                r.imsi,
                r.supi,
                hex::encode(r.root.k()),
                hex::encode(r.root.op_c()),
                hex::encode(r.sqn_hn.to_bytes()),
                hex::encode(r.amf),
                gens
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut version = None;
        let mut store = SubscriberStore::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |reason: String| Error::Parse {
                line: idx + 1,
                reason,
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "version" => {
                    let v: u32 = f
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr("bad version line".into()))?;
                    if v != FORMAT_VERSION {
                        return Err(perr(format!("unsupported format version {v}")));
                    }
                    version = Some(v);
                }
                "policy" => {
                    let nums: Vec<u64> = f[1..].iter().filter_map(|s| s.parse().ok()).collect();
                    if nums.len() != 2 || f.len() != 3 {
                        return Err(perr("policy needs <window_size> <step>".into()));
                    }
                    store.policy =
                        SqnPolicy::new(nums[0], nums[1]).map_err(|e| perr(e.to_string()))?;
                }
                _ => {
                    if version.is_none() {
                        return Err(perr("record before version line".into()));
                    }
                    let rec = parse_record(&f).map_err(|e| perr(e.to_string()))?;
                    store.provision(rec).map_err(|e| perr(e.to_string()))?;
                }
            }
        }
        if version.is_none() {
            return Err(Error::Parse {
                line: 0,
                reason: "missing version line".into(),
            });
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    /// Writes to a sibling temp file and renames it over the target.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn parse_record(f: &[&str]) -> Result<SubscriberRecord> {
    if f.len() != 7 {
        return Err(Error::MalformedInput(format!(
            "expected 7 fields, found {}",
            f.len()
        )));
    }
    let imsi = Imsi::new(f[0])?;
    let root = RootKey::from_hex(f[2], f[3])?;
    let sqn = Sqn::from_bytes(fixed_hex(f[4], "sqn")?);
    let amf = fixed_hex(f[5], "amf")?;
    let generations: BTreeSet<Variant> = if f[6] == "-" {
        BTreeSet::new()
    } else {
        f[6].split(',').map(str::parse).collect::<Result<_>>()?
    };
    Ok(SubscriberRecord {
        imsi,
        supi: f[1].to_string(),
        root,
        sqn_hn: sqn,
        amf,
        generations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_record() -> impl Strategy<Value = SubscriberRecord> {
        (
            "[0-9]{15}",
            any::<[u8; 16]>(),
            any::<[u8; 16]>(),
            0..=Sqn::MAX,
            any::<[u8; 2]>(),
            proptest::collection::btree_set(0usize..8, 0..8),
        )
            .prop_map(|(imsi, k, opc, sqn, amf, gens)| {
                SubscriberRecord::new(Imsi::new(imsi).unwrap(), RootKey::new(k, opc))
                    .with_sqn(Sqn::new(sqn).unwrap())
                    .with_amf(amf)
                    .with_generations(gens.into_iter().map(|i| Variant::ALL[i]))
            })
    }

    proptest! {
        #[test]
        fn text_round_trip(records in proptest::collection::vec(arb_record(), 0..6),
                           window in 1u64..1000, step in 1u64..1000) {
            let mut store = SubscriberStore::new(SqnPolicy::new(window, step).unwrap());
            for r in records {
                // duplicate IMSIs from the generator are skipped
                let _ = store.provision(r);
            }
            let back = SubscriberStore::from_text(&store.to_text()).unwrap();
            prop_assert_eq!(back, store);
        }
    }

    #[test]
    fn rejects_bad_files() {
        assert!(SubscriberStore::from_text("").is_err());
        assert!(SubscriberStore::from_text("version 2\n").is_err());
        let rec = "001010123456789 001010123456789 00000000000000000000000000000000 \
                   00000000000000000000000000000000 000000000020 0000 gsm";
        assert!(SubscriberStore::from_text(rec).is_err());
        let ok = format!("version 1\n{rec}\n");
        assert_eq!(SubscriberStore::from_text(&ok).unwrap().len(), 1);
        let dup = format!("version 1\n{rec}\n{rec}\n");
        assert!(matches!(
            SubscriberStore::from_text(&dup),
            Err(Error::Parse { line: 3, .. })
        ));
        let bad_gen = format!("version 1\n{}\n", rec.replace("gsm", "lte"));
        assert!(SubscriberStore::from_text(&bad_gen).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = std::env::temp_dir().join(format!("akasim-db-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("subscribers.db");
        let mut store = SubscriberStore::default();
        store
            .provision(SubscriberRecord::new(
                Imsi::new("001010123456789").unwrap(),
                RootKey::new([1; 16], [2; 16]),
            ))
            .unwrap();
        store.save(&path).unwrap();
        assert_eq!(SubscriberStore::load(&path).unwrap(), store);
        fs::remove_dir_all(dir).unwrap();
    }
}
