//! Hex test-vector files for MILENAGE.
//!
//! One record per line, lowercase hex, space separated:
//! `name k op_c rand sqn amf res ck ik ak mac_a mac_s ak_s`.
//! Blank lines and lines starting with `#` are ignored.

use super::milenage::{milenage, MilenageOutput};
use super::types::{fixed_hex, Amf, Rand, RootKey, Sqn};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MilenageVector {
    pub name: String,
    pub root: RootKey,
    pub rand: Rand,
    pub sqn: Sqn,
    pub amf: Amf,
    pub expected: MilenageOutput,
}

impl MilenageVector {
    pub fn check(&self) -> bool {
        milenage(&self.root, &self.rand, self.sqn, self.amf) == self.expected
    }
}

pub fn parse_milenage_vectors(text: &str) -> Result<Vec<MilenageVector>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |reason: String| Error::Parse {
            line: idx + 1,
            reason,
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 13 {
            return Err(perr(format!("expected 13 fields, found {}", f.len())));
        }
        if f[1..]
            .iter()
            .any(|h| h.chars().any(|c| c.is_ascii_uppercase()))
        {
            return Err(perr("hex must be lowercase".into()));
        }
        let parsed = (|| -> Result<MilenageVector> {
            Ok(MilenageVector {
                name: f[0].to_string(),
                root: RootKey::from_hex(f[1], f[2])?,
                rand: fixed_hex(f[3], "rand")?,
                sqn: Sqn::from_bytes(fixed_hex(f[4], "sqn")?),
                amf: fixed_hex(f[5], "amf")?,
                expected: MilenageOutput {
                    res: fixed_hex(f[6], "res")?,
                    ck: fixed_hex(f[7], "ck")?,
                    ik: fixed_hex(f[8], "ik")?,
                    ak: fixed_hex(f[9], "ak")?,
                    mac_a: fixed_hex(f[10], "mac_a")?,
                    mac_s: fixed_hex(f[11], "mac_s")?,
                    ak_s: fixed_hex(f[12], "ak_s")?,
                },
            })
        })();
        out.push(parsed.map_err(|e| perr(e.to_string()))?);
    }
    Ok(out)
}

/// Formats one vector line; the caller supplies key material explicitly since
/// `RootKey` has no serializer.
pub fn format_milenage_vector(
    name: &str,
    k: &[u8; 16],
    op_c: &[u8; 16],
    rand: &Rand,
    sqn: Sqn,
    amf: Amf,
) -> String {
    let o = milenage(&RootKey::new(*k, *op_c), rand, sqn, amf);
    [
        name.to_string(),
        hex::encode(k),
        hex::encode(op_c),
        hex::encode(rand),
        hex::encode(sqn.to_bytes()),
        hex::encode(amf),
        hex::encode(o.res),
        hex::encode(o.ck),
        hex::encode(o.ik),
        hex::encode(o.ak),
        hex::encode(o.mac_a),
        hex::encode(o.mac_s),
        hex::encode(o.ak_s),
    ]
    .join(" ")
}
