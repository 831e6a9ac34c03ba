//! Session keys produced by a successful run.

use crate::crypto::{fingerprint, Key128, Key256, Key512, Key64};

/// Key material one party holds after AKA. Only the fields its variant and
/// role legitimately own are populated.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SessionKeys {
    pub kc: Option<Key64>,
    pub ck: Option<Key128>,
    pub ik: Option<Key128>,
    pub kc128: Option<Key128>,
    pub ki128: Option<Key128>,
    pub kasme: Option<Key256>,
    pub msk: Option<Key512>,
    pub emsk: Option<Key512>,
    pub kausf: Option<Key256>,
    pub kseaf: Option<Key256>,
    pub kamf: Option<Key256>,
}

impl SessionKeys {
    /// `(name, bytes)` for every populated key, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, &[u8])> {
        let mut out: Vec<(&'static str, &[u8])> = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => {$(
                if let Some(k) = &self.$f {
                    out.push((stringify!($f), k.as_slice()));
                }
            )*};
        }
        push!(kc, ck, ik, kc128, ki128, kasme, msk, emsk, kausf, kseaf, kamf);
        out
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries().into_iter().map(|(n, _)| n).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.entries()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v)
    }

    pub fn is_empty(&self) -> bool {
        self.entries().is_empty()
    }

    /// Keys named in both sets whose values agree.
    pub fn agrees_with(&self, other: &SessionKeys, names: &[&str]) -> bool {
        names
            .iter()
            .all(|n| matches!((self.get(n), other.get(n)), (Some(a), Some(b)) if a == b))
    }

    /// One line per key: `name bits fingerprint` (or raw hex when `reveal`).
    pub fn describe(&self, reveal: bool) -> Vec<String> {
        self.entries()
            .into_iter()
            .map(|(n, v)| {
                let shown = if reveal {
                    hex::encode(v)
                } else {
                    fingerprint(v)
                };
                format!("{n} {} {shown}", v.len() * 8)
            })
            .collect()
    }
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.describe(false)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_and_agreement() {
        let a = SessionKeys {
            kc: Some([1; 8]),
            kasme: Some([2; 32]),
            ..Default::default()
        };
        let mut b = a.clone();
        assert_eq!(a.names(), ["kc", "kasme"]);
        assert!(a.agrees_with(&b, &["kc", "kasme"]));
        b.kasme = Some([3; 32]);
        assert!(!a.agrees_with(&b, &["kasme"]));
        assert!(!a.agrees_with(&b, &["kamf"]));
        assert_eq!(a.describe(false)[1].split(' ').nth(1), Some("256"));
        assert!(!format!("{a:?}").contains("0202"));
    }
}
