use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The eight AKA variants, oldest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Gsm,
    Umts,
    EcGsmIot,
    Eps,
    EapAka,
    EapAkaPrime,
    FiveGAka,
    FiveGEapAkaPrime,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Gsm,
        Variant::Umts,
        Variant::EcGsmIot,
        Variant::Eps,
        Variant::EapAka,
        Variant::EapAkaPrime,
        Variant::FiveGAka,
        Variant::FiveGEapAkaPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gsm => "gsm",
            Variant::Umts => "umts",
            Variant::EcGsmIot => "ecgsm-iot",
            Variant::Eps => "eps",
            Variant::EapAka => "eap-aka",
            Variant::EapAkaPrime => "eap-aka-prime",
            Variant::FiveGAka => "fiveg-aka",
            Variant::FiveGEapAkaPrime => "fiveg-eap-aka-prime",
        }
    }

    /// Challenges carry AUTN, so the UE authenticates the network.
    pub fn has_autn(self) -> bool {
        self != Variant::Gsm
    }

    /// UE verifies the AMF separation bit.
    pub fn checks_amf(self) -> bool {
        matches!(
            self,
            Variant::Eps | Variant::EapAkaPrime | Variant::FiveGAka | Variant::FiveGEapAkaPrime
        )
    }

    pub fn is_eap(self) -> bool {
        matches!(
            self,
            Variant::EapAka | Variant::EapAkaPrime | Variant::FiveGEapAkaPrime
        )
    }

    pub fn is_5g(self) -> bool {
        matches!(self, Variant::FiveGAka | Variant::FiveGEapAkaPrime)
    }

    /// Kind of serving-network identifier the variant binds into its keys, if any.
    pub fn serving_network_kind(self) -> Option<&'static str> {
        match self {
            Variant::Eps => Some("snid"),
            Variant::EapAkaPrime => Some("ani"),
            Variant::FiveGAka | Variant::FiveGEapAkaPrime => Some("snn"),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::MalformedInput(format!("unknown variant '{s}'")))
    }
}
