//! Per-variant AKA state machines for the UE, the serving CN and the home CN.
//!
//! Who checks what:
//!
//! | variant | UE checks | serving checks | home checks |
//! |---|---|---|---|
//! | gsm | nothing | SRES | - |
//! | umts, ecgsm-iot | MAC, SQN | RES | - |
//! | eps | MAC, SQN, AMF bit 0 | RES | - |
//! | eap-aka | MAC, SQN | - | RES |
//! | eap-aka-prime | MAC, SQN, AMF bit 0, ANI | - | RES |
//! | fiveg-aka | MAC, SQN, AMF bit 0 | HRES* | RES* |
//! | fiveg-eap-aka-prime | MAC, SQN, AMF bit 0, SNN | - | RES |

pub mod keys;
pub mod message;
pub mod party;
pub mod runner;
pub mod transcript;
pub mod usim;

pub use keys::SessionKeys;
pub use message::{
    AkaMessage, EapPayload, FailureCause, Link, MobileIdentity, ResultCode, Role, ServingVector,
};
pub use party::{
    extract_session_keys, new_party, sharing_boundary, Check, HomeConfig, Party, PartyConfig,
    Phase, ServingConfig, UeConfig, Verdict,
};
pub use runner::{run_to_completion, run_with_tap, MAX_ROUNDS};
pub use transcript::{PartyOutcome, ProtocolTranscript, RunStatus, TranscriptEntry};
pub use usim::Usim;

use crate::Variant;

/// Anything that can sit on the bus in one of the three roles.
pub trait Endpoint {
    fn role(&self) -> Role;
    fn variant(&self) -> Variant;
    fn step(&mut self, inbox: Vec<(Role, AkaMessage)>) -> Vec<(Role, AkaMessage)>;
    fn verdict(&self) -> Option<Verdict>;
    fn checks(&self) -> Vec<Check> {
        Vec::new()
    }
}
