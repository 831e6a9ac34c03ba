//! Executable models of the 3GPP Authentication and Key Agreement family,
//! from 2G GSM AKA to 5G EAP-AKA', with a deterministic adversary harness.
//!
//! Layers, bottom up:
//!
//! * [`crypto`]: MILENAGE, A3/A8 conversion, the 3GPP KDF and the 4G/5G key
//!   hierarchy, EAP-AKA/EAP-AKA' key schedules, SUCI concealment.
//! * [`subscriber`]: the home network database and SQN policy.
//! * [`vectors`]: authentication-vector generation for every generation.
//! * [`engine`]: per-variant state machines for UE, serving CN and home CN.
//! * [`harness`]: simulated bus, attack scenarios, and the property matrix.

pub mod crypto;
pub mod engine;
pub mod error;
pub mod harness;
pub mod subscriber;
pub mod variant;
pub mod vectors;

pub use error::{Error, Result};
pub use variant::Variant;
