//! The subscriber side of the shared secret: USIM (or SIM, for 2G) state.

use std::fmt;
use std::sync::Arc;

use crate::crypto::gsm::default_a3a8;
use crate::crypto::{AuthAlgorithm, Milenage, RootKey, Sqn, A3A8};
use crate::error::{Error, Result};
use crate::subscriber::{Imsi, SqnPolicy};

#[derive(Clone)]
pub struct Usim {
    pub imsi: Imsi,
    pub supi: String,
    root: RootKey,
    /// Highest SQN accepted so far.
    pub sqn_ms: Sqn,
    pub policy: SqnPolicy,
    pub(crate) res_len: usize,
    algorithm: Arc<dyn AuthAlgorithm>,
    a3a8: Arc<dyn A3A8>,
}

impl Usim {
    /// SUPI equals the IMSI digits, SQN_MS starts at zero, 64-bit RES.
    pub fn new(imsi: Imsi, root: RootKey) -> Self {
        Self {
            supi: imsi.as_str().to_string(),
            imsi,
            root,
            sqn_ms: Sqn::default(),
            policy: SqnPolicy::default(),
            res_len: 8,
            algorithm: Arc::new(Milenage),
            a3a8: default_a3a8(),
        }
    }

    pub fn with_supi(mut self, supi: impl Into<String>) -> Self {
        self.supi = supi.into();
        self
    }

    pub fn with_sqn_ms(mut self, sqn: Sqn) -> Self {
        self.sqn_ms = sqn;
        self
    }

    pub fn with_policy(mut self, policy: SqnPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_res_len(mut self, octets: usize) -> Result<Self> {
        if !(4..=8).contains(&octets) {
            return Err(Error::Configuration(format!(
                "RES length {octets} outside 4..=8 octets"
            )));
        }
        self.res_len = octets;
        Ok(self)
    }

    pub fn with_algorithm(mut self, algorithm: Arc<dyn AuthAlgorithm>) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_a3a8(mut self, a3a8: Arc<dyn A3A8>) -> Self {
        self.a3a8 = a3a8;
        self
    }

    pub fn res_len(&self) -> usize {
        self.res_len
    }

    pub(crate) fn root(&self) -> &RootKey {
        &self.root
    }

    pub(crate) fn algorithm(&self) -> Arc<dyn AuthAlgorithm> {
        self.algorithm.clone()
    }

    pub(crate) fn a3a8(&self) -> &dyn A3A8 {
        self.a3a8.as_ref()
    }
}

impl fmt::Debug for Usim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Usim")
            .field("imsi", &self.imsi)
            .field("supi", &self.supi)
            .field("sqn_ms", &self.sqn_ms)
            .field("res_len", &self.res_len)
            .finish_non_exhaustive()
    }
}
