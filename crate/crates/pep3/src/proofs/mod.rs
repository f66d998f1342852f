//! Publicly verifiable certificates for everything a peer does.

mod derivation;
mod dh;
mod rsk;

pub use derivation::{prove_derivation, verify_derivation, DerivationProof};
pub use dh::{dh_prove, DhCertificate, NonceStream, DH_CERT_BYTES};
pub use rsk::{
    expected_factors, prove_rsk, FactorShares, HopSecrets, Mode, RskCertificate,
    SharePointSource,
};
