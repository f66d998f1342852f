//! Distributed pseudonymisation of IP flows.
//!
//! Five semi-trusted peers jointly hold two master secrets — a pseudonym
//! factor n and an encryption-key factor s — as ten multiplicative shares.
//! Data lives in rerandomisable ElGamal triples; any three active peers can
//! re-pseudonymise, re-key, and re-randomise a cyphertext in one pass each,
//! and every step they take can be forced into a publicly verifiable
//! certificate.  No single peer (and no pair of peers) ever sees a plaintext
//! pseudonym, a full master secret, or the link between two domains.
//!
//! Layering, bottom up:
//!
//! * [`lizard`] — injective embedding of 16-byte addresses into the group.
//! * [`elgamal`] — the triple cyphertext and the rekey/reshuffle/rerandomise
//!   operators, including the fused single-pass form.
//! * [`keyshares`] — peer/triple identities, share partition, the dealerless
//!   setup exchange, and derivation of per-party shares.
//! * [`proofs`] — discrete-log equality certificates and the composite
//!   certificates for derivations and full transcryption steps.
//! * [`auth`] — message signatures for the wire roster.

pub mod auth;
pub mod codec;
pub mod elgamal;
pub mod error;
pub mod harness;
pub mod keyshares;
pub mod lizard;
pub mod parties;
pub mod peer;
pub mod permits;
pub mod proofs;
pub mod sealing;
pub mod ticket;
pub mod wire;

pub use error::{Error, Result};
