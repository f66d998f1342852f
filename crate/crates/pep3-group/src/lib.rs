//! A prime-order group built for pseudonymisation pipelines: ristretto255
//! arithmetic, two scalar rings, an invertible map from field elements onto
//! the group, and instrumentation hooks for counting scalar multiplications.
//!
//! Everything here is deliberately variable-time.  The operations are run by
//! infrastructure peers over data that is either public (certificates,
//! encodings on the wire) or long-lived secrets used in ways where timing
//! reveals at most Hamming-weight information the surrounding protocol
//! already leaks; constant-time hardening is out of scope and documented as
//! such.

pub mod counters;
pub mod elligator;
mod exponent;
mod field;
pub mod hash;
mod limbs;
mod point;
mod scalar;

pub use counters::MulCounts;
pub use exponent::ExponentScalar;
pub use field::FieldElement;
pub use point::GroupElement;
pub use scalar::Scalar;
