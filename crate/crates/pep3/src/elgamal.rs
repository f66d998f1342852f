//! ElGamal triples and the homomorphic operations peers apply to them.
//!
//! A cyphertext carries its target key (the public key it is encrypted
//! against) as a third component, so that relaying peers can re-key it
//! without knowing whose it is: (blinding, core, target) =
//! (r·B, M + r·τ, τ).

use pep3_group::{GroupElement, Scalar};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

pub const CYPHERTEXT_BYTES: usize = 96;

/// An ElGamal triple (blinding, core, target).
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Cyphertext {
    pub blinding: GroupElement,
    pub core: GroupElement,
    pub target: GroupElement,
}

impl Cyphertext {
    pub fn to_bytes(&self) -> [u8; CYPHERTEXT_BYTES] {
        let mut out = [0u8; CYPHERTEXT_BYTES];
        out[0..32].copy_from_slice(&self.blinding.encode());
        out[32..64].copy_from_slice(&self.core.encode());
        out[64..96].copy_from_slice(&self.target.encode());
        out
    }

    pub fn from_bytes(bytes: &[u8; CYPHERTEXT_BYTES]) -> Result<Cyphertext> {
        let part = |range: std::ops::Range<usize>| -> Result<GroupElement> {
            GroupElement::decode(bytes[range].try_into().unwrap())
                .ok_or(Error::Encoding("cyphertext component"))
        };
        Ok(Cyphertext {
            blinding: part(0..32)?,
            core: part(32..64)?,
            target: part(64..96)?,
        })
    }
}

impl core::fmt::Debug for Cyphertext {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Cyphertext({})", hex::encode(self.to_bytes()))
    }
}

/// Encrypts a message element against a target key with blinding factor r.
pub fn encrypt(message: &GroupElement, target: &GroupElement, r: &Scalar) -> Cyphertext {
    Cyphertext {
        blinding: GroupElement::base_mul(r),
        core: message.add(&target.mul(r)),
        target: *target,
    }
}

/// Encrypts with a fresh nonzero blinding factor.
pub fn encrypt_random<R: RngCore + CryptoRng>(
    message: &GroupElement,
    target: &GroupElement,
    rng: &mut R,
) -> Cyphertext {
    encrypt(message, target, &Scalar::random_nonzero(rng))
}

/// Decrypts with the secret matching the cyphertext's target key.
pub fn decrypt(c: &Cyphertext, secret: &Scalar) -> GroupElement {
    c.core.sub(&c.blinding.mul(secret))
}

/// Re-keys from target τ to k·τ: holders of k·s can now decrypt.
pub fn rekey(c: &Cyphertext, k: &Scalar) -> Result<Cyphertext> {
    let k_inv = k.invert().ok_or(Error::ZeroFactor)?;
    Ok(Cyphertext {
        blinding: c.blinding.mul(&k_inv),
        core: c.core,
        target: c.target.mul(k),
    })
}

/// Multiplies the plaintext by n without decrypting.
pub fn reshuffle(c: &Cyphertext, n: &Scalar) -> Result<Cyphertext> {
    if n.is_zero() {
        return Err(Error::ZeroFactor);
    }
    Ok(Cyphertext {
        blinding: c.blinding.mul(n),
        core: c.core.mul(n),
        target: c.target,
    })
}

/// Refreshes the blinding; decrypts identically. r = 0 is the identity map.
pub fn rerandomise(c: &Cyphertext, r: &Scalar) -> Cyphertext {
    Cyphertext {
        blinding: c.blinding.add(&GroupElement::base_mul(r)),
        core: c.core.add(&c.target.mul(r)),
        target: c.target,
    }
}

/// Fused rerandomise-reshuffle-rekey.  Costs four general multiplications
/// plus one base multiplication; `rsk_to_target` saves one more when the
/// output target s·τ is already known.
pub fn rsk(c: &Cyphertext, s: &Scalar, n: &Scalar, r: &Scalar) -> Result<Cyphertext> {
    let new_target = c.target.mul(s);
    rsk_to_target(c, s, n, r, &new_target)
}

/// `rsk` with the output target point supplied by the caller, who must pass
/// exactly s·τ (peers cache this per target key within a batch).
pub fn rsk_to_target(
    c: &Cyphertext,
    s: &Scalar,
    n: &Scalar,
    r: &Scalar,
    new_target: &GroupElement,
) -> Result<Cyphertext> {
    if n.is_zero() {
        return Err(Error::ZeroFactor);
    }
    let s_inv = s.invert().ok_or(Error::ZeroFactor)?;
    let ns_inv = n.mul(&s_inv);
    Ok(Cyphertext {
        blinding: c.blinding.add(&GroupElement::base_mul(r)).mul(&ns_inv),
        core: c.core.add(&c.target.mul(r)).mul(n),
        target: *new_target,
    })
}
