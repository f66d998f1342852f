//! Schnorr signatures over the group, used for static node authentication
//! on the wire and for permits.

use pep3_group::{hash, GroupElement, Scalar};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

pub const SIGNATURE_BYTES: usize = 64;

#[derive(Clone)]
pub struct AuthSecret {
    secret: Scalar,
    public: GroupElement,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AuthPublic(pub GroupElement);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Signature {
    pub commitment: GroupElement,
    pub response: Scalar,
}

impl AuthSecret {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> AuthSecret {
        let secret = Scalar::random_nonzero(rng);
        AuthSecret {
            secret,
            public: GroupElement::base_mul(&secret),
        }
    }

    pub fn from_scalar(secret: Scalar) -> Result<AuthSecret> {
        if secret.is_zero() {
            return Err(Error::Encoding("zero auth secret"));
        }
        Ok(AuthSecret {
            public: GroupElement::base_mul(&secret),
            secret,
        })
    }

    pub fn to_scalar(&self) -> &Scalar {
        &self.secret
    }

    pub fn public(&self) -> AuthPublic {
        AuthPublic(self.public)
    }

    pub fn sign<R: RngCore + CryptoRng>(
        &self,
        domain: &str,
        parts: &[&[u8]],
        rng: &mut R,
    ) -> Signature {
        let k = Scalar::random_nonzero(rng);
        let commitment = GroupElement::base_mul(&k);
        let c = challenge(domain, &commitment, &self.public, parts);
        Signature {
            commitment,
            response: k.add(&c.mul(&self.secret)),
        }
    }
}

impl AuthPublic {
    pub fn verify(&self, domain: &str, parts: &[&[u8]], sig: &Signature) -> bool {
        let c = challenge(domain, &sig.commitment, &self.0, parts);
        GroupElement::base_mul(&sig.response) == sig.commitment.add(&self.0.mul(&c))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.encode()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<AuthPublic> {
        GroupElement::decode(bytes)
            .map(AuthPublic)
            .ok_or(Error::Encoding("auth public key"))
    }
}

fn challenge(
    domain: &str,
    commitment: &GroupElement,
    public: &GroupElement,
    parts: &[&[u8]],
) -> Scalar {
    let c_enc = commitment.encode();
    let p_enc = public.encode();
    let mut all: Vec<&[u8]> = vec![&c_enc, &p_enc];
    all.extend_from_slice(parts);
    hash::hash_to_scalar(&format!("pep3.auth.{domain}"), &all)
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_BYTES] {
        let mut out = [0u8; SIGNATURE_BYTES];
        out[0..32].copy_from_slice(&self.commitment.encode());
        out[32..64].copy_from_slice(&self.response.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; SIGNATURE_BYTES]) -> Result<Signature> {
        Ok(Signature {
            commitment: GroupElement::decode(bytes[0..32].try_into().unwrap())
                .ok_or(Error::Encoding("signature commitment"))?,
            response: Scalar::from_canonical_bytes(bytes[32..64].try_into().unwrap())
                .ok_or(Error::Encoding("signature response"))?,
        })
    }
}
