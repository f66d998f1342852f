//! Symmetric sealing used for proof tickets, enrolment share boxes, and
//! secrets at rest: 12-byte random nonce ‖ ChaCha20-Poly1305 box.

use chacha20poly1305::aead::Aead;
use chacha20poly1305::{ChaCha20Poly1305, Key, KeyInit, Nonce};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::auth::{AuthPublic, AuthSecret};

/// Sealing key between two nodes with static keys: both sides derive the
/// same key from their own secret and the other's roster entry.
pub fn box_key(own: &AuthSecret, other: &AuthPublic) -> [u8; 32] {
    let shared = other.0.mul(own.to_scalar());
    let mut h = Sha256::new();
    h.update(b"pep3.enrolment.box");
    h.update(shared.encode());
    h.finalize().into()
}

pub fn seal<R: RngCore + CryptoRng>(key: &[u8; 32], plaintext: &[u8], rng: &mut R) -> Vec<u8> {
    let cipher = ChaCha20Poly1305::new(Key::from_slice(key));
    let mut nonce = [0u8; 12];
    rng.fill_bytes(&mut nonce);
    let mut out = nonce.to_vec();
    out.extend_from_slice(
        &cipher
            .encrypt(Nonce::from_slice(&nonce), plaintext)
            .expect("aead encrypt"),
    );
    out
}

pub fn open(key: &[u8; 32], sealed: &[u8]) -> Option<Vec<u8>> {
    if sealed.len() < 12 {
        return None;
    }
    let cipher = ChaCha20Poly1305::new(Key::from_slice(key));
    cipher.decrypt(Nonce::from_slice(&sealed[..12]), &sealed[12..]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn roundtrip_and_rejection() {
        let mut rng = StdRng::seed_from_u64(3);
        let key = [1u8; 32];
        let sealed = seal(&key, b"secret", &mut rng);
        assert_eq!(open(&key, &sealed).unwrap(), b"secret");
        assert!(open(&[2u8; 32], &sealed).is_none());
        let mut bad = sealed.clone();
        *bad.last_mut().unwrap() ^= 1;
        assert!(open(&key, &bad).is_none());
        assert!(open(&key, &[]).is_none());
    }

    #[test]
    fn box_key_is_symmetric() {
        let mut rng = StdRng::seed_from_u64(4);
        let a = AuthSecret::generate(&mut rng);
        let b = AuthSecret::generate(&mut rng);
        let c = AuthSecret::generate(&mut rng);
        assert_eq!(box_key(&a, &b.public()), box_key(&b, &a.public()));
        assert_ne!(box_key(&a, &b.public()), box_key(&a, &c.public()));
    }
}
