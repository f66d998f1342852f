//! Proof tickets: a peer's sealed memo of a transcryption hop it performed.
//!
//! Peers keep no per-request state.  Instead each response carries a ticket
//! encrypted under the peer's own AEAD key, holding everything needed to
//! re-derive the hop's certificate later: the mode, the endpoints, the
//! assigned triples, the blinding nonce r, and a hash binding the ticket to
//! the exact request.  The requester stores the ticket opaquely and hands it
//! back when it wants a proof; any forgery or cross-wiring fails the AEAD
//! or the hash check.

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use pep3_group::Scalar;

use crate::codec::{Reader, Writer};
use crate::elgamal::Cyphertext;
use crate::error::{Error, Result};
use crate::keyshares::TripleId;
use crate::proofs::Mode;

/// What a ticket seals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TicketBody {
    pub mode: Mode,
    pub from: String,
    pub to: String,
    pub assigned: Vec<TripleId>,
    /// The blinding nonce this hop used.
    pub r: Scalar,
    /// Binds the ticket to the request that produced it.
    pub request_hash: [u8; 32],
}

/// Hash identifying one hop request: who asked for what on which input.
pub fn request_hash(
    mode: Mode,
    from: &str,
    to: &str,
    assigned: &[TripleId],
    input: &Cyphertext,
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pep3.request.v1");
    h.update([mode.byte(), assigned.len() as u8]);
    for t in assigned {
        h.update([t.index()]);
    }
    h.update((from.len() as u32).to_be_bytes());
    h.update(from.as_bytes());
    h.update((to.len() as u32).to_be_bytes());
    h.update(to.as_bytes());
    h.update(input.to_bytes());
    h.finalize().into()
}

impl TicketBody {
    /// Seed for the deterministic certificate nonces of this hop, so that
    /// re-proving from the same ticket is byte-identical.
    pub fn proof_seed(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"pep3.ticket.proof-seed");
        h.update(self.r.to_bytes());
        h.update(self.request_hash);
        h.finalize().into()
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.mode.byte());
        w.string(&self.from);
        w.string(&self.to);
        w.u8(self.assigned.len() as u8);
        for t in &self.assigned {
            w.u8(t.index());
        }
        w.scalar(&self.r);
        w.bytes(&self.request_hash);
        w.into_bytes()
    }

    fn from_bytes(bytes: &[u8]) -> Result<TicketBody> {
        let mut r = Reader::new(bytes);
        let mode = Mode::from_byte(r.u8()?).ok_or(Error::Encoding("ticket mode"))?;
        let from = r.string()?;
        let to = r.string()?;
        let count = r.u8()? as usize;
        let mut assigned = Vec::with_capacity(count);
        for _ in 0..count {
            assigned.push(TripleId::from_index(r.u8()?).ok_or(Error::Encoding("ticket triple"))?);
        }
        let nonce = r.scalar()?;
        let request_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
        r.finish()?;
        Ok(TicketBody { mode, from, to, assigned, r: nonce, request_hash })
    }
}

/// Encrypts a ticket under the peer's key.
pub fn seal_ticket<R: RngCore + CryptoRng>(
    key: &[u8; 32],
    body: &TicketBody,
    rng: &mut R,
) -> Vec<u8> {
    crate::sealing::seal(key, &body.to_bytes(), rng)
}

/// Opens a ticket; any tampering or a foreign key fails.
pub fn open_ticket(key: &[u8; 32], ticket: &[u8]) -> Result<TicketBody> {
    let plain = crate::sealing::open(key, ticket)
        .ok_or(Error::TicketRejected("aead authentication failed"))?;
    TicketBody::from_bytes(&plain).map_err(|_| Error::TicketRejected("malformed body"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pep3_group::GroupElement;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn body(rng: &mut StdRng) -> TicketBody {
        let input = crate::elgamal::encrypt_random(
            &GroupElement::random(rng),
            &GroupElement::random(rng),
            rng,
        );
        let assigned: Vec<TripleId> = TripleId::all().take(4).collect();
        TicketBody {
            mode: Mode::Translate,
            from: "researcher".into(),
            to: "sf".into(),
            assigned: assigned.clone(),
            r: Scalar::random(rng),
            request_hash: request_hash(Mode::Translate, "researcher", "sf", &assigned, &input),
        }
    }

    #[test]
    fn seal_open_roundtrip() {
        let mut rng = StdRng::seed_from_u64(40);
        let key = [7u8; 32];
        let b = body(&mut rng);
        let sealed = seal_ticket(&key, &b, &mut rng);
        assert_eq!(open_ticket(&key, &sealed).unwrap(), b);
        // sealing twice uses fresh nonces
        let sealed2 = seal_ticket(&key, &b, &mut rng);
        assert_ne!(sealed, sealed2);
        assert_eq!(open_ticket(&key, &sealed2).unwrap(), b);
        // but the proof seed depends only on the body
        assert_eq!(b.proof_seed(), open_ticket(&key, &sealed2).unwrap().proof_seed());
    }

    #[test]
    fn tampering_and_wrong_keys_are_rejected() {
        let mut rng = StdRng::seed_from_u64(41);
        let key = [8u8; 32];
        let sealed = seal_ticket(&key, &body(&mut rng), &mut rng);
        assert!(matches!(open_ticket(&[9u8; 32], &sealed), Err(Error::TicketRejected(_))));
        for i in 0..sealed.len() {
            let mut bad = sealed.clone();
            bad[i] ^= 1;
            assert!(open_ticket(&key, &bad).is_err(), "byte {i}");
        }
        assert!(open_ticket(&key, &[]).is_err());
    }

    #[test]
    fn request_hash_separates_requests() {
        let mut rng = StdRng::seed_from_u64(42);
        let input = crate::elgamal::encrypt_random(
            &GroupElement::random(&mut rng),
            &GroupElement::random(&mut rng),
            &mut rng,
        );
        let assigned: Vec<TripleId> = TripleId::all().take(2).collect();
        let h = request_hash(Mode::Pseudonymise, "mp", "sf", &assigned, &input);
        assert_ne!(h, request_hash(Mode::Translate, "mp", "sf", &assigned, &input));
        assert_ne!(h, request_hash(Mode::Pseudonymise, "sf", "mp", &assigned, &input));
        assert_ne!(h, request_hash(Mode::Pseudonymise, "mp", "sf", &assigned[..1], &input));
        let other = crate::elgamal::encrypt_random(
            &GroupElement::random(&mut rng),
            &GroupElement::random(&mut rng),
            &mut rng,
        );
        assert_ne!(h, request_hash(Mode::Pseudonymise, "mp", "sf", &assigned, &other));
    }
}
