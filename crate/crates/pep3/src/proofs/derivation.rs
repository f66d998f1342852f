//! Proof that a share point really is x^e·B for the x committed to by a
//! public powers table.
//!
//! The verifier cannot exponentiate inside the group, so the prover walks
//! the bits of e: starting from the table entry for the lowest set bit, each
//! further set bit i contributes one certificate showing the running partial
//! was multiplied by exactly x^(2^i) — the scalar behind table entry i.  The
//! chain has popcount(e) − 1 links.

use pep3_group::{hash, ExponentScalar, GroupElement, Scalar};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::keyshares::PowersTable;
use crate::proofs::dh::{dh_prove, DhCertificate, NonceStream};

/// Certificate chain for one derived share point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DerivationProof {
    steps: Vec<(GroupElement, DhCertificate)>,
}

/// Builds the proof that base_mul(x^e) follows from x's powers table.
/// Returns the endpoint (the derived share point) together with the chain.
///
/// Nonces are derived deterministically from the secret and the statement,
/// so proving the same share twice yields identical bytes.
pub fn prove_derivation(
    master: &Scalar,
    e: &ExponentScalar,
) -> (GroupElement, DerivationProof) {
    assert!(!master.is_zero(), "zero master share");
    let bits = e.set_bits();
    assert!(!bits.is_empty(), "zero derivation exponent");

    let seed = hash::hash_to_scalar(
        "pep3.derivation.nonce-seed",
        &[&master.to_bytes(), &e.to_bytes()],
    )
    .to_bytes();
    let mut nonces = NonceStream::new(seed);

    // x^(2^i) for every needed i, by squaring
    let top = *bits.last().unwrap() as usize;
    let mut powers = Vec::with_capacity(top + 1);
    let mut p = *master;
    for _ in 0..=top {
        powers.push(p);
        p = p.mul(&p);
    }

    let mut partial_scalar = powers[bits[0] as usize];
    let mut partial_point = GroupElement::base_mul(&partial_scalar);
    let mut steps = Vec::with_capacity(bits.len() - 1);
    for &bit in &bits[1..] {
        let step_scalar = powers[bit as usize];
        let step_point = GroupElement::base_mul(&step_scalar);
        let next_scalar = partial_scalar.mul(&step_scalar);
        let next_point = GroupElement::base_mul(&next_scalar);
        let nonce = nonces.next(&step_point, &partial_point);
        let cert = dh_prove(&step_scalar, &step_point, &partial_point, &next_point, &nonce);
        steps.push((next_point, cert));
        partial_scalar = next_scalar;
        partial_point = next_point;
    }
    debug_assert_eq!(partial_scalar, master.pow(e));
    (partial_point, DerivationProof { steps })
}

/// Checks that `endpoint` is x^e·B for the x behind `table`.
pub fn verify_derivation(
    table: &PowersTable,
    e: &ExponentScalar,
    endpoint: &GroupElement,
    proof: &DerivationProof,
) -> Result<()> {
    let bits = e.set_bits();
    if bits.is_empty() {
        return Err(Error::BadCertificate("zero derivation exponent"));
    }
    if proof.steps.len() != bits.len() - 1 {
        return Err(Error::BadCertificate("derivation chain length"));
    }
    let mut partial = *table.entry(bits[0]);
    for (i, &bit) in bits[1..].iter().enumerate() {
        let (next, cert) = &proof.steps[i];
        cert.verify(table.entry(bit), &partial, next)?;
        partial = *next;
    }
    if partial != *endpoint {
        return Err(Error::BadCertificate("derivation endpoint"));
    }
    Ok(())
}

impl DerivationProof {
    pub fn write(&self, w: &mut Writer) {
        w.u16(self.steps.len() as u16);
        for (p, cert) in &self.steps {
            w.point(p);
            cert.write(w);
        }
    }

    pub fn read(r: &mut Reader) -> Result<DerivationProof> {
        let n = r.u16()? as usize;
        if n > 256 {
            return Err(Error::Encoding("derivation chain too long"));
        }
        let mut steps = Vec::with_capacity(n);
        for _ in 0..n {
            let p = r.point()?;
            let cert = DhCertificate::read(r)?;
            steps.push((p, cert));
        }
        Ok(DerivationProof { steps })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<DerivationProof> {
        let mut r = Reader::new(bytes);
        let p = DerivationProof::read(&mut r)?;
        r.finish()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyshares::{derive_share, hash_party_id};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn honest_derivations_verify() {
        let mut rng = StdRng::seed_from_u64(20);
        let master = Scalar::random_nonzero(&mut rng);
        let table = PowersTable::build(&master);
        for id in ["mp", "sf", "researcher", "investigator"] {
            let e = hash_party_id(id);
            let (endpoint, proof) = prove_derivation(&master, &e);
            assert_eq!(endpoint, GroupElement::base_mul(&derive_share(&master, &e)));
            verify_derivation(&table, &e, &endpoint, &proof).unwrap();
            // deterministic, so re-proving is byte-identical
            let (e2, p2) = prove_derivation(&master, &e);
            assert_eq!(endpoint, e2);
            assert_eq!(proof.to_bytes(), p2.to_bytes());
            // encoding roundtrip
            let decoded = DerivationProof::from_bytes(&proof.to_bytes()).unwrap();
            verify_derivation(&table, &e, &endpoint, &decoded).unwrap();
        }
    }

    #[test]
    fn single_bit_exponent_needs_no_chain() {
        let mut rng = StdRng::seed_from_u64(21);
        let master = Scalar::random_nonzero(&mut rng);
        let table = PowersTable::build(&master);
        let e = ExponentScalar::from_u64(1 << 9);
        let (endpoint, proof) = prove_derivation(&master, &e);
        assert!(proof.steps.is_empty());
        assert_eq!(endpoint, *table.entry(9));
        verify_derivation(&table, &e, &endpoint, &proof).unwrap();
    }

    #[test]
    fn lies_are_rejected() {
        let mut rng = StdRng::seed_from_u64(22);
        let master = Scalar::random_nonzero(&mut rng);
        let other = Scalar::random_nonzero(&mut rng);
        let table = PowersTable::build(&master);
        let e = hash_party_id("mp");
        let (endpoint, proof) = prove_derivation(&master, &e);

        // wrong endpoint
        let bad = endpoint.add(&GroupElement::BASE);
        assert!(verify_derivation(&table, &e, &bad, &proof).is_err());
        // proof for a different exponent
        let e2 = hash_party_id("sf");
        assert!(verify_derivation(&table, &e2, &endpoint, &proof).is_err());
        // proof built from a different master against this table
        let (ep3, proof3) = prove_derivation(&other, &e);
        assert!(verify_derivation(&table, &e, &ep3, &proof3).is_err());
        // truncated chain
        let mut short = proof.clone();
        short.steps.pop();
        assert!(verify_derivation(&table, &e, &endpoint, &short).is_err());
        // any single mutated byte
        let good = proof.to_bytes();
        for i in (0..good.len()).step_by(37) {
            let mut bad = good.clone();
            bad[i] ^= 1;
            let ok = DerivationProof::from_bytes(&bad)
                .and_then(|p| verify_derivation(&table, &e, &endpoint, &p));
            assert!(ok.is_err(), "mutation at byte {i} accepted");
        }
    }
}
