//! Per-peer master share material and the public powers tables.
//!
//! A peer holds, per triple it belongs to and per kind, a master share x.
//! Party-specific shares are x^H(id) where H hashes the party id into the
//! exponent ring; the public powers table for x lists x^(2^i)·B for every
//! bit position, which is what lets anyone verify a derivation chain without
//! ever seeing x.

use std::collections::BTreeMap;

use pep3_group::{hash, ExponentScalar, GroupElement, Scalar};

use super::{PeerId, TripleId};
use crate::error::{Error, Result};

/// Bit width of derivation exponents; tables carry one point per bit.
pub const TABLE_BITS: usize = 253;

/// Which of the two master secrets a share belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ShareKind {
    /// n: multiplies pseudonyms.
    Pseudonym,
    /// s: blinds encryption keys.
    Encryption,
}

impl ShareKind {
    pub const BOTH: [ShareKind; 2] = [ShareKind::Pseudonym, ShareKind::Encryption];

    pub fn byte(self) -> u8 {
        match self {
            ShareKind::Pseudonym => 0,
            ShareKind::Encryption => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<ShareKind> {
        match b {
            0 => Some(ShareKind::Pseudonym),
            1 => Some(ShareKind::Encryption),
            _ => None,
        }
    }
}

impl core::fmt::Display for ShareKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ShareKind::Pseudonym => write!(f, "pseudonym"),
            ShareKind::Encryption => write!(f, "encryption"),
        }
    }
}

/// Hashes a party id into a nonzero exponent; zero rehashes with a counter.
pub fn hash_party_id(id: &str) -> ExponentScalar {
    for counter in 0u8..=255 {
        let e = hash::hash_to_exponent("pep3.party.exponent", &[&[counter], id.as_bytes()]);
        if !e.is_zero() {
            return e;
        }
    }
    unreachable!("256 consecutive zero hashes");
}

/// The party-specific share x^H(id).
pub fn derive_share(master: &Scalar, id_exponent: &ExponentScalar) -> Scalar {
    debug_assert!(!master.is_zero());
    master.pow(id_exponent)
}

/// Public commitment to a master share: x^(2^i)·B for i in 0..TABLE_BITS.
#[derive(Clone, PartialEq, Eq)]
pub struct PowersTable {
    entries: Vec<GroupElement>,
}

impl core::fmt::Debug for PowersTable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "PowersTable({} entries, [0] = {:?})", self.entries.len(), self.entries[0])
    }
}

impl PowersTable {
    pub fn build(master: &Scalar) -> PowersTable {
        assert!(!master.is_zero(), "zero master share");
        let mut entries = Vec::with_capacity(TABLE_BITS);
        let mut power = *master;
        for _ in 0..TABLE_BITS {
            entries.push(GroupElement::base_mul(&power));
            power = power.mul(&power);
        }
        PowersTable { entries }
    }

    pub fn entry(&self, bit: u32) -> &GroupElement {
        &self.entries[bit as usize]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(TABLE_BITS * 32);
        for e in &self.entries {
            out.extend_from_slice(&e.encode());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<PowersTable> {
        if bytes.len() != TABLE_BITS * 32 {
            return Err(Error::Encoding("powers table length"));
        }
        let mut entries = Vec::with_capacity(TABLE_BITS);
        for chunk in bytes.chunks_exact(32) {
            entries.push(
                GroupElement::decode(chunk.try_into().unwrap())
                    .ok_or(Error::Encoding("powers table entry"))?,
            );
        }
        Ok(PowersTable { entries })
    }
}

/// Everything one peer must keep secret (plus the public tables it trusts).
#[derive(Clone)]
pub struct MasterSecrets {
    pub id: PeerId,
    /// Master shares for the six triples this peer belongs to, both kinds.
    shares: BTreeMap<(TripleId, ShareKind), Scalar>,
    /// Agreed public powers tables for all ten triples, both kinds.
    tables: BTreeMap<(TripleId, ShareKind), PowersTable>,
    /// AEAD key sealing proof tickets; rotated only at setup.
    pub ticket_key: [u8; 32],
}

// Never print share material, even in panics.
impl core::fmt::Debug for MasterSecrets {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "MasterSecrets(peer {})", self.id)
    }
}

impl MasterSecrets {
    pub fn new(
        id: PeerId,
        shares: BTreeMap<(TripleId, ShareKind), Scalar>,
        tables: BTreeMap<(TripleId, ShareKind), PowersTable>,
        ticket_key: [u8; 32],
    ) -> MasterSecrets {
        debug_assert_eq!(shares.len(), 12);
        debug_assert_eq!(tables.len(), 20);
        MasterSecrets { id, shares, tables, ticket_key }
    }

    pub fn share(&self, triple: TripleId, kind: ShareKind) -> Result<&Scalar> {
        self.shares
            .get(&(triple, kind))
            .ok_or(Error::NotMyTriple { peer: self.id, triple })
    }

    pub fn table(&self, triple: TripleId, kind: ShareKind) -> &PowersTable {
        &self.tables[&(triple, kind)]
    }

    pub fn shares_iter(
        &self,
    ) -> impl Iterator<Item = (&(TripleId, ShareKind), &Scalar)> {
        self.shares.iter()
    }

    pub fn tables_iter(
        &self,
    ) -> impl Iterator<Item = (&(TripleId, ShareKind), &PowersTable)> {
        self.tables.iter()
    }

    /// Binary serialization (encrypted at rest by the caller).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(self.id as u8);
        out.extend_from_slice(&self.ticket_key);
        out.push(self.shares.len() as u8);
        for ((t, k), s) in &self.shares {
            out.push(t.index());
            out.push(k.byte());
            out.extend_from_slice(&s.to_bytes());
        }
        out.push(self.tables.len() as u8);
        for ((t, k), table) in &self.tables {
            out.push(t.index());
            out.push(k.byte());
            out.extend_from_slice(&table.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<MasterSecrets> {
        let err = || Error::Encoding("master secrets");
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(err)?;
            pos += n;
            Ok(s)
        };
        let id = PeerId::from_index(take(1)?[0] as usize).ok_or_else(err)?;
        let ticket_key: [u8; 32] = take(32)?.try_into().unwrap();
        let nshares = take(1)?[0] as usize;
        let mut shares = BTreeMap::new();
        for _ in 0..nshares {
            let t = TripleId::from_index(take(1)?[0]).ok_or_else(err)?;
            let k = ShareKind::from_byte(take(1)?[0]).ok_or_else(err)?;
            let s = Scalar::from_canonical_bytes(take(32)?.try_into().unwrap())
                .ok_or_else(err)?;
            shares.insert((t, k), s);
        }
        let ntables = take(1)?[0] as usize;
        let mut tables = BTreeMap::new();
        for _ in 0..ntables {
            let t = TripleId::from_index(take(1)?[0]).ok_or_else(err)?;
            let k = ShareKind::from_byte(take(1)?[0]).ok_or_else(err)?;
            let table = PowersTable::from_bytes(take(TABLE_BITS * 32)?)?;
            tables.insert((t, k), table);
        }
        if pos != bytes.len() {
            return Err(err());
        }
        Ok(MasterSecrets { id, shares, tables, ticket_key })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn party_exponents_are_nonzero_and_distinct() {
        let ids = ["mp", "sf", "researcher", "investigator", ""];
        let mut seen = Vec::new();
        for id in ids {
            let e = hash_party_id(id);
            assert!(!e.is_zero());
            assert!(!seen.contains(&e.to_bytes()), "collision for {id}");
            seen.push(e.to_bytes());
        }
        // stable across calls
        assert_eq!(hash_party_id("mp").to_bytes(), hash_party_id("mp").to_bytes());
    }

    #[test]
    fn derive_share_matches_bigint_exponentiation() {
        let l = (BigUint::from(1u8) << 252u32)
            + BigUint::parse_bytes(b"27742317777372353535851937790883648493", 10).unwrap();
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..10 {
            let master = Scalar::random_nonzero(&mut rng);
            let e = hash_party_id("sf");
            let got = derive_share(&master, &e);
            let expect = BigUint::from_bytes_le(&master.to_bytes())
                .modpow(&BigUint::from_bytes_le(&e.to_bytes()), &l);
            assert_eq!(BigUint::from_bytes_le(&got.to_bytes()), expect);
            assert!(!got.is_zero());
        }
    }

    #[test]
    fn powers_table_commits_to_derivations() {
        let mut rng = StdRng::seed_from_u64(32);
        let master = Scalar::random_nonzero(&mut rng);
        let table = PowersTable::build(&master);
        // entry 0 is x·B, entry i is the square chain
        assert_eq!(*table.entry(0), GroupElement::base_mul(&master));
        assert_eq!(
            *table.entry(5),
            GroupElement::base_mul(&(0..5).fold(master, |x, _| x.mul(&x)))
        );
        // product over set bits of H(id) lands on the derived share point
        let e = hash_party_id("mp");
        let share = derive_share(&master, &e);
        let mut acc: Option<Scalar> = None;
        for bit in e.set_bits() {
            let p = (0..bit).fold(master, |x, _| x.mul(&x));
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul(&p),
            });
        }
        assert_eq!(acc.unwrap(), share);
        // serialization
        let table2 = PowersTable::from_bytes(&table.to_bytes()).unwrap();
        assert_eq!(table, table2);
        assert!(PowersTable::from_bytes(&[0u8; 32]).is_err());
    }
}
