//! Embedding 16-byte addresses into group elements, reversibly.
//!
//! An address is widened to a field element by packing the 128 address bits
//! into the low half and 125 check bits (a truncated SHA-256 of the address)
//! above them, then doubling to make the value even; the elligator map sends
//! that onto the group.  Decoding enumerates all even preimages of the
//! element and keeps those whose check bits match.  Random group elements
//! decode to an address with probability around 2^-122 per preimage, so the
//! embedding doubles as a validity check.

use pep3_group::{elligator, FieldElement, GroupElement};
use sha2::{Digest, Sha256};
use std::net::{IpAddr, Ipv6Addr};

use crate::error::{Error, Result};

const CHECK_BITS_MASK: u128 = (1u128 << 125) - 1;

fn check_bits(addr: &[u8; 16]) -> u128 {
    let h = Sha256::digest(addr);
    u128::from_le_bytes(h[0..16].try_into().unwrap()) & CHECK_BITS_MASK
}

/// Embeds an address into the group.  Total: every 16-byte string maps to
/// some element.
pub fn address_to_element(addr: &[u8; 16]) -> GroupElement {
    let lo = u128::from_le_bytes(*addr);
    let hi = check_bits(addr);
    // f = 2·(addr + 2^128·check); hi < 2^125 keeps f < 2^254, hence canonical
    let f_lo = lo << 1;
    let f_hi = (hi << 1) | (lo >> 127);
    let mut bytes = [0u8; 32];
    bytes[0..16].copy_from_slice(&f_lo.to_le_bytes());
    bytes[16..32].copy_from_slice(&f_hi.to_le_bytes());
    let f = FieldElement::from_canonical_bytes(&bytes).expect("f < 2^254 is canonical");
    elligator::elligator_map(&f)
}

/// Recovers the address embedded in an element, if there is exactly one.
pub fn element_to_address(element: &GroupElement) -> Result<[u8; 16]> {
    // the preimage enumeration works on the canonical decoded representative
    let canonical = GroupElement::decode(&element.encode()).expect("own encoding decodes");
    let mut found: Option<[u8; 16]> = None;
    for f in elligator::elligator_preimages(&canonical) {
        let bytes = f.to_bytes();
        if bytes[0] & 1 == 1 || bytes[31] >= 0x40 {
            continue; // odd, or too wide to carry an address
        }
        let f_lo = u128::from_le_bytes(bytes[0..16].try_into().unwrap());
        let f_hi = u128::from_le_bytes(bytes[16..32].try_into().unwrap());
        let lo = (f_lo >> 1) | (f_hi << 127);
        let hi = f_hi >> 1;
        let addr: [u8; 16] = lo.to_le_bytes();
        if hi == check_bits(&addr) {
            match found {
                None => found = Some(addr),
                Some(prev) if prev == addr => {}
                Some(_) => return Err(Error::AmbiguousAddress),
            }
        }
    }
    found.ok_or(Error::NotAnAddress)
}

/// 16-byte form of an IP address; v4 uses the v4-mapped v6 block.
pub fn ip_to_address(ip: IpAddr) -> [u8; 16] {
    match ip {
        IpAddr::V4(v4) => v4.to_ipv6_mapped().octets(),
        IpAddr::V6(v6) => v6.octets(),
    }
}

/// Inverse of `ip_to_address`; v4-mapped addresses collapse back to v4.
pub fn address_to_ip(addr: &[u8; 16]) -> IpAddr {
    IpAddr::V6(Ipv6Addr::from(*addr)).to_canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, RngCore, SeedableRng};

    /// Pinned encodings; any change to the embedding convention breaks these.
    const GOLDEN: [(&str, &str); 5] = [
        (
            "00000000000000000000000000000000",
            "fc957b5aa88fed83c5e57375aa71c1d85642ac095ba3cf3ade9b0d2440a99148",
        ),
        (
            "00000000000000000000ffffc0000201",
            "44a8ebb458f9275012951753b0112cff2263cc45ce65d382eb14a7758bde033e",
        ),
        (
            "20010db8000000000000000000000001",
            "861cd82e39fdb9d32ef96d889c84c42d2e3820ca4963735d343dbebffaf5c034",
        ),
        (
            "ffffffffffffffffffffffffffffffff",
            "06ab9b39886410587f7e296a4752e79c3a59cf8a383dbd1142009667714bc751",
        ),
        (
            "0102030405060708090a0b0c0d0e0f10",
            "30d058bab106a04755ca82c9381e629546692bcce8c94ef0653f3238e9d87523",
        ),
    ];

    #[test]
    fn golden_vectors() {
        for (addr_hex, enc_hex) in GOLDEN {
            let addr: [u8; 16] = hex::decode(addr_hex).unwrap().try_into().unwrap();
            let elem = address_to_element(&addr);
            assert_eq!(hex::encode(elem.encode()), enc_hex, "address {addr_hex}");
            assert_eq!(element_to_address(&elem).unwrap(), addr);
        }
    }

    #[test]
    fn golden_vectors_match_reference_oracle() {
        for (addr_hex, _) in GOLDEN {
            let addr: [u8; 16] = hex::decode(addr_hex).unwrap().try_into().unwrap();
            assert_eq!(
                address_to_element(&addr).encode(),
                pep3_reference::address_to_element(&addr)
            );
        }
    }

    #[test]
    fn roundtrip_random_addresses() {
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..500 {
            let mut addr = [0u8; 16];
            rng.fill_bytes(&mut addr);
            let elem = address_to_element(&addr);
            assert_eq!(element_to_address(&elem).unwrap(), addr);
        }
    }

    #[test]
    fn random_elements_are_not_addresses() {
        let mut rng = StdRng::seed_from_u64(2025);
        for _ in 0..200 {
            let elem = GroupElement::random(&mut rng);
            match element_to_address(&elem) {
                Err(Error::NotAnAddress) => {}
                other => panic!("expected NotAnAddress, got {other:?}"),
            }
        }
    }

    #[test]
    fn decoding_survives_torsion_representatives() {
        // decrypt-style arithmetic can hand back a non-canonical internal
        // representative of the same element; decoding must not care
        let mut rng = StdRng::seed_from_u64(2026);
        for _ in 0..50 {
            let mut addr = [0u8; 16];
            rng.fill_bytes(&mut addr);
            let elem = address_to_element(&addr);
            let k = pep3_group::Scalar::random(&mut rng);
            let shifted = elem.add(&GroupElement::base_mul(&k)).sub(&GroupElement::base_mul(&k));
            assert_eq!(element_to_address(&shifted).unwrap(), addr);
        }
    }

    #[test]
    fn ip_conversions() {
        let v4: IpAddr = "192.0.2.1".parse().unwrap();
        let a = ip_to_address(v4);
        assert_eq!(hex::encode(a), "00000000000000000000ffffc0000201");
        assert_eq!(address_to_ip(&a), v4);

        let v6: IpAddr = "2001:db8::1".parse().unwrap();
        let b = ip_to_address(v6);
        assert_eq!(hex::encode(b), "20010db8000000000000000000000001");
        assert_eq!(address_to_ip(&b), v6);
    }

    #[test]
    fn roundtrip_random_ips() {
        let mut rng = StdRng::seed_from_u64(2027);
        for _ in 0..100 {
            let ip: IpAddr = if rng.gen_bool(0.5) {
                IpAddr::from(rng.gen::<[u8; 4]>())
            } else {
                IpAddr::from(rng.gen::<[u8; 16]>())
            };
            let elem = address_to_element(&ip_to_address(ip));
            let back = address_to_ip(&element_to_address(&elem).unwrap());
            // v4-mapped v6 inputs canonicalize to v4; everything else is exact
            assert_eq!(back, IpAddr::V6(match ip {
                IpAddr::V4(v4) => v4.to_ipv6_mapped(),
                IpAddr::V6(v6) => v6,
            }).to_canonical());
        }
    }
}
