//! Hashing to scalars and exponents with domain separation.
//!
//! Every hash frames its inputs unambiguously: the domain string and each
//! part are length-prefixed, so no two distinct input sequences collide at
//! the byte level.  SHA-512 output is reduced from 64 bytes, keeping the
//! result statistically uniform.

use sha2::{Digest, Sha512};

use crate::exponent::ExponentScalar;
use crate::point::GroupElement;
use crate::scalar::Scalar;

fn wide_digest(domain: &str, parts: &[&[u8]]) -> [u8; 64] {
    let mut h = Sha512::new();
    h.update(b"pep3.hash.v1");
    h.update((domain.len() as u16).to_be_bytes());
    h.update(domain.as_bytes());
    h.update((parts.len() as u16).to_be_bytes());
    for part in parts {
        h.update((part.len() as u32).to_be_bytes());
        h.update(part);
    }
    h.finalize().into()
}

/// Hashes length-framed byte strings to a scalar.
pub fn hash_to_scalar(domain: &str, parts: &[&[u8]]) -> Scalar {
    Scalar::from_wide_bytes(&wide_digest(domain, parts))
}

/// Hashes group elements (by canonical encoding) to a scalar; used for
/// challenge derivation.
pub fn hash_points_to_scalar(domain: &str, points: &[&GroupElement]) -> Scalar {
    let encodings: Vec<[u8; 32]> = points.iter().map(|p| p.encode()).collect();
    let parts: Vec<&[u8]> = encodings.iter().map(|e| e.as_slice()).collect();
    hash_to_scalar(domain, &parts)
}

/// Hashes length-framed byte strings to an exponent.
pub fn hash_to_exponent(domain: &str, parts: &[&[u8]]) -> ExponentScalar {
    ExponentScalar::from_wide_bytes(&wide_digest(domain, parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framing_disambiguates() {
        // ["ab", "c"] and ["a", "bc"] and ["abc"] must all differ
        let h1 = hash_to_scalar("t", &[b"ab", b"c"]);
        let h2 = hash_to_scalar("t", &[b"a", b"bc"]);
        let h3 = hash_to_scalar("t", &[b"abc"]);
        assert_ne!(h1, h2);
        assert_ne!(h1, h3);
        assert_ne!(h2, h3);
        // domain separation
        assert_ne!(hash_to_scalar("t", &[b"x"]), hash_to_scalar("u", &[b"x"]));
        // determinism
        assert_eq!(h1, hash_to_scalar("t", &[b"ab", b"c"]));
    }

    #[test]
    fn output_is_unbiased() {
        // chi-square over the low nibble of 2^13 hashes, 16 bins; the 1e-9
        // quantile of chi2(15) is ~80, anything structural would blow far
        // past that.  (The low bytes of a reduced scalar are uniform to
        // within 2^-125; the top byte is not, since the modulus is just
        // above 2^252.)
        let mut bins = [0u64; 16];
        for i in 0..8192u32 {
            let s = hash_to_scalar("uniformity", &[&i.to_be_bytes()]);
            bins[(s.to_bytes()[0] & 0xf) as usize] += 1;
        }
        let expect = 8192.0 / 16.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| {
                let d = o as f64 - expect;
                d * d / expect
            })
            .sum();
        assert!(chi2 < 80.0, "chi2 = {chi2}, bins = {bins:?}");
    }
}
