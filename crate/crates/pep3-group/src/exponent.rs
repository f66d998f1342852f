//! The exponent ring: integers modulo l - 1.
//!
//! Exponents act on scalars through `Scalar::pow`; the modulus l - 1 is the
//! order of the multiplicative group of nonzero scalars, so exponentiation by
//! these values is well-defined on that group.

use crate::limbs;
use crate::scalar::L;

/// l - 1.
const L1: [u64; 4] = [L[0] - 1, L[1], L[2], L[3]];

/// An integer modulo l - 1, used only as an exponent.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ExponentScalar([u64; 4]);

impl ExponentScalar {
    pub fn from_u64(v: u64) -> ExponentScalar {
        ExponentScalar([v, 0, 0, 0])
    }

    /// Parses 32 little-endian bytes; rejects values >= l - 1.
    pub fn from_canonical_bytes(bytes: &[u8; 32]) -> Option<ExponentScalar> {
        let l = limbs::from_le_bytes(bytes);
        if limbs::cmp(&l, &L1) == core::cmp::Ordering::Less {
            Some(ExponentScalar(l))
        } else {
            None
        }
    }

    /// Reduces 64 little-endian bytes; uniform for uniform input.
    pub fn from_wide_bytes(bytes: &[u8; 64]) -> ExponentScalar {
        let x = limbs::wide_from_le_bytes(bytes);
        ExponentScalar(limbs::reduce_wide(&x, &L1))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        limbs::to_le_bytes(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0, 0]
    }

    /// Bit i of the exponent (little-endian positions 0..=252).
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < 256);
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Positions of set bits, ascending.
    pub fn set_bits(&self) -> Vec<u32> {
        (0..253).filter(|&i| self.bit(i)).collect()
    }

    pub(crate) fn limbs(&self) -> &[u64; 4] {
        &self.0
    }
}

impl core::fmt::Debug for ExponentScalar {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ExponentScalar(")?;
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}
