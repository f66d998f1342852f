//! Arithmetic modulo the group order l = 2^252 + 27742317777372353535851937790883648493.
//!
//! Values are four little-endian u64 limbs, always kept canonical (< l).

use rand_core::{CryptoRng, RngCore};

use crate::exponent::ExponentScalar;
use crate::limbs;

/// The group order.
pub(crate) const L: [u64; 4] = [
    0x5812631a5cf5d3ed,
    0x14def9dea2f79cd6,
    0x0000000000000000,
    0x1000000000000000,
];

/// l - 2, the inversion exponent.
const L_MINUS_2: [u64; 4] = [
    0x5812631a5cf5d3eb,
    0x14def9dea2f79cd6,
    0x0000000000000000,
    0x1000000000000000,
];

/// c = l - 2^252 (125 bits), the folding constant for reduction.
const C: [u64; 2] = [0x5812631a5cf5d3ed, 0x14def9dea2f79cd6];

/// An integer modulo the group order.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar([u64; 4]);

impl Scalar {
    pub const ZERO: Scalar = Scalar([0, 0, 0, 0]);
    pub const ONE: Scalar = Scalar([1, 0, 0, 0]);

    pub fn from_u64(v: u64) -> Scalar {
        Scalar([v, 0, 0, 0])
    }

    /// Parses 32 little-endian bytes; rejects values >= l.
    pub fn from_canonical_bytes(bytes: &[u8; 32]) -> Option<Scalar> {
        let l = limbs::from_le_bytes(bytes);
        if limbs::cmp(&l, &L) == core::cmp::Ordering::Less {
            Some(Scalar(l))
        } else {
            None
        }
    }

    /// Reduces 64 little-endian bytes; uniform for uniform input.
    pub fn from_wide_bytes(bytes: &[u8; 64]) -> Scalar {
        let x = limbs::wide_from_le_bytes(bytes);
        Scalar(limbs::reduce_wide(&x, &L))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        limbs::to_le_bytes(&self.0)
    }

    /// A uniformly random scalar.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Scalar::from_wide_bytes(&wide)
    }

    /// A uniformly random nonzero scalar.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        loop {
            let s = Scalar::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0, 0]
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let mut s = self.0;
        let carry = limbs::add_assign(&mut s, &other.0);
        debug_assert!(!carry);
        if limbs::cmp(&s, &L) != core::cmp::Ordering::Less {
            limbs::sub_assign(&mut s, &L);
        }
        Scalar(s)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        let mut s = self.0;
        if limbs::cmp(&s, &other.0) == core::cmp::Ordering::Less {
            let carry = limbs::add_assign(&mut s, &L);
            debug_assert!(!carry);
        }
        limbs::sub_assign(&mut s, &other.0);
        Scalar(s)
    }

    pub fn neg(&self) -> Scalar {
        Scalar::ZERO.sub(self)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let x = limbs::mul_wide(&self.0, &other.0);
        Scalar(fold512(&x))
    }

    /// self^exp for a raw 256-bit exponent, square-and-multiply.
    fn modpow(&self, exp: &[u64; 4]) -> Scalar {
        let mut top = None;
        for i in (0..256).rev() {
            if exp[i / 64] >> (i % 64) & 1 == 1 {
                top = Some(i);
                break;
            }
        }
        let Some(top) = top else {
            return Scalar::ONE;
        };
        let mut acc = *self;
        for i in (0..top).rev() {
            acc = acc.mul(&acc);
            if exp[i / 64] >> (i % 64) & 1 == 1 {
                acc = acc.mul(self);
            }
        }
        acc
    }

    /// self raised to an exponent from the exponent ring.
    pub fn pow(&self, e: &ExponentScalar) -> Scalar {
        self.modpow(e.limbs())
    }

    /// Multiplicative inverse.  Returns `None` for zero.
    pub fn invert(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        let inv = self.modpow(&L_MINUS_2);
        debug_assert_eq!(inv.mul(self), Scalar::ONE);
        Some(inv)
    }
}

/// Reduces a 512-bit product of two canonical scalars.
///
/// With X = H·2^252 + L0 and c = l - 2^252, X = L0 - c·H (mod l); folding
/// twice brings the value under 2^253, then at most two subtractions of l
/// finish the job.  Requires X < 2^506, which any product of canonical
/// scalars satisfies.
fn fold512(x: &[u64; 8]) -> [u64; 4] {
    const MASK60: u64 = (1u64 << 60) - 1;
    let low252 = |v: &[u64]| -> [u64; 4] { [v[0], v[1], v[2], v[3] & MASK60] };
    let shr252 = |v: &[u64], n: usize| -> Vec<u64> {
        (0..n)
            .map(|i| (v[i + 3] >> 60) | v.get(i + 4).map_or(0, |w| w << 4))
            .collect()
    };

    let l0 = low252(x);
    let h: Vec<u64> = shr252(x, 4); // < 2^254
    // y = c * h, at most 379 bits
    let mut y = [0u64; 6];
    for (i, &ci) in C.iter().enumerate() {
        let mut carry: u128 = 0;
        for j in 0..4 {
            let t = (ci as u128) * (h[j] as u128) + (y[i + j] as u128) + carry;
            y[i + j] = t as u64;
            carry = t >> 64;
        }
        y[i + 4] = (y[i + 4] as u128 + carry) as u64;
    }
    let l2 = low252(&y);
    let h2 = shr252(&y, 2); // < 2^127
    // z = c * h2 + l0 < 2^253
    let mut z = [0u64; 4];
    for (i, &ci) in C.iter().enumerate() {
        let mut carry: u128 = 0;
        for j in 0..2 {
            let t = (ci as u128) * (h2[j] as u128) + (z[i + j] as u128) + carry;
            z[i + j] = t as u64;
            carry = t >> 64;
        }
        if i + 2 < 4 {
            z[i + 2] = (z[i + 2] as u128 + carry) as u64;
        } else {
            debug_assert_eq!(carry, 0);
        }
    }
    let carry = limbs::add_assign(&mut z, &l0);
    debug_assert!(!carry);
    // result = z - l2 (mod l)
    if limbs::cmp(&z, &l2) == core::cmp::Ordering::Less {
        let mut t = L;
        limbs::sub_assign(&mut t, &l2);
        let carry = limbs::add_assign(&mut z, &t);
        debug_assert!(!carry);
    } else {
        limbs::sub_assign(&mut z, &l2);
    }
    while limbs::cmp(&z, &L) != core::cmp::Ordering::Less {
        limbs::sub_assign(&mut z, &L);
    }
    z
}

impl core::fmt::Debug for Scalar {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Scalar(")?;
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}
