//! Little-endian u64 limb helpers shared by the two scalar rings.

/// Compares two equal-length limb vectors.
pub(crate) fn cmp(a: &[u64], b: &[u64]) -> core::cmp::Ordering {
    debug_assert_eq!(a.len(), b.len());
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return a[i].cmp(&b[i]);
        }
    }
    core::cmp::Ordering::Equal
}

/// a += b, returning the carry out.
pub(crate) fn add_assign(a: &mut [u64], b: &[u64]) -> bool {
    let mut carry = false;
    for i in 0..a.len() {
        let (s1, c1) = a[i].overflowing_add(b[i]);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        a[i] = s2;
        carry = c1 | c2;
    }
    carry
}

/// a -= b; requires a >= b.
pub(crate) fn sub_assign(a: &mut [u64], b: &[u64]) {
    let mut borrow = false;
    for i in 0..a.len() {
        let (d1, b1) = a[i].overflowing_sub(b[i]);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        a[i] = d2;
        borrow = b1 | b2;
    }
    debug_assert!(!borrow);
}

/// Shifts right by one bit in place.
pub(crate) fn shr1(a: &mut [u64]) {
    for i in 0..a.len() {
        let hi = if i + 1 < a.len() { a[i + 1] << 63 } else { 0 };
        a[i] = (a[i] >> 1) | hi;
    }
}

/// Schoolbook product of two 4-limb values into 8 limbs.
pub(crate) fn mul_wide(a: &[u64; 4], b: &[u64; 4]) -> [u64; 8] {
    let mut out = [0u64; 8];
    for i in 0..4 {
        let mut carry: u128 = 0;
        for j in 0..4 {
            let t = (a[i] as u128) * (b[j] as u128) + (out[i + j] as u128) + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
        out[i + 4] = carry as u64;
    }
    out
}

fn bit_len(m: &[u64]) -> u32 {
    for i in (0..m.len()).rev() {
        if m[i] != 0 {
            return (i as u32) * 64 + (64 - m[i].leading_zeros());
        }
    }
    0
}

/// Reduces a 512-bit value modulo a nonzero 4-limb modulus by binary
/// shift-and-subtract.  Slow-ish but only used off the hot path (hash
/// outputs, RNG widening).
pub(crate) fn reduce_wide(x: &[u64; 8], modulus: &[u64; 4]) -> [u64; 4] {
    let mlen = bit_len(modulus);
    debug_assert!(mlen > 0);
    let shift = 512 - mlen;
    let mut x = *x;
    let mut m = [0u64; 8];
    // m = modulus << shift
    let word = (shift / 64) as usize;
    let bits = shift % 64;
    for i in 0..4 {
        m[i + word] |= modulus[i] << bits;
        if bits > 0 && i + word + 1 < 8 {
            m[i + word + 1] |= modulus[i] >> (64 - bits);
        }
    }
    for _ in 0..=shift {
        if cmp(&x, &m) != core::cmp::Ordering::Less {
            sub_assign(&mut x, &m);
        }
        shr1(&mut m);
    }
    debug_assert_eq!(cmp(&x[4..], &[0, 0, 0, 0]), core::cmp::Ordering::Equal);
    [x[0], x[1], x[2], x[3]]
}

pub(crate) fn to_le_bytes(limbs: &[u64; 4]) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, l) in limbs.iter().enumerate() {
        out[i * 8..(i + 1) * 8].copy_from_slice(&l.to_le_bytes());
    }
    out
}

pub(crate) fn from_le_bytes(bytes: &[u8; 32]) -> [u64; 4] {
    let mut out = [0u64; 4];
    for i in 0..4 {
        out[i] = u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
    }
    out
}

pub(crate) fn wide_from_le_bytes(bytes: &[u8; 64]) -> [u64; 8] {
    let mut out = [0u64; 8];
    for i in 0..8 {
        out[i] = u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
    }
    out
}
