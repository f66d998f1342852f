//! Slow, obviously-correct reference implementations over `num_bigint`,
//! used only as oracles in tests.  Nothing here shares code with the limb
//! arithmetic in `pep3-group`: field ops are plain modular big-integer math,
//! point ops are affine with per-step inversions, scalar multiplication is
//! binary double-and-add.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;

/// An affine point on -x^2 + y^2 = 1 + d x^2 y^2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RefPoint {
    pub x: BigUint,
    pub y: BigUint,
}

pub fn p() -> &'static BigUint {
    static P: OnceLock<BigUint> = OnceLock::new();
    P.get_or_init(|| (BigUint::one() << 255u32) - 19u8)
}

pub fn group_order() -> &'static BigUint {
    static L: OnceLock<BigUint> = OnceLock::new();
    L.get_or_init(|| {
        (BigUint::one() << 252u32)
            + BigUint::parse_bytes(b"27742317777372353535851937790883648493", 10).unwrap()
    })
}

fn inv(x: &BigUint) -> BigUint {
    x.modpow(&(p() - 2u8), p())
}

fn d() -> &'static BigUint {
    static D: OnceLock<BigUint> = OnceLock::new();
    D.get_or_init(|| (p() - 121665u32) * inv(&BigUint::from(121666u32)) % p())
}

fn sqrt_m1() -> &'static BigUint {
    static I: OnceLock<BigUint> = OnceLock::new();
    I.get_or_init(|| {
        let r = BigUint::from(2u8).modpow(&((p() - 1u8) >> 2u32), p());
        if r.bit(0) {
            p() - r
        } else {
            r
        }
    })
}

fn sqrt_ad_minus_one() -> &'static BigUint {
    static S: OnceLock<BigUint> = OnceLock::new();
    S.get_or_init(|| {
        let (ok, s) = sqrt_ratio_i(&((p() - d()) - 1u8), &BigUint::one());
        assert!(ok);
        s
    })
}

fn invsqrt_a_minus_d() -> &'static BigUint {
    static S: OnceLock<BigUint> = OnceLock::new();
    S.get_or_init(|| {
        let (ok, s) = sqrt_ratio_i(&BigUint::one(), &((p() - d()) - 1u8));
        assert!(ok);
        s
    })
}

fn is_neg(x: &BigUint) -> bool {
    x.bit(0)
}

fn abs(x: &BigUint) -> BigUint {
    if is_neg(x) {
        p() - x
    } else {
        x.clone()
    }
}

/// sqrt(u/v) if u/v is square, else sqrt(i·u/v); nonnegative root.
pub fn sqrt_ratio_i(u: &BigUint, v: &BigUint) -> (bool, BigUint) {
    let u = u % p();
    let v = v % p();
    if u.is_zero() {
        return (true, BigUint::zero());
    }
    if v.is_zero() {
        return (false, BigUint::zero());
    }
    let v3 = &v * &v % p() * &v % p();
    let v7 = &v3 * &v3 % p() * &v % p();
    let e = (p() - 5u8) >> 3u32;
    let mut r = &u * &v3 % p() * (&u * &v7 % p()).modpow(&e, p()) % p();
    let check = &v * &r % p() * &r % p();
    let correct = check == u;
    let flipped = check == p() - &u;
    let flipped_i = check == (p() - &u) * sqrt_m1() % p();
    if flipped || flipped_i {
        r = r * sqrt_m1() % p();
    }
    (correct || flipped, abs(&r))
}

pub fn identity() -> RefPoint {
    RefPoint {
        x: BigUint::zero(),
        y: BigUint::one(),
    }
}

pub fn base() -> RefPoint {
    let y = BigUint::from(4u8) * inv(&BigUint::from(5u8)) % p();
    let (ok, mut x) = sqrt_ratio_i(
        &((&y * &y % p() + p() - 1u8) % p()),
        &((d() * &y % p() * &y % p() + 1u8) % p()),
    );
    assert!(ok);
    // normalize the root to the published base point coordinate
    let standard = BigUint::parse_bytes(
        b"15112221349535400772501151409588531511454012693041857206046113283949847762202",
        10,
    )
    .unwrap();
    if x != standard {
        x = p() - &x;
    }
    assert_eq!(x, standard);
    RefPoint { x, y }
}

pub fn add(a: &RefPoint, b: &RefPoint) -> RefPoint {
    let den = d() * &a.x % p() * &b.x % p() * &a.y % p() * &b.y % p();
    let x = (&a.x * &b.y % p() + &a.y * &b.x % p()) % p() * inv(&((1u8 + &den) % p())) % p();
    let y = (&a.y * &b.y % p() + &a.x * &b.x % p()) % p()
        * inv(&((1u8 + p() - &den) % p()))
        % p();
    RefPoint { x, y }
}

pub fn mul(k: &BigUint, point: &RefPoint) -> RefPoint {
    let mut acc = identity();
    let mut q = point.clone();
    for i in 0..k.bits() {
        if k.bit(i) {
            acc = add(&acc, &q);
        }
        q = add(&q, &q);
    }
    acc
}

/// Coset (ristretto) equality.
pub fn eq(a: &RefPoint, b: &RefPoint) -> bool {
    (&a.x * &b.y % p()) == (&a.y * &b.x % p()) || (&a.y * &b.y % p()) == (&a.x * &b.x % p())
}

pub fn compress(point: &RefPoint) -> [u8; 32] {
    let (x0, y0) = (&point.x, &point.y);
    let t0 = x0 * y0 % p();
    let u1 = (1u8 + y0) % p() * ((1u8 + p() - y0) % p()) % p();
    let u2 = t0.clone();
    let (_, invsqrt) = sqrt_ratio_i(&BigUint::one(), &(&u1 * &u2 % p() * &u2 % p()));
    let den1 = &invsqrt * &u1 % p();
    let den2 = &invsqrt * &u2 % p();
    let z_inv = &den1 * &den2 % p() * &t0 % p();
    let ix0 = x0 * sqrt_m1() % p();
    let iy0 = y0 * sqrt_m1() % p();
    let rotate = is_neg(&(&t0 * &z_inv % p()));
    let (x, y, den_inv) = if rotate {
        (iy0, ix0, &den1 * invsqrt_a_minus_d() % p())
    } else {
        (x0.clone(), y0.clone(), den2)
    };
    let y = if is_neg(&(&x * &z_inv % p())) {
        p() - &y
    } else {
        y
    };
    let s = abs(&(&den_inv * ((1u8 + p() - &y) % p()) % p()));
    let mut out = [0u8; 32];
    let sb = s.to_bytes_le();
    out[..sb.len()].copy_from_slice(&sb);
    out
}

pub fn decompress(bytes: &[u8; 32]) -> Option<RefPoint> {
    let s = BigUint::from_bytes_le(bytes);
    if &s >= p() || is_neg(&s) {
        return None;
    }
    let ss = &s * &s % p();
    let u1 = (1u8 + p() - &ss) % p();
    let u2 = (1u8 + &ss) % p();
    let u2_sqr = &u2 * &u2 % p();
    let v = ((p() - d()) * &u1 % p() * &u1 % p() + p() - &u2_sqr) % p();
    let (was_square, invsqrt) = sqrt_ratio_i(&BigUint::one(), &(&v * &u2_sqr % p()));
    let den_x = &invsqrt * &u2 % p();
    let den_y = &invsqrt * &den_x % p() * &v % p();
    let x = abs(&(BigUint::from(2u8) * &s % p() * &den_x % p()));
    let y = &u1 * &den_y % p();
    let t = &x * &y % p();
    if !was_square || is_neg(&t) || y.is_zero() {
        return None;
    }
    Some(RefPoint { x, y })
}

/// The elligator2 map.
pub fn map(f: &BigUint) -> RefPoint {
    let f = f % p();
    let one = BigUint::one();
    let r = sqrt_m1() * &f % p() * &f % p();
    let one_minus_d_sq = (1u8 + p() - (d() * d() % p())) % p();
    let d_minus_one_sq = (d() + p() - 1u8) % p() * ((d() + p() - 1u8) % p()) % p();
    let u = (&r + 1u8) % p() * &one_minus_d_sq % p();
    let v = (p() - 1u8 - (&r * d() % p()) + p()) % p() * ((&r + d()) % p()) % p();
    let (was_square, s_pre) = sqrt_ratio_i(&u, &v);
    let (s, c) = if was_square {
        (s_pre, p() - &one)
    } else {
        ((p() - abs(&(&s_pre * &f % p()))) % p(), r.clone())
    };
    let n = (&c * ((&r + p() - 1u8) % p()) % p() * &d_minus_one_sq % p() + p() - &v) % p();
    let w0 = BigUint::from(2u8) * &s % p() * &v % p();
    let w1 = &n * sqrt_ad_minus_one() % p();
    let ss = &s * &s % p();
    let w2 = (1u8 + p() - &ss) % p();
    let w3 = (1u8 + &ss) % p();
    let gx = &w0 * &w3 % p();
    let gy = &w2 * &w1 % p();
    let gz = &w1 * &w3 % p();
    let zi = inv(&gz);
    RefPoint {
        x: gx * &zi % p(),
        y: gy * &zi % p(),
    }
}

/// The address-embedding convention: widen 16 bytes to a field element by
/// doubling (int + 2^128·(low 125 bits of SHA-256)) and apply the map.
pub fn address_to_element(addr: &[u8; 16]) -> [u8; 32] {
    let h = Sha256::digest(addr);
    let mask = (BigUint::one() << 125u32) - 1u8;
    let hv = BigUint::from_bytes_le(&h[0..16]) & mask;
    let f = BigUint::from(2u8) * (BigUint::from_bytes_le(addr) + (hv << 128u32));
    compress(&map(&f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_point_roundtrips() {
        let b = base();
        let enc = compress(&b);
        assert_eq!(
            enc.to_vec(),
            vec![
                0xe2, 0xf2, 0xae, 0x0a, 0x6a, 0xbc, 0x4e, 0x71, 0xa8, 0x84, 0xa9, 0x61, 0xc5,
                0x00, 0x51, 0x5f, 0x58, 0xe3, 0x0b, 0x6a, 0xa5, 0x82, 0xdd, 0x8d, 0xb6, 0xa6,
                0x59, 0x45, 0xe0, 0x8d, 0x2d, 0x76
            ]
        );
        let back = decompress(&enc).unwrap();
        assert!(eq(&b, &back));
    }

    #[test]
    fn order_annihilates() {
        assert!(eq(&mul(group_order(), &base()), &identity()));
    }
}
