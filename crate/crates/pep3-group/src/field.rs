//! Arithmetic modulo p = 2^255 - 19.
//!
//! Elements are held as five 51-bit limbs in little-endian order, kept loosely
//! reduced (every limb below 2^52) between operations and only frozen to the
//! canonical value when serialized or compared.  All paths are variable-time;
//! see the crate docs for why that is acceptable here.

/// Low 51 bits of a limb.
const LOW_51: u64 = (1u64 << 51) - 1;

/// An integer modulo 2^255 - 19.
#[derive(Clone, Copy)]
pub struct FieldElement(pub(crate) [u64; 5]);

/// 16·p in limb form, used to keep subtraction operands positive.
const SIXTEEN_P: [u64; 5] = [
    36028797018963664,
    36028797018963952,
    36028797018963952,
    36028797018963952,
    36028797018963952,
];

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement([0, 0, 0, 0, 0]);
    pub const ONE: FieldElement = FieldElement([1, 0, 0, 0, 0]);

    /// The curve constant d = -121665/121666.
    pub const EDWARDS_D: FieldElement = FieldElement([
        929955233495203,
        466365720129213,
        1662059464998953,
        2033849074728123,
        1442794654840575,
    ]);

    /// 2·d, used by the extended-coordinates addition formula.
    pub const EDWARDS_D2: FieldElement = FieldElement([
        1859910466990425,
        932731440258426,
        1072319116312658,
        1815898335770999,
        633789495995903,
    ]);

    /// d - 1.
    pub const D_MINUS_ONE: FieldElement = FieldElement([
        929955233495202,
        466365720129213,
        1662059464998953,
        2033849074728123,
        1442794654840575,
    ]);

    /// d + 1.
    pub const D_PLUS_ONE: FieldElement = FieldElement([
        929955233495204,
        466365720129213,
        1662059464998953,
        2033849074728123,
        1442794654840575,
    ]);

    /// i = sqrt(-1), the root with even canonical form.
    pub const SQRT_M1: FieldElement = FieldElement([
        1718705420411056,
        234908883556509,
        2233514472574048,
        2117202627021982,
        765476049583133,
    ]);

    /// 1 - d^2.
    pub const ONE_MINUS_D_SQ: FieldElement = FieldElement([
        1136626929484150,
        1998550399581263,
        496427632559748,
        118527312129759,
        45110755273534,
    ]);

    /// (d - 1)^2.
    pub const D_MINUS_ONE_SQ: FieldElement = FieldElement([
        1507062230895904,
        1572317787530805,
        683053064812840,
        317374165784489,
        1572899562415810,
    ]);

    /// sqrt(-d - 1) (even root).
    pub const SQRT_AD_MINUS_ONE: FieldElement = FieldElement([
        10306688700882,
        1825811894652973,
        44770894383559,
        1031309182999399,
        1277000682391499,
    ]);

    /// 1/sqrt(-1 - d) (even root).
    pub const INVSQRT_A_MINUS_D: FieldElement = FieldElement([
        278908739862762,
        821645201101625,
        8113234426968,
        1777959178193151,
        2118520810568447,
    ]);

    pub fn from_u64(v: u64) -> FieldElement {
        FieldElement([v & LOW_51, v >> 51, 0, 0, 0])
    }

    /// Parses 32 little-endian bytes, accepting only the canonical value
    /// (below p, high bit clear).
    pub fn from_canonical_bytes(bytes: &[u8; 32]) -> Option<FieldElement> {
        let fe = Self::from_bytes_mod_order(bytes);
        if &fe.to_bytes() == bytes {
            Some(fe)
        } else {
            None
        }
    }

    /// Parses 32 little-endian bytes, ignoring the top bit and reducing mod p.
    pub fn from_bytes_mod_order(bytes: &[u8; 32]) -> FieldElement {
        let load8 = |b: &[u8]| -> u64 { u64::from_le_bytes(b.try_into().unwrap()) };
        let mut l = [0u64; 5];
        l[0] = load8(&bytes[0..8]) & LOW_51;
        l[1] = (load8(&bytes[6..14]) >> 3) & LOW_51;
        l[2] = (load8(&bytes[12..20]) >> 6) & LOW_51;
        l[3] = (load8(&bytes[19..27]) >> 1) & LOW_51;
        l[4] = (load8(&bytes[24..32]) >> 12) & LOW_51;
        FieldElement(l)
    }

    /// Serializes the canonical representative as 32 little-endian bytes.
    pub fn to_bytes(self) -> [u8; 32] {
        let mut l = self.weak_reduce().0;
        // Compute q = 1 iff the value is >= p, then subtract q·p by adding
        // 19·q and dropping bit 255.
        let mut q = (l[0] + 19) >> 51;
        q = (l[1] + q) >> 51;
        q = (l[2] + q) >> 51;
        q = (l[3] + q) >> 51;
        q = (l[4] + q) >> 51;
        l[0] += 19 * q;
        for i in 0..4 {
            l[i + 1] += l[i] >> 51;
            l[i] &= LOW_51;
        }
        l[4] &= LOW_51;

        let mut out = [0u8; 32];
        let mut acc: u128 = 0;
        let mut bits = 0;
        let mut idx = 0;
        for limb in l {
            acc |= (limb as u128) << bits;
            bits += 51;
            while bits >= 8 {
                out[idx] = (acc & 0xff) as u8;
                acc >>= 8;
                bits -= 8;
                idx += 1;
            }
        }
        // 255 = 31·8 + 7: the last seven bits flush here
        out[idx] = acc as u8;
        debug_assert_eq!(idx, 31);
        out
    }

    fn weak_reduce(self) -> FieldElement {
        let mut l = self.0;
        let c0 = l[0] >> 51;
        l[0] &= LOW_51;
        let c1 = (l[1] + c0) >> 51;
        l[1] = (l[1] + c0) & LOW_51;
        let c2 = (l[2] + c1) >> 51;
        l[2] = (l[2] + c1) & LOW_51;
        let c3 = (l[3] + c2) >> 51;
        l[3] = (l[3] + c2) & LOW_51;
        let c4 = (l[4] + c3) >> 51;
        l[4] = (l[4] + c3) & LOW_51;
        l[0] += 19 * c4;
        FieldElement(l)
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        let a = self.0;
        let b = other.0;
        FieldElement([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]])
            .weak_reduce()
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        let a = self.0;
        let b = other.0;
        FieldElement([
            a[0] + SIXTEEN_P[0] - b[0],
            a[1] + SIXTEEN_P[1] - b[1],
            a[2] + SIXTEEN_P[2] - b[2],
            a[3] + SIXTEEN_P[3] - b[3],
            a[4] + SIXTEEN_P[4] - b[4],
        ])
        .weak_reduce()
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::ZERO.sub(self)
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        #[inline(always)]
        fn m(a: u64, b: u64) -> u128 {
            (a as u128) * (b as u128)
        }
        let a = self.0;
        let b = other.0;
        debug_assert!(a.iter().chain(b.iter()).all(|&l| l < (1 << 52)));
        let b1_19 = b[1] * 19;
        let b2_19 = b[2] * 19;
        let b3_19 = b[3] * 19;
        let b4_19 = b[4] * 19;

        let c0 = m(a[0], b[0]) + m(a[4], b1_19) + m(a[3], b2_19) + m(a[2], b3_19) + m(a[1], b4_19);
        let c1 = m(a[1], b[0]) + m(a[0], b[1]) + m(a[4], b2_19) + m(a[3], b3_19) + m(a[2], b4_19);
        let c2 = m(a[2], b[0]) + m(a[1], b[1]) + m(a[0], b[2]) + m(a[4], b3_19) + m(a[3], b4_19);
        let c3 = m(a[3], b[0]) + m(a[2], b[1]) + m(a[1], b[2]) + m(a[0], b[3]) + m(a[4], b4_19);
        let c4 = m(a[4], b[0]) + m(a[3], b[1]) + m(a[2], b[2]) + m(a[1], b[3]) + m(a[0], b[4]);

        let mut out = [0u64; 5];
        let mut carry: u128 = c0;
        out[0] = (carry as u64) & LOW_51;
        carry = c1 + (carry >> 51);
        out[1] = (carry as u64) & LOW_51;
        carry = c2 + (carry >> 51);
        out[2] = (carry as u64) & LOW_51;
        carry = c3 + (carry >> 51);
        out[3] = (carry as u64) & LOW_51;
        carry = c4 + (carry >> 51);
        out[4] = (carry as u64) & LOW_51;
        out[0] += ((carry >> 51) as u64) * 19;
        out[1] += out[0] >> 51;
        out[0] &= LOW_51;
        FieldElement(out)
    }

    pub fn square(&self) -> FieldElement {
        self.mul(self)
    }

    /// self^(2^k) by repeated squaring.
    pub fn pow2k(&self, k: u32) -> FieldElement {
        debug_assert!(k > 0);
        let mut out = *self;
        for _ in 0..k {
            out = out.square();
        }
        out
    }

    /// Returns (self^(2^250 - 1), self^11); shared tail of the inversion and
    /// square-root exponent chains.
    fn pow22501(&self) -> (FieldElement, FieldElement) {
        let t0 = self.square(); // 2
        let t1 = t0.square().square(); // 8
        let t2 = self.mul(&t1); // 9
        let t3 = t0.mul(&t2); // 11
        let t4 = t3.square(); // 22
        let t5 = t2.mul(&t4); // 31 = 2^5 - 1
        let t6 = t5.pow2k(5); // 2^10 - 2^5
        let t7 = t6.mul(&t5); // 2^10 - 1
        let t8 = t7.pow2k(10); // 2^20 - 2^10
        let t9 = t8.mul(&t7); // 2^20 - 1
        let t10 = t9.pow2k(20); // 2^40 - 2^20
        let t11 = t10.mul(&t9); // 2^40 - 1
        let t12 = t11.pow2k(10); // 2^50 - 2^10
        let t13 = t12.mul(&t7); // 2^50 - 1
        let t14 = t13.pow2k(50); // 2^100 - 2^50
        let t15 = t14.mul(&t13); // 2^100 - 1
        let t16 = t15.pow2k(100); // 2^200 - 2^100
        let t17 = t16.mul(&t15); // 2^200 - 1
        let t18 = t17.pow2k(50); // 2^250 - 2^50
        let t19 = t18.mul(&t13); // 2^250 - 1
        (t19, t3)
    }

    /// Multiplicative inverse; returns zero for zero.
    pub fn invert(&self) -> FieldElement {
        // self^(p - 2) = self^(2^255 - 21)
        let (t19, t3) = self.pow22501();
        t19.pow2k(5).mul(&t3)
    }

    /// self^((p - 5) / 8) = self^(2^252 - 3).
    fn pow_p58(&self) -> FieldElement {
        let (t19, _) = self.pow22501();
        t19.pow2k(2).mul(self)
    }

    /// Computes sqrt(u/v) when u/v is square, or sqrt(i·u/v) otherwise.
    ///
    /// Returns `(was_square, root)` with the root normalized to its even
    /// canonical form.  (true, 0) for u = 0; (false, 0) for v = 0, u != 0.
    pub fn sqrt_ratio_i(u: &FieldElement, v: &FieldElement) -> (bool, FieldElement) {
        let v3 = v.square().mul(v);
        let v7 = v3.square().mul(v);
        let mut r = u.mul(&v3).mul(&u.mul(&v7).pow_p58());
        let check = v.mul(&r.square());

        let u_neg = u.neg();
        let correct = check.eq_vartime(u);
        let flipped = check.eq_vartime(&u_neg);
        let flipped_i = check.eq_vartime(&u_neg.mul(&FieldElement::SQRT_M1));
        if flipped || flipped_i {
            r = r.mul(&FieldElement::SQRT_M1);
        }
        if r.is_negative() {
            r = r.neg();
        }
        (correct || flipped, r)
    }

    /// Canonical parity bit; "negative" elements are the odd ones.
    pub fn is_negative(&self) -> bool {
        self.to_bytes()[0] & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.to_bytes() == [0u8; 32]
    }

    /// |self|: self if even, -self if odd.
    pub fn abs(&self) -> FieldElement {
        if self.is_negative() {
            self.neg()
        } else {
            *self
        }
    }

    pub fn eq_vartime(&self, other: &FieldElement) -> bool {
        self.to_bytes() == other.to_bytes()
    }
}

impl core::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "FieldElement(")?;
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_vartime(other)
    }
}
impl Eq for FieldElement {}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(hex_le: &str) -> FieldElement {
        let mut b = [0u8; 32];
        hex_decode(hex_le, &mut b);
        FieldElement::from_canonical_bytes(&b).unwrap()
    }

    fn hex_decode(s: &str, out: &mut [u8]) {
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            let hi = (chunk[0] as char).to_digit(16).unwrap() as u8;
            let lo = (chunk[1] as char).to_digit(16).unwrap() as u8;
            out[i] = hi << 4 | lo;
        }
    }

    #[test]
    fn constants_satisfy_their_defining_equations() {
        let d = FieldElement::EDWARDS_D;
        assert_eq!(d.add(&d), FieldElement::EDWARDS_D2);
        assert_eq!(d.sub(&FieldElement::ONE), FieldElement::D_MINUS_ONE);
        assert_eq!(d.add(&FieldElement::ONE), FieldElement::D_PLUS_ONE);
        // d = -121665/121666
        let num = FieldElement::from_u64(121665).neg();
        let den = FieldElement::from_u64(121666);
        assert_eq!(d.mul(&den), num);

        let i = FieldElement::SQRT_M1;
        assert_eq!(i.square(), FieldElement::ONE.neg());
        assert!(!i.is_negative());

        assert_eq!(
            FieldElement::ONE_MINUS_D_SQ,
            FieldElement::ONE.sub(&d.square())
        );
        assert_eq!(
            FieldElement::D_MINUS_ONE_SQ,
            d.sub(&FieldElement::ONE).square()
        );
        // sqrt(-d - 1)
        let ad_m1 = d.neg().sub(&FieldElement::ONE);
        assert_eq!(FieldElement::SQRT_AD_MINUS_ONE.square(), ad_m1);
        assert!(!FieldElement::SQRT_AD_MINUS_ONE.is_negative());
        // 1/sqrt(-1 - d): square times (-1 - d) is 1
        assert_eq!(
            FieldElement::INVSQRT_A_MINUS_D.square().mul(&ad_m1),
            FieldElement::ONE
        );
        assert!(!FieldElement::INVSQRT_A_MINUS_D.is_negative());
    }

    #[test]
    fn canonical_encoding_is_enforced() {
        // p itself and p + 1 are non-canonical
        let mut p_bytes = [0xffu8; 32];
        p_bytes[0] = 0xed;
        p_bytes[31] = 0x7f;
        assert!(FieldElement::from_canonical_bytes(&p_bytes).is_none());
        p_bytes[0] = 0xee;
        assert!(FieldElement::from_canonical_bytes(&p_bytes).is_none());
        // p - 1 is canonical
        p_bytes[0] = 0xec;
        let m1 = FieldElement::from_canonical_bytes(&p_bytes).unwrap();
        assert_eq!(m1, FieldElement::ONE.neg());
        // high bit set is non-canonical
        let mut hi = [0u8; 32];
        hi[31] = 0x80;
        assert!(FieldElement::from_canonical_bytes(&hi).is_none());
        assert_eq!(FieldElement::from_bytes_mod_order(&hi), FieldElement::ZERO);
    }

    #[test]
    fn small_arithmetic() {
        let two = FieldElement::from_u64(2);
        let three = FieldElement::from_u64(3);
        assert_eq!(two.add(&three), FieldElement::from_u64(5));
        assert_eq!(three.mul(&three), FieldElement::from_u64(9));
        assert_eq!(two.sub(&three), FieldElement::ONE.neg());
        assert_eq!(three.invert().mul(&three), FieldElement::ONE);
        assert_eq!(FieldElement::ZERO.invert(), FieldElement::ZERO);
        // 2^255 - 20 == -1 propagates through reduction
        assert_eq!(
            FieldElement::ONE.neg().add(&FieldElement::ONE),
            FieldElement::ZERO
        );
    }

    #[test]
    fn sqrt_ratio_cases() {
        // u = 0 -> (true, 0)
        let (ok, r) = FieldElement::sqrt_ratio_i(&FieldElement::ZERO, &FieldElement::ONE);
        assert!(ok);
        assert!(r.is_zero());
        // v = 0, u != 0 -> (false, 0)
        let (ok, r) = FieldElement::sqrt_ratio_i(&FieldElement::ONE, &FieldElement::ZERO);
        assert!(!ok);
        assert!(r.is_zero());
        // 4/1 -> (true, 2)
        let (ok, r) = FieldElement::sqrt_ratio_i(&FieldElement::from_u64(4), &FieldElement::ONE);
        assert!(ok);
        assert_eq!(r, FieldElement::from_u64(2));
        // 2 is nonsquare mod p: sqrt(2i) returned instead
        let (ok, r) = FieldElement::sqrt_ratio_i(&FieldElement::from_u64(2), &FieldElement::ONE);
        assert!(!ok);
        assert_eq!(
            r.square(),
            FieldElement::from_u64(2).mul(&FieldElement::SQRT_M1)
        );
        assert!(!r.is_negative());
    }

    #[test]
    fn known_value_roundtrip() {
        let x = fe("4a53e0c34a64e4cf2f8057315fd58f0e70ebd59a75d3bf6707f2dadd10d27225");
        assert_eq!(
            x.to_bytes(),
            fe("4a53e0c34a64e4cf2f8057315fd58f0e70ebd59a75d3bf6707f2dadd10d27225").to_bytes()
        );
        // x * 1/x == 1
        assert_eq!(x.mul(&x.invert()), FieldElement::ONE);
    }
}
