//! The prime-order group: ristretto255 over the curve25519 Edwards form.
//!
//! Internally points live in extended twisted-Edwards coordinates
//! (X : Y : Z : T) on -x^2 + y^2 = 1 + d x^2 y^2 with x = X/Z, y = Y/Z,
//! T = XY/Z.  Equality, encoding and decoding quotient out the 8-torsion, so
//! externally this is a group of prime order l with 32-byte canonical
//! element encodings.

use std::sync::OnceLock;

use rand_core::{CryptoRng, RngCore};

use crate::counters;
use crate::field::FieldElement;
use crate::scalar::Scalar;

/// A group element (internally, an Edwards point; externally, its
/// 8-torsion coset).
#[derive(Clone, Copy)]
pub struct GroupElement {
    pub(crate) x: FieldElement,
    pub(crate) y: FieldElement,
    pub(crate) z: FieldElement,
    pub(crate) t: FieldElement,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        x: FieldElement::ZERO,
        y: FieldElement::ONE,
        z: FieldElement::ONE,
        t: FieldElement::ZERO,
    };

    /// The conventional base point (y = 4/5, x even).
    pub const BASE: GroupElement = GroupElement {
        x: FieldElement([
            1738742601995546,
            1146398526822698,
            2070867633025821,
            562264141797630,
            587772402128613,
        ]),
        y: FieldElement([
            1801439850948184,
            1351079888211148,
            450359962737049,
            900719925474099,
            1801439850948198,
        ]),
        z: FieldElement::ONE,
        t: FieldElement([
            1841354044333475,
            16398895984059,
            755974180946558,
            900171276175154,
            1821297809914039,
        ]),
    };

    /// Decodes a canonical 32-byte encoding; `None` if the bytes are not a
    /// valid canonical encoding of any element.
    pub fn decode(bytes: &[u8; 32]) -> Option<GroupElement> {
        let s = FieldElement::from_canonical_bytes(bytes)?;
        if s.is_negative() {
            return None;
        }
        let ss = s.square();
        let u1 = FieldElement::ONE.sub(&ss);
        let u2 = FieldElement::ONE.add(&ss);
        let u2_sqr = u2.square();
        // v = -d·u1^2 - u2^2
        let v = FieldElement::EDWARDS_D
            .neg()
            .mul(&u1.square())
            .sub(&u2_sqr);
        let (was_square, invsqrt) =
            FieldElement::sqrt_ratio_i(&FieldElement::ONE, &v.mul(&u2_sqr));
        let den_x = invsqrt.mul(&u2);
        let den_y = invsqrt.mul(&den_x).mul(&v);
        let x = s.add(&s).mul(&den_x).abs();
        let y = u1.mul(&den_y);
        let t = x.mul(&y);
        if !was_square || t.is_negative() || y.is_zero() {
            return None;
        }
        Some(GroupElement {
            x,
            y,
            z: FieldElement::ONE,
            t,
        })
    }

    /// The canonical 32-byte encoding.
    pub fn encode(&self) -> [u8; 32] {
        let u1 = self.z.add(&self.y).mul(&self.z.sub(&self.y));
        let u2 = self.x.mul(&self.y);
        let (_, invsqrt) =
            FieldElement::sqrt_ratio_i(&FieldElement::ONE, &u1.mul(&u2.square()));
        let den1 = invsqrt.mul(&u1);
        let den2 = invsqrt.mul(&u2);
        let z_inv = den1.mul(&den2).mul(&self.t);
        let rotate = self.t.mul(&z_inv).is_negative();
        let (x, y, den_inv) = if rotate {
            (
                self.y.mul(&FieldElement::SQRT_M1),
                self.x.mul(&FieldElement::SQRT_M1),
                den1.mul(&FieldElement::INVSQRT_A_MINUS_D),
            )
        } else {
            (self.x, self.y, den2)
        };
        let y = if x.mul(&z_inv).is_negative() { y.neg() } else { y };
        den_inv.mul(&self.z.sub(&y)).abs().to_bytes()
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        let a = self.y.sub(&self.x).mul(&other.y.sub(&other.x));
        let b = self.y.add(&self.x).mul(&other.y.add(&other.x));
        let c = self.t.mul(&FieldElement::EDWARDS_D2).mul(&other.t);
        let d = self.z.add(&self.z).mul(&other.z);
        let e = b.sub(&a);
        let f = d.sub(&c);
        let g = d.add(&c);
        let h = b.add(&a);
        GroupElement {
            x: e.mul(&f),
            y: g.mul(&h),
            z: f.mul(&g),
            t: e.mul(&h),
        }
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement {
            x: self.x.neg(),
            y: self.y,
            z: self.z,
            t: self.t.neg(),
        }
    }

    pub fn double(&self) -> GroupElement {
        let a = self.x.square();
        let b = self.y.square();
        let c = self.z.square().add(&self.z.square());
        let d = a.neg();
        let e = self.x.add(&self.y).square().sub(&a).sub(&b);
        let g = d.add(&b);
        let f = g.sub(&c);
        let h = d.sub(&b);
        GroupElement {
            x: e.mul(&f),
            y: g.mul(&h),
            z: f.mul(&g),
            t: e.mul(&h),
        }
    }

    /// General scalar multiplication (counted): 4-bit fixed windows.
    pub fn mul(&self, scalar: &Scalar) -> GroupElement {
        counters::tick_general();
        // table[i] = (i + 1)·P
        let mut table = [*self; 15];
        for i in 1..15 {
            table[i] = table[i - 1].add(self);
        }
        let bytes = scalar.to_bytes();
        let mut acc = GroupElement::IDENTITY;
        let mut started = false;
        for i in (0..64).rev() {
            if started {
                acc = acc.double().double().double().double();
            }
            let nib = (bytes[i / 2] >> ((i % 2) * 4)) & 0xf;
            if nib != 0 {
                acc = acc.add(&table[(nib - 1) as usize]);
                started = true;
            }
        }
        acc
    }

    /// Base-point multiplication (counted) through a precomputed table of
    /// window multiples; roughly three times faster than the general path.
    pub fn base_mul(scalar: &Scalar) -> GroupElement {
        counters::tick_base();
        let table = base_table();
        let bytes = scalar.to_bytes();
        let mut acc = GroupElement::IDENTITY;
        for w in 0..64 {
            let nib = (bytes[w / 2] >> ((w % 2) * 4)) & 0xf;
            if nib != 0 {
                acc = acc.add(&table[w][(nib - 1) as usize]);
            }
        }
        acc
    }

    /// A uniformly random element (with unknown discrete log only if the
    /// caller discards the scalar; used by tests).
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> GroupElement {
        GroupElement::base_mul(&Scalar::random(rng))
    }

    pub fn is_identity(&self) -> bool {
        self.eq_element(&GroupElement::IDENTITY)
    }

    /// Coset equality: X1·Y2 == Y1·X2 or Y1·Y2 == X1·X2.
    pub fn eq_element(&self, other: &GroupElement) -> bool {
        let a = self.x.mul(&other.y);
        let b = self.y.mul(&other.x);
        if a.eq_vartime(&b) {
            return true;
        }
        let c = self.y.mul(&other.y);
        let d = self.x.mul(&other.x);
        c.eq_vartime(&d)
    }
}

/// table[w][j] = (j + 1)·16^w·B.
fn base_table() -> &'static Vec<[GroupElement; 15]> {
    static TABLE: OnceLock<Vec<[GroupElement; 15]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(64);
        let mut window_base = GroupElement::BASE;
        for _ in 0..64 {
            let mut row = [window_base; 15];
            for j in 1..15 {
                row[j] = row[j - 1].add(&window_base);
            }
            table.push(row);
            window_base = row[7].double(); // 16·window_base
        }
        table
    })
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_element(other)
    }
}
impl Eq for GroupElement {}

impl core::fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "GroupElement(")?;
        for b in self.encode() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}
