//! The elligator2 map for ristretto255 and its full inverse.
//!
//! `elligator_map` sends any field element to a group element; every group
//! element has at most 16 field preimages (at most 8 of them even), and
//! `elligator_preimages` enumerates all of them for a decoded canonical
//! representative.  The inverse solves the map's defining relation r = i·f^2
//! case-by-case over the four rotation translates of the input point and
//! keeps exactly the candidates that map back to the same element, so its
//! completeness does not rest on the algebra alone.

use crate::field::FieldElement;
use crate::point::GroupElement;

/// Maps a field element onto the group.  f and -f map to the same element.
pub fn elligator_map(f: &FieldElement) -> GroupElement {
    let one = FieldElement::ONE;
    let r = FieldElement::SQRT_M1.mul(&f.square());
    let u = r.add(&one).mul(&FieldElement::ONE_MINUS_D_SQ);
    // v = (-1 - r·d)·(r + d)
    let v = one
        .neg()
        .sub(&r.mul(&FieldElement::EDWARDS_D))
        .mul(&r.add(&FieldElement::EDWARDS_D));
    let (was_square, s_sq) = FieldElement::sqrt_ratio_i(&u, &v);
    let (s, c) = if was_square {
        (s_sq, one.neg())
    } else {
        (s_sq.mul(f).abs().neg(), r)
    };
    let n = c
        .mul(&r.sub(&one))
        .mul(&FieldElement::D_MINUS_ONE_SQ)
        .sub(&v);
    let s2 = s.square();
    let w0 = s.mul(&v).add(&s.mul(&v));
    let w1 = n.mul(&FieldElement::SQRT_AD_MINUS_ONE);
    let w2 = one.sub(&s2);
    let w3 = one.add(&s2);
    GroupElement {
        x: w0.mul(&w3),
        y: w2.mul(&w1),
        z: w1.mul(&w3),
        t: w0.mul(&w2),
    }
}

/// All field elements f with `elligator_map(f)` equal to `point`, sorted by
/// canonical encoding.  Candidates are derived by inverting the map over the
/// four rotation translates of the point and each one is checked forward
/// before being returned.
pub fn elligator_preimages(point: &GroupElement) -> Vec<FieldElement> {
    let one = FieldElement::ONE;
    let z_inv = point.z.invert();
    let x = point.x.mul(&z_inv);
    let y = point.y.mul(&z_inv);
    let ix = x.mul(&FieldElement::SQRT_M1);
    let iy = y.mul(&FieldElement::SQRT_M1);
    let coset = [
        (x, y),
        (x.neg(), y.neg()),
        (iy, ix),
        (iy.neg(), ix.neg()),
    ];

    let mut found: Vec<[u8; 32]> = Vec::new();

    // The linear solve below degenerates exactly when the map lands on the
    // identity coset with s = 0 (r = 0 or v = 0, i.e. f^2 in {0, i·d, i/d});
    // those candidates are tried explicitly.
    let mut specials = vec![FieldElement::ZERO];
    for target in [
        FieldElement::SQRT_M1.mul(&FieldElement::EDWARDS_D),
        FieldElement::SQRT_M1.mul(&FieldElement::EDWARDS_D.invert()),
    ] {
        let (ok, f) = FieldElement::sqrt_ratio_i(&target, &one);
        if ok {
            specials.push(f);
            specials.push(f.neg());
        }
    }
    for cand in specials {
        if elligator_map(&cand).eq_element(point) {
            found.push(cand.to_bytes());
        }
    }

    for (cx, cy) in coset {
        // On the Jacobi quartic: s^2 = (1 - y)/(1 + y), undefined at y = -1.
        let denom = one.add(&cy);
        if denom.is_zero() {
            continue;
        }
        let (ok, s0) = FieldElement::sqrt_ratio_i(&one.sub(&cy), &denom);
        if !ok {
            continue;
        }
        let s_candidates: &[FieldElement] = if s0.is_zero() {
            &[FieldElement::ZERO]
        } else {
            &[s0, s0.neg()]
        };
        for &s in s_candidates {
            // t from x = 2s / (t·sqrt(-d-1)); s = 0 forces t = ±1.
            let ts: Vec<FieldElement> = if s.is_zero() {
                vec![one, one.neg()]
            } else if cx.is_zero() {
                continue;
            } else {
                vec![s
                    .add(&s)
                    .mul(&cx.mul(&FieldElement::SQRT_AD_MINUS_ONE).invert())]
            };
            for t in ts {
                let a = s.square().mul(&FieldElement::D_MINUS_ONE);
                let b = t.add(&one).mul(&FieldElement::D_PLUS_ONE);
                // r = i·f^2 comes out linear once the sign branch of the map
                // is fixed by the parity of s.
                let (num, den) = if s.is_negative() {
                    (a.sub(&b), a.add(&b))
                } else {
                    (a.add(&b), a.sub(&b))
                };
                if den.is_zero() {
                    continue;
                }
                let r = num.mul(&den.invert());
                // f^2 = -i·r
                let (ok2, f) = FieldElement::sqrt_ratio_i(
                    &FieldElement::SQRT_M1.neg().mul(&r),
                    &one,
                );
                if !ok2 {
                    continue;
                }
                for cand in [f, f.neg()] {
                    if elligator_map(&cand).eq_element(point) {
                        found.push(cand.to_bytes());
                    }
                }
            }
        }
    }
    found.sort();
    found.dedup();
    found
        .into_iter()
        .map(|b| FieldElement::from_canonical_bytes(&b).unwrap())
        .collect()
}
