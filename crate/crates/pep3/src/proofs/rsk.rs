//! Certificates for a full transcryption step.
//!
//! A peer that transforms (β, γ, τ) into (β', γ', τ') must be able to show,
//! after the fact, that it applied exactly the factors its key shares
//! prescribe for the requested mode — without revealing the factors.  The
//! certificate states commitment points for s, n, n·s⁻¹ and the blinding
//! nonce r, links input to output with five discrete-log certificates, and
//! ties the s and n commitments back to published share points with
//! product/ratio proofs.

use pep3_group::{GroupElement, Scalar};

use crate::codec::{Reader, Writer};
use crate::elgamal::Cyphertext;
use crate::error::{Error, Result};
use crate::keyshares::{ShareKind, TripleId};
use crate::proofs::dh::{dh_prove, DhCertificate, NonceStream};

/// What a transcryption is for; decides which factor composition applies.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    /// Turn fresh data into `to`'s pseudonym domain (n multiplies in).
    Pseudonymise,
    /// Move between two pseudonym domains (n ratio).
    Translate,
    /// Strip `from`'s pseudonym factor back out (n divides out).
    Depseudonymise,
}

impl Mode {
    pub fn byte(self) -> u8 {
        match self {
            Mode::Pseudonymise => 1,
            Mode::Translate => 2,
            Mode::Depseudonymise => 3,
        }
    }

    pub fn from_byte(b: u8) -> Option<Mode> {
        match b {
            1 => Some(Mode::Pseudonymise),
            2 => Some(Mode::Translate),
            3 => Some(Mode::Depseudonymise),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Pseudonymise => "pseudonymise",
            Mode::Translate => "translate",
            Mode::Depseudonymise => "depseudonymise",
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a verifier gets trusted share points x^H(party)·B from.  Peers
/// answer from their own masters; parties answer from derivation proofs
/// they fetched and checked against the public powers tables.
pub trait SharePointSource {
    fn share_point(&self, party: &str, kind: ShareKind, triple: TripleId)
        -> Result<GroupElement>;
}

/// The share points a factor must be built from: factor = (∏num)/(∏den).
#[derive(Clone, Debug, Default)]
pub struct FactorShares {
    pub numerators: Vec<GroupElement>,
    pub denominators: Vec<GroupElement>,
}

/// Which parties' shares go into the numerator and denominator of the n
/// factor for a mode.  The s factor is always to/from.
fn n_factor_parties<'a>(mode: Mode, from: &'a str, to: &'a str) -> (Option<&'a str>, Option<&'a str>) {
    match mode {
        Mode::Pseudonymise => (Some(to), None),
        Mode::Translate => (Some(to), Some(from)),
        Mode::Depseudonymise => (None, Some(from)),
    }
}

/// Resolves the expected share points for one peer's hop: the factors it
/// must apply over the triples assigned to it.
pub fn expected_factors(
    source: &dyn SharePointSource,
    mode: Mode,
    from: &str,
    to: &str,
    assigned: &[TripleId],
) -> Result<(FactorShares, FactorShares)> {
    let collect = |party: Option<&str>, kind: ShareKind| -> Result<Vec<GroupElement>> {
        match party {
            None => Ok(Vec::new()),
            Some(p) => assigned
                .iter()
                .map(|t| source.share_point(p, kind, *t))
                .collect(),
        }
    };
    let s = FactorShares {
        numerators: collect(Some(to), ShareKind::Encryption)?,
        denominators: collect(Some(from), ShareKind::Encryption)?,
    };
    let (n_num, n_den) = n_factor_parties(mode, from, to);
    let n = FactorShares {
        numerators: collect(n_num, ShareKind::Pseudonym)?,
        denominators: collect(n_den, ShareKind::Pseudonym)?,
    };
    Ok((s, n))
}

/// Chain showing a point is (∏ xᵢ)·B for the published points xᵢ·B.
/// Empty products are the base point (the factor 1).
#[derive(Clone, PartialEq, Eq, Debug)]
struct ProductProof {
    partials: Vec<(GroupElement, DhCertificate)>,
}

impl ProductProof {
    fn prove(scalars: &[Scalar], nonces: &mut NonceStream) -> ProductProof {
        if scalars.len() < 2 {
            return ProductProof { partials: Vec::new() };
        }
        let mut partial_scalar = scalars[0];
        let mut partial_point = GroupElement::base_mul(&partial_scalar);
        let mut partials = Vec::with_capacity(scalars.len() - 1);
        for x in &scalars[1..] {
            let x_point = GroupElement::base_mul(x);
            let next_scalar = partial_scalar.mul(x);
            let next_point = GroupElement::base_mul(&next_scalar);
            let nonce = nonces.next(&x_point, &partial_point);
            let cert = dh_prove(x, &x_point, &partial_point, &next_point, &nonce);
            partials.push((next_point, cert));
            partial_scalar = next_scalar;
            partial_point = next_point;
        }
        ProductProof { partials }
    }

    /// Walks the chain against the expected share points; returns the
    /// product point.
    fn verify(&self, expected: &[GroupElement]) -> Result<GroupElement> {
        match expected.len() {
            0 | 1 => {
                if !self.partials.is_empty() {
                    return Err(Error::BadCertificate("product chain length"));
                }
                Ok(expected.first().copied().unwrap_or(GroupElement::BASE))
            }
            k => {
                if self.partials.len() != k - 1 {
                    return Err(Error::BadCertificate("product chain length"));
                }
                let mut partial = expected[0];
                for (i, x_point) in expected[1..].iter().enumerate() {
                    let (next, cert) = &self.partials[i];
                    cert.verify(x_point, &partial, next)?;
                    partial = *next;
                }
                Ok(partial)
            }
        }
    }

    fn write(&self, w: &mut Writer) {
        w.u16(self.partials.len() as u16);
        for (p, cert) in &self.partials {
            w.point(p);
            cert.write(w);
        }
    }

    fn read(r: &mut Reader) -> Result<ProductProof> {
        let k = r.u16()? as usize;
        if k > 64 {
            return Err(Error::Encoding("product chain too long"));
        }
        let mut partials = Vec::with_capacity(k);
        for _ in 0..k {
            let p = r.point()?;
            let cert = DhCertificate::read(r)?;
            partials.push((p, cert));
        }
        Ok(ProductProof { partials })
    }
}

/// Ties a committed factor point f·B to f = (∏num)/(∏den) over published
/// share points.
#[derive(Clone, PartialEq, Eq, Debug)]
struct FactorProof {
    numerator: ProductProof,
    denominator: ProductProof,
    /// Proves factor·(∏den·B) = ∏num·B; absent when the denominator is
    /// empty and the factor point must simply equal the numerator product.
    ratio: Option<DhCertificate>,
}

impl FactorProof {
    /// Returns the factor value together with its proof.
    fn prove(
        numerators: &[Scalar],
        denominators: &[Scalar],
        nonces: &mut NonceStream,
    ) -> (Scalar, FactorProof) {
        let product = |xs: &[Scalar]| xs.iter().fold(Scalar::ONE, |a, x| a.mul(x));
        let num = product(numerators);
        let den = product(denominators);
        let factor = num.mul(&den.invert().expect("zero share product"));
        let numerator = ProductProof::prove(numerators, nonces);
        let denominator = ProductProof::prove(denominators, nonces);
        let ratio = if denominators.is_empty() {
            None
        } else {
            let factor_point = GroupElement::base_mul(&factor);
            let den_point = GroupElement::base_mul(&den);
            let num_point = GroupElement::base_mul(&num);
            let nonce = nonces.next(&factor_point, &den_point);
            Some(dh_prove(&factor, &factor_point, &den_point, &num_point, &nonce))
        };
        (factor, FactorProof { numerator, denominator, ratio })
    }

    fn verify(&self, factor_point: &GroupElement, expected: &FactorShares) -> Result<()> {
        let num_point = self.numerator.verify(&expected.numerators)?;
        if expected.denominators.is_empty() {
            if self.ratio.is_some() {
                return Err(Error::BadCertificate("unexpected ratio certificate"));
            }
            self.denominator.verify(&[])?;
            if *factor_point != num_point {
                return Err(Error::BadCertificate("factor point mismatch"));
            }
            return Ok(());
        }
        let den_point = self.denominator.verify(&expected.denominators)?;
        let ratio = self
            .ratio
            .as_ref()
            .ok_or(Error::BadCertificate("missing ratio certificate"))?;
        // factor = num/den: factor·(den·B) must land on num·B
        ratio.verify(factor_point, &den_point, &num_point)
    }

    fn write(&self, w: &mut Writer) {
        self.numerator.write(w);
        self.denominator.write(w);
        match &self.ratio {
            None => w.u8(0),
            Some(c) => {
                w.u8(1);
                c.write(w);
            }
        }
    }

    fn read(r: &mut Reader) -> Result<FactorProof> {
        let numerator = ProductProof::read(r)?;
        let denominator = ProductProof::read(r)?;
        let ratio = match r.u8()? {
            0 => None,
            1 => Some(DhCertificate::read(r)?),
            _ => return Err(Error::Encoding("ratio flag")),
        };
        Ok(FactorProof { numerator, denominator, ratio })
    }
}

/// The secret side of one transcryption hop: the peer's own derived share
/// scalars for each factor, and the blinding nonce.
pub struct HopSecrets {
    pub s_numerators: Vec<Scalar>,
    pub s_denominators: Vec<Scalar>,
    pub n_numerators: Vec<Scalar>,
    pub n_denominators: Vec<Scalar>,
    pub r: Scalar,
}

impl HopSecrets {
    pub fn s_factor(&self) -> Scalar {
        ratio(&self.s_numerators, &self.s_denominators)
    }

    pub fn n_factor(&self) -> Scalar {
        ratio(&self.n_numerators, &self.n_denominators)
    }
}

fn ratio(num: &[Scalar], den: &[Scalar]) -> Scalar {
    let p = |xs: &[Scalar]| xs.iter().fold(Scalar::ONE, |a, x| a.mul(x));
    p(num).mul(&p(den).invert().expect("zero share product"))
}

/// Certificate that output = rsk(input) under the mode's prescribed factors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RskCertificate {
    s_point: GroupElement,
    n_point: GroupElement,
    ns_inv_point: GroupElement,
    r_point: GroupElement,
    r_target: GroupElement,
    blinding_cert: DhCertificate,
    core_cert: DhCertificate,
    target_cert: DhCertificate,
    consistency_cert: DhCertificate,
    randomiser_cert: DhCertificate,
    s_factor: FactorProof,
    n_factor: FactorProof,
}

/// Builds the certificate for a hop already performed.  `seed` drives every
/// nonce, so the same hop re-proven from the same ticket is byte-identical.
pub fn prove_rsk(
    secrets: &HopSecrets,
    input: &Cyphertext,
    output: &Cyphertext,
    seed: [u8; 32],
) -> RskCertificate {
    let mut nonces = NonceStream::new(seed);
    let s = secrets.s_factor();
    let n = secrets.n_factor();
    let ns_inv = n.mul(&s.invert().expect("zero s factor"));
    let r = secrets.r;

    let s_point = GroupElement::base_mul(&s);
    let n_point = GroupElement::base_mul(&n);
    let ns_inv_point = GroupElement::base_mul(&ns_inv);
    let r_point = GroupElement::base_mul(&r);
    let r_target = input.target.mul(&r);

    let blinded_in = input.blinding.add(&r_point);
    let nonce = nonces.next(&ns_inv_point, &blinded_in);
    let blinding_cert = dh_prove(&ns_inv, &ns_inv_point, &blinded_in, &output.blinding, &nonce);

    let masked_core = input.core.add(&r_target);
    let nonce = nonces.next(&n_point, &masked_core);
    let core_cert = dh_prove(&n, &n_point, &masked_core, &output.core, &nonce);

    let nonce = nonces.next(&s_point, &input.target);
    let target_cert = dh_prove(&s, &s_point, &input.target, &output.target, &nonce);

    let nonce = nonces.next(&s_point, &ns_inv_point);
    let consistency_cert = dh_prove(&s, &s_point, &ns_inv_point, &n_point, &nonce);

    let nonce = nonces.next(&r_point, &input.target);
    let randomiser_cert = dh_prove(&r, &r_point, &input.target, &r_target, &nonce);

    let (s_check, s_factor) =
        FactorProof::prove(&secrets.s_numerators, &secrets.s_denominators, &mut nonces);
    let (n_check, n_factor) =
        FactorProof::prove(&secrets.n_numerators, &secrets.n_denominators, &mut nonces);
    debug_assert_eq!(s_check, s);
    debug_assert_eq!(n_check, n);

    RskCertificate {
        s_point,
        n_point,
        ns_inv_point,
        r_point,
        r_target,
        blinding_cert,
        core_cert,
        target_cert,
        consistency_cert,
        randomiser_cert,
        s_factor,
        n_factor,
    }
}

impl RskCertificate {
    /// Full check: the five link equations, then both factor commitments
    /// against the share points the verifier trusts.
    pub fn verify(
        &self,
        input: &Cyphertext,
        output: &Cyphertext,
        expected_s: &FactorShares,
        expected_n: &FactorShares,
    ) -> Result<()> {
        // β' = (n/s)(β + rB)
        self.blinding_cert.verify(
            &self.ns_inv_point,
            &input.blinding.add(&self.r_point),
            &output.blinding,
        )?;
        // γ' = n(γ + rτ)
        self.core_cert.verify(
            &self.n_point,
            &input.core.add(&self.r_target),
            &output.core,
        )?;
        // τ' = sτ
        self.target_cert
            .verify(&self.s_point, &input.target, &output.target)?;
        // the stated points cohere: s·(n/s) = n
        self.consistency_cert
            .verify(&self.s_point, &self.ns_inv_point, &self.n_point)?;
        // r_target really is r·τ for the stated r
        self.randomiser_cert
            .verify(&self.r_point, &input.target, &self.r_target)?;
        // s and n are exactly what the shares prescribe
        self.s_factor.verify(&self.s_point, expected_s)?;
        self.n_factor.verify(&self.n_point, expected_n)?;
        Ok(())
    }

    pub fn write(&self, w: &mut Writer) {
        for p in [
            &self.s_point,
            &self.n_point,
            &self.ns_inv_point,
            &self.r_point,
            &self.r_target,
        ] {
            w.point(p);
        }
        for c in [
            &self.blinding_cert,
            &self.core_cert,
            &self.target_cert,
            &self.consistency_cert,
            &self.randomiser_cert,
        ] {
            c.write(w);
        }
        self.s_factor.write(w);
        self.n_factor.write(w);
    }

    pub fn read(r: &mut Reader) -> Result<RskCertificate> {
        Ok(RskCertificate {
            s_point: r.point()?,
            n_point: r.point()?,
            ns_inv_point: r.point()?,
            r_point: r.point()?,
            r_target: r.point()?,
            blinding_cert: DhCertificate::read(r)?,
            core_cert: DhCertificate::read(r)?,
            target_cert: DhCertificate::read(r)?,
            consistency_cert: DhCertificate::read(r)?,
            randomiser_cert: DhCertificate::read(r)?,
            s_factor: FactorProof::read(r)?,
            n_factor: FactorProof::read(r)?,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<RskCertificate> {
        let mut r = Reader::new(bytes);
        let c = RskCertificate::read(&mut r)?;
        r.finish()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elgamal;
    use crate::keyshares::{derive_share, hash_party_id};
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::collections::BTreeMap;

    /// Share source backed by raw masters, for tests only.
    struct TestSource {
        masters: BTreeMap<(TripleId, ShareKind), Scalar>,
    }

    impl TestSource {
        fn random(rng: &mut StdRng) -> TestSource {
            let mut masters = BTreeMap::new();
            for t in TripleId::all() {
                for k in ShareKind::BOTH {
                    masters.insert((t, k), Scalar::random_nonzero(rng));
                }
            }
            TestSource { masters }
        }

        fn share(&self, party: &str, kind: ShareKind, triple: TripleId) -> Scalar {
            derive_share(&self.masters[&(triple, kind)], &hash_party_id(party))
        }
    }

    impl SharePointSource for TestSource {
        fn share_point(
            &self,
            party: &str,
            kind: ShareKind,
            triple: TripleId,
        ) -> Result<GroupElement> {
            Ok(GroupElement::base_mul(&self.share(party, kind, triple)))
        }
    }

    fn hop_secrets(
        src: &TestSource,
        mode: Mode,
        from: &str,
        to: &str,
        assigned: &[TripleId],
        r: Scalar,
    ) -> HopSecrets {
        let shares = |party: Option<&str>, kind: ShareKind| -> Vec<Scalar> {
            party.map_or(Vec::new(), |p| {
                assigned.iter().map(|t| src.share(p, kind, *t)).collect()
            })
        };
        let (n_num, n_den) = n_factor_parties(mode, from, to);
        HopSecrets {
            s_numerators: shares(Some(to), ShareKind::Encryption),
            s_denominators: shares(Some(from), ShareKind::Encryption),
            n_numerators: shares(n_num, ShareKind::Pseudonym),
            n_denominators: shares(n_den, ShareKind::Pseudonym),
            r,
        }
    }

    fn do_hop(
        src: &TestSource,
        mode: Mode,
        from: &str,
        to: &str,
        assigned: &[TripleId],
        input: &Cyphertext,
        rng: &mut StdRng,
    ) -> (Cyphertext, RskCertificate) {
        let secrets = hop_secrets(src, mode, from, to, assigned, Scalar::random(rng));
        let output =
            elgamal::rsk(input, &secrets.s_factor(), &secrets.n_factor(), &secrets.r).unwrap();
        let seed = [rng.next_u32() as u8; 32];
        (output.clone(), prove_rsk(&secrets, input, &output, seed))
    }

    use rand::RngCore;

    #[test]
    fn honest_hops_verify_in_all_modes() {
        let mut rng = StdRng::seed_from_u64(60);
        let src = TestSource::random(&mut rng);
        let assigned: Vec<TripleId> = TripleId::all().take(3).collect();
        let msg = GroupElement::random(&mut rng);
        let target = GroupElement::random(&mut rng);
        let input = elgamal::encrypt_random(&msg, &target, &mut rng);
        for mode in [Mode::Pseudonymise, Mode::Translate, Mode::Depseudonymise] {
            let (output, cert) = do_hop(&src, mode, "mp", "sf", &assigned, &input, &mut rng);
            let (es, en) = expected_factors(&src, mode, "mp", "sf", &assigned).unwrap();
            cert.verify(&input, &output, &es, &en).unwrap();
            // encoding roundtrip
            let cert2 = RskCertificate::from_bytes(&cert.to_bytes()).unwrap();
            cert2.verify(&input, &output, &es, &en).unwrap();
            assert_eq!(cert, cert2);
        }
        // a single-triple hop (shortest chains) and from == to
        let one = &assigned[..1];
        let (output, cert) =
            do_hop(&src, Mode::Pseudonymise, "sf", "sf", one, &input, &mut rng);
        let (es, en) = expected_factors(&src, Mode::Pseudonymise, "sf", "sf", one).unwrap();
        cert.verify(&input, &output, &es, &en).unwrap();
    }

    #[test]
    fn deterministic_seed_reproduces_certificates() {
        let mut rng = StdRng::seed_from_u64(61);
        let src = TestSource::random(&mut rng);
        let assigned: Vec<TripleId> = TripleId::all().take(2).collect();
        let msg = GroupElement::random(&mut rng);
        let target = GroupElement::random(&mut rng);
        let input = elgamal::encrypt_random(&msg, &target, &mut rng);
        let secrets = hop_secrets(&src, Mode::Translate, "a", "b", &assigned, Scalar::from_u64(5));
        let output =
            elgamal::rsk(&input, &secrets.s_factor(), &secrets.n_factor(), &secrets.r).unwrap();
        let c1 = prove_rsk(&secrets, &input, &output, [9; 32]);
        let c2 = prove_rsk(&secrets, &input, &output, [9; 32]);
        assert_eq!(c1.to_bytes(), c2.to_bytes());
        let c3 = prove_rsk(&secrets, &input, &output, [10; 32]);
        assert_ne!(c1.to_bytes(), c3.to_bytes());
    }

    #[test]
    fn wrong_factors_or_modes_are_rejected() {
        let mut rng = StdRng::seed_from_u64(62);
        let src = TestSource::random(&mut rng);
        let assigned: Vec<TripleId> = TripleId::all().take(3).collect();
        let msg = GroupElement::random(&mut rng);
        let target = GroupElement::random(&mut rng);
        let input = elgamal::encrypt_random(&msg, &target, &mut rng);
        let (output, cert) =
            do_hop(&src, Mode::Translate, "mp", "sf", &assigned, &input, &mut rng);

        // verified under the wrong mode
        let (es, en) = expected_factors(&src, Mode::Pseudonymise, "mp", "sf", &assigned).unwrap();
        assert!(cert.verify(&input, &output, &es, &en).is_err());
        // wrong direction
        let (es, en) = expected_factors(&src, Mode::Translate, "sf", "mp", &assigned).unwrap();
        assert!(cert.verify(&input, &output, &es, &en).is_err());
        // wrong triple set
        let other: Vec<TripleId> = TripleId::all().skip(3).take(3).collect();
        let (es, en) = expected_factors(&src, Mode::Translate, "mp", "sf", &other).unwrap();
        assert!(cert.verify(&input, &output, &es, &en).is_err());
        // swapped input/output
        let (es, en) = expected_factors(&src, Mode::Translate, "mp", "sf", &assigned).unwrap();
        assert!(cert.verify(&output, &input, &es, &en).is_err());

        // a peer that skipped the prescribed n (identity reshuffle) cannot
        // produce an accepting certificate
        let mut secrets =
            hop_secrets(&src, Mode::Translate, "mp", "sf", &assigned, Scalar::from_u64(3));
        secrets.n_numerators = vec![Scalar::ONE; assigned.len()];
        let dishonest =
            elgamal::rsk(&input, &secrets.s_factor(), &secrets.n_factor(), &secrets.r).unwrap();
        let bad_cert = prove_rsk(&secrets, &input, &dishonest, [1; 32]);
        assert!(bad_cert.verify(&input, &dishonest, &es, &en).is_err());
    }

    #[test]
    fn mutated_certificates_are_rejected() {
        let mut rng = StdRng::seed_from_u64(63);
        let src = TestSource::random(&mut rng);
        let assigned: Vec<TripleId> = TripleId::all().take(2).collect();
        let msg = GroupElement::random(&mut rng);
        let target = GroupElement::random(&mut rng);
        let input = elgamal::encrypt_random(&msg, &target, &mut rng);
        let (output, cert) =
            do_hop(&src, Mode::Depseudonymise, "mp", "sf", &assigned, &input, &mut rng);
        let (es, en) =
            expected_factors(&src, Mode::Depseudonymise, "mp", "sf", &assigned).unwrap();
        cert.verify(&input, &output, &es, &en).unwrap();
        let good = cert.to_bytes();
        for i in (0..good.len()).step_by(31) {
            let mut bad = good.clone();
            bad[i] ^= 1;
            let ok = RskCertificate::from_bytes(&bad)
                .and_then(|c| c.verify(&input, &output, &es, &en));
            assert!(ok.is_err(), "mutation at byte {i} accepted");
        }
    }
}
