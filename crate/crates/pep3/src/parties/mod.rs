//! The data-handling parties: enrolment, the transcryption driver, and the
//! audit logic that keeps peers honest.
//!
//! A party trusts no single peer.  It accepts a powers table only when at
//! least three of the five peers sent identical bytes, accepts a key share
//! only when the scalar matches a derivation proof checked against those
//! tables, and (at a configurable sampling rate) demands a certificate for
//! transcryption hops and checks it against share points it verified
//! itself.  Every discrepancy is attributed to a specific peer.

pub mod investigator;
pub mod mp;
pub mod researcher;
pub mod sf;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use pep3_group::{GroupElement, Scalar};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::auth::AuthSecret;
use crate::elgamal::{self, Cyphertext};
use crate::error::{Error, Result};
use crate::keyshares::{
    assigned_shares, hash_party_id, ActiveSet, PeerId, PowersTable, ShareKind, TripleId,
};
use crate::permits::Permit;
use crate::proofs::{
    expected_factors, verify_derivation, Mode, RskCertificate, SharePointSource,
};
use crate::sealing;
use crate::wire::transport::Transport;
use crate::wire::{
    decode_frame, encode_frame, expect_ok, ChainLink, EnrolmentRequest, EnrolmentShares,
    Message, ProofRequest, Roster, SharePointRequest, ShareProof, TranscryptRequest,
};

/// How a party reaches each peer.
pub type Links = BTreeMap<PeerId, Arc<dyn Transport>>;

/// What enrolment concluded about each peer's honesty.
#[derive(Default, Debug)]
pub struct EnrolmentReport {
    pub liars: BTreeSet<PeerId>,
    pub details: Vec<String>,
}

/// Key material a party ends up with after enrolment.
struct EnrolledKeys {
    /// The party's decryption key s(id) — product of all ten shares.
    s_self: Scalar,
    /// s(id)·B: the target key this party's cyphertexts carry.
    tau_self: GroupElement,
    /// Majority-voted public tables for all ten triples, both kinds.
    tables: BTreeMap<(TripleId, ShareKind), PowersTable>,
}

pub struct PartyCore {
    pub id: String,
    auth: AuthSecret,
    pub roster: Roster,
    /// Fraction of hops audited with a certificate check (1.0 = every hop).
    pub sampling: f64,
    keys: EnrolledKeys,
    /// Share points verified against the tables, reusable across hops.
    points: Mutex<BTreeMap<(String, ShareKind, TripleId), ShareProof>>,
    rng: Mutex<StdRng>,
}

impl PartyCore {
    /// Fetches tables and key shares from all five peers, cross-checks
    /// everything, and names any peer caught lying.  Succeeds as long as
    /// every table has a three-peer majority and every triple has at least
    /// one member whose share checks out.
    pub fn enrol(
        id: &str,
        auth: AuthSecret,
        roster: Roster,
        sampling: f64,
        links: &Links,
        seed: u64,
    ) -> Result<(PartyCore, EnrolmentReport)> {
        let mut rng = StdRng::seed_from_u64(seed);
        let node = format!("party:{id}");
        let mut report = EnrolmentReport::default();

        let mut responses = BTreeMap::new();
        for (&peer, link) in links {
            let frame = encode_frame(
                &node,
                &auth,
                &Message::Enrol(EnrolmentRequest { party: id.into() }),
                &mut rng,
            );
            let reply = link
                .round_trip(&frame)
                .and_then(|r| decode_frame(&r, &roster))
                .and_then(|(s, m)| expect_ok(s, m));
            match reply {
                Ok(Message::EnrolOk(ok)) => {
                    responses.insert(peer, ok);
                }
                Ok(_) | Err(_) => {
                    report.liars.insert(peer);
                    report.details.push(format!("peer {peer} did not answer enrolment"));
                }
            }
        }

        // Tables: identical bytes from at least three peers, or no deal.
        let mut tables = BTreeMap::new();
        for t in TripleId::all() {
            for k in ShareKind::BOTH {
                let mut groups: Vec<(Vec<u8>, Vec<PeerId>, PowersTable)> = Vec::new();
                for (&peer, resp) in &responses {
                    let Some((_, _, table)) =
                        resp.tables.iter().find(|(rt, rk, _)| *rt == t && *rk == k)
                    else {
                        report.liars.insert(peer);
                        report.details.push(format!(
                            "peer {peer} omitted the table for {}/{k}",
                            t.name()
                        ));
                        continue;
                    };
                    let bytes = table.to_bytes();
                    match groups.iter_mut().find(|(b, _, _)| *b == bytes) {
                        Some((_, voters, _)) => voters.push(peer),
                        None => groups.push((bytes, vec![peer], table.clone())),
                    }
                }
                groups.sort_by_key(|(_, voters, _)| std::cmp::Reverse(voters.len()));
                let Some((_, voters, table)) = groups.first() else {
                    return Err(Error::EnrolmentFailure(format!(
                        "nobody supplied the table for {}/{k}",
                        t.name()
                    )));
                };
                if voters.len() < 3 {
                    return Err(Error::EnrolmentFailure(format!(
                        "no three-peer agreement on the table for {}/{k}",
                        t.name()
                    )));
                }
                for (_, minority, _) in &groups[1..] {
                    for &peer in minority {
                        report.liars.insert(peer);
                        report.details.push(format!(
                            "peer {peer} sent a divergent table for {}/{k}",
                            t.name()
                        ));
                    }
                }
                tables.insert((t, k), table.clone());
            }
        }

        // Shares: open each peer's box and verify every scalar against the
        // majority tables before believing it.
        let e = hash_party_id(id);
        let mut shares: BTreeMap<TripleId, Scalar> = BTreeMap::new();
        for (&peer, resp) in &responses {
            let peer_pub = roster.key_of(&peer.node_id())?;
            let key = sealing::box_key(&auth, peer_pub);
            let Some(plain) = sealing::open(&key, &resp.sealed_shares) else {
                report.liars.insert(peer);
                report.details.push(format!("peer {peer} sent an unopenable share box"));
                continue;
            };
            let Ok(list) = EnrolmentShares::from_bytes(&plain) else {
                report.liars.insert(peer);
                report.details.push(format!("peer {peer} sent a malformed share box"));
                continue;
            };
            for (t, scalar, proof) in list.0 {
                if !t.contains(peer) {
                    report.liars.insert(peer);
                    report.details.push(format!(
                        "peer {peer} claimed a share of {}, which it has no part in",
                        t.name()
                    ));
                    continue;
                }
                let endpoint = GroupElement::base_mul(&scalar);
                let table = &tables[&(t, ShareKind::Encryption)];
                if verify_derivation(table, &e, &endpoint, &proof).is_err() {
                    report.liars.insert(peer);
                    report.details.push(format!(
                        "peer {peer} sent a key share for {} that does not match the public table",
                        t.name()
                    ));
                    continue;
                }
                shares.entry(t).or_insert(scalar);
            }
        }

        let missing: Vec<String> =
            TripleId::all().filter(|t| !shares.contains_key(t)).map(|t| t.name()).collect();
        if !missing.is_empty() {
            return Err(Error::EnrolmentFailure(format!(
                "no verified key share for {}",
                missing.join(", ")
            )));
        }

        let s_self = shares.values().fold(Scalar::ONE, |a, x| a.mul(x));
        let keys = EnrolledKeys { s_self, tau_self: GroupElement::base_mul(&s_self), tables };
        let core = PartyCore {
            id: id.into(),
            auth,
            roster,
            sampling,
            keys,
            points: Mutex::new(BTreeMap::new()),
            rng: Mutex::new(rng),
        };
        Ok((core, report))
    }

    pub fn node_id(&self) -> String {
        format!("party:{}", self.id)
    }

    /// The public key this party's cyphertexts are encrypted against.
    pub fn public_key(&self) -> GroupElement {
        self.keys.tau_self
    }

    pub fn encrypt(&self, message: &GroupElement) -> Cyphertext {
        let mut rng = self.rng.lock().unwrap();
        elgamal::encrypt_random(message, &self.keys.tau_self, &mut *rng)
    }

    /// Fresh blinding on an existing cyphertext (same plaintext, same key).
    pub fn refresh(&self, c: &Cyphertext) -> Cyphertext {
        let mut rng = self.rng.lock().unwrap();
        elgamal::rerandomise(c, &Scalar::random_nonzero(&mut *rng))
    }

    pub fn decrypt(&self, c: &Cyphertext) -> Result<GroupElement> {
        if c.target != self.keys.tau_self {
            return Err(Error::Protocol("cyphertext is not encrypted for this party".into()));
        }
        Ok(elgamal::decrypt(c, &self.keys.s_self))
    }

    /// One signed request/response exchange with a node.
    pub fn call(&self, link: &dyn Transport, msg: &Message) -> Result<Message> {
        let frame = {
            let mut rng = self.rng.lock().unwrap();
            encode_frame(&self.node_id(), &self.auth, msg, &mut *rng)
        };
        let reply = link.round_trip(&frame)?;
        let (sender, msg) = decode_frame(&reply, &self.roster)?;
        expect_ok(sender, msg)
    }

    fn sample(&self) -> bool {
        if self.sampling >= 1.0 {
            return true;
        }
        if self.sampling <= 0.0 {
            return false;
        }
        self.rng.lock().unwrap().gen::<f64>() < self.sampling
    }

    /// A share point this party will trust: fetched from a member peer and
    /// checked against the enrolled tables.  Members are tried in order
    /// until one produces a proof that verifies.
    fn share_proof(
        &self,
        links: &Links,
        party: &str,
        kind: ShareKind,
        triple: TripleId,
    ) -> Result<ShareProof> {
        let cache_key = (party.to_string(), kind, triple);
        if let Some(sp) = self.points.lock().unwrap().get(&cache_key) {
            return Ok(sp.clone());
        }
        let table = &self.keys.tables[&(triple, kind)];
        let e = hash_party_id(party);
        for member in triple.members() {
            let Some(link) = links.get(&member) else { continue };
            let reply = self.call(
                link.as_ref(),
                &Message::SharePoint(SharePointRequest {
                    party: party.into(),
                    kind,
                    triple,
                }),
            );
            let Ok(Message::SharePointOk(ok)) = reply else { continue };
            if verify_derivation(table, &e, &ok.endpoint, &ok.proof).is_ok() {
                let sp = ShareProof {
                    party: party.into(),
                    kind,
                    triple,
                    endpoint: ok.endpoint,
                    proof: ok.proof,
                };
                self.points.lock().unwrap().insert(cache_key, sp.clone());
                return Ok(sp);
            }
        }
        Err(Error::VerificationFailed(format!(
            "no member of {} produced a valid share point for {party}/{kind}",
            triple.name()
        )))
    }

    fn verified_share_proofs(&self) -> Vec<ShareProof> {
        self.points.lock().unwrap().values().cloned().collect()
    }

    /// Demands the certificate for one hop and checks it against share
    /// points this party verified itself.  Any failure — refusal, a
    /// non-proof, or a certificate that does not cover the observed output
    /// — is attributed to the peer.
    fn audit_hop(
        &self,
        links: &Links,
        link: &dyn Transport,
        peer: PeerId,
        mode: Mode,
        from: &str,
        to: &str,
        assigned: &[TripleId],
        input: &Cyphertext,
        output: &Cyphertext,
        ticket: &[u8],
    ) -> Result<RskCertificate> {
        let reply = self.call(
            link,
            &Message::Proof(ProofRequest {
                ticket: ticket.to_vec(),
                input: *input,
                output: *output,
            }),
        );
        let cert = match reply {
            Ok(Message::ProofOk(ok)) => ok.cert,
            Ok(_) => {
                return Err(Error::VerificationFailed(format!(
                    "peer {peer} answered a proof request with something else"
                )))
            }
            Err(e) => {
                return Err(Error::VerificationFailed(format!(
                    "peer {peer} refused to prove a hop: {e}"
                )))
            }
        };
        let fetcher = PointFetcher { core: self, links };
        let (es, en) = expected_factors(&fetcher, mode, from, to, assigned)?;
        cert.verify(input, output, &es, &en).map_err(|_| {
            Error::VerificationFailed(format!(
                "peer {peer} produced an output its certificate does not cover"
            ))
        })?;
        Ok(cert)
    }

    /// Runs a batch through the three active peers in order, sampling
    /// certificate checks at the configured rate.
    pub fn transcrypt(
        &self,
        links: &Links,
        mode: Mode,
        from: &str,
        to: &str,
        active: &ActiveSet,
        permit: &Permit,
        inputs: Vec<Cyphertext>,
    ) -> Result<Vec<Cyphertext>> {
        if mode == Mode::Depseudonymise {
            let out = self.depseudonymise_chain(links, from, to, active, permit, inputs)?;
            return Ok(vec![out]);
        }
        let mut batch = inputs;
        for peer in active.peers() {
            let link = self.link(links, peer)?;
            let req = TranscryptRequest {
                mode,
                from: from.into(),
                to: to.into(),
                active: active.clone(),
                permit: permit.clone(),
                inputs: batch.clone(),
                chain: vec![],
                share_proofs: vec![],
            };
            let Message::TranscryptOk(ok) = self.call(link, &Message::Transcrypt(req))? else {
                return Err(Error::Protocol("expected transcryption outputs".into()));
            };
            if ok.outputs.len() != batch.len() || ok.tickets.len() != batch.len() {
                return Err(Error::Protocol("transcryption batch size mismatch".into()));
            }
            let assigned = assigned_shares(active, peer);
            for i in 0..batch.len() {
                if self.sample() {
                    self.audit_hop(
                        links,
                        link,
                        peer,
                        mode,
                        from,
                        to,
                        &assigned,
                        &batch[i],
                        &ok.outputs[i],
                        &ok.tickets[i],
                    )?;
                }
            }
            batch = ok.outputs;
        }
        Ok(batch)
    }

    /// The audited path for warrants: one cyphertext, a certificate checked
    /// after every hop, and the verified chain presented to the next peer
    /// so it can refuse to extend a corrupted prefix.
    fn depseudonymise_chain(
        &self,
        links: &Links,
        from: &str,
        to: &str,
        active: &ActiveSet,
        permit: &Permit,
        inputs: Vec<Cyphertext>,
    ) -> Result<Cyphertext> {
        if inputs.len() != 1 {
            return Err(Error::Protocol("depseudonymisation takes exactly one cyphertext".into()));
        }
        let c0 = inputs[0];
        let mut chain: Vec<ChainLink> = Vec::new();
        let mut current = c0;
        for peer in active.peers() {
            let link = self.link(links, peer)?;
            let req = TranscryptRequest {
                mode: Mode::Depseudonymise,
                from: from.into(),
                to: to.into(),
                active: active.clone(),
                permit: permit.clone(),
                inputs: vec![c0],
                chain: chain.clone(),
                share_proofs: self.verified_share_proofs(),
            };
            let Message::TranscryptOk(ok) = self.call(link, &Message::Transcrypt(req))? else {
                return Err(Error::Protocol("expected transcryption outputs".into()));
            };
            if ok.outputs.len() != 1 || ok.tickets.len() != 1 {
                return Err(Error::Protocol("transcryption batch size mismatch".into()));
            }
            let assigned = assigned_shares(active, peer);
            let cert = self.audit_hop(
                links,
                link,
                peer,
                Mode::Depseudonymise,
                from,
                to,
                &assigned,
                &current,
                &ok.outputs[0],
                &ok.tickets[0],
            )?;
            chain.push(ChainLink { peer, output: ok.outputs[0], cert });
            current = ok.outputs[0];
        }
        Ok(current)
    }

    fn link<'a>(&self, links: &'a Links, peer: PeerId) -> Result<&'a dyn Transport> {
        links
            .get(&peer)
            .map(|l| l.as_ref())
            .ok_or_else(|| Error::Config(format!("no route to peer {peer}")))
    }
}

/// Adapter: certificate verification pulls share points through the
/// party's fetch-and-verify cache.
struct PointFetcher<'a> {
    core: &'a PartyCore,
    links: &'a Links,
}

impl SharePointSource for PointFetcher<'_> {
    fn share_point(
        &self,
        party: &str,
        kind: ShareKind,
        triple: TripleId,
    ) -> Result<GroupElement> {
        self.core.share_proof(self.links, party, kind, triple).map(|sp| sp.endpoint)
    }
}
