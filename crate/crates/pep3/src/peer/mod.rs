//! The peer node: one of the five share holders, serving transcryption,
//! after-the-fact proofs, party enrolment, and share-point lookups.
//!
//! A peer keeps no per-request state.  Proof tickets carry everything
//! needed to regenerate a certificate, so a peer process can be restarted
//! (with the same master shares on disk) and still honour tickets issued
//! before the restart.  The only mutable state is an LRU cache of output
//! target points, worth one general multiplication per cyphertext.

use std::num::NonZeroUsize;
use std::sync::Mutex;

use lru::LruCache;
use pep3_group::{GroupElement, Scalar};
use sha2::{Digest, Sha256};

use crate::elgamal::{self, Cyphertext};
use crate::error::{Error, Result};
use crate::keyshares::{
    assigned_shares, derive_share, hash_party_id, ActiveSet, MasterSecrets, PeerId, ShareKind,
    TripleId,
};
use crate::permits::now_unix;
use crate::proofs::{
    expected_factors, prove_derivation, prove_rsk, verify_derivation, HopSecrets, Mode,
    SharePointSource,
};
use crate::sealing;
use crate::ticket::{open_ticket, request_hash, seal_ticket, TicketBody};
use crate::wire::transport::Endpoint;
use crate::wire::{
    decode_frame, encode_frame, EnrolmentRequest, EnrolmentResponse, EnrolmentShares,
    ErrorResponse, Message, ProofRequest, ProofResponse, Roster, SharePointRequest,
    SharePointResponse, TranscryptRequest, TranscryptResponse,
};
use crate::auth::AuthSecret;

/// Scripted misbehaviour for fault-injection experiments.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PeerTamper {
    /// Corrupt every transcryption output.  Tickets still describe the
    /// honest hop, so any requested proof exposes the lie.
    CorruptResult,
    /// Refuse to hand out proofs.
    RefuseProof,
    /// Send enrolling parties a share scalar that does not match the
    /// honestly proven table endpoint.
    WrongEnrolmentShare,
}

pub struct PeerNode {
    secrets: MasterSecrets,
    auth: AuthSecret,
    roster: Roster,
    /// s·τ by (from, to, active, τ); see module docs.
    target_cache: Mutex<LruCache<[u8; 32], GroupElement>>,
    pub tamper: Option<PeerTamper>,
}

fn target_key(from: &str, to: &str, active: &ActiveSet, target: &GroupElement) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pep3.peer.target-cache");
    h.update((from.len() as u32).to_be_bytes());
    h.update(from.as_bytes());
    h.update(to.as_bytes());
    for p in active.peers() {
        h.update([p as u8]);
    }
    h.update(target.encode());
    h.finalize().into()
}

/// Share points for checking another peer's certificate: this peer's own
/// shares directly, anything else from proofs the requester supplied
/// (admitted only after checking them against the public tables).
struct VerifiedPoints<'a> {
    secrets: &'a MasterSecrets,
    supplied: Vec<(String, ShareKind, TripleId, GroupElement)>,
}

impl SharePointSource for VerifiedPoints<'_> {
    fn share_point(
        &self,
        party: &str,
        kind: ShareKind,
        triple: TripleId,
    ) -> Result<GroupElement> {
        if let Ok(x) = self.secrets.share(triple, kind) {
            return Ok(GroupElement::base_mul(&derive_share(x, &hash_party_id(party))));
        }
        self.supplied
            .iter()
            .find(|(p, k, t, _)| p == party && *k == kind && *t == triple)
            .map(|(_, _, _, e)| *e)
            .ok_or_else(|| {
                Error::VerificationFailed(format!(
                    "no verified share point for {party}/{kind}/{}",
                    triple.name()
                ))
            })
    }
}

impl PeerNode {
    pub fn new(secrets: MasterSecrets, auth: AuthSecret, roster: Roster) -> PeerNode {
        PeerNode {
            secrets,
            auth,
            roster,
            target_cache: Mutex::new(LruCache::new(NonZeroUsize::new(256).unwrap())),
            tamper: None,
        }
    }

    pub fn id(&self) -> PeerId {
        self.secrets.id
    }

    pub fn node_id(&self) -> String {
        self.secrets.id.node_id()
    }

    /// This peer's derived share scalars for one hop.
    fn hop_secrets(
        &self,
        mode: Mode,
        from: &str,
        to: &str,
        assigned: &[TripleId],
        r: Scalar,
    ) -> Result<HopSecrets> {
        let from_e = hash_party_id(from);
        let to_e = hash_party_id(to);
        let mut s_numerators = Vec::with_capacity(assigned.len());
        let mut s_denominators = Vec::with_capacity(assigned.len());
        let mut n_numerators = Vec::new();
        let mut n_denominators = Vec::new();
        for &t in assigned {
            let s = self.secrets.share(t, ShareKind::Encryption)?;
            s_numerators.push(derive_share(s, &to_e));
            s_denominators.push(derive_share(s, &from_e));
            let n = self.secrets.share(t, ShareKind::Pseudonym)?;
            match mode {
                Mode::Pseudonymise => n_numerators.push(derive_share(n, &to_e)),
                Mode::Translate => {
                    n_numerators.push(derive_share(n, &to_e));
                    n_denominators.push(derive_share(n, &from_e));
                }
                Mode::Depseudonymise => n_denominators.push(derive_share(n, &from_e)),
            }
        }
        Ok(HopSecrets { s_numerators, s_denominators, n_numerators, n_denominators, r })
    }

    fn cached_target(
        &self,
        from: &str,
        to: &str,
        active: &ActiveSet,
        target: &GroupElement,
        s: &Scalar,
    ) -> GroupElement {
        let key = target_key(from, to, active, target);
        let mut cache = self.target_cache.lock().unwrap();
        if let Some(hit) = cache.get(&key) {
            return *hit;
        }
        let out = target.mul(s);
        cache.put(key, out);
        out
    }

    fn handle_transcrypt(&self, sender: &str, req: &TranscryptRequest) -> Result<Message> {
        let party = sender
            .strip_prefix("party:")
            .ok_or_else(|| Error::Protocol(format!("{sender} cannot request transcryption")))?;
        if party != req.permit.subject {
            return Err(Error::PermitRejected("permit subject is not the sender"));
        }
        req.permit.verify(self.roster.authority()?)?;
        if req.inputs.is_empty() {
            return Err(Error::Protocol("empty transcryption batch".into()));
        }
        req.permit
            .authorises(party, req.mode, &req.from, &req.to, &req.inputs[0], now_unix())?;

        let assigned = assigned_shares(&req.active, self.secrets.id);
        if assigned.is_empty() {
            return Err(Error::Protocol(format!(
                "peer {} is not in the active set",
                self.secrets.id
            )));
        }

        let inputs: Vec<Cyphertext> = if req.mode == Mode::Depseudonymise {
            if req.inputs.len() != 1 {
                return Err(Error::Protocol(
                    "depseudonymisation takes exactly one cyphertext".into(),
                ));
            }
            vec![self.verify_chain(req)?]
        } else {
            if !req.chain.is_empty() || !req.share_proofs.is_empty() {
                return Err(Error::Protocol(
                    "hop chains are only for depseudonymisation".into(),
                ));
            }
            req.inputs.clone()
        };

        let hop = self.hop_secrets(req.mode, &req.from, &req.to, &assigned, Scalar::ZERO)?;
        let s = hop.s_factor();
        let n = hop.n_factor();

        let mut rng = rand::thread_rng();
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut tickets = Vec::with_capacity(inputs.len());
        for input in &inputs {
            let r = Scalar::random_nonzero(&mut rng);
            let new_target = self.cached_target(&req.from, &req.to, &req.active, &input.target, &s);
            let mut out = elgamal::rsk_to_target(input, &s, &n, &r, &new_target)?;
            if self.tamper == Some(PeerTamper::CorruptResult) {
                out.core = out.core.mul(&Scalar::from_u64(2));
            }
            let body = TicketBody {
                mode: req.mode,
                from: req.from.clone(),
                to: req.to.clone(),
                assigned: assigned.clone(),
                r,
                request_hash: request_hash(req.mode, &req.from, &req.to, &assigned, input),
            };
            tickets.push(seal_ticket(&self.secrets.ticket_key, &body, &mut rng));
            outputs.push(out);
        }
        Ok(Message::TranscryptOk(TranscryptResponse { outputs, tickets }))
    }

    /// Checks a depseudonymisation chain end-to-end and returns the
    /// cyphertext this peer must now transform.  The chain must be exactly
    /// the prefix of the active order ending just before this peer, and
    /// every prior hop must carry a certificate that verifies against
    /// trusted share points.
    fn verify_chain(&self, req: &TranscryptRequest) -> Result<Cyphertext> {
        let order = req.active.peers();
        let position = req.chain.len();
        if position >= order.len() {
            return Err(Error::Protocol("hop chain is already complete".into()));
        }
        if order[position] != self.secrets.id {
            return Err(Error::Protocol(format!(
                "hop {} belongs to peer {}, not peer {}",
                position + 1,
                order[position],
                self.secrets.id
            )));
        }
        let mut points = VerifiedPoints { secrets: &self.secrets, supplied: Vec::new() };
        for sp in &req.share_proofs {
            let table = self.secrets.table(sp.triple, sp.kind);
            verify_derivation(table, &hash_party_id(&sp.party), &sp.endpoint, &sp.proof)
                .map_err(|_| {
                    Error::VerificationFailed(format!(
                        "share proof for {}/{}/{} is invalid",
                        sp.party,
                        sp.kind,
                        sp.triple.name()
                    ))
                })?;
            points.supplied.push((sp.party.clone(), sp.kind, sp.triple, sp.endpoint));
        }
        let mut current = req.inputs[0];
        for (i, link) in req.chain.iter().enumerate() {
            if link.peer != order[i] {
                return Err(Error::Protocol(format!(
                    "hop {} claims peer {}, expected peer {}",
                    i + 1,
                    link.peer,
                    order[i]
                )));
            }
            let link_assigned = assigned_shares(&req.active, link.peer);
            let (es, en) =
                expected_factors(&points, req.mode, &req.from, &req.to, &link_assigned)?;
            link.cert.verify(&current, &link.output, &es, &en).map_err(|_| {
                Error::VerificationFailed(format!(
                    "hop certificate from peer {} does not verify",
                    link.peer
                ))
            })?;
            current = link.output;
        }
        Ok(current)
    }

    fn handle_proof(&self, _sender: &str, req: &ProofRequest) -> Result<Message> {
        if self.tamper == Some(PeerTamper::RefuseProof) {
            return Err(Error::Protocol("proof service disabled".into()));
        }
        let body = open_ticket(&self.secrets.ticket_key, &req.ticket)?;
        let expect = request_hash(body.mode, &body.from, &body.to, &body.assigned, &req.input);
        if expect != body.request_hash {
            return Err(Error::TicketRejected("ticket does not match this input"));
        }
        let hop = self.hop_secrets(body.mode, &body.from, &body.to, &body.assigned, body.r)?;
        // Recompute what honestly came out; the certificate never trusts
        // the requester's claimed output.
        let honest = elgamal::rsk(&req.input, &hop.s_factor(), &hop.n_factor(), &body.r)?;
        let cert = prove_rsk(&hop, &req.input, &honest, body.proof_seed());
        Ok(Message::ProofOk(ProofResponse { cert }))
    }

    fn handle_enrolment(&self, sender: &str, req: &EnrolmentRequest) -> Result<Message> {
        let node = format!("party:{}", req.party);
        if sender != node {
            return Err(Error::Protocol("parties enrol for themselves".into()));
        }
        let party_key = self.roster.key_of(&node)?;
        let tables = self
            .secrets
            .tables_iter()
            .map(|(&(t, k), table)| (t, k, table.clone()))
            .collect();
        let e = hash_party_id(&req.party);
        let mut shares = Vec::new();
        for (&(t, k), x) in self.secrets.shares_iter() {
            if k != ShareKind::Encryption {
                continue;
            }
            let mut scalar = derive_share(x, &e);
            if self.tamper == Some(PeerTamper::WrongEnrolmentShare) {
                scalar = scalar.add(&Scalar::ONE);
            }
            let (_, proof) = prove_derivation(x, &e);
            shares.push((t, scalar, proof));
        }
        let mut rng = rand::thread_rng();
        let sealed_shares = sealing::seal(
            &sealing::box_key(&self.auth, party_key),
            &EnrolmentShares(shares).to_bytes(),
            &mut rng,
        );
        Ok(Message::EnrolOk(EnrolmentResponse { tables, sealed_shares }))
    }

    fn handle_share_point(&self, _sender: &str, req: &SharePointRequest) -> Result<Message> {
        let x = self.secrets.share(req.triple, req.kind)?;
        let (endpoint, proof) = prove_derivation(x, &hash_party_id(&req.party));
        Ok(Message::SharePointOk(SharePointResponse { endpoint, proof }))
    }

    fn dispatch(&self, sender: &str, msg: &Message) -> Result<Message> {
        match msg {
            Message::Transcrypt(m) => self.handle_transcrypt(sender, m),
            Message::Proof(m) => self.handle_proof(sender, m),
            Message::Enrol(m) => self.handle_enrolment(sender, m),
            Message::SharePoint(m) => self.handle_share_point(sender, m),
            _ => Err(Error::Protocol("not a peer request".into())),
        }
    }
}

impl Endpoint for PeerNode {
    fn handle_frame(&self, frame: &[u8]) -> Vec<u8> {
        let reply = match decode_frame(frame, &self.roster) {
            Ok((sender, msg)) => self
                .dispatch(&sender, &msg)
                .unwrap_or_else(|e| Message::Fail(ErrorResponse { message: e.to_string() })),
            Err(e) => Message::Fail(ErrorResponse { message: e.to_string() }),
        };
        encode_frame(&self.node_id(), &self.auth, &reply, &mut rand::thread_rng())
    }
}
