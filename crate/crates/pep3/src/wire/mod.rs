//! Wire protocol: length-framed, tagged, signed messages.
//!
//! Every frame is `u32 length ‖ u8 tag ‖ sender id ‖ signature ‖ body`.
//! Requests use tags 0x01–0x1F; the matching response sets the high bit;
//! 0x7F carries an error.  The signature covers the tag and body, keyed by
//! the static key the roster lists for the sender, so nodes cannot be
//! impersonated and replies cannot be re-labelled.

pub mod transport;

use std::collections::BTreeMap;

use pep3_group::{GroupElement, Scalar};
use rand::{CryptoRng, RngCore};

use crate::auth::{AuthPublic, AuthSecret, Signature, SIGNATURE_BYTES};
use crate::codec::{Reader, Writer};
use crate::elgamal::{Cyphertext, CYPHERTEXT_BYTES};
use crate::error::{Error, Result};
use crate::keyshares::{ActiveSet, PeerId, PowersTable, ShareKind, TripleId, TABLE_BITS};
use crate::permits::Permit;
use crate::proofs::{DerivationProof, Mode, RskCertificate};

/// Frames larger than this are rejected outright.
pub const MAX_FRAME: usize = 16 << 20;

pub const TAG_TRANSCRYPT: u8 = 0x01;
pub const TAG_TRANSCRYPT_OK: u8 = 0x81;
pub const TAG_PROOF: u8 = 0x02;
pub const TAG_PROOF_OK: u8 = 0x82;
pub const TAG_ENROL: u8 = 0x03;
pub const TAG_ENROL_OK: u8 = 0x83;
pub const TAG_SHARE_POINT: u8 = 0x04;
pub const TAG_SHARE_POINT_OK: u8 = 0x84;
pub const TAG_INGEST: u8 = 0x10;
pub const TAG_INGEST_OK: u8 = 0x90;
pub const TAG_QUERY: u8 = 0x11;
pub const TAG_QUERY_OK: u8 = 0x91;
pub const TAG_ERROR: u8 = 0x7f;

/// Who holds which static key; the ground truth for signature checks.
#[derive(Clone, Default)]
pub struct Roster {
    keys: BTreeMap<String, AuthPublic>,
}

impl Roster {
    pub fn new() -> Roster {
        Roster::default()
    }

    pub fn register(&mut self, node: &str, key: AuthPublic) {
        self.keys.insert(node.into(), key);
    }

    pub fn key_of(&self, node: &str) -> Result<&AuthPublic> {
        self.keys
            .get(node)
            .ok_or_else(|| Error::BadSignature(format!("unknown node {node:?}")))
    }

    pub fn knows(&self, node: &str) -> bool {
        self.keys.contains_key(node)
    }

    /// The permit-signing authority's key.
    pub fn authority(&self) -> Result<&AuthPublic> {
        self.key_of("authority")
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&String, &AuthPublic)> {
        self.keys.iter()
    }
}

/// One verified hop of a depseudonymisation chain, as presented to the
/// next peer.
#[derive(Clone, Debug)]
pub struct ChainLink {
    pub peer: PeerId,
    pub output: Cyphertext,
    pub cert: RskCertificate,
}

/// A share point together with the derivation proof that substantiates it.
#[derive(Clone, Debug)]
pub struct ShareProof {
    pub party: String,
    pub kind: ShareKind,
    pub triple: TripleId,
    pub endpoint: GroupElement,
    pub proof: DerivationProof,
}

#[derive(Clone, Debug)]
pub struct TranscryptRequest {
    pub mode: Mode,
    pub from: String,
    pub to: String,
    pub active: ActiveSet,
    pub permit: Permit,
    pub inputs: Vec<Cyphertext>,
    /// Prior hops (depseudonymisation only; `inputs[0]` is the chain start).
    pub chain: Vec<ChainLink>,
    /// Share points the receiving peer needs to verify the chain.
    pub share_proofs: Vec<ShareProof>,
}

#[derive(Clone, Debug)]
pub struct TranscryptResponse {
    pub outputs: Vec<Cyphertext>,
    pub tickets: Vec<Vec<u8>>,
}

#[derive(Clone, Debug)]
pub struct ProofRequest {
    pub ticket: Vec<u8>,
    pub input: Cyphertext,
    pub output: Cyphertext,
}

#[derive(Clone, Debug)]
pub struct ProofResponse {
    pub cert: RskCertificate,
}

#[derive(Clone, Debug)]
pub struct EnrolmentRequest {
    pub party: String,
}

#[derive(Clone, Debug)]
pub struct EnrolmentResponse {
    /// The peer's copy of every public powers table.
    pub tables: Vec<(TripleId, ShareKind, PowersTable)>,
    /// [`EnrolmentShares`], sealed to the enrolling party (static DH with
    /// the roster keys) so key-share scalars never cross the wire in clear.
    pub sealed_shares: Vec<u8>,
}

/// The plaintext inside `EnrolmentResponse::sealed_shares`: the peer's
/// encryption-kind share scalar for each of its triples, with the proof
/// pinning it to the public table.
#[derive(Clone, Debug)]
pub struct EnrolmentShares(pub Vec<(TripleId, Scalar, DerivationProof)>);

impl EnrolmentShares {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.0.len() as u8);
        for (t, s, proof) in &self.0 {
            w.u8(t.index());
            w.scalar(s);
            w.var_bytes(&proof.to_bytes());
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<EnrolmentShares> {
        let mut r = Reader::new(bytes);
        let n = r.u8()? as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let t = read_triple(&mut r)?;
            let s = r.scalar()?;
            let proof = DerivationProof::from_bytes(r.var_bytes()?)?;
            out.push((t, s, proof));
        }
        r.finish()?;
        Ok(EnrolmentShares(out))
    }
}

#[derive(Clone, Debug)]
pub struct SharePointRequest {
    pub party: String,
    pub kind: ShareKind,
    pub triple: TripleId,
}

#[derive(Clone, Debug)]
pub struct SharePointResponse {
    pub endpoint: GroupElement,
    pub proof: DerivationProof,
}

/// One flow with both addresses encrypted.
#[derive(Clone, Debug)]
pub struct FlowCyphertexts {
    pub src: Cyphertext,
    pub dst: Cyphertext,
    pub ts: u64,
    pub bytes: u64,
    pub packets: u64,
}

#[derive(Clone, Debug)]
pub struct IngestRequest {
    pub rows: Vec<FlowCyphertexts>,
}

#[derive(Clone, Debug)]
pub struct IngestResponse {
    pub accepted: u32,
}

#[derive(Clone, Debug)]
pub struct QueryRequest {
    pub text: String,
    pub args: Vec<Cyphertext>,
}

/// A query result cell: pseudonyms come back encrypted, the rest as numbers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Pseudonym(Cyphertext),
    Num(u64),
}

#[derive(Clone, Debug)]
pub struct QueryResponse {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Clone, Debug)]
pub struct ErrorResponse {
    pub message: String,
}

#[derive(Clone, Debug)]
pub enum Message {
    Transcrypt(TranscryptRequest),
    TranscryptOk(TranscryptResponse),
    Proof(ProofRequest),
    ProofOk(ProofResponse),
    Enrol(EnrolmentRequest),
    EnrolOk(EnrolmentResponse),
    SharePoint(SharePointRequest),
    SharePointOk(SharePointResponse),
    Ingest(IngestRequest),
    IngestOk(IngestResponse),
    Query(QueryRequest),
    QueryOk(QueryResponse),
    Fail(ErrorResponse),
}

fn write_cyphertext(w: &mut Writer, c: &Cyphertext) {
    w.bytes(&c.to_bytes());
}

fn read_cyphertext(r: &mut Reader) -> Result<Cyphertext> {
    Cyphertext::from_bytes(r.take(CYPHERTEXT_BYTES)?.try_into().unwrap())
}

fn read_mode(r: &mut Reader) -> Result<Mode> {
    Mode::from_byte(r.u8()?).ok_or(Error::Encoding("mode byte"))
}

fn read_kind(r: &mut Reader) -> Result<ShareKind> {
    ShareKind::from_byte(r.u8()?).ok_or(Error::Encoding("share kind byte"))
}

fn read_triple(r: &mut Reader) -> Result<TripleId> {
    TripleId::from_index(r.u8()?).ok_or(Error::Encoding("triple byte"))
}

fn write_active(w: &mut Writer, a: &ActiveSet) {
    for p in a.peers() {
        w.u8(p as u8);
    }
}

fn read_active(r: &mut Reader) -> Result<ActiveSet> {
    let mut peers = [PeerId::A; 3];
    for p in &mut peers {
        *p = PeerId::from_index(r.u8()? as usize).ok_or(Error::Encoding("peer byte"))?;
    }
    ActiveSet::new(peers)
}

impl Message {
    pub fn tag(&self) -> u8 {
        match self {
            Message::Transcrypt(_) => TAG_TRANSCRYPT,
            Message::TranscryptOk(_) => TAG_TRANSCRYPT_OK,
            Message::Proof(_) => TAG_PROOF,
            Message::ProofOk(_) => TAG_PROOF_OK,
            Message::Enrol(_) => TAG_ENROL,
            Message::EnrolOk(_) => TAG_ENROL_OK,
            Message::SharePoint(_) => TAG_SHARE_POINT,
            Message::SharePointOk(_) => TAG_SHARE_POINT_OK,
            Message::Ingest(_) => TAG_INGEST,
            Message::IngestOk(_) => TAG_INGEST_OK,
            Message::Query(_) => TAG_QUERY,
            Message::QueryOk(_) => TAG_QUERY_OK,
            Message::Fail(_) => TAG_ERROR,
        }
    }

    fn write_body(&self, w: &mut Writer) {
        match self {
            Message::Transcrypt(m) => {
                w.u8(m.mode.byte());
                w.string(&m.from);
                w.string(&m.to);
                write_active(w, &m.active);
                let permit = m.permit.to_bytes();
                w.var_bytes(&permit);
                w.u32(m.inputs.len() as u32);
                for c in &m.inputs {
                    write_cyphertext(w, c);
                }
                w.u8(m.chain.len() as u8);
                for link in &m.chain {
                    w.u8(link.peer as u8);
                    write_cyphertext(w, &link.output);
                    w.var_bytes(&link.cert.to_bytes());
                }
                w.u16(m.share_proofs.len() as u16);
                for sp in &m.share_proofs {
                    w.string(&sp.party);
                    w.u8(sp.kind.byte());
                    w.u8(sp.triple.index());
                    w.point(&sp.endpoint);
                    w.var_bytes(&sp.proof.to_bytes());
                }
            }
            Message::TranscryptOk(m) => {
                w.u32(m.outputs.len() as u32);
                for c in &m.outputs {
                    write_cyphertext(w, c);
                }
                w.u32(m.tickets.len() as u32);
                for t in &m.tickets {
                    w.var_bytes(t);
                }
            }
            Message::Proof(m) => {
                w.var_bytes(&m.ticket);
                write_cyphertext(w, &m.input);
                write_cyphertext(w, &m.output);
            }
            Message::ProofOk(m) => {
                w.var_bytes(&m.cert.to_bytes());
            }
            Message::Enrol(m) => {
                w.string(&m.party);
            }
            Message::EnrolOk(m) => {
                w.u8(m.tables.len() as u8);
                for (t, k, table) in &m.tables {
                    w.u8(t.index());
                    w.u8(k.byte());
                    w.bytes(&table.to_bytes());
                }
                w.var_bytes(&m.sealed_shares);
            }
            Message::SharePoint(m) => {
                w.string(&m.party);
                w.u8(m.kind.byte());
                w.u8(m.triple.index());
            }
            Message::SharePointOk(m) => {
                w.point(&m.endpoint);
                w.var_bytes(&m.proof.to_bytes());
            }
            Message::Ingest(m) => {
                w.u32(m.rows.len() as u32);
                for row in &m.rows {
                    write_cyphertext(w, &row.src);
                    write_cyphertext(w, &row.dst);
                    w.u64(row.ts);
                    w.u64(row.bytes);
                    w.u64(row.packets);
                }
            }
            Message::IngestOk(m) => {
                w.u32(m.accepted);
            }
            Message::Query(m) => {
                w.string(&m.text);
                w.u16(m.args.len() as u16);
                for c in &m.args {
                    write_cyphertext(w, c);
                }
            }
            Message::QueryOk(m) => {
                w.u16(m.columns.len() as u16);
                for c in &m.columns {
                    w.string(c);
                }
                w.u32(m.rows.len() as u32);
                for row in &m.rows {
                    w.u16(row.len() as u16);
                    for v in row {
                        match v {
                            Value::Pseudonym(c) => {
                                w.u8(0);
                                write_cyphertext(w, c);
                            }
                            Value::Num(n) => {
                                w.u8(1);
                                w.u64(*n);
                            }
                        }
                    }
                }
            }
            Message::Fail(m) => {
                w.string(&m.message);
            }
        }
    }

    fn read_body(tag: u8, r: &mut Reader) -> Result<Message> {
        Ok(match tag {
            TAG_TRANSCRYPT => {
                let mode = read_mode(r)?;
                let from = r.string()?;
                let to = r.string()?;
                let active = read_active(r)?;
                let permit = Permit::from_bytes(r.var_bytes()?)?;
                let n = r.u32()? as usize;
                if n > 100_000 {
                    return Err(Error::Encoding("too many inputs"));
                }
                let mut inputs = Vec::with_capacity(n);
                for _ in 0..n {
                    inputs.push(read_cyphertext(r)?);
                }
                let nchain = r.u8()? as usize;
                let mut chain = Vec::with_capacity(nchain);
                for _ in 0..nchain {
                    let peer =
                        PeerId::from_index(r.u8()? as usize).ok_or(Error::Encoding("peer byte"))?;
                    let output = read_cyphertext(r)?;
                    let cert = RskCertificate::from_bytes(r.var_bytes()?)?;
                    chain.push(ChainLink { peer, output, cert });
                }
                let nsp = r.u16()? as usize;
                let mut share_proofs = Vec::with_capacity(nsp);
                for _ in 0..nsp {
                    let party = r.string()?;
                    let kind = read_kind(r)?;
                    let triple = read_triple(r)?;
                    let endpoint = r.point()?;
                    let proof = DerivationProof::from_bytes(r.var_bytes()?)?;
                    share_proofs.push(ShareProof { party, kind, triple, endpoint, proof });
                }
                Message::Transcrypt(TranscryptRequest {
                    mode,
                    from,
                    to,
                    active,
                    permit,
                    inputs,
                    chain,
                    share_proofs,
                })
            }
            TAG_TRANSCRYPT_OK => {
                let n = r.u32()? as usize;
                if n > 100_000 {
                    return Err(Error::Encoding("too many outputs"));
                }
                let mut outputs = Vec::with_capacity(n);
                for _ in 0..n {
                    outputs.push(read_cyphertext(r)?);
                }
                let nt = r.u32()? as usize;
                if nt > 100_000 {
                    return Err(Error::Encoding("too many tickets"));
                }
                let mut tickets = Vec::with_capacity(nt);
                for _ in 0..nt {
                    tickets.push(r.var_bytes()?.to_vec());
                }
                Message::TranscryptOk(TranscryptResponse { outputs, tickets })
            }
            TAG_PROOF => Message::Proof(ProofRequest {
                ticket: r.var_bytes()?.to_vec(),
                input: read_cyphertext(r)?,
                output: read_cyphertext(r)?,
            }),
            TAG_PROOF_OK => Message::ProofOk(ProofResponse {
                cert: RskCertificate::from_bytes(r.var_bytes()?)?,
            }),
            TAG_ENROL => Message::Enrol(EnrolmentRequest { party: r.string()? }),
            TAG_ENROL_OK => {
                let nt = r.u8()? as usize;
                let mut tables = Vec::with_capacity(nt);
                for _ in 0..nt {
                    let t = read_triple(r)?;
                    let k = read_kind(r)?;
                    let table = PowersTable::from_bytes(r.take(TABLE_BITS * 32)?)?;
                    tables.push((t, k, table));
                }
                let sealed_shares = r.var_bytes()?.to_vec();
                Message::EnrolOk(EnrolmentResponse { tables, sealed_shares })
            }
            TAG_SHARE_POINT => Message::SharePoint(SharePointRequest {
                party: r.string()?,
                kind: read_kind(r)?,
                triple: read_triple(r)?,
            }),
            TAG_SHARE_POINT_OK => Message::SharePointOk(SharePointResponse {
                endpoint: r.point()?,
                proof: DerivationProof::from_bytes(r.var_bytes()?)?,
            }),
            TAG_INGEST => {
                let n = r.u32()? as usize;
                if n > 1_000_000 {
                    return Err(Error::Encoding("too many rows"));
                }
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    rows.push(FlowCyphertexts {
                        src: read_cyphertext(r)?,
                        dst: read_cyphertext(r)?,
                        ts: r.u64()?,
                        bytes: r.u64()?,
                        packets: r.u64()?,
                    });
                }
                Message::Ingest(IngestRequest { rows })
            }
            TAG_INGEST_OK => Message::IngestOk(IngestResponse { accepted: r.u32()? }),
            TAG_QUERY => {
                let text = r.string()?;
                let n = r.u16()? as usize;
                let mut args = Vec::with_capacity(n);
                for _ in 0..n {
                    args.push(read_cyphertext(r)?);
                }
                Message::Query(QueryRequest { text, args })
            }
            TAG_QUERY_OK => {
                let nc = r.u16()? as usize;
                let mut columns = Vec::with_capacity(nc);
                for _ in 0..nc {
                    columns.push(r.string()?);
                }
                let nr = r.u32()? as usize;
                if nr > 1_000_000 {
                    return Err(Error::Encoding("too many rows"));
                }
                let mut rows = Vec::with_capacity(nr);
                for _ in 0..nr {
                    let nv = r.u16()? as usize;
                    let mut row = Vec::with_capacity(nv);
                    for _ in 0..nv {
                        row.push(match r.u8()? {
                            0 => Value::Pseudonym(read_cyphertext(r)?),
                            1 => Value::Num(r.u64()?),
                            _ => return Err(Error::Encoding("value tag")),
                        });
                    }
                    rows.push(row);
                }
                Message::QueryOk(QueryResponse { columns, rows })
            }
            TAG_ERROR => Message::Fail(ErrorResponse { message: r.string()? }),
            _ => return Err(Error::Encoding("unknown tag")),
        })
    }
}

/// Serializes and signs a frame (without the outer length prefix, which the
/// transport adds).
pub fn encode_frame<R: RngCore + CryptoRng>(
    sender: &str,
    key: &AuthSecret,
    msg: &Message,
    rng: &mut R,
) -> Vec<u8> {
    let mut body = Writer::new();
    msg.write_body(&mut body);
    let body = body.into_bytes();
    let tag = msg.tag();
    let sig = key.sign("wire", &[&[tag], &body], rng);

    let mut w = Writer::new();
    w.u8(tag);
    w.string(sender);
    w.bytes(&sig.to_bytes());
    w.bytes(&body);
    w.into_bytes()
}

/// Parses a frame and checks the sender's signature against the roster.
pub fn decode_frame(frame: &[u8], roster: &Roster) -> Result<(String, Message)> {
    if frame.len() > MAX_FRAME {
        return Err(Error::Encoding("frame too large"));
    }
    let mut r = Reader::new(frame);
    let tag = r.u8()?;
    let sender = r.string()?;
    let sig = Signature::from_bytes(r.take(SIGNATURE_BYTES)?.try_into().unwrap())?;
    let body = r.take(r.remaining())?;
    let key = roster.key_of(&sender)?;
    if !key.verify("wire", &[&[tag], body], &sig) {
        return Err(Error::BadSignature(format!("bad signature from {sender:?}")));
    }
    let mut br = Reader::new(body);
    let msg = Message::read_body(tag, &mut br)?;
    br.finish()?;
    Ok((sender, msg))
}

/// Unwraps a response: errors come back as `Error::Remote`.
pub fn expect_ok(sender: String, msg: Message) -> Result<Message> {
    match msg {
        Message::Fail(e) => Err(Error::Remote { from: sender, message: e.message }),
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permits::issue_permit;
    use pep3_group::Scalar;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn roster_with(rng: &mut StdRng, names: &[&str]) -> (Roster, Vec<AuthSecret>) {
        let mut roster = Roster::new();
        let mut keys = Vec::new();
        for n in names {
            let k = AuthSecret::generate(rng);
            roster.register(n, k.public());
            keys.push(k);
        }
        (roster, keys)
    }

    #[test]
    fn frames_roundtrip_and_authenticate() {
        let mut rng = StdRng::seed_from_u64(70);
        let (roster, keys) = roster_with(&mut rng, &["party:mp", "peer:A"]);
        let ca = AuthSecret::generate(&mut rng);
        let mut roster = roster;
        roster.register("authority", ca.public());

        let input = crate::elgamal::encrypt(
            &GroupElement::random(&mut rng),
            &GroupElement::random(&mut rng),
            &Scalar::from_u64(3),
        );
        let permit = issue_permit(
            &ca,
            "mp",
            Mode::Pseudonymise,
            vec!["mp".into()],
            vec!["sf".into()],
            None,
            u64::MAX,
            &mut rng,
        )
        .unwrap();
        let msg = Message::Transcrypt(TranscryptRequest {
            mode: Mode::Pseudonymise,
            from: "mp".into(),
            to: "sf".into(),
            active: ActiveSet::parse("ABC").unwrap(),
            permit,
            inputs: vec![input.clone(), input.clone()],
            chain: vec![],
            share_proofs: vec![],
        });
        let frame = encode_frame("party:mp", &keys[0], &msg, &mut rng);
        let (sender, decoded) = decode_frame(&frame, &roster).unwrap();
        assert_eq!(sender, "party:mp");
        match decoded {
            Message::Transcrypt(m) => {
                assert_eq!(m.mode, Mode::Pseudonymise);
                assert_eq!(m.inputs.len(), 2);
                assert_eq!(m.inputs[0], input);
                assert_eq!(m.active.to_string(), "ABC");
                m.permit.verify(&ca.public()).unwrap();
            }
            other => panic!("wrong message {other:?}"),
        }

        // unknown sender
        let stranger = AuthSecret::generate(&mut rng);
        let frame = encode_frame("party:ghost", &stranger, &msg, &mut rng);
        assert!(matches!(decode_frame(&frame, &roster), Err(Error::BadSignature(_))));
        // claimed identity with the wrong key
        let frame = encode_frame("party:mp", &keys[1], &msg, &mut rng);
        assert!(decode_frame(&frame, &roster).is_err());
        // flipped bytes anywhere kill it
        let frame = encode_frame("party:mp", &keys[0], &msg, &mut rng);
        for i in (0..frame.len()).step_by(101) {
            let mut bad = frame.clone();
            bad[i] ^= 1;
            assert!(decode_frame(&bad, &roster).is_err(), "byte {i}");
        }
    }

    #[test]
    fn every_tag_roundtrips() {
        let mut rng = StdRng::seed_from_u64(71);
        let (roster, keys) = roster_with(&mut rng, &["peer:B"]);
        let c = crate::elgamal::encrypt(
            &GroupElement::random(&mut rng),
            &GroupElement::random(&mut rng),
            &Scalar::from_u64(5),
        );
        let msgs = vec![
            Message::TranscryptOk(TranscryptResponse {
                outputs: vec![c.clone()],
                tickets: vec![vec![1, 2, 3]],
            }),
            Message::Proof(ProofRequest {
                ticket: vec![9; 40],
                input: c.clone(),
                output: c.clone(),
            }),
            Message::Enrol(EnrolmentRequest { party: "sf".into() }),
            Message::EnrolOk(EnrolmentResponse {
                tables: vec![],
                sealed_shares: vec![7; 60],
            }),
            Message::SharePoint(SharePointRequest {
                party: "sf".into(),
                kind: ShareKind::Encryption,
                triple: TripleId::from_index(3).unwrap(),
            }),
            Message::Ingest(IngestRequest {
                rows: vec![FlowCyphertexts {
                    src: c.clone(),
                    dst: c.clone(),
                    ts: 1,
                    bytes: 2,
                    packets: 3,
                }],
            }),
            Message::IngestOk(IngestResponse { accepted: 1 }),
            Message::Query(QueryRequest { text: "select src".into(), args: vec![c.clone()] }),
            Message::QueryOk(QueryResponse {
                columns: vec!["src".into(), "bytes".into()],
                rows: vec![vec![Value::Pseudonym(c.clone()), Value::Num(42)]],
            }),
            Message::Fail(ErrorResponse { message: "nope".into() }),
        ];
        for msg in msgs {
            let frame = encode_frame("peer:B", &keys[0], &msg, &mut rng);
            let (_, decoded) = decode_frame(&frame, &roster).unwrap();
            assert_eq!(decoded.tag(), msg.tag());
            // spot-check one payload deeply
            if let (Message::QueryOk(a), Message::QueryOk(b)) = (&msg, &decoded) {
                assert_eq!(a.columns, b.columns);
                assert_eq!(a.rows, b.rows);
            }
        }
    }
}
