//! The one-time key-share generation exchange.
//!
//! No trusted dealer: each pair of peers derives pair secrets from a DH
//! exchange, the third member of each triple receives its missing pair
//! secret from both holders, and the triple's master share is the product of
//! the three pair secrets.  Every value a peer must take on faith arrives in
//! more than one independent copy; any disagreement aborts the whole run,
//! because a mismatch means a peer is lying and nothing derived afterwards
//! could be trusted.

use std::collections::BTreeMap;

use pep3_group::{hash, GroupElement, Scalar};
use rand::{CryptoRng, RngCore};

use super::{MasterSecrets, PeerId, PowersTable, ShareKind, TripleId};
use crate::error::{Error, Result};

/// Scripted misbehaviour for exercising the abort paths.
#[derive(Clone, Copy, Debug)]
pub enum SetupTamper {
    /// `by` sends the third member of `triple` a wrong copy of a pair secret.
    PairSecretCopy {
        by: PeerId,
        triple: TripleId,
        kind: ShareKind,
    },
    /// `by` broadcasts a corrupted public powers table for `triple`.
    TableBroadcast {
        by: PeerId,
        triple: TripleId,
        kind: ShareKind,
    },
}

fn pair_secret(shared: &GroupElement, triple: TripleId, kind: ShareKind, x: PeerId, y: PeerId) -> Scalar {
    let enc = shared.encode();
    for counter in 0u8..=255 {
        let s = hash::hash_to_scalar(
            "pep3.setup.pair",
            &[
                &[counter],
                &enc,
                &[triple.index()],
                &[kind.byte()],
                &[x as u8, y as u8],
            ],
        );
        if !s.is_zero() {
            return s;
        }
    }
    unreachable!("256 consecutive zero hashes");
}

/// Runs the full exchange for all five peers, returning each peer's secret
/// state.  `tamper` injects one scripted corruption; honest peers then abort
/// with `Error::SetupMismatch`.
pub fn run_setup<R: RngCore + CryptoRng>(
    rng: &mut R,
    tamper: Option<SetupTamper>,
) -> Result<Vec<MasterSecrets>> {
    // round 1: ephemeral DH keys, publics broadcast
    let dh_secrets: Vec<Scalar> = (0..5).map(|_| Scalar::random_nonzero(rng)).collect();
    let dh_publics: Vec<GroupElement> =
        dh_secrets.iter().map(GroupElement::base_mul).collect();

    // round 2 (local): each member of a pair derives the same pair secrets
    // from the DH shared point; q[(t, kind, x, y)] with x < y
    let mut pair_secrets: BTreeMap<(TripleId, ShareKind, PeerId, PeerId), Scalar> =
        BTreeMap::new();
    for t in TripleId::all() {
        let m = t.members();
        for (ai, bi) in [(0, 1), (0, 2), (1, 2)] {
            let (x, y) = if m[ai] < m[bi] { (m[ai], m[bi]) } else { (m[bi], m[ai]) };
            // both endpoints compute this identically: x's secret with y's
            // public equals y's secret with x's public
            let shared_x = dh_publics[y.index()].mul(&dh_secrets[x.index()]);
            let shared_y = dh_publics[x.index()].mul(&dh_secrets[y.index()]);
            debug_assert_eq!(shared_x, shared_y);
            for kind in ShareKind::BOTH {
                pair_secrets.insert((t, kind, x, y), pair_secret(&shared_x, t, kind, x, y));
            }
        }
    }

    // round 3: the member outside each pair receives the pair secret from
    // both holders and aborts on disagreement
    for t in TripleId::all() {
        let m = t.members();
        for (ai, bi, ci) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let (x, y) = if m[ai] < m[bi] { (m[ai], m[bi]) } else { (m[bi], m[ai]) };
            let third = m[ci];
            for kind in ShareKind::BOTH {
                let honest = pair_secrets[&(t, kind, x, y)];
                let corrupt = |sender: PeerId| -> Scalar {
                    match tamper {
                        Some(SetupTamper::PairSecretCopy { by, triple, kind: k })
                            if by == sender && triple == t && k == kind =>
                        {
                            honest.add(&Scalar::ONE)
                        }
                        _ => honest,
                    }
                };
                let copy_from_x = corrupt(x);
                let copy_from_y = corrupt(y);
                if copy_from_x != copy_from_y {
                    return Err(Error::SetupMismatch(format!(
                        "peer {third} received differing copies of the {kind} pair \
                         secret for triple {t} from peers {x} and {y}"
                    )));
                }
            }
        }
    }

    // round 4 (local): master shares as products of the three pair secrets
    let mut masters: BTreeMap<(TripleId, ShareKind), Scalar> = BTreeMap::new();
    for t in TripleId::all() {
        let m = t.members();
        for kind in ShareKind::BOTH {
            let mut acc = Scalar::ONE;
            for (ai, bi) in [(0, 1), (0, 2), (1, 2)] {
                let (x, y) = if m[ai] < m[bi] { (m[ai], m[bi]) } else { (m[bi], m[ai]) };
                acc = acc.mul(&pair_secrets[&(t, kind, x, y)]);
            }
            masters.insert((t, kind), acc);
        }
    }

    // round 5: every member broadcasts the public powers table for each of
    // its shares; all five peers compare the three copies byte for byte
    let mut agreed_tables: BTreeMap<(TripleId, ShareKind), PowersTable> = BTreeMap::new();
    for t in TripleId::all() {
        for kind in ShareKind::BOTH {
            let honest = PowersTable::build(&masters[&(t, kind)]);
            let honest_bytes = honest.to_bytes();
            let mut copies: Vec<(PeerId, Vec<u8>)> = Vec::new();
            for sender in t.members() {
                let bytes = match tamper {
                    Some(SetupTamper::TableBroadcast { by, triple, kind: k })
                        if by == sender && triple == t && k == kind =>
                    {
                        let mut b = honest_bytes.clone();
                        let bad = GroupElement::decode(b[0..32].try_into().unwrap())
                            .unwrap()
                            .add(&GroupElement::BASE);
                        b[0..32].copy_from_slice(&bad.encode());
                        b
                    }
                    _ => honest_bytes.clone(),
                };
                copies.push((sender, bytes));
            }
            let disagreeing: Vec<PeerId> = copies
                .iter()
                .filter(|(_, b)| *b != copies[0].1)
                .map(|(p, _)| *p)
                .collect();
            if !disagreeing.is_empty() {
                // two of three agree; the odd one out is named
                let mut counts: BTreeMap<&[u8], Vec<PeerId>> = BTreeMap::new();
                for (p, b) in &copies {
                    counts.entry(b.as_slice()).or_default().push(*p);
                }
                let liars: Vec<String> = counts
                    .values()
                    .filter(|v| v.len() == 1)
                    .map(|v| v[0].to_string())
                    .collect();
                return Err(Error::SetupMismatch(format!(
                    "differing public powers tables for {kind} share of triple {t} \
                     (odd copies from: {})",
                    liars.join(", ")
                )));
            }
            agreed_tables.insert((t, kind), honest);
        }
    }

    // assemble per-peer secret state
    let mut out = Vec::with_capacity(5);
    for peer in PeerId::ALL {
        let shares: BTreeMap<(TripleId, ShareKind), Scalar> = masters
            .iter()
            .filter(|((t, _), _)| t.contains(peer))
            .map(|(k, v)| (*k, *v))
            .collect();
        let mut ticket_key = [0u8; 32];
        rng.fill_bytes(&mut ticket_key);
        out.push(MasterSecrets::new(
            peer,
            shares,
            agreed_tables.clone(),
            ticket_key,
        ));
    }
    Ok(out)
}
