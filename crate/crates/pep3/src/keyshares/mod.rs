//! Peer identities, the ten key-share triples, and the rule that assigns
//! shares to an active subset of peers.
//!
//! Master secrets exist only as ten multiplicative shares, one per triple of
//! peers; every share is held by exactly three peers and any three active
//! peers jointly cover all ten.  The canonical triple order below, together
//! with the first-eligible-peer rule, makes share assignment a pure function
//! of the active set, so independent parties always agree on it.

mod masters;
mod setup;

pub use masters::{
    derive_share, hash_party_id, MasterSecrets, PowersTable, ShareKind, TABLE_BITS,
};
pub use setup::{run_setup, SetupTamper};

use crate::error::{Error, Result};

/// One of the five transcryptor peers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PeerId {
    A,
    B,
    C,
    D,
    E,
}

impl PeerId {
    pub const ALL: [PeerId; 5] = [PeerId::A, PeerId::B, PeerId::C, PeerId::D, PeerId::E];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<PeerId> {
        PeerId::ALL.get(i).copied()
    }

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn from_letter(c: char) -> Option<PeerId> {
        match c.to_ascii_uppercase() {
            'A' => Some(PeerId::A),
            'B' => Some(PeerId::B),
            'C' => Some(PeerId::C),
            'D' => Some(PeerId::D),
            'E' => Some(PeerId::E),
            _ => None,
        }
    }

    /// The wire/roster node id, e.g. "peer:A".
    pub fn node_id(self) -> String {
        format!("peer:{}", self.letter())
    }
}

impl core::fmt::Display for PeerId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The canonical enumeration of the ten triples.
const TRIPLES: [[PeerId; 3]; 10] = {
    use PeerId::*;
    [
        [A, B, E],
        [A, B, C],
        [B, C, D],
        [C, D, E],
        [A, D, E],
        [A, C, D],
        [B, D, E],
        [A, C, E],
        [A, B, D],
        [B, C, E],
    ]
};

/// An unordered triple of peers, identifying one key share.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TripleId(u8);

impl TripleId {
    pub const COUNT: usize = 10;

    pub fn all() -> impl Iterator<Item = TripleId> {
        (0..Self::COUNT as u8).map(TripleId)
    }

    pub fn from_index(i: u8) -> Option<TripleId> {
        (i < Self::COUNT as u8).then_some(TripleId(i))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn members(self) -> [PeerId; 3] {
        TRIPLES[self.0 as usize]
    }

    pub fn contains(self, peer: PeerId) -> bool {
        self.members().contains(&peer)
    }

    pub fn name(self) -> String {
        self.members().iter().map(|p| p.letter()).collect()
    }

    pub fn from_name(name: &str) -> Option<TripleId> {
        let mut members: Vec<PeerId> = name.chars().map(PeerId::from_letter).collect::<Option<_>>()?;
        members.sort();
        members.dedup();
        if members.len() != 3 {
            return None;
        }
        TripleId::all().find(|t| {
            let mut m = t.members();
            m.sort();
            m == members[..]
        })
    }
}

impl core::fmt::Display for TripleId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Three currently-active peers; the unit a transcryption runs through.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ActiveSet([PeerId; 3]);

impl ActiveSet {
    pub fn new(mut peers: [PeerId; 3]) -> Result<ActiveSet> {
        peers.sort();
        if peers[0] == peers[1] || peers[1] == peers[2] {
            return Err(Error::Config("active set needs three distinct peers".into()));
        }
        Ok(ActiveSet(peers))
    }

    pub fn parse(s: &str) -> Result<ActiveSet> {
        let peers: Vec<PeerId> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                PeerId::from_letter(c)
                    .ok_or_else(|| Error::Config(format!("unknown peer letter {c:?}")))
            })
            .collect::<Result<_>>()?;
        let arr: [PeerId; 3] = peers
            .try_into()
            .map_err(|_| Error::Config(format!("active set {s:?} must name three peers")))?;
        ActiveSet::new(arr)
    }

    pub fn peers(&self) -> [PeerId; 3] {
        self.0
    }

    pub fn contains(&self, p: PeerId) -> bool {
        self.0.contains(&p)
    }

    /// All C(5,3) = 10 possible active sets.
    pub fn all() -> Vec<ActiveSet> {
        let mut out = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                for k in (j + 1)..5 {
                    out.push(ActiveSet([PeerId::ALL[i], PeerId::ALL[j], PeerId::ALL[k]]));
                }
            }
        }
        out
    }
}

impl core::fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}{}{}", self.0[0], self.0[1], self.0[2])
    }
}

/// Assigns every share to one active peer: the first peer in letter order
/// that is both active and a member of the share's triple.  Every triple has
/// three members and only two peers are inactive, so the assignment is total.
pub fn partition(active: &ActiveSet) -> [(TripleId, PeerId); 10] {
    let mut out = [(TripleId(0), PeerId::A); 10];
    for (i, t) in TripleId::all().enumerate() {
        let assignee = PeerId::ALL
            .into_iter()
            .find(|p| active.contains(*p) && t.contains(*p))
            .expect("every triple intersects every active set");
        out[i] = (t, assignee);
    }
    out
}

/// The shares `peer` works through when `active` is the active set, in
/// canonical triple order.
pub fn assigned_shares(active: &ActiveSet, peer: PeerId) -> Vec<TripleId> {
    partition(active)
        .into_iter()
        .filter(|(_, p)| *p == peer)
        .map(|(t, _)| t)
        .collect()
}
