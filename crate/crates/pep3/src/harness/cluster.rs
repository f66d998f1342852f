//! Building clusters: from a state directory on disk, or in memory.
//!
//! The on-disk layout, all inside one directory next to `cluster.toml`:
//!
//! ```text
//! authority.key        hex scalar, the permit-signing key
//! peer_A.key ...       hex scalars, one static key per peer
//! peer_A.masters ...   that peer's master shares, sealed under its key
//! party_mp.key ...     hex scalars for mp, sf, researcher, investigator
//! flows.csv            the storage facility's table (appears on first ingest)
//! ```
//!
//! Master shares never leave the machine unencrypted: they are boxed under
//! a key only derivable from the owning peer's secret scalar.  This is
//! single-host hygiene, not a distribution mechanism — a real deployment
//! would hand each peer directory to a different operator.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::{fs, io};

use pep3_group::Scalar;
use rand::rngs::StdRng;
use rand::{CryptoRng, RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::auth::AuthSecret;
use crate::error::{Error, Result};
use crate::harness::config::{ClusterConfig, TransportKind};
use crate::keyshares::{run_setup, MasterSecrets, PeerId, SetupTamper};
use crate::parties::sf::StorageFacility;
use crate::parties::{EnrolmentReport, Links, PartyCore};
use crate::peer::{PeerNode, PeerTamper};
use crate::sealing;
use crate::wire::transport::{serve, LocalTransport, TcpTransport, Transport};
use crate::wire::Roster;

pub const PARTY_NAMES: [&str; 4] = ["mp", "sf", "researcher", "investigator"];

/// File access within one cluster directory.
pub struct StateDir(pub PathBuf);

impl StateDir {
    fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write_key(&self, name: &str, key: &AuthSecret) -> Result<()> {
        let path = self.file(&format!("{name}.key"));
        fs::write(path, hex::encode(key.to_scalar().to_bytes()))?;
        Ok(())
    }

    pub fn read_key(&self, name: &str) -> Result<AuthSecret> {
        let path = self.file(&format!("{name}.key"));
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let bytes = hex::decode(text.trim())
            .map_err(|e| Error::Config(format!("{name}.key: {e}")))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::Config(format!("{name}.key is not 32 bytes")))?;
        let scalar = Scalar::from_canonical_bytes(&arr)
            .ok_or_else(|| Error::Config(format!("{name}.key is not a valid key")))?;
        AuthSecret::from_scalar(scalar)
    }

    fn masters_box_key(auth: &AuthSecret) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"pep3.state.masters");
        h.update(auth.to_scalar().to_bytes());
        h.finalize().into()
    }

    fn write_masters<R: RngCore + CryptoRng>(
        &self,
        masters: &MasterSecrets,
        auth: &AuthSecret,
        rng: &mut R,
    ) -> Result<()> {
        let sealed = sealing::seal(&Self::masters_box_key(auth), &masters.to_bytes(), rng);
        fs::write(self.file(&format!("peer_{}.masters", masters.id)), sealed)?;
        Ok(())
    }

    fn read_masters(&self, peer: PeerId, auth: &AuthSecret) -> Result<MasterSecrets> {
        let path = self.file(&format!("peer_{peer}.masters"));
        let sealed =
            fs::read(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let plain = sealing::open(&Self::masters_box_key(auth), &sealed).ok_or_else(|| {
            Error::Config(format!("master shares for peer {peer} do not open"))
        })?;
        MasterSecrets::from_bytes(&plain)
    }

    pub fn flow_store(&self) -> PathBuf {
        self.file("flows.csv")
    }
}

/// Runs the key-share exchange and writes a complete cluster directory.
/// With `sabotage` the exchange aborts and nothing lands on disk.
pub fn setup_state<R: RngCore + CryptoRng>(
    dir: &Path,
    config: &ClusterConfig,
    rng: &mut R,
    sabotage: Option<SetupTamper>,
) -> Result<()> {
    config.validate()?;
    let all_masters = run_setup(rng, sabotage)?;
    fs::create_dir_all(dir)?;
    let state = StateDir(dir.to_path_buf());
    state.write_key("authority", &AuthSecret::generate(rng))?;
    for masters in &all_masters {
        let auth = AuthSecret::generate(rng);
        state.write_key(&format!("peer_{}", masters.id), &auth)?;
        state.write_masters(masters, &auth, rng)?;
    }
    for party in PARTY_NAMES {
        state.write_key(&format!("party_{party}"), &AuthSecret::generate(rng))?;
    }
    config.save(&dir.join("cluster.toml"))?;
    Ok(())
}

/// A cluster wired up from a state directory.  In local mode the peers run
/// in-process; in tcp mode `links` dials the configured addresses and the
/// in-process peers are only used by `serve`.
pub struct Cluster {
    pub config: ClusterConfig,
    pub roster: Roster,
    pub state: StateDir,
    pub peers: Vec<Arc<PeerNode>>,
    pub links: Links,
}

impl Cluster {
    pub fn open(config: ClusterConfig) -> Result<Cluster> {
        Cluster::open_with(config, &[])
    }

    /// As `open`, with scripted peer misbehaviour for experiments.
    pub fn open_with(config: ClusterConfig, tamper: &[(PeerId, PeerTamper)]) -> Result<Cluster> {
        let state = StateDir(config.state_dir.clone());
        let roster = Cluster::read_roster(&state)?;
        let mut peers = Vec::new();
        let mut links: Links = BTreeMap::new();
        for id in PeerId::ALL {
            let auth = state.read_key(&format!("peer_{id}"))?;
            let masters = state.read_masters(id, &auth)?;
            let mut node = PeerNode::new(masters, auth, roster.clone());
            node.tamper = tamper.iter().find(|(p, _)| *p == id).map(|(_, t)| *t);
            peers.push(Arc::new(node));
        }
        for node in &peers {
            let link: Arc<dyn Transport> = match config.transport {
                TransportKind::Local => Arc::new(LocalTransport(node.clone())),
                TransportKind::Tcp => Arc::new(TcpTransport {
                    addr: config.addresses[&node.id().letter().to_string()].clone(),
                }),
            };
            links.insert(node.id(), link);
        }
        Ok(Cluster { config, roster, state, peers, links })
    }

    fn read_roster(state: &StateDir) -> Result<Roster> {
        let mut roster = Roster::new();
        roster.register("authority", state.read_key("authority")?.public());
        for id in PeerId::ALL {
            let key = state.read_key(&format!("peer_{id}"))?;
            roster.register(&format!("peer:{id}"), key.public());
        }
        for party in PARTY_NAMES {
            let key = state.read_key(&format!("party_{party}"))?;
            roster.register(&format!("party:{party}"), key.public());
        }
        Ok(roster)
    }

    /// The permit-signing key.  Only the setup operator's host has it; in
    /// this single-directory demo every command can play the authority.
    pub fn authority(&self) -> Result<AuthSecret> {
        self.state.read_key("authority")
    }

    /// Enrols a party against the cluster's peers.
    pub fn enrol(&self, party: &str, seed: u64) -> Result<(PartyCore, EnrolmentReport)> {
        let auth = self.state.read_key(&format!("party_{party}"))?;
        PartyCore::enrol(
            party,
            auth,
            self.roster.clone(),
            self.config.sampling,
            &self.links,
            seed,
        )
    }

    /// The storage facility node, backed by the on-disk flow table.
    pub fn storage(&self, seed: u64) -> Result<Arc<StorageFacility>> {
        let (core, _) = self.enrol("sf", seed)?;
        Ok(Arc::new(StorageFacility::new(core, Some(self.state.flow_store()))?))
    }

    /// How commands reach the storage facility.
    pub fn storage_link(&self, sf: Option<Arc<StorageFacility>>) -> Result<Arc<dyn Transport>> {
        match self.config.transport {
            TransportKind::Local => {
                let sf = sf.ok_or_else(|| {
                    Error::Config("local transport needs an in-process storage node".into())
                })?;
                Ok(Arc::new(LocalTransport(sf)))
            }
            TransportKind::Tcp => Ok(Arc::new(TcpTransport {
                addr: self.config.addresses["sf"].clone(),
            })),
        }
    }

    /// Binds every configured address and serves until the process exits.
    /// Peers come up before storage so that the storage node can enrol.
    pub fn serve(&self, seed: u64) -> Result<Vec<JoinHandle<()>>> {
        if self.config.transport != TransportKind::Tcp {
            return Err(Error::Config("serving needs transport = \"tcp\"".into()));
        }
        let mut handles = Vec::new();
        for node in &self.peers {
            let addr = &self.config.addresses[&node.id().letter().to_string()];
            handles.push(serve(bind(addr)?, node.clone()));
        }
        let sf = self.storage(seed)?;
        handles.push(serve(bind(&self.config.addresses["sf"])?, sf));
        Ok(handles)
    }
}

fn bind(addr: &str) -> Result<TcpListener> {
    TcpListener::bind(addr)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("bind {addr}: {e}"))))
}

/// A throwaway cluster with no disk behind it, for experiments and tests.
pub struct MemoryCluster {
    pub peers: Vec<Arc<PeerNode>>,
    pub links: Links,
    pub roster: Roster,
    pub authority: AuthSecret,
    party_keys: BTreeMap<String, AuthSecret>,
}

impl MemoryCluster {
    pub fn new(seed: u64, tamper: &[(PeerId, PeerTamper)]) -> MemoryCluster {
        let mut rng = StdRng::seed_from_u64(seed);
        let all_masters = run_setup(&mut rng, None).expect("honest setup cannot abort");
        let authority = AuthSecret::generate(&mut rng);
        let peer_keys: Vec<AuthSecret> =
            (0..5).map(|_| AuthSecret::generate(&mut rng)).collect();
        let party_keys: BTreeMap<String, AuthSecret> = PARTY_NAMES
            .iter()
            .map(|p| (p.to_string(), AuthSecret::generate(&mut rng)))
            .collect();

        let mut roster = Roster::new();
        roster.register("authority", authority.public());
        for (i, key) in peer_keys.iter().enumerate() {
            roster.register(&format!("peer:{}", PeerId::ALL[i]), key.public());
        }
        for (party, key) in &party_keys {
            roster.register(&format!("party:{party}"), key.public());
        }

        let mut peers = Vec::new();
        let mut links: Links = BTreeMap::new();
        for (masters, auth) in all_masters.into_iter().zip(peer_keys) {
            let id = masters.id;
            let mut node = PeerNode::new(masters, auth, roster.clone());
            node.tamper = tamper.iter().find(|(p, _)| *p == id).map(|(_, t)| *t);
            let node = Arc::new(node);
            links.insert(id, Arc::new(LocalTransport(node.clone())) as Arc<dyn Transport>);
            peers.push(node);
        }
        MemoryCluster { peers, links, roster, authority, party_keys }
    }

    pub fn enrol(
        &self,
        party: &str,
        sampling: f64,
        seed: u64,
    ) -> Result<(PartyCore, EnrolmentReport)> {
        self.enrol_over(party, sampling, seed, &self.links)
    }

    /// Enrols through caller-supplied links (e.g. TCP ones) instead of the
    /// built-in in-process dispatch.
    pub fn enrol_over(
        &self,
        party: &str,
        sampling: f64,
        seed: u64,
        links: &Links,
    ) -> Result<(PartyCore, EnrolmentReport)> {
        PartyCore::enrol(
            party,
            self.party_keys[party].clone(),
            self.roster.clone(),
            sampling,
            links,
            seed,
        )
    }
}
