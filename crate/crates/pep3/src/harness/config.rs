//! The cluster configuration file.
//!
//! A cluster lives in one directory: `cluster.toml` plus the key and share
//! files written at setup.  The config carries everything a process needs
//! to find the other nodes; key material stays in the sibling files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keyshares::ActiveSet;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    /// Everything in one process; peers are plain structs behind a vtable.
    Local,
    /// Peers and storage listen on TCP sockets.
    Tcp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// The three peers serving transcryptions, e.g. "ACD".
    pub active: String,
    /// Fraction of hops a party backs with a certificate check.
    pub sampling: f64,
    pub transport: TransportKind,
    /// node name → host:port; needed for tcp only.  Nodes are the peer
    /// letters A–E plus "sf".
    #[serde(default)]
    pub addresses: BTreeMap<String, String>,
    /// Directory holding the key files and the flow store.  Derived from
    /// the config file's own location, never written into the file.
    #[serde(skip)]
    pub state_dir: PathBuf,
}

pub const NODE_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "sf"];

impl ClusterConfig {
    pub fn load(path: &Path) -> Result<ClusterConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ClusterConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.state_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("unserialisable config: {e}")))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.active_set()?;
        if !(0.0..=1.0).contains(&self.sampling) {
            return Err(Error::Config(format!(
                "sampling rate {} outside [0, 1]",
                self.sampling
            )));
        }
        if self.transport == TransportKind::Tcp {
            for node in NODE_NAMES {
                if !self.addresses.contains_key(node) {
                    return Err(Error::Config(format!(
                        "tcp transport needs an address for node {node}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn active_set(&self) -> Result<ActiveSet> {
        ActiveSet::parse(&self.active)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cluster.toml");
        let cfg = ClusterConfig {
            active: "BDE".into(),
            sampling: 0.25,
            transport: TransportKind::Local,
            addresses: BTreeMap::new(),
            state_dir: PathBuf::new(),
        };
        cfg.save(&path).unwrap();
        let back = ClusterConfig::load(&path).unwrap();
        assert_eq!(back.active, "BDE");
        assert_eq!(back.sampling, 0.25);
        assert_eq!(back.transport, TransportKind::Local);
        assert_eq!(back.state_dir, dir.path());
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = ClusterConfig {
            active: "ABC".into(),
            sampling: 0.5,
            transport: TransportKind::Local,
            addresses: BTreeMap::new(),
            state_dir: PathBuf::new(),
        };
        cfg.sampling = 1.5;
        assert!(cfg.validate().is_err());
        cfg.sampling = 0.5;
        cfg.active = "ABF".into();
        assert!(cfg.validate().is_err());
        cfg.active = "ABC".into();
        cfg.transport = TransportKind::Tcp;
        assert!(cfg.validate().is_err(), "tcp without addresses");
    }
}
