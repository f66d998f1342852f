//! The metering point: sees flows with addresses in the clear, ships them
//! to storage with both addresses pseudonymised.

use std::num::NonZeroUsize;
use std::sync::Mutex;

use lru::LruCache;

use super::{Links, PartyCore};
use crate::elgamal::Cyphertext;
use crate::error::{Error, Result};
use crate::keyshares::ActiveSet;
use crate::lizard::address_to_element;
use crate::permits::Permit;
use crate::proofs::Mode;
use crate::wire::transport::Transport;
use crate::wire::{FlowCyphertexts, IngestRequest, Message};

/// One observed flow, addresses still in the clear.
#[derive(Clone, Copy, Debug)]
pub struct Flow {
    pub src: [u8; 16],
    pub dst: [u8; 16],
    pub ts: u64,
    pub bytes: u64,
    pub packets: u64,
}

pub struct MeteringPoint {
    pub core: PartyCore,
    /// address → its storage-domain cyphertext; repeat addresses skip the
    /// peers entirely.
    cache: Mutex<LruCache<[u8; 16], Cyphertext>>,
}

impl MeteringPoint {
    pub fn new(core: PartyCore) -> MeteringPoint {
        MeteringPoint {
            core,
            cache: Mutex::new(LruCache::new(NonZeroUsize::new(1 << 16).unwrap())),
        }
    }

    /// Pseudonymises every address in the batch — through the peers for
    /// addresses not seen recently — and stores the rows.  Returns how many
    /// rows storage accepted.
    pub fn ingest(
        &self,
        links: &Links,
        sf: &dyn Transport,
        active: &ActiveSet,
        permit: &Permit,
        flows: &[Flow],
    ) -> Result<u32> {
        let mut fresh: Vec<[u8; 16]> = Vec::new();
        {
            let mut cache = self.cache.lock().unwrap();
            for f in flows {
                for a in [f.src, f.dst] {
                    if cache.get(&a).is_none() && !fresh.contains(&a) {
                        fresh.push(a);
                    }
                }
            }
        }
        if !fresh.is_empty() {
            let inputs: Vec<Cyphertext> = fresh
                .iter()
                .map(|a| self.core.encrypt(&address_to_element(a)))
                .collect();
            let outputs = self.core.transcrypt(
                links,
                Mode::Pseudonymise,
                &self.core.id,
                "sf",
                active,
                permit,
                inputs,
            )?;
            let mut cache = self.cache.lock().unwrap();
            for (a, c) in fresh.iter().zip(outputs) {
                cache.put(*a, c);
            }
        }
        // Re-blind per row so repeats are not byte-identical on the wire.
        let rows: Vec<FlowCyphertexts> = {
            let mut cache = self.cache.lock().unwrap();
            flows
                .iter()
                .map(|f| FlowCyphertexts {
                    src: self.core.refresh(cache.get(&f.src).expect("just cached")),
                    dst: self.core.refresh(cache.get(&f.dst).expect("just cached")),
                    ts: f.ts,
                    bytes: f.bytes,
                    packets: f.packets,
                })
                .collect()
        };
        match self.core.call(sf, &Message::Ingest(IngestRequest { rows }))? {
            Message::IngestOk(ok) => Ok(ok.accepted),
            _ => Err(Error::Protocol("expected an ingest acknowledgement".into())),
        }
    }
}
