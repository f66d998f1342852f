//! The investigator: turns one warranted pseudonym back into an address.

use super::{Links, PartyCore};
use crate::elgamal::Cyphertext;
use crate::error::Result;
use crate::keyshares::ActiveSet;
use crate::lizard::element_to_address;
use crate::permits::Permit;
use crate::proofs::Mode;

pub struct Investigator {
    pub core: PartyCore,
}

impl Investigator {
    pub fn new(core: PartyCore) -> Investigator {
        Investigator { core }
    }

    /// Walks the audited chain for one warranted cyphertext and recovers
    /// the address.  Warrants always audit: every hop must produce a
    /// certificate that verifies, whatever the sampling rate says.
    pub fn depseudonymise(
        &self,
        links: &Links,
        active: &ActiveSet,
        from: &str,
        warrant: &Permit,
        c: &Cyphertext,
    ) -> Result<[u8; 16]> {
        let out = self.core.transcrypt(
            links,
            Mode::Depseudonymise,
            from,
            &self.core.id,
            active,
            warrant,
            vec![*c],
        )?;
        element_to_address(&self.core.decrypt(&out[0])?)
    }
}
