//! The researcher: queries storage by address without ever revealing the
//! address, and reads results in its own pseudonym domain.

use super::{Links, PartyCore};
use crate::elgamal::Cyphertext;
use crate::error::{Error, Result};
use crate::keyshares::ActiveSet;
use crate::lizard::address_to_element;
use crate::permits::Permit;
use crate::proofs::Mode;
use crate::wire::transport::Transport;
use crate::wire::{Message, QueryRequest, Value};

/// A retrieved cell: pseudonyms as hex in the researcher's own domain
/// (stable across queries, unlinkable to storage's domain), numbers as-is.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Retrieved {
    Pseudonym(String),
    Num(u64),
}

impl core::fmt::Display for Retrieved {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Retrieved::Pseudonym(p) => f.write_str(p),
            Retrieved::Num(n) => write!(f, "{n}"),
        }
    }
}

pub struct Researcher {
    pub core: PartyCore,
}

impl Researcher {
    pub fn new(core: PartyCore) -> Researcher {
        Researcher { core }
    }

    /// Runs a query.  `args` are addresses of interest; they travel to the
    /// peers encrypted under the researcher's own key and reach storage
    /// already in storage's pseudonym domain, so neither the peers nor
    /// storage see them in the clear.  Pseudonym cells in the results are
    /// translated home in one batch and decrypted locally.
    pub fn retrieve(
        &self,
        links: &Links,
        sf: &dyn Transport,
        active: &ActiveSet,
        to_storage: &Permit,
        from_storage: &Permit,
        text: &str,
        args: &[[u8; 16]],
    ) -> Result<(Vec<String>, Vec<Vec<Retrieved>>)> {
        let sf_args = if args.is_empty() {
            vec![]
        } else {
            let inputs: Vec<Cyphertext> = args
                .iter()
                .map(|a| self.core.encrypt(&address_to_element(a)))
                .collect();
            self.core.transcrypt(
                links,
                Mode::Pseudonymise,
                &self.core.id,
                "sf",
                active,
                to_storage,
                inputs,
            )?
        };
        let reply = self
            .core
            .call(sf, &Message::Query(QueryRequest { text: text.into(), args: sf_args }))?;
        let Message::QueryOk(ok) = reply else {
            return Err(Error::Protocol("expected query results".into()));
        };

        let mut cells: Vec<Cyphertext> = Vec::new();
        for row in &ok.rows {
            for v in row {
                if let Value::Pseudonym(c) = v {
                    cells.push(*c);
                }
            }
        }
        let translated = if cells.is_empty() {
            vec![]
        } else {
            self.core.transcrypt(
                links,
                Mode::Translate,
                "sf",
                &self.core.id,
                active,
                from_storage,
                cells,
            )?
        };
        let mut it = translated.iter();
        let mut rows = Vec::with_capacity(ok.rows.len());
        for row in &ok.rows {
            let mut out = Vec::with_capacity(row.len());
            for v in row {
                out.push(match v {
                    Value::Num(n) => Retrieved::Num(*n),
                    Value::Pseudonym(_) => {
                        let c = it.next().expect("translated every pseudonym cell");
                        Retrieved::Pseudonym(hex::encode(self.core.decrypt(c)?.encode()))
                    }
                });
            }
            rows.push(out);
        }
        Ok((ok.columns, rows))
    }
}
