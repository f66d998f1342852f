//! Permits: signed authorisations peers check before transcrypting.
//!
//! A permit names a subject (the party allowed to ask), a mode, the domains
//! it may move data between, and an expiry.  Depseudonymisation permits are
//! warrants: they additionally pin the exact cyphertext they cover, so one
//! cannot be reused against other data.

use std::time::{SystemTime, UNIX_EPOCH};

use rand::{CryptoRng, RngCore};

use crate::auth::{AuthPublic, AuthSecret, Signature, SIGNATURE_BYTES};
use crate::codec::{Reader, Writer};
use crate::elgamal::{Cyphertext, CYPHERTEXT_BYTES};
use crate::error::{Error, Result};
use crate::proofs::Mode;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permit {
    pub subject: String,
    pub mode: Mode,
    pub from: Vec<String>,
    pub to: Vec<String>,
    /// The one cyphertext a depseudonymisation warrant covers.
    pub bound: Option<Cyphertext>,
    pub expires_unix: u64,
    signature: Signature,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock before epoch")
        .as_secs()
}

fn signable(
    subject: &str,
    mode: Mode,
    from: &[String],
    to: &[String],
    bound: &Option<Cyphertext>,
    expires_unix: u64,
) -> Vec<u8> {
    let mut w = Writer::new();
    w.string(subject);
    w.u8(mode.byte());
    w.u16(from.len() as u16);
    for d in from {
        w.string(d);
    }
    w.u16(to.len() as u16);
    for d in to {
        w.string(d);
    }
    match bound {
        None => w.u8(0),
        Some(c) => {
            w.u8(1);
            w.bytes(&c.to_bytes());
        }
    }
    w.u64(expires_unix);
    w.into_bytes()
}

/// Signs a permit.  Depseudonymisation requires a bound cyphertext.
#[allow(clippy::too_many_arguments)]
pub fn issue_permit<R: RngCore + CryptoRng>(
    authority: &AuthSecret,
    subject: &str,
    mode: Mode,
    from: Vec<String>,
    to: Vec<String>,
    bound: Option<Cyphertext>,
    expires_unix: u64,
    rng: &mut R,
) -> Result<Permit> {
    if mode == Mode::Depseudonymise && bound.is_none() {
        return Err(Error::PermitRejected("depseudonymisation requires a bound cyphertext"));
    }
    let body = signable(subject, mode, &from, &to, &bound, expires_unix);
    let signature = authority.sign("permit", &[&body], rng);
    Ok(Permit {
        subject: subject.into(),
        mode,
        from,
        to,
        bound,
        expires_unix,
        signature,
    })
}

impl Permit {
    /// Checks the authority's signature.
    pub fn verify(&self, authority: &AuthPublic) -> Result<()> {
        let body = signable(
            &self.subject,
            self.mode,
            &self.from,
            &self.to,
            &self.bound,
            self.expires_unix,
        );
        if !authority.verify("permit", &[&body], &self.signature) {
            return Err(Error::PermitRejected("bad authority signature"));
        }
        if self.mode == Mode::Depseudonymise && self.bound.is_none() {
            return Err(Error::PermitRejected("unbound depseudonymisation permit"));
        }
        Ok(())
    }

    /// Checks the permit covers this concrete request.  `input` is the
    /// cyphertext the whole transcryption started from.
    pub fn authorises(
        &self,
        subject: &str,
        mode: Mode,
        from: &str,
        to: &str,
        input: &Cyphertext,
        now: u64,
    ) -> Result<()> {
        let ok = self.subject == subject
            && self.mode == mode
            && self.from.iter().any(|d| d == from)
            && self.to.iter().any(|d| d == to)
            && now < self.expires_unix
            && match (&self.bound, mode) {
                (Some(b), _) => b == input,
                (None, Mode::Depseudonymise) => false,
                (None, _) => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::PermitRejected("permit does not cover this request"))
        }
    }

    pub fn write(&self, w: &mut Writer) {
        w.string(&self.subject);
        w.u8(self.mode.byte());
        w.u16(self.from.len() as u16);
        for d in &self.from {
            w.string(d);
        }
        w.u16(self.to.len() as u16);
        for d in &self.to {
            w.string(d);
        }
        match &self.bound {
            None => w.u8(0),
            Some(c) => {
                w.u8(1);
                w.bytes(&c.to_bytes());
            }
        }
        w.u64(self.expires_unix);
        w.bytes(&self.signature.to_bytes());
    }

    pub fn read(r: &mut Reader) -> Result<Permit> {
        let subject = r.string()?;
        let mode = Mode::from_byte(r.u8()?).ok_or(Error::Encoding("permit mode"))?;
        let nfrom = r.u16()? as usize;
        let mut from = Vec::with_capacity(nfrom);
        for _ in 0..nfrom {
            from.push(r.string()?);
        }
        let nto = r.u16()? as usize;
        let mut to = Vec::with_capacity(nto);
        for _ in 0..nto {
            to.push(r.string()?);
        }
        let bound = match r.u8()? {
            0 => None,
            1 => Some(Cyphertext::from_bytes(r.take(CYPHERTEXT_BYTES)?.try_into().unwrap())?),
            _ => return Err(Error::Encoding("permit bound flag")),
        };
        let expires_unix = r.u64()?;
        let signature =
            Signature::from_bytes(r.take(SIGNATURE_BYTES)?.try_into().unwrap())?;
        Ok(Permit { subject, mode, from, to, bound, expires_unix, signature })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Permit> {
        let mut r = Reader::new(bytes);
        let p = Permit::read(&mut r)?;
        r.finish()?;
        Ok(p)
    }
}
