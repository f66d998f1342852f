use crate::keyshares::{PeerId, TripleId};

/// Everything that can go wrong across the protocol stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed encoding: {0}")]
    Encoding(&'static str),

    #[error("element does not decode to an address")]
    NotAnAddress,

    #[error("ambiguous address encoding")]
    AmbiguousAddress,

    #[error("transcryption factor is zero")]
    ZeroFactor,

    #[error("certificate rejected: {0}")]
    BadCertificate(&'static str),

    #[error("permit rejected: {0}")]
    PermitRejected(&'static str),

    #[error("proof ticket rejected: {0}")]
    TicketRejected(&'static str),

    #[error("bad signature from {0}")]
    BadSignature(String),

    #[error("setup aborted: {0}")]
    SetupMismatch(String),

    #[error("enrolment failed: {0}")]
    EnrolmentFailure(String),

    #[error("peer {peer} is not a member of triple {triple}")]
    NotMyTriple { peer: PeerId, triple: TripleId },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("query rejected: {0}")]
    QueryRejected(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("remote error from {from}: {message}")]
    Remote { from: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code classes: 2 for verification/trust failures, 3 for
    /// setup aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SetupMismatch(_) => 3,
            Error::VerificationFailed(_)
            | Error::BadCertificate(_)
            | Error::EnrolmentFailure(_)
            | Error::BadSignature(_) => 2,
            _ => 1,
        }
    }
}
