//! Fault-injection experiments.
//!
//! The sampling audit is probabilistic, so "does a corrupt peer get
//! caught?" has a closed-form answer we can test against: a peer that
//! corrupts every output in a batch of `b` items audited independently at
//! rate `q` escapes only if none of its `b` hops is audited, so
//!
//! ```text
//! P(caught) = 1 − (1 − q)^b
//! ```
//!
//! Audits of the *other* peers never fire: they transform whatever they are
//! given faithfully, and their certificates cover exactly that.  Detection
//! comes solely from the corrupt peer's own hops, which keeps the formula
//! exact rather than a bound.

use std::collections::BTreeSet;

use pep3_group::GroupElement;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::elgamal::Cyphertext;
use crate::error::{Error, Result};
use crate::harness::cluster::MemoryCluster;
use crate::keyshares::{ActiveSet, PeerId};
use crate::peer::PeerTamper;
use crate::permits::{issue_permit, now_unix, Permit};
use crate::proofs::Mode;

/// One measured detection rate next to its predicted value.
#[derive(Clone, Debug)]
pub struct DetectionPoint {
    pub scenario: &'static str,
    pub sampling: f64,
    pub batch: usize,
    pub trials: usize,
    pub detected: usize,
    pub expected: f64,
}

impl DetectionPoint {
    pub fn observed(&self) -> f64 {
        self.detected as f64 / self.trials as f64
    }

    /// Binomial standard deviation of the observed rate.
    pub fn sigma(&self) -> f64 {
        (self.expected * (1.0 - self.expected) / self.trials as f64).sqrt()
    }

    pub fn within_three_sigma(&self) -> bool {
        (self.observed() - self.expected).abs() <= 3.0 * self.sigma() + 1e-12
    }
}

fn experiment_permit(net: &MemoryCluster, rng: &mut StdRng) -> Result<Permit> {
    issue_permit(
        &net.authority,
        "mp",
        Mode::Pseudonymise,
        vec!["mp".into()],
        vec!["sf".into()],
        None,
        now_unix() + 3600,
        rng,
    )
}

/// Runs `trials` batches of `batch` fresh cyphertexts through a cluster in
/// which `culprit` misbehaves per `tamper`, with the sending party auditing
/// at rate `sampling`.  A trial counts as detected when the party's error
/// names the culprit.
pub fn detection_rate(
    scenario: &'static str,
    tamper: PeerTamper,
    culprit: PeerId,
    sampling: f64,
    batch: usize,
    trials: usize,
    seed: u64,
) -> Result<DetectionPoint> {
    let net = MemoryCluster::new(seed, &[(culprit, tamper)]);
    let (mp, report) = net.enrol("mp", sampling, seed ^ 0x517c)?;
    if !report.liars.is_empty() {
        return Err(Error::Protocol(format!(
            "enrolment already named {:?}; the experiment needs a quiet start",
            report.liars
        )));
    }
    let active = ActiveSet::parse("ABC")?;
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37);
    let permit = experiment_permit(&net, &mut rng)?;
    let culprit_name = format!("peer {culprit}");

    let mut detected = 0;
    for _ in 0..trials {
        let inputs: Vec<Cyphertext> = (0..batch)
            .map(|_| mp.encrypt(&GroupElement::random(&mut rng)))
            .collect();
        match mp.transcrypt(&net.links, Mode::Pseudonymise, "mp", "sf", &active, &permit, inputs)
        {
            Ok(_) => {}
            Err(Error::VerificationFailed(msg)) if msg.contains(&culprit_name) => detected += 1,
            Err(e) => return Err(e),
        }
    }

    let expected = 1.0 - (1.0 - sampling).powi(batch as i32);
    Ok(DetectionPoint { scenario, sampling, batch, trials, detected, expected })
}

/// The standard battery: corruption at three sampling rates (batch sized so
/// every point sits in the interior where the 3σ test has teeth) plus
/// outright proof refusal.
pub fn standard_battery(seed: u64) -> Result<Vec<DetectionPoint>> {
    use PeerTamper::{CorruptResult, RefuseProof};
    Ok(vec![
        detection_rate("corrupt-output", CorruptResult, PeerId::B, 1.0, 1, 200, seed)?,
        detection_rate("corrupt-output", CorruptResult, PeerId::B, 0.1, 20, 300, seed + 1)?,
        detection_rate("corrupt-output", CorruptResult, PeerId::B, 0.01, 100, 300, seed + 2)?,
        detection_rate("refuse-proof", RefuseProof, PeerId::C, 0.1, 20, 300, seed + 3)?,
    ])
}

/// Enrolment with two peers handing out wrong share scalars: both must be
/// named, nobody else, and enrolment must still succeed off the honest
/// majority.
pub fn two_liar_enrolment(seed: u64) -> Result<(BTreeSet<PeerId>, Vec<String>)> {
    let net = MemoryCluster::new(
        seed,
        &[
            (PeerId::C, PeerTamper::WrongEnrolmentShare),
            (PeerId::E, PeerTamper::WrongEnrolmentShare),
        ],
    );
    let (_, report) = net.enrol("mp", 1.0, seed ^ 0x2a)?;
    Ok((report.liars, report.details))
}
