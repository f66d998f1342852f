//! Operation budgets and throughput.
//!
//! The interesting number is per *unique* address, since repeats are served
//! from the metering point's cache without touching the group:
//!
//! ```text
//! encrypt        1 general + 1 base
//! hop × 3        3 general + 1 base each (target point cached)
//! decrypt        1 general
//! total         11 general + 4 base
//! ```
//!
//! `transcryption_counts` pins these numbers exactly using the group
//! library's thread-local multiplication counters; `ingest_throughput`
//! measures the full stack (wire framing, signatures, permits, storage)
//! end to end.

use std::sync::Arc;
use std::time::Instant;

use pep3_group::{counters, GroupElement, Scalar};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub use pep3_group::counters::MulCounts;

use crate::elgamal;
use crate::error::Result;
use crate::harness::cluster::MemoryCluster;
use crate::keyshares::{
    assigned_shares, derive_share, hash_party_id, run_setup, ActiveSet, ShareKind,
};
use crate::parties::mp::{Flow, MeteringPoint};
use crate::parties::sf::StorageFacility;
use crate::permits::{issue_permit, now_unix};
use crate::proofs::Mode;
use crate::wire::transport::LocalTransport;

/// Wall-clock cost of the two scalar-multiplication flavours.
#[derive(Clone, Copy, Debug)]
pub struct GroupTimings {
    pub general_ns: f64,
    pub base_ns: f64,
}

pub fn group_timings(iters: u32) -> GroupTimings {
    let mut rng = StdRng::seed_from_u64(0xbe_c4);
    let p = GroupElement::random(&mut rng);
    let s = Scalar::random_nonzero(&mut rng);

    let start = Instant::now();
    let mut acc = p;
    for _ in 0..iters {
        acc = acc.mul(&s);
    }
    let general_ns = start.elapsed().as_nanos() as f64 / iters as f64;

    let start = Instant::now();
    for _ in 0..iters {
        acc = acc.add(&GroupElement::base_mul(&s));
    }
    let base_ns = start.elapsed().as_nanos() as f64 / iters as f64;
    // keep the accumulator alive so the loops cannot be elided
    assert_ne!(acc.encode(), [0u8; 32]);
    GroupTimings { general_ns, base_ns }
}

/// Exact multiplication counts for one address moving from the metering
/// point to storage, measured at the operation layer.
#[derive(Clone, Copy, Debug)]
pub struct OperationCounts {
    pub encrypt: MulCounts,
    pub warm_hop: MulCounts,
    pub per_address: MulCounts,
}

pub fn transcryption_counts(seed: u64) -> Result<OperationCounts> {
    let mut rng = StdRng::seed_from_u64(seed);
    let all_masters = run_setup(&mut rng, None)?;
    let active = ActiveSet::parse("ABC")?;
    let e_mp = hash_party_id("mp");
    let e_sf = hash_party_id("sf");

    // factors exactly as the three peers would compute them
    let share_of = |t: crate::keyshares::TripleId, kind| {
        let holder = t.members()[0].index();
        *all_masters[holder].share(t, kind).unwrap()
    };
    let mut hops: Vec<(Scalar, Scalar)> = Vec::new();
    for peer in active.peers() {
        let mut s = Scalar::ONE;
        let mut s_den = Scalar::ONE;
        let mut n = Scalar::ONE;
        for t in assigned_shares(&active, peer) {
            let enc = share_of(t, ShareKind::Encryption);
            s = s.mul(&derive_share(&enc, &e_sf));
            s_den = s_den.mul(&derive_share(&enc, &e_mp));
            n = n.mul(&derive_share(&share_of(t, ShareKind::Pseudonym), &e_sf));
        }
        hops.push((s.mul(&s_den.invert().unwrap()), n));
    }

    // starting key and the cached target chain τ, s₁τ, s₂s₁τ, …
    let mut s_mp = Scalar::ONE;
    for t in crate::keyshares::TripleId::all() {
        s_mp = s_mp.mul(&derive_share(&share_of(t, ShareKind::Encryption), &e_mp));
    }
    let tau_mp = GroupElement::base_mul(&s_mp);
    let mut targets = Vec::new();
    let mut tau = tau_mp;
    for (s, _) in &hops {
        tau = tau.mul(s);
        targets.push(tau);
    }
    let s_sf = s_mp.mul(&hops.iter().fold(Scalar::ONE, |acc, (s, _)| acc.mul(s)));

    let message = GroupElement::random(&mut rng);
    let rs: Vec<Scalar> = (0..4).map(|_| Scalar::random_nonzero(&mut rng)).collect();

    counters::reset();
    let c0 = elgamal::encrypt(&message, &tau_mp, &rs[0]);
    let encrypt = counters::snapshot();

    counters::reset();
    let c1 = elgamal::rsk_to_target(&c0, &hops[0].0, &hops[0].1, &rs[1], &targets[0])?;
    let warm_hop = counters::snapshot();

    counters::reset();
    let c0 = elgamal::encrypt(&message, &tau_mp, &rs[0]);
    let mut c = c0;
    for (i, (s, n)) in hops.iter().enumerate() {
        c = elgamal::rsk_to_target(&c, s, n, &rs[i + 1], &targets[i])?;
    }
    let plain = elgamal::decrypt(&c, &s_sf);
    let per_address = counters::snapshot();

    // sanity: the measured path really did the work
    let n_total = hops.iter().fold(Scalar::ONE, |acc, (_, n)| acc.mul(n));
    assert_eq!(plain, message.mul(&n_total));
    assert_eq!(c1.target, targets[0]);

    Ok(OperationCounts { encrypt, warm_hop, per_address })
}

/// Unique addresses pushed through metering → peers → storage per unit
/// time, full stack, over in-process transport.
#[derive(Clone, Copy, Debug)]
pub struct Throughput {
    pub addresses: u64,
    pub seconds: f64,
}

impl Throughput {
    pub fn per_minute(&self) -> f64 {
        self.addresses as f64 * 60.0 / self.seconds
    }
}

pub fn ingest_throughput(seed: u64, min_seconds: f64) -> Result<Throughput> {
    let net = MemoryCluster::new(seed, &[]);
    let (mp_core, _) = net.enrol("mp", 0.0, seed ^ 1)?;
    let (sf_core, _) = net.enrol("sf", 0.0, seed ^ 2)?;
    let mp = MeteringPoint::new(mp_core);
    let sf = Arc::new(StorageFacility::new(sf_core, None)?);
    let sf_link = LocalTransport(sf);
    let active = ActiveSet::parse("ABC")?;
    let mut rng = StdRng::seed_from_u64(seed ^ 3);
    let permit = issue_permit(
        &net.authority,
        "mp",
        Mode::Pseudonymise,
        vec!["mp".into()],
        vec!["sf".into()],
        None,
        now_unix() + 3600,
        &mut rng,
    )?;

    let mut addresses = 0u64;
    let mut counter = 0u128;
    let start = Instant::now();
    loop {
        let flows: Vec<Flow> = (0..50)
            .map(|_| {
                counter += 1;
                Flow {
                    src: counter.to_be_bytes(),
                    dst: (u128::MAX - counter).to_be_bytes(),
                    ts: counter as u64,
                    bytes: 1400,
                    packets: 3,
                }
            })
            .collect();
        mp.ingest(&net.links, &sf_link, &active, &permit, &flows)?;
        addresses += 100; // 50 fresh sources + 50 fresh destinations
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= min_seconds {
            return Ok(Throughput { addresses, seconds: elapsed });
        }
    }
}
