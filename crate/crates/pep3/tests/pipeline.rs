//! Cross-cutting integration checks: domain consistency across active
//! sets, wire hygiene, durability across restarts, and the TCP path.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use pep3_group::Scalar;
use rand::rngs::StdRng;
use rand::SeedableRng;

use pep3::harness::cluster::{setup_state, Cluster, MemoryCluster};
use pep3::harness::config::{ClusterConfig, TransportKind};
use pep3::keyshares::{derive_share, hash_party_id, run_setup, ActiveSet, ShareKind, TripleId};
use pep3::lizard::{address_to_element, ip_to_address};
use pep3::parties::investigator::Investigator;
use pep3::parties::mp::{Flow, MeteringPoint};
use pep3::parties::researcher::Researcher;
use pep3::parties::sf::StorageFacility;
use pep3::parties::Links;
use pep3::permits::{issue_permit, now_unix, Permit};
use pep3::proofs::Mode;
use pep3::wire::transport::{serve, LocalTransport, TcpTransport, Transport};
use pep3::Result;

fn pseudonymise_permit(net: &MemoryCluster, subject: &str, rng: &mut StdRng) -> Permit {
    issue_permit(
        &net.authority,
        subject,
        Mode::Pseudonymise,
        vec![subject.into()],
        vec!["sf".into()],
        None,
        now_unix() + 3600,
        rng,
    )
    .unwrap()
}

#[test]
fn every_active_set_lands_on_the_same_pseudonym() {
    let net = MemoryCluster::new(2101, &[]);
    let (mp, _) = net.enrol("mp", 0.3, 1).unwrap();
    let (sf, _) = net.enrol("sf", 0.0, 2).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let permit = pseudonymise_permit(&net, "mp", &mut rng);

    let m = address_to_element(&ip_to_address("10.0.0.7".parse().unwrap()));
    let mut images = Vec::new();
    for active in ActiveSet::all() {
        let out = mp
            .transcrypt(
                &net.links,
                Mode::Pseudonymise,
                "mp",
                "sf",
                &active,
                &permit,
                vec![mp.encrypt(&m)],
            )
            .unwrap();
        images.push(sf.decrypt(&out[0]).unwrap());
    }
    for pair in images.windows(2) {
        assert_eq!(pair[0], pair[1], "pseudonym depends on the active set");
    }
    assert_ne!(images[0], m, "pseudonym equals the raw address point");
}

/// A transport wrapper that copies every frame, both directions.
struct Recording {
    inner: Arc<dyn Transport>,
    log: Arc<Mutex<Vec<Vec<u8>>>>,
}

impl Transport for Recording {
    fn round_trip(&self, frame: &[u8]) -> Result<Vec<u8>> {
        self.log.lock().unwrap().push(frame.to_vec());
        let response = self.inner.round_trip(frame)?;
        self.log.lock().unwrap().push(response.clone());
        Ok(response)
    }
}

#[test]
fn wire_frames_never_carry_addresses_or_pseudonyms() {
    let seed = 2102;
    let net = MemoryCluster::new(seed, &[]);
    let log = Arc::new(Mutex::new(Vec::new()));
    let mut links: Links = BTreeMap::new();
    for (peer, link) in &net.links {
        links.insert(
            *peer,
            Arc::new(Recording { inner: link.clone(), log: log.clone() }) as Arc<dyn Transport>,
        );
    }

    let (mp_core, _) = net.enrol("mp", 1.0, 4).unwrap();
    let (sf_core, _) = net.enrol("sf", 0.0, 5).unwrap();
    let (res_core, _) = net.enrol("researcher", 1.0, 6).unwrap();
    let mp = MeteringPoint::new(mp_core);
    let sf = Arc::new(StorageFacility::new(sf_core, None).unwrap());
    let sf_link = Recording {
        inner: Arc::new(LocalTransport(sf)) as Arc<dyn Transport>,
        log: log.clone(),
    };
    let researcher = Researcher::new(res_core);

    let src = [0xABu8; 16];
    let dst = [0xCDu8; 16];
    let active = ActiveSet::parse("ABC").unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let permit = pseudonymise_permit(&net, "mp", &mut rng);
    let flows = [Flow { src, dst, ts: 9, bytes: 100, packets: 1 }];
    mp.ingest(&links, &sf_link, &active, &permit, &flows).unwrap();

    let to_storage = pseudonymise_permit(&net, "researcher", &mut rng);
    let from_storage = issue_permit(
        &net.authority,
        "researcher",
        Mode::Translate,
        vec!["sf".into()],
        vec!["researcher".into()],
        None,
        now_unix() + 3600,
        &mut rng,
    )
    .unwrap();
    let (_, rows) = researcher
        .retrieve(&links, &sf_link, &active, &to_storage, &from_storage, "select src , dst", &[src])
        .unwrap();
    assert_eq!(rows.len(), 1);

    // ground truth from the same deterministic exchange the cluster ran
    let masters = run_setup(&mut StdRng::seed_from_u64(seed), None).unwrap();
    let share_of = |t: TripleId, kind| {
        let holder = t.members()[0].index();
        *masters[holder].share(t, kind).unwrap()
    };
    let pseudonym_key = |party: &str| {
        let e = hash_party_id(party);
        TripleId::all().fold(Scalar::ONE, |acc, t| {
            acc.mul(&derive_share(&share_of(t, ShareKind::Pseudonym), &e))
        })
    };

    let mut forbidden: Vec<(String, Vec<u8>)> = vec![
        ("raw source address".into(), src.to_vec()),
        ("raw destination address".into(), dst.to_vec()),
        ("source address point".into(), address_to_element(&src).encode().to_vec()),
        ("destination address point".into(), address_to_element(&dst).encode().to_vec()),
    ];
    for party in ["sf", "researcher", "mp"] {
        let key = pseudonym_key(party);
        forbidden.push((
            format!("{party}-domain source pseudonym"),
            address_to_element(&src).mul(&key).encode().to_vec(),
        ));
    }

    let frames = log.lock().unwrap();
    assert!(frames.len() >= 8, "expected the full exchange on the wire");
    for (i, frame) in frames.iter().enumerate() {
        for (what, needle) in &forbidden {
            assert!(
                !frame.windows(needle.len()).any(|w| w == &needle[..]),
                "frame {i} carries the {what}"
            );
        }
    }
}

#[test]
fn pseudonyms_and_warrants_survive_cluster_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let config = ClusterConfig {
        active: "BCD".into(),
        sampling: 0.5,
        transport: TransportKind::Local,
        addresses: BTreeMap::new(),
        state_dir: dir.path().to_path_buf(),
    };
    let mut rng = StdRng::seed_from_u64(2103);
    setup_state(dir.path(), &config, &mut rng, None).unwrap();
    let marker = ip_to_address("10.50.60.70".parse().unwrap());

    let open = || Cluster::open(ClusterConfig::load(&dir.path().join("cluster.toml")).unwrap());
    let retrieve_markers = |cluster: &Cluster, seed: u64| -> Vec<String> {
        let (core, _) = cluster.enrol("researcher", seed).unwrap();
        let researcher = Researcher::new(core);
        let sf = cluster.storage(seed ^ 9).unwrap();
        let sf_link = LocalTransport(sf);
        let mut rng = StdRng::seed_from_u64(seed ^ 10);
        let authority = cluster.authority().unwrap();
        let to_storage = issue_permit(
            &authority,
            "researcher",
            Mode::Pseudonymise,
            vec!["researcher".into()],
            vec!["sf".into()],
            None,
            now_unix() + 600,
            &mut rng,
        )
        .unwrap();
        let from_storage = issue_permit(
            &authority,
            "researcher",
            Mode::Translate,
            vec!["sf".into()],
            vec!["researcher".into()],
            None,
            now_unix() + 600,
            &mut rng,
        )
        .unwrap();
        let (_, rows) = researcher
            .retrieve(
                &cluster.links,
                &sf_link,
                &cluster.config.active_set().unwrap(),
                &to_storage,
                &from_storage,
                "select src where src = $1",
                &[marker],
            )
            .unwrap();
        rows.iter().map(|r| r[0].to_string()).collect()
    };
    let ingest_marker = |cluster: &Cluster, seed: u64, ts: u64| {
        let (core, _) = cluster.enrol("mp", seed).unwrap();
        let mp = MeteringPoint::new(core);
        let sf = cluster.storage(seed ^ 9).unwrap();
        let sf_link = LocalTransport(sf);
        let mut rng = StdRng::seed_from_u64(seed ^ 10);
        let permit = issue_permit(
            &cluster.authority().unwrap(),
            "mp",
            Mode::Pseudonymise,
            vec!["mp".into()],
            vec!["sf".into()],
            None,
            now_unix() + 600,
            &mut rng,
        )
        .unwrap();
        let flows = [Flow {
            src: marker,
            dst: ip_to_address("10.50.60.71".parse().unwrap()),
            ts,
            bytes: 10,
            packets: 1,
        }];
        mp.ingest(
            &cluster.links,
            &sf_link,
            &cluster.config.active_set().unwrap(),
            &permit,
            &flows,
        )
        .unwrap();
    };

    ingest_marker(&open().unwrap(), 21, 1);

    let first = retrieve_markers(&open().unwrap(), 22);
    assert_eq!(first.len(), 1);

    // a restarted metering point with a cold cache stores the same pseudonym
    ingest_marker(&open().unwrap(), 23, 2);
    let second = retrieve_markers(&open().unwrap(), 24);
    assert_eq!(second, vec![first[0].clone(), first[0].clone()]);

    // and a freshly restarted cluster still honours a warrant for row 0
    let cluster = open().unwrap();
    let (core, _) = cluster.enrol("investigator", 25).unwrap();
    let sf = cluster.storage(26).unwrap();
    let handed_over = {
        use pep3::wire::{Message, QueryRequest, Value};
        let sf_link = LocalTransport(sf);
        let reply = core
            .call(&sf_link, &Message::Query(QueryRequest { text: "select src".into(), args: vec![] }))
            .unwrap();
        match reply {
            Message::QueryOk(res) => match &res.rows[0][0] {
                Value::Pseudonym(c) => *c,
                other => panic!("expected a pseudonym cell, got {other:?}"),
            },
            other => panic!("expected rows, got {other:?}"),
        }
    };
    let mut rng = StdRng::seed_from_u64(27);
    let warrant = issue_permit(
        &cluster.authority().unwrap(),
        "investigator",
        Mode::Depseudonymise,
        vec!["sf".into()],
        vec!["investigator".into()],
        Some(handed_over),
        now_unix() + 600,
        &mut rng,
    )
    .unwrap();
    let investigator = Investigator::new(core);
    let recovered = investigator
        .depseudonymise(
            &cluster.links,
            &cluster.config.active_set().unwrap(),
            "sf",
            &warrant,
            &handed_over,
        )
        .unwrap();
    assert_eq!(recovered, marker);
}

#[test]
fn tcp_transport_runs_the_full_pipeline() {
    let net = MemoryCluster::new(2104, &[]);
    let mut links: Links = BTreeMap::new();
    for node in &net.peers {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        serve(listener, node.clone());
        links.insert(node.id(), Arc::new(TcpTransport { addr }) as Arc<dyn Transport>);
    }

    // every audit on, everything over sockets
    let (mp_core, report) = net.enrol_over("mp", 1.0, 31, &links).unwrap();
    assert!(report.liars.is_empty());
    let (sf_core, _) = net.enrol_over("sf", 1.0, 32, &links).unwrap();
    let (res_core, _) = net.enrol_over("researcher", 1.0, 33, &links).unwrap();
    let (inv_core, _) = net.enrol_over("investigator", 1.0, 34, &links).unwrap();

    let sf = Arc::new(StorageFacility::new(sf_core, None).unwrap());
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let sf_addr = listener.local_addr().unwrap().to_string();
    serve(listener, sf);
    let sf_link = TcpTransport { addr: sf_addr };

    let mp = MeteringPoint::new(mp_core);
    let researcher = Researcher::new(res_core);
    let active = ActiveSet::parse("ADE").unwrap();
    let mut rng = StdRng::seed_from_u64(35);
    let permit = pseudonymise_permit(&net, "mp", &mut rng);

    let src = ip_to_address("192.0.2.33".parse().unwrap());
    let flows = [
        Flow { src, dst: ip_to_address("192.0.2.34".parse().unwrap()), ts: 1, bytes: 50, packets: 1 },
        Flow { src, dst: ip_to_address("192.0.2.35".parse().unwrap()), ts: 2, bytes: 60, packets: 2 },
    ];
    assert_eq!(mp.ingest(&links, &sf_link, &active, &permit, &flows).unwrap(), 2);

    let to_storage = pseudonymise_permit(&net, "researcher", &mut rng);
    let from_storage = issue_permit(
        &net.authority,
        "researcher",
        Mode::Translate,
        vec!["sf".into()],
        vec!["researcher".into()],
        None,
        now_unix() + 3600,
        &mut rng,
    )
    .unwrap();
    let (columns, rows) = researcher
        .retrieve(
            &links,
            &sf_link,
            &active,
            &to_storage,
            &from_storage,
            "select src , bytes where src = $1 order by ts",
            &[src],
        )
        .unwrap();
    assert_eq!(columns, vec!["src", "bytes"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], rows[1][0], "same source, same pseudonym");

    // and the warrant chain, also over sockets
    use pep3::wire::{Message, QueryRequest, Value};
    let reply = inv_core
        .call(&sf_link, &Message::Query(QueryRequest { text: "select dst".into(), args: vec![] }))
        .unwrap();
    let handed_over = match reply {
        Message::QueryOk(res) => match &res.rows[1][0] {
            Value::Pseudonym(c) => *c,
            other => panic!("expected a pseudonym cell, got {other:?}"),
        },
        other => panic!("expected rows, got {other:?}"),
    };
    let warrant = issue_permit(
        &net.authority,
        "investigator",
        Mode::Depseudonymise,
        vec!["sf".into()],
        vec!["investigator".into()],
        Some(handed_over),
        now_unix() + 3600,
        &mut rng,
    )
    .unwrap();
    let investigator = Investigator::new(inv_core);
    let recovered = investigator
        .depseudonymise(&links, &active, "sf", &warrant, &handed_over)
        .unwrap();
    assert_eq!(recovered, ip_to_address("192.0.2.35".parse().unwrap()));
}
