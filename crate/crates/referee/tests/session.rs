use std::net::TcpListener;
use std::thread;

use telepathy_core::games::play::{InputSampler, PromiseSampler, ScriptedSampler};
use telepathy_core::games::strategy::{
    ConstantStrategy, ParityStrategy, QuantumDjStrategy, SharedRandomStrategy,
};
use telepathy_core::games::{GameKind, RoundResource, Role, Strategy};
use telepathy_core::{BitString, RandomSource};
use telepathy_referee::player::Direction;
use telepathy_referee::server::Endpoint;
use telepathy_referee::{
    player_run, serve, serve_with_sampler, PlayerOptions, PlayerReport, RefereeError,
    SessionConfig, SessionLog, SessionOutcome,
};

type Played = (SessionOutcome, Result<PlayerReport, RefereeError>, Result<PlayerReport, RefereeError>);

fn run(
    config: &SessionConfig,
    sampler: Option<Box<dyn InputSampler>>,
    alice: Box<dyn Strategy>,
    bob: Box<dyn Strategy>,
    opts: PlayerOptions,
) -> Played {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = listener.local_addr().unwrap().to_string();
    let spawn = |role: Role, mut s: Box<dyn Strategy>| {
        let endpoint = endpoint.clone();
        let opts = opts.clone();
        thread::spawn(move || player_run(role, s.as_mut(), &endpoint, &opts))
    };
    let ha = spawn(Role::Alice, alice);
    let hb = spawn(Role::Bob, bob);
    let outcome = match sampler {
        Some(s) => serve_with_sampler(config, listener, s),
        None => serve(config, listener),
    }
    .unwrap();
    (outcome, ha.join().unwrap(), hb.join().unwrap())
}

fn quantum(m: usize) -> Box<dyn Strategy> {
    Box::new(QuantumDjStrategy::new(m).unwrap())
}

#[test]
fn quantum_session_never_loses() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SessionConfig::new(GameKind::Dj { m: 2 }, 1000, 77);
    cfg.log_path = Some(dir.path().join("session.jsonl"));
    let (out, a, b) = run(&cfg, None, quantum(2), quantum(2), PlayerOptions::default());
    assert_eq!(out.aborted, None);
    let s = out.log.summary.clone().unwrap();
    assert_eq!((s.rounds, s.wins, s.losses), (1000, 1000, 0));
    assert_eq!(s.promise_violations, 0);
    assert_eq!(a.unwrap().wins, 1000);
    assert_eq!(b.unwrap().losses, 0);

    let on_disk = SessionLog::read(cfg.log_path.as_ref().unwrap()).unwrap();
    assert_eq!(on_disk, out.log);
    on_disk.verify_replay().unwrap();
    let equal = on_disk.records.iter().filter(|r| r.x == r.y).count();
    assert!((400..=600).contains(&equal), "{equal} equal-input rounds");
}

#[test]
fn same_seed_same_log() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 2 }, 200, 5);
    let (first, ..) = run(&cfg, None, quantum(2), quantum(2), PlayerOptions::default());
    let (second, ..) = run(&cfg, None, quantum(2), quantum(2), PlayerOptions::default());
    assert_eq!(first.log.records, second.log.records);
    assert_eq!(first.log.summary, second.log.summary);

    // Matches the in-process engine draw for draw.
    let mut rng = RandomSource::new(5);
    let mut sampler = cfg.sampler().unwrap();
    let local = telepathy_core::games::play_rounds(
        &cfg.game,
        quantum(2).as_mut(),
        quantum(2).as_mut(),
        &telepathy_core::games::Resource::Entanglement { qubits_per_player: 2 },
        200,
        &mut rng,
        sampler.as_mut(),
    )
    .unwrap();
    assert_eq!(local.records, first.log.records);
}

#[test]
fn tampered_log_fails_replay() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 20, 9);
    let (out, ..) = run(&cfg, None, Box::new(ParityStrategy), Box::new(ParityStrategy), PlayerOptions::default());
    let mut log = out.log.clone();
    log.verify_replay().unwrap();
    log.records[3].y = log.records[3].y.xor(&"11".parse().unwrap()).unwrap();
    assert!(matches!(
        log.verify_replay(),
        Err(RefereeError::ReplayMismatch { round: 3, .. })
    ));
    let text = out.log.to_jsonl();
    assert_eq!(SessionLog::parse(&text).unwrap(), out.log);
}

#[test]
fn players_only_talk_to_the_referee() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 2 }, 50, 1);
    let (out, ..) = run(&cfg, None, quantum(2), quantum(2), PlayerOptions::default());
    assert!(!out.capture.is_empty());
    for msg in &out.capture {
        assert!(
            (msg.from == Endpoint::Referee) != (msg.to == Endpoint::Referee),
            "edge {:?} -> {:?}",
            msg.from,
            msg.to
        );
    }
    // Each round_input carries exactly the recipient's own input.
    for rec in &out.log.records {
        for (to, input) in [(Endpoint::Alice, &rec.x), (Endpoint::Bob, &rec.y)] {
            let line = format!(
                "{{\"type\":\"round_input\",\"round_index\":{},\"input\":\"{input}\"}}",
                rec.round_index
            );
            assert!(out.capture.iter().any(|c| c.to == to && c.line == line));
        }
    }
}

#[test]
fn zero_round_session() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 0, 0);
    cfg.log_path = Some(dir.path().join("empty.jsonl"));
    let (out, a, b) = run(&cfg, None, Box::new(ParityStrategy), Box::new(ParityStrategy), PlayerOptions::default());
    assert_eq!(out.aborted, None);
    assert_eq!(a.unwrap().rounds_played, 0);
    assert_eq!(b.unwrap().rounds_played, 0);
    let text = std::fs::read_to_string(cfg.log_path.unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("{\"type\":\"header\""));
    assert!(lines[1].starts_with("{\"type\":\"summary\""));
}

/// Answers with one bit too many.
struct LongAnswer;

impl Strategy for LongAnswer {
    fn id(&self) -> String {
        "long".into()
    }
    fn respond(
        &mut self,
        _: u64,
        _: &BitString,
        _: &mut dyn RoundResource,
    ) -> telepathy_core::Result<BitString> {
        Ok(BitString::zeros(3))
    }
}

#[test]
fn wrong_output_length_is_a_protocol_error() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 2 }, 10, 3);
    let (out, ..) = run(&cfg, None, Box::new(LongAnswer), quantum(2), PlayerOptions::default());
    assert_eq!(out.aborted, None);
    let s = out.log.summary.unwrap();
    assert_eq!(s.protocol_errors, 10);
    assert_eq!(s.losses, 10);
    assert!(out.log.records.iter().all(|r| r.protocol_error && !r.won));
}

#[test]
fn parity_wins_and_constant_loses_at_m1() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 100, 12);
    let (out, ..) = run(&cfg, None, Box::new(ParityStrategy), Box::new(ParityStrategy), PlayerOptions::default());
    assert_eq!(out.log.summary.unwrap().wins, 100);

    let constant = || Box::new(ConstantStrategy { output_len: 1 }) as Box<dyn Strategy>;
    let (out, ..) = run(&cfg, None, constant(), constant(), PlayerOptions::default());
    let s = out.log.summary.unwrap();
    assert!(s.losses > 0);
    // Constant answers lose exactly the unequal rounds.
    let unequal = out.log.records.iter().filter(|r| r.x != r.y).count() as u64;
    assert_eq!(s.losses, unequal);
}

#[test]
fn shared_randomness_lives_in_the_players() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 100, 4);
    let opts = PlayerOptions {
        shared_seed: Some(99),
        ..PlayerOptions::default()
    };
    let (out, ..) = run(&cfg, None, Box::new(SharedRandomStrategy), Box::new(SharedRandomStrategy), opts);
    assert_eq!(out.log.summary.unwrap().wins, 100);
    assert!(out.capture.iter().all(|c| !c.line.contains("lambda")));

    // Without an agreed string the players cannot run the strategy.
    let (out, a, _) = run(&cfg, None, Box::new(SharedRandomStrategy), Box::new(SharedRandomStrategy), PlayerOptions::default());
    assert!(out.aborted.is_some());
    assert!(a.is_err());
}

#[test]
fn alice_sees_nothing_of_bobs_input() {
    let m = 2;
    let rounds = 200;
    let mut rng = RandomSource::new(31);
    let mut base = PromiseSampler::new(m, 0.5).unwrap();
    let pairs: Vec<_> = (0..rounds).map(|_| base.sample(&mut rng).unwrap()).collect();
    // Keep the equal rounds, move Bob to a different promised input elsewhere.
    let masks: Vec<BitString> = ["0011", "0101", "0110", "1001", "1010", "1100"]
        .iter()
        .map(|t| t.parse().unwrap())
        .collect();
    let altered: Vec<_> = pairs
        .iter()
        .map(|(x, y)| {
            if x == y {
                return (x.clone(), y.clone());
            }
            let d = x.xor(y).unwrap();
            let other = masks.iter().find(|mk| **mk != d).unwrap();
            (x.clone(), x.xor(other).unwrap())
        })
        .collect();
    assert!(pairs.iter().zip(&altered).any(|(p, q)| p.1 != q.1));

    let cfg = SessionConfig::new(GameKind::Dj { m }, rounds as u64, 31);
    let alice_view = |pairs: Vec<(BitString, BitString)>| {
        let (out, a, _) = run(
            &cfg,
            Some(Box::new(ScriptedSampler::new(pairs))),
            quantum(m),
            quantum(m),
            PlayerOptions::default(),
        );
        assert_eq!(out.log.summary.unwrap().losses, 0);
        a.unwrap().transcript
    };
    let one = alice_view(pairs);
    let two = alice_view(altered);
    assert!(one.iter().any(|(d, l)| *d == Direction::Received && l.contains("entangle_result")));
    assert_eq!(one, two);
}

#[test]
fn malformed_output_aborts_with_partial_log() {
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpStream;

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 5, 0);
    cfg.log_path = Some(dir.path().join("partial.jsonl"));
    cfg.timeout_ms = 2_000;
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = listener.local_addr().unwrap().to_string();
    let ep = endpoint.clone();
    let bob = thread::spawn(move || {
        player_run(Role::Bob, &mut ParityStrategy, &ep, &PlayerOptions::default())
    });
    let rogue = thread::spawn(move || {
        let mut s = TcpStream::connect(&endpoint).unwrap();
        writeln!(s, r#"{{"type":"hello","protocol_version":"1","role":"alice","strategy":"rogue"}}"#).unwrap();
        let mut r = BufReader::new(s.try_clone().unwrap());
        let mut line = String::new();
        r.read_line(&mut line).unwrap(); // ready
        line.clear();
        r.read_line(&mut line).unwrap(); // round_input 0
        writeln!(s, r#"{{"type":"round_output","round_index":0,"output":"1"}}"#).unwrap();
        line.clear();
        r.read_line(&mut line).unwrap(); // verdict 0
        line.clear();
        r.read_line(&mut line).unwrap(); // round_input 1
        writeln!(s, r#"{{"type":"round_output","round_index":1,"output":"banana"}}"#).unwrap();
        line.clear();
        r.read_line(&mut line).unwrap();
        line
    });
    let out = serve(&cfg, listener).unwrap();
    let reason = out.aborted.clone().unwrap();
    assert!(reason.contains("alice"), "{reason}");
    assert!(rogue.join().unwrap().contains("\"type\":\"error\""));
    assert!(matches!(bob.join().unwrap(), Err(RefereeError::Remote(_))));
    let log = SessionLog::read(cfg.log_path.as_ref().unwrap()).unwrap();
    assert_eq!(log.records.len(), 1);
    assert!(log.summary.unwrap().aborted.is_some());
}

#[test]
fn silent_player_times_out() {
    use std::io::Write;
    use std::net::TcpStream;

    let mut cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 3, 0);
    cfg.timeout_ms = 200;
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = listener.local_addr().unwrap().to_string();
    let ep = endpoint.clone();
    let bob = thread::spawn(move || {
        player_run(Role::Bob, &mut ParityStrategy, &ep, &PlayerOptions::default())
    });
    let mut s = TcpStream::connect(&endpoint).unwrap();
    writeln!(s, r#"{{"type":"hello","protocol_version":"1","role":"alice","strategy":"mute"}}"#).unwrap();
    let out = serve(&cfg, listener).unwrap();
    assert!(out.aborted.unwrap().contains("timed out"));
    assert!(out.log.records.is_empty());
    assert!(bob.join().unwrap().is_err());
    drop(s);
}

#[test]
fn duplicate_roles_rejected() {
    let cfg = SessionConfig::new(GameKind::Dj { m: 1 }, 3, 0);
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = listener.local_addr().unwrap().to_string();
    let hs: Vec<_> = (0..2)
        .map(|_| {
            let ep = endpoint.clone();
            thread::spawn(move || player_run(Role::Alice, &mut ParityStrategy, &ep, &PlayerOptions::default()))
        })
        .collect();
    let out = serve(&cfg, listener).unwrap();
    assert!(out.aborted.unwrap().contains("role"));
    for h in hs {
        assert!(h.join().unwrap().is_err());
    }
}
