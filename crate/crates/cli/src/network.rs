//! `referee serve` and `player join`.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;
use telepathy_core::games::strategy::{ChshAngles, ChshQuantumStrategy, ConstantStrategy};
use telepathy_core::games::{GameKind, GameSpec, Role, Strategy};
use telepathy_referee::{player_join, serve, PlayerOptions, SessionConfig};

use crate::games::{coloring_for, dj_strategy};
use crate::report::ExperimentReport;
use crate::{DjStrategyName, PlayerStrategyName};

pub fn referee_serve(
    host: &str,
    port: u16,
    config_path: &Path,
    log: Option<PathBuf>,
) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let mut config = SessionConfig::from_json(&text)?;
    if log.is_some() {
        config.log_path = log;
    }
    let listener = TcpListener::bind((host, port)).with_context(|| format!("binding {host}:{port}"))?;
    // Announced on stderr so a caller that asked for port 0 can find us.
    eprintln!("listening on {}", listener.local_addr()?);
    let outcome = serve(&config, listener)?;

    let mut rep = ExperimentReport::new(
        "referee-serve",
        serde_json::to_value(&config)?,
        Some(config.seed),
    );
    let s = outcome.log.summary.clone().unwrap_or_default();
    rep.metric("rounds", s.rounds);
    rep.metric("wins", s.wins);
    rep.metric("losses", s.losses);
    rep.metric("promise_violations", s.promise_violations);
    rep.metric("protocol_errors", s.protocol_errors);
    rep.metric("messages", outcome.capture.len());
    rep.metric("aborted", &outcome.aborted);
    rep.check(
        "session completed",
        outcome.aborted.is_none(),
        outcome.aborted.clone().unwrap_or_else(|| format!("{} rounds", s.rounds)),
    );
    rep.check(
        "log replays from the seed",
        outcome.log.verify_replay().is_ok(),
        "inputs and verdicts regenerate",
    );
    rep.columns(&["round", "x", "y", "a", "b", "promise_held", "won", "protocol_error"]);
    for r in &outcome.log.records {
        rep.row(vec![
            json!(r.round_index),
            json!(r.x),
            json!(r.y),
            json!(r.a),
            json!(r.b),
            json!(r.promise_held),
            json!(r.won),
            json!(r.protocol_error),
        ]);
    }
    Ok(rep)
}

fn build_strategy(
    name: PlayerStrategyName,
    role: Role,
    game: &GameKind,
    budget: Duration,
) -> Result<Box<dyn Strategy>> {
    Ok(match (name, game) {
        (PlayerStrategyName::Constant, _) => Box::new(ConstantStrategy {
            output_len: game.output_len(role),
        }),
        (PlayerStrategyName::Quantum, GameKind::Chsh) => {
            Box::new(ChshQuantumStrategy::new(role, &ChshAngles::default()))
        }
        (PlayerStrategyName::Quantum, GameKind::Dj { m }) => dj_strategy(DjStrategyName::Quantum, *m, None)?,
        (PlayerStrategyName::Parity, GameKind::Dj { m }) => dj_strategy(DjStrategyName::Parity, *m, None)?,
        (PlayerStrategyName::SharedRandom, GameKind::Dj { m }) => {
            dj_strategy(DjStrategyName::SharedRandom, *m, None)?
        }
        (PlayerStrategyName::Coloring, GameKind::Dj { m }) => {
            let c = coloring_for(*m, budget)?;
            dj_strategy(DjStrategyName::Coloring, *m, Some(&c))?
        }
        (other, GameKind::Chsh) => anyhow::bail!("{} is not a CHSH strategy", other.as_str()),
    })
}

pub fn player(
    role: Role,
    endpoint: &str,
    name: PlayerStrategyName,
    shared_seed: Option<u64>,
    budget: Duration,
) -> Result<ExperimentReport> {
    let opts = PlayerOptions {
        shared_seed,
        ..PlayerOptions::default()
    };
    let build = Box::new(move |game: &GameKind| {
        build_strategy(name, role, game, budget)
            .map_err(|e| telepathy_core::Error::Domain(format!("{e:#}")))
    });
    let report = player_join(role, name.as_str(), build, endpoint, &opts)?;
    let mut rep = ExperimentReport::new(
        "player-join",
        json!({ "role": role, "endpoint": endpoint, "strategy": name.as_str(), "shared_seed": shared_seed }),
        None,
    );
    rep.metric("rounds", report.rounds_played);
    rep.metric("wins", report.wins);
    rep.metric("losses", report.losses);
    rep.metric("messages", report.transcript.len());
    rep.check("session completed", true, "received the summary");
    Ok(rep)
}
