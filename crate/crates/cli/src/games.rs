//! `game dj`, `game chsh` and `coloring`.

use std::f64::consts::SQRT_2;
use std::time::Duration;

use anyhow::{anyhow, bail, Result};
use serde_json::json;
use telepathy_core::games::chsh::{chsh_classical_max, chsh_quantum_value, ChshMode};
use telepathy_core::games::coloring::{find_coloring, Coloring, ColoringSearch};
use telepathy_core::games::play::default_sampler;
use telepathy_core::games::strategy::{
    coloring_strategy, ChshAngles, ColoringStrategy, ParityStrategy, QuantumDjStrategy, SharedRandomStrategy,
    SharedRandomness,
};
use telepathy_core::games::{
    play_rounds, DjGame, GameKind, GameSpec, Resource, Strategy,
};
use telepathy_core::stats::{chi_square_3sigma, chi_square_uniform};
use telepathy_core::{BitString, RandomSource};

use crate::report::ExperimentReport;
use crate::DjStrategyName;

/// Seed offset for the shared random string, so `λ` does not reuse the input stream.
pub const LAMBDA_SEED_XOR: u64 = 0x9e37_79b9_7f4a_7c15;

/// Default time for colouring searches started by `game dj --strategy coloring`.
pub const DEFAULT_COLORING_BUDGET_SECS: f64 = 10.0;

/// Builds one player's strategy for the Deutsch-Jozsa game. Colouring
/// strategies need a colouring found in advance.
pub fn dj_strategy(
    name: DjStrategyName,
    m: usize,
    coloring: Option<&Coloring>,
) -> Result<Box<dyn Strategy>> {
    Ok(match name {
        DjStrategyName::Quantum => Box::new(QuantumDjStrategy::new(m)?),
        DjStrategyName::Parity if m == 1 => Box::new(ParityStrategy),
        DjStrategyName::SharedRandom if m == 1 => Box::new(SharedRandomStrategy),
        DjStrategyName::Parity | DjStrategyName::SharedRandom => {
            bail!("the {} strategy is defined for m = 1 only", name.as_str())
        }
        DjStrategyName::Coloring => {
            let c = coloring.ok_or_else(|| anyhow!("no colouring available"))?;
            Box::new(ColoringStrategy::new(c.clone())?)
        }
    })
}

/// Colouring of `{0,1}^(2^m)` with `2^m` colours, or an error if the search
/// does not find one in time.
pub fn coloring_for(m: usize, budget: Duration) -> Result<Coloring> {
    let n = 1usize << m;
    let out = find_coloring(n, n, budget)?;
    match out.result {
        ColoringSearch::Found(c) => Ok(c),
        ColoringSearch::Refuted => bail!("no {n}-colouring exists for n = {n}"),
        ColoringSearch::BudgetExhausted => bail!(
            "no {n}-colouring found within {:.1} s ({} nodes)",
            budget.as_secs_f64(),
            out.nodes
        ),
    }
}

pub struct DjRun {
    pub m: usize,
    pub rounds: u64,
    pub strategy: DjStrategyName,
    pub seed: u64,
    pub equal_probability: f64,
    pub budget: Duration,
}

pub fn game_dj(run: &DjRun) -> Result<ExperimentReport> {
    let game = DjGame::new(run.m)?;
    let kind = GameKind::Dj { m: run.m };
    let mut rep = ExperimentReport::new(
        "game-dj",
        json!({
            "m": run.m,
            "rounds": run.rounds,
            "strategy": run.strategy.as_str(),
            "equal_probability": run.equal_probability,
        }),
        Some(run.seed),
    );
    let coloring = match run.strategy {
        DjStrategyName::Coloring => Some(coloring_for(run.m, run.budget)?),
        _ => None,
    };
    let mut alice = dj_strategy(run.strategy, run.m, coloring.as_ref())?;
    let mut bob = dj_strategy(run.strategy, run.m, coloring.as_ref())?;
    let resource = match run.strategy {
        DjStrategyName::Quantum => Resource::Entanglement { qubits_per_player: run.m },
        DjStrategyName::SharedRandom => Resource::SharedRandomness(SharedRandomness::generate(
            run.seed ^ LAMBDA_SEED_XOR,
            run.rounds as usize,
        )),
        _ => Resource::None,
    };
    let mut rng = RandomSource::new(run.seed);
    let mut sampler = default_sampler(&kind, run.equal_probability)?;
    let report = play_rounds(
        &game,
        alice.as_mut(),
        bob.as_mut(),
        &resource,
        run.rounds,
        &mut rng,
        sampler.as_mut(),
    )?;
    let st = &report.stats;
    rep.metric("rounds", st.rounds);
    rep.metric("wins", st.wins);
    rep.metric("losses", st.losses);
    rep.metric("win_rate", st.win_rate());
    rep.metric("promise_violations", st.promise_violations);
    rep.metric("first_loss", st.first_loss);
    rep.check("no losses", st.losses == 0, format!("{} of {} lost", st.losses, st.rounds));

    if run.strategy == DjStrategyName::Quantum {
        let df = (1usize << run.m) - 1;
        let limit = chi_square_3sigma(df);
        let chi_a = chi_square_uniform(&st.alice_outputs);
        let chi_b = chi_square_uniform(&st.bob_outputs);
        rep.metric("alice_chi_square", chi_a);
        rep.metric("bob_chi_square", chi_b);
        rep.metric("chi_square_3sigma", limit);
        // Expected count of at least 5 per cell before the test means anything.
        if st.rounds >= 5 << run.m {
            rep.check(
                "output marginals uniform at 3σ",
                chi_a <= limit && chi_b <= limit,
                format!("χ² {chi_a:.2}, {chi_b:.2} vs {limit:.2}"),
            );
        }
    }

    rep.columns(&["round", "x", "y", "a", "b", "promise_held", "won"]);
    for r in &report.records {
        rep.row(vec![
            json!(r.round_index),
            json!(r.x),
            json!(r.y),
            json!(r.a),
            json!(r.b),
            json!(r.promise_held),
            json!(r.won),
        ]);
    }
    Ok(rep)
}

pub fn game_chsh(mode: ChshMode, rounds: u64, seed: u64) -> Result<ExperimentReport> {
    let mode_name = match mode {
        ChshMode::Analytic => "analytic",
        ChshMode::Sample => "sample",
    };
    let angles = ChshAngles::default();
    let mut rep = ExperimentReport::new(
        "game-chsh",
        json!({ "mode": mode_name, "rounds": rounds, "angles": angles }),
        (mode == ChshMode::Sample).then_some(seed),
    );
    let classical = chsh_classical_max();
    let mut rng = RandomSource::new(seed);
    let est = chsh_quantum_value(&angles, mode, rounds, &mut rng)?;
    let tsirelson = 2.0 * SQRT_2;
    rep.metric("s", est.s);
    rep.metric("tsirelson_bound", tsirelson);
    rep.metric("classical_max", classical);
    rep.metric("gap", est.s - f64::from(classical));
    rep.columns(&["x", "y", "correlation", "rounds"]);
    for (i, e) in est.correlations.iter().enumerate() {
        rep.row(vec![json!(i >> 1), json!(i & 1), json!(e), json!(est.rounds_per_setting[i])]);
    }
    rep.check("classical maximum is 2", classical == 2, format!("{classical}"));
    match mode {
        ChshMode::Analytic => rep.check(
            "S equals 2√2",
            (est.s - tsirelson).abs() < 1e-9,
            format!("S = {:.10}", est.s),
        ),
        ChshMode::Sample => {
            // Each E has variance 1/2 per round at these angles, so S has
            // standard deviation sqrt(8/rounds).
            let tol = (4.0 * (8.0 / rounds as f64).sqrt()).max(0.02);
            rep.check(
                "S near 2√2",
                (est.s - tsirelson).abs() <= tol,
                format!("S = {:.4} within ±{tol:.4}", est.s),
            );
            rep.check(
                "S exceeds the classical bound by 0.5",
                est.s - 2.0 >= 0.5,
                format!("S - 2 = {:.4}", est.s - 2.0),
            );
        }
    }
    Ok(rep)
}

pub fn coloring(n: usize, colors: Option<usize>, budget: Duration) -> Result<ExperimentReport> {
    let k = colors.unwrap_or(n);
    let mut rep = ExperimentReport::new(
        "coloring",
        json!({ "n": n, "colors": k, "budget_secs": budget.as_secs_f64() }),
        None,
    );
    let out = find_coloring(n, k, budget)?;
    let status = match &out.result {
        ColoringSearch::Found(_) => "found",
        ColoringSearch::Refuted => "refuted",
        ColoringSearch::BudgetExhausted => "budget-exhausted",
    };
    rep.metric("result", status);
    rep.metric("nodes", out.nodes);
    match &out.result {
        ColoringSearch::Found(c) => {
            rep.metric("colors_used", c.num_colors_used());
            rep.check("colouring is proper", c.is_proper(), "no promise-distant pair shares a colour");
            if let Some((pairs, losses)) = exhaustive_coloring_play(c)? {
                rep.metric("promise_pairs", pairs);
                rep.check(
                    "induced strategy wins every promise pair",
                    losses == 0,
                    format!("{losses} losses over {pairs} pairs"),
                );
            }
            rep.columns(&["vertex", "bits", "color"]);
            for (v, col) in c.colors().iter().enumerate() {
                rep.row(vec![json!(v), json!(BitString::from_index(v, n)), json!(col)]);
            }
        }
        ColoringSearch::Refuted => {
            // Colourings with n colours exist for n ≤ 8.
            rep.check("search outcome", !(n <= 8 && k >= n), format!("no {k}-colouring exists"));
        }
        ColoringSearch::BudgetExhausted => {
            rep.check(
                "search outcome",
                n > 4,
                format!("no colouring within {:.1} s", budget.as_secs_f64()),
            );
        }
    }
    Ok(rep)
}

/// Plays the colouring strategy on every ordered promise pair. Skipped above
/// `n = 8`, where there are too many pairs to enumerate.
fn exhaustive_coloring_play(c: &Coloring) -> Result<Option<(u64, u64)>> {
    if c.n() > 8 {
        return Ok(None);
    }
    let game = DjGame::new(c.n().trailing_zeros() as usize)?;
    let pairs = game.promise_pairs();
    let mut losses = 0u64;
    for (x, y) in &pairs {
        let a = coloring_strategy(c, x)?;
        let b = coloring_strategy(c, y)?;
        losses += u64::from(!game.winning(x, y, &a, &b));
    }
    Ok(Some((pairs.len() as u64, losses)))
}
