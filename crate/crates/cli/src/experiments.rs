//! Single-query algorithms, plane geometry and the factoring reduction.

use anyhow::{bail, Result};
use serde_json::json;
use telepathy_core::algorithms::{
    deutsch_cleve, deutsch_inconclusive_probability, deutsch_jozsa, deutsch_original,
    factor_semiprime, plane_pair, Verdict, MAX_DJ_ARITY,
};
use telepathy_core::oracles::random_promised_oracle;
use telepathy_core::{BooleanOracle, OracleClass, RandomSource};

use crate::report::ExperimentReport;
use crate::DeutschVariant;

/// Attempts allowed before `shor` gives up.
pub const SHOR_MAX_ATTEMPTS: u32 = 64;

pub fn deutsch(variant: DeutschVariant, runs: u64, seed: u64) -> Result<ExperimentReport> {
    let name = match variant {
        DeutschVariant::Original => "original",
        DeutschVariant::Cleve => "cleve",
    };
    let mut rep = ExperimentReport::new(
        "deutsch",
        json!({ "variant": name, "runs": runs }),
        Some(seed),
    );
    let oracles = BooleanOracle::all(1);
    let mut rng = RandomSource::new(seed);
    let (mut correct, mut wrong, mut inconclusive, mut max_queries) = (0u64, 0u64, 0u64, 0u64);
    rep.columns(&["run", "oracle", "class", "verdict", "queries", "correct"]);
    for i in 0..runs {
        let f = &oracles[(i % 4) as usize];
        let out = match variant {
            DeutschVariant::Original => deutsch_original(f, &mut rng)?,
            DeutschVariant::Cleve => deutsch_cleve(f)?,
        };
        let truth = Verdict::from(f.classify());
        let ok = out.verdict == truth;
        match out.verdict {
            Verdict::Inconclusive => inconclusive += 1,
            _ if ok => correct += 1,
            _ => wrong += 1,
        }
        max_queries = max_queries.max(out.oracle_queries);
        rep.row(vec![
            json!(i),
            json!(f.to_hex()),
            json!(f.classify()),
            json!(out.verdict),
            json!(out.oracle_queries),
            json!(ok),
        ]);
    }
    rep.metric("runs", runs);
    rep.metric("correct", correct);
    rep.metric("wrong", wrong);
    rep.metric("inconclusive", inconclusive);
    rep.metric("max_oracle_queries", max_queries);
    rep.check("no wrong verdicts", wrong == 0, format!("{wrong} wrong of {runs}"));
    rep.check(
        "one oracle query per run",
        runs == 0 || max_queries == 1,
        format!("max {max_queries}"),
    );
    match variant {
        DeutschVariant::Cleve => {
            rep.check(
                "never inconclusive",
                inconclusive == 0,
                format!("{inconclusive} inconclusive"),
            );
        }
        DeutschVariant::Original => {
            let analytic = oracles
                .iter()
                .map(deutsch_inconclusive_probability)
                .collect::<Result<Vec<_>, _>>()?;
            let worst = analytic.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max);
            rep.metric("analytic_inconclusive_probability", analytic[0]);
            rep.check(
                "analytic inconclusive probability is 1/2",
                worst < 1e-12,
                format!("max deviation {worst:.3e}"),
            );
            if runs > 0 {
                let rate = inconclusive as f64 / runs as f64;
                // ±0.02 at 10^4 runs; widened to 4σ for short runs.
                let tol = (4.0 * (0.25 / runs as f64).sqrt()).max(0.02);
                rep.metric("inconclusive_rate", rate);
                rep.check(
                    "empirical inconclusive rate near 1/2",
                    (rate - 0.5).abs() <= tol,
                    format!("{rate:.4} within ±{tol:.4}"),
                );
            }
        }
    }
    Ok(rep)
}

pub fn deutsch_jozsa_experiment(n: usize, trials: u64, seed: u64) -> Result<ExperimentReport> {
    if n == 0 || n > MAX_DJ_ARITY {
        bail!("--n must be in 1..={MAX_DJ_ARITY}");
    }
    let exhaustive = n <= 2;
    let mut rep = ExperimentReport::new(
        "deutsch-jozsa",
        json!({ "n": n, "trials": trials, "exhaustive": exhaustive }),
        Some(seed),
    );
    let oracles: Vec<BooleanOracle> = if exhaustive {
        BooleanOracle::all(n)
            .into_iter()
            .filter(|f| f.classify() != OracleClass::Neither)
            .collect()
    } else {
        let mut rng = RandomSource::new(seed);
        (0..trials)
            .map(|_| {
                let class = if rng.next_bit() == 0 {
                    OracleClass::Constant
                } else {
                    OracleClass::Balanced
                };
                random_promised_oracle(n, class, &mut rng)
            })
            .collect::<Result<_, _>>()?
    };
    rep.columns(&["trial", "oracle", "class", "verdict", "queries", "correct"]);
    let (mut wrong, mut max_queries, mut constant) = (0u64, 0u64, 0u64);
    for (i, f) in oracles.iter().enumerate() {
        let out = deutsch_jozsa(f)?;
        let class = f.classify();
        let ok = out.verdict == Verdict::from(class);
        wrong += u64::from(!ok);
        constant += u64::from(class == OracleClass::Constant);
        max_queries = max_queries.max(out.oracle_queries);
        rep.row(vec![
            json!(i),
            json!(f.to_hex()),
            json!(class),
            json!(out.verdict),
            json!(out.oracle_queries),
            json!(ok),
        ]);
    }
    let total = oracles.len() as u64;
    rep.metric("oracles", total);
    rep.metric("constant", constant);
    rep.metric("balanced", total - constant);
    rep.metric("wrong", wrong);
    rep.metric("max_oracle_queries", max_queries);
    rep.check("all verdicts correct", wrong == 0, format!("{wrong} wrong of {total}"));
    rep.check(
        "one oracle query each",
        total == 0 || max_queries == 1,
        format!("max {max_queries}"),
    );
    Ok(rep)
}

pub fn planes() -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("planes", json!({}), None);
    let r = plane_pair().report()?;
    rep.columns(&["quantity", "value", "expected", "deviation"]);
    let mut worst: f64 = 0.0;
    let mut add = |rep: &mut ExperimentReport, name: &str, value: f64, expected: f64| {
        let dev = (value - expected).abs();
        worst = worst.max(dev);
        rep.row(vec![json!(name), json!(value), json!(expected), json!(dev)]);
    };
    add(&mut rep, "<c1|c2>", r.c1_c2, 0.0);
    add(&mut rep, "<b1|b2>", r.b1_b2, 0.0);
    for (k, v) in r.c_b.iter().enumerate() {
        let name = format!("|<c{}|b{}>|", k / 2 + 1, k % 2 + 1);
        add(&mut rep, &name, v.abs(), 0.5);
    }
    for (name, v) in ["|<ray|c-plane>|", "|<ray|b-plane>|", "|<ray|0'0'>|"]
        .iter()
        .zip(r.ray_overlaps)
    {
        add(&mut rep, name, v, 1.0);
    }
    add(&mut rep, "prime-span deviation", r.prime_span_deviation, 0.0);
    rep.metric("max_deviation", worst);
    rep.metric("commutator_max", r.commutator_max);
    rep.check(
        "inner products and overlaps within 1e-12",
        worst < 1e-12,
        format!("max deviation {worst:.3e}"),
    );
    rep.check(
        "plane projectors commute",
        r.commutator_max < 1e-9,
        format!("max commutator entry {:.3e}", r.commutator_max),
    );
    Ok(rep)
}

pub fn shor(n: u64, seed: u64) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "shor",
        json!({ "N": n, "max_attempts": SHOR_MAX_ATTEMPTS }),
        Some(seed),
    );
    let mut rng = RandomSource::new(seed);
    let ((p, q), attempts) = factor_semiprime(n, &mut rng, SHOR_MAX_ATTEMPTS)?;
    rep.columns(&["attempt", "a", "period", "p", "q"]);
    for (i, a) in attempts.iter().enumerate() {
        rep.row(vec![
            json!(i),
            json!(a.a),
            json!(a.r),
            json!(a.factors.map(|f| f.0)),
            json!(a.factors.map(|f| f.1)),
        ]);
    }
    rep.metric("p", p);
    rep.metric("q", q);
    rep.metric("attempts", attempts.len());
    rep.check(
        "p·q = N with nontrivial factors",
        p * q == n && p > 1 && q > 1,
        format!("{p} × {q} = {}", p * q),
    );
    Ok(rep)
}
