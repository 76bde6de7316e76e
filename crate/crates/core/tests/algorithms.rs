use telepathy_core::algorithms::*;
use telepathy_core::oracles::{random_promised_oracle, BooleanOracle, OracleClass};
use telepathy_core::RandomSource;

fn odd_semiprimes_below(limit: u64) -> Vec<(u64, u64, u64)> {
    let primes: Vec<u64> = (3..limit)
        .filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .collect();
    let mut out = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i + 1..] {
            if p * q < limit {
                out.push((p * q, p, q));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn semiprime_enumeration() {
    let all = odd_semiprimes_below(200);
    assert_eq!(all.len(), 32);
    assert_eq!(all[0], (15, 3, 5));
    assert_eq!(all.last().unwrap(), &(187, 11, 17));
}

#[test]
fn factors_every_small_semiprime() {
    for (n, p, q) in odd_semiprimes_below(200) {
        for seed in 0..10 {
            let mut rng = RandomSource::new(seed);
            let ((a, b), history) = factor_semiprime(n, &mut rng, 64).unwrap();
            assert_eq!((a, b), (p, q), "N={n} seed={seed}");
            assert!(history.len() <= 64);
        }
    }
}

#[test]
fn original_conclusive_verdicts_never_wrong() {
    for t in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
        let f = BooleanOracle::from_table(t.to_vec()).unwrap();
        let mut inconclusive = 0u32;
        for seed in 0..10_000u64 {
            let mut rng = RandomSource::new(seed);
            let out = deutsch_original(&f, &mut rng).unwrap();
            assert_eq!(out.oracle_queries, 1);
            match out.verdict {
                Verdict::Inconclusive => inconclusive += 1,
                v => assert_eq!(v, Verdict::from(f.classify())),
            }
        }
        let freq = inconclusive as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "{t:?}: {freq}");
    }
}

#[test]
fn final_state_lies_in_its_plane() {
    let planes = plane_pair();
    for t in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
        let f = BooleanOracle::from_table(t.to_vec()).unwrap();
        let fin = deutsch_final_state(&mut telepathy_core::CountingOracle::new(f.clone())).unwrap();
        let (own, other) = match f.classify() {
            OracleClass::Constant => (&planes.constant_basis, &planes.balanced_basis),
            _ => (&planes.balanced_basis, &planes.constant_basis),
        };
        assert!((fin.probability_in_subspace(own).unwrap() - 1.0).abs() < 1e-12);
        assert!((fin.probability_in_subspace(other).unwrap() - 0.5).abs() < 1e-12);
        let ray = fin.probability_in_subspace(std::slice::from_ref(&planes.intersection_ray)).unwrap();
        assert!((ray - 0.5).abs() < 1e-12);
    }
}

#[test]
fn deutsch_jozsa_random_oracles() {
    let mut rng = RandomSource::new(2718);
    for n in 3..=7 {
        for i in 0..1000 {
            let class = if i % 2 == 0 { OracleClass::Constant } else { OracleClass::Balanced };
            let f = random_promised_oracle(n, class, &mut rng).unwrap();
            let out = deutsch_jozsa(&f).unwrap();
            assert_eq!(out.verdict, Verdict::from(class));
            assert_eq!(out.oracle_queries, 1);
        }
    }
}

#[test]
fn reduction_records() {
    let red = reduce_with_base(7, 15).unwrap();
    assert_eq!(red, PeriodReduction { n: 15, a: 7, r: 4, factors: Some((3, 5)) });
    let red = reduce_with_base(2, 21).unwrap();
    assert_eq!((red.r, red.factors), (6, Some((3, 7))));
}
