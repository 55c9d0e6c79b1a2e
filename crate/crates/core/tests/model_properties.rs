mod common;

use common::{gnp_sequence, random_broadcast, random_state, seeded_state};
use dyngossip::adversary::StrongAdversary;
use dyngossip::harness::{generate_sequence, GeneratorSpec, Model};
use dyngossip::model::io::{
    matrix_from_json, matrix_to_json, read_metrics_csv, schedule_from_json, schedule_to_json,
    sequence_from_json, sequence_to_json, write_metrics_csv,
};
use dyngossip::model::{
    apply_round, missing_count, new_distribution, run_online, run_schedule, CommGraph,
    DistributionSpec, Extend, GraphSequence, Schedule, TokenId, Transcript,
};
use dyngossip::online::{flood_token, Strategy, StrategyKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounds_only_add_tokens(n in 2usize..16, k in 1usize..10, p in 0.0f64..1.0, seed in any::<u64>()) {
        let seq = gnp_sequence(n, 0.3, seed);
        let mut state = random_state(n, k, p, seed);
        for round in 1..=5 {
            let before = state.clone();
            let bcast = random_broadcast(&state, seed.wrapping_add(round as u64));
            let g = seq.graph(round).unwrap();
            let m = apply_round(&mut state, &bcast, &g, round).unwrap();
            prop_assert!(before.is_subset_of(&state));
            prop_assert_eq!(m.token_gains, missing_count(&before) - missing_count(&state));
            prop_assert_eq!(m.missing_total, missing_count(&state));
            prop_assert!(m.useful_exchanges >= m.token_gains);
            let per_node: usize = m.per_node_missing.iter().sum();
            prop_assert_eq!(per_node, m.missing_total);
        }
    }

    #[test]
    fn one_token_floods_within_n_minus_one(n in 2usize..40, p in 0.0f64..0.3, seed in any::<u64>(), src in any::<usize>()) {
        let seq = gnp_sequence(n, p, seed);
        let src = src % n;
        let mut rows = vec![vec![]; n];
        rows[src].push(TokenId(0));
        let init = dyngossip::TokenMatrix::from_holders(n, 1, &rows).unwrap();
        let mut sched = Schedule::new();
        let mut state = init.clone();
        let mut round = 1;
        while !state.is_complete() {
            let b = flood_token(&state, TokenId(0));
            apply_round(&mut state, &b, &seq.graph(round).unwrap(), round).unwrap();
            sched.push(b);
            round += 1;
        }
        prop_assert!(sched.len() < n);
        let (end, _) = run_schedule(&init, &seq, &sched).unwrap();
        prop_assert!(end.is_complete());
    }

    #[test]
    fn distributions_are_deterministic(n in 1usize..30, k in 1usize..30, p in 0.0f64..1.0, seed in any::<u64>()) {
        let spec = DistributionSpec::Bernoulli(p);
        prop_assert_eq!(new_distribution(n, k, &spec, seed).unwrap(), new_distribution(n, k, &spec, seed).unwrap());
        if k <= n {
            let a = new_distribution(n, k, &DistributionSpec::OneTokenPerNode, seed).unwrap();
            prop_assert_eq!(&a, &new_distribution(n, k, &DistributionSpec::OneTokenPerNode, seed).unwrap());
            for t in a.tokens() {
                prop_assert_eq!(a.holder_count(t), 1);
            }
            prop_assert!(a.nodes().all(|v| a.held_count(v) <= 1));
        }
    }

    #[test]
    fn generated_graphs_are_connected(n in 1usize..40, p in 0.0f64..0.5, seed in any::<u64>()) {
        let seq = generate_sequence(&GeneratorSpec::gnp(n, p, seed), 20).unwrap();
        let again = generate_sequence(&GeneratorSpec::gnp(n, p, seed), 20).unwrap();
        prop_assert_eq!(&seq, &again);
        for r in 1..=20 {
            prop_assert!(seq.graph(r).unwrap().is_connected());
        }
    }

    #[test]
    fn artifacts_round_trip(n in 1usize..12, k in 1usize..8, p in 0.0f64..1.0, seed in any::<u64>()) {
        let seq = generate_sequence(&GeneratorSpec::gnp(n, 0.2, seed), 6).unwrap();
        prop_assert_eq!(&sequence_from_json(&sequence_to_json(&seq).unwrap()).unwrap(), &seq);

        let init = seeded_state(n, k, p, seed);
        prop_assert_eq!(&matrix_from_json(&matrix_to_json(&init).unwrap()).unwrap(), &init);

        let mut sched = Schedule::new();
        let mut state = init.clone();
        for r in 1..=6 {
            let b = random_broadcast(&state, seed ^ r as u64);
            apply_round(&mut state, &b, &seq.graph(r).unwrap(), r).unwrap();
            sched.push(b);
        }
        prop_assert_eq!(&schedule_from_json(&schedule_to_json(&sched).unwrap(), n).unwrap(), &sched);

        let mut strategy = Strategy::new(StrategyKind::UniformRandom, n, seed);
        let transcript = run_online(&mut strategy, &mut StrongAdversary::new(), &init, 10).unwrap();
        let json = serde_json::to_string(&transcript).unwrap();
        let back: Transcript = serde_json::from_str(&json).unwrap();
        prop_assert!(back.verify_replay().unwrap());
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);

        let mut csv = Vec::new();
        write_metrics_csv(&mut csv, transcript.metrics()).unwrap();
        let rows = read_metrics_csv(csv.as_slice()).unwrap();
        prop_assert_eq!(rows.len(), transcript.rounds_used());
        for (row, m) in rows.iter().zip(transcript.metrics()) {
            prop_assert_eq!(row.useful_exchanges, m.useful_exchanges);
            prop_assert_eq!(row.missing_total, m.missing_total);
        }
    }
}

#[test]
fn gnp_sparse_five_hundred_rounds_connected() {
    let seq = generate_sequence(&GeneratorSpec::gnp(64, 0.1, 1), 500).unwrap();
    assert_eq!(seq.recorded_len(), Some(500));
    for r in 1..=500 {
        assert!(seq.graph(r).unwrap().is_connected(), "round {r}");
    }
    assert!(seq.graph(501).is_err());
}

#[test]
fn static_and_rotating_models() {
    let path = CommGraph::path(5);
    let seq = generate_sequence(
        &GeneratorSpec {
            model: Model::Static {
                graph: path.clone(),
            },
            n: 5,
            seed: 0,
        },
        4,
    )
    .unwrap();
    for r in 1..=4 {
        assert_eq!(*seq.graph(r).unwrap(), path);
    }
    let empty = generate_sequence(&GeneratorSpec::gnp(5, 0.5, 0), 0).unwrap();
    assert_eq!(empty.recorded_len(), Some(0));

    let star = generate_sequence(
        &GeneratorSpec {
            model: Model::StarRotating,
            n: 4,
            seed: 0,
        },
        4,
    )
    .unwrap();
    let hubs: Vec<usize> = (1..=4)
        .map(|r| {
            let g = star.graph(r).unwrap();
            (0..4)
                .find(|&v| g.neighbors(dyngossip::NodeId(v)).len() == 3)
                .unwrap()
        })
        .collect();
    assert_eq!(hubs, vec![1, 2, 3, 0]);
}

#[test]
fn cyclic_extension_wraps() {
    let a = CommGraph::path(3);
    let b = CommGraph::star(3, dyngossip::NodeId(0));
    let seq = GraphSequence::recorded(3, vec![a.clone(), b.clone()], Extend::Cycle).unwrap();
    assert_eq!(*seq.graph(3).unwrap(), a);
    assert_eq!(*seq.graph(4).unwrap(), b);
}

#[test]
fn bernoulli_three_quarters_density() {
    let m = new_distribution(64, 64, &DistributionSpec::Bernoulli(0.75), 7).unwrap();
    let missing = missing_count(&m) as f64;
    assert!((missing - 1024.0).abs() <= 102.4, "{missing}");
}
