use std::collections::BTreeSet;

use itertools::Itertools;
use mtagd_core::connector::induced_components;
use mtagd_core::designer::{mtag_violations, DesignOptions};
use mtagd_core::ingest::Direction;
use mtagd_core::io::{load_mtag, load_mtkg, save_mtag, save_mtkg};
use mtagd_core::*;
use proptest::prelude::*;

fn task(i: usize) -> String {
    format!("t{i:02}")
}

/// Graph over `n` tasks; each listed pair becomes uni (either way) or bi.
fn graph_strategy(max_tasks: usize) -> impl Strategy<Value = Mtkg> {
    (1..=max_tasks).prop_flat_map(|n| {
        let weights = (1u32..6).prop_flat_map(|t| (Just(t), 0..=t, 0..=t));
        let edge = (0..n, 0..n, 0u8..3, weights.clone(), weights);
        proptest::collection::vec(edge, 0..(n * 2)).prop_map(move |edges| {
            let mut b = Mtkg::builder();
            for i in 0..n {
                b = b.task(&task(i));
            }
            for (i, j, kind, (t1, e1, d1), (t2, e2, d2)) in edges {
                if i == j {
                    continue;
                }
                let (a, c) = (task(i), task(j));
                let fwd = EdgeWeights::new(t1, e1, d1);
                let back = EdgeWeights::new(t2, e2, d2);
                b = match kind {
                    0 => b.uni(&a, &c, fwd),
                    1 => b.uni(&c, &a, fwd),
                    _ => b.uni(&a, &c, fwd).uni(&c, &a, back),
                };
            }
            b.build().expect("generated graphs are valid")
        })
    })
}

fn graph_and_terminals(
    max_tasks: usize,
    max_terminals: usize,
) -> impl Strategy<Value = (Mtkg, BTreeSet<TaskId>)> {
    graph_strategy(max_tasks).prop_flat_map(move |g| {
        let ids: Vec<TaskId> = g.task_ids().cloned().collect();
        let k = ids.len().min(max_terminals);
        (Just(g), proptest::sample::subsequence(ids, 1..=k))
            .prop_map(|(g, t)| (g, t.into_iter().collect()))
    })
}

fn record_strategy() -> impl Strategy<Value = Vec<PaperRecord>> {
    let assertion = (
        0..5usize,
        1..5usize,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    );
    let record = proptest::collection::vec(assertion, 1..4);
    proptest::collection::vec(record, 0..8).prop_map(|records| {
        records
            .into_iter()
            .enumerate()
            .filter_map(|(k, list)| {
                let assertions: Vec<TransferAssertion> = list
                    .into_iter()
                    .map(|(from, step, bi, e, d)| TransferAssertion {
                        from_task: TaskId::new(task(from)).unwrap(),
                        to_task: TaskId::new(task((from + step) % 5)).unwrap(),
                        direction: if bi { Direction::Bi } else { Direction::Uni },
                        encoder_shared: e,
                        decoder_shared: d && bi,
                    })
                    .unique_by(|a| (a.from_task.clone(), a.to_task.clone(), a.direction))
                    .collect();
                PaperRecord::new(format!("paper{k}"), assertions).ok()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bidirectionality_is_symmetric(g in graph_strategy(6)) {
        for (a, b) in g.task_ids().collect::<Vec<_>>().into_iter().tuple_combinations() {
            prop_assert_eq!(is_bidirectional(&g, a, b).unwrap(), is_bidirectional(&g, b, a).unwrap());
        }
    }

    #[test]
    fn undirected_view_size(g in graph_strategy(6)) {
        let s = stats(&g);
        let view = undirected_view(&g);
        prop_assert!(view.len() <= g.edge_count());
        prop_assert_eq!(view.len() == g.edge_count(), s.bi_pairs == 0);
        prop_assert_eq!(s.directed_edges, 2 * s.bi_pairs + s.uni_edges);
    }

    #[test]
    fn validation_is_pure(g in graph_strategy(6)) {
        let first = validate_mtkg(&g);
        prop_assert_eq!(&first, &validate_mtkg(&g));
        prop_assert!(first.is_empty());
    }

    #[test]
    fn aggregation_is_order_invariant(
        (records, shuffled) in record_strategy().prop_flat_map(|r| (Just(r.clone()), Just(r).prop_shuffle()))
    ) {
        let g = aggregate(&records).unwrap();
        prop_assert_eq!(&g, &aggregate(&shuffled).unwrap());
        prop_assert!(validate_mtkg(&g).is_empty());
    }

    #[test]
    fn aggregation_is_monotone(records in record_strategy()) {
        if records.is_empty() {
            return Ok(());
        }
        let rest = &records[..records.len() - 1];
        let before = aggregate(rest).unwrap();
        let after = aggregate(&records).unwrap();
        for (key, w) in before.edges() {
            let w2 = after.edges().get(key);
            prop_assert!(w2.is_some());
            let w2 = w2.unwrap();
            prop_assert!(w2.w_trans >= w.w_trans && w2.w_share_e >= w.w_share_e && w2.w_share_d >= w.w_share_d);
        }
        prop_assert!(after.edge_count() >= before.edge_count());
    }

    #[test]
    fn bi_only_records_give_symmetric_weights(records in record_strategy()) {
        let bi_only: Vec<PaperRecord> = records
            .iter()
            .filter_map(|r| {
                let a: Vec<_> = r.assertions().iter().filter(|a| a.direction == Direction::Bi).cloned().collect();
                PaperRecord::new(r.paper_key(), a).ok()
            })
            .collect();
        let g = aggregate(&bi_only).unwrap();
        for ((a, b), w) in g.edges() {
            prop_assert_eq!(Some(w), g.edge(b, a));
        }
    }

    #[test]
    fn exact_matches_oracle((g, t) in graph_and_terminals(9, 4)) {
        let exact = connect_exact(&g, &t, None).unwrap();
        let oracle = brute_force_connect(&g, &t).unwrap();
        prop_assert_eq!(
            (&exact.t_add, exact.coverage, &exact.components),
            (&oracle.t_add, oracle.coverage, &oracle.components)
        );
    }

    #[test]
    fn exact_plans_are_minimal((g, t) in graph_and_terminals(9, 4)) {
        let plan = connect_exact(&g, &t, None).unwrap();
        let added: Vec<&TaskId> = plan.t_add.iter().collect();
        for k in 0..added.len() {
            for subset in added.iter().copied().combinations(k) {
                let sub: BTreeSet<TaskId> = subset.into_iter().cloned().collect();
                let cov = ConnectionPlan::from_selection(&g, t.clone(), sub, true).coverage;
                prop_assert!(cov < plan.coverage);
            }
        }
    }

    #[test]
    fn greedy_is_dominated_by_exact((g, t) in graph_and_terminals(9, 4)) {
        let exact = connect_exact(&g, &t, None).unwrap();
        let greedy = connect_greedy(&g, &t).unwrap();
        let empty = ConnectionPlan::from_selection(&g, t.clone(), BTreeSet::new(), false);
        prop_assert!(greedy.coverage >= empty.coverage);
        prop_assert_eq!(greedy.coverage, exact.coverage);
        prop_assert!(exact.t_add.len() <= greedy.t_add.len());
        greedy.check(&g).unwrap();
    }

    #[test]
    fn adding_edges_never_lowers_coverage((g, t) in graph_and_terminals(8, 4), extra in (0usize..8, 0usize..8)) {
        let base = connect_exact(&g, &t, None).unwrap().coverage;
        let ids: Vec<TaskId> = g.task_ids().cloned().collect();
        let (a, b) = (&ids[extra.0 % ids.len()], &ids[extra.1 % ids.len()]);
        if a == b || g.has_edge(a, b) {
            return Ok(());
        }
        let mut edges = g.edges().clone();
        edges.insert((a.clone(), b.clone()), EdgeWeights::new(1, 0, 0));
        let bigger = Mtkg::try_from_parts(g.tasks().clone(), edges).unwrap();
        prop_assert!(connect_exact(&bigger, &t, None).unwrap().coverage >= base);
    }

    #[test]
    fn connection_is_deterministic((g, t) in graph_and_terminals(8, 4)) {
        prop_assert_eq!(connect_exact(&g, &t, None).unwrap(), connect_exact(&g, &t, None).unwrap());
        prop_assert_eq!(connect_greedy(&g, &t).unwrap(), connect_greedy(&g, &t).unwrap());
    }

    #[test]
    fn design_structure((g, t) in graph_and_terminals(8, 4)) {
        let plan = connect_exact(&g, &t, None).unwrap();
        let warn = DesignOptions { cycle_mode: CycleMode::Warn, ..DesignOptions::default() };
        let (arch, report) = design(&g, &plan, &warn).unwrap();
        prop_assert!(mtag_violations(&arch).is_empty());
        let nodes = plan.nodes();
        // direction soundness
        for a in &nodes {
            for b in &nodes {
                if a == b {
                    continue;
                }
                let pass = Pass::new(ModuleRef::decoder(a), ModuleRef::decoder(b));
                prop_assert_eq!(arch.r_pass().contains(&pass), g.has_edge(a, b) && !g.has_edge(b, a));
                let dshare = SharePair::new(ModuleRef::decoder(a), ModuleRef::decoder(b));
                if arch.r_share().contains(&dshare) {
                    prop_assert!(is_bidirectional(&g, a, b).unwrap());
                }
            }
        }
        // every shared module is in exactly one group
        for p in arch.r_share() {
            let holding = report.sharing_groups.iter().filter(|grp| grp.contains(p.first()) && grp.contains(p.second())).count();
            prop_assert_eq!(holding, 1);
        }
        let strict = design(&g, &plan, &DesignOptions::default());
        match (arch.decoder_cycle(), strict) {
            (Some(cycle), Err(DesignError::DecoderCycle(c))) => prop_assert_eq!(cycle, c),
            (None, Ok((same, _))) => prop_assert_eq!(same, arch),
            (c, r) => prop_assert!(false, "cycle {:?} vs {:?}", c, r.err()),
        }
    }

    #[test]
    fn scaling_weights_changes_nothing((g, t) in graph_and_terminals(7, 4), k in 2u32..8) {
        let plan = connect_exact(&g, &t, None).unwrap();
        let scaled = g.scaled(k);
        let opts = DesignOptions { cycle_mode: CycleMode::Warn, ..DesignOptions::default() };
        for policy in [SharePolicy::Any, SharePolicy::All, SharePolicy::Sum] {
            let opts = DesignOptions { policy, ..opts };
            let (a1, r1) = design(&g, &plan, &opts).unwrap();
            let (a2, r2) = design(&scaled, &plan, &opts).unwrap();
            prop_assert_eq!(a1.r_share(), a2.r_share());
            prop_assert_eq!(r1.classification, r2.classification);
        }
    }

    #[test]
    fn documents_round_trip(g in graph_strategy(7)) {
        let doc = save_mtkg(&g);
        let back = load_mtkg(&doc).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(save_mtkg(&back), doc);
    }

    #[test]
    fn architecture_documents_round_trip((g, t) in graph_and_terminals(7, 3)) {
        let plan = connect_exact(&g, &t, None).unwrap();
        let warn = DesignOptions { cycle_mode: CycleMode::Warn, ..DesignOptions::default() };
        let (arch, report) = design(&g, &plan, &warn).unwrap();
        let doc = save_mtag(&arch, Some(&report));
        let back = load_mtag(&doc).unwrap();
        prop_assert_eq!(&back.mtag, &arch);
        prop_assert_eq!(back.report.as_ref(), Some(&report));
        prop_assert_eq!(save_mtag(&back.mtag, back.report.as_ref()), doc);
    }
}

#[test]
fn all_bi_full_sharing_graph_is_joint_training() {
    let w = EdgeWeights::new(3, 3, 3);
    let g = Mtkg::builder()
        .bi("A", "B", w)
        .bi("B", "C", w)
        .bi("A", "C", w)
        .build()
        .unwrap();
    let t: BTreeSet<TaskId> = g.task_ids().cloned().collect();
    let plan = connect_exact(&g, &t, None).unwrap();
    let (_, report) = design(&g, &plan, &DesignOptions::default()).unwrap();
    assert_eq!(report.classification, Classification::JointTraining);
}

#[test]
fn uni_chain_with_encoder_sharing_is_multi_step() {
    let w = EdgeWeights::new(2, 2, 0);
    let g = Mtkg::builder()
        .uni("A", "B", w)
        .uni("B", "C", w)
        .uni("A", "C", w)
        .build()
        .unwrap();
    let t: BTreeSet<TaskId> = g.task_ids().cloned().collect();
    let plan = connect_exact(&g, &t, None).unwrap();
    let (_, report) = design(&g, &plan, &DesignOptions::default()).unwrap();
    assert_eq!(report.classification, Classification::MultiStep);
}

#[test]
fn design_output_is_byte_stable() {
    let g = build_seed_dataset();
    let t: BTreeSet<TaskId> = ["NER", "CoreferenceResolution", "PathScoring"]
        .iter()
        .map(|s| TaskId::new(*s).unwrap())
        .collect();
    let run = || {
        let plan = connect_exact(&g, &t, None).unwrap();
        let (arch, report) = design(&g, &plan, &DesignOptions::default()).unwrap();
        save_mtag(&arch, Some(&report))
    };
    let first = run();
    assert_eq!(first, run());
    let plan = connect_exact(&g, &t, None).unwrap();
    assert_eq!(
        plan.t_add,
        ["EntityMentionDetection", "GraphReasoning"]
            .iter()
            .map(|s| TaskId::new(*s).unwrap())
            .collect()
    );
}

#[test]
fn induced_components_of_golden_subsets() {
    let g = fixtures::golden_mtkg();
    let set = |l: &[&str]| {
        l.iter()
            .map(|s| TaskId::new(*s).unwrap())
            .collect::<BTreeSet<_>>()
    };
    let comps = induced_components(&g, &set(&["T1", "T2", "T3", "T4"]));
    assert_eq!(comps, vec![set(&["T1", "T2"]), set(&["T3", "T4"])]);
}
