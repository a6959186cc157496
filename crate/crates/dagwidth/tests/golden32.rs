//! Golden checks on the 32-vertex six-component showcase graph.

mod common;

use common::{clusters32, ids};
use dagwidth::cycles::{
    circumference_bounded, extend_to_maximal_cycle, find_cycle_containing, is_maximal_cycle,
    Circumference, Cycle,
};
use dagwidth::decomposition::{guards, validate};
use dagwidth::digraph::{reach, scc, VertexSet};
use dagwidth::game::{
    decompose, run_strategy, run_strategy_from, simulate_game, strategy_to_decomposition,
    RobberPolicy,
};

#[test]
fn circumference_is_four() {
    let d = clusters32();
    assert_eq!(circumference_bounded(&d, 6).unwrap(), Circumference::Exact(4));
}

#[test]
fn components_match_the_known_partition() {
    let d = clusters32();
    let cond = scc(&d);
    let expected: Vec<VertexSet> = vec![
        ids(&[1, 2]),
        ids(&[27, 28]),
        ids(&[5, 6]),
        ids(&[3, 4]),
        ids(&[7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18]),
        ids(&[19, 20, 21, 22, 23, 24, 25, 26, 29, 30, 31, 32]),
    ];
    let got: Vec<VertexSet> = cond
        .components
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    for want in &expected {
        assert!(got.contains(want), "missing component {want:?}");
    }
    assert_eq!(got.len(), expected.len());
    // The stored order must be topological: every arc goes forward.
    for &(i, j) in &cond.arcs {
        assert!(i < j, "component arc ({i},{j}) breaks the acyclic order");
    }
}

#[test]
fn territory_when_cops_hold_the_central_cycle() {
    let d = clusters32();
    let sources = ids(&[7]);
    let forbidden = ids(&[15, 16, 17, 18]);
    assert_eq!(reach(&d, &sources, &forbidden).unwrap(), ids(&[7, 8, 11, 12]));
}

#[test]
fn one_cop_guards_the_left_pocket() {
    let d = clusters32();
    assert!(guards(&d, &ids(&[15]), &ids(&[7, 8, 11, 12])));
    assert!(!guards(&d, &VertexSet::new(), &ids(&[7, 8, 11, 12])));
}

#[test]
fn maximal_cycles_in_the_central_component() {
    let d = clusters32();
    let s5 = d.induced(&ids(&[7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18]));

    let bridge = find_cycle_containing(&s5, &ids(&[12, 15]), 4).unwrap().unwrap();
    assert_eq!(bridge.vertex_set(), ids(&[12, 15]));
    assert!(is_maximal_cycle(&s5, &bridge, 4).unwrap());
    let extended = extend_to_maximal_cycle(&s5, &bridge, 4).unwrap();
    assert_eq!(extended.vertex_set(), ids(&[12, 15]));

    let pocket = find_cycle_containing(&s5, &ids(&[11, 12]), 4).unwrap().unwrap();
    assert_eq!(pocket.vertex_set(), ids(&[7, 8, 11, 12]));

    let hub = find_cycle_containing(&s5, &ids(&[15, 16, 17, 18]), 4).unwrap().unwrap();
    assert!(is_maximal_cycle(&s5, &hub, 4).unwrap());
}

#[test]
fn pursuit_of_the_central_component_from_the_hub() {
    let d = clusters32();
    let s5 = d.induced(&ids(&[7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18]));
    let start = Cycle::from_vertices(&s5, &ids(&[15, 16, 17, 18]).into_iter().collect::<Vec<_>>())
        .unwrap();
    let trace = run_strategy_from(&s5, 4, &start).unwrap();

    let root = trace.root();
    assert_eq!(root.bag, ids(&[15, 16, 17, 18]));
    assert_eq!(root.children.len(), 2);

    // Left branch: {12,15} then {7,8,11,12}; right branch mirrors it.
    let left = &trace.nodes[root.children[0]];
    assert_eq!(left.bag, ids(&[12, 15]));
    assert_eq!(left.children.len(), 1);
    assert_eq!(trace.nodes[left.children[0]].bag, ids(&[7, 8, 11, 12]));

    let right = &trace.nodes[root.children[1]];
    assert_eq!(right.bag, ids(&[13, 15]));
    assert_eq!(trace.nodes[right.children[0]].bag, ids(&[9, 10, 13, 14]));

    let dec = strategy_to_decomposition(&trace);
    assert!(validate(&s5, &dec).is_empty());
    assert_eq!(dec.width(), 4);
}

#[test]
fn pursuit_of_the_lower_component_runs_both_branches() {
    let d = clusters32();
    let s6 = d.induced(&ids(&[19, 20, 21, 22, 23, 24, 25, 26, 29, 30, 31, 32]));
    let trace = run_strategy(&s6, 4).unwrap();
    let root = trace.root();
    assert_eq!(root.bag, ids(&[19, 20, 23, 24]));
    assert_eq!(root.children.len(), 2);

    let chains: Vec<Vec<VertexSet>> = root
        .children
        .iter()
        .map(|&c| {
            let mut chain = Vec::new();
            let mut cur = c;
            loop {
                chain.push(trace.nodes[cur].bag.clone());
                match trace.nodes[cur].children.as_slice() {
                    [] => break,
                    [next] => cur = *next,
                    _ => panic!("expected a chain below the root"),
                }
            }
            chain
        })
        .collect();
    assert!(chains.contains(&vec![ids(&[20, 21]), ids(&[21, 22, 25, 26]), ids(&[25, 32]), ids(&[31, 32])]));
    assert!(chains.contains(&vec![ids(&[24, 29]), ids(&[29, 30])]));
}

#[test]
fn full_decomposition_contains_the_expected_bag_families() {
    let d = clusters32();
    let before = std::time::Instant::now();
    let out = decompose(&d, 4).unwrap();
    assert!(validate(&d, &out.decomposition).is_empty());
    assert_eq!(out.decomposition.width(), 4);

    let expected: Vec<VertexSet> = vec![
        // four small components
        ids(&[1, 2]),
        ids(&[3, 4]),
        ids(&[5, 6]),
        ids(&[27, 28]),
        // central component
        ids(&[15, 16, 17, 18]),
        ids(&[12, 15]),
        ids(&[7, 8, 11, 12]),
        ids(&[13, 15]),
        ids(&[9, 10, 13, 14]),
        // lower component
        ids(&[19, 20, 23, 24]),
        ids(&[24, 29]),
        ids(&[29, 30]),
        ids(&[20, 21]),
        ids(&[21, 22, 25, 26]),
        ids(&[25, 32]),
        ids(&[31, 32]),
    ];
    for bag in &expected {
        assert!(
            out.decomposition.bags().contains(bag),
            "expected bag {bag:?} missing from the decomposition"
        );
    }
    assert!(before.elapsed().as_secs_f64() < 1.0, "golden decomposition exceeded 1s");
}

#[test]
fn adversarial_simulation_on_the_showcase_graph() {
    let d = clusters32();
    let out = decompose(&d, 4).unwrap();
    let report = simulate_game(&d, &out.traces, RobberPolicy::Adversarial).unwrap();
    assert!(report.caught);
    assert!(report.robber_monotone);
    assert!(report.rounds <= 32);

    for seed in 0..5 {
        let r = simulate_game(&d, &out.traces, RobberPolicy::Random(seed)).unwrap();
        assert!(r.caught && r.robber_monotone);
    }
    let g = simulate_game(&d, &out.traces, RobberPolicy::GreedyLargestTerritory).unwrap();
    assert!(g.caught && g.robber_monotone);
}
