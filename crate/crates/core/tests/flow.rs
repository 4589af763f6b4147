mod common;

use common::families;
use ppot_core::flow::{
    cut_lower_bound, decompose_paths, edge_marginal_deviation, empirical_lower_bound,
    first_exit_indices, orient_flow, parallel_sum,
};
use ppot_core::graph::{
    ball_profile, build_lattice, build_radial_model, build_tree, GeneratorLimits,
};
use ppot_core::green::{compute_l, solve_green, SolverOptions};
use ppot_core::{ExecMode, ExponentParams};

#[test]
fn current_is_conserved_and_acyclic_everywhere() {
    for (name, g) in families() {
        let prof = ball_profile(&g);
        for p in [1.5, 2.0, 3.0] {
            for radius in 1..=prof.r_max().min(4) {
                let green =
                    solve_green(&g, &prof, radius, 0, p, &SolverOptions::default()).unwrap();
                let flow = orient_flow(&g, &prof, &green, None).unwrap();
                assert!(flow.max_divergence <= flow.divergence_tolerance, "{name}");
                assert!(flow
                    .edges
                    .iter()
                    .all(|e| e.head != flow.source && e.tail != flow.sink));
                let pos = |x| flow.topological_order.iter().position(|&y| y == x).unwrap();
                assert!(
                    flow.edges.iter().all(|e| pos(e.tail) < pos(e.head)),
                    "{name}"
                );
                // unit outflow at the source, recomputed here
                let out: f64 = flow
                    .edges
                    .iter()
                    .filter(|e| e.tail == 0)
                    .map(|e| e.theta)
                    .sum();
                assert!((out - 1.0).abs() < 1e-8, "{name} p={p} R={radius}: {out}");
            }
        }
    }
}

#[test]
fn path_measure_reproduces_the_current() {
    for (name, g) in families() {
        let prof = ball_profile(&g);
        for p in [2.0, 3.0] {
            let radius = prof.r_max().min(4);
            let green = solve_green(&g, &prof, radius, 0, p, &SolverOptions::default()).unwrap();
            let flow = orient_flow(&g, &prof, &green, None).unwrap();
            let measure = decompose_paths(&flow).unwrap();
            let (dev, foreign) = edge_marginal_deviation(&flow, &measure);
            assert!(dev <= 1e-9, "{name} p={p}: {dev:e}");
            assert_eq!(foreign, 0);
            assert!(measure.paths.len() <= flow.edges.len());
            assert!((measure.total_probability() - 1.0).abs() <= 1e-10, "{name}");
            for path in &measure.paths {
                assert_eq!(path.vertices.first(), Some(&0));
                assert_eq!(path.vertices.last(), Some(&g.vertex_count()));
            }
        }
    }
}

#[test]
fn tree_paths_are_uniform() {
    // binary tree, R = 3: the two edges below each of the 8 leaves of B_3
    // merge into one edge to the sink, carrying 1/8
    let g = build_tree(2, 6, GeneratorLimits::default()).unwrap();
    let prof = ball_profile(&g);
    let green = solve_green(&g, &prof, 3, 0, 2.5, &SolverOptions::default()).unwrap();
    let measure = decompose_paths(&orient_flow(&g, &prof, &green, None).unwrap()).unwrap();
    assert_eq!(measure.paths.len(), 8);
    for path in &measure.paths {
        assert!((path.probability - 1.0 / 8.0).abs() < 1e-10);
        assert_eq!(path.vertices.len(), 5);
    }
}

#[test]
fn chain_holds_on_line_and_tree() {
    let lim = GeneratorLimits::default();
    for g in [
        build_lattice(1, 8, lim).unwrap(),
        build_tree(2, 6, lim).unwrap(),
    ] {
        let prof = ball_profile(&g);
        for p in [2.0, 3.0] {
            let params = ExponentParams::new(p, p + 1.0).unwrap();
            for radius in [3, 4] {
                let green =
                    solve_green(&g, &prof, radius, 0, p, &SolverOptions::default()).unwrap();
                let flow = orient_flow(&g, &prof, &green, None).unwrap();
                let measure = decompose_paths(&flow).unwrap();
                let rep = empirical_lower_bound(
                    &g,
                    &prof,
                    &green,
                    &flow,
                    &measure,
                    &params,
                    ExecMode::Parallel,
                )
                .unwrap();
                assert!(rep.all_hold(), "{:?}", rep.first_failure());
                let l = compute_l(&g, &green, params.sigma).unwrap();
                assert!((rep.l_r - l).abs() <= 1e-12 * l);
                assert!(cut_lower_bound(&prof, &params, radius) <= l);
            }
        }
    }
}

#[test]
fn parallel_sum_closed_forms() {
    // r = 1 is the resistor rule; equal values divide by n^r
    let r1 = parallel_sum(&[2.0, 3.0, 6.0], 1.0).unwrap();
    assert!((r1 - 1.0).abs() < 1e-15);
    let eq = parallel_sum(&[5.0; 4], 2.0).unwrap();
    assert!((eq - 5.0 / 16.0).abs() < 1e-15);
}

#[test]
fn first_exits_on_a_line_path() {
    let g = build_lattice(1, 8, GeneratorLimits::default()).unwrap();
    let prof = ball_profile(&g);
    let green = solve_green(&g, &prof, 3, 0, 2.0, &SolverOptions::default()).unwrap();
    let measure = decompose_paths(&orient_flow(&g, &prof, &green, None).unwrap()).unwrap();
    for path in &measure.paths {
        let exits = first_exit_indices(&path.vertices, &prof, 3, g.vertex_count(), 1).unwrap();
        // monotone path: B_k is left along edge k
        assert_eq!(exits.tau, 1);
        assert_eq!(exits.exits, vec![1, 2, 3]);
    }
}

#[test]
fn tiny_drops_with_real_current_are_kept() {
    // a weak root edge makes max drop huge, so the strong edges below fall
    // under the relative drop threshold while carrying all the current
    let g = build_radial_model(
        &[1, 1, 3, 6],
        &[0.04269187030104964, 798.1435804220621, 1.2416638511164744],
        GeneratorLimits::default(),
    )
    .unwrap();
    let prof = ball_profile(&g);
    let green = solve_green(
        &g,
        &prof,
        1,
        0,
        1.382412038083396,
        &SolverOptions::default(),
    )
    .unwrap();
    let flow = orient_flow(&g, &prof, &green, None).unwrap();
    assert_eq!(flow.discarded, 0);
    let measure = decompose_paths(&flow).unwrap();
    assert!((measure.total_probability() - 1.0).abs() <= 1e-10);
}

#[test]
fn strong_weights_still_give_a_tight_residual() {
    // drops of 5e-7 next to g(o) = 21 at p = 1.3 need ε below 1e-10
    let g = build_radial_model(
        &[1, 4, 5],
        &[0.1, 9.737969833305556],
        GeneratorLimits::default(),
    )
    .unwrap();
    let prof = ball_profile(&g);
    let green = solve_green(&g, &prof, 1, 0, 1.3, &SolverOptions::default()).unwrap();
    assert!(green.residual <= 1e-12, "{:e}", green.residual);
    assert!(green.report.eps_schedule.len() > 3);
    let measure = decompose_paths(&orient_flow(&g, &prof, &green, None).unwrap()).unwrap();
    assert!((measure.total_probability() - 1.0).abs() <= 1e-10);
}

#[test]
fn loose_green_functions_are_rejected() {
    let g = build_tree(2, 4, GeneratorLimits::default()).unwrap();
    let prof = ball_profile(&g);
    let mut green = solve_green(&g, &prof, 2, 0, 2.0, &SolverOptions::default()).unwrap();
    green.residual = 1e-6;
    assert!(matches!(
        orient_flow(&g, &prof, &green, None),
        Err(ppot_core::Error::Precondition(_))
    ));
}
