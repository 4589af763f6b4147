//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use ppot_core::graph::{build_lattice, build_radial_model, build_tree, GeneratorLimits};
use ppot_core::WeightedGraph;

/// `g_R(o)` on the one-dimensional lattice: each side carries half the unit
/// current across `R + 1` edges.
pub fn line_green_at_root(p: f64, radius: usize) -> f64 {
    (radius as f64 + 1.0) * 0.5f64.powf(1.0 / (p - 1.0))
}

/// `g_R(o)` on the binary tree: layer `k` has `2^k` edges each carrying `2^{−k}`.
pub fn binary_tree_green_at_root(p: f64, radius: usize) -> f64 {
    (1..=radius + 1)
        .map(|k| 2f64.powf(-(k as f64) / (p - 1.0)))
        .sum()
}

/// Graph distances from the root, by plain BFS over the edge list.
pub fn bfs_distances(g: &WeightedGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut dist = vec![usize::MAX; n];
    dist[g.root()] = 0;
    let mut queue = VecDeque::from([g.root()]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// `(W_n, b_n)` for every `n` up to the eccentricity, recomputed from scratch.
pub fn brute_force_profile(g: &WeightedGraph) -> (Vec<f64>, Vec<f64>) {
    let dist = bfs_distances(g);
    let ecc = *dist.iter().max().unwrap();
    let mut volumes = vec![0.0; ecc + 1];
    let mut cuts = vec![0.0; ecc + 1];
    for n in 0..=ecc {
        for e in g.edges() {
            let (a, b) = (dist[e.u] <= n, dist[e.v] <= n);
            if a {
                volumes[n] += e.weight;
            }
            if b {
                volumes[n] += e.weight;
            }
            if a != b {
                cuts[n] += e.weight;
            }
        }
    }
    (volumes, cuts)
}

/// Solves the p = 2 Dirichlet problem `Σ_y μ_xy (v(x) − v(y)) = δ_o(x)` on the
/// vertices with `dist ≤ radius`, `v = 0` elsewhere, by banded Cholesky in a
/// Cuthill–McKee ordering.
pub fn linear_green(g: &WeightedGraph, radius: usize) -> Vec<f64> {
    let dist = bfs_distances(g);
    let n = g.vertex_count();
    let inside = |x: usize| dist[x] <= radius;

    // start from a vertex of the outermost sphere so the levels stay narrow
    let start = (0..n)
        .filter(|&x| dist[x] == radius)
        .min()
        .unwrap_or(g.root());
    let mut pos = vec![usize::MAX; n];
    let mut order = Vec::new();
    pos[start] = 0;
    order.push(start);
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        let mut next: Vec<usize> = g
            .neighbors(x)
            .iter()
            .map(|&(y, _)| y)
            .filter(|&y| inside(y) && pos[y] == usize::MAX)
            .collect();
        next.sort_by_key(|&y| (g.degree(y), y));
        for y in next {
            pos[y] = order.len();
            order.push(y);
        }
    }
    let m = order.len();
    let mut band = 0;
    for &x in &order {
        for &(y, _) in g.neighbors(x) {
            if inside(y) {
                band = band.max(pos[x].abs_diff(pos[y]));
            }
        }
    }

    // lower band: entry (i, j) with i − band ≤ j ≤ i at i·(band+1) + j + band − i
    let w = band + 1;
    let mut a = vec![0.0; m * w];
    for (i, &x) in order.iter().enumerate() {
        for &(y, mu) in g.neighbors(x) {
            a[i * w + band] += mu;
            if inside(y) && pos[y] < i {
                a[i * w + pos[y] + band - i] -= mu;
            }
        }
    }
    for i in 0..m {
        for j in i.saturating_sub(band)..=i {
            let mut s = a[i * w + j + band - i];
            for k in i.saturating_sub(band).max(j.saturating_sub(band))..j {
                s -= a[i * w + k + band - i] * a[j * w + k + band - j];
            }
            if i == j {
                assert!(s > 0.0, "matrix is not positive definite");
                a[i * w + band] = s.sqrt();
            } else {
                a[i * w + j + band - i] = s / a[j * w + band];
            }
        }
    }
    let mut rhs = vec![0.0; m];
    rhs[pos[g.root()]] = 1.0;
    for i in 0..m {
        let mut s = rhs[i];
        for k in i.saturating_sub(band)..i {
            s -= a[i * w + k + band - i] * rhs[k];
        }
        rhs[i] = s / a[i * w + band];
    }
    for i in (0..m).rev() {
        let mut s = rhs[i];
        for k in i + 1..(i + w).min(m) {
            s -= a[k * w + i + band - k] * rhs[k];
        }
        rhs[i] = s / a[i * w + band];
    }
    let mut out = vec![0.0; n];
    for (i, &x) in order.iter().enumerate() {
        out[x] = rhs[i];
    }
    out
}

/// Small members of every generator family, with a name for messages.
pub fn families() -> Vec<(String, WeightedGraph)> {
    let lim = GeneratorLimits::default();
    vec![
        ("line".into(), build_lattice(1, 12, lim).unwrap()),
        ("square".into(), build_lattice(2, 6, lim).unwrap()),
        ("cube".into(), build_lattice(3, 3, lim).unwrap()),
        ("binary-tree".into(), build_tree(2, 6, lim).unwrap()),
        ("ternary-tree".into(), build_tree(3, 4, lim).unwrap()),
        (
            "radial".into(),
            build_radial_model(
                &[1, 3, 5, 5, 9, 12, 20],
                &[1.0, 0.5, 2.0, 0.25, 1.5, 1.0],
                lim,
            )
            .unwrap(),
        ),
    ]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
