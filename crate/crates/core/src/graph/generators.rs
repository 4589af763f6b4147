//! Model graph families: integer lattice boxes, regular trees and layered
//! radial models.

use super::{max_vertices_from_env, Edge, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GeneratorLimits {
    pub max_vertices: usize,
}

impl Default for GeneratorLimits {
    fn default() -> Self {
        GeneratorLimits {
            max_vertices: max_vertices_from_env(),
        }
    }
}

impl GeneratorLimits {
    fn check(&self, count: Option<usize>) -> Result<usize> {
        match count {
            Some(n) if n <= self.max_vertices => Ok(n),
            Some(n) => Err(Error::Resource(format!(
                "{n} vertices exceeds the cap of {}",
                self.max_vertices
            ))),
            None => Err(Error::Resource("vertex count overflows usize".into())),
        }
    }
}

/// Box `[-half_side, half_side]^dimension` of the integer lattice with unit
/// weights, rooted at the origin.
///
/// Balls of radius `n ≤ half_side` coincide with those of the infinite
/// lattice; the declared interior radius is `half_side - 1` so that cut edges
/// leaving `B_R` are also present.
pub fn build_lattice(
    dimension: usize,
    half_side: usize,
    limits: GeneratorLimits,
) -> Result<WeightedGraph> {
    if !(1..=4).contains(&dimension) {
        return Err(Error::Argument(format!(
            "lattice dimension must be in 1..=4, got {dimension}"
        )));
    }
    if half_side == 0 {
        return Err(Error::Argument("half_side must be at least 1".into()));
    }
    let side = 2 * half_side + 1;
    let n = limits.check(side.checked_pow(dimension as u32))?;

    // Lexicographic index of the origin; swapped with 0 so the root is id 0.
    let origin = (0..dimension).fold(0, |acc, _| acc * side + half_side);
    let relabel = |x: usize| {
        if x == origin {
            0
        } else if x == 0 {
            origin
        } else {
            x
        }
    };

    let mut edges = Vec::with_capacity(n * dimension);
    let mut stride = 1;
    for _axis in 0..dimension {
        for x in 0..n {
            if (x / stride) % side + 1 < side {
                let (a, b) = (relabel(x), relabel(x + stride));
                let (u, v) = if a < b { (a, b) } else { (b, a) };
                edges.push(Edge { u, v, weight: 1.0 });
            }
        }
        stride *= side;
    }
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(WeightedGraph::from_canonical(n, edges, None)?.with_interior_radius(Some(half_side - 1)))
}

/// Rooted tree in which every vertex above `depth` has `branching` children.
///
/// Built as the radial model with sphere sizes `1, b, b², …, b^depth`, so ids
/// follow the same round-robin parent rule.
pub fn build_tree(
    branching: usize,
    depth: usize,
    limits: GeneratorLimits,
) -> Result<WeightedGraph> {
    if branching < 2 {
        return Err(Error::Argument(format!(
            "branching must be at least 2, got {branching}"
        )));
    }
    if depth == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let mut sizes = vec![1usize];
    let mut total = Some(1usize);
    for _ in 0..depth {
        let next = sizes.last().and_then(|s: &usize| s.checked_mul(branching));
        total = total.zip(next).and_then(|(t, s)| t.checked_add(s));
        limits.check(total)?;
        sizes.push(next.unwrap_or(usize::MAX));
    }
    build_radial_model(&sizes, &vec![1.0; depth], limits)
}

/// Layered graph with `sphere_sizes[k]` vertices at depth `k`.
///
/// Vertex `j` of layer `k+1` is joined to vertex `j mod sphere_sizes[k]` of
/// layer `k` with weight `edge_weight_profile[k]`, so every non-root vertex has
/// exactly one parent and every vertex above the last layer has a child.
/// `edge_weight_profile` has one entry per pair of consecutive layers.
pub fn build_radial_model(
    sphere_sizes: &[usize],
    edge_weight_profile: &[f64],
    limits: GeneratorLimits,
) -> Result<WeightedGraph> {
    if sphere_sizes.len() < 2 {
        return Err(Error::Argument(
            "radial model needs at least two layers".into(),
        ));
    }
    if edge_weight_profile.len() + 1 != sphere_sizes.len() {
        return Err(Error::Argument(format!(
            "expected {} layer weights for {} layers, got {}",
            sphere_sizes.len() - 1,
            sphere_sizes.len(),
            edge_weight_profile.len()
        )));
    }
    if sphere_sizes[0] != 1 {
        return Err(Error::Argument(
            "layer 0 must contain exactly the root".into(),
        ));
    }
    if let Some(k) = sphere_sizes.iter().position(|&s| s == 0) {
        return Err(Error::Argument(format!("layer {k} is empty")));
    }
    if let Some(k) = sphere_sizes.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Argument(format!(
            "sphere sizes decrease from layer {k} to {}: {} -> {}",
            k + 1,
            sphere_sizes[k],
            sphere_sizes[k + 1]
        )));
    }
    if let Some(w) = edge_weight_profile
        .iter()
        .find(|w| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::Argument(format!("layer weight {w} is not positive")));
    }
    let n = limits.check(
        sphere_sizes
            .iter()
            .try_fold(0usize, |acc, &s| acc.checked_add(s)),
    )?;

    let mut edges = Vec::with_capacity(n - 1);
    let mut start = 0;
    for k in 0..sphere_sizes.len() - 1 {
        let next_start = start + sphere_sizes[k];
        for j in 0..sphere_sizes[k + 1] {
            edges.push(Edge {
                u: start + j % sphere_sizes[k],
                v: next_start + j,
                weight: edge_weight_profile[k],
            });
        }
        start = next_start;
    }
    edges.sort_by_key(|e| (e.u, e.v));
    WeightedGraph::from_canonical(n, edges, None)
}
