use super::{VertexId, WeightedGraph};

/// Metric structure of a rooted graph: radii, spheres, ball volumes `W_n`,
/// cut conductances `b_k` and their prefix sums `M_N`.
///
/// Arrays are indexed by radius from `0` up to the root's eccentricity.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProfile {
    radius_of: Vec<usize>,
    spheres: Vec<Vec<VertexId>>,
    volumes: Vec<f64>,
    cuts: Vec<f64>,
    cut_prefix: Vec<f64>,
    r_max: usize,
}

/// Computes the [`BallProfile`] of `graph` around its root.
pub fn ball_profile(graph: &WeightedGraph) -> BallProfile {
    // WeightedGraph construction guarantees connectivity.
    let radius_of: Vec<usize> = graph
        .bfs_radii()
        .into_iter()
        .map(|r| r.unwrap_or(usize::MAX))
        .collect();
    let ecc = radius_of.iter().copied().max().unwrap_or(0);

    let mut spheres = vec![Vec::new(); ecc + 1];
    for (x, &r) in radius_of.iter().enumerate() {
        spheres[r].push(x);
    }

    let mut volumes = vec![0.0; ecc + 1];
    for (n, sphere) in spheres.iter().enumerate() {
        let shell: f64 = sphere.iter().map(|&x| graph.measure(x)).sum();
        volumes[n] = shell + if n > 0 { volumes[n - 1] } else { 0.0 };
    }

    let mut cuts = vec![0.0; ecc + 1];
    for e in graph.edges() {
        let (a, b) = (radius_of[e.u], radius_of[e.v]);
        if a != b {
            cuts[a.min(b)] += e.weight;
        }
    }
    let mut cut_prefix = cuts.clone();
    for k in 1..cut_prefix.len() {
        cut_prefix[k] += cut_prefix[k - 1];
    }

    let natural = ecc.saturating_sub(1);
    let r_max = graph.interior_radius().map_or(natural, |r| r.min(natural));

    BallProfile {
        radius_of,
        spheres,
        volumes,
        cuts,
        cut_prefix,
        r_max,
    }
}

impl BallProfile {
    pub fn radius_of(&self, x: VertexId) -> usize {
        self.radius_of[x]
    }

    pub fn radii(&self) -> &[usize] {
        &self.radius_of
    }

    pub fn sphere(&self, n: usize) -> &[VertexId] {
        self.spheres.get(n).map_or(&[], |s| s.as_slice())
    }

    /// `W_n = μ(B_n)` for `n = 0..=eccentricity`.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// `b_k`: total weight of edges joining `B_k` to its complement.
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    /// `M_N = Σ_{k ≤ N} b_k`.
    pub fn cut_prefix(&self) -> &[f64] {
        &self.cut_prefix
    }

    pub fn eccentricity(&self) -> usize {
        self.spheres.len() - 1
    }

    /// Largest radius `R` for which `B_R` and its edge boundary lie inside the
    /// truncation.
    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn in_ball(&self, x: VertexId, radius: usize) -> bool {
        self.radius_of[x] <= radius
    }

    /// Vertices of `B_R` in increasing id order.
    pub fn ball(&self, radius: usize) -> Vec<VertexId> {
        (0..self.radius_of.len())
            .filter(|&x| self.radius_of[x] <= radius)
            .collect()
    }

    /// Number of vertices in `B_R`.
    pub fn ball_size(&self, radius: usize) -> usize {
        self.spheres.iter().take(radius + 1).map(Vec::len).sum()
    }
}
