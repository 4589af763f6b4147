//! The p-Laplacian, p-Dirichlet energy and pairing, and supersolution checks.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};

/// `Φ_p(t) = |t|^{p-2} t`, extended by `Φ_p(0) = 0` for every `p > 1`.
#[inline]
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if p == 2.0 {
        t
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// `t^σ` for `t ≥ 0`, with `0^σ = 0`.
#[inline]
pub(crate) fn pow_nonneg(t: f64, exponent: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.powf(exponent)
    }
}

/// The exponent pair `(p, σ)` and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub p: f64,
    pub sigma: f64,
}

impl ExponentParams {
    /// Requires `p > 1` and `σ > p − 1`.
    pub fn new(p: f64, sigma: f64) -> Result<Self> {
        check_p(p)?;
        if !(sigma.is_finite() && sigma > p - 1.0) {
            return Err(Error::Argument(format!(
                "sigma must exceed p - 1 = {}, got {sigma}",
                p - 1.0
            )));
        }
        Ok(ExponentParams { p, sigma })
    }

    /// `r = p − 1`.
    pub fn r(&self) -> f64 {
        self.p - 1.0
    }

    /// `η = σ − p + 1 > 0`.
    pub fn eta(&self) -> f64 {
        self.sigma - self.p + 1.0
    }

    /// `α = σ / r > 1`.
    pub fn alpha(&self) -> f64 {
        self.sigma / self.r()
    }

    /// Constant of the path Hardy estimate, `2^{-p} (η / r)^r`.
    pub fn c_hardy(&self) -> f64 {
        2f64.powf(-self.p) * (self.eta() / self.r()).powf(self.r())
    }

    /// Exponent of `n` in the volume series, `pσ/(p−1) − 1`.
    pub fn volume_exponent(&self) -> f64 {
        self.p * self.sigma / (self.p - 1.0) - 1.0
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("p must lie in (1, inf), got {p}")))
    }
}

/// A real-valued function on the vertices of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    pub values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction { values }
    }

    pub fn zeros(n: usize) -> Self {
        VertexFunction {
            values: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Checks the length against `graph` and that every value is finite.
    pub fn validate_for(&self, graph: &WeightedGraph) -> Result<()> {
        if self.values.len() != graph.vertex_count() {
            return Err(Error::Argument(format!(
                "vertex function has {} values for {} vertices",
                self.values.len(),
                graph.vertex_count()
            )));
        }
        if let Some(x) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite value at vertex {x}")));
        }
        Ok(())
    }

    /// CSV with header `vertex,value`, values in shortest round-trip
    /// scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,value\n");
        for (x, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{x},{v:e}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            vertex: usize,
            value: f64,
        }
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut values = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.vertex != i {
                return Err(Error::Parse {
                    location: format!("line {}", i + 2),
                    message: format!("expected vertex {i}, found {}", row.vertex),
                });
            }
            values.push(row.value);
        }
        Ok(VertexFunction { values })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&fs::read_to_string(path)?)
    }
}

/// `Δ_p f(x) = μ(x)^{-1} Σ_{y∼x} μ_xy Φ_p(f(y) − f(x))`.
pub fn p_laplacian(graph: &WeightedGraph, f: &VertexFunction, x: VertexId, p: f64) -> f64 {
    -flux_out(graph, &f.values, x, p) / graph.measure(x)
}

/// `Σ_{y∼x} μ_xy Φ_p(f(x) − f(y)) = −μ(x) Δ_p f(x)`.
#[inline]
pub(crate) fn flux_out(graph: &WeightedGraph, f: &[f64], x: VertexId, p: f64) -> f64 {
    let fx = f[x];
    graph
        .neighbors(x)
        .iter()
        .map(|&(y, w)| w * phi_p(fx - f[y], p))
        .sum()
}

/// `𝓔_p(f, ψ) = Σ_{{x,y}∈E} μ_xy Φ_p(f(x) − f(y)) (ψ(x) − ψ(y))`.
pub fn dirichlet_pairing(
    graph: &WeightedGraph,
    f: &VertexFunction,
    psi: &VertexFunction,
    p: f64,
) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            e.weight * phi_p(f.values[e.u] - f.values[e.v], p) * (psi.values[e.u] - psi.values[e.v])
        })
        .sum()
}

/// `Σ_{{x,y}∈E} μ_xy |f(x) − f(y)|^p`.
pub fn p_energy(graph: &WeightedGraph, f: &VertexFunction, p: f64) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| e.weight * (f.values[e.u] - f.values[e.v]).abs().powf(p))
        .sum()
}

/// Default absolute tolerance for defect checks: `1e-10` scaled by
/// `max(1, ‖u‖_∞^{max(p−1, σ)})`.
pub fn default_defect_tolerance(u: &VertexFunction, params: &ExponentParams) -> f64 {
    1e-10 * u.sup_norm().powf(params.r().max(params.sigma)).max(1.0)
}

/// `−Δ_p u(x) − u(x)^σ` for each `x` in `interior`, in the order given.
pub fn supersolution_defect(
    graph: &WeightedGraph,
    u: &VertexFunction,
    params: &ExponentParams,
    interior: &[VertexId],
) -> Result<Vec<f64>> {
    u.validate_for(graph)?;
    if let Some(x) = u.values.iter().position(|&v| v < 0.0) {
        return Err(Error::Argument(format!(
            "u must be nonnegative; u({x}) = {}",
            u.values[x]
        )));
    }
    Ok(interior
        .iter()
        .map(|&x| -p_laplacian(graph, u, x, params.p) - pow_nonneg(u.values[x], params.sigma))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperharmonicWitness {
    pub vertex: VertexId,
    /// `−Δ_p u` at the witness vertex.
    pub value: f64,
}

/// Whether `−Δ_p u(x) ≥ −tol` on `interior`; the witness is the vertex with
/// the smallest `−Δ_p u`.
pub fn is_p_superharmonic(
    graph: &WeightedGraph,
    u: &VertexFunction,
    p: f64,
    interior: &[VertexId],
    tol: f64,
) -> (bool, Option<SuperharmonicWitness>) {
    let worst = interior
        .iter()
        .map(|&x| SuperharmonicWitness {
            vertex: x,
            value: -p_laplacian(graph, u, x, p),
        })
        .min_by(|a, b| a.value.total_cmp(&b.value));
    (worst.is_none_or(|w| w.value >= -tol), worst)
}
