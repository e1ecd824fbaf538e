use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Vertex count up to which metric axioms are checked on every triple.
pub const EXHAUSTIVE_METRIC_CHECK: usize = 500;

const SAMPLED_TRIPLES: usize = 200_000;

/// Distances between the vertices of a finite space.
#[derive(Clone, Debug)]
pub enum Metric {
    /// Explicit row-major distance matrix.
    Dense { n: usize, values: Vec<f64> },
    /// `d((x, j), (x', j'))² = d_base(x, x')² + |c_j - c_j'|²` with vertex
    /// index `x * coords.len() + j`.
    Product { base: Box<Metric>, coords: Vec<f64> },
}

impl Metric {
    pub fn len(&self) -> usize {
        match self {
            Metric::Dense { n, .. } => *n,
            Metric::Product { base, coords } => base.len() * coords.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Metric::Dense { n, values } => values[i * n + j],
            Metric::Product { base, coords } => {
                let m = coords.len();
                let dx = base.dist(i / m, j / m);
                let dy = coords[i % m] - coords[j % m];
                (dx * dx + dy * dy).sqrt()
            }
        }
    }

    /// Hop-count shortest-path metric of a graph given by adjacency lists.
    /// Vertices in different components are at infinite distance.
    pub fn shortest_path(neighbors: &[Vec<(usize, f64)>]) -> Metric {
        let n = neighbors.len();
        let mut values = vec![f64::INFINITY; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut values[src * n..(src + 1) * n];
            row[src] = 0.0;
            queue.push_back(src);
            while let Some(x) = queue.pop_front() {
                let dx = row[x];
                for &(y, _) in &neighbors[x] {
                    if row[y].is_infinite() {
                        row[y] = dx + 1.0;
                        queue.push_back(y);
                    }
                }
            }
        }
        Metric::Dense { n, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Metric> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::MetricAxiomViolation(format!(
                    "metric row has {} entries, expected {n}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Metric::Dense { n, values })
    }

    /// Dense restriction to a subset of vertices.
    pub fn restrict(&self, vertices: &[usize]) -> Metric {
        let n = vertices.len();
        let mut values = Vec::with_capacity(n * n);
        for &i in vertices {
            for &j in vertices {
                values.push(self.dist(i, j));
            }
        }
        Metric::Dense { n, values }
    }

    /// Checks symmetry, identity of indiscernibles and the triangle
    /// inequality; exhaustively up to [`EXHAUSTIVE_METRIC_CHECK`] vertices and
    /// on a fixed pseudo-random sample of triples above.
    pub fn validate(&self) -> Result<()> {
        match self {
            Metric::Product { base, coords } => {
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::MetricAxiomViolation("non-finite product coordinate".into()));
                }
                for w in coords.windows(2) {
                    if w[0] == w[1] {
                        return Err(Error::MetricAxiomViolation("repeated product coordinate".into()));
                    }
                }
                base.validate()
            }
            Metric::Dense { n, values } => {
                let n = *n;
                let d = |i: usize, j: usize| values[i * n + j];
                for i in 0..n {
                    if d(i, i) != 0.0 {
                        return Err(Error::MetricAxiomViolation(format!("d({i},{i}) = {}", d(i, i))));
                    }
                    for j in i + 1..n {
                        let (a, b) = (d(i, j), d(j, i));
                        if a.is_nan() || a < 0.0 {
                            return Err(Error::MetricAxiomViolation(format!("d({i},{j}) = {a}")));
                        }
                        if a != b {
                            return Err(Error::MetricAxiomViolation(format!(
                                "asymmetric: d({i},{j}) = {a}, d({j},{i}) = {b}"
                            )));
                        }
                        if a == 0.0 {
                            return Err(Error::MetricAxiomViolation(format!(
                                "distinct vertices {i} and {j} at distance 0"
                            )));
                        }
                    }
                }
                let slack = |a: f64| 1e-12 * a.abs().max(1.0);
                let check = |i: usize, j: usize, k: usize| -> Result<()> {
                    let lhs = d(i, k);
                    let rhs = d(i, j) + d(j, k);
                    if lhs > rhs + slack(rhs) {
                        return Err(Error::MetricAxiomViolation(format!(
                            "triangle inequality fails: d({i},{k}) = {lhs} > d({i},{j}) + d({j},{k}) = {rhs}"
                        )));
                    }
                    Ok(())
                };
                if n <= EXHAUSTIVE_METRIC_CHECK {
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                check(i, j, k)?;
                            }
                        }
                    }
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7472_6963);
                    for _ in 0..SAMPLED_TRIPLES {
                        check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
                    }
                }
                Ok(())
            }
        }
    }
}
