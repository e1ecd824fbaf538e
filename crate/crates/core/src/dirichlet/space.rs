use std::collections::HashMap;

use super::metric::Metric;
use crate::error::{check_len, Error, Result};

/// A finite weighted graph carrying a vertex measure, symmetric edge
/// conductances and a metric.
///
/// The generator is `(Lf)(x) = μ(x)⁻¹ Σ_y w(x,y) (f(y) - f(x))`, which is
/// non-positive and self-adjoint in `L²(μ)`. Spaces are immutable once built.
#[derive(Clone, Debug)]
pub struct DirichletSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    metric: Metric,
}

impl DirichletSpace {
    /// Builds a validated space from labelled vertices and conductances.
    ///
    /// An edge may be listed in both orientations only with equal weights.
    /// Without `metric_override` the hop-count shortest-path metric is used.
    pub fn build(
        vertices: Vec<(String, f64)>,
        conductances: Vec<(String, String, f64)>,
        metric_override: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, (id, _)) in vertices.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(id.to_string()))
        };
        let mut edges = Vec::with_capacity(conductances.len());
        for (u, v, w) in &conductances {
            edges.push((lookup(u)?, lookup(v)?, *w));
        }
        let (ids, measure): (Vec<String>, Vec<f64>) = vertices.into_iter().unzip();
        let metric = metric_override.map(|rows| Metric::from_rows(&rows)).transpose()?;
        Self::from_parts(ids, measure, &edges, metric)
    }

    /// Builds a space from positional data. Edges are `(u, v, w)` index
    /// triples; a pair listed twice must carry the same weight.
    pub fn from_parts(
        ids: Vec<String>,
        measure: Vec<f64>,
        edges: &[(usize, usize, f64)],
        metric: Option<Metric>,
    ) -> Result<Self> {
        let n = ids.len();
        check_len(n, measure.len())?;
        if n == 0 {
            return Err(Error::InvalidInput("space has no vertices".into()));
        }
        for (id, &m) in ids.iter().zip(&measure) {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonPositiveMeasure {
                    vertex: id.clone(),
                    value: m,
                });
            }
        }
        let mut weights: HashMap<(usize, usize), (f64, usize, usize)> = HashMap::new();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(format!("index {}", u.max(v))));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "conductance w({},{}) = {w} must be finite and nonnegative",
                    ids[u], ids[v]
                )));
            }
            if u == v {
                if w != 0.0 {
                    return Err(Error::InvalidInput(format!("self-loop at {} with w = {w}", ids[u])));
                }
                continue;
            }
            let key = (u.min(v), u.max(v));
            match weights.get(&key) {
                Some(&(prev, pu, pv)) if prev != w => {
                    return Err(Error::NonSymmetricConductance {
                        u: ids[pu].clone(),
                        v: ids[pv].clone(),
                        forward: prev,
                        backward: w,
                    });
                }
                Some(_) => {}
                None => {
                    weights.insert(key, (w, u, v));
                }
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for (&(u, v), &(w, _, _)) in &weights {
            if w > 0.0 {
                neighbors[u].push((v, w));
                neighbors[v].push((u, w));
            }
        }
        for row in &mut neighbors {
            row.sort_by_key(|&(y, _)| y);
        }
        let metric = match metric {
            Some(m) => {
                if m.len() != n {
                    return Err(Error::MetricAxiomViolation(format!(
                        "metric covers {} vertices, space has {n}",
                        m.len()
                    )));
                }
                m.validate()?;
                m
            }
            None => Metric::shortest_path(&neighbors),
        };
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            ids,
            index,
            measure,
            neighbors,
            metric,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Neighbors of `x` with positive conductance, sorted by index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.neighbors[x]
    }

    pub fn conductance(&self, x: usize, y: usize) -> f64 {
        self.neighbors[x]
            .binary_search_by_key(&y, |&(v, _)| v)
            .map(|k| self.neighbors[x][k].1)
            .unwrap_or(0.0)
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.neighbors[x].iter().map(|&(_, w)| w).sum()
    }

    /// All edges `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (u, row) in self.neighbors.iter().enumerate() {
            for &(v, w) in row {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.metric.dist(x, y)
    }

    /// `(Lf)(x) = μ(x)⁻¹ Σ_y w(x,y)(f(y) - f(x))`.
    pub fn apply_generator(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        Ok((0..self.len())
            .map(|x| {
                let fx = f[x];
                let s: f64 = self.neighbors[x].iter().map(|&(y, w)| w * (f[y] - fx)).sum();
                s / self.measure[x]
            })
            .collect())
    }

    /// `μ(x) (-Lf)(x)`: the symmetric graph Laplacian matrix applied to `f`.
    pub fn apply_laplacian_matrix(&self, f: &[f64], out: &mut [f64]) {
        for (x, o) in out.iter_mut().enumerate() {
            let fx = f[x];
            *o = self.neighbors[x].iter().map(|&(y, w)| w * (fx - f[y])).sum();
        }
    }

    /// `L²(μ)` inner product.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.measure).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Component label for every vertex (labels are 0-based, in order of
    /// first appearance).
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.neighbors[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Closed ball `{y : d(x, y) ≤ r}` in index order.
    pub fn ball(&self, center: usize, radius: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(center, y) <= radius).collect()
    }

    /// Sub-space induced on `vertices`: measure and internal conductances are
    /// kept, the metric is the restriction of this space's metric.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut local = HashMap::with_capacity(vertices.len());
        for (k, &v) in vertices.iter().enumerate() {
            local.insert(v, k);
        }
        let ids = vertices.iter().map(|&v| self.ids[v].clone()).collect();
        let measure = vertices.iter().map(|&v| self.measure[v]).collect();
        let mut edges = Vec::new();
        for (k, &v) in vertices.iter().enumerate() {
            for &(y, w) in &self.neighbors[v] {
                if let Some(&j) = local.get(&y) {
                    if k < j {
                        edges.push((k, j, w));
                    }
                }
            }
        }
        Self::from_parts(ids, measure, &edges, Some(self.metric.restrict(vertices)))
    }

    /// Cartesian product with measure `μ_a ⊗ μ_b` and conductances
    /// `w_a(x,x') μ_b(y)` along the first factor and `μ_a(x) w_b(y,y')`
    /// along the second, so that the generator is `L_a ⊗ I + I ⊗ L_b`.
    /// Vertex `(x, y)` has index `x * b.len() + y`.
    pub fn cartesian_product(a: &Self, b: &Self, metric: Option<Metric>) -> Result<Self> {
        let nb = b.len();
        let mut ids = Vec::with_capacity(a.len() * nb);
        let mut measure = Vec::with_capacity(a.len() * nb);
        for x in 0..a.len() {
            for y in 0..nb {
                ids.push(format!("{}|{}", a.ids[x], b.ids[y]));
                measure.push(a.measure[x] * b.measure[y]);
            }
        }
        let mut edges = Vec::new();
        for (x, x2, w) in a.edges() {
            for y in 0..nb {
                edges.push((x * nb + y, x2 * nb + y, w * b.measure[y]));
            }
        }
        for (y, y2, w) in b.edges() {
            for x in 0..a.len() {
                edges.push((x * nb + y, x * nb + y2, a.measure[x] * w));
            }
        }
        Self::from_parts(ids, measure, &edges, metric)
    }

    /// Cycle on `n` vertices, unit measure and conductances.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("ring needs at least 3 vertices, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::from_parts(numbered(n), vec![1.0; n], &edges, None)
    }

    /// Path on `n` vertices, unit measure and conductances.
    pub fn path(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("path needs at least one vertex".into()));
        }
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
        Self::from_parts(numbered(n), vec![1.0; n], &edges, None)
    }

    /// `nx × ny` grid with 4-neighbor unit conductances; vertex `(i, j)` has
    /// index `i * ny + j` and label `"i,j"`.
    pub fn grid(nx: usize, ny: usize) -> Result<Self> {
        lattice(nx, ny, false)
    }

    /// `nx × ny` periodic grid.
    pub fn torus(nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidInput("torus sides must be at least 3".into()));
        }
        lattice(nx, ny, true)
    }
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn lattice(nx: usize, ny: usize, periodic: bool) -> Result<DirichletSpace> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("grid sides must be positive".into()));
    }
    let idx = |i: usize, j: usize| i * ny + j;
    let mut edges = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            if i + 1 < nx || periodic {
                edges.push((idx(i, j), idx((i + 1) % nx, j), 1.0));
            }
            if j + 1 < ny || periodic {
                edges.push((idx(i, j), idx(i, (j + 1) % ny), 1.0));
            }
        }
    }
    let ids = (0..nx).flat_map(|i| (0..ny).map(move |j| format!("{i},{j}"))).collect();
    DirichletSpace::from_parts(ids, vec![1.0; nx * ny], &edges, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DirichletSpace {
        DirichletSpace::build(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_point_generator() {
        let s = two_point();
        assert_eq!(s.apply_generator(&[1.0, -1.0]).unwrap(), vec![-2.0, 2.0]);
    }

    #[test]
    fn constants_in_kernel() {
        let s = DirichletSpace::grid(4, 5).unwrap();
        let lf = s.apply_generator(&[3.7; 20]).unwrap();
        assert!(lf.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_inputs() {
        let asym = DirichletSpace::build(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0), ("b".into(), "a".into(), 2.0)],
            None,
        );
        assert!(matches!(asym, Err(Error::NonSymmetricConductance { .. })));

        let neg = DirichletSpace::build(vec![("a".into(), 0.0)], vec![], None);
        assert!(matches!(neg, Err(Error::NonPositiveMeasure { .. })));

        let dup = DirichletSpace::build(vec![("a".into(), 1.0), ("a".into(), 1.0)], vec![], None);
        assert!(matches!(dup, Err(Error::DuplicateVertex(_))));

        let bad_metric = DirichletSpace::build(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
            Some(vec![vec![0.0, 1.0], vec![2.0, 0.0]]),
        );
        assert!(matches!(bad_metric, Err(Error::MetricAxiomViolation(_))));
    }

    #[test]
    fn repeated_edge_with_same_weight_is_accepted() {
        let s = DirichletSpace::build(
            vec![("a".into(), 1.0), ("b".into(), 2.0)],
            vec![("a".into(), "b".into(), 0.5), ("b".into(), "a".into(), 0.5)],
            None,
        )
        .unwrap();
        assert_eq!(s.conductance(0, 1), 0.5);
        assert_eq!(s.conductance(1, 0), 0.5);
    }

    #[test]
    fn components_and_balls() {
        let s = DirichletSpace::from_parts(numbered(4), vec![1.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)], None).unwrap();
        assert_eq!(s.component_count(), 2);
        assert!(s.dist(0, 2).is_infinite());
        let ring = DirichletSpace::ring(10).unwrap();
        assert_eq!(ring.ball(0, 2.0), vec![0, 1, 2, 8, 9]);
    }

    #[test]
    fn product_generator_is_kronecker_sum() {
        let a = DirichletSpace::path(3).unwrap();
        let b = DirichletSpace::from_parts(numbered(2), vec![0.5, 2.0], &[(0, 1, 3.0)], None).unwrap();
        let p = DirichletSpace::cartesian_product(&a, &b, None).unwrap();
        let f: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin()).collect();
        let lf = p.apply_generator(&f).unwrap();
        for x in 0..3 {
            let col: Vec<f64> = (0..2).map(|y| f[x * 2 + y]).collect();
            let lb = b.apply_generator(&col).unwrap();
            for y in 0..2 {
                let row: Vec<f64> = (0..3).map(|xx| f[xx * 2 + y]).collect();
                let la = a.apply_generator(&row).unwrap();
                assert!((lf[x * 2 + y] - la[x] - lb[y]).abs() < 1e-13);
            }
        }
    }
}
