//! Random walks on undirected graphs subordinated to the PDTP.
//!
//! The walker jumps along `H = D⁻¹A` at every arrival and rests in between,
//! so its transition matrix after `t` ticks is the polynomial
//! `P(t) = Σ_{n≤t} Φ⁽ⁿ⁾(t) Hⁿ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counting::{Evaluator, PdtpParams, Route};
use crate::csv;
use crate::error::{Error, Result};

/// Entries this far below zero are treated as roundoff and clamped.
const CLAMP_TOL: f64 = 1e-12;
/// Allowed row-sum drift of a DTRW matrix.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// Connected undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from `(i, j)` pairs; duplicates collapse, order is free.
    pub fn from_edge_list(edges: &[(usize, usize)], n: usize) -> Result<Graph> {
        if n < 2 {
            return Err(Error::Graph(format!("need at least 2 nodes, got {n}")));
        }
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Graph(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Graph(format!("self-loop at node {i}")));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[i * n + j]).collect())
            .collect();
        let g = Graph {
            n,
            adjacency,
            neighbors,
        };
        if let Some(isolated) = g.unreachable_from_zero() {
            return Err(Error::Graph(format!(
                "graph is disconnected (node {isolated} unreachable from node 0)"
            )));
        }
        Ok(g)
    }

    /// Parses the edge-list format: `N <count>` on the first content line,
    /// then one `i j` pair per line; `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("expected a nonnegative integer, got {s:?}"),
                })
            };
            match (n, fields.as_slice()) {
                (None, ["N", count]) => n = Some(parse(count)?),
                (None, _) => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "first line must be `N <integer>`".into(),
                    })
                }
                (Some(_), [i, j]) => edges.push((parse(i)?, parse(j)?)),
                (Some(_), _) => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `i j`, got {line:?}"),
                    })
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `N <integer>` header".into(),
        })?;
        Graph::from_edge_list(&edges, n)
    }

    /// Edge list in the same text format `parse_edge_list` reads.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("N {}\n", self.n);
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push_str(&format!("{i} {j}\n"));
                }
            }
        }
        out
    }

    pub fn complete(n: usize) -> Result<Graph> {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edge_list(&edges, n)
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::Graph(format!("a cycle needs at least 3 nodes, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edge_list(&edges, n)
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Graph> {
        let edges: Vec<_> = (1..=leaves).map(|j| (0, j)).collect();
        Graph::from_edge_list(&edges, leaves + 1)
    }

    /// Erdős–Rényi `G(n, p)`, redrawn until connected.
    pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Graph(format!("edge probability must lie in (0, 1], got {p}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let edges: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|_| rng.random_bool(p))
                .collect();
            match Graph::from_edge_list(&edges, n) {
                Ok(g) => return Ok(g),
                Err(Error::Graph(msg)) if msg.starts_with("graph is disconnected") => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Graph(format!("no connected G({n}, {p}) draw in 10000 attempts")))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::Graph(format!("node {i} out of range for {} nodes", self.n)))
        }
    }

    fn unreachable_from_zero(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Square row-stochastic matrix, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Clamps roundoff negatives and checks every row sum against `tol`.
    fn checked(n: usize, mut data: Vec<f64>, t: u64, tol: f64) -> Result<Self> {
        for x in data.iter_mut() {
            if *x < 0.0 {
                if *x < -CLAMP_TOL {
                    return Err(Error::Integrity {
                        t,
                        residual: *x,
                        limit: CLAMP_TOL,
                    });
                }
                *x = 0.0;
            }
        }
        for row in data.chunks(n) {
            let residual = crate::extended::accurate_sum(row) - 1.0;
            if !(residual.abs() <= tol) {
                return Err(Error::Integrity {
                    t,
                    residual,
                    limit: tol,
                });
            }
        }
        Ok(StochasticMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        StochasticMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Plain dense product `self · other`.
    pub fn matmul(&self, other: &StochasticMatrix) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// CSV, row-major, 17 significant digits.
    pub fn to_csv(&self) -> String {
        csv::matrix(self.n, &self.data)
    }
}

/// `H_ij = A_ij / K_i`.
pub fn one_step_matrix(g: &Graph) -> StochasticMatrix {
    let n = g.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let k = g.degree(i) as f64;
        for &j in g.neighbors(i) {
            data[i * n + j] = 1.0 / k;
        }
    }
    StochasticMatrix { n, data }
}

/// `P(t)` with state probabilities from the auto route.
pub fn dtrw_matrix(g: &Graph, p: &PdtpParams, t: u64) -> Result<StochasticMatrix> {
    dtrw_matrix_with(g, p, t, &Evaluator::new(Route::Auto))
}

pub fn dtrw_matrix_with(g: &Graph, p: &PdtpParams, t: u64, evaluator: &Evaluator) -> Result<StochasticMatrix> {
    let weights = evaluator.state_distribution(p, t)?;
    dtrw_from_weights(g, weights.probs(), t)
}

/// `Σ_n w_n Hⁿ` with `Hⁿ` built by repeated multiplication and every entry
/// accumulated with Neumaier compensation.
pub fn dtrw_from_weights(g: &Graph, weights: &[f64], t: u64) -> Result<StochasticMatrix> {
    let n = g.n;
    let inv_deg: Vec<f64> = (0..n).map(|i| 1.0 / g.degree(i) as f64).collect();
    let mut power = StochasticMatrix::identity(n).data;
    let mut next = vec![0.0; n * n];
    let mut sum = vec![0.0; n * n];
    let mut comp = vec![0.0; n * n];

    for (k, &w) in weights.iter().enumerate() {
        if k > 0 {
            // (Hᵏ⁻¹ H)_ij = Σ_{l ~ j} (Hᵏ⁻¹)_il / K_l
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = g.neighbors(j).iter().map(|&l| power[i * n + l] * inv_deg[l]).sum();
                }
            }
            std::mem::swap(&mut power, &mut next);
        }
        if w == 0.0 {
            continue;
        }
        for ((s, c), &h) in sum.iter_mut().zip(comp.iter_mut()).zip(&power) {
            let x = w * h;
            let total = *s + x;
            *c += if s.abs() >= x.abs() {
                (*s - total) + x
            } else {
                (x - total) + *s
            };
            *s = total;
        }
    }
    let data = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
    StochasticMatrix::checked(n, data, t, ROW_SUM_TOL)
}

/// Row `start` of `P(t)`: where a walker started at `start` is at time `t`.
pub fn occupation_row(g: &Graph, p: &PdtpParams, t: u64, start: usize) -> Result<Vec<f64>> {
    g.check_node(start)?;
    Ok(dtrw_matrix(g, p, t)?.row(start).to_vec())
}

/// `π_i = K_i / Σ_j K_j`.
pub fn stationary_distribution(g: &Graph) -> Vec<f64> {
    let degrees = g.degrees();
    let total: usize = degrees.iter().sum();
    degrees.iter().map(|&k| k as f64 / total as f64).collect()
}
