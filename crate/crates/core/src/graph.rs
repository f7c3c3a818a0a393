//! Random graphs, the degree-normalized adjacency shift operator and its
//! spectral objects.

use crate::error::{input, Error, Result};
use crate::linalg::{eigh_symmetric, DenseMatrix};
use crate::rng::SeededRng;

/// Undirected, unweighted, simple graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: DenseMatrix,
}

impl Graph {
    /// Validates a 0/1 symmetric hollow adjacency matrix with no isolated
    /// nodes.
    pub fn from_adjacency(adjacency: DenseMatrix) -> Result<Self> {
        if !adjacency.is_square() {
            return input("adjacency must be square");
        }
        let n = adjacency.rows();
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return input(format!("self-loop at node {i}"));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if a != 0.0 && a != 1.0 {
                    return input(format!("adjacency entry ({i}, {j}) = {a} is not 0/1"));
                }
                if a != adjacency[(j, i)] {
                    return input(format!("adjacency not symmetric at ({i}, {j})"));
                }
            }
        }
        let g = Self { adjacency };
        if let Some(i) = g.degrees().iter().position(|&d| d == 0) {
            return Err(Error::Rejected(format!("node {i} is isolated")));
        }
        Ok(g)
    }

    /// Builds a graph from 0-indexed undirected edges.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = DenseMatrix::zeros(n_nodes, n_nodes);
        for &(i, j) in edges {
            if i >= n_nodes || j >= n_nodes {
                return input(format!("edge ({i}, {j}) out of range for {n_nodes} nodes"));
            }
            if i == j {
                return input(format!("self-loop at node {i}"));
            }
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        Self::from_adjacency(a)
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn adjacency(&self) -> &DenseMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .map(|i| self.adjacency.row(i).iter().filter(|&&a| a != 0.0).count())
            .collect()
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[(i, j)] != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, s) in seen.iter_mut().enumerate() {
                if self.adjacency[(u, v)] != 0.0 && !*s {
                    *s = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Edge-list text: a `n_nodes=N` header, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n_nodes={}\n", self.n_nodes());
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n: usize = header
            .strip_prefix("n_nodes=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i, j)),
                _ => return Err(Error::Parse(format!("bad edge line {line:?}"))),
            }
        }
        Self::from_edges(n, &edges)
    }
}

/// Erdős–Rényi G(n, p): each of the n(n−1)/2 edges is drawn independently,
/// visiting pairs in row-major upper-triangular order.
///
/// Graphs with an isolated node are rejected with [`Error::Rejected`].
pub fn generate_erdos_renyi(n: usize, p_edge: f64, rng_seed: u64) -> Result<Graph> {
    if n < 2 {
        return input(format!("need at least 2 nodes, got {n}"));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return input(format!("edge probability {p_edge} outside [0, 1]"));
    }
    let mut rng = SeededRng::new(rng_seed);
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.bernoulli(p_edge) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    Graph::from_adjacency(a)
}

/// `D^{-1/2} A D^{-1/2}` with `D = diag(A·1)`.
pub fn normalized_adjacency_gso(g: &Graph) -> Result<DenseMatrix> {
    let deg = g.degrees();
    if let Some(i) = deg.iter().position(|&d| d == 0) {
        return input(format!("node {i} is isolated"));
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    Ok(g.adjacency().scale_rows(&inv_sqrt).scale_cols(&inv_sqrt))
}

/// Orthonormal eigenvectors (columns) and ascending eigenvalues of a
/// symmetric shift operator.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_eigengap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.vectors
            .scale_cols(&self.eigenvalues)
            .matmul_t(&self.vectors)
    }
}

pub fn eigenbasis(s: &DenseMatrix) -> Result<EigenBasis> {
    let (eigenvalues, vectors) = eigh_symmetric(s, 1e-10)?;
    Ok(EigenBasis {
        eigenvalues,
        vectors,
    })
}

/// `Ψ_ij = λ_i^j` for `j = 0..L`.
pub fn vandermonde(eigenvalues: &[f64], degree: usize) -> Result<DenseMatrix> {
    if degree == 0 {
        return input("Vandermonde degree must be at least 1");
    }
    let mut psi = DenseMatrix::zeros(eigenvalues.len(), degree);
    for (i, &lam) in eigenvalues.iter().enumerate() {
        let mut pow = 1.0;
        for j in 0..degree {
            psi[(i, j)] = pow;
            pow *= lam;
        }
    }
    Ok(psi)
}

/// `Ũ = (V ∘ V)·P₁⊥`.
pub fn u_tilde(v: &DenseMatrix) -> Result<DenseMatrix> {
    if !v.is_square() {
        return input("u_tilde needs a square basis");
    }
    let defect = v.orthonormality_defect();
    if defect > 1e-8 {
        return input(format!("basis not orthonormal: ‖VᵀV − I‖_F = {defect:e}"));
    }
    let sq = v.hadamard(v);
    let n = v.rows();
    // Right-multiplying by P₁⊥ subtracts each row's mean.
    let mut out = sq.clone();
    for i in 0..n {
        let mean = sq.row(i).iter().sum::<f64>() / n as f64;
        for j in 0..n {
            out[(i, j)] -= mean;
        }
    }
    Ok(out)
}

/// Rejection-sampled graph for the experiment harness: connected, and the
/// shift operator spectrum is simple (minimum eigengap above `1e-8`).
pub struct ResampledGraph {
    pub graph: Graph,
    pub gso: DenseMatrix,
    pub basis: EigenBasis,
    pub attempts: usize,
}

pub const MAX_GRAPH_ATTEMPTS: usize = 1000;
pub const MIN_EIGENGAP: f64 = 1e-8;

pub fn sample_experiment_graph(n: usize, p_edge: f64, seed: u64) -> Result<ResampledGraph> {
    for attempt in 0..MAX_GRAPH_ATTEMPTS {
        let attempt_seed = crate::rng::stream_seed(seed, attempt as u64);
        let graph = match generate_erdos_renyi(n, p_edge, attempt_seed) {
            Ok(g) => g,
            Err(Error::Rejected(_)) => continue,
            Err(e) => return Err(e),
        };
        if !graph.is_connected() {
            continue;
        }
        let gso = normalized_adjacency_gso(&graph)?;
        let basis = eigenbasis(&gso)?;
        if basis.min_eigengap() <= MIN_EIGENGAP {
            continue;
        }
        return Ok(ResampledGraph {
            graph,
            gso,
            basis,
            attempts: attempt + 1,
        });
    }
    Err(Error::Rejected(format!(
        "no connected graph with simple spectrum after {MAX_GRAPH_ATTEMPTS} attempts (n = {n}, p = {p_edge})"
    )))
}
