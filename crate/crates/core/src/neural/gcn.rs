use serde::{Deserialize, Serialize};

use super::NeuralError;
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    pub fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Sparse `D^-1/2 (A + I) D^-1/2` for an undirected edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    /// Per row: `(column, weight)` including the self-loop, columns ascending.
    rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    /// Duplicate edges and self-loops in `edges` are ignored.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self, NeuralError> {
        let mut nbrs: Vec<Vec<usize>> = (0..num_nodes).map(|i| vec![i]).collect();
        for &(i, j) in edges {
            if i >= num_nodes || j >= num_nodes {
                return Err(NeuralError::EdgeOutOfRange { edge: (i, j), num_nodes });
            }
            if i != j {
                nbrs[i].push(j);
                nbrs[j].push(i);
            }
        }
        for n in &mut nbrs {
            n.sort_unstable();
            n.dedup();
        }
        let deg: Vec<f64> = nbrs.iter().map(|n| n.len() as f64).collect();
        let rows = nbrs
            .iter()
            .enumerate()
            .map(|(i, n)| n.iter().map(|&j| (j, 1.0 / (deg[i] * deg[j]).sqrt())).collect())
            .collect();
        Ok(Self { rows })
    }

    pub fn num_nodes(&self) -> usize {
        self.rows.len()
    }

    /// `Â · x`. Since `Â` is symmetric this is also `Âᵀ · x`.
    pub fn propagate(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.rows(), self.rows.len(), "propagate shape mismatch");
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for (i, row) in self.rows.iter().enumerate() {
            let dst = out.row_mut(i);
            for &(j, w) in row {
                for (o, v) in dst.iter_mut().zip(x.row(j)) {
                    *o += w * v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.rows.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m.set(i, j, w);
            }
        }
        m
    }
}

/// `activation(Â · X · W + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnLayer {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Intermediates of one layer's forward pass.
#[derive(Debug, Clone)]
pub struct GcnCache {
    /// `Â · X`.
    pub propagated: DenseMatrix,
    /// Layer output after activation.
    pub output: DenseMatrix,
}

/// Gradients of one layer.
#[derive(Debug, Clone)]
pub struct GcnGrads {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
    pub input: DenseMatrix,
}

impl GcnLayer {
    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, adj: &NormalizedAdjacency, x: &DenseMatrix) -> Result<GcnCache, NeuralError> {
        if x.cols() != self.in_dim() {
            return Err(NeuralError::FeatureMismatch { expected: self.in_dim(), found: x.cols() });
        }
        let propagated = adj.propagate(x);
        let mut output = propagated.matmul(&self.weight);
        for i in 0..output.rows() {
            for (v, b) in output.row_mut(i).iter_mut().zip(&self.bias) {
                *v = self.activation.apply(*v + b);
            }
        }
        Ok(GcnCache { propagated, output })
    }

    /// Back-propagates `grad_output` (gradient w.r.t. the layer output).
    pub fn backward(&self, adj: &NormalizedAdjacency, cache: &GcnCache, grad_output: &DenseMatrix) -> GcnGrads {
        let mut grad_pre = grad_output.clone();
        for i in 0..grad_pre.rows() {
            for (g, &y) in grad_pre.row_mut(i).iter_mut().zip(cache.output.row(i)) {
                *g *= self.activation.derivative(y);
            }
        }
        let weight = cache.propagated.t_matmul(&grad_pre);
        let mut bias = vec![0.0; self.out_dim()];
        for i in 0..grad_pre.rows() {
            for (b, g) in bias.iter_mut().zip(grad_pre.row(i)) {
                *b += g;
            }
        }
        let input = adj.propagate(&grad_pre.matmul_t(&self.weight));
        GcnGrads { weight, bias, input }
    }
}
