//! Ritz values with Gauss quadrature weights, pooled across probes.

use crate::error::{Error, Result};
use crate::spectral::lanczos::TridiagonalMatrix;
use crate::spectral::tridiag::eigen_first_components;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RitzNode {
    /// Eigenvalue estimate.
    pub node: f64,
    /// Quadrature weight; the weights of one probe sum to 1.
    pub weight: f64,
    /// Which probe produced this node.
    pub probe: usize,
}

/// All Ritz nodes of an SLQ run, sorted ascending by node value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RitzSet {
    nodes: Vec<RitzNode>,
    probes: usize,
}

impl RitzSet {
    pub fn from_fragments(fragments: Vec<Vec<(f64, f64)>>) -> Self {
        let probes = fragments.len();
        let mut nodes = Vec::new();
        for (probe, fragment) in fragments.into_iter().enumerate() {
            for (node, weight) in fragment {
                nodes.push(RitzNode {
                    node,
                    weight,
                    probe,
                });
            }
        }
        nodes.sort_by(|a, b| a.node.total_cmp(&b.node));
        Self { nodes, probes }
    }

    pub fn nodes(&self) -> &[RitzNode] {
        &self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn probe_count(&self) -> usize {
        self.probes
    }

    pub fn min_node(&self) -> Option<f64> {
        self.nodes.first().map(|n| n.node)
    }

    pub fn max_node(&self) -> Option<f64> {
        self.nodes.last().map(|n| n.node)
    }

    pub fn max_abs_node(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.node.abs())
            .fold(0.0, f64::max)
    }

    pub fn weight_sum(&self, probe: usize) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.probe == probe)
            .map(|n| n.weight)
            .sum()
    }

    /// First spectral moment of one probe's quadrature rule: Σ ωᵢ λᵢ.
    pub fn first_moment(&self, probe: usize) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.probe == probe)
            .map(|n| n.weight * n.node)
            .sum()
    }

    /// Every node multiplied by `c`; weights and probe tags unchanged.
    /// Used by the scale-invariance properties.
    pub fn scaled(&self, c: f64) -> Self {
        let mut nodes: Vec<RitzNode> = self
            .nodes
            .iter()
            .map(|n| RitzNode {
                node: c * n.node,
                ..*n
            })
            .collect();
        if c < 0.0 {
            nodes.reverse();
        }
        Self {
            nodes,
            probes: self.probes,
        }
    }
}

/// Nodes = eigenvalues of T; weights = squared first eigenvector
/// components. One fragment per probe.
pub fn ritz_from_tridiagonal(t: &TridiagonalMatrix) -> Result<Vec<(f64, f64)>> {
    if t.alphas.is_empty() {
        return Err(Error::EmptyRitzSet);
    }
    let (nodes, firsts) = eigen_first_components(&t.alphas, &t.betas)?;
    Ok(nodes
        .into_iter()
        .zip(firsts)
        .map(|(node, f)| (node, f * f))
        .collect())
}
