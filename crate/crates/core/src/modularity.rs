//! Single-cluster modularity `l_s/L - (d_s/2L)^2`.
//!
//! Positivity is decided on integers: `mod(s) > 0` iff `4·L·l_s > d_s²`, so a
//! borderline cluster is classified identically on every platform.

use crate::graph::{Network, NodeSubset};

/// The three integer counts that determine `mod(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularityTerms {
    /// Edges with both endpoints in `s`.
    pub internal_edges: u64,
    /// Sum of full-network degrees over `s`.
    pub degree_sum: u64,
    /// Edge count of the whole network.
    pub total_edges: u64,
}

impl ModularityTerms {
    pub fn of(net: &Network, s: &NodeSubset) -> Self {
        ModularityTerms {
            internal_edges: net.induced_edge_count(s) as u64,
            degree_sum: net.degree_sum(s) as u64,
            total_edges: net.edge_count() as u64,
        }
    }

    pub fn value(&self) -> f64 {
        if self.total_edges == 0 {
            return 0.0;
        }
        let l = self.total_edges as f64;
        let share = self.degree_sum as f64 / (2.0 * l);
        self.internal_edges as f64 / l - share * share
    }

    /// Exact `mod(s) > 0`. A network without edges has no positive cluster.
    pub fn is_positive(&self) -> bool {
        let lhs = 4u128 * self.total_edges as u128 * self.internal_edges as u128;
        let rhs = self.degree_sum as u128 * self.degree_sum as u128;
        lhs > rhs
    }
}

/// `mod(s)` in double precision, with `d_s` taken from full-network degrees.
pub fn modularity(net: &Network, s: &NodeSubset) -> f64 {
    ModularityTerms::of(net, s).value()
}

pub fn has_positive_modularity(net: &Network, s: &NodeSubset) -> bool {
    ModularityTerms::of(net, s).is_positive()
}
