//! Graphs and generalized min-cost flow instances.

use crate::error::{usage, Result};
use crate::scalar::{Rational, Scalar};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Which end of an edge a vertex sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Tail,
    Head,
}

impl Endpoint {
    pub fn opposite(self) -> Endpoint {
        match self {
            Endpoint::Tail => Endpoint::Head,
            Endpoint::Head => Endpoint::Tail,
        }
    }
}

/// Directed multigraph with a per-vertex incidence index covering both
/// directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    incident: Vec<Vec<EdgeId>>,
}

impl DirectedGraph {
    /// Builds the graph. Self-loops are accepted here and reported by
    /// [`GmnfInstance::validate`]; endpoints must be in range.
    pub fn new(vertex_count: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        let mut incident = vec![Vec::new(); vertex_count];
        for (id, &(tail, head)) in edges.iter().enumerate() {
            if tail >= vertex_count || head >= vertex_count {
                return usage(format!("edge {id} ({tail},{head}) references a missing vertex"));
            }
            incident[tail].push(id);
            if head != tail {
                incident[head].push(id);
            }
        }
        Ok(DirectedGraph { vertex_count, edges, incident })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// `E_v`: edges touching `v`, in increasing id order.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn endpoint(&self, e: EdgeId, side: Endpoint) -> VertexId {
        match side {
            Endpoint::Tail => self.edges[e].0,
            Endpoint::Head => self.edges[e].1,
        }
    }

    /// The side of `e` that `v` occupies, if `v` is an endpoint.
    pub fn side_of(&self, e: EdgeId, v: VertexId) -> Option<Endpoint> {
        let (tail, head) = self.edges[e];
        if tail == v {
            Some(Endpoint::Tail)
        } else if head == v {
            Some(Endpoint::Head)
        } else {
            None
        }
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> Option<VertexId> {
        let (tail, head) = self.edges[e];
        if tail == v {
            Some(head)
        } else if head == v {
            Some(tail)
        } else {
            None
        }
    }

    pub fn is_acyclic_undirected(&self) -> bool {
        // A forest has exactly n - components edges.
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }
}

/// Per-edge data of a generalized flow instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData<S> {
    pub cost: S,
    pub capacity: S,
    /// `a_tail^e`, positive under the sign convention.
    pub a_tail: S,
    /// `a_head^e`, negative under the sign convention.
    pub a_head: S,
}

/// Generalized min-cost network flow instance:
/// minimize `Σ c_e x_e` subject to `Σ_{e ∈ E_v} a_v^e x_e = f_v` and
/// `0 ≤ x_e ≤ u_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmnfInstance<S> {
    pub graph: DirectedGraph,
    pub edges: Vec<EdgeData<S>>,
    pub balance: Vec<S>,
}

/// Outcome of [`GmnfInstance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<S> {
    pub errors: Vec<String>,
    pub ratio_balanced: bool,
    pub certificate: Option<crate::ratio::GaugeCertificate<S>>,
    pub violating_cycle: Option<crate::ratio::UndirectedCycle>,
}

impl<S> ValidationReport<S> {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty() && self.ratio_balanced
    }
}

impl<S: Scalar> GmnfInstance<S> {
    pub fn new(graph: DirectedGraph, edges: Vec<EdgeData<S>>, balance: Vec<S>) -> Result<Self> {
        if edges.len() != graph.edge_count() {
            return usage(format!(
                "{} edge records for {} graph edges",
                edges.len(),
                graph.edge_count()
            ));
        }
        if balance.len() != graph.vertex_count() {
            return usage(format!(
                "{} balance entries for {} vertices",
                balance.len(),
                graph.vertex_count()
            ));
        }
        Ok(GmnfInstance { graph, edges, balance })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// `a_v^e`, or `None` when `e` is not incident to `v`.
    pub fn coeff(&self, v: VertexId, e: EdgeId) -> Option<&S> {
        self.graph.side_of(e, v).map(|side| self.coeff_at(e, side))
    }

    pub fn coeff_at(&self, e: EdgeId, side: Endpoint) -> &S {
        match side {
            Endpoint::Tail => &self.edges[e].a_tail,
            Endpoint::Head => &self.edges[e].a_head,
        }
    }

    /// `δ(v, e1, e2) = |a_v^{e1}| / |a_v^{e2}|`.
    pub fn delta(&self, v: VertexId, e1: EdgeId, e2: EdgeId) -> Result<S> {
        let (Some(a1), Some(a2)) = (self.coeff(v, e1), self.coeff(v, e2)) else {
            return usage(format!("edges {e1} and {e2} must both be incident to vertex {v}"));
        };
        if a2.is_zero() {
            return usage(format!("coefficient of edge {e2} at vertex {v} is zero"));
        }
        Ok(a1.abs() / a2.abs())
    }

    /// Objective `Σ c_e x_e`.
    pub fn objective(&self, flow: &[S]) -> S {
        self.edges
            .iter()
            .zip(flow)
            .fold(S::zero(), |acc, (d, x)| acc + d.cost.clone() * x.clone())
    }

    /// Left-hand side of the balance row at `v`.
    pub fn balance_lhs(&self, v: VertexId, flow: &[S]) -> S {
        self.graph.incident(v).iter().fold(S::zero(), |acc, &e| {
            acc + self.coeff(v, e).expect("incident").clone() * flow[e].clone()
        })
    }

    /// Whether `flow` satisfies every balance row and box constraint
    /// (exactly in rational mode, within tolerance in float mode).
    pub fn is_feasible(&self, flow: &[S]) -> bool {
        flow.len() == self.edge_count()
            && self
                .edges
                .iter()
                .zip(flow)
                .all(|(d, x)| !x.is_negative() && x.le(&d.capacity))
            && (0..self.vertex_count()).all(|v| self.balance_lhs(v, flow).approx_eq(&self.balance[v]))
    }

    /// Structural checks, then the ratio-balance check on the survivors.
    pub fn validate(&self) -> ValidationReport<S> {
        let mut errors = Vec::new();
        for (e, (&(tail, head), d)) in self.graph.edges().iter().zip(&self.edges).enumerate() {
            if tail == head {
                errors.push(format!("edge {e} is a self-loop at vertex {tail}"));
            }
            if d.a_tail.is_zero() {
                errors.push(format!("edge {e} has a zero tail coefficient"));
            } else if !d.a_tail.is_positive() {
                errors.push(format!("edge {e} tail coefficient must be positive"));
            }
            if d.a_head.is_zero() {
                errors.push(format!("edge {e} has a zero head coefficient"));
            } else if !d.a_head.is_negative() {
                errors.push(format!("edge {e} head coefficient must be negative"));
            }
            if d.capacity.is_negative() {
                errors.push(format!("edge {e} has negative capacity"));
            }
        }
        if !errors.is_empty() {
            return ValidationReport {
                errors,
                ratio_balanced: false,
                certificate: None,
                violating_cycle: None,
            };
        }
        let verdict = crate::ratio::check_gauge(self);
        ValidationReport {
            errors,
            ratio_balanced: verdict.is_balanced(),
            certificate: verdict.certificate().cloned(),
            violating_cycle: verdict.violation().cloned(),
        }
    }

    /// Same instance with every scalar mapped through `f`.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GmnfInstance<T> {
        GmnfInstance {
            graph: self.graph.clone(),
            edges: self
                .edges
                .iter()
                .map(|d| EdgeData {
                    cost: f(&d.cost),
                    capacity: f(&d.capacity),
                    a_tail: f(&d.a_tail),
                    a_head: f(&d.a_head),
                })
                .collect(),
            balance: self.balance.iter().map(f).collect(),
        }
    }
}

impl GmnfInstance<Rational> {
    pub fn to_float(&self) -> GmnfInstance<f64> {
        self.map_scalars(<f64 as Scalar>::from_rational)
    }
}
