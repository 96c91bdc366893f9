//! Ratio-balance: the gauge (potential) criterion and the brute-force
//! simple-cycle cross-check.

use std::collections::VecDeque;

use crate::caps::SizeCaps;
use crate::error::{Error, Result};
use crate::model::{DirectedGraph, EdgeId, GmnfInstance, VertexId};
use crate::scalar::Scalar;

/// Anything with a directed multigraph and a tail/head coefficient per edge.
pub trait CoefficientGraph<S> {
    fn graph(&self) -> &DirectedGraph;
    fn tail_coeff(&self, e: EdgeId) -> &S;
    fn head_coeff(&self, e: EdgeId) -> &S;

    fn coeff_of(&self, v: VertexId, e: EdgeId) -> Option<&S> {
        let (tail, head) = self.graph().edge(e);
        if v == tail {
            Some(self.tail_coeff(e))
        } else if v == head {
            Some(self.head_coeff(e))
        } else {
            None
        }
    }
}

impl<S: Scalar> CoefficientGraph<S> for GmnfInstance<S> {
    fn graph(&self) -> &DirectedGraph {
        &self.graph
    }
    fn tail_coeff(&self, e: EdgeId) -> &S {
        &self.edges[e].a_tail
    }
    fn head_coeff(&self, e: EdgeId) -> &S {
        &self.edges[e].a_head
    }
}

/// Positive node values `p_v` and edge values `q_e` with `|a_v^e| = q_e·p_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCertificate<S> {
    pub node: Vec<S>,
    pub edge: Vec<S>,
}

/// Closed non-directed walk `v_1 e_1 v_2 … v_k e_k v_1`; `edges[i]` joins
/// `vertices[i]` and `vertices[(i + 1) % k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedCycle {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatioVerdict<S> {
    Balanced(GaugeCertificate<S>),
    Violated(UndirectedCycle),
}

impl<S> RatioVerdict<S> {
    pub fn is_balanced(&self) -> bool {
        matches!(self, RatioVerdict::Balanced(_))
    }
    pub fn certificate(&self) -> Option<&GaugeCertificate<S>> {
        match self {
            RatioVerdict::Balanced(c) => Some(c),
            RatioVerdict::Violated(_) => None,
        }
    }
    pub fn violation(&self) -> Option<&UndirectedCycle> {
        match self {
            RatioVerdict::Balanced(_) => None,
            RatioVerdict::Violated(c) => Some(c),
        }
    }
}

/// Product `Π δ(v_i, e_{i-1}, e_i)` around `cycle` (with `e_0 = e_k`).
pub fn cycle_product<S: Scalar, G: CoefficientGraph<S> + ?Sized>(
    g: &G,
    cycle: &UndirectedCycle,
) -> Result<S> {
    let k = cycle.edges.len();
    if k < 2 || cycle.vertices.len() != k {
        return Err(Error::Usage("a cycle needs at least two edges".into()));
    }
    let mut product = S::one();
    for i in 0..k {
        let v = cycle.vertices[i];
        let prev = cycle.edges[(i + k - 1) % k];
        let next = cycle.edges[i];
        let (Some(a_prev), Some(a_next)) = (g.coeff_of(v, prev), g.coeff_of(v, next)) else {
            return Err(Error::Usage(format!("cycle edges are not incident to vertex {v}")));
        };
        product = product * a_prev.abs() / a_next.abs();
    }
    Ok(product)
}

/// Gauge criterion: traverse a spanning forest assigning `p_v` with
/// `|a_w^e|·p_v = |a_v^e|·p_w` on tree edges, then verify every other edge.
/// Linear in the graph size; disconnected graphs are handled per component.
pub fn check_gauge<S: Scalar, G: CoefficientGraph<S> + ?Sized>(g: &G) -> RatioVerdict<S> {
    let graph = g.graph();
    let n = graph.vertex_count();
    let mut potential: Vec<Option<S>> = vec![None; n];
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut tree_edge = vec![false; graph.edge_count()];

    for root in 0..n {
        if potential[root].is_some() {
            continue;
        }
        potential[root] = Some(S::one());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let pv = potential[v].clone().expect("visited");
            for &e in graph.incident(v) {
                let w = graph.other_end(e, v).expect("incident");
                if potential[w].is_some() {
                    continue;
                }
                let av = g.coeff_of(v, e).expect("incident").abs();
                let aw = g.coeff_of(w, e).expect("incident").abs();
                potential[w] = Some(aw * pv.clone() / av);
                parent_edge[w] = Some(e);
                depth[w] = depth[v] + 1;
                tree_edge[e] = true;
                queue.push_back(w);
            }
        }
    }
    let node: Vec<S> = potential.into_iter().map(|p| p.expect("all visited")).collect();

    for (e, &(tail, head)) in graph.edges().iter().enumerate() {
        if tree_edge[e] {
            continue;
        }
        let lhs = g.head_coeff(e).abs() * node[tail].clone();
        let rhs = g.tail_coeff(e).abs() * node[head].clone();
        if !lhs.approx_eq(&rhs) {
            return RatioVerdict::Violated(fundamental_cycle(graph, &parent_edge, &depth, e));
        }
    }

    let edge = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(tail, _))| g.tail_coeff(e).abs() / node[tail].clone())
        .collect();
    RatioVerdict::Balanced(GaugeCertificate { node, edge })
}

/// The cycle closed by non-tree edge `e = (tail, head)` in the BFS forest.
fn fundamental_cycle(
    graph: &DirectedGraph,
    parent_edge: &[Option<EdgeId>],
    depth: &[usize],
    e: EdgeId,
) -> UndirectedCycle {
    let (tail, head) = graph.edge(e);
    if tail == head {
        return UndirectedCycle { vertices: vec![tail], edges: vec![e] };
    }
    // Climb both ends to their common ancestor.
    let (mut a, mut b) = (tail, head);
    let mut up_from_a: Vec<(VertexId, EdgeId)> = Vec::new();
    let mut up_from_b: Vec<(VertexId, EdgeId)> = Vec::new();
    while a != b {
        if depth[a] >= depth[b] {
            let pe = parent_edge[a].expect("non-root");
            up_from_a.push((a, pe));
            a = graph.other_end(pe, a).expect("incident");
        } else {
            let pe = parent_edge[b].expect("non-root");
            up_from_b.push((b, pe));
            b = graph.other_end(pe, b).expect("incident");
        }
    }
    // head --e--> tail, tail up to lca, lca down to head.
    let mut vertices = vec![head];
    let mut edges = vec![e];
    for &(v, pe) in &up_from_a {
        vertices.push(v);
        edges.push(pe);
    }
    if a != head {
        vertices.push(a);
    }
    for &(v, pe) in up_from_b.iter().rev() {
        edges.push(pe);
        if v != head {
            vertices.push(v);
        }
    }
    UndirectedCycle { vertices, edges }
}

/// Enumerates every simple non-directed cycle (each once) by backtracking.
/// `visit` returns `false` to stop early.
pub fn for_each_simple_undirected_cycle(
    graph: &DirectedGraph,
    caps: &SizeCaps,
    mut visit: impl FnMut(&UndirectedCycle) -> bool,
) -> Result<usize> {
    let n = graph.vertex_count();
    if n > caps.enum_vertices {
        return Err(Error::SizeCap { what: "cycle enumeration vertices", limit: caps.enum_vertices });
    }
    struct Search<'a, F> {
        graph: &'a DirectedGraph,
        start: VertexId,
        on_path: Vec<bool>,
        vertices: Vec<VertexId>,
        edges: Vec<EdgeId>,
        count: usize,
        limit: usize,
        visit: F,
        stopped: bool,
    }
    impl<F: FnMut(&UndirectedCycle) -> bool> Search<'_, F> {
        fn dfs(&mut self, u: VertexId) -> Result<()> {
            for &e in self.graph.incident(u) {
                if self.stopped || self.edges.contains(&e) {
                    continue;
                }
                let w = self.graph.other_end(e, u).expect("incident");
                if w == self.start && !self.edges.is_empty() {
                    // Each cycle is met in both directions; keep one.
                    if self.edges[0] < e {
                        self.count += 1;
                        if self.count > self.limit {
                            return Err(Error::SizeCap { what: "enumerated cycles", limit: self.limit });
                        }
                        self.edges.push(e);
                        let cycle = UndirectedCycle { vertices: self.vertices.clone(), edges: self.edges.clone() };
                        self.edges.pop();
                        if !(self.visit)(&cycle) {
                            self.stopped = true;
                        }
                    }
                } else if w > self.start && !self.on_path[w] {
                    self.on_path[w] = true;
                    self.vertices.push(w);
                    self.edges.push(e);
                    self.dfs(w)?;
                    self.edges.pop();
                    self.vertices.pop();
                    self.on_path[w] = false;
                }
            }
            Ok(())
        }
    }
    let mut search = Search {
        graph,
        start: 0,
        on_path: vec![false; n],
        vertices: Vec::new(),
        edges: Vec::new(),
        count: 0,
        limit: caps.enum_objects,
        visit: &mut visit,
        stopped: false,
    };
    for s in 0..n {
        if search.stopped {
            break;
        }
        search.start = s;
        search.on_path[s] = true;
        search.vertices = vec![s];
        search.dfs(s)?;
        search.on_path[s] = false;
    }
    Ok(search.count)
}

/// Checks the cycle-product condition on every simple non-directed cycle.
/// Returns the first violating cycle, if any.
pub fn check_bruteforce<S: Scalar, G: CoefficientGraph<S> + ?Sized>(
    g: &G,
    caps: &SizeCaps,
) -> Result<Option<UndirectedCycle>> {
    let mut violation = None;
    let mut failure = None;
    for_each_simple_undirected_cycle(g.graph(), caps, |cycle| match cycle_product::<S, G>(g, cycle) {
        Ok(p) if p.approx_eq(&S::one()) => true,
        Ok(_) => {
            violation = Some(cycle.clone());
            false
        }
        Err(err) => {
            failure = Some(err);
            false
        }
    })?;
    match failure {
        Some(err) => Err(err),
        None => Ok(violation),
    }
}

impl<S: Scalar> GmnfInstance<S> {
    pub fn is_ratio_balanced_gauge(&self) -> RatioVerdict<S> {
        check_gauge(self)
    }

    pub fn is_ratio_balanced_bruteforce(&self) -> Result<(bool, Option<UndirectedCycle>)> {
        let violation = check_bruteforce(self, SizeCaps::global())?;
        Ok((violation.is_none(), violation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::scalar::Rational;

    #[test]
    fn unit_triangle_is_balanced() {
        let inst = triangle([(1, 1); 3]);
        let verdict = inst.is_ratio_balanced_gauge();
        let cert = verdict.certificate().expect("balanced");
        for (e, d) in inst.edges.iter().enumerate() {
            let (t, h) = inst.graph.edge(e);
            assert_eq!(d.a_tail.abs(), cert.edge[e].clone() * cert.node[t].clone());
            assert_eq!(d.a_head.abs(), cert.edge[e].clone() * cert.node[h].clone());
        }
        assert_eq!(inst.is_ratio_balanced_bruteforce().unwrap(), (true, None));
    }

    #[test]
    fn skewed_triangle_is_not_balanced() {
        // a_{v2}^{e1} = -2: vertex 1 is the head of edge 0.
        let inst = triangle([(1, 2), (1, 1), (1, 1)]);
        let verdict = inst.is_ratio_balanced_gauge();
        let cycle = verdict.violation().expect("violated").clone();
        let product: Rational = cycle_product(&inst, &cycle).unwrap();
        assert!(product == z(2) || product == q(1, 2), "{product}");

        let (balanced, witness) = inst.is_ratio_balanced_bruteforce().unwrap();
        assert!(!balanced);
        let product: Rational = cycle_product(&inst, &witness.unwrap()).unwrap();
        assert_ne!(product, z(1));
    }

    #[test]
    fn expanded_product_matches_hand_value() {
        let inst = triangle([(1, 2), (1, 1), (1, 1)]);
        // v1=0, v2=1, v3=2 with e1=0, e2=1, e3=2: δ(v1,e3,e1)·δ(v2,e1,e2)·δ(v3,e2,e3)
        let cycle = UndirectedCycle { vertices: vec![0, 1, 2], edges: vec![0, 1, 2] };
        let p: Rational = cycle_product(&inst, &cycle).unwrap();
        assert_eq!(p, z(2));
    }

    #[test]
    fn trees_are_vacuously_balanced() {
        let inst = instance(
            4,
            &[
                (0, 1, z(1), z(1), z(7), z(-3)),
                (2, 1, z(1), z(1), z(5), z(-11)),
                (1, 3, z(1), z(1), q(1, 3), z(-2)),
            ],
            vec![z(0); 4],
        );
        assert!(inst.is_ratio_balanced_gauge().is_balanced());
        assert_eq!(inst.is_ratio_balanced_bruteforce().unwrap(), (true, None));
    }

    #[test]
    fn telescoping_four_cycle_is_balanced() {
        // Going around 0-1-2-3-0 the δ factors are 2, 1/2, 3, 1/3.
        let inst = instance(
            4,
            &[
                (0, 1, z(0), z(1), z(3), z(-1)),
                (1, 2, z(0), z(1), q(1, 2), z(-1)),
                (2, 3, z(0), z(1), z(2), z(-3)),
                (3, 0, z(0), z(1), z(1), z(-1)),
            ],
            vec![z(0); 4],
        );
        let cycle = UndirectedCycle { vertices: vec![0, 1, 2, 3], edges: vec![0, 1, 2, 3] };
        let p: Rational = cycle_product(&inst, &cycle).unwrap();
        assert_eq!(p, z(1));
        assert!(inst.is_ratio_balanced_gauge().is_balanced());
        assert_eq!(inst.is_ratio_balanced_bruteforce().unwrap(), (true, None));
    }

    #[test]
    fn parallel_edges_form_two_cycles() {
        let inst = instance(
            2,
            &[(0, 1, z(0), z(1), z(1), z(-1)), (0, 1, z(0), z(1), z(1), z(-2))],
            vec![z(0); 2],
        );
        let mut cycles = Vec::new();
        for_each_simple_undirected_cycle(&inst.graph, &SizeCaps::default(), |c| {
            cycles.push(c.clone());
            true
        })
        .unwrap();
        assert_eq!(cycles, vec![UndirectedCycle { vertices: vec![0, 1], edges: vec![0, 1] }]);
        assert!(!inst.is_ratio_balanced_gauge().is_balanced());
        assert!(!inst.is_ratio_balanced_bruteforce().unwrap().0);
    }

    #[test]
    fn complete_graph_cycle_count() {
        // K4 has 7 simple cycles: 4 triangles and 3 four-cycles.
        let edges = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let graph = DirectedGraph::new(4, edges).unwrap();
        let count = for_each_simple_undirected_cycle(&graph, &SizeCaps::default(), |_| true).unwrap();
        assert_eq!(count, 7);
    }

    #[test]
    fn bruteforce_respects_vertex_cap() {
        let inst = triangle([(1, 1); 3]);
        let caps = SizeCaps { enum_vertices: 2, ..SizeCaps::default() };
        assert!(matches!(
            check_bruteforce::<Rational, _>(&inst, &caps),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn disconnected_components_checked_separately() {
        let inst = instance(
            5,
            &[
                (0, 1, z(0), z(1), z(1), z(-1)),
                (2, 3, z(0), z(1), z(1), z(-1)),
                (3, 4, z(0), z(1), z(1), z(-1)),
                (4, 2, z(0), z(1), z(1), z(-3)),
            ],
            vec![z(0); 5],
        );
        let verdict = inst.is_ratio_balanced_gauge();
        let cycle = verdict.violation().expect("second component is skewed");
        assert!(cycle.vertices.iter().all(|&v| v >= 2));
    }
}
