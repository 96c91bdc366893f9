//! Residual networks and the quantities defined on them: cycle and path
//! costs, reducers, σ, L, T, the iteration bound, cycle pushes and the splice
//! inequality.
//!
//! Paths, cycles and walks are slices of arc ids. A walk `e_1 … e_k` passes
//! through `v_i = tail(e_i)`, and `δ(v_i, e_{i-1}, e_i)` compares the
//! coefficient magnitudes of the two arcs at that vertex.

use crate::caps::SizeCaps;
use crate::error::{usage, Error, Result};
use crate::model::{DirectedGraph, EdgeId, GmnfInstance, VertexId};
use crate::ratio::CoefficientGraph;
use crate::scalar::{Scalar, Show};

pub type ArcId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcDirection {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualArc<S> {
    pub tail: VertexId,
    pub head: VertexId,
    pub base: EdgeId,
    pub direction: ArcDirection,
    pub cost: S,
    pub a_tail: S,
    pub a_head: S,
}

#[derive(Debug, Clone)]
pub struct ResidualNetwork<S> {
    graph: DirectedGraph,
    arcs: Vec<ResidualArc<S>>,
}

impl<S: Scalar> CoefficientGraph<S> for ResidualNetwork<S> {
    fn graph(&self) -> &DirectedGraph {
        &self.graph
    }
    fn tail_coeff(&self, e: EdgeId) -> &S {
        &self.arcs[e].a_tail
    }
    fn head_coeff(&self, e: EdgeId) -> &S {
        &self.arcs[e].a_head
    }
}

/// Builds `G(x)`: a forward arc where `x_e < u_e` and a reverse arc with
/// negated cost and coefficients where `x_e > 0`. Arcs are ordered by base
/// edge, forward before reverse.
pub fn build_residual<S: Scalar>(inst: &GmnfInstance<S>, flow: &[S]) -> Result<ResidualNetwork<S>> {
    if flow.len() != inst.edge_count() {
        return usage(format!("flow has {} entries for {} edges", flow.len(), inst.edge_count()));
    }
    let mut arcs = Vec::new();
    for (e, (data, x)) in inst.edges.iter().zip(flow).enumerate() {
        if x.is_negative() || x.gt(&data.capacity) {
            return usage(format!(
                "flow {} on edge {e} violates its capacity {}",
                Show(x),
                Show(&data.capacity)
            ));
        }
        let (v, w) = inst.graph.edge(e);
        if x.lt(&data.capacity) {
            arcs.push(ResidualArc {
                tail: v,
                head: w,
                base: e,
                direction: ArcDirection::Forward,
                cost: data.cost.clone(),
                a_tail: data.a_tail.clone(),
                a_head: data.a_head.clone(),
            });
        }
        if x.is_positive() {
            arcs.push(ResidualArc {
                tail: w,
                head: v,
                base: e,
                direction: ArcDirection::Reverse,
                cost: -data.cost.clone(),
                a_tail: -data.a_head.clone(),
                a_head: -data.a_tail.clone(),
            });
        }
    }
    let graph = DirectedGraph::new(inst.vertex_count(), arcs.iter().map(|a| (a.tail, a.head)).collect())?;
    Ok(ResidualNetwork { graph, arcs })
}

impl<S: Scalar> ResidualNetwork<S> {
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, a: ArcId) -> &ResidualArc<S> {
        &self.arcs[a]
    }

    pub fn arcs(&self) -> &[ResidualArc<S>] {
        &self.arcs
    }

    /// Arcs leaving `v`.
    pub fn out_arcs(&self, v: VertexId) -> impl Iterator<Item = ArcId> + '_ {
        self.graph.incident(v).iter().copied().filter(move |&a| self.arcs[a].tail == v)
    }

    /// `δ` at the vertex joining `prev` to `next`.
    pub fn delta(&self, prev: ArcId, next: ArcId) -> S {
        self.arcs[prev].a_head.abs() / self.arcs[next].a_tail.abs()
    }

    fn check_walk(&self, walk: &[ArcId]) -> Result<()> {
        if walk.is_empty() {
            return usage("a walk needs at least one arc");
        }
        if let Some(&a) = walk.iter().find(|&&a| a >= self.arcs.len()) {
            return usage(format!("arc {a} does not exist"));
        }
        for pair in walk.windows(2) {
            if self.arcs[pair[0]].head != self.arcs[pair[1]].tail {
                return usage(format!("arcs {} and {} are not consecutive", pair[0], pair[1]));
            }
        }
        Ok(())
    }

    /// Vertices `v_1 … v_{k+1}` visited by a consecutive walk.
    pub fn walk_vertices(&self, walk: &[ArcId]) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = walk.iter().map(|&a| self.arcs[a].tail).collect();
        if let Some(&last) = walk.last() {
            out.push(self.arcs[last].head);
        }
        out
    }

    fn check_path(&self, path: &[ArcId]) -> Result<()> {
        self.check_walk(path)?;
        let mut vs = self.walk_vertices(path);
        vs.sort_unstable();
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return usage("path repeats a vertex");
        }
        Ok(())
    }

    fn check_cycle(&self, cycle: &[ArcId]) -> Result<()> {
        self.check_walk(cycle)?;
        let first = self.arcs[cycle[0]].tail;
        if self.arcs[cycle[cycle.len() - 1]].head != first {
            return usage("arcs do not close into a cycle");
        }
        Ok(())
    }

    /// Running products `P_i = Π_{j=2}^{i} δ(v_j, e_{j-1}, e_j)`, with `P_1 = 1`.
    pub fn prefix_products(&self, walk: &[ArcId]) -> Vec<S> {
        let mut out = Vec::with_capacity(walk.len());
        let mut p = S::one();
        for (i, &a) in walk.iter().enumerate() {
            if i > 0 {
                p = p * self.delta(walk[i - 1], a);
            }
            out.push(p.clone());
        }
        out
    }

    /// Closed-form `c_1 + Σ_{i≥2} c_i P_i` on any consecutive walk.
    pub fn walk_cost(&self, walk: &[ArcId]) -> Result<S> {
        self.check_walk(walk)?;
        Ok(self.closed_form(walk))
    }

    fn closed_form(&self, walk: &[ArcId]) -> S {
        self.prefix_products(walk)
            .into_iter()
            .zip(walk)
            .fold(S::zero(), |acc, (p, &a)| acc + self.arcs[a].cost.clone() * p)
    }

    fn nested_form(&self, walk: &[ArcId]) -> S {
        let k = walk.len();
        let mut acc = self.arcs[walk[k - 1]].cost.clone();
        for i in (0..k - 1).rev() {
            acc = self.arcs[walk[i]].cost.clone() + self.delta(walk[i], walk[i + 1]) * acc;
        }
        acc
    }

    /// `c(C)` for the cycle starting with arc `cycle[0]`. Both the nested and
    /// the expanded expression are evaluated and must agree.
    pub fn cycle_cost(&self, cycle: &[ArcId]) -> Result<S> {
        self.check_cycle(cycle)?;
        let closed = self.closed_form(cycle);
        let nested = self.nested_form(cycle);
        if !closed.approx_eq(&nested) {
            return Err(Error::Inconsistent(format!(
                "cycle cost forms disagree: {} vs {}",
                Show(&closed),
                Show(&nested)
            )));
        }
        Ok(closed)
    }

    /// `l(S)` for a simple directed path.
    pub fn path_cost(&self, path: &[ArcId]) -> Result<S> {
        self.check_path(path)?;
        Ok(self.closed_form(path))
    }

    /// `t(S)`: the smallest prefix product `P_j`, `j ≥ 2`; 1 for a single arc.
    pub fn reducer(&self, path: &[ArcId]) -> Result<S> {
        self.check_path(path)?;
        let products = self.prefix_products(path);
        Ok(min_tail(&products))
    }
}

fn min_tail<S: Scalar>(products: &[S]) -> S {
    products[1..]
        .iter()
        .fold(None, |m: Option<S>, p| Some(m.map_or_else(|| p.clone(), |m| S::min_of(&m, p))))
        .unwrap_or_else(S::one)
}

/// True for the two-arc cycle made of an arc and its own reversal.
pub fn is_trivial_two_cycle<S>(net: &ResidualNetwork<S>, cycle: &[ArcId]) -> bool {
    cycle.len() == 2 && net.arcs[cycle[0]].base == net.arcs[cycle[1]].base
}

/// Visits every simple directed cycle once, starting at its smallest vertex.
/// Returns the number visited.
pub fn for_each_simple_cycle<S: Scalar>(
    net: &ResidualNetwork<S>,
    caps: &SizeCaps,
    mut visit: impl FnMut(&[ArcId]),
) -> Result<usize> {
    let n = net.vertex_count();
    if n > caps.enum_vertices {
        return Err(Error::SizeCap { what: "enumeration vertices", limit: caps.enum_vertices });
    }
    let mut count = 0usize;
    let mut on_path = vec![false; n];
    let mut stack: Vec<ArcId> = Vec::new();
    for start in 0..n {
        on_path[start] = true;
        cycles_from(net, caps, start, start, &mut on_path, &mut stack, &mut count, &mut visit)?;
        on_path[start] = false;
    }
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn cycles_from<S: Scalar>(
    net: &ResidualNetwork<S>,
    caps: &SizeCaps,
    start: VertexId,
    v: VertexId,
    on_path: &mut [bool],
    stack: &mut Vec<ArcId>,
    count: &mut usize,
    visit: &mut impl FnMut(&[ArcId]),
) -> Result<()> {
    for a in net.out_arcs(v) {
        let w = net.arcs[a].head;
        if w < start {
            continue;
        }
        stack.push(a);
        if w == start {
            *count += 1;
            if *count > caps.enum_objects {
                return Err(Error::SizeCap { what: "enumerated cycles", limit: caps.enum_objects });
            }
            visit(stack);
        } else if !on_path[w] {
            on_path[w] = true;
            cycles_from(net, caps, start, w, on_path, stack, count, visit)?;
            on_path[w] = false;
        }
        stack.pop();
    }
    Ok(())
}

/// Visits every simple directed path with at least one arc, passing the
/// arcs and their prefix products. Returns the number visited.
pub fn for_each_simple_path<S: Scalar>(
    net: &ResidualNetwork<S>,
    caps: &SizeCaps,
    mut visit: impl FnMut(&[ArcId], &[S]),
) -> Result<usize> {
    let n = net.vertex_count();
    if n > caps.enum_vertices {
        return Err(Error::SizeCap { what: "enumeration vertices", limit: caps.enum_vertices });
    }
    let mut count = 0usize;
    let mut on_path = vec![false; n];
    let mut arcs = Vec::new();
    let mut products = Vec::new();
    for start in 0..n {
        on_path[start] = true;
        paths_from(net, caps, start, &mut on_path, &mut arcs, &mut products, &mut count, &mut visit)?;
        on_path[start] = false;
    }
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn paths_from<S: Scalar>(
    net: &ResidualNetwork<S>,
    caps: &SizeCaps,
    v: VertexId,
    on_path: &mut [bool],
    arcs: &mut Vec<ArcId>,
    products: &mut Vec<S>,
    count: &mut usize,
    visit: &mut impl FnMut(&[ArcId], &[S]),
) -> Result<()> {
    for a in net.out_arcs(v) {
        let w = net.arcs[a].head;
        if on_path[w] {
            continue;
        }
        let p = match arcs.last() {
            Some(&prev) => products.last().cloned().unwrap_or_else(S::one) * net.delta(prev, a),
            None => S::one(),
        };
        arcs.push(a);
        products.push(p);
        *count += 1;
        if *count > caps.enum_objects {
            return Err(Error::SizeCap { what: "enumerated paths", limit: caps.enum_objects });
        }
        visit(arcs, products);
        on_path[w] = true;
        paths_from(net, caps, w, on_path, arcs, products, count, visit)?;
        on_path[w] = false;
        arcs.pop();
        products.pop();
    }
    Ok(())
}

/// Minimum cycle cost with the cycle (rotated to its minimizing start arc)
/// that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma<S> {
    pub value: S,
    pub cycle: Vec<ArcId>,
}

/// `σ(x)` over all simple directed cycles and all their rotations, skipping
/// an arc paired with its own reversal. `None` stands for `+∞`.
pub fn sigma<S: Scalar>(net: &ResidualNetwork<S>, caps: &SizeCaps) -> Result<(Option<Sigma<S>>, usize)> {
    let mut best: Option<Sigma<S>> = None;
    let mut failure = None;
    let count = for_each_simple_cycle(net, caps, |cycle| {
        if failure.is_some() || is_trivial_two_cycle(net, cycle) {
            return;
        }
        let k = cycle.len();
        for r in 0..k {
            let rotated: Vec<ArcId> = cycle[r..].iter().chain(&cycle[..r]).copied().collect();
            match net.cycle_cost(&rotated) {
                Ok(c) => {
                    if best.as_ref().is_none_or(|b| c.lt(&b.value)) {
                        best = Some(Sigma { value: c, cycle: rotated });
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((best, count)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostProfile<S> {
    /// `None` when the network has no directed cycle.
    pub sigma: Option<Sigma<S>>,
    /// Largest `|l(S)|` over simple paths.
    pub l_max: S,
    /// Smallest reducer over simple paths.
    pub t_min: S,
    pub cycle_count: usize,
    pub path_count: usize,
}

pub fn cost_profile<S: Scalar>(net: &ResidualNetwork<S>, caps: &SizeCaps) -> Result<CostProfile<S>> {
    let (sigma, cycle_count) = sigma(net, caps)?;
    let mut l_max = S::zero();
    let mut t_min = S::one();
    let path_count = for_each_simple_path(net, caps, |arcs, products| {
        let l: S = arcs
            .iter()
            .zip(products)
            .fold(S::zero(), |acc, (&a, p)| acc + net.arcs[a].cost.clone() * p.clone());
        l_max = S::max_of(&l_max, &l.abs());
        if let Some(p) = products.last().filter(|_| products.len() > 1) {
            t_min = S::min_of(&t_min, p);
        }
    })?;
    Ok(CostProfile { sigma, l_max, t_min, cycle_count, path_count })
}

/// `ceil((L / (2σT) + 1)·n)`. `sigma = None` (no cycles) gives `n`.
pub fn iteration_bound<S: Scalar>(l_max: &S, sigma: Option<&S>, t_min: &S, n: usize) -> Result<u64> {
    if !t_min.is_positive() {
        return usage("the reducer bound T must be positive");
    }
    let Some(sigma) = sigma else {
        return Ok(n as u64);
    };
    if !sigma.is_positive() {
        return usage(format!(
            "sigma = {} is not positive, so the optimum is not unique",
            Show(sigma)
        ));
    }
    let two = S::from_i64(2);
    let value = (l_max.clone() / (two * sigma.clone() * t_min.clone()) + S::one()) * S::from_i64(n as i64);
    value
        .ceil_u64()
        .ok_or_else(|| Error::Usage("iteration bound does not fit in 64 bits".into()))
}

impl<S: Scalar> CostProfile<S> {
    pub fn bound(&self, n: usize) -> Result<u64> {
        iteration_bound(&self.l_max, self.sigma.as_ref().map(|s| &s.value), &self.t_min, n)
    }
}

/// Largest `ε` that keeps every base edge of `cycle` within its bounds when
/// pushed, and the base edge that binds first.
pub fn max_epsilon<S: Scalar>(
    inst: &GmnfInstance<S>,
    flow: &[S],
    net: &ResidualNetwork<S>,
    cycle: &[ArcId],
) -> Result<(S, EdgeId)> {
    net.check_cycle(cycle)?;
    let mut best: Option<(S, EdgeId)> = None;
    for (p, &a) in net.prefix_products(cycle).iter().zip(cycle) {
        let arc = &net.arcs[a];
        let slack = match arc.direction {
            ArcDirection::Forward => inst.edges[arc.base].capacity.clone() - flow[arc.base].clone(),
            ArcDirection::Reverse => flow[arc.base].clone(),
        };
        let limit = slack / p.clone();
        if best.as_ref().is_none_or(|(b, _)| limit.lt(b)) {
            best = Some((limit, arc.base));
        }
    }
    Ok(best.expect("cycle is non-empty"))
}

/// Pushes `ε` on the first arc and `ε·P_i` on arc `i`, raising forward and
/// lowering reverse base edges. Feasibility of the result and a cost change
/// of exactly `ε·c(C)` are verified.
pub fn push_cycle<S: Scalar>(
    inst: &GmnfInstance<S>,
    flow: &[S],
    net: &ResidualNetwork<S>,
    cycle: &[ArcId],
    epsilon: &S,
) -> Result<Vec<S>> {
    let cost = net.cycle_cost(cycle)?;
    if epsilon.is_negative() {
        return usage("epsilon must be non-negative");
    }
    let (limit, binding) = max_epsilon(inst, flow, net, cycle)?;
    if epsilon.gt(&limit) {
        return usage(format!(
            "epsilon {} exceeds {} allowed by the capacity of edge {binding}",
            Show(epsilon),
            Show(&limit)
        ));
    }
    let mut out = flow.to_vec();
    for (p, &a) in net.prefix_products(cycle).iter().zip(cycle) {
        let arc = &net.arcs[a];
        let amount = epsilon.clone() * p.clone();
        let x = &mut out[arc.base];
        *x = match arc.direction {
            ArcDirection::Forward => x.clone() + amount,
            ArcDirection::Reverse => x.clone() - amount,
        };
    }
    if !inst.is_feasible(&out) {
        return Err(Error::Inconsistent("pushed flow violates a balance constraint".into()));
    }
    let change = inst.objective(&out) - inst.objective(flow);
    let expected = epsilon.clone() * cost;
    if !change.approx_eq(&expected) {
        return Err(Error::Inconsistent(format!(
            "cost changed by {} instead of {}",
            Show(&change),
            Show(&expected)
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpliceCheck<S> {
    /// `l(R)` of the spliced walk.
    pub spliced: S,
    pub path: S,
    pub cycle: S,
    /// The factor multiplying `c(C)` in `l(R) - l(S)`.
    pub factor: S,
    pub holds: bool,
}

/// Splices `cycle` into `path` at the interior vertex `v_p` (`p` is 0-based
/// into the path's vertex list) and tests `l(R) ≥ l(S) + T·c(C)`.
pub fn check_splice<S: Scalar>(
    net: &ResidualNetwork<S>,
    path: &[ArcId],
    p: usize,
    cycle: &[ArcId],
    t_min: &S,
) -> Result<SpliceCheck<S>> {
    let vertices = net.walk_vertices(path);
    net.check_path(path)?;
    net.check_cycle(cycle)?;
    if p == 0 || p + 1 >= vertices.len() {
        return usage("the splice vertex must be an interior vertex of the path");
    }
    if net.arcs[cycle[0]].tail != vertices[p] {
        return usage("cycle does not start at the splice vertex");
    }
    let spliced: Vec<ArcId> = path[..p].iter().chain(cycle).chain(&path[p..]).copied().collect();
    let l_r = net.walk_cost(&spliced)?;
    let l_s = net.path_cost(path)?;
    let c = net.cycle_cost(cycle)?;
    let factor = net.prefix_products(&spliced)[p].clone();
    let holds = l_r.ge(&(l_s.clone() + t_min.clone() * c.clone()));
    Ok(SpliceCheck { spliced: l_r, path: l_s, cycle: c, factor, holds })
}

/// Splits a walk into a simple path and simple cycles by cutting out the
/// cycle closed at each repeated vertex as soon as it appears.
pub fn decompose_walk<S: Scalar>(
    net: &ResidualNetwork<S>,
    walk: &[ArcId],
) -> Result<(Vec<ArcId>, Vec<Vec<ArcId>>)> {
    net.check_walk(walk)?;
    let mut position = vec![None; net.vertex_count()];
    let mut vertices = vec![net.arcs[walk[0]].tail];
    let mut arcs: Vec<ArcId> = Vec::new();
    position[vertices[0]] = Some(0usize);
    let mut cycles = Vec::new();
    for &a in walk {
        let w = net.arcs[a].head;
        arcs.push(a);
        match position[w] {
            Some(j) => {
                cycles.push(arcs.split_off(j));
                for v in vertices.drain(j + 1..) {
                    position[v] = None;
                }
            }
            None => {
                position[w] = Some(vertices.len());
                vertices.push(w);
            }
        }
    }
    Ok((arcs, cycles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::ratio::check_gauge;
    use crate::scalar::Rational;

    fn caps() -> SizeCaps {
        SizeCaps::default()
    }

    #[test]
    fn arcs_follow_flow_position() {
        let inst = instance(2, &[(0, 1, z(3), z(2), z(2), z(-1))], vec![z(0); 2]);
        let both = build_residual(&inst, &[z(1)]).unwrap();
        assert_eq!(both.arc_count(), 2);
        let rev = &both.arcs()[1];
        assert_eq!((rev.tail, rev.head, rev.direction), (1, 0, ArcDirection::Reverse));
        assert_eq!((rev.cost.clone(), rev.a_tail.clone(), rev.a_head.clone()), (z(-3), z(1), z(-2)));
        assert_eq!(build_residual(&inst, &[z(0)]).unwrap().arcs()[0].direction, ArcDirection::Forward);
        let full = build_residual(&inst, &[z(2)]).unwrap();
        assert_eq!(full.arc_count(), 1);
        assert_eq!(full.arcs()[0].direction, ArcDirection::Reverse);
        assert!(build_residual(&inst, &[z(3)]).is_err());
    }

    #[test]
    fn residual_stays_ratio_balanced() {
        let inst = triangle([(1, 2), (1, 3), (6, 1)]);
        assert!(check_gauge(&inst).is_balanced());
        let net = build_residual(&inst, &[q(1, 2), z(0), z(1)]).unwrap();
        assert!(check_gauge(&net).is_balanced());
    }

    #[test]
    fn two_cycle_with_gain() {
        // arcs 0→1 and 1→0 on distinct base edges; δ at vertex 1 is 2.
        let inst = instance(
            2,
            &[(0, 1, z(4), z(1), z(1), z(-2)), (1, 0, z(-2), z(1), z(1), z(-1))],
            vec![z(0); 2],
        );
        let net = build_residual(&inst, &[z(0), z(0)]).unwrap();
        assert_eq!(net.cycle_cost(&[0, 1]).unwrap(), z(0));
        assert!(net.cycle_cost(&[0]).is_err());
    }

    #[test]
    fn path_cost_and_reducer() {
        let inst = instance(
            3,
            &[(0, 1, z(1), z(1), z(1), z(-1)), (1, 2, z(2), z(1), z(2), z(-1))],
            vec![z(0); 3],
        );
        let net = build_residual(&inst, &[z(0), z(0)]).unwrap();
        assert_eq!(net.path_cost(&[0, 1]).unwrap(), z(2));
        assert_eq!(net.reducer(&[0, 1]).unwrap(), q(1, 2));
        assert_eq!(net.path_cost(&[1]).unwrap(), z(2));
        assert_eq!(net.reducer(&[1]).unwrap(), z(1));
        assert!(net.path_cost(&[1, 0]).is_err());
    }

    #[test]
    fn unit_triangle_sigma_is_plain_cycle_cost() {
        let mut inst = triangle([(1, 1); 3]);
        inst.edges[2].cost = z(-1);
        let net = build_residual(&inst, &vec![z(0); 3]).unwrap();
        let (s, count) = sigma(&net, &caps()).unwrap();
        assert_eq!(count, 1);
        assert_eq!(s.unwrap().value, z(1));
        let profile = cost_profile(&net, &caps()).unwrap();
        assert_eq!(profile.l_max, z(2));
        assert_eq!(profile.t_min, z(1));
        assert_eq!(profile.path_count, 6);
    }

    #[test]
    fn sigma_skips_self_reversal_but_keeps_parallel_pairs() {
        let inst = instance(
            2,
            &[(0, 1, z(1), z(2), z(1), z(-1)), (0, 1, z(3), z(2), z(1), z(-1))],
            vec![z(0); 2],
        );
        let net = build_residual(&inst, &[z(1), z(0)]).unwrap();
        let (s, count) = sigma(&net, &caps()).unwrap();
        assert_eq!(count, 2);
        // forward edge 1 then reverse edge 0: 3 - 1
        assert_eq!(s.unwrap().value, z(2));
    }

    #[test]
    fn acyclic_sigma_is_infinite() {
        let inst = instance(3, &[(0, 1, z(1), z(1), z(1), z(-1)), (1, 2, z(1), z(1), z(1), z(-1))], vec![z(0); 3]);
        let net = build_residual(&inst, &[z(0), z(0)]).unwrap();
        assert!(sigma(&net, &caps()).unwrap().0.is_none());
        let profile = cost_profile(&net, &caps()).unwrap();
        assert_eq!(profile.bound(3).unwrap(), 3);
    }

    #[test]
    fn rotation_scales_by_positive_factor() {
        let inst = triangle([(1, 2), (1, 3), (6, 1)]);
        let net = build_residual(&inst, &vec![z(0); 3]).unwrap();
        let c0 = net.cycle_cost(&[0, 1, 2]).unwrap();
        let c1 = net.cycle_cost(&[1, 2, 0]).unwrap();
        assert_eq!(c1, c0 / net.delta(0, 1));
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(iteration_bound(&z(4), Some(&z(1)), &z(1), 3).unwrap(), 9);
        assert_eq!(iteration_bound(&z(0), Some(&z(1)), &z(1), 5).unwrap(), 5);
        assert_eq!(iteration_bound(&q(5, 2), Some(&q(1, 3)), &q(1, 2), 2).unwrap(), 17);
        assert!(iteration_bound(&z(1), Some(&z(0)), &z(1), 2).is_err());
    }

    #[test]
    fn push_along_gain_cycle() {
        let inst = triangle([(1, 2), (1, 3), (6, 1)]);
        let flow = vec![z(0); 3];
        let net = build_residual(&inst, &flow).unwrap();
        let cycle = [0, 1, 2];
        let (limit, binding) = max_epsilon(&inst, &flow, &net, &cycle).unwrap();
        // ε, 2ε, ε on capacity-1 edges
        assert_eq!((limit.clone(), binding), (q(1, 2), 1));
        let eps = limit / z(2);
        let out = push_cycle(&inst, &flow, &net, &cycle, &eps).unwrap();
        assert_eq!(out, vec![q(1, 4), q(1, 2), q(1, 4)]);
        assert_eq!(push_cycle(&inst, &flow, &net, &cycle, &z(0)).unwrap(), flow);
        assert!(push_cycle(&inst, &flow, &net, &cycle, &z(1)).is_err());
    }

    #[test]
    fn decomposition_reassembles_walk() {
        let inst = triangle([(1, 1); 3]);
        let net = build_residual(&inst, &vec![z(0); 3]).unwrap();
        let walk = [0, 1, 2, 0, 1, 2, 0];
        let (path, cycles) = decompose_walk(&net, &walk).unwrap();
        assert_eq!(path, vec![0]);
        assert_eq!(cycles.len(), 2);
        let mut all: Vec<_> = cycles.concat();
        all.extend(&path);
        all.sort_unstable();
        let mut expected = walk.to_vec();
        expected.sort_unstable();
        assert_eq!(all, expected);
    }

    #[test]
    fn splice_on_unit_graph() {
        let inst = instance(
            3,
            &[
                (0, 1, z(1), z(1), z(1), z(-1)),
                (1, 2, z(1), z(1), z(1), z(-1)),
                (2, 1, z(1), z(1), z(1), z(-1)),
            ],
            vec![z(0); 3],
        );
        let net = build_residual(&inst, &vec![z(0); 3]).unwrap();
        let check = check_splice(&net, &[0, 1], 1, &[1, 2], &Rational::from_i64(1)).unwrap();
        assert_eq!((check.spliced.clone(), check.path.clone(), check.cycle.clone()), (z(4), z(2), z(2)));
        assert!(check.holds);
        assert!(check_splice(&net, &[0, 1], 0, &[1, 2], &z(1)).is_err());
        assert!(check_splice(&net, &[0], 1, &[1, 2], &z(1)).is_err());
    }
}
