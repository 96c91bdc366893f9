//! Computation trees `T_e^N`, the problem they induce, an exact tree solver
//! and the BP-versus-tree comparison.

use std::fmt::Write as _;

use crate::bp::{self, constrained_message, rescaled, BpConfig, Stopping};
use crate::caps::SizeCaps;
use crate::error::{usage, Error, Result};
use crate::model::{DirectedGraph, EdgeData, EdgeId, Endpoint, GmnfInstance, VertexId};
use crate::pwl::ConvexPwl;
use crate::scalar::{Scalar, Show};

pub type NodeId = usize;
pub type TreeEdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// `Γ(node)`.
    pub base: VertexId,
    pub level: usize,
    /// Edge toward the root; the root edge for both level-0 nodes.
    pub up: TreeEdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub tail: NodeId,
    pub head: NodeId,
    /// `Γ(edge)`.
    pub base: EdgeId,
}

/// Unrolled tree rooted at tree edge 0, which joins nodes 0 and 1.
///
/// Nodes are numbered breadth-first and children follow base edge order, so
/// every node is created after its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationTree {
    pub root_edge: EdgeId,
    pub depth: usize,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

impl ComputationTree {
    /// Node on the far side of `edge` from `node`.
    fn other(&self, edge: TreeEdgeId, node: NodeId) -> NodeId {
        let t = &self.edges[edge];
        if t.tail == node {
            t.head
        } else {
            t.tail
        }
    }

    fn side(&self, edge: TreeEdgeId, node: NodeId) -> Endpoint {
        if self.edges[edge].tail == node {
            Endpoint::Tail
        } else {
            Endpoint::Head
        }
    }

    /// Child edges of `node`, in creation order.
    pub fn children(&self, node: NodeId) -> Vec<TreeEdgeId> {
        (2..self.nodes.len())
            .filter(|&k| self.other(self.nodes[k].up, k) == node)
            .map(|k| self.nodes[k].up)
            .collect()
    }

    /// Checks that `Γ` preserves direction and is a bijection between the
    /// incident edges of every node below the last level and those of its
    /// image.
    pub fn verify<S>(&self, inst: &GmnfInstance<S>) -> Result<()> {
        let mut incident: Vec<Vec<TreeEdgeId>> = vec![Vec::new(); self.nodes.len()];
        for (t, edge) in self.edges.iter().enumerate() {
            let (bt, bh) = inst.graph.edge(edge.base);
            if self.nodes[edge.tail].base != bt || self.nodes[edge.head].base != bh {
                return Err(Error::Inconsistent(format!("tree edge {t} does not follow its base edge")));
            }
            incident[edge.tail].push(t);
            incident[edge.head].push(t);
        }
        for (u, node) in self.nodes.iter().enumerate() {
            if node.level >= self.depth {
                continue;
            }
            let mut images: Vec<EdgeId> = incident[u].iter().map(|&t| self.edges[t].base).collect();
            let mut expected = inst.graph.incident(node.base).to_vec();
            images.sort_unstable();
            expected.sort_unstable();
            if images != expected {
                return Err(Error::Inconsistent(format!("node {u} is not a local copy of vertex {}", node.base)));
            }
        }
        Ok(())
    }

    /// Indented listing, one node per line, children below their parent.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "root edge {} depth {}", self.root_edge, self.depth);
        for root in [0, 1] {
            self.dump_node(root, 1, &mut out);
        }
        out
    }

    fn dump_node(&self, node: NodeId, indent: usize, out: &mut String) {
        let n = &self.nodes[node];
        let _ = writeln!(
            out,
            "{:width$}node {node} = v{} (level {}, via edge {})",
            "",
            n.base,
            n.level,
            self.edges[n.up].base,
            width = 2 * indent
        );
        for t in self.children(node) {
            self.dump_node(self.other(t, node), indent + 1, out);
        }
    }
}

/// Unrolls `inst` around edge `e` to depth `depth`.
pub fn build_tree<S>(inst: &GmnfInstance<S>, e: EdgeId, depth: usize, caps: &SizeCaps) -> Result<ComputationTree> {
    if e >= inst.graph.edge_count() {
        return usage(format!("edge {e} does not exist"));
    }
    let (v, w) = inst.graph.edge(e);
    let mut tree = ComputationTree {
        root_edge: e,
        depth,
        nodes: vec![TreeNode { base: v, level: 0, up: 0 }, TreeNode { base: w, level: 0, up: 0 }],
        edges: vec![TreeEdge { tail: 0, head: 1, base: e }],
    };
    let mut frontier = vec![0, 1];
    for level in 0..depth {
        let mut next = Vec::new();
        for &node in &frontier {
            let base = tree.nodes[node].base;
            let up_base = tree.edges[tree.nodes[node].up].base;
            for &be in inst.graph.incident(base) {
                if be == up_base {
                    continue;
                }
                if tree.nodes.len() >= caps.tree_nodes {
                    return Err(Error::SizeCap { what: "computation tree nodes", limit: caps.tree_nodes });
                }
                let far = inst.graph.other_end(be, base).expect("incident");
                let child = tree.nodes.len();
                let t = tree.edges.len();
                tree.nodes.push(TreeNode { base: far, level: level + 1, up: t });
                let (tail, head) = if inst.graph.edge(be).0 == base { (node, child) } else { (child, node) };
                tree.edges.push(TreeEdge { tail, head, base: be });
                next.push(child);
            }
        }
        frontier = next;
    }
    Ok(tree)
}

/// The instance carried by a tree together with the nodes whose balance row
/// is imposed.
#[derive(Debug, Clone)]
pub struct TreeProblem<S> {
    pub instance: GmnfInstance<S>,
    pub constrained: Vec<bool>,
}

/// Copies costs, capacities, coefficients and balances through `Γ`; nodes
/// on the last level are left unconstrained.
pub fn induced_problem<S: Scalar>(tree: &ComputationTree, inst: &GmnfInstance<S>) -> Result<TreeProblem<S>> {
    let graph = DirectedGraph::new(tree.nodes.len(), tree.edges.iter().map(|t| (t.tail, t.head)).collect())?;
    let edges: Vec<EdgeData<S>> = tree.edges.iter().map(|t| inst.edges[t.base].clone()).collect();
    let balance = tree.nodes.iter().map(|n| inst.balance[n.base].clone()).collect();
    let constrained = tree.nodes.iter().map(|n| n.level < tree.depth).collect();
    Ok(TreeProblem { instance: GmnfInstance::new(graph, edges, balance)?, constrained })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution<S> {
    pub value: S,
    /// One optimal flow, per tree edge.
    pub flow: Vec<S>,
    /// Every optimal value of the root edge.
    pub root_argmin: (S, S),
    /// Optimal cost as a function of the root edge flow.
    pub root_function: ConvexPwl<S>,
}

/// Exact optimum of the tree problem. `None` when it is infeasible.
pub fn solve_tree<S: Scalar>(tree: &ComputationTree, problem: &TreeProblem<S>) -> Result<Option<TreeSolution<S>>> {
    let inst = &problem.instance;
    let n = tree.nodes.len();
    let children: Vec<Vec<TreeEdgeId>> = {
        let mut c = vec![Vec::new(); n];
        for (u, node) in tree.nodes.iter().enumerate().skip(2) {
            c[tree.other(node.up, u)].push(node.up);
        }
        c
    };
    let coeff = |t: TreeEdgeId, u: NodeId| inst.coeff_at(t, tree.side(t, u));

    // up[u]: optimal cost of u's subtree plus its up edge, as a function of
    // the up edge flow.
    let mut up: Vec<Option<ConvexPwl<S>>> = vec![None; n];
    for u in (0..n).rev() {
        let t = tree.nodes[u].up;
        let d = &inst.edges[t];
        let msg = if problem.constrained[u] {
            let incoming: Vec<(&S, &ConvexPwl<S>)> = children[u]
                .iter()
                .map(|&c| (coeff(c, u), up[tree.other(c, u)].as_ref().expect("child first")))
                .collect();
            constrained_message(incoming, coeff(t, u), &inst.balance[u], &d.cost, &d.capacity)?
        } else if children[u].is_empty() {
            ConvexPwl::edge_cost(d.cost.clone(), d.capacity.clone())?
        } else {
            return usage("an unconstrained node has children");
        };
        up[u] = Some(msg);
    }
    let root_cost = &inst.edges[0].cost;
    let root_function = up[0]
        .as_ref()
        .expect("root")
        .add(up[1].as_ref().expect("root"))?
        .add_linear(&-root_cost.clone());
    let Some(best) = root_function.minimum() else {
        return Ok(None);
    };

    let mut flow = vec![S::zero(); tree.edges.len()];
    flow[0] = best.lo.clone();
    let mut stack = vec![0, 1];
    while let Some(u) = stack.pop() {
        if children[u].is_empty() {
            continue;
        }
        let t = tree.nodes[u].up;
        let parts: Vec<ConvexPwl<S>> = children[u]
            .iter()
            .map(|&c| rescaled(coeff(c, u), up[tree.other(c, u)].as_ref().expect("computed")))
            .collect::<Result<_>>()?;
        let total = inst.balance[u].clone() - coeff(t, u).clone() * flow[t].clone();
        let shares = ConvexPwl::split_sum(&parts, &total)
            .ok_or_else(|| Error::Inconsistent(format!("no split of {} at tree node {u}", Show(&total))))?;
        for (&c, s) in children[u].iter().zip(shares) {
            flow[c] = s / coeff(c, u).clone();
            stack.push(tree.other(c, u));
        }
    }
    let value = inst.objective(&flow);
    if !value.approx_eq(&best.value) {
        return Err(Error::Inconsistent(format!(
            "extracted tree flow costs {} but the optimum is {}",
            Show(&value),
            Show(&best.value)
        )));
    }
    Ok(Some(TreeSolution { value, flow, root_argmin: (best.lo, best.hi), root_function }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeAgreement<S> {
    pub edge: EdgeId,
    pub depth: usize,
    /// BP's decoded value on the edge; `None` if its belief is infeasible.
    pub bp_value: Option<S>,
    /// Root argmin interval of the tree problem; `None` if infeasible.
    pub interval: Option<(S, S)>,
    pub holds: bool,
}

/// Runs BP for `depth` iterations and checks that its decoded value on `e`
/// is an optimal root value of the depth-`depth` tree problem.
pub fn check_tree_agreement<S: Scalar>(
    inst: &GmnfInstance<S>,
    e: EdgeId,
    depth: usize,
    config: &BpConfig,
    caps: &SizeCaps,
) -> Result<TreeAgreement<S>> {
    let result = bp::run(inst, Stopping::Fixed(depth), config)?;
    let tree = build_tree(inst, e, depth, caps)?;
    let solution = solve_tree(&tree, &induced_problem(&tree, inst)?)?;
    Ok(compare(e, depth, &result, solution.map(|s| s.root_argmin)))
}

/// Same as [`check_tree_agreement`] for every edge, sharing one BP run.
pub fn check_tree_agreement_all<S: Scalar>(
    inst: &GmnfInstance<S>,
    depth: usize,
    config: &BpConfig,
    caps: &SizeCaps,
) -> Result<Vec<TreeAgreement<S>>> {
    let result = bp::run(inst, Stopping::Fixed(depth), config)?;
    (0..inst.edge_count())
        .map(|e| {
            let tree = build_tree(inst, e, depth, caps)?;
            let solution = solve_tree(&tree, &induced_problem(&tree, inst)?)?;
            Ok(compare(e, depth, &result, solution.map(|s| s.root_argmin)))
        })
        .collect()
}

fn compare<S: Scalar>(e: EdgeId, depth: usize, result: &bp::BpResult<S>, interval: Option<(S, S)>) -> TreeAgreement<S> {
    let bp_value = result.flow.as_ref().map(|f| f[e].clone());
    let holds = match (&bp_value, &interval) {
        (Some(x), Some((lo, hi))) => x.ge(lo) && x.le(hi),
        (None, None) => true,
        _ => false,
    };
    TreeAgreement { edge: e, depth, bp_value, interval, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::MessageInit;
    use crate::model::fixtures::*;
    use crate::oracle::solve_with_rows;
    use crate::scalar::Rational;

    fn caps() -> SizeCaps {
        SizeCaps::default()
    }

    #[test]
    fn depth_zero_is_the_root_edge() {
        let inst = triangle([(1, 1); 3]);
        let tree = build_tree(&inst, 1, 0, &caps()).unwrap();
        assert_eq!(tree.nodes.len(), 2);
        assert_eq!(tree.edges.len(), 1);
        tree.verify(&inst).unwrap();
    }

    #[test]
    fn triangle_depth_one() {
        let inst = triangle([(1, 2), (1, 3), (6, 1)]);
        let tree = build_tree(&inst, 0, 1, &caps()).unwrap();
        assert_eq!(tree.nodes.len(), 4);
        assert_eq!(tree.edges.len(), 3);
        tree.verify(&inst).unwrap();
        assert_eq!(tree.children(0), vec![1]);
        assert!(tree.dump().contains("node 3 = v2"));
    }

    #[test]
    fn node_cap() {
        let inst = triangle([(1, 1); 3]);
        let small = SizeCaps { tree_nodes: 5, ..SizeCaps::default() };
        assert!(matches!(build_tree(&inst, 0, 4, &small), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn depth_zero_solves_one_variable_problem() {
        let mut inst = triangle([(1, 1); 3]);
        for (c, expect) in [(3, (z(0), z(0))), (-3, (z(1), z(1))), (0, (z(0), z(1)))] {
            inst.edges[0].cost = z(c);
            let tree = build_tree(&inst, 0, 0, &caps()).unwrap();
            let sol = solve_tree(&tree, &induced_problem(&tree, &inst).unwrap()).unwrap().unwrap();
            assert_eq!(sol.root_argmin, expect);
        }
    }

    #[test]
    fn tree_solver_matches_oracle() {
        let mut inst = triangle([(1, 2), (1, 3), (6, 1)]);
        inst.edges[2].cost = z(-4);
        inst.balance = vec![z(1), z(-2), z(1)];
        for depth in 0..3 {
            for e in 0..3 {
                let tree = build_tree(&inst, e, depth, &caps()).unwrap();
                let problem = induced_problem(&tree, &inst).unwrap();
                let sol = solve_tree(&tree, &problem).unwrap();
                let oracle = solve_with_rows(&problem.instance, &problem.constrained, &caps()).unwrap();
                match sol {
                    Some(sol) => {
                        assert_eq!(Some(sol.value.clone()), oracle.value);
                        assert!(problem.instance.edges.len() == sol.flow.len());
                    }
                    None => assert!(oracle.value.is_none()),
                }
            }
        }
    }

    #[test]
    fn tree_agreement_on_triangle() {
        let mut inst = triangle([(1, 1); 3]);
        inst.edges[2].cost = z(-3);
        for depth in 1..5 {
            for check in check_tree_agreement_all(&inst, depth, &BpConfig::default(), &caps()).unwrap() {
                assert!(check.holds, "{check:?}");
            }
        }
    }

    #[test]
    fn zero_start_breaks_tree_agreement() {
        let mut inst = triangle([(1, 1); 3]);
        inst.edges[2].cost = z(-3);
        let config = BpConfig { init: MessageInit::Zero, ..BpConfig::default() };
        let check = check_tree_agreement(&inst, 0, 1, &config, &caps()).unwrap();
        assert_eq!(check.interval, Some((z(1), z(1))));
        assert_eq!(check.bp_value, Some(Rational::from_i64(0)));
        assert!(!check.holds);
    }
}
