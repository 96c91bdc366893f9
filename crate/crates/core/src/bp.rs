//! Synchronous min-sum belief propagation.
//!
//! Every edge `e = (v, w)` keeps two messages: `m_{e→v}` (built from the
//! balance constraint at `w`) and `m_{e→w}` (built from `v`). Each message is
//! an exact [`ConvexPwl`] with domain inside `[0, u_e]`. An iteration reads
//! only the previous buffer, so update order never matters.

use crate::error::{usage, Result};
use crate::model::{EdgeId, Endpoint, GmnfInstance};
use crate::pwl::{ConvexPwl, Minimum};
use crate::scalar::Scalar;

/// Initial messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MessageInit {
    /// `m^0 = φ_e`. With this start, `N` iterations compute exactly the
    /// value functions of the depth-`N` computation tree.
    #[default]
    EdgeCost,
    /// `m^0 = 0` on `[0, u_e]`.
    Zero,
}

/// How a belief combines the two messages of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeliefConvention {
    /// `m_{e→v} + m_{e→w} − φ_e`: each message already carries one `φ_e`.
    #[default]
    Single,
    /// `φ_e + m_{e→v} + m_{e→w}` taken literally.
    Paper,
}

/// Value reported when a belief's argmin is an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    Midpoint,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpConfig {
    pub init: MessageInit,
    pub belief: BeliefConvention,
    pub tie: TieRule,
    /// Shift every message to minimum zero after each update.
    pub normalize: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            init: MessageInit::default(),
            belief: BeliefConvention::default(),
            tie: TieRule::default(),
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stopping {
    /// Exactly this many iterations.
    Fixed(usize),
    /// Stop once the decoded flow is tie-free and unchanged for `window`
    /// consecutive iterations; give up after `max_iterations`.
    StableArgmin { window: usize, max_iterations: usize },
}

/// Both directed messages of every edge at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState<S> {
    iteration: usize,
    toward_tail: Vec<ConvexPwl<S>>,
    toward_head: Vec<ConvexPwl<S>>,
}

impl<S: Scalar> MessageState<S> {
    pub fn initial(inst: &GmnfInstance<S>, config: &BpConfig) -> Result<Self> {
        let mut msgs = Vec::with_capacity(inst.edge_count());
        for d in &inst.edges {
            let m = match config.init {
                MessageInit::EdgeCost => ConvexPwl::edge_cost(d.cost.clone(), d.capacity.clone())?,
                MessageInit::Zero => ConvexPwl::zero_on(S::zero(), d.capacity.clone())?,
            };
            msgs.push(if config.normalize { m.normalize() } else { m });
        }
        Ok(MessageState { iteration: 0, toward_tail: msgs.clone(), toward_head: msgs })
    }

    /// State with explicit messages, mainly for tests and tooling.
    pub fn from_messages(
        iteration: usize,
        toward_tail: Vec<ConvexPwl<S>>,
        toward_head: Vec<ConvexPwl<S>>,
    ) -> Result<Self> {
        if toward_tail.len() != toward_head.len() {
            return usage("message buffers differ in length");
        }
        Ok(MessageState { iteration, toward_tail, toward_head })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn edge_count(&self) -> usize {
        self.toward_tail.len()
    }

    /// `m_{e→x}` where `x` is the `toward` endpoint of `e`.
    pub fn message(&self, e: EdgeId, toward: Endpoint) -> &ConvexPwl<S> {
        match toward {
            Endpoint::Tail => &self.toward_tail[e],
            Endpoint::Head => &self.toward_head[e],
        }
    }
}

/// Recomputes `m_{e→toward}` from the previous buffer.
///
/// With `w` the opposite endpoint of `e`: each other incoming message
/// `m_{ẽ→w}` is rewritten in the signed contribution `s = a_w^ẽ·z̃`, the
/// rewritten functions are infimally convolved, the balance row at `w` is
/// imposed through `s = f_w − a_w^e·z`, and `φ_e` is added.
pub fn update_message<S: Scalar>(
    inst: &GmnfInstance<S>,
    state: &MessageState<S>,
    e: EdgeId,
    toward: Endpoint,
    config: &BpConfig,
) -> Result<ConvexPwl<S>> {
    if e >= inst.edge_count() || state.edge_count() != inst.edge_count() {
        return usage(format!("edge {e} is not part of this instance/state"));
    }
    let far = toward.opposite();
    let w = inst.graph.endpoint(e, far);
    let incoming = inst.graph.incident(w).iter().filter(|&&other| other != e).map(|&other| {
        let side = inst.graph.side_of(other, w).expect("incident");
        (inst.coeff_at(other, side), state.message(other, side))
    });
    let d = &inst.edges[e];
    let msg = constrained_message(incoming, inst.coeff_at(e, far), &inst.balance[w], &d.cost, &d.capacity)?;
    Ok(if config.normalize { msg.normalize() } else { msg })
}

/// `g(z) = m(z / a)`: a message in the signed contribution `s = a·z`.
pub(crate) fn rescaled<S: Scalar>(a: &S, msg: &ConvexPwl<S>) -> Result<ConvexPwl<S>> {
    msg.affine_precompose(&(S::one() / a.clone()), &S::zero())
}

/// `φ(z) + min { Σ m_i(z_i) : a·z + Σ a_i·z_i = f }` for incoming pairs
/// `(a_i, m_i)`.
pub(crate) fn constrained_message<'a, S: Scalar>(
    incoming: impl IntoIterator<Item = (&'a S, &'a ConvexPwl<S>)>,
    a: &S,
    f: &S,
    cost: &S,
    capacity: &S,
) -> Result<ConvexPwl<S>> {
    let mut contributions = ConvexPwl::point(S::zero(), S::zero());
    for (a_i, m_i) in incoming {
        contributions = contributions.inf_convolve(&rescaled(a_i, m_i)?)?;
    }
    contributions
        .affine_precompose(&-a.clone(), f)?
        .add(&ConvexPwl::edge_cost(cost.clone(), capacity.clone())?)
}

/// One synchronous sweep over all `2m` messages.
pub fn iterate<S: Scalar>(
    inst: &GmnfInstance<S>,
    state: &MessageState<S>,
    config: &BpConfig,
) -> Result<MessageState<S>> {
    let order: Vec<(EdgeId, Endpoint)> = (0..inst.edge_count())
        .flat_map(|e| [(e, Endpoint::Tail), (e, Endpoint::Head)])
        .collect();
    iterate_in_order(inst, state, config, &order)
}

/// Same as [`iterate`], visiting the messages in the given order, which must
/// list every `(edge, endpoint)` pair exactly once.
pub fn iterate_in_order<S: Scalar>(
    inst: &GmnfInstance<S>,
    state: &MessageState<S>,
    config: &BpConfig,
    order: &[(EdgeId, Endpoint)],
) -> Result<MessageState<S>> {
    let m = inst.edge_count();
    let mut toward_tail: Vec<Option<ConvexPwl<S>>> = vec![None; m];
    let mut toward_head: Vec<Option<ConvexPwl<S>>> = vec![None; m];
    for &(e, toward) in order {
        let slot = match toward {
            Endpoint::Tail => toward_tail.get_mut(e),
            Endpoint::Head => toward_head.get_mut(e),
        };
        let Some(slot) = slot else {
            return usage(format!("update order names missing edge {e}"));
        };
        if slot.is_some() {
            return usage(format!("update order repeats edge {e}"));
        }
        *slot = Some(update_message(inst, state, e, toward, config)?);
    }
    let collect = |v: Vec<Option<ConvexPwl<S>>>| -> Result<Vec<ConvexPwl<S>>> {
        v.into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| crate::Error::Usage("update order skips a message".into()))
    };
    Ok(MessageState {
        iteration: state.iteration + 1,
        toward_tail: collect(toward_tail)?,
        toward_head: collect(toward_head)?,
    })
}

/// Per-edge beliefs. Requires at least one completed iteration.
pub fn beliefs<S: Scalar>(
    inst: &GmnfInstance<S>,
    state: &MessageState<S>,
    convention: BeliefConvention,
) -> Result<Vec<ConvexPwl<S>>> {
    if state.iteration == 0 {
        return usage("beliefs need at least one iteration (t >= 1)");
    }
    (0..inst.edge_count())
        .map(|e| {
            let d = &inst.edges[e];
            let both = state.toward_tail[e].add(&state.toward_head[e])?;
            Ok(match convention {
                BeliefConvention::Single => both.add_linear(&-d.cost.clone()),
                BeliefConvention::Paper => both.add_linear(&d.cost),
            })
        })
        .collect()
}

/// Decoded flow estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BpResult<S> {
    /// `None` when some belief is infeasible.
    pub flow: Option<Vec<S>>,
    pub iterations: usize,
    pub converged: bool,
    /// Argmin interval of positive width.
    pub ties: Vec<bool>,
    pub infeasible: bool,
    pub infeasible_edges: Vec<EdgeId>,
    /// Per-edge argmin interval (`None` for infeasible beliefs).
    pub argmin: Vec<Option<(S, S)>>,
}

impl<S: Scalar> BpResult<S> {
    pub fn has_ties(&self) -> bool {
        self.ties.iter().any(|&t| t)
    }
}

/// Picks a minimizer of every belief.
pub fn decode<S: Scalar>(beliefs: &[ConvexPwl<S>], tie: TieRule) -> BpResult<S> {
    let mut flow = Vec::with_capacity(beliefs.len());
    let mut ties = Vec::with_capacity(beliefs.len());
    let mut argmin = Vec::with_capacity(beliefs.len());
    let mut infeasible_edges = Vec::new();
    for (e, b) in beliefs.iter().enumerate() {
        match b.minimum() {
            Some(Minimum { lo, hi, .. }) => {
                let wide = !lo.approx_eq(&hi);
                let value = match tie {
                    TieRule::Lower => lo.clone(),
                    TieRule::Upper => hi.clone(),
                    TieRule::Midpoint => (lo.clone() + hi.clone()) / S::from_i64(2),
                };
                flow.push(value);
                ties.push(wide);
                argmin.push(Some((lo, hi)));
            }
            None => {
                infeasible_edges.push(e);
                ties.push(false);
                argmin.push(None);
            }
        }
    }
    let infeasible = !infeasible_edges.is_empty();
    BpResult {
        flow: (!infeasible).then_some(flow),
        iterations: 0,
        converged: false,
        ties,
        infeasible,
        infeasible_edges,
        argmin,
    }
}

/// Runs BP under `stopping` and decodes. Fixed schedules report
/// `converged = true` unless the beliefs are infeasible.
pub fn run<S: Scalar>(inst: &GmnfInstance<S>, stopping: Stopping, config: &BpConfig) -> Result<BpResult<S>> {
    run_with_state(inst, stopping, config).map(|(result, _)| result)
}

/// [`run`], also returning the final message state.
pub fn run_with_state<S: Scalar>(
    inst: &GmnfInstance<S>,
    stopping: Stopping,
    config: &BpConfig,
) -> Result<(BpResult<S>, MessageState<S>)> {
    let mut state = MessageState::initial(inst, config)?;
    match stopping {
        Stopping::Fixed(n) => {
            if n == 0 {
                return usage("a fixed schedule needs at least one iteration");
            }
            for _ in 0..n {
                state = iterate(inst, &state, config)?;
            }
            let mut result = decode(&beliefs(inst, &state, config.belief)?, config.tie);
            result.iterations = n;
            result.converged = !result.infeasible;
            Ok((result, state))
        }
        Stopping::StableArgmin { window, max_iterations } => {
            if max_iterations == 0 {
                return usage("max_iterations must be positive");
            }
            let mut previous: Option<Vec<S>> = None;
            let mut streak = 0usize;
            loop {
                state = iterate(inst, &state, config)?;
                let mut result = decode(&beliefs(inst, &state, config.belief)?, config.tie);
                result.iterations = state.iteration;
                if result.infeasible {
                    return Ok((result, state));
                }
                let stable = !result.has_ties()
                    && match (&previous, &result.flow) {
                        (Some(prev), Some(cur)) => prev.iter().zip(cur).all(|(a, b)| a.approx_eq(b)),
                        _ => false,
                    };
                streak = if stable { streak + 1 } else { 0 };
                previous = result.flow.clone();
                if streak >= window {
                    result.converged = true;
                    return Ok((result, state));
                }
                if state.iteration >= max_iterations {
                    return Ok((result, state));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::scalar::Rational;

    fn single_edge() -> GmnfInstance<Rational> {
        instance(2, &[(0, 1, z(5), z(2), z(1), z(-1))], vec![z(1), z(-1)])
    }

    #[test]
    fn leaf_constraint_forces_point_mass() {
        let inst = single_edge();
        let raw = BpConfig { normalize: false, ..BpConfig::default() };
        let state = MessageState::initial(&inst, &raw).unwrap();
        let m = update_message(&inst, &state, 0, Endpoint::Tail, &raw).unwrap();
        assert_eq!(m.breakpoints(), &[(z(1), z(5))]);
        let m = update_message(&inst, &state, 0, Endpoint::Tail, &BpConfig::default()).unwrap();
        assert_eq!(m.breakpoints(), &[(z(1), z(0))]);
    }

    #[test]
    fn one_constraint_update_hand_solved() {
        // v=0 --e0--> w=1 --e1--> x=2 with a_w^{e1} = 1, a_w^{e0} = -1, f_w = 0.
        let inst = instance(
            3,
            &[(0, 1, z(0), z(1), z(1), z(-1)), (1, 2, z(0), z(1), z(1), z(-1))],
            vec![z(0), z(0), z(0)],
        );
        let ramp = ConvexPwl::from_breakpoints(vec![(z(0), z(0)), (z(1), z(1))]).unwrap();
        let flat = ConvexPwl::zero_on(z(0), z(1)).unwrap();
        // w is the tail of e1, so m_{e1→w} sits in the toward-tail buffer.
        let state = MessageState::from_messages(1, vec![flat.clone(), ramp], vec![flat.clone(), flat]).unwrap();
        let m = update_message(&inst, &state, 0, Endpoint::Tail, &BpConfig::default()).unwrap();
        assert_eq!(m.breakpoints(), &[(z(0), z(0)), (z(1), z(1))]);
    }

    #[test]
    fn beliefs_need_an_iteration() {
        let inst = single_edge();
        let state = MessageState::initial(&inst, &BpConfig::default()).unwrap();
        assert!(matches!(beliefs(&inst, &state, BeliefConvention::Single), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn single_edge_decodes_forced_flow() {
        let inst = single_edge();
        let result = run(&inst, Stopping::Fixed(1), &BpConfig::default()).unwrap();
        assert_eq!(result.flow, Some(vec![z(1)]));
        assert!(!result.has_ties());
        let state = iterate(&inst, &MessageState::initial(&inst, &BpConfig::default()).unwrap(), &BpConfig::default()).unwrap();
        let b = beliefs(&inst, &state, BeliefConvention::Single).unwrap();
        assert_eq!(b[0].domain(), Some((z(1), z(1))));
    }

    #[test]
    fn infeasible_balance_is_reported() {
        // f_w = -3 needs x = 3 > u = 2.
        let inst = instance(2, &[(0, 1, z(5), z(2), z(1), z(-1))], vec![z(3), z(-3)]);
        let result = run(&inst, Stopping::Fixed(2), &BpConfig::default()).unwrap();
        assert!(result.infeasible);
        assert!(result.flow.is_none());
        assert_eq!(result.infeasible_edges, vec![0]);
        assert!(!result.converged);
    }

    #[test]
    fn tie_rules_pick_interval_points() {
        let flat = ConvexPwl::<Rational>::zero_on(z(0), z(2)).unwrap();
        let pick = |rule| decode(std::slice::from_ref(&flat), rule).flow.unwrap()[0].clone();
        assert_eq!(pick(TieRule::Midpoint), z(1));
        assert_eq!(pick(TieRule::Lower), z(0));
        assert_eq!(pick(TieRule::Upper), z(2));
        assert!(decode(&[flat], TieRule::Lower).ties[0]);
    }

    #[test]
    fn order_must_be_a_permutation() {
        let inst = single_edge();
        let cfg = BpConfig::default();
        let state = MessageState::initial(&inst, &cfg).unwrap();
        assert!(iterate_in_order(&inst, &state, &cfg, &[(0, Endpoint::Tail)]).is_err());
        assert!(iterate_in_order(&inst, &state, &cfg, &[(0, Endpoint::Tail), (0, Endpoint::Tail)]).is_err());
        let a = iterate_in_order(&inst, &state, &cfg, &[(0, Endpoint::Head), (0, Endpoint::Tail)]).unwrap();
        assert_eq!(a, iterate(&inst, &state, &cfg).unwrap());
    }

    #[test]
    fn stable_mode_stops_on_path() {
        // 0 -> 1 -> 2 chain with forced flows.
        let inst = instance(
            3,
            &[(0, 1, z(1), z(3), z(1), z(-2)), (1, 2, z(1), z(3), z(1), z(-1))],
            vec![z(1), z(0), z(-2)],
        );
        let result = run(&inst, Stopping::StableArgmin { window: 3, max_iterations: 50 }, &BpConfig::default()).unwrap();
        assert!(result.converged);
        assert_eq!(result.flow, Some(vec![z(1), z(2)]));
    }
}
