//! Seeded random instances: ratio-balanced by a gauge construction and
//! feasible by deriving the balance from an interior flow.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::SizeCaps;
use crate::error::{usage, Error, Result};
use crate::model::{DirectedGraph, EdgeData, GmnfInstance};
use crate::oracle::solve_with_rows;
use crate::scalar::{Rational, Scalar};

/// How coefficient magnitudes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientMode {
    /// `|a_v^e| = q_e·p_v` with `p_v ∈ 1..=3` and `q_e ∈ 1..=2`.
    #[default]
    Gauge,
    /// Every magnitude is 1.
    Unit,
    /// Independent magnitudes in `1..=4`; usually not ratio-balanced.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub vertices: usize,
    pub edges: usize,
    /// Inclusive integer capacity range.
    pub capacity: (i64, i64),
    /// Inclusive integer cost range.
    pub cost: (i64, i64),
    pub seed: u64,
    pub coefficients: CoefficientMode,
    /// Require an oracle-certified unique optimum.
    pub unique: bool,
    /// Forest-shaped graph; needs `edges == vertices - 1`.
    pub acyclic: bool,
    pub retries: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            vertices: 4,
            edges: 6,
            capacity: (2, 4),
            cost: (-5, 5),
            seed: 0,
            coefficients: CoefficientMode::Gauge,
            unique: false,
            acyclic: false,
            retries: 64,
        }
    }
}

/// Generates an instance deterministically from `config.seed`.
pub fn generate_instance(config: &GeneratorConfig) -> Result<GmnfInstance<Rational>> {
    let GeneratorConfig { vertices: n, edges: m, capacity, cost, .. } = *config;
    if n < 2 {
        return usage("need at least two vertices");
    }
    if m + 1 < n {
        return usage(format!("{m} edges cannot connect {n} vertices"));
    }
    if config.acyclic && m != n - 1 {
        return usage("an acyclic instance has exactly vertices - 1 edges");
    }
    if capacity.0 < 1 || capacity.0 > capacity.1 {
        return usage("capacity range must be non-empty and positive");
    }
    if cost.0 > cost.1 {
        return usage("cost range is empty");
    }
    if config.unique && m > SizeCaps::global().oracle_edges {
        return Err(Error::SizeCap { what: "oracle edges", limit: SizeCaps::global().oracle_edges });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let graph = DirectedGraph::new(n, random_edges(&mut rng, n, m))?;
    let magnitudes = coefficient_magnitudes(&mut rng, &graph, config.coefficients);
    let capacities: Vec<i64> = (0..m).map(|_| rng.gen_range(capacity.0..=capacity.1)).collect();
    let interior: Vec<Rational> = capacities
        .iter()
        .map(|&u| {
            if u >= 2 {
                Rational::from_i64(rng.gen_range(1..u))
            } else {
                Rational::from_ratio(u, 2)
            }
        })
        .collect();

    let mut edges: Vec<EdgeData<Rational>> = (0..m)
        .map(|e| EdgeData {
            cost: <Rational as Scalar>::zero(),
            capacity: Rational::from_i64(capacities[e]),
            a_tail: Rational::from_i64(magnitudes[e].0),
            a_head: Rational::from_i64(-magnitudes[e].1),
        })
        .collect();
    let mut balance = vec![<Rational as Scalar>::zero(); n];
    for (e, &(t, h)) in graph.edges().iter().enumerate() {
        balance[t] += &edges[e].a_tail * &interior[e];
        balance[h] += &edges[e].a_head * &interior[e];
    }

    let attempts = if config.unique { config.retries.max(1) } else { 1 };
    for attempt in 0..attempts {
        for d in edges.iter_mut() {
            d.cost = Rational::from_i64(rng.gen_range(cost.0..=cost.1));
        }
        // Second half of the budget: break ties with small distinct offsets.
        if attempt >= attempts / 2 && attempt > 0 {
            let denom = 4 * (m as i64 + 1);
            let mut offsets: Vec<i64> = (1..=m as i64).collect();
            offsets.shuffle(&mut rng);
            for (d, k) in edges.iter_mut().zip(offsets) {
                d.cost += Rational::from_ratio(k, denom);
            }
        }
        let inst = GmnfInstance::new(graph.clone(), edges.clone(), balance.clone())?;
        if !config.unique {
            return Ok(inst);
        }
        let all = vec![true; n];
        if solve_with_rows(&inst, &all, SizeCaps::global())?.unique {
            return Ok(inst);
        }
    }
    Err(Error::Generation(format!(
        "no unique optimum after {attempts} cost draws (seed {})",
        config.seed
    )))
}

/// Random spanning tree plus extra edges, each with a random orientation.
/// Parallel edges may occur; self-loops never do.
fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = Vec::with_capacity(m);
    for i in 1..n {
        let u = order[rng.gen_range(0..i)];
        out.push(orient(rng, u, order[i]));
    }
    while out.len() < m {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        out.push(orient(rng, u, v));
    }
    out
}

fn orient(rng: &mut ChaCha8Rng, u: usize, v: usize) -> (usize, usize) {
    if rng.gen_bool(0.5) {
        (u, v)
    } else {
        (v, u)
    }
}

/// `(|a_tail|, |a_head|)` per edge.
fn coefficient_magnitudes(rng: &mut ChaCha8Rng, graph: &DirectedGraph, mode: CoefficientMode) -> Vec<(i64, i64)> {
    match mode {
        CoefficientMode::Unit => vec![(1, 1); graph.edge_count()],
        CoefficientMode::Gauge => {
            let p: Vec<i64> = (0..graph.vertex_count()).map(|_| rng.gen_range(1..=3)).collect();
            graph
                .edges()
                .iter()
                .map(|&(t, h)| {
                    let q = rng.gen_range(1..=2);
                    (q * p[t], q * p[h])
                })
                .collect()
        }
        CoefficientMode::Random => (0..graph.edge_count())
            .map(|_| (rng.gen_range(1..=4), rng.gen_range(1..=4)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve_exact, OracleStatus};

    #[test]
    fn deterministic_in_seed() {
        let config = GeneratorConfig { vertices: 4, edges: 6, seed: 42, ..Default::default() };
        let a = generate_instance(&config).unwrap();
        let b = generate_instance(&config).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.balance, b.balance);
    }

    #[test]
    fn instances_are_valid_balanced_and_feasible() {
        for seed in 0..20 {
            let config = GeneratorConfig { vertices: 5, edges: 8, seed, ..Default::default() };
            let inst = generate_instance(&config).unwrap();
            let report = inst.validate();
            assert!(report.errors.is_empty(), "{:?}", report.errors);
            assert!(report.ratio_balanced);
            assert_eq!(solve_exact(&inst).unwrap().status, OracleStatus::Optimal);
        }
    }

    #[test]
    fn unique_mode_certifies() {
        for seed in 0..5 {
            let config = GeneratorConfig { vertices: 4, edges: 6, seed, unique: true, ..Default::default() };
            assert!(solve_exact(&generate_instance(&config).unwrap()).unwrap().unique);
        }
    }

    #[test]
    fn acyclic_and_unit_modes() {
        let config = GeneratorConfig {
            vertices: 6,
            edges: 5,
            acyclic: true,
            coefficients: CoefficientMode::Unit,
            ..Default::default()
        };
        let inst = generate_instance(&config).unwrap();
        assert!(inst.graph.is_acyclic_undirected());
        assert!(inst.edges.iter().all(|d| d.a_tail == Rational::from_i64(1) && d.a_head == Rational::from_i64(-1)));
        assert!(generate_instance(&GeneratorConfig { edges: 7, ..config }).is_err());
    }

    #[test]
    fn bad_ranges_rejected() {
        assert!(generate_instance(&GeneratorConfig { capacity: (3, 2), ..Default::default() }).is_err());
        assert!(generate_instance(&GeneratorConfig { vertices: 5, edges: 3, ..Default::default() }).is_err());
    }
}
