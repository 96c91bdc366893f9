//! End-to-end certification of BP on one instance: exact optimum, its
//! uniqueness, the residual cost profile, the iteration bound, and a BP run
//! of exactly that many iterations compared against the optimum.

use crate::bp::{self, BpConfig, BpResult, Stopping};
use crate::caps::SizeCaps;
use crate::error::{usage, Error, Result};
use crate::model::{EdgeId, GmnfInstance};
use crate::oracle::{solve_with_rows, OracleResult, OracleStatus};
use crate::residual::{build_residual, cost_profile, CostProfile};
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyStatus {
    /// BP reproduced the unique optimum exactly.
    Certified,
    /// BP ran for the bound but decoded something else.
    Mismatch,
    NotUnique,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct Certification {
    pub status: CertifyStatus,
    pub oracle: OracleResult,
    pub profile: Option<CostProfile<Rational>>,
    pub bound: Option<u64>,
    pub bp: Option<BpResult<Rational>>,
    pub mismatched_edges: Vec<EdgeId>,
}

/// Default ceiling on the number of BP iterations a certificate may demand.
pub const MAX_CERTIFY_ITERATIONS: u64 = 100_000;

pub fn certify(
    inst: &GmnfInstance<Rational>,
    config: &BpConfig,
    caps: &SizeCaps,
    max_iterations: u64,
) -> Result<Certification> {
    if !inst.is_ratio_balanced_gauge().is_balanced() {
        return usage("instance is not ratio-balanced");
    }
    let oracle = solve_with_rows(inst, &vec![true; inst.vertex_count()], caps)?;
    let mut out = Certification {
        status: CertifyStatus::Infeasible,
        oracle,
        profile: None,
        bound: None,
        bp: None,
        mismatched_edges: Vec::new(),
    };
    if out.oracle.status == OracleStatus::Infeasible {
        return Ok(out);
    }
    let Some(optimum) = out.oracle.unique_solution().map(<[Rational]>::to_vec) else {
        out.status = CertifyStatus::NotUnique;
        return Ok(out);
    };
    let net = build_residual(inst, &optimum)?;
    let profile = cost_profile(&net, caps)?;
    let bound = profile.bound(inst.vertex_count())?;
    if bound > max_iterations {
        return Err(Error::SizeCap { what: "certification iterations", limit: max_iterations as usize });
    }
    // A positive number of iterations is needed for beliefs to exist.
    let iterations = bound.max(1) as usize;
    let result = bp::run(inst, Stopping::Fixed(iterations), config)?;
    out.mismatched_edges = match &result.flow {
        Some(flow) => (0..optimum.len()).filter(|&e| flow[e] != optimum[e]).collect(),
        None => (0..optimum.len()).collect(),
    };
    out.status = if out.mismatched_edges.is_empty() {
        CertifyStatus::Certified
    } else {
        CertifyStatus::Mismatch
    };
    out.profile = Some(profile);
    out.bound = Some(bound);
    out.bp = Some(result);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn certifies_gain_chain() {
        let inst = instance(
            3,
            &[(0, 1, z(7), z(2), z(1), z(-2)), (1, 2, z(-4), z(3), z(1), z(-1))],
            vec![z(1), z(0), z(-2)],
        );
        let cert = certify(&inst, &BpConfig::default(), &SizeCaps::default(), 1000).unwrap();
        assert_eq!(cert.status, CertifyStatus::Certified);
        assert_eq!(cert.bound, Some(3));
    }

    #[test]
    fn certifies_triangle_with_negative_cycle() {
        let mut inst = triangle([(1, 2), (1, 3), (6, 1)]);
        inst.edges[2].cost = z(-4);
        let cert = certify(&inst, &BpConfig::default(), &SizeCaps::default(), 1000).unwrap();
        assert_eq!(cert.status, CertifyStatus::Certified, "{cert:?}");
        let profile = cert.profile.unwrap();
        assert!(profile.sigma.unwrap().value > z(0));
    }

    #[test]
    fn reports_non_unique_and_infeasible() {
        let mut inst = triangle([(1, 1); 3]);
        for d in inst.edges.iter_mut() {
            d.cost = z(0);
        }
        let caps = SizeCaps::default();
        assert_eq!(certify(&inst, &BpConfig::default(), &caps, 100).unwrap().status, CertifyStatus::NotUnique);
        inst.balance = vec![z(5), z(0), z(-5)];
        assert_eq!(certify(&inst, &BpConfig::default(), &caps, 100).unwrap().status, CertifyStatus::Infeasible);
    }

    #[test]
    fn rejects_unbalanced() {
        let inst = triangle([(1, 2), (1, 1), (1, 1)]);
        assert!(certify(&inst, &BpConfig::default(), &SizeCaps::default(), 100).is_err());
    }
}
