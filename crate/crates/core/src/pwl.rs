//! Exact algebra of convex piecewise-linear functions on closed intervals.
//!
//! A function is stored as its breakpoints `(z_i, value_i)` with strictly
//! increasing abscissas; it is `+∞` outside `[z_0, z_last]`. An empty
//! breakpoint list is the everywhere-`+∞` (infeasible) function, which
//! propagates through every operation instead of raising an error.

use std::fmt;

use crate::caps::SizeCaps;
use crate::error::{usage, Error, Result};
use crate::scalar::{Scalar, Show};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPwl<S> {
    points: Vec<(S, S)>,
}

/// Minimum value and the closed interval of minimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<S> {
    pub value: S,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Minimum<S> {
    pub fn is_point(&self) -> bool {
        self.lo.approx_eq(&self.hi)
    }
}

impl<S: Scalar> ConvexPwl<S> {
    pub fn infeasible() -> Self {
        ConvexPwl { points: Vec::new() }
    }

    /// Point mass: finite only at `z`.
    pub fn point(z: S, value: S) -> Self {
        ConvexPwl { points: vec![(z, value)] }
    }

    /// `z ↦ slope·z` on `[lo, hi]`.
    pub fn linear(slope: S, lo: S, hi: S) -> Result<Self> {
        if hi.lt(&lo) {
            return usage("linear piece needs lo <= hi");
        }
        let left = (lo.clone(), slope.clone() * lo.clone());
        if hi.approx_eq(&lo) {
            return Ok(ConvexPwl { points: vec![left] });
        }
        let right = (hi.clone(), slope * hi);
        Ok(ConvexPwl { points: vec![left, right] })
    }

    pub fn zero_on(lo: S, hi: S) -> Result<Self> {
        Self::linear(S::zero(), lo, hi)
    }

    /// Edge cost function `z ↦ c·z` on `[0, u]`.
    pub fn edge_cost(cost: S, capacity: S) -> Result<Self> {
        if capacity.is_negative() {
            return usage("edge capacity must be non-negative");
        }
        Self::linear(cost, S::zero(), capacity)
    }

    /// Builds from explicit breakpoints, checking ordering and convexity and
    /// dropping redundant collinear points.
    pub fn from_breakpoints(points: Vec<(S, S)>) -> Result<Self> {
        if points.windows(2).any(|w| !w[0].0.lt(&w[1].0)) {
            return usage("breakpoint abscissas must be strictly increasing");
        }
        let f = ConvexPwl { points };
        if !f.is_convex() {
            return usage("breakpoints do not describe a convex function");
        }
        Ok(f.simplified())
    }

    pub fn is_infeasible(&self) -> bool {
        self.points.is_empty()
    }

    pub fn breakpoints(&self) -> &[(S, S)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn domain(&self) -> Option<(S, S)> {
        let first = self.points.first()?;
        let last = self.points.last()?;
        Some((first.0.clone(), last.0.clone()))
    }

    /// Slopes of the consecutive segments.
    pub fn slopes(&self) -> Vec<S> {
        self.points
            .windows(2)
            .map(|w| (w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone()))
            .collect()
    }

    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|s| s[0].le(&s[1]))
    }

    /// Value at `z`; `None` stands for `+∞`.
    pub fn eval(&self, z: &S) -> Option<S> {
        let (lo, hi) = self.domain()?;
        if z.lt(&lo) || z.gt(&hi) {
            return None;
        }
        // First breakpoint at or beyond z.
        let idx = self.points.partition_point(|(x, _)| x.lt(z));
        if idx < self.points.len() && self.points[idx].0.approx_eq(z) {
            return Some(self.points[idx].1.clone());
        }
        if idx == 0 {
            return Some(self.points[0].1.clone());
        }
        if idx == self.points.len() {
            return Some(self.points[idx - 1].1.clone());
        }
        let (x0, y0) = &self.points[idx - 1];
        let (x1, y1) = &self.points[idx];
        Some(y0.clone() + (y1.clone() - y0.clone()) * (z.clone() - x0.clone()) / (x1.clone() - x0.clone()))
    }

    /// `h(z) = f(p·z + q)`.
    pub fn affine_precompose(&self, p: &S, q: &S) -> Result<Self> {
        if p.is_zero() {
            return usage("affine precomposition needs a nonzero scale");
        }
        let mut points: Vec<(S, S)> = self
            .points
            .iter()
            .map(|(x, y)| ((x.clone() - q.clone()) / p.clone(), y.clone()))
            .collect();
        if p.is_negative() {
            points.reverse();
        }
        Ok(ConvexPwl { points }.checked())
    }

    /// Pointwise sum on the intersection of the domains.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let (Some((lo_f, hi_f)), Some((lo_g, hi_g))) = (self.domain(), other.domain()) else {
            return Ok(Self::infeasible());
        };
        let lo = S::max_of(&lo_f, &lo_g);
        let hi = S::min_of(&hi_f, &hi_g);
        if hi.lt(&lo) {
            return Ok(Self::infeasible());
        }
        let mut xs: Vec<S> = vec![lo.clone()];
        let (mut i, mut j) = (0, 0);
        let (pf, pg) = (&self.points, &other.points);
        // Merge the interior abscissas of both operands.
        loop {
            let next = match (pf.get(i), pg.get(j)) {
                (Some(a), Some(b)) => {
                    if a.0.le(&b.0) {
                        i += 1;
                        a.0.clone()
                    } else {
                        j += 1;
                        b.0.clone()
                    }
                }
                (Some(a), None) => {
                    i += 1;
                    a.0.clone()
                }
                (None, Some(b)) => {
                    j += 1;
                    b.0.clone()
                }
                (None, None) => break,
            };
            if next.gt(&lo) && next.lt(&hi) && !next.approx_eq(xs.last().expect("nonempty")) {
                xs.push(next);
            }
        }
        if hi.gt(&lo) {
            xs.push(hi);
        }
        let points = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&x).expect("in domain") + other.eval(&x).expect("in domain");
                (x, y)
            })
            .collect();
        ConvexPwl { points }.capped()
    }

    /// Adds `z ↦ slope·z`.
    pub fn add_linear(&self, slope: &S) -> Self {
        let points = self
            .points
            .iter()
            .map(|(x, y)| (x.clone(), y.clone() + slope.clone() * x.clone()))
            .collect();
        ConvexPwl { points }.checked()
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let points = self.points.iter().map(|(x, y)| (x.clone(), y.clone() + c.clone())).collect();
        ConvexPwl { points }
    }

    /// Restriction to `[lo, hi]`.
    pub fn restrict(&self, lo: &S, hi: &S) -> Result<Self> {
        if hi.lt(lo) {
            return Ok(Self::infeasible());
        }
        self.add(&Self::zero_on(lo.clone(), hi.clone())?)
    }

    /// Infimal convolution `h(s) = min { f(x) + g(y) : x + y = s }`, by merging
    /// the two slope sequences in nondecreasing order.
    pub fn inf_convolve(&self, other: &Self) -> Result<Self> {
        let (Some(f0), Some(g0)) = (self.points.first(), other.points.first()) else {
            return Ok(Self::infeasible());
        };
        let fs = self.segments();
        let gs = other.segments();
        let mut points = Vec::with_capacity(fs.len() + gs.len() + 1);
        let mut cur = (f0.0.clone() + g0.0.clone(), f0.1.clone() + g0.1.clone());
        points.push(cur.clone());
        let (mut i, mut j) = (0, 0);
        while i < fs.len() || j < gs.len() {
            let take_f = match (fs.get(i), gs.get(j)) {
                (Some(a), Some(b)) => a.slope.le(&b.slope),
                (Some(_), None) => true,
                _ => false,
            };
            let seg = if take_f {
                i += 1;
                &fs[i - 1]
            } else {
                j += 1;
                &gs[j - 1]
            };
            cur = (cur.0 + seg.dx.clone(), cur.1 + seg.dy.clone());
            points.push(cur.clone());
        }
        ConvexPwl { points }.capped()
    }

    pub fn minimum(&self) -> Option<Minimum<S>> {
        let mut best = 0;
        for (i, (_, y)) in self.points.iter().enumerate().skip(1) {
            if y.lt(&self.points[best].1) {
                best = i;
            }
        }
        let value = self.points.get(best)?.1.clone();
        let mut last = best;
        while last + 1 < self.points.len() && self.points[last + 1].1.approx_eq(&value) {
            last += 1;
        }
        Some(Minimum {
            value,
            lo: self.points[best].0.clone(),
            hi: self.points[last].0.clone(),
        })
    }

    /// Shifts the function so its minimum is zero; argmins are unchanged.
    pub fn normalize(&self) -> Self {
        match self.minimum() {
            Some(m) => self.add_constant(&-m.value),
            None => Self::infeasible(),
        }
    }

    /// Optimal split of `total` among convex pieces: returns `x_i` with
    /// `Σ x_i = total` minimizing `Σ parts[i](x_i)`, or `None` when `total`
    /// lies outside the sum of the domains.
    pub fn split_sum(parts: &[Self], total: &S) -> Option<Vec<S>> {
        let mut alloc = Vec::with_capacity(parts.len());
        let mut base = S::zero();
        let mut segs = Vec::new();
        for (k, part) in parts.iter().enumerate() {
            let lo = part.points.first()?.0.clone();
            base = base + lo.clone();
            alloc.push(lo);
            segs.extend(part.segments().into_iter().map(|s| (k, s)));
        }
        let mut remaining = total.clone() - base;
        if remaining.is_negative() {
            return None;
        }
        // Stable: ties keep part order, and each part's own segments stay in order.
        segs.sort_by(|a, b| a.1.slope.total_cmp(&b.1.slope));
        for (k, seg) in segs {
            if remaining.is_zero() {
                break;
            }
            let take = S::min_of(&seg.dx, &remaining);
            alloc[k] = alloc[k].clone() + take.clone();
            remaining = remaining - take;
        }
        remaining.is_zero().then_some(alloc)
    }

    fn segments(&self) -> Vec<Segment<S>> {
        self.points
            .windows(2)
            .map(|w| {
                let dx = w[1].0.clone() - w[0].0.clone();
                let dy = w[1].1.clone() - w[0].1.clone();
                Segment { slope: dy.clone() / dx.clone(), dx, dy }
            })
            .collect()
    }

    fn simplified(mut self) -> Self {
        if self.points.len() < 2 {
            return self;
        }
        let mut out: Vec<(S, S)> = Vec::with_capacity(self.points.len());
        for p in self.points.drain(..) {
            if let Some(last) = out.last() {
                if p.0.approx_eq(&last.0) {
                    continue;
                }
            }
            while out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                let left = (b.1.clone() - a.1.clone()) / (b.0.clone() - a.0.clone());
                let right = (p.1.clone() - b.1.clone()) / (p.0.clone() - b.0.clone());
                if left.approx_eq(&right) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        ConvexPwl { points: out }
    }

    fn checked(self) -> Self {
        let f = self.simplified();
        debug_assert!(f.is_convex(), "convexity lost");
        f
    }

    fn capped(self) -> Result<Self> {
        let f = self.checked();
        let limit = SizeCaps::global().breakpoints;
        if f.points.len() > limit {
            return Err(Error::SizeCap { what: "breakpoints", limit });
        }
        Ok(f)
    }
}

#[derive(Debug, Clone)]
struct Segment<S> {
    dx: S,
    dy: S,
    slope: S,
}

impl<S: Scalar> fmt::Display for ConvexPwl<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.points.is_empty() {
            return f.write_str("infeasible");
        }
        let parts: Vec<String> = self
            .points
            .iter()
            .map(|(x, y)| format!("({}, {})", Show(x), Show(y)))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{q, z};
    use crate::scalar::Rational;

    type Pwl = ConvexPwl<Rational>;

    fn pwl(points: &[(i64, i64)]) -> Pwl {
        Pwl::from_breakpoints(points.iter().map(|&(x, y)| (z(x), z(y))).collect()).unwrap()
    }

    fn pts(f: &Pwl) -> Vec<(Rational, Rational)> {
        f.breakpoints().to_vec()
    }

    #[test]
    fn edge_cost_shapes() {
        assert_eq!(pts(&Pwl::edge_cost(z(5), z(2)).unwrap()), vec![(z(0), z(0)), (z(2), z(10))]);
        assert_eq!(pts(&Pwl::edge_cost(z(0), z(1)).unwrap()), vec![(z(0), z(0)), (z(1), z(0))]);
        assert_eq!(pts(&Pwl::edge_cost(z(-3), z(0)).unwrap()), vec![(z(0), z(0))]);
        assert!(Pwl::edge_cost(z(1), z(-1)).is_err());
    }

    #[test]
    fn affine_precompose_examples() {
        let f = Pwl::edge_cost(z(3), z(4)).unwrap();
        assert_eq!(f.affine_precompose(&z(1), &z(0)).unwrap(), f);

        let id = pwl(&[(0, 0), (1, 1)]);
        let h = id.affine_precompose(&z(-1), &z(1)).unwrap();
        assert_eq!(pts(&h), vec![(z(0), z(1)), (z(1), z(0))]);

        let id2 = pwl(&[(0, 0), (2, 2)]);
        let h = id2.affine_precompose(&z(2), &z(0)).unwrap();
        assert_eq!(pts(&h), vec![(z(0), z(0)), (z(1), z(2))]);

        assert!(id.affine_precompose(&z(0), &z(1)).is_err());
    }

    #[test]
    fn add_examples() {
        let g = pwl(&[(0, 4), (1, 1), (3, 2)]);
        let zero = pwl(&[(0, 0), (3, 0)]);
        assert_eq!(zero.add(&g).unwrap(), g);

        let f = pwl(&[(0, 0), (1, 1)]);
        let g2 = pwl(&[(0, 0), (1, 2)]);
        assert_eq!(pts(&f.add(&g2).unwrap()), vec![(z(0), z(0)), (z(1), z(3))]);

        let a = pwl(&[(0, 0), (1, 0)]);
        let b = pwl(&[(2, 0), (3, 0)]);
        assert!(a.add(&b).unwrap().is_infeasible());
        assert!(Pwl::infeasible().add(&a).unwrap().is_infeasible());
    }

    #[test]
    fn add_touching_domains_gives_point() {
        let a = pwl(&[(0, 0), (1, 5)]);
        let b = pwl(&[(1, 2), (3, 0)]);
        assert_eq!(pts(&a.add(&b).unwrap()), vec![(z(1), z(7))]);
    }

    #[test]
    fn inf_convolve_examples() {
        let f = pwl(&[(0, 0), (1, 1)]);
        let g = pwl(&[(0, 0), (1, 2)]);
        let h = f.inf_convolve(&g).unwrap();
        assert_eq!(pts(&h), vec![(z(0), z(0)), (z(1), z(1)), (z(2), z(3))]);

        // point mass at a=2 with value 7 translates g
        let mass = Pwl::point(z(2), z(7));
        let g = pwl(&[(0, 3), (1, 0), (4, 6)]);
        let h = mass.inf_convolve(&g).unwrap();
        assert_eq!(pts(&h), vec![(z(2), z(10)), (z(3), z(7)), (z(6), z(13))]);

        assert!(f.inf_convolve(&Pwl::infeasible()).unwrap().is_infeasible());
    }

    #[test]
    fn minimum_examples() {
        let m = Pwl::edge_cost(z(5), z(2)).unwrap().minimum().unwrap();
        assert_eq!((m.value, m.lo, m.hi), (z(0), z(0), z(0)));
        let m = pwl(&[(0, 1), (1, 0), (2, 1)]).minimum().unwrap();
        assert_eq!((m.value, m.lo, m.hi), (z(0), z(1), z(1)));
        let m = pwl(&[(0, 3), (1, 3)]).minimum().unwrap();
        assert_eq!((m.value, m.lo, m.hi), (z(3), z(0), z(1)));
        assert!(Pwl::infeasible().minimum().is_none());
    }

    #[test]
    fn normalize_examples() {
        let f = pwl(&[(0, 7), (1, 12)]);
        assert_eq!(pts(&f.normalize()), vec![(z(0), z(0)), (z(1), z(5))]);
        let g = pwl(&[(0, 5), (1, 4), (2, 5)]);
        let n = g.normalize();
        assert_eq!(pts(&n), vec![(z(0), z(1)), (z(1), z(0)), (z(2), z(1))]);
        assert_eq!(n.normalize(), n);
    }

    #[test]
    fn collinear_points_removed_and_non_convex_rejected() {
        let f = pwl(&[(0, 0), (1, 1), (2, 2), (3, 5)]);
        assert_eq!(pts(&f), vec![(z(0), z(0)), (z(2), z(2)), (z(3), z(5))]);
        assert!(Pwl::from_breakpoints(vec![(z(0), z(0)), (z(1), z(2)), (z(2), z(3))]).is_err());
        assert!(Pwl::from_breakpoints(vec![(z(1), z(0)), (z(1), z(2))]).is_err());
    }

    #[test]
    fn eval_interpolates() {
        let f = pwl(&[(0, 0), (2, 1), (4, 5)]);
        assert_eq!(f.eval(&z(1)), Some(q(1, 2)));
        assert_eq!(f.eval(&z(3)), Some(z(3)));
        assert_eq!(f.eval(&z(4)), Some(z(5)));
        assert_eq!(f.eval(&z(5)), None);
    }

    #[test]
    fn split_sum_is_optimal() {
        let a = pwl(&[(0, 0), (2, 2)]); // slope 1
        let b = pwl(&[(0, 0), (1, -1), (3, 3)]); // slopes -1 then 2
        let split = Pwl::split_sum(&[a.clone(), b.clone()], &z(3)).unwrap();
        assert_eq!(split, vec![z(2), z(1)]);
        let cost = a.eval(&split[0]).unwrap() + b.eval(&split[1]).unwrap();
        let h = a.inf_convolve(&b).unwrap();
        assert_eq!(h.eval(&z(3)).unwrap(), cost);
        assert!(Pwl::split_sum(&[a, b], &z(9)).is_none());
    }

    #[test]
    fn float_mode_merges_near_duplicates() {
        let f = ConvexPwl::<f64>::from_breakpoints(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0 + 1e-12)]).unwrap();
        assert_eq!(f.len(), 2);
        let g = ConvexPwl::<f64>::linear(2.0, 0.0, 1.0).unwrap();
        let h = f.inf_convolve(&g).unwrap();
        assert_eq!(h.len(), 3);
        assert!((h.eval(&3.0).unwrap() - 4.0).abs() < 1e-9);
    }
}
