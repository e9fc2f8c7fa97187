//! Integer-box geometry.
//!
//! The feasible set is the lattice `[1..n]^d` and its convex hull `[1, n]^d`.
//! Everything here is a pure function of its inputs. Permutations and
//! coordinate indices are zero-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};

/// Default dimension cap for [`neighbor_set`]; the set has up to `2^(d+1)` points.
pub const NEIGHBOR_DIM_CAP: usize = 20;

/// The box `[1..n]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxDomain {
    dim: usize,
    n: i64,
}

impl BoxDomain {
    pub fn new(dim: usize, n: i64) -> Result<Self> {
        if dim == 0 {
            return parameter("dimension must be at least 1");
        }
        if n < 2 {
            return parameter(format!("scale n must be at least 2, got {n}"));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Number of lattice points, or `None` on overflow.
    pub fn num_points(&self) -> Option<usize> {
        let n = usize::try_from(self.n).ok()?;
        n.checked_pow(u32::try_from(self.dim).ok()?)
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.dim && coords.iter().all(|&c| (1..=self.n).contains(&c))
    }

    pub fn contains_real(&self, coords: &[f64]) -> bool {
        let hi = self.n as f64;
        coords.len() == self.dim && coords.iter().all(|&c| (1.0..=hi).contains(&c))
    }

    pub fn lattice_point(&self, coords: Vec<i64>) -> Result<LatticePoint> {
        if !self.contains(&coords) {
            return domain(format!("{coords:?} is not a point of [1..{}]^{}", self.n, self.dim));
        }
        Ok(LatticePoint(coords))
    }

    pub fn box_point(&self, coords: Vec<f64>) -> Result<BoxPoint> {
        if !self.contains_real(&coords) {
            return domain(format!("{coords:?} is not in [1, {}]^{}", self.n, self.dim));
        }
        Ok(BoxPoint(coords))
    }

    /// Lexicographic rank of a feasible point (first coordinate most significant).
    pub fn index_of(&self, coords: &[i64]) -> usize {
        debug_assert!(self.contains(coords));
        let n = self.n as usize;
        coords.iter().fold(0usize, |acc, &c| acc * n + (c as usize - 1))
    }

    /// Inverse of [`BoxDomain::index_of`].
    pub fn point_at(&self, mut index: usize) -> LatticePoint {
        let n = self.n as usize;
        let mut coords = vec![0i64; self.dim];
        for slot in coords.iter_mut().rev() {
            *slot = (index % n) as i64 + 1;
            index /= n;
        }
        LatticePoint(coords)
    }

    /// All lattice points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let total = self.num_points().unwrap_or(usize::MAX);
        (0..total).map(move |i| self.point_at(i))
    }

    /// The box center `(n/2, ..., n/2)` projected onto `[1, n]^d`.
    pub fn center(&self) -> BoxPoint {
        project_box(&vec![self.n as f64 / 2.0; self.dim], self)
    }
}

/// A feasible integer decision vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn to_real(&self) -> BoxPoint {
        BoxPoint(self.0.iter().map(|&c| c as f64).collect())
    }

    pub fn linf_distance(&self, other: &LatticePoint) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A real point of the continuous box `[1, n]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxPoint(pub Vec<f64>);

impl BoxPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `Some(point)` when every coordinate is an integer.
    pub fn as_lattice(&self) -> Option<LatticePoint> {
        self.0
            .iter()
            .map(|&c| (c.fract() == 0.0).then_some(c as i64))
            .collect::<Option<Vec<_>>>()
            .map(LatticePoint)
    }
}

/// An ordering `α` with `v[α[0]] >= v[α[1]] >= ... >= v[α[d-1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistentPermutation {
    order: Vec<usize>,
}

impl ConsistentPermutation {
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Sorts the components of a fractional vector non-increasingly; equal
/// components keep ascending index order.
pub fn consistent_permutation(frac: &[f64]) -> Result<ConsistentPermutation> {
    if let Some(bad) = frac.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return domain(format!("fractional component {bad} outside [0, 1]"));
    }
    let mut order: Vec<usize> = (0..frac.len()).collect();
    // stable sort: ties keep index order
    order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).expect("finite components"));
    Ok(ConsistentPermutation { order })
}

/// The chain `S^0, ..., S^d` of lattice points spanning the simplex that holds `x`.
#[derive(Debug, Clone)]
pub struct NeighborChain {
    pub base: LatticePoint,
    pub permutation: ConsistentPermutation,
    /// `x - base`, componentwise in `[0, 1]`.
    pub frac: Vec<f64>,
    pub points: Vec<LatticePoint>,
}

impl NeighborChain {
    /// Barycentric weights `λ_0..λ_d` with `x = Σ λ_i S^i`.
    pub fn weights(&self) -> Vec<f64> {
        let ord = self.permutation.order();
        let d = ord.len();
        let mut w = Vec::with_capacity(d + 1);
        w.push(1.0 - self.frac[ord[0]]);
        for i in 1..d {
            w.push(self.frac[ord[i - 1]] - self.frac[ord[i]]);
        }
        w.push(self.frac[ord[d - 1]]);
        w
    }
}

/// Base corner of the canonical cube holding `x`: `y_i = min(floor(x_i), n - 1)`.
pub fn cube_base(x: &BoxPoint, dom: &BoxDomain) -> Result<LatticePoint> {
    if !dom.contains_real(&x.0) {
        return domain(format!("{:?} is not in [1, {}]^{}", x.0, dom.n(), dom.dim()));
    }
    Ok(LatticePoint(
        x.0.iter().map(|&c| (c.floor() as i64).min(dom.n() - 1)).collect(),
    ))
}

/// Chain of neighboring points of `x` in its canonical cube.
pub fn neighbor_chain(x: &BoxPoint, dom: &BoxDomain) -> Result<NeighborChain> {
    let base = cube_base(x, dom)?;
    neighbor_chain_in_cube(x, &base, dom)
}

/// Chain of neighboring points of `x` inside the cube `base + [0,1]^d`.
///
/// Points on a shared face belong to several cubes; this lets callers pick one.
pub fn neighbor_chain_in_cube(
    x: &BoxPoint,
    base: &LatticePoint,
    dom: &BoxDomain,
) -> Result<NeighborChain> {
    if !dom.contains_real(&x.0) {
        return domain(format!("{:?} is not in [1, {}]^{}", x.0, dom.n(), dom.dim()));
    }
    if base.0.len() != dom.dim() || base.0.iter().any(|&b| b < 1 || b > dom.n() - 1) {
        return domain(format!("{base} is not a cube base of [1..{}]^{}", dom.n(), dom.dim()));
    }
    let frac: Vec<f64> = x.0.iter().zip(&base.0).map(|(&c, &b)| c - b as f64).collect();
    let permutation = consistent_permutation(&frac)
        .map_err(|_| Error::Domain(format!("{:?} is not in the cube at {base}", x.0)))?;
    let mut points = Vec::with_capacity(dom.dim() + 1);
    let mut cur = base.clone();
    points.push(cur.clone());
    for &k in permutation.order() {
        cur.0[k] += 1;
        points.push(cur.clone());
    }
    Ok(NeighborChain { base: base.clone(), permutation, frac, points })
}

/// Orthogonal projection onto `[1, n]^d`.
pub fn project_box(x: &[f64], dom: &BoxDomain) -> BoxPoint {
    let hi = dom.n() as f64;
    BoxPoint(x.iter().map(|&c| c.clamp(1.0, hi)).collect())
}

/// Componentwise clamp of `g` to `[-m, m]`.
pub fn truncate(g: &[f64], m: f64) -> Result<Vec<f64>> {
    if !(m > 0.0) {
        return parameter(format!("truncation threshold must be positive, got {m}"));
    }
    Ok(g.iter().map(|&v| v.clamp(-m, m)).collect())
}

/// Projection onto `{y in [1,n]^d : |y - center|_inf <= radius}`.
pub fn project_neighborhood(y: &[f64], center: &BoxPoint, radius: f64, dom: &BoxDomain) -> BoxPoint {
    let (lo, hi) = neighborhood_bounds(center, radius, dom);
    BoxPoint(
        y.iter()
            .zip(lo.iter().zip(&hi))
            .map(|(&v, (&l, &h))| v.clamp(l, h))
            .collect(),
    )
}

/// Per-coordinate bounds of the neighborhood box intersected with the domain.
pub fn neighborhood_bounds(center: &BoxPoint, radius: f64, dom: &BoxDomain) -> (Vec<f64>, Vec<f64>) {
    let top = dom.n() as f64;
    let lo = center.0.iter().map(|&c| (c - radius).max(1.0).min(top)).collect();
    let hi = center.0.iter().map(|&c| (c + radius).min(top).max(1.0)).collect();
    (lo, hi)
}

/// Feasible points `x ± e_S` over all subsets `S`, sorted, `x` included once.
pub fn neighbor_set(x: &LatticePoint, dom: &BoxDomain) -> Result<Vec<LatticePoint>> {
    neighbor_set_with_cap(x, dom, NEIGHBOR_DIM_CAP)
}

pub fn neighbor_set_with_cap(x: &LatticePoint, dom: &BoxDomain, cap: usize) -> Result<Vec<LatticePoint>> {
    if !dom.contains(&x.0) {
        return domain(format!("{x} is not feasible"));
    }
    let d = dom.dim();
    if d > cap || d >= usize::BITS as usize - 1 {
        return parameter(format!(
            "neighbor enumeration needs 2^{} points; dimension cap is {cap}",
            d + 1
        ));
    }
    let mut out = vec![x.clone()];
    for mask in 1usize..(1 << d) {
        for sign in [1i64, -1] {
            let mut y = x.clone();
            for (k, c) in y.0.iter_mut().enumerate() {
                if mask >> k & 1 == 1 {
                    *c += sign;
                }
            }
            if dom.contains(&y.0) {
                out.push(y);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Feasible points `x ± e_i` plus `x` itself, sorted.
pub fn coordinate_neighbors(x: &LatticePoint, dom: &BoxDomain) -> Result<Vec<LatticePoint>> {
    if !dom.contains(&x.0) {
        return domain(format!("{x} is not feasible"));
    }
    let mut out = vec![x.clone()];
    for k in 0..dom.dim() {
        for step in [1i64, -1] {
            let mut y = x.clone();
            y.0[k] += step;
            if dom.contains(&y.0) {
                out.push(y);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dom(d: usize, n: i64) -> BoxDomain {
        BoxDomain::new(d, n).unwrap()
    }

    #[test]
    fn domain_validation() {
        assert!(BoxDomain::new(0, 3).is_err());
        assert!(BoxDomain::new(2, 1).is_err());
        assert_eq!(dom(3, 4).num_points(), Some(64));
    }

    #[test]
    fn index_roundtrip_is_lexicographic() {
        let d = dom(3, 3);
        let pts: Vec<_> = d.points().collect();
        assert_eq!(pts.len(), 27);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(d.index_of(&p.0), i);
        }
    }

    #[test]
    fn permutation_examples() {
        let p = consistent_permutation(&[0.9, 0.2, 0.5]).unwrap();
        assert_eq!(p.order(), &[0, 2, 1]);
        let p = consistent_permutation(&[0.5, 0.5]).unwrap();
        assert_eq!(p.order(), &[0, 1]);
        let p = consistent_permutation(&[0.0; 4]).unwrap();
        assert_eq!(p.order(), &[0, 1, 2, 3]);
        assert!(matches!(consistent_permutation(&[0.3, 1.2]), Err(Error::Domain(_))));
        assert!(consistent_permutation(&[-0.1]).is_err());
    }

    #[test]
    fn chain_examples() {
        let d = dom(2, 3);
        let c = neighbor_chain(&BoxPoint(vec![2.5, 2.0]), &d).unwrap();
        assert_eq!(c.base, LatticePoint(vec![2, 2]));
        assert_eq!(c.permutation.order(), &[0, 1]);
        assert_eq!(
            c.points,
            vec![LatticePoint(vec![2, 2]), LatticePoint(vec![3, 2]), LatticePoint(vec![3, 3])]
        );

        let c = neighbor_chain(&BoxPoint(vec![2.0, 1.0]), &d).unwrap();
        assert_eq!(c.points[0], LatticePoint(vec![2, 1]));

        let d3 = dom(3, 5);
        let c = neighbor_chain(&BoxPoint(vec![1.0; 3]), &d3).unwrap();
        assert_eq!(c.base, LatticePoint(vec![1, 1, 1]));
        assert_eq!(c.points.last().unwrap(), &LatticePoint(vec![2, 2, 2]));

        // upper face uses the cube below it
        let c = neighbor_chain(&BoxPoint(vec![3.0, 2.5]), &d).unwrap();
        assert_eq!(c.base, LatticePoint(vec![2, 2]));
        assert_eq!(c.frac, vec![1.0, 0.5]);

        assert!(neighbor_chain(&BoxPoint(vec![0.5, 2.0]), &d).is_err());
        assert!(neighbor_chain(&BoxPoint(vec![2.0, 3.5]), &d).is_err());
    }

    #[test]
    fn alternative_cube_rejects_outside_points() {
        let d = dom(2, 4);
        let x = BoxPoint(vec![2.0, 2.5]);
        assert!(neighbor_chain_in_cube(&x, &LatticePoint(vec![1, 2]), &d).is_ok());
        assert!(neighbor_chain_in_cube(&x, &LatticePoint(vec![3, 2]), &d).is_err());
        assert!(neighbor_chain_in_cube(&x, &LatticePoint(vec![2, 4]), &d).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_box(&[0.5, 7.2], &dom(2, 5)).0, vec![1.0, 5.0]);
        assert_eq!(project_box(&[-3.0, 2.5], &dom(2, 4)).0, vec![1.0, 2.5]);
        assert_eq!(project_box(&[2.0, 3.5], &dom(2, 4)).0, vec![2.0, 3.5]);
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate(&[3.0, -5.0, 1.0], 2.0).unwrap(), vec![2.0, -2.0, 1.0]);
        assert_eq!(truncate(&[0.5, -0.5], 1.0).unwrap(), vec![0.5, -0.5]);
        assert_eq!(truncate(&[0.0; 3], 1.0).unwrap(), vec![0.0; 3]);
        assert!(matches!(truncate(&[1.0], 0.0), Err(Error::Parameter(_))));
        assert!(truncate(&[1.0], -1.0).is_err());
    }

    #[test]
    fn neighborhood_projection() {
        let d = dom(2, 6);
        let c = BoxPoint(vec![3.0, 2.0]);
        assert_eq!(project_neighborhood(&[10.0, -4.0], &c, 1.5, &d).0, vec![4.5, 1.0]);
        assert_eq!(project_neighborhood(&[3.0, 2.0], &c, 1.0, &d).0, vec![3.0, 2.0]);
        let far = project_neighborhood(&[9.0, 0.0], &c, 5.0, &d);
        assert_eq!(far, project_box(&[9.0, 0.0], &d));
    }

    #[test]
    fn neighbor_set_examples() {
        let d = dom(2, 3);
        let s = neighbor_set(&LatticePoint(vec![2, 2]), &d).unwrap();
        // x, four axis moves, and the two diagonal moves; mixed signs are excluded
        assert_eq!(s.len(), 7);
        assert!(s.contains(&LatticePoint(vec![3, 3])));
        assert!(s.contains(&LatticePoint(vec![1, 1])));
        assert!(!s.contains(&LatticePoint(vec![1, 3])));

        let s = neighbor_set(&LatticePoint(vec![1, 1, 1]), &dom(3, 4)).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|p| p.0.iter().all(|&c| c == 1 || c == 2)));

        let s = neighbor_set(&LatticePoint(vec![3]), &dom(1, 5)).unwrap();
        assert_eq!(s, vec![LatticePoint(vec![2]), LatticePoint(vec![3]), LatticePoint(vec![4])]);
    }

    #[test]
    fn neighbor_set_respects_cap() {
        let d = dom(4, 3);
        let x = LatticePoint(vec![2; 4]);
        assert!(matches!(neighbor_set_with_cap(&x, &d, 3), Err(Error::Parameter(_))));
        assert_eq!(neighbor_set_with_cap(&x, &d, 4).unwrap().len(), 31);
    }

    #[test]
    fn coordinate_neighbors_example() {
        let s = coordinate_neighbors(&LatticePoint(vec![2, 2]), &dom(2, 3)).unwrap();
        assert_eq!(s.len(), 5);
        assert!(!s.contains(&LatticePoint(vec![3, 3])));
    }

    proptest! {
        #[test]
        fn permutation_is_monotone(v in prop::collection::vec(0.0f64..=1.0, 1..8)) {
            let p = consistent_permutation(&v).unwrap();
            let ord = p.order();
            let mut seen = ord.to_vec();
            seen.sort();
            prop_assert_eq!(seen, (0..v.len()).collect::<Vec<_>>());
            for w in ord.windows(2) {
                prop_assert!(v[w[0]] >= v[w[1]]);
                if v[w[0]] == v[w[1]] {
                    prop_assert!(w[0] < w[1]);
                }
            }
        }

        #[test]
        fn chain_steps_are_unit(x in prop::collection::vec(1.0f64..=5.0, 1..6)) {
            let d = dom(x.len(), 5);
            let c = neighbor_chain(&BoxPoint(x.clone()), &d).unwrap();
            prop_assert_eq!(c.points.len(), x.len() + 1);
            for w in c.points.windows(2) {
                let l1: i64 = w[0].0.iter().zip(&w[1].0).map(|(a, b)| (a - b).abs()).sum();
                prop_assert_eq!(l1, 1);
            }
            for p in &c.points {
                prop_assert!(d.contains(&p.0));
            }
            let top: Vec<i64> = c.base.0.iter().map(|b| b + 1).collect();
            prop_assert_eq!(&c.points[x.len()].0, &top);
            let w = c.weights();
            prop_assert!(w.iter().all(|&v| v >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for k in 0..x.len() {
                let recon: f64 = w.iter().zip(&c.points).map(|(l, p)| l * p.0[k] as f64).sum();
                prop_assert!((recon - x[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn projections_are_idempotent_and_lipschitz(
            a in prop::collection::vec(-10.0f64..10.0, 3),
            b in prop::collection::vec(-10.0f64..10.0, 3),
            m in 0.1f64..5.0,
        ) {
            let d = dom(3, 6);
            let pa = project_box(&a, &d);
            prop_assert_eq!(&project_box(&pa.0, &d), &pa);
            let pb = project_box(&b, &d);
            for k in 0..3 {
                prop_assert!((pa.0[k] - pb.0[k]).abs() <= (a[k] - b[k]).abs());
            }
            let ta = truncate(&a, m).unwrap();
            prop_assert_eq!(truncate(&ta, m).unwrap(), ta.clone());
            let tb = truncate(&b, m).unwrap();
            for k in 0..3 {
                prop_assert!((ta[k] - tb[k]).abs() <= (a[k] - b[k]).abs());
            }
        }

        #[test]
        fn neighbor_set_is_local_and_complete(x in prop::collection::vec(1i64..=4, 1..5)) {
            let d = dom(x.len(), 4);
            let xp = LatticePoint(x.clone());
            let s = neighbor_set(&xp, &d).unwrap();
            for p in &s {
                prop_assert!(p.linf_distance(&xp) <= 1);
            }
            let mut dedup = s.clone();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), s.len());
            for mask in 0usize..(1 << x.len()) {
                for sign in [1i64, -1] {
                    let y: Vec<i64> = x.iter().enumerate()
                        .map(|(k, &c)| if mask >> k & 1 == 1 { c + sign } else { c })
                        .collect();
                    if d.contains(&y) {
                        prop_assert!(s.contains(&LatticePoint(y)));
                    }
                }
            }
        }
    }
}
