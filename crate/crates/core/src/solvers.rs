//! Projected stochastic subgradient methods with selection guarantees.
//!
//! [`ssgd_pgs`] returns a point within `ε` of optimal with probability at least
//! `1 - δ`; [`ssgd_pcs_iz`] returns the unique minimizer with probability at least
//! `1 - δ` when every other point is at least `c` worse.

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::lattice::{neighbor_chain, neighborhood_bounds, BoxDomain, BoxPoint, LatticePoint};
use crate::oracles::{Estimator, SimulationOracle};
use crate::stats::{samples_needed, RunningMean};

/// Default ceiling on the number of SSGD iterations in one solve.
pub const DEFAULT_ITERATION_CAP: u64 = 100_000_000;

/// What the solver must deliver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Target {
    /// Good selection: `f(x) - f* <= epsilon`.
    Pgs { epsilon: f64 },
    /// Correct selection under an indifference zone of width `c`.
    PcsIz { c: f64 },
}

/// Target, confidence and the problem constants the solvers rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeSpec {
    pub target: Target,
    pub delta: f64,
    /// Sub-Gaussian parameter of one simulation output.
    pub sigma: f64,
    /// Sup-norm Lipschitz constant of the objective.
    pub lipschitz_l: f64,
    /// Almost-sure l1 bound of an unbiased subgradient estimator, if one exists.
    #[serde(default)]
    pub bound_g: Option<f64>,
}

impl GuaranteeSpec {
    pub fn pgs(epsilon: f64, delta: f64, sigma: f64, lipschitz_l: f64) -> Self {
        Self { target: Target::Pgs { epsilon }, delta, sigma, lipschitz_l, bound_g: None }
    }

    pub fn pcs_iz(c: f64, delta: f64, sigma: f64, lipschitz_l: f64) -> Self {
        Self { target: Target::PcsIz { c }, delta, sigma, lipschitz_l, bound_g: None }
    }

    pub fn with_bound_g(mut self, g: f64) -> Self {
        self.bound_g = Some(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.target {
            Target::Pgs { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                return parameter(format!("epsilon must be positive, got {epsilon}"))
            }
            Target::PcsIz { c } if !(c > 0.0 && c.is_finite()) => {
                return parameter(format!("indifference-zone parameter must be positive, got {c}"))
            }
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return parameter(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return parameter(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if !(self.lipschitz_l >= 0.0 && self.lipschitz_l.is_finite()) {
            return parameter(format!("Lipschitz constant must be non-negative, got {}", self.lipschitz_l));
        }
        if let Some(g) = self.bound_g {
            if !(g > 0.0 && g.is_finite()) {
                return parameter(format!("estimator bound G must be positive, got {g}"));
            }
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.target {
            Target::Pgs { epsilon } => Some(epsilon),
            Target::PcsIz { .. } => None,
        }
    }

    pub fn iz_c(&self) -> Option<f64> {
        match self.target {
            Target::PcsIz { c } => Some(c),
            Target::Pgs { .. } => None,
        }
    }
}

/// Which constants turn the asymptotic parameter choices into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsProfile {
    /// Leading constants set to one; fast at desk scale.
    #[default]
    Practical,
    /// Constants from the convergence proofs; very conservative.
    Proof,
}

impl std::str::FromStr for ConstantsProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "practical" => Ok(Self::Practical),
            "proof" => Ok(Self::Proof),
            _ => Err(Error::Parameter(format!("unknown profile {s:?}; expected practical or proof"))),
        }
    }
}

/// Knobs that do not affect the guarantee's statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub profile: ConstantsProfile,
    pub estimator: Estimator,
    /// Replaces the computed iteration count (per epoch for the adaptive method).
    pub iterations: Option<u64>,
    pub iteration_cap: u64,
    pub record_trajectory: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            profile: ConstantsProfile::Practical,
            estimator: Estimator::Fd,
            iterations: None,
            iteration_cap: DEFAULT_ITERATION_CAP,
            record_trajectory: false,
        }
    }
}

/// Step-size parameters of one SSGD run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsgdParams {
    pub iterations: u64,
    /// Truncation threshold; `None` when the estimator is bounded.
    pub threshold: Option<f64>,
    pub step: f64,
    /// Diameter scale of the search region.
    pub scale: f64,
}

/// Resolved parameters echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ParamEcho {
    pub profile: Option<ConstantsProfile>,
    /// Total iterations (SSGD) or the per-epoch iteration cap (steepest descent).
    pub t: u64,
    pub m: Option<f64>,
    pub eta: Option<f64>,
    pub epochs: u64,
    /// Confidence widths per epoch (steepest descent).
    pub widths: Vec<f64>,
    /// Samples per neighbor batch per epoch (steepest descent).
    pub batch_samples: Vec<u64>,
    /// Samples per chain point in the final rounding.
    pub rounding_samples: Option<u64>,
    pub coordinate_only: bool,
}

/// One epoch of an adaptive solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    /// Precision targeted in this epoch.
    pub epsilon: f64,
    pub delta: f64,
    pub params: Option<SsgdParams>,
    /// Center and sup-radius of the search region; `None` means the whole box.
    pub region: Option<(BoxPoint, f64)>,
    /// Sup-radius of the region handed to the next epoch.
    pub next_radius: Option<f64>,
    /// Averaged (SSGD) or final (steepest descent) point of the epoch.
    pub point: BoxPoint,
    pub iterations: u64,
    pub cost: u64,
}

/// Result of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: LatticePoint,
    /// Oracle cost consumed by this solve.
    pub total_cost: u64,
    pub iterations: u64,
    pub trajectory: Option<Vec<BoxPoint>>,
    pub epoch_log: Vec<EpochRecord>,
    pub params: ParamEcho,
}

/// Simulates every chain point of `x_bar` with the fixed batch that makes the
/// `1 - δ/4` interval no wider than `ε/4`, and returns the empirical argmin.
pub fn round_to_lattice(oracle: &mut SimulationOracle, x_bar: &BoxPoint, eps: f64, delta: f64) -> Result<LatticePoint> {
    Ok(round_with_count(oracle, x_bar, eps, delta)?.0)
}

fn round_with_count(
    oracle: &mut SimulationOracle,
    x_bar: &BoxPoint,
    eps: f64,
    delta: f64,
) -> Result<(LatticePoint, u64)> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return parameter(format!("rounding needs eps > 0 and delta in (0,1), got {eps}, {delta}"));
    }
    let chain = neighbor_chain(x_bar, oracle.ground_truth().domain())?;
    let sigma = oracle.sigma();
    let n = samples_needed(eps / 4.0, sigma, delta / 4.0)?;
    let mut best: Option<(f64, &LatticePoint)> = None;
    for p in &chain.points {
        let mut rm = RunningMean::new(sigma, delta / 4.0);
        for _ in 0..n {
            rm.push(oracle.simulate_coords(&p.0)?);
        }
        let m = rm.mean();
        if best.map_or(true, |(b, _)| m < b) {
            best = Some((m, p));
        }
    }
    Ok((best.expect("chain is non-empty").1.clone(), n))
}

/// Problem data the parameter formulas depend on.
#[derive(Debug, Clone, Copy)]
struct Scaling {
    d: f64,
    scale: f64,
    sigma: f64,
    lipschitz: f64,
    bound_g: Option<f64>,
}

fn log_term(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

fn threshold(s: &Scaling, eps: f64, t: u64) -> f64 {
    let m = s.lipschitz.max(2.0 * s.sigma * log_term(4.0 * s.sigma * s.d * s.scale * t as f64 / eps).sqrt());
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn to_count(v: f64, what: &str, cap: u64) -> Result<u64> {
    let t = v.ceil().max(1.0);
    if !t.is_finite() || t > cap as f64 {
        return Err(Error::Budget(format!("{what} needs {t:.3e} iterations; cap is {cap}")));
    }
    Ok(t as u64)
}

/// Parameters for an SSGD run whose relaxed solution should be `(eps/2, delta/2)`-good.
fn resolve(s: &Scaling, eps: f64, delta: f64, opts: &SolverOptions) -> Result<SsgdParams> {
    let log2d = (2.0 / delta).ln();
    let (d, dd) = (s.d, s.scale);
    if let Some(g) = s.bound_g {
        let t = match opts.iterations {
            Some(t) => t.max(1),
            None => {
                let raw = match opts.profile {
                    ConstantsProfile::Practical => (s.lipschitz + g).powi(2) * dd * dd / (eps * eps) * log2d,
                    ConstantsProfile::Proof => {
                        let a = 32.0 * (1.5 * s.lipschitz + g).powi(2) * dd * dd / (eps * eps) * log2d;
                        let b = 16.0 * d * g * g * dd * dd / (eps * eps);
                        a.max(b)
                    }
                };
                to_count(raw, "bounded-estimator SSGD", opts.iteration_cap)?
            }
        };
        let step = (d * dd * dd / (t as f64 * g * g)).sqrt();
        return Ok(SsgdParams { iterations: t, threshold: None, step, scale: dd });
    }

    let t = match opts.iterations {
        Some(t) => t.max(1),
        None => match opts.profile {
            ConstantsProfile::Practical => to_count(d * dd * dd / (eps * eps) * log2d, "SSGD", opts.iteration_cap)?,
            ConstantsProfile::Proof => {
                let base = {
                    let mut v = 3584.0 * s.sigma * s.sigma * d * dd * dd / (eps * eps) * log2d;
                    if s.sigma > 0.0 {
                        v = v.max(2.0 * dd * eps / s.sigma);
                    }
                    v.max(4.0)
                };
                // the threshold grows with T, so iterate to a fixed point
                let mut t = to_count(base, "SSGD", opts.iteration_cap)?;
                for _ in 0..64 {
                    let m = threshold(s, eps, t);
                    let need = base.max(64.0 * d * d * dd * dd * m * m / (eps * eps));
                    let next = to_count(need, "SSGD", opts.iteration_cap)?;
                    if next <= t {
                        break;
                    }
                    t = next;
                }
                t
            }
        },
    };
    let m = threshold(s, eps, t);
    let step = dd / (m * (t as f64).sqrt());
    Ok(SsgdParams { iterations: t, threshold: Some(m), step, scale: dd })
}

fn scaling_for(oracle: &SimulationOracle, spec: &GuaranteeSpec, opts: &SolverOptions, scale: f64) -> Result<Scaling> {
    let d = oracle.ground_truth().domain().dim();
    let (mut sigma, mut lipschitz, mut bound_g) = (spec.sigma, spec.lipschitz_l, None);
    match opts.estimator {
        Estimator::Fd => {}
        Estimator::Subset { k } => {
            if k == 0 || k > d {
                return parameter(format!("subset size must lie in 1..={d}, got {k}"));
            }
            // each kept component is rescaled by d/k
            let r = d as f64 / k as f64;
            sigma *= r;
            lipschitz *= r;
        }
        Estimator::Crn => {
            if oracle.crn_model().is_none() {
                return Err(Error::Capability("oracle does not support common random numbers".into()));
            }
            bound_g = Some(spec.bound_g.ok_or_else(|| {
                Error::Parameter("the common-random-number variant needs the estimator bound G".into())
            })?);
        }
        Estimator::FirstOrder => {
            let ch = oracle
                .first_order()
                .ok_or_else(|| Error::Capability("oracle has no first-order channel".into()))?;
            match spec.bound_g {
                Some(g) => bound_g = Some(g),
                None => sigma = ch.sigma_tilde,
            }
        }
    }
    Ok(Scaling { d: d as f64, scale, sigma, lipschitz, bound_g })
}

/// Projected (optionally truncated) SSGD inside `[lo, hi]` from `start`; returns the average of `x^0..x^{T-1}`.
fn ssgd_core(
    oracle: &mut SimulationOracle,
    params: &SsgdParams,
    estimator: Estimator,
    lo: &[f64],
    hi: &[f64],
    start: &[f64],
    trajectory: &mut Option<Vec<BoxPoint>>,
) -> Result<BoxPoint> {
    let clamp = |v: &mut [f64]| {
        for k in 0..v.len() {
            v[k] = v[k].clamp(lo[k], hi[k]);
        }
    };
    let mut x = start.to_vec();
    clamp(&mut x);
    let mut sum = vec![0.0; x.len()];
    let mut xp = BoxPoint(x);
    for _ in 0..params.iterations {
        for (s, v) in sum.iter_mut().zip(&xp.0) {
            *s += v;
        }
        if let Some(tr) = trajectory.as_mut() {
            tr.push(xp.clone());
        }
        let mut g = estimator.estimate(oracle, &xp)?.g_hat;
        if let Some(m) = params.threshold {
            // in-place truncation; the threshold is positive by construction
            for v in &mut g {
                *v = v.clamp(-m, m);
            }
        }
        for (v, gk) in xp.0.iter_mut().zip(&g) {
            *v -= params.step * gk;
        }
        clamp(&mut xp.0);
    }
    let mut avg: Vec<f64> = sum.iter().map(|s| s / params.iterations as f64).collect();
    clamp(&mut avg);
    Ok(BoxPoint(avg))
}

fn box_bounds(dom: &BoxDomain) -> (Vec<f64>, Vec<f64>) {
    (vec![1.0; dom.dim()], vec![dom.n() as f64; dom.dim()])
}

/// Projected and truncated SSGD followed by rounding; an `(ε, δ)` good-selection method.
pub fn ssgd_pgs(oracle: &mut SimulationOracle, spec: &GuaranteeSpec, opts: &SolverOptions) -> Result<SolveReport> {
    spec.validate()?;
    let eps = spec
        .epsilon()
        .ok_or_else(|| Error::Parameter("ssgd_pgs needs a good-selection target".into()))?;
    let dom = *oracle.ground_truth().domain();
    let start_cost = oracle.cost();
    let scaling = scaling_for(oracle, spec, opts, dom.n() as f64)?;
    let params = resolve(&scaling, eps, spec.delta, opts)?;

    let (lo, hi) = box_bounds(&dom);
    let mut trajectory = opts.record_trajectory.then(Vec::new);
    let x_bar = ssgd_core(oracle, &params, opts.estimator, &lo, &hi, &dom.center().0, &mut trajectory)?;
    let (solution, n) = round_with_count(oracle, &x_bar, eps, spec.delta)?;

    Ok(SolveReport {
        solution,
        total_cost: oracle.cost() - start_cost,
        iterations: params.iterations,
        trajectory,
        epoch_log: vec![EpochRecord {
            epoch: 0,
            epsilon: eps,
            delta: spec.delta,
            params: Some(params),
            region: None,
            next_radius: None,
            point: x_bar,
            iterations: params.iterations,
            cost: oracle.cost() - start_cost,
        }],
        params: ParamEcho {
            profile: Some(opts.profile),
            t: params.iterations,
            m: params.threshold,
            eta: Some(params.step),
            epochs: 1,
            rounding_samples: Some(n),
            ..ParamEcho::default()
        },
    })
}

/// Number of epochs of the adaptive method: `⌈log2 n⌉ + 1`.
pub fn pcs_epochs(n: i64) -> u64 {
    let mut e = 0u64;
    while (1i64 << e) < n {
        e += 1;
    }
    e + 1
}

/// Adaptive SSGD: halve the precision and the search radius every epoch, then
/// round; a `(c, δ)` correct-selection method.
pub fn ssgd_pcs_iz(oracle: &mut SimulationOracle, spec: &GuaranteeSpec, opts: &SolverOptions) -> Result<SolveReport> {
    spec.validate()?;
    let c = spec
        .iz_c()
        .ok_or_else(|| Error::Parameter("ssgd_pcs_iz needs an indifference-zone target".into()))?;
    let dom = *oracle.ground_truth().domain();
    let n = dom.n() as f64;
    let start_cost = oracle.cost();
    let epochs = pcs_epochs(dom.n());
    let delta_e = spec.delta / (2.0 * epochs as f64);

    let mut trajectory = opts.record_trajectory.then(Vec::new);
    let mut log = Vec::with_capacity(epochs as usize);
    let mut center = dom.center();
    let mut region: Option<(BoxPoint, f64)> = None;
    let mut total_iters = 0u64;
    let mut last = None;
    for e in 0..epochs {
        let eps_e = c * n / 4.0 / 2f64.powi(e as i32);
        let scale = n / 2f64.powi(e as i32);
        let scaling = scaling_for(oracle, spec, opts, scale)?;
        // SSGD tuned for (2ε_e, 2δ_e) yields an (ε_e, δ_e) relaxed solution
        let mut params = resolve(&scaling, 2.0 * eps_e, 2.0 * delta_e, opts)?;
        params.scale = scale;
        total_iters += params.iterations;
        if total_iters > opts.iteration_cap {
            return Err(Error::Budget(format!(
                "adaptive SSGD needs more than {} iterations",
                opts.iteration_cap
            )));
        }
        let (lo, hi) = match &region {
            None => box_bounds(&dom),
            Some((ctr, r)) => neighborhood_bounds(ctr, *r, &dom),
        };
        let epoch_start = oracle.cost();
        let x_e = ssgd_core(oracle, &params, opts.estimator, &lo, &hi, &center.0, &mut trajectory)?;
        let next_radius = n / 2f64.powi(e as i32 + 2);
        log.push(EpochRecord {
            epoch: e,
            epsilon: eps_e,
            delta: delta_e,
            params: Some(params),
            region: region.clone(),
            next_radius: (e + 1 < epochs).then_some(next_radius),
            point: x_e.clone(),
            iterations: params.iterations,
            cost: oracle.cost() - epoch_start,
        });
        region = Some((x_e.clone(), next_radius));
        center = x_e;
        last = Some(params);
    }
    let (solution, samples) = round_with_count(oracle, &center, c / 2.0, spec.delta)?;
    let last = last.expect("at least one epoch");
    Ok(SolveReport {
        solution,
        total_cost: oracle.cost() - start_cost,
        iterations: total_iters,
        trajectory,
        epoch_log: log,
        params: ParamEcho {
            profile: Some(opts.profile),
            t: total_iters,
            m: last.threshold,
            eta: Some(last.step),
            epochs,
            rounding_samples: Some(samples),
            ..ParamEcho::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extension_value, GridFunction};
    use crate::oracles::{make_instance, CrnModel, FirstOrderChannel, InstanceKind};

    fn diag(sigma: f64, seed: u64) -> SimulationOracle {
        let f = make_instance(&InstanceKind::DiagonalTrap, &BoxDomain::new(2, 3).unwrap(), 0).unwrap();
        SimulationOracle::gaussian(f, sigma, seed).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GuaranteeSpec::pgs(0.0, 0.1, 1.0, 1.0).validate().is_err());
        assert!(GuaranteeSpec::pgs(1.0, 1.0, 1.0, 1.0).validate().is_err());
        assert!(GuaranteeSpec::pcs_iz(-1.0, 0.1, 1.0, 1.0).validate().is_err());
        assert!(GuaranteeSpec::pgs(1.0, 0.1, -1.0, 1.0).validate().is_err());
        assert!(GuaranteeSpec::pgs(1.0, 0.1, 1.0, 1.0).with_bound_g(0.0).validate().is_err());
        assert!(GuaranteeSpec::pgs(1.0, 0.1, 1.0, 1.0).validate().is_ok());
        let mut o = diag(0.0, 0);
        let r = ssgd_pcs_iz(&mut o, &GuaranteeSpec::pcs_iz(0.0, 0.1, 0.0, 4.0), &SolverOptions::default());
        assert!(matches!(r, Err(Error::Parameter(_))));
        let r = ssgd_pgs(&mut o, &GuaranteeSpec::pcs_iz(1.0, 0.1, 0.0, 4.0), &SolverOptions::default());
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn rounding_noiseless_beats_extension_value() {
        let mut o = diag(0.0, 0);
        let f = o.ground_truth().clone();
        for x in [[2.5, 2.0], [1.2, 2.9], [3.0, 3.0], [2.0, 2.0]] {
            let xb = BoxPoint(x.to_vec());
            let p = round_to_lattice(&mut o, &xb, 1.0, 0.1).unwrap();
            assert!(f.eval(&p.0) <= extension_value(&f, &xb).unwrap() + 1e-12);
        }
        assert_eq!(o.cost(), 12);
    }

    #[test]
    fn rounding_cost_closed_form() {
        let mut o = diag(0.8, 3);
        let (eps, delta) = (0.7, 0.05);
        round_to_lattice(&mut o, &BoxPoint(vec![1.5, 2.5]), eps, delta).unwrap();
        let per = (32.0 * 0.64 / (eps * eps) * (8.0 / delta as f64).ln()).ceil() as u64;
        assert_eq!(o.cost(), 3 * per);
    }

    #[test]
    fn linear_corner_with_override() {
        let dom = BoxDomain::new(3, 6).unwrap();
        let f = GridFunction::from_fn(dom, |x| x[0] as f64 - 2.0 * x[1] as f64 + 0.5 * x[2] as f64);
        let mut o = SimulationOracle::gaussian(f, 0.0, 1).unwrap();
        let opts = SolverOptions { iterations: Some(400), ..SolverOptions::default() };
        let r = ssgd_pgs(&mut o, &GuaranteeSpec::pgs(0.5, 0.1, 0.0, 3.5), &opts).unwrap();
        assert_eq!(r.solution, LatticePoint(vec![1, 6, 1]));
        assert_eq!(r.iterations, 400);
        assert_eq!(r.total_cost, 2 * 3 * 400 + 4);
    }

    #[test]
    fn practical_parameters_match_formulas() {
        let mut o = diag(0.5, 1);
        let spec = GuaranteeSpec::pgs(1.0, 0.2, 0.5, 4.0);
        let r = ssgd_pgs(&mut o, &spec, &SolverOptions::default()).unwrap();
        let t = (2.0 * 9.0 * (10.0f64).ln()).ceil() as u64;
        assert_eq!(r.params.t, t);
        let m = 4.0f64.max(2.0 * 0.5 * (4.0 * 0.5 * 2.0 * 3.0 * t as f64).ln().sqrt());
        assert!((r.params.m.unwrap() - m).abs() < 1e-12);
        assert!((r.params.eta.unwrap() - 3.0 / (m * (t as f64).sqrt())).abs() < 1e-12);
        let rounding = (32.0 * 0.25 * (40.0f64).ln()).ceil() as u64;
        assert_eq!(r.total_cost, 4 * t + 3 * rounding);
    }

    #[test]
    fn proof_profile_is_a_fixed_point() {
        let s = Scaling { d: 2.0, scale: 3.0, sigma: 0.5, lipschitz: 4.0, bound_g: None };
        let opts = SolverOptions { profile: ConstantsProfile::Proof, ..SolverOptions::default() };
        let p = resolve(&s, 1.0, 0.2, &opts).unwrap();
        let m = p.threshold.unwrap();
        let need = (3584.0 * 0.25 * 2.0 * 9.0 * 10f64.ln()).max(64.0 * 4.0 * 9.0 * m * m);
        assert!(p.iterations as f64 >= need);
        assert!(2.0 * 3.0 * m / (p.iterations as f64).sqrt() <= 1.0 / 8.0 + 1e-12);
        let tiny = SolverOptions { iteration_cap: 1000, ..opts };
        assert!(matches!(resolve(&s, 1.0, 0.2, &tiny), Err(Error::Budget(_))));
    }

    #[test]
    fn bounded_variant_needs_g() {
        let dom = BoxDomain::new(2, 5).unwrap();
        let model = CrnModel::generate(dom, 1, 3).unwrap();
        let g = model.gradient_bound();
        let mut o = SimulationOracle::with_crn(model, 9);
        let opts = SolverOptions { estimator: Estimator::Crn, iterations: Some(50), ..SolverOptions::default() };
        let spec = GuaranteeSpec::pgs(1.0, 0.1, o.sigma(), 6.0);
        assert!(matches!(ssgd_pgs(&mut o, &spec, &opts), Err(Error::Parameter(_))));
        let r = ssgd_pgs(&mut o, &spec.with_bound_g(g), &opts).unwrap();
        assert_eq!(r.params.m, None);
        assert!((r.params.eta.unwrap() - (2.0 * 25.0 / (50.0 * g * g) as f64).sqrt()).abs() < 1e-12);
        assert_eq!(r.total_cost, 50 * 3 + 3 * r.params.rounding_samples.unwrap());
    }

    #[test]
    fn first_order_variant_runs() {
        let o = diag(0.0, 2);
        let mut o = o.with_first_order(FirstOrderChannel { sigma_tilde: 0.0, gamma: 2 }).unwrap();
        let opts = SolverOptions { estimator: Estimator::FirstOrder, ..SolverOptions::default() };
        let r = ssgd_pgs(&mut o, &GuaranteeSpec::pgs(0.5, 0.1, 0.0, 4.0), &opts).unwrap();
        assert_eq!(r.solution, LatticePoint(vec![3, 3]));
        assert_eq!(r.total_cost, 2 * r.iterations + 3);
    }

    #[test]
    fn epoch_count_and_radii() {
        assert_eq!(pcs_epochs(2), 2);
        assert_eq!(pcs_epochs(3), 3);
        assert_eq!(pcs_epochs(4), 3);
        assert_eq!(pcs_epochs(5), 4);
        let mut o = diag(0.0, 0);
        let opts = SolverOptions { record_trajectory: true, ..SolverOptions::default() };
        let r = ssgd_pcs_iz(&mut o, &GuaranteeSpec::pcs_iz(2.0, 0.2, 0.0, 4.0), &opts).unwrap();
        assert_eq!(r.solution, LatticePoint(vec![3, 3]));
        assert_eq!(r.epoch_log.len(), 3);
        for (e, rec) in r.epoch_log.iter().enumerate() {
            if e + 1 < r.epoch_log.len() {
                assert_eq!(rec.next_radius, Some(3.0 / 2f64.powi(e as i32 + 2)));
            }
            if e > 0 {
                let (ctr, rad) = rec.region.clone().unwrap();
                assert_eq!(ctr, r.epoch_log[e - 1].point);
                assert_eq!(rad, 3.0 / 2f64.powi(e as i32 + 1));
            }
        }
        let tr = r.trajectory.unwrap();
        assert_eq!(tr.len() as u64, r.iterations);
    }
}
