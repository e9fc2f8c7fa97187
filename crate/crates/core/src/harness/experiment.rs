use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, SolverKind};
use super::brute_force_minimum;
use crate::error::{Error, Result};
use crate::extension::{lipschitz_constant, GridFunction, VALUE_TOL};
use crate::lattice::LatticePoint;
use crate::oracles::{make_instance, CrnModel, Estimator, InstanceKind, NeighborEstimator, NoiseKind, SimulationOracle};
use crate::solvers::{ssgd_pcs_iz, ssgd_pgs, GuaranteeSpec, SolveReport, SolverOptions, Target};
use crate::stats::derive_seed;
use crate::steepest::{steepest_pcs_iz, steepest_pgs, SteepestOptions};

/// CSV header, in order.
pub const CSV_COLUMNS: [&str; 11] =
    ["rep", "seed", "solution", "f_value", "optimum_value", "good", "cost", "T", "M", "eta", "epochs"];

/// One replication's outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub rep: u64,
    pub seed: u64,
    pub solution: LatticePoint,
    pub f_value: f64,
    pub optimum_value: f64,
    pub good: bool,
    pub cost: u64,
    pub t: u64,
    pub m: Option<f64>,
    pub eta: Option<f64>,
    pub epochs: u64,
}

/// Rows plus aggregate statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub rows: Vec<ReplicationRow>,
    pub optimum: LatticePoint,
    pub optimum_value: f64,
    pub good_frequency: f64,
    pub mean_cost: f64,
    pub median_cost: u64,
    pub p90_cost: u64,
    /// `(1-δ) - 1.645 √(δ(1-δ)/R)`.
    pub threshold: f64,
    pub pass: bool,
}

/// One-sided 95% binomial acceptance threshold for a `1 - δ` guarantee over `reps` runs.
pub fn good_selection_threshold(delta: f64, reps: u64) -> f64 {
    (1.0 - delta) - 1.645 * (delta * (1.0 - delta) / reps as f64).sqrt()
}

/// Shared, replication-independent pieces of an experiment.
struct Prepared {
    truth: GridFunction,
    crn: Option<CrnModel>,
    optimum: LatticePoint,
    optimum_value: f64,
    spec: GuaranteeSpec,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let dom = cfg.instance.domain()?;
    let crn = match cfg.instance.kind {
        InstanceKind::Crn { spread } => Some(CrnModel::generate(dom, spread, cfg.instance.seed)?),
        _ => None,
    };
    let truth = match &crn {
        Some(m) => m.mean_function().materialize(crate::extension::DEFAULT_CELL_BUDGET)?,
        None => make_instance(&cfg.instance.kind, &dom, cfg.instance.seed)?
            .materialize(crate::extension::DEFAULT_CELL_BUDGET)?,
    };
    let (optimum, optimum_value) = brute_force_minimum(&truth)?;
    let lipschitz = match cfg.guarantee.lipschitz_l {
        Some(l) => l,
        None => lipschitz_constant(&truth)?,
    };
    let sigma = match (&cfg.noise, &crn) {
        (NoiseKind::Gaussian { sigma }, _) => *sigma,
        (NoiseKind::Bernoulli, _) => 0.5,
        (NoiseKind::CommonRandomNumbers, Some(m)) => m.sigma(),
        (NoiseKind::CommonRandomNumbers, None) => unreachable!("validated"),
    };
    let sigma = match (cfg.algorithm.solver, cfg.algorithm.neighbor) {
        (SolverKind::SteepestPgs | SolverKind::SteepestPcsIz, Some(nb)) => nb.sigma_tilde,
        _ => sigma,
    };
    let bound_g = match (cfg.guarantee.bound_g, &crn, cfg.algorithm.estimator) {
        (Some(g), _, _) => Some(g),
        (None, Some(m), Estimator::Crn) => Some(m.gradient_bound()),
        _ => None,
    };
    let spec = GuaranteeSpec { target: cfg.guarantee.target, delta: cfg.guarantee.delta, sigma, lipschitz_l: lipschitz, bound_g };
    spec.validate()?;
    Ok(Prepared { truth, crn, optimum, optimum_value, spec })
}

fn solve_one(cfg: &ExperimentConfig, prep: &Prepared, seed: u64) -> Result<SolveReport> {
    let mut oracle = match &prep.crn {
        Some(m) => SimulationOracle::with_crn(m.clone(), seed),
        None => SimulationOracle::new(prep.truth.clone(), cfg.noise.clone(), seed)?,
    };
    if let Some(ch) = cfg.algorithm.first_order {
        oracle = oracle.with_first_order(ch)?;
    }
    let alg = &cfg.algorithm;
    let opts = SolverOptions {
        profile: alg.profile,
        estimator: alg.estimator,
        iterations: alg.iterations,
        ..SolverOptions::default()
    };
    match alg.solver {
        SolverKind::SsgdPgs => ssgd_pgs(&mut oracle, &prep.spec, &opts),
        SolverKind::SsgdPcsIz => ssgd_pcs_iz(&mut oracle, &prep.spec, &opts),
        SolverKind::SteepestPgs | SolverKind::SteepestPcsIz => {
            let nb = alg.neighbor.expect("validated");
            let est = NeighborEstimator::new(nb.bias_ratio, nb.sigma_tilde, nb.gamma, derive_seed(seed, 1))?;
            let sopts = SteepestOptions { mode: alg.neighborhood, start: cfg.start_point(), ..SteepestOptions::default() };
            if alg.solver == SolverKind::SteepestPgs {
                steepest_pgs(&est, &mut oracle, &prep.spec, &sopts)
            } else {
                steepest_pcs_iz(&est, &mut oracle, &prep.spec, &sopts)
            }
        }
    }
}

fn row_for(cfg: &ExperimentConfig, prep: &Prepared, rep: u64) -> Result<(ReplicationRow, SolveReport)> {
    let seed = derive_seed(cfg.seed, rep);
    let report = solve_one(cfg, prep, seed)?;
    let f_value = prep.truth.eval(&report.solution.0);
    let good = match cfg.guarantee.target {
        Target::Pgs { epsilon } => f_value - prep.optimum_value <= epsilon + VALUE_TOL,
        Target::PcsIz { .. } => f_value <= prep.optimum_value + VALUE_TOL,
    };
    let row = ReplicationRow {
        rep,
        seed,
        solution: report.solution.clone(),
        f_value,
        optimum_value: prep.optimum_value,
        good,
        cost: report.total_cost,
        t: report.params.t,
        m: report.params.m,
        eta: report.params.eta,
        epochs: report.params.epochs,
    };
    Ok((row, report))
}

/// Runs replication `rep` alone and returns its full report.
pub fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<(ReplicationRow, SolveReport)> {
    let prep = prepare(cfg)?;
    row_for(cfg, &prep, rep)
}

fn summarize(cfg: &ExperimentConfig, prep: Prepared, rows: Vec<ReplicationRow>) -> ExperimentSummary {
    let r = rows.len() as f64;
    let good_frequency = rows.iter().filter(|w| w.good).count() as f64 / r;
    let mean_cost = rows.iter().map(|w| w.cost as f64).sum::<f64>() / r;
    let mut costs: Vec<u64> = rows.iter().map(|w| w.cost).collect();
    costs.sort_unstable();
    let pct = |p: f64| costs[(((costs.len() - 1) as f64) * p).round() as usize];
    let threshold = good_selection_threshold(cfg.guarantee.delta, rows.len() as u64);
    ExperimentSummary {
        config: cfg.clone(),
        optimum: prep.optimum,
        optimum_value: prep.optimum_value,
        good_frequency,
        mean_cost,
        median_cost: pct(0.5),
        p90_cost: pct(0.9),
        threshold,
        pass: good_frequency >= threshold,
        rows,
    }
}

/// Runs all replications in parallel; rows are ordered by replication index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let prep = prepare(cfg)?;
    let rows = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| row_for(cfg, &prep, rep).map(|(row, _)| row))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, prep, rows))
}

/// Same as [`run_experiment`] on the calling thread.
pub fn run_experiment_serial(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let prep = prepare(cfg)?;
    let rows = (0..cfg.replications)
        .map(|rep| row_for(cfg, &prep, rep).map(|(row, _)| row))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, prep, rows))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the summary as CSV: optional timestamp comment, config comment, header, rows.
pub fn write_csv<W: Write>(summary: &ExperimentSummary, out: W) -> Result<()> {
    let mut out = out;
    if summary.config.timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "# generated_unix: {secs}")?;
    }
    writeln!(out, "# config: {}", summary.config.to_json())?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in &summary.rows {
        let solution: Vec<String> = r.solution.0.iter().map(|c| c.to_string()).collect();
        w.write_record([
            r.rep.to_string(),
            r.seed.to_string(),
            solution.join(";"),
            r.f_value.to_string(),
            r.optimum_value.to_string(),
            r.good.to_string(),
            r.cost.to_string(),
            r.t.to_string(),
            opt(r.m),
            opt(r.eta),
            r.epochs.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    const NOISELESS: &str = r#"{
        "instance": {"kind": "diagonal_trap", "d": 2, "n": 3},
        "noise": {"kind": "gaussian", "sigma": 0.0},
        "algorithm": {"solver": "ssgd_pgs"},
        "guarantee": {"mode": "pgs", "epsilon": 0.5, "delta": 0.2},
        "replications": 1
    }"#;

    #[test]
    fn noiseless_single_replication() {
        let s = run_experiment(&cfg(NOISELESS)).unwrap();
        assert_eq!(s.good_frequency, 1.0);
        assert_eq!(s.rows[0].solution, LatticePoint(vec![3, 3]));
        assert_eq!(s.rows[0].cost, 4 * s.rows[0].t + 3);
        assert!(s.pass);
    }

    #[test]
    fn parallel_equals_serial_and_csv_is_stable() {
        let text = NOISELESS.replace("\"sigma\": 0.0", "\"sigma\": 0.5").replace("\"replications\": 1", "\"replications\": 6");
        let c = cfg(&text);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment_serial(&c).unwrap();
        assert_eq!(a.rows, b.rows);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&a, &mut x).unwrap();
        write_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), 6);
        let freq = a.rows.iter().filter(|r| r.good).count() as f64 / 6.0;
        assert_eq!(a.good_frequency, freq);
    }

    #[test]
    fn timestamp_line_is_optional() {
        let mut c = cfg(NOISELESS);
        c.timestamp = true;
        let s = run_experiment(&c).unwrap();
        let mut out = Vec::new();
        write_csv(&s, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("# generated_unix: "));
    }

    #[test]
    fn threshold_values() {
        assert!((good_selection_threshold(0.2, 40) - (0.8 - 1.645 * (0.16f64 / 40.0).sqrt())).abs() < 1e-15);
    }
}
