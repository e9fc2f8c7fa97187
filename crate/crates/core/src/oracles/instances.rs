use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::extension::{GridFunction, DEFAULT_CELL_BUDGET};
use crate::lattice::BoxDomain;
use crate::stats::stream_rng;

/// Built-in objective families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    /// `Σ g_i(x_i)` with random convex piecewise-linear `g_i`; unique minimizer.
    Separable,
    /// Separable part plus `Σ w_ij |x_i - x_j|` with random `w_ij >= 0`.
    Pairwise,
    /// `4|2x+y-8| + |x-2y+6|` (d = 2): not L♮-convex, with a spurious local minimum at (3,2).
    SpuriousLocal,
    /// `2|x-y| - |x+y-2|` (d = 2): L♮-convex, but coordinate moves stall at (2,2).
    DiagonalTrap,
    /// Member `index` (0..=d) of the indistinguishable hard family, scaled by `6ε`.
    ///
    /// Coordinates are shifted by one: the grid `[1..n]^d` stands for `{0..n-1}^d`.
    HardFamily { index: usize, epsilon: f64 },
    /// Mean of the per-scenario separable model of [`CrnModel`].
    Crn { spread: i64 },
}

/// Builds the ground-truth objective of `kind` on `dom`, tabulated when the grid
/// fits the default cell budget.
pub fn make_instance(kind: &InstanceKind, dom: &BoxDomain, seed: u64) -> Result<GridFunction> {
    let f = build(kind, dom, seed)?;
    match dom.num_points() {
        Some(c) if c <= DEFAULT_CELL_BUDGET => f.materialize(DEFAULT_CELL_BUDGET),
        _ => Ok(f),
    }
}

fn build(kind: &InstanceKind, dom: &BoxDomain, seed: u64) -> Result<GridFunction> {
    let two_d = |name: &str| {
        if dom.dim() != 2 {
            parameter(format!("{name} is only defined for d = 2, got d = {}", dom.dim()))
        } else {
            Ok(())
        }
    };
    match kind {
        InstanceKind::Separable => Ok(separable(dom, seed, false)),
        InstanceKind::Pairwise => Ok(separable(dom, seed, true)),
        InstanceKind::SpuriousLocal => {
            two_d("spurious_local")?;
            Ok(GridFunction::from_fn(*dom, |x| {
                (4 * (2 * x[0] + x[1] - 8).abs() + (x[0] - 2 * x[1] + 6).abs()) as f64
            }))
        }
        InstanceKind::DiagonalTrap => {
            two_d("diagonal_trap")?;
            Ok(GridFunction::from_fn(*dom, |x| {
                (2 * (x[0] - x[1]).abs() - (x[0] + x[1] - 2).abs()) as f64
            }))
        }
        InstanceKind::HardFamily { index, epsilon } => hard_family(dom, *index, *epsilon),
        InstanceKind::Crn { spread } => Ok(CrnModel::generate(*dom, *spread, seed)?.mean_function()),
    }
}

fn separable(dom: &BoxDomain, seed: u64, coupled: bool) -> GridFunction {
    let mut rng = stream_rng(seed, 0x5e9a);
    let n = dom.n() as usize;
    let d = dom.dim();
    let tables: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            let mut slopes: Vec<i64> = (1..n)
                .map(|_| {
                    let s = rng.random_range(1..=4i64);
                    if rng.random::<bool>() {
                        s
                    } else {
                        -s
                    }
                })
                .collect();
            slopes.sort_unstable();
            let mut v = rng.random_range(-3..=3i64);
            let mut t = Vec::with_capacity(n);
            t.push(v as f64);
            for s in slopes {
                v += s;
                t.push(v as f64);
            }
            t
        })
        .collect();
    let weights: Vec<(usize, usize, f64)> = if coupled {
        let mut w = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                w.push((i, j, rng.random_range(0..=2i64) as f64));
            }
        }
        w
    } else {
        Vec::new()
    };
    let tables = Arc::new(tables);
    GridFunction::from_fn(*dom, move |x| {
        let mut v: f64 = x.iter().zip(tables.iter()).map(|(&c, t)| t[c as usize - 1]).sum();
        for &(i, j, w) in &weights {
            v += w * (x[i] - x[j]).abs() as f64;
        }
        v
    })
}

/// Base set function of the hard family on the unit cube, for member `index`.
///
/// Prefix corners `e_1 + ... + e_i` get `-c(i)` with `c(0) = 1/2`, `c(index) = 1`
/// (for `index >= 1`) and zero otherwise; all other corners get
/// `(|s|_1 - j(s)) (d + 2 - |s|_1)` where `j(s)` is the length of the leading run of ones.
pub fn hard_family_base(index: usize, corner: &[bool]) -> f64 {
    let d = corner.len();
    let ones = corner.iter().filter(|&&b| b).count();
    let lead = corner.iter().take_while(|&&b| b).count();
    if lead == ones {
        // a prefix corner
        return match ones {
            0 => -0.5,
            i if i == index => -1.0,
            _ => 0.0,
        };
    }
    ((ones - lead) * (d + 2 - ones)) as f64
}

fn hard_family(dom: &BoxDomain, index: usize, epsilon: f64) -> Result<GridFunction> {
    let d = dom.dim();
    if index > d {
        return parameter(format!("hard-family index must lie in 0..={d}, got {index}"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return parameter(format!("epsilon must be positive, got {epsilon}"));
    }
    let scale = dom.n() - 1;
    Ok(GridFunction::from_fn(*dom, move |x| {
        // Lovász extension at (x - 1)/scale, with integer chain weights over `scale`
        let s: Vec<i64> = x.iter().map(|&c| c - 1).collect();
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].cmp(&s[a]));
        let mut corner = vec![false; s.len()];
        let mut acc = (scale - s[order[0]]) as f64 * hard_family_base(index, &corner);
        for (i, &k) in order.iter().enumerate() {
            corner[k] = true;
            let next = order.get(i + 1).map_or(0, |&j| s[j]);
            let w = s[k] - next;
            if w != 0 {
                acc += w as f64 * hard_family_base(index, &corner);
            }
        }
        6.0 * epsilon * acc / scale as f64
    }))
}

/// Per-scenario separable model `F(x, ξ) = Σ l_i x_i + s_i |x_i - ξ_i|`.
///
/// Each `ξ_i` is uniform on the integers `center_i ± spread`, so every scenario
/// function is L♮-convex and the mean is available in closed form.
#[derive(Debug, Clone)]
pub struct CrnModel {
    dom: BoxDomain,
    slopes: Vec<f64>,
    kinks: Vec<f64>,
    centers: Vec<i64>,
    spread: i64,
    mean_tables: Arc<Vec<Vec<f64>>>,
}

impl CrnModel {
    pub fn generate(dom: BoxDomain, spread: i64, seed: u64) -> Result<Self> {
        if spread < 0 {
            return parameter(format!("scenario spread must be non-negative, got {spread}"));
        }
        let mut rng = stream_rng(seed, 0xc4a);
        let d = dom.dim();
        let slopes: Vec<f64> = (0..d).map(|_| rng.random_range(-3..=3i64) as f64).collect();
        let kinks: Vec<f64> = (0..d).map(|_| rng.random_range(1..=3i64) as f64).collect();
        let centers: Vec<i64> = (0..d).map(|_| rng.random_range(1..=dom.n())).collect();
        let width = (2 * spread + 1) as f64;
        let mean_tables = (0..d)
            .map(|i| {
                (1..=dom.n())
                    .map(|t| {
                        let e: i64 = (-spread..=spread).map(|k| (t - centers[i] - k).abs()).sum();
                        slopes[i] * t as f64 + kinks[i] * e as f64 / width
                    })
                    .collect()
            })
            .collect();
        Ok(Self { dom, slopes, kinks, centers, spread, mean_tables: Arc::new(mean_tables) })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.dom
    }

    /// Sup-norm Lipschitz constant shared by every scenario function.
    pub fn scenario_lipschitz(&self) -> f64 {
        self.slopes.iter().zip(&self.kinks).map(|(l, s)| l.abs() + s).sum()
    }

    /// Almost-sure bound on the l1 norm of the common-scenario chain estimate.
    pub fn gradient_bound(&self) -> f64 {
        1.5 * self.scenario_lipschitz()
    }

    /// Sub-Gaussian parameter of `F(x, ξ) - f(x)`: half its range.
    pub fn sigma(&self) -> f64 {
        self.kinks.iter().sum::<f64>() * self.spread as f64
    }

    pub fn draw_scenario<R: Rng>(&self, rng: &mut R) -> Vec<i64> {
        self.centers
            .iter()
            .map(|&c| c + rng.random_range(-self.spread..=self.spread))
            .collect()
    }

    pub fn scenario_value(&self, x: &[i64], scenario: &[i64]) -> f64 {
        x.iter()
            .zip(scenario)
            .enumerate()
            .map(|(i, (&xi, &z))| self.slopes[i] * xi as f64 + self.kinks[i] * (xi - z).abs() as f64)
            .sum()
    }

    pub fn mean_function(&self) -> GridFunction {
        let tables = self.mean_tables.clone();
        GridFunction::from_fn(self.dom, move |x| {
            x.iter().zip(tables.iter()).map(|(&c, t)| t[c as usize - 1]).sum()
        })
    }
}
