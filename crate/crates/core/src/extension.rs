//! The glued convex extension of a lattice function and exhaustive structure checks.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, parameter, Error, Result};
use crate::lattice::{neighbor_chain, neighbor_chain_in_cube, BoxDomain, BoxPoint, LatticePoint, NeighborChain};

/// Largest grid the dense checkers will scan.
pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// Absolute tolerance for comparisons between function values.
pub const VALUE_TOL: f64 = 1e-9;

type Evaluator = Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Dense(Arc<Vec<f64>>),
    Callable(Evaluator),
}

/// A real-valued function on `[1..n]^d`, either tabulated or computed on demand.
///
/// Cloning is cheap; the underlying table or closure is shared.
#[derive(Clone)]
pub struct GridFunction {
    domain: BoxDomain,
    repr: Repr,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            Repr::Dense(_) => "dense",
            Repr::Callable(_) => "callable",
        };
        f.debug_struct("GridFunction").field("domain", &self.domain).field("repr", &kind).finish()
    }
}

impl GridFunction {
    /// Wraps a table listed in lexicographic point order.
    pub fn from_values(domain: BoxDomain, values: Vec<f64>) -> Result<Self> {
        if Some(values.len()) != domain.num_points() {
            return parameter(format!(
                "table has {} values, domain has {:?} points",
                values.len(),
                domain.num_points()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return parameter("table contains a non-finite value");
        }
        Ok(Self { domain, repr: Repr::Dense(Arc::new(values)) })
    }

    /// Wraps an evaluator; it is only ever called on feasible points.
    pub fn from_fn(domain: BoxDomain, f: impl Fn(&[i64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { domain, repr: Repr::Callable(Arc::new(f)) }
    }

    /// Evaluates `f` on every point and stores the table.
    pub fn tabulate(
        domain: BoxDomain,
        f: impl Fn(&[i64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_fn(domain, f).materialize(DEFAULT_CELL_BUDGET)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// The value table, if materialized.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Dense(v) => Some(v),
            Repr::Callable(_) => None,
        }
    }

    /// Value at a point already known to be feasible.
    #[inline]
    pub fn eval(&self, coords: &[i64]) -> f64 {
        debug_assert!(self.domain.contains(coords), "{coords:?} outside domain");
        match &self.repr {
            Repr::Dense(v) => v[self.domain.index_of(coords)],
            Repr::Callable(f) => f(coords),
        }
    }

    /// Checked evaluation.
    pub fn value(&self, x: &[i64]) -> Result<f64> {
        if !self.domain.contains(x) {
            return domain(format!("{x:?} is outside [1..{}]^{}", self.domain.n(), self.domain.dim()));
        }
        Ok(self.eval(x))
    }

    /// Dense copy of this function, refusing grids above `budget` cells.
    pub fn materialize(&self, budget: usize) -> Result<Self> {
        if self.is_dense() {
            return Ok(self.clone());
        }
        let cells = cell_count(&self.domain, budget)?;
        let values: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|i| self.eval(&self.domain.point_at(i).0))
            .collect();
        Self::from_values(self.domain, values)
    }

    fn dense_table(&self, budget: usize) -> Result<(Arc<Vec<f64>>, usize)> {
        let cells = cell_count(&self.domain, budget)?;
        let table = match &self.materialize(budget)?.repr {
            Repr::Dense(v) => v.clone(),
            Repr::Callable(_) => unreachable!("materialize returns a table"),
        };
        Ok((table, cells))
    }
}

fn cell_count(dom: &BoxDomain, budget: usize) -> Result<usize> {
    match dom.num_points() {
        Some(c) if c <= budget => Ok(c),
        _ => Err(Error::Budget(format!(
            "[1..{}]^{} exceeds the dense cell budget of {budget}",
            dom.n(),
            dom.dim()
        ))),
    }
}

fn chain_value(f: &GridFunction, chain: &NeighborChain) -> f64 {
    // Weighted form: exact on lattice points, where the weights are 0/1.
    chain
        .weights()
        .iter()
        .zip(&chain.points)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, p)| w * f.eval(&p.0))
        .sum()
}

fn chain_subgradient(f: &GridFunction, chain: &NeighborChain) -> Vec<f64> {
    let mut g = vec![0.0; chain.frac.len()];
    let mut prev = f.eval(&chain.points[0].0);
    for (&k, p) in chain.permutation.order().iter().zip(&chain.points[1..]) {
        let cur = f.eval(&p.0);
        g[k] = cur - prev;
        prev = cur;
    }
    g
}

/// Value of the convex extension at a point of the continuous box.
pub fn extension_value(f: &GridFunction, x: &BoxPoint) -> Result<f64> {
    Ok(chain_value(f, &neighbor_chain(x, f.domain())?))
}

/// Value of the extension computed through the cube `base + [0,1]^d`.
pub fn extension_value_in_cube(f: &GridFunction, x: &BoxPoint, base: &LatticePoint) -> Result<f64> {
    Ok(chain_value(f, &neighbor_chain_in_cube(x, base, f.domain())?))
}

/// A subgradient of the extension at `x`: successive differences along the chain.
pub fn extension_subgradient(f: &GridFunction, x: &BoxPoint) -> Result<Vec<f64>> {
    Ok(chain_subgradient(f, &neighbor_chain(x, f.domain())?))
}

/// Structural constants of a tabulated function.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub is_lnatural: bool,
    /// First pair, in lexicographic order, violating midpoint convexity.
    pub witness: Option<(LatticePoint, LatticePoint)>,
    /// Largest value change between points at sup-distance at most one.
    pub lipschitz_linf: f64,
    /// Smallest optimality gap of a non-minimizer; unique-minimizer case only.
    pub iz_parameter: Option<f64>,
    /// Smallest `η` with `|x - x*|_inf <= η (f(x) - f*)`; unique-minimizer case only.
    pub wsm_eta: Option<f64>,
    pub minimizers: Vec<LatticePoint>,
    pub min_value: f64,
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lnatural: {}", self.is_lnatural)?;
        if let Some((x, y)) = &self.witness {
            writeln!(f, "witness: f(x) + f(y) < f(ceil((x+y)/2)) + f(floor((x+y)/2)) at x={x} y={y}")?;
        }
        writeln!(f, "L: {}", self.lipschitz_linf)?;
        match self.iz_parameter {
            Some(c) => writeln!(f, "c: {c}")?,
            None => writeln!(f, "c: n/a")?,
        }
        match self.wsm_eta {
            Some(e) => writeln!(f, "eta: {e}")?,
            None => writeln!(f, "eta: n/a")?,
        }
        writeln!(f, "min value: {}", self.min_value)?;
        let mins: Vec<String> = self.minimizers.iter().map(|p| p.to_string()).collect();
        write!(f, "minimizers: {}", mins.join(" "))
    }
}

fn midpoints(x: &[i64], y: &[i64], up: &mut [i64], down: &mut [i64]) {
    for k in 0..x.len() {
        let s = x[k] + y[k];
        down[k] = s.div_euclid(2);
        up[k] = s - down[k];
    }
}

/// First pair violating discrete midpoint convexity, scanning all pairs.
pub fn midpoint_witness(f: &GridFunction, budget: usize) -> Result<Option<(LatticePoint, LatticePoint)>> {
    let (table, cells) = f.dense_table(budget)?;
    let dom = *f.domain();
    let hit = (0..cells).into_par_iter().find_map_first(|i| {
        let x = dom.point_at(i);
        let mut up = vec![0; dom.dim()];
        let mut down = vec![0; dom.dim()];
        for j in i + 1..cells {
            let y = dom.point_at(j);
            midpoints(&x.0, &y.0, &mut up, &mut down);
            let lhs = table[i] + table[j];
            let rhs = table[dom.index_of(&up)] + table[dom.index_of(&down)];
            if lhs < rhs - VALUE_TOL {
                return Some((x, y));
            }
        }
        None
    });
    Ok(hit)
}

/// Offsets in `{-1,0,1}^d` other than zero.
fn unit_offsets(d: usize) -> Vec<Vec<i64>> {
    let total = 3usize.pow(d as u32);
    (0..total)
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let v = (code % 3) as i64 - 1;
                    code /= 3;
                    v
                })
                .collect::<Vec<_>>()
        })
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect()
}

fn lipschitz_linf(table: &[f64], dom: &BoxDomain) -> f64 {
    let offsets = unit_offsets(dom.dim());
    (0..table.len())
        .into_par_iter()
        .map(|i| {
            let x = dom.point_at(i);
            let mut y = x.0.clone();
            let mut best = 0.0f64;
            for o in &offsets {
                for k in 0..y.len() {
                    y[k] = x.0[k] + o[k];
                }
                if dom.contains(&y) {
                    best = best.max((table[i] - table[dom.index_of(&y)]).abs());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Exhaustive structure report using the default cell budget.
pub fn check_lnatural(f: &GridFunction) -> Result<StructureReport> {
    check_lnatural_with_budget(f, DEFAULT_CELL_BUDGET)
}

pub fn check_lnatural_with_budget(f: &GridFunction, budget: usize) -> Result<StructureReport> {
    let (table, _) = f.dense_table(budget)?;
    let dom = *f.domain();
    let witness = midpoint_witness(f, budget)?;
    let min_value = table.iter().copied().fold(f64::INFINITY, f64::min);
    let minimizers: Vec<LatticePoint> = table
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= min_value + VALUE_TOL)
        .map(|(i, _)| dom.point_at(i))
        .collect();

    let (iz_parameter, wsm_eta) = if minimizers.len() == 1 {
        let star = &minimizers[0];
        let mut gap = f64::INFINITY;
        let mut eta = 0.0f64;
        for (i, &v) in table.iter().enumerate() {
            let x = dom.point_at(i);
            if &x == star {
                continue;
            }
            let excess = v - min_value;
            gap = gap.min(excess);
            eta = eta.max(x.linf_distance(star) as f64 / excess);
        }
        (Some(gap), Some(eta))
    } else {
        (None, None)
    };

    Ok(StructureReport {
        is_lnatural: witness.is_none(),
        witness,
        lipschitz_linf: lipschitz_linf(&table, &dom),
        iz_parameter,
        wsm_eta,
        minimizers,
        min_value,
    })
}

/// Largest value change between sup-adjacent points.
pub fn lipschitz_constant(f: &GridFunction) -> Result<f64> {
    let (table, _) = f.dense_table(DEFAULT_CELL_BUDGET)?;
    Ok(lipschitz_linf(&table, f.domain()))
}

/// A violation of translation submodularity: `(x, y, shift)`.
pub type TranslationWitness = (LatticePoint, LatticePoint, i64);

/// Checks `f(x)+f(y) >= f((x - a1) ∨ y) + f(x ∧ (y + a1))` for all pairs and shifts `a`.
///
/// Shifts `a >= n` reproduce `(y, x)` and are skipped.
pub fn check_translation_submodularity(f: &GridFunction) -> Result<(bool, Option<TranslationWitness>)> {
    let (table, cells) = f.dense_table(DEFAULT_CELL_BUDGET)?;
    let dom = *f.domain();
    let hit = (0..cells).into_par_iter().find_map_first(|i| {
        let x = dom.point_at(i);
        let mut a_pt = vec![0; dom.dim()];
        let mut b_pt = vec![0; dom.dim()];
        for j in 0..cells {
            let y = dom.point_at(j);
            for shift in 0..dom.n() {
                for k in 0..dom.dim() {
                    a_pt[k] = (x.0[k] - shift).max(y.0[k]);
                    b_pt[k] = x.0[k].min(y.0[k] + shift);
                }
                let lhs = table[i] + table[j];
                let rhs = table[dom.index_of(&a_pt)] + table[dom.index_of(&b_pt)];
                if lhs < rhs - VALUE_TOL {
                    return Some((x, y.clone(), shift));
                }
            }
        }
        None
    });
    Ok((hit.is_none(), hit))
}

/// `(is_local_min, is_global_min)` where locality is over sup-distance one.
pub fn local_global_check(f: &GridFunction, x: &LatticePoint) -> Result<(bool, bool)> {
    let dom = *f.domain();
    let fx = f.value(&x.0)?;
    let (table, _) = f.dense_table(DEFAULT_CELL_BUDGET)?;
    let mut y = x.0.clone();
    let mut local = true;
    for o in unit_offsets(dom.dim()) {
        for k in 0..y.len() {
            y[k] = x.0[k] + o[k];
        }
        if dom.contains(&y) && table[dom.index_of(&y)] < fx - VALUE_TOL {
            local = false;
            break;
        }
    }
    let global = table.iter().all(|&v| v >= fx - VALUE_TOL);
    Ok((local, global))
}

/// Reads a grid table: header `d N`, then one `x_1 ... x_d value` line per point.
///
/// Blank lines and lines starting with `#` are ignored.
pub fn read_grid<R: BufRead>(reader: R) -> Result<GridFunction> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty() && !s.trim_start().starts_with('#')));

    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(perr(1, "missing header line `d N`".into())),
    };
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(perr(hline, format!("header must be `d N`, got {header:?}")));
    }
    let d: usize = head[0].parse().map_err(|_| perr(hline, format!("bad dimension {:?}", head[0])))?;
    let n: i64 = head[1].parse().map_err(|_| perr(hline, format!("bad scale {:?}", head[1])))?;
    let dom = BoxDomain::new(d, n).map_err(|e| perr(hline, e.to_string()))?;
    let cells = cell_count(&dom, DEFAULT_CELL_BUDGET)?;

    let mut values = vec![f64::NAN; cells];
    let mut seen = vec![false; cells];
    let mut last = hline;
    for (lineno, line) in lines {
        last = lineno;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != d + 1 {
            return Err(perr(lineno, format!("expected {} fields, found {}", d + 1, fields.len())));
        }
        let coords = fields[..d]
            .iter()
            .map(|s| s.parse::<i64>().map_err(|_| perr(lineno, format!("bad coordinate {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if !dom.contains(&coords) {
            return Err(perr(lineno, format!("point {coords:?} outside [1..{n}]^{d}")));
        }
        let v: f64 = fields[d].parse().map_err(|_| perr(lineno, format!("bad value {:?}", fields[d])))?;
        if !v.is_finite() {
            return Err(perr(lineno, format!("non-finite value {v}")));
        }
        let idx = dom.index_of(&coords);
        if seen[idx] {
            return Err(perr(lineno, format!("duplicate point {coords:?}")));
        }
        seen[idx] = true;
        values[idx] = v;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(perr(last + 1, format!("point {} has no value", dom.point_at(missing))));
    }
    GridFunction::from_values(dom, values)
}

/// Writes the table in lexicographic point order.
pub fn write_grid<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let dom = f.domain();
    let cells = cell_count(dom, DEFAULT_CELL_BUDGET)?;
    writeln!(out, "{} {}", dom.dim(), dom.n())?;
    for i in 0..cells {
        let p = dom.point_at(i);
        for c in &p.0 {
            write!(out, "{c} ")?;
        }
        writeln!(out, "{}", f.eval(&p.0))?;
    }
    Ok(())
}
