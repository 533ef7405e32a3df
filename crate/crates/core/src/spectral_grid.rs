//! Radial and angular grids, even-in-ζ grid functions, and the Legendre
//! mode projection / synthesis pair.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fixed_point::SolverConfig;
use crate::quadrature::{legendre_with_derivative, GaussRule};

/// Composite Gauss-Legendre rule on `[0, R₀]` with uniform panels on
/// `[0, ξ₁]` and on `[ξ₁, R₀]`, so that ξ₁ is always a panel break.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r0: f64,
    pub xi1: f64,
    pub panel_breaks: Vec<f64>,
    rule: GaussRule,
    n_interior: usize,
}

impl RadialGrid {
    pub fn new(
        xi1: f64,
        r0: f64,
        inner_panels: usize,
        outer_panels: usize,
        order: usize,
    ) -> Result<Self> {
        if inner_panels == 0 || outer_panels == 0 || order < 2 {
            return Err(Error::Config(format!(
                "radial grid needs at least one panel per region and order >= 2 \
                 (got {inner_panels}/{outer_panels} panels, order {order})"
            )));
        }
        if !(xi1 > 0.0 && r0 > xi1) {
            return Err(Error::Config(format!(
                "radial grid needs 0 < xi1 < R0 (got {xi1}, {r0})"
            )));
        }
        let mut breaks: Vec<f64> = (0..inner_panels)
            .map(|p| xi1 * p as f64 / inner_panels as f64)
            .collect();
        breaks.extend((0..outer_panels).map(|p| xi1 + (r0 - xi1) * p as f64 / outer_panels as f64));
        breaks.push(r0);
        let rule = GaussRule::new(order);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        Ok(Self {
            nodes,
            weights,
            r0,
            xi1,
            panel_breaks: breaks,
            rule,
            n_interior: inner_panels * order,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes per panel.
    pub fn order(&self) -> usize {
        self.rule.len()
    }

    pub fn n_panels(&self) -> usize {
        self.panel_breaks.len() - 1
    }

    /// Number of nodes in `[0, ξ₁]`; they come first.
    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn panel_bounds(&self, p: usize) -> (f64, f64) {
        (self.panel_breaks[p], self.panel_breaks[p + 1])
    }

    pub fn panel_nodes(&self, p: usize) -> Range<usize> {
        p * self.order()..(p + 1) * self.order()
    }

    /// Panel whose open interior contains `r`, if any.
    pub fn panel_containing(&self, r: f64) -> Option<usize> {
        let p = self.panel_breaks.partition_point(|&b| b <= r);
        (p >= 1 && p < self.panel_breaks.len() && r > self.panel_breaks[p - 1]).then(|| p - 1)
    }
}

/// Gauss-Legendre rule in ζ with a Legendre table for even modes.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    pub zeta_nodes: Vec<f64>,
    pub zeta_weights: Vec<f64>,
    pub j_max: usize,
    /// `legendre_table[j][k] = P_j(ζ_k)` for 0 ≤ j ≤ J_max.
    pub legendre_table: Vec<Vec<f64>>,
    half_start: usize,
}

impl AngularGrid {
    pub fn new(order: usize, j_max: usize) -> Result<Self> {
        if !j_max.is_multiple_of(2) {
            return Err(Error::Config(format!("J_max must be even (got {j_max})")));
        }
        if order < 2 || order < 2 * j_max {
            return Err(Error::Config(format!(
                "angular order must be at least max(2, 2*J_max) (got {order}, J_max {j_max})"
            )));
        }
        let rule = GaussRule::new(order);
        let legendre_table = (0..=j_max)
            .map(|j| rule.nodes.iter().map(|&z| legendre_eval(j, z)).collect())
            .collect();
        Ok(Self {
            half_start: order / 2,
            zeta_nodes: rule.nodes,
            zeta_weights: rule.weights,
            j_max,
            legendre_table,
        })
    }

    pub fn order(&self) -> usize {
        self.zeta_nodes.len()
    }

    /// Nodes with ζ ≥ 0 (the stored half).
    pub fn half_nodes(&self) -> &[f64] {
        &self.zeta_nodes[self.half_start..]
    }

    pub fn n_half(&self) -> usize {
        self.order() - self.half_start
    }

    /// Index into the stored half for full node index `k`.
    pub fn half_index(&self, k: usize) -> usize {
        let n = self.order();
        if k >= self.half_start {
            k - self.half_start
        } else {
            n - 1 - k - self.half_start
        }
    }

    /// Weight of stored node `kh` for integrating even functions over [−1, 1].
    pub fn folded_weight(&self, kh: usize) -> f64 {
        let k = self.half_start + kh;
        if self.zeta_nodes[k] == 0.0 {
            self.zeta_weights[k]
        } else {
            2.0 * self.zeta_weights[k]
        }
    }

    pub fn even_modes(&self) -> impl Iterator<Item = usize> {
        (0..=self.j_max).step_by(2)
    }
}

/// Radial and angular grids shared by every grid function on them.
#[derive(Debug, Clone)]
pub struct Grid {
    pub radial: RadialGrid,
    pub angular: AngularGrid,
}

impl Grid {
    pub fn n_modes(&self) -> usize {
        self.angular.j_max / 2 + 1
    }
}

pub fn make_grids(config: &SolverConfig, xi1: f64) -> Result<Arc<Grid>> {
    config.validate()?;
    let radial = RadialGrid::new(
        xi1,
        config.r0_factor * xi1,
        config.inner_panels,
        config.outer_panels,
        config.panel_order,
    )?;
    let angular = AngularGrid::new(config.angular_order, config.j_max)?;
    Ok(Arc::new(Grid { radial, angular }))
}

/// P_j(ζ) by the three-term recurrence.
pub fn legendre_eval(j: usize, zeta: f64) -> f64 {
    legendre_with_derivative(j, zeta).0
}

/// `(P_j(ζ), P_j'(ζ))`.
pub fn legendre_eval_with_derivative(j: usize, zeta: f64) -> (f64, f64) {
    legendre_with_derivative(j, zeta)
}

/// A function on `[0, R₀] × [−1, 1]`, even in ζ. Only the ζ ≥ 0 half is
/// stored, row-major by radial node.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let n = grid.radial.len() * grid.angular.n_half();
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid
            .radial
            .nodes
            .iter()
            .flat_map(|&r| grid.angular.half_nodes().iter().map(move |&z| (r, z)))
            .map(|(r, z)| f(r, z))
            .collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn from_radial(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r, _| f(r))
    }

    /// Wraps raw half-grid values (length `n_radial × n_half`).
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let expected = grid.radial.len() * grid.angular.n_half();
        if values.len() != expected {
            return Err(Error::Config(format!(
                "grid function needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_half(&self) -> usize {
        self.grid.angular.n_half()
    }

    /// Value at radial node `i` and stored angular node `kh` (ζ ≥ 0).
    pub fn get_half(&self, i: usize, kh: usize) -> f64 {
        self.values[i * self.n_half() + kh]
    }

    /// Value at radial node `i` and full angular node `k`, mirrored.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.get_half(i, self.grid.angular.half_index(k))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_half();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `f(self, other)`; both must live on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(
            Arc::ptr_eq(&self.grid, &other.grid) || self.values.len() == other.values.len()
        );
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// Spread of values over ζ at the innermost radial node; zero for
    /// functions with a well-defined value at the origin.
    pub fn origin_anisotropy(&self) -> f64 {
        let row = self.row(0);
        let (lo, hi) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }
}

pub fn positive_part(f: &GridFunction) -> GridFunction {
    f.map(|v| v.max(0.0))
}

/// max |f| over all nodes.
pub fn sup_norm(f: &GridFunction) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Radial coefficient arrays `h_j(r_i)` for even `j ≤ J_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub j_max: usize,
    modes: Vec<Vec<f64>>,
}

impl ModeSet {
    pub fn zeros(j_max: usize, n_radial: usize) -> Self {
        assert!(j_max.is_multiple_of(2), "J_max must be even");
        Self {
            j_max,
            modes: vec![vec![0.0; n_radial]; j_max / 2 + 1],
        }
    }

    pub fn from_modes(j_max: usize, modes: Vec<Vec<f64>>) -> Self {
        assert!(j_max.is_multiple_of(2) && modes.len() == j_max / 2 + 1);
        Self { j_max, modes }
    }

    pub fn mode(&self, j: usize) -> &[f64] {
        assert!(
            j.is_multiple_of(2) && j <= self.j_max,
            "mode {j} not stored"
        );
        &self.modes[j / 2]
    }

    pub fn mode_mut(&mut self, j: usize) -> &mut Vec<f64> {
        assert!(
            j.is_multiple_of(2) && j <= self.j_max,
            "mode {j} not stored"
        );
        &mut self.modes[j / 2]
    }

    /// `(j, h_j)` pairs in increasing `j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.modes
            .iter()
            .enumerate()
            .map(|(m, v)| (2 * m, v.as_slice()))
    }

    pub fn n_radial(&self) -> usize {
        self.modes[0].len()
    }

    pub fn into_modes(self) -> Vec<Vec<f64>> {
        self.modes
    }
}

/// h_j(r_i) = (j+½) Σ_k w_k f(r_i, ζ_k) P_j(ζ_k) for even j ≤ J_max.
pub fn project(f: &GridFunction) -> ModeSet {
    let ag = &f.grid.angular;
    let nh = ag.n_half();
    let start = ag.order() - nh;
    let folded: Vec<f64> = (0..nh).map(|kh| ag.folded_weight(kh)).collect();
    let mut out = ModeSet::zeros(ag.j_max, f.grid.radial.len());
    for j in ag.even_modes() {
        let pj = &ag.legendre_table[j][start..];
        let c = j as f64 + 0.5;
        for (i, h) in out.mode_mut(j).iter_mut().enumerate() {
            *h = c * f
                .row(i)
                .iter()
                .zip(&folded)
                .zip(pj)
                .map(|((v, w), p)| v * w * p)
                .sum::<f64>();
        }
    }
    out
}

/// f(r_i, ζ_k) = Σ_j h_j(r_i) P_j(ζ_k).
pub fn synthesize(m: &ModeSet, grid: &Arc<Grid>) -> GridFunction {
    let ag = &grid.angular;
    let nh = ag.n_half();
    let start = ag.order() - nh;
    let mut out = GridFunction::zeros(grid);
    for (j, h) in m.iter().filter(|(j, _)| *j <= ag.j_max) {
        let pj = &ag.legendre_table[j][start..];
        for (i, &hi) in h.iter().enumerate() {
            let row = &mut out.values[i * nh..(i + 1) * nh];
            for (v, p) in row.iter_mut().zip(pj) {
                *v += hi * p;
            }
        }
    }
    out
}
