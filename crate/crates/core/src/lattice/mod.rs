//! The 2D dot lattice: dots, exchange axes, defects, triple-dot enumeration
//! and defect-aware qubit packing.
//!
//! Dots are addressed by `(row, col)` and numbered row-major as plungers
//! `P1..P(n*m)`. Axis labels:
//!
//! * X (intra-row) axes are numbered row-major from `X1`.
//! * Y (inter-row) axes are labelled by the plunger number of their lower dot,
//!   so on a 2x3 array the three Y axes are `Y4`, `Y5`, `Y6` and `Y5` joins
//!   `P2`-`P5`.

mod packing;
mod tqd;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use packing::{pack_qubits, placement_dots, PackObjective, PackSolver, Placement};
pub use tqd::{
    disjoint_tqd_pairs, enumerate_qubit_assignments, enumerate_tqds, tqd_count_formula,
    Permutation, QubitAssignment, Tqd, TqdShape,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DotId {
    pub row: usize,
    pub col: usize,
}

impl DotId {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn is_neighbor(&self, other: &DotId) -> bool {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col) == 1
    }
}

impl fmt::Display for DotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxisKind {
    /// Intra-row exchange.
    X,
    /// Inter-row exchange.
    Y,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeAxis {
    pub a: DotId,
    pub b: DotId,
    pub kind: AxisKind,
    pub label: String,
    /// Number carried by the label (`X3` -> 3). Used for ordering.
    pub number: usize,
}

impl ExchangeAxis {
    pub fn touches(&self, d: DotId) -> bool {
        self.a == d || self.b == d
    }

    pub fn connects(&self, u: DotId, v: DotId) -> bool {
        (self.a == u && self.b == v) || (self.a == v && self.b == u)
    }

    /// Routing preference: X before Y, then label number.
    pub fn order_key(&self) -> (AxisKind, usize) {
        (self.kind, self.number)
    }
}

/// The dot array with its defects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(default)]
    pub dead_dots: BTreeSet<DotId>,
    #[serde(default)]
    pub dead_axes: BTreeSet<String>,
}

impl GridSpec {
    pub fn new(n_rows: usize, n_cols: usize) -> Result<Self> {
        let grid = Self {
            n_rows,
            n_cols,
            dead_dots: BTreeSet::new(),
            dead_axes: BTreeSet::new(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_dead_dot(mut self, dot: DotId) -> Result<Self> {
        if !self.in_bounds(dot) {
            return Err(Error::InvalidGrid(format!("dead dot {dot} out of bounds")));
        }
        self.dead_dots.insert(dot);
        Ok(self)
    }

    pub fn with_dead_axis(mut self, label: &str) -> Result<Self> {
        if self.axis_by_label(label).is_none() {
            return Err(Error::InvalidGrid(format!("unknown axis label {label}")));
        }
        self.dead_axes.insert(label.to_string());
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::InvalidGrid(format!(
                "grid must be at least 1x1, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if let Some(d) = self.dead_dots.iter().find(|d| !self.in_bounds(**d)) {
            return Err(Error::InvalidGrid(format!("dead dot {d} out of bounds")));
        }
        if let Some(l) = self
            .dead_axes
            .iter()
            .find(|l| self.axis_by_label(l).is_none())
        {
            return Err(Error::InvalidGrid(format!("unknown dead axis label {l}")));
        }
        Ok(())
    }

    pub fn n_dots(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn in_bounds(&self, d: DotId) -> bool {
        d.row < self.n_rows && d.col < self.n_cols
    }

    /// Row-major index; doubles as the spin index in simulations.
    pub fn dot_index(&self, d: DotId) -> usize {
        d.row * self.n_cols + d.col
    }

    pub fn dot_at(&self, index: usize) -> DotId {
        DotId::new(index / self.n_cols, index % self.n_cols)
    }

    /// Plunger name, `P1` for `(0,0)`.
    pub fn dot_name(&self, d: DotId) -> String {
        format!("P{}", self.dot_index(d) + 1)
    }

    /// Parses a plunger name such as `P5`.
    pub fn dot_by_name(&self, name: &str) -> Option<DotId> {
        let n: usize = name.strip_prefix('P')?.parse().ok()?;
        (1..=self.n_dots()).contains(&n).then(|| self.dot_at(n - 1))
    }

    pub fn dots(&self) -> impl Iterator<Item = DotId> + '_ {
        (0..self.n_dots()).map(|i| self.dot_at(i))
    }

    pub fn is_dot_live(&self, d: DotId) -> bool {
        self.in_bounds(d) && !self.dead_dots.contains(&d)
    }

    pub fn live_dots(&self) -> impl Iterator<Item = DotId> + '_ {
        self.dots().filter(|d| self.is_dot_live(*d))
    }

    /// All axes in label order: X axes first, then Y axes.
    pub fn axes(&self) -> Vec<ExchangeAxis> {
        let mut axes = Vec::new();
        let mut x = 0;
        for r in 0..self.n_rows {
            for c in 0..self.n_cols.saturating_sub(1) {
                x += 1;
                axes.push(ExchangeAxis {
                    a: DotId::new(r, c),
                    b: DotId::new(r, c + 1),
                    kind: AxisKind::X,
                    label: format!("X{x}"),
                    number: x,
                });
            }
        }
        let mut ys = Vec::new();
        for r in 0..self.n_rows.saturating_sub(1) {
            for c in 0..self.n_cols {
                let lower = DotId::new(r + 1, c);
                let number = self.dot_index(lower) + 1;
                ys.push(ExchangeAxis {
                    a: DotId::new(r, c),
                    b: lower,
                    kind: AxisKind::Y,
                    label: format!("Y{number}"),
                    number,
                });
            }
        }
        ys.sort_by_key(|a| a.number);
        axes.extend(ys);
        axes
    }

    pub fn axis_by_label(&self, label: &str) -> Option<ExchangeAxis> {
        self.axes().into_iter().find(|a| a.label == label)
    }

    pub fn axis_between(&self, u: DotId, v: DotId) -> Option<ExchangeAxis> {
        if !u.is_neighbor(&v) {
            return None;
        }
        self.axes().into_iter().find(|a| a.connects(u, v))
    }

    /// An axis is usable when it is not dead and neither endpoint is dead.
    pub fn is_axis_live(&self, axis: &ExchangeAxis) -> bool {
        !self.dead_axes.contains(&axis.label) && self.is_dot_live(axis.a) && self.is_dot_live(axis.b)
    }

    pub fn live_axes(&self) -> Vec<ExchangeAxis> {
        self.axes()
            .into_iter()
            .filter(|a| self.is_axis_live(a))
            .collect()
    }

    pub fn live_link(&self, u: DotId, v: DotId) -> bool {
        self.axis_between(u, v)
            .is_some_and(|a| self.is_axis_live(&a))
    }

    /// Live neighbors of `d` reachable over live axes, row-major.
    pub fn live_neighbors(&self, d: DotId) -> Vec<DotId> {
        let mut out = Vec::with_capacity(4);
        let (r, c) = (d.row as isize, d.col as isize);
        for (dr, dc) in [(-1, 0), (0, -1), (0, 1), (1, 0)] {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 {
                continue;
            }
            let n = DotId::new(nr as usize, nc as usize);
            if self.in_bounds(n) && self.live_link(d, n) {
                out.push(n);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_three_labels() {
        let g = GridSpec::new(2, 3).unwrap();
        let labels: Vec<_> = g.axes().iter().map(|a| a.label.clone()).collect();
        assert_eq!(labels, ["X1", "X2", "X3", "X4", "Y4", "Y5", "Y6"]);
        let x2 = g.axis_by_label("X2").unwrap();
        assert_eq!((g.dot_name(x2.a), g.dot_name(x2.b)), ("P2".into(), "P3".into()));
        let y5 = g.axis_by_label("Y5").unwrap();
        assert_eq!((g.dot_name(y5.a), g.dot_name(y5.b)), ("P2".into(), "P5".into()));
        let y6 = g.axis_by_label("Y6").unwrap();
        assert_eq!((g.dot_name(y6.a), g.dot_name(y6.b)), ("P3".into(), "P6".into()));
        // X4 and Y5 share P5
        let x4 = g.axis_by_label("X4").unwrap();
        assert!(x4.touches(y5.b));
    }

    #[test]
    fn labels_unique_on_larger_grids() {
        for (n, m) in [(3, 4), (4, 4), (1, 5), (5, 1)] {
            let g = GridSpec::new(n, m).unwrap();
            let axes = g.axes();
            let set: BTreeSet<_> = axes.iter().map(|a| a.label.clone()).collect();
            assert_eq!(set.len(), axes.len());
            assert_eq!(axes.len(), n * (m - 1) + (n - 1) * m);
        }
    }

    #[test]
    fn dead_dot_kills_incident_axes() {
        let g = GridSpec::new(2, 3)
            .unwrap()
            .with_dead_dot(DotId::new(0, 0))
            .unwrap();
        let live: Vec<_> = g.live_axes().into_iter().map(|a| a.label).collect();
        assert_eq!(live, ["X2", "X3", "X4", "Y5", "Y6"]);
    }

    #[test]
    fn dead_axis_keeps_dots() {
        let g = GridSpec::new(2, 3).unwrap().with_dead_axis("X1").unwrap();
        assert!(g.is_dot_live(DotId::new(0, 0)));
        assert!(!g.live_link(DotId::new(0, 0), DotId::new(0, 1)));
        assert_eq!(g.live_neighbors(DotId::new(0, 0)), vec![DotId::new(1, 0)]);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(GridSpec::new(0, 3).is_err());
        assert!(GridSpec::new(2, 3)
            .unwrap()
            .with_dead_dot(DotId::new(2, 0))
            .is_err());
        assert!(GridSpec::new(2, 3).unwrap().with_dead_axis("Y7").is_err());
    }

    #[test]
    fn names_round_trip() {
        let g = GridSpec::new(3, 4).unwrap();
        for d in g.dots() {
            assert_eq!(g.dot_by_name(&g.dot_name(d)), Some(d));
        }
        assert_eq!(g.dot_by_name("P13"), None);
        assert_eq!(g.dot_by_name("Q1"), None);
    }
}
