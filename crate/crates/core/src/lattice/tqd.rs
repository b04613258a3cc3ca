use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DotId, GridSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TqdShape {
    LinearHorizontal,
    LinearVertical,
    Elbow,
}

/// Three dots forming a simple path `d1 - d2 - d3` over live axes.
/// Stored direction-canonicalized with `d1 < d3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tqd {
    pub dots: [DotId; 3],
    pub shape: TqdShape,
}

impl Tqd {
    pub fn center(&self) -> DotId {
        self.dots[1]
    }

    pub fn contains(&self, d: DotId) -> bool {
        self.dots.contains(&d)
    }

    fn sort_key(&self) -> (DotId, TqdShape, DotId, DotId) {
        (self.dots[1], self.shape, self.dots[0], self.dots[2])
    }
}

/// DFS permutation tag over the TQD's internal order `(d1, d2, d3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Permutation {
    /// Singlet-triplet pair on `(d1, d2)`, gauge spin `d3`.
    #[serde(rename = "(1,2)3")]
    P12_3,
    /// Singlet-triplet pair on `(d2, d3)`, gauge spin `d1`.
    #[serde(rename = "(2,3)1")]
    P23_1,
}

impl Permutation {
    pub const ALL: [Permutation; 2] = [Permutation::P12_3, Permutation::P23_1];
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Permutation::P12_3 => "(1,2)3",
            Permutation::P23_1 => "(2,3)1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitAssignment {
    pub tqd: Tqd,
    pub permutation: Permutation,
}

impl QubitAssignment {
    /// Dots carrying `(a, b, c)`: `(a, b)` is the singlet-triplet pair and
    /// `b` is shared with the gauge spin `c`, so the `(a,b)` axis drives
    /// z rotations and the `(b,c)` axis drives n rotations.
    pub fn spin_map(&self) -> [DotId; 3] {
        let [d1, d2, d3] = self.tqd.dots;
        match self.permutation {
            Permutation::P12_3 => [d1, d2, d3],
            Permutation::P23_1 => [d3, d2, d1],
        }
    }

    pub fn singlet_pair(&self) -> (DotId, DotId) {
        let [a, b, _] = self.spin_map();
        (a, b)
    }

    pub fn gauge(&self) -> DotId {
        self.spin_map()[2]
    }

    /// Human-readable qubit name from its two axis labels, z axis first (e.g. `X4Y5`).
    pub fn name(&self, grid: &GridSpec) -> String {
        let [a, b, c] = self.spin_map();
        let z = grid.axis_between(a, b).map(|x| x.label).unwrap_or_default();
        let n = grid.axis_between(b, c).map(|x| x.label).unwrap_or_default();
        format!("{z}{n}")
    }
}

/// All 3-dot simple paths over live dots and axes, ordered row-major by
/// centre dot, then shape, then endpoints.
pub fn enumerate_tqds(grid: &GridSpec) -> Vec<Tqd> {
    let mut out = Vec::new();
    for center in grid.live_dots() {
        let nbrs = grid.live_neighbors(center);
        let mut local = Vec::new();
        for (i, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[i + 1..] {
                let (d1, d3) = if u < w { (u, w) } else { (w, u) };
                let shape = if d1.row == d3.row {
                    TqdShape::LinearHorizontal
                } else if d1.col == d3.col {
                    TqdShape::LinearVertical
                } else {
                    TqdShape::Elbow
                };
                local.push(Tqd {
                    dots: [d1, center, d3],
                    shape,
                });
            }
        }
        local.sort_by_key(Tqd::sort_key);
        out.extend(local);
    }
    out
}

/// Closed-form count of TQDs on a defect-free `n x m` grid: `6(n-1)(m-1) - 2`.
pub fn tqd_count_formula(n: usize, m: usize) -> Result<usize> {
    if n < 2 || m < 2 {
        return Err(Error::FormulaDomain { n, m });
    }
    Ok(6 * (n - 1) * (m - 1) - 2)
}

/// Two assignments per TQD, `(1,2)3` before `(2,3)1`.
pub fn enumerate_qubit_assignments(grid: &GridSpec) -> Vec<QubitAssignment> {
    enumerate_tqds(grid)
        .into_iter()
        .flat_map(|tqd| {
            Permutation::ALL.map(|permutation| QubitAssignment { tqd, permutation })
        })
        .collect()
}

/// Unordered pairs `(i, j)`, `i < j`, of TQD indices (into [`enumerate_tqds`])
/// with disjoint dot sets.
pub fn disjoint_tqd_pairs(grid: &GridSpec) -> Vec<(usize, usize)> {
    let tqds = enumerate_tqds(grid);
    let mut out = Vec::new();
    for i in 0..tqds.len() {
        for j in i + 1..tqds.len() {
            if tqds[i].dots.iter().all(|d| !tqds[j].contains(*d)) {
                out.push((i, j));
            }
        }
    }
    out
}
