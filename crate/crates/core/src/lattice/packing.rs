//! Disjoint TQD packing.
//!
//! Candidates are the enumerated TQDs; two conflict when they share a dot.
//! The exact solver is a depth-first branch and bound over candidates in
//! canonical order (include before exclude), so the first optimum it meets
//! is also the lexicographically least one. The oracle walks every
//! independent set.

use serde::{Deserialize, Serialize};

use super::{enumerate_tqds, DotId, GridSpec, Permutation, QubitAssignment, Tqd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackObjective {
    MaxCount,
    MaxCountThenAdjacency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackSolver {
    Exact,
    BruteForceOracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub qubits: Vec<QubitAssignment>,
    /// Qubit pairs joined by at least one live axis.
    pub adjacency_count: usize,
}

impl Placement {
    pub fn empty() -> Self {
        Self {
            qubits: Vec::new(),
            adjacency_count: 0,
        }
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.qubits
            .iter()
            .flat_map(|q| q.tqd.dots)
            .all(|d| seen.insert(d))
    }

    pub fn recompute_adjacency(&self, grid: &GridSpec) -> usize {
        let tqds: Vec<Tqd> = self.qubits.iter().map(|q| q.tqd).collect();
        let mut count = 0;
        for i in 0..tqds.len() {
            for j in i + 1..tqds.len() {
                if tqds_adjacent(grid, &tqds[i], &tqds[j]) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn tqds_adjacent(grid: &GridSpec, a: &Tqd, b: &Tqd) -> bool {
    a.dots
        .iter()
        .any(|&u| b.dots.iter().any(|&v| grid.live_link(u, v)))
}

#[derive(Clone)]
struct DotSet(Vec<u64>);

impl DotSet {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersects(&self, other: &DotSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn union_with(&mut self, other: &DotSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn difference_with(&mut self, other: &DotSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct Problem {
    sets: Vec<DotSet>,
    adjacent: Vec<Vec<bool>>,
    objective: PackObjective,
    n_dots: usize,
}

/// (count, adjacency) under the objective; adjacency is zeroed for MaxCount.
type Score = (usize, usize);

impl Problem {
    fn new(grid: &GridSpec, tqds: &[Tqd], objective: PackObjective) -> Self {
        let sets = tqds
            .iter()
            .map(|t| {
                let mut s = DotSet::new(grid.n_dots());
                for d in t.dots {
                    s.insert(grid.dot_index(d));
                }
                s
            })
            .collect();
        let adjacent = tqds
            .iter()
            .map(|a| tqds.iter().map(|b| tqds_adjacent(grid, a, b)).collect())
            .collect();
        Self {
            sets,
            adjacent,
            objective,
            n_dots: grid.n_dots(),
        }
    }

    fn added_adjacency(&self, chosen: &[usize], candidate: usize) -> usize {
        chosen
            .iter()
            .filter(|&&c| self.adjacent[c][candidate])
            .count()
    }

    fn score(&self, count: usize, adj: usize) -> Score {
        match self.objective {
            PackObjective::MaxCount => (count, 0),
            PackObjective::MaxCountThenAdjacency => (count, adj),
        }
    }
}

struct Search<'a> {
    problem: &'a Problem,
    best: Score,
    best_set: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn upper_bound(&self, idx: usize, used: &DotSet, adj: usize) -> Score {
        // Dots still coverable by a remaining compatible candidate.
        let mut free = DotSet::new(self.problem.n_dots);
        for s in &self.problem.sets[idx..] {
            if !s.intersects(used) {
                free.union_with(s);
            }
        }
        free.difference_with(used);
        let count = self.chosen.len();
        let extra = free.len() / 3;
        let adj_ub = adj + extra * count + extra * extra.saturating_sub(1) / 2;
        self.problem.score(count + extra, adj_ub)
    }

    fn branch_and_bound(&mut self, idx: usize, used: &DotSet, adj: usize) {
        if self.upper_bound(idx, used, adj) <= self.best {
            return;
        }
        if idx == self.problem.sets.len() {
            let s = self.problem.score(self.chosen.len(), adj);
            if s > self.best {
                self.best = s;
                self.best_set = self.chosen.clone();
            }
            return;
        }
        if !self.problem.sets[idx].intersects(used) {
            let gained = self.problem.added_adjacency(&self.chosen, idx);
            let mut next = used.clone();
            next.union_with(&self.problem.sets[idx]);
            self.chosen.push(idx);
            self.branch_and_bound(idx + 1, &next, adj + gained);
            self.chosen.pop();
        }
        self.branch_and_bound(idx + 1, used, adj);
    }

    fn exhaustive(&mut self, idx: usize, used: &DotSet, adj: usize) {
        if idx == self.problem.sets.len() {
            let s = self.problem.score(self.chosen.len(), adj);
            // Leaves arrive in lexicographic order of `chosen`, but compare
            // explicitly so the oracle does not lean on that.
            if s > self.best || (s == self.best && self.chosen < self.best_set) {
                self.best = s;
                self.best_set = self.chosen.clone();
            }
            return;
        }
        if !self.problem.sets[idx].intersects(used) {
            let gained = self.problem.added_adjacency(&self.chosen, idx);
            let mut next = used.clone();
            next.union_with(&self.problem.sets[idx]);
            self.chosen.push(idx);
            self.exhaustive(idx + 1, &next, adj + gained);
            self.chosen.pop();
        }
        self.exhaustive(idx + 1, used, adj);
    }
}

/// Packs pairwise-disjoint qubits maximizing count (then adjacency).
///
/// Ties go to the lexicographically least list of canonical TQD indices;
/// every qubit uses the `(1,2)3` permutation, which is the least encoding
/// for a given TQD.
pub fn pack_qubits(grid: &GridSpec, objective: PackObjective, solver: PackSolver) -> Placement {
    let tqds = enumerate_tqds(grid);
    if tqds.is_empty() {
        return Placement::empty();
    }
    let problem = Problem::new(grid, &tqds, objective);
    let mut search = Search {
        problem: &problem,
        best: (0, 0),
        best_set: Vec::new(),
        chosen: Vec::new(),
    };
    let used = DotSet::new(grid.n_dots());
    match solver {
        PackSolver::Exact => search.branch_and_bound(0, &used, 0),
        PackSolver::BruteForceOracle => search.exhaustive(0, &used, 0),
    }
    let qubits = search
        .best_set
        .iter()
        .map(|&i| QubitAssignment {
            tqd: tqds[i],
            permutation: Permutation::P12_3,
        })
        .collect();
    let mut placement = Placement {
        qubits,
        adjacency_count: 0,
    };
    placement.adjacency_count = placement.recompute_adjacency(grid);
    placement
}

/// Dots a placement occupies, for reporting.
pub fn placement_dots(p: &Placement) -> Vec<DotId> {
    p.qubits.iter().flat_map(|q| q.tqd.dots).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(grid: &GridSpec, obj: PackObjective) -> (Placement, Placement) {
        (
            pack_qubits(grid, obj, PackSolver::Exact),
            pack_qubits(grid, obj, PackSolver::BruteForceOracle),
        )
    }

    #[test]
    fn two_by_three_packs_two() {
        let g = GridSpec::new(2, 3).unwrap();
        let (e, o) = both(&g, PackObjective::MaxCount);
        assert_eq!(e.qubits.len(), 2);
        assert_eq!(e, o);
        assert!(e.is_disjoint());
        assert_eq!(placement_dots(&e).len(), 6);
    }

    #[test]
    fn dead_corner_packs_one() {
        let g = GridSpec::new(2, 3)
            .unwrap()
            .with_dead_dot(DotId::new(0, 0))
            .unwrap();
        for obj in [PackObjective::MaxCount, PackObjective::MaxCountThenAdjacency] {
            let (e, o) = both(&g, obj);
            assert_eq!(e.qubits.len(), 1);
            assert_eq!(e, o);
        }
    }

    #[test]
    fn too_small_is_empty() {
        let g = GridSpec::new(1, 2).unwrap();
        assert_eq!(
            pack_qubits(&g, PackObjective::MaxCount, PackSolver::Exact),
            Placement::empty()
        );
    }

    #[test]
    fn adjacency_objective_prefers_connected() {
        let g = GridSpec::new(3, 4).unwrap();
        let (e, o) = both(&g, PackObjective::MaxCountThenAdjacency);
        assert_eq!(e, o);
        assert_eq!(e.qubits.len(), 4);
        let plain = pack_qubits(&g, PackObjective::MaxCount, PackSolver::Exact);
        assert!(e.adjacency_count >= plain.adjacency_count);
    }
}
