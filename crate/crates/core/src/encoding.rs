//! Exchange-only qubit semantics on three spins `(a, b)c`.
//!
//! The logical doublet basis is
//!
//! * `|0, m>`: singlet on `(a, b)` with `c` carrying gauge `m`,
//! * `|1, m>`: the total-spin-1/2 state built from the `(a, b)` triplet,
//!
//! with the phase of `|1>` fixed so the `(b, c)` singlet projector reads
//! `(1 + sigma_n)/2`, `n = -(sqrt 3, 0, 1)/2`. The remaining four states are
//! the spin-3/2 quadruplet; population there is leakage.
//!
//! The logical Bloch sphere is oriented so that an exchange pulse of angle
//! `theta` on the `(a,b)` axis is a right-handed rotation by `theta` about
//! `+z`, and on the `(b,c)` axis a right-handed rotation about `n`. With
//! exchange written as `-J P_S` this is the mirror image of the naive
//! `<sigma_y>` convention; readout only involves `z`, so nothing observable
//! depends on the choice.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_qubit_assignments, DotId, ExchangeAxis, GridSpec, QubitAssignment};
use crate::pulse_seq::{Pulse, PulseSeq};
use crate::spin_sim::{prepare_state, PureState, SpectatorSpec};

pub type Mat2 = [[Complex64; 2]; 2];

/// A qubit assignment resolved against a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedFrame {
    pub assignment: QubitAssignment,
    /// Register spin indices of `(a, b, c)`.
    pub spins: [usize; 3],
    /// Labels of the `(a,b)` (z) and `(b,c)` (n) axes.
    pub z_axis: String,
    pub n_axis: String,
}

impl EncodedFrame {
    pub fn new(grid: &GridSpec, assignment: QubitAssignment) -> Result<Self> {
        let dots = assignment.spin_map();
        for d in dots {
            if !grid.is_dot_live(d) {
                return Err(Error::InvalidFrame(format!("dot {} is not live", grid.dot_name(d))));
            }
        }
        let live_axis = |u: DotId, v: DotId| -> Result<ExchangeAxis> {
            grid.axis_between(u, v)
                .filter(|a| grid.is_axis_live(a))
                .ok_or_else(|| {
                    Error::InvalidFrame(format!(
                        "no live axis between {} and {}",
                        grid.dot_name(u),
                        grid.dot_name(v)
                    ))
                })
        };
        let z = live_axis(dots[0], dots[1])?;
        let n = live_axis(dots[1], dots[2])?;
        Ok(Self {
            assignment,
            spins: dots.map(|d| grid.dot_index(d)),
            z_axis: z.label,
            n_axis: n.label,
        })
    }

    /// Frame for the qubit named like `X2Y5` (z axis, then n axis).
    pub fn by_name(grid: &GridSpec, name: &str) -> Result<Self> {
        let assignment = enumerate_qubit_assignments(grid)
            .into_iter()
            .find(|q| q.name(grid) == name)
            .ok_or_else(|| Error::InvalidFrame(format!("no live qubit named {name}")))?;
        Self::new(grid, assignment)
    }

    pub fn singlet_spins(&self) -> (usize, usize) {
        (self.spins[0], self.spins[1])
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.z_axis, self.n_axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalReadout {
    /// Bloch vector of the (sub-normalized) logical block; `|bloch| <= 1 - p_leak`.
    pub bloch: [f64; 3],
    pub p_leak: f64,
}

impl LogicalReadout {
    pub fn p_logical(&self) -> f64 {
        1.0 - self.p_leak
    }
}

/// Three-spin vectors indexed by local bits (bit 0 = a, bit 1 = b, bit 2 = c;
/// 0 = up).
pub(crate) type Vec8 = [Complex64; 8];

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn local(a: usize, b: usize, cc: usize) -> usize {
    a | (b << 1) | (cc << 2)
}

/// `[zero, one]` for gauge `m = +1/2` (index 0) and `m = -1/2` (index 1).
pub(crate) fn doublet_basis() -> [[Vec8; 2]; 2] {
    let s3 = (1.0f64 / 3.0).sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    let zero = c(0.0);
    let mut out = [[[zero; 8]; 2]; 2];
    for (gi, cbit) in [(0usize, 0usize), (1, 1)] {
        // singlet(a,b) x c
        out[gi][0][local(0, 1, cbit)] = c(FRAC_1_SQRT_2);
        out[gi][0][local(1, 0, cbit)] = c(-FRAC_1_SQRT_2);
    }
    // |1/2,+1/2> = sqrt(2/3) T+ dn - sqrt(1/3) T0 up
    out[0][1][local(0, 0, 1)] = c(s23);
    out[0][1][local(0, 1, 0)] = c(-s3 * FRAC_1_SQRT_2);
    out[0][1][local(1, 0, 0)] = c(-s3 * FRAC_1_SQRT_2);
    // |1/2,-1/2> = sqrt(1/3) T0 dn - sqrt(2/3) T- up
    out[1][1][local(0, 1, 1)] = c(s3 * FRAC_1_SQRT_2);
    out[1][1][local(1, 0, 1)] = c(s3 * FRAC_1_SQRT_2);
    out[1][1][local(1, 1, 0)] = c(-s23);

    // Fix the sign of |1> so <0|P_S(bc)|1> = -sqrt(3)/4.
    let p_bc = pair_singlet_projector(1, 2);
    let m = matrix_element(&out[0][0], &p_bc, &out[0][1]);
    if m.re > 0.0 {
        for g in &mut out {
            for x in g[1].iter_mut() {
                *x = -*x;
            }
        }
    }
    out
}

pub(crate) type Mat8 = [[Complex64; 8]; 8];

/// Singlet projector on two of the three local spins.
pub(crate) fn pair_singlet_projector(i: usize, j: usize) -> Mat8 {
    let mut p = [[c(0.0); 8]; 8];
    let (bi, bj) = (1usize << i, 1usize << j);
    for x in 0..8usize {
        if x & bi == 0 && x & bj != 0 {
            let y = x ^ bi ^ bj;
            p[x][x] = c(0.5);
            p[y][y] = c(0.5);
            p[x][y] = c(-0.5);
            p[y][x] = c(-0.5);
        }
    }
    p
}

pub(crate) fn matrix_element(u: &Vec8, m: &Mat8, v: &Vec8) -> Complex64 {
    let mut acc = c(0.0);
    for i in 0..8 {
        for j in 0..8 {
            acc += u[i].conj() * m[i][j] * v[j];
        }
    }
    acc
}

/// Projectors onto logical `|0>`, logical `|1>` (both gauges) and the quadruplet.
pub fn logical_projectors() -> [Mat8; 3] {
    let basis = doublet_basis();
    let mut p0 = [[c(0.0); 8]; 8];
    let mut p1 = [[c(0.0); 8]; 8];
    for g in &basis {
        for i in 0..8 {
            for j in 0..8 {
                p0[i][j] += g[0][i] * g[0][j].conj();
                p1[i][j] += g[1][i] * g[1][j].conj();
            }
        }
    }
    let mut q = [[c(0.0); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            q[i][j] = if i == j { c(1.0) } else { c(0.0) } - p0[i][j] - p1[i][j];
        }
    }
    [p0, p1, q]
}

/// Encoded `|0>` on the full register: singlet on `(a,b)`, other spins per `spec`.
pub fn encoded_zero(frame: &EncodedFrame, grid: &GridSpec, spec: &SpectatorSpec) -> Result<PureState> {
    for &s in &frame.spins {
        if !grid.is_dot_live(grid.dot_at(s)) {
            return Err(Error::InvalidFrame(format!("spin {s} sits on a dead dot")));
        }
    }
    prepare_state(grid.n_dots(), Some(frame.singlet_spins()), spec)
}

/// 2x2 logical block `rho[i][j]`, traced over gauge and all other spins.
fn logical_block(state: &PureState, spins: [usize; 3]) -> Result<[[Complex64; 2]; 2]> {
    let n = state.n_spins();
    if spins.iter().any(|&s| s >= n) || spins[0] == spins[1] || spins[1] == spins[2] || spins[0] == spins[2] {
        return Err(Error::InvalidFrame(format!("frame spins {spins:?} invalid for {n} spins")));
    }
    let basis = doublet_basis();
    let amps = state.amplitudes();
    let mask = spins.iter().fold(0usize, |m, s| m | (1 << s));
    let mut rho = [[c(0.0); 2]; 2];
    let mut loc = [c(0.0); 8];
    for rest in 0..amps.len() {
        if rest & mask != 0 {
            continue;
        }
        for (l, slot) in loc.iter_mut().enumerate() {
            let mut idx = rest;
            for (k, s) in spins.iter().enumerate() {
                if (l >> k) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            *slot = amps[idx];
        }
        for g in &basis {
            let c0: Complex64 = (0..8).map(|l| g[0][l].conj() * loc[l]).sum();
            let c1: Complex64 = (0..8).map(|l| g[1][l].conj() * loc[l]).sum();
            rho[0][0] += c0 * c0.conj();
            rho[0][1] += c0 * c1.conj();
            rho[1][0] += c1 * c0.conj();
            rho[1][1] += c1 * c1.conj();
        }
    }
    Ok(rho)
}

/// Logical Bloch vector and leakage of `state` in `frame`.
pub fn logical_bloch(state: &PureState, frame: &EncodedFrame) -> Result<LogicalReadout> {
    let rho = logical_block(state, frame.spins)?;
    let total: f64 = state.amplitudes().iter().map(|a| a.norm_sqr()).sum();
    let r01 = rho[0][1];
    let p_logical = rho[0][0].re + rho[1][1].re;
    Ok(LogicalReadout {
        bloch: [2.0 * r01.re, 2.0 * r01.im, rho[0][0].re - rho[1][1].re],
        p_leak: (total - p_logical).clamp(0.0, 1.0),
    })
}

/// Traceless logical Hamiltonian (Hz) for exchange `j_i_hz` on the z axis and
/// `j_j_hz` on the n axis, in the oriented logical frame:
/// `(J_i/2) sigma_z + (J_j/2) sigma_n`.
///
/// Computed by projecting `-J_i P_S(ab) - J_j P_S(bc)` onto the doublet and
/// mapping into the logical frame; not from the closed form.
pub fn effective_qubit_hamiltonian(j_i_hz: f64, j_j_hz: f64) -> Mat2 {
    projected_hamiltonian(j_i_hz, j_j_hz, 0)
}

/// Projection in a given gauge sector (0: m = +1/2, 1: m = -1/2).
pub(crate) fn projected_hamiltonian(j_i_hz: f64, j_j_hz: f64, gauge: usize) -> Mat2 {
    let basis = doublet_basis();
    let p_ab = pair_singlet_projector(0, 1);
    let p_bc = pair_singlet_projector(1, 2);
    let mut h = [[c(0.0); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            h[i][j] = -j_i_hz * p_ab[i][j] - j_j_hz * p_bc[i][j];
        }
    }
    let g = &basis[gauge];
    let mut m = [[c(0.0); 2]; 2];
    for (k, row) in m.iter_mut().enumerate() {
        for (l, x) in row.iter_mut().enumerate() {
            // logical frame: H' = -conj(M)
            *x = -matrix_element(&g[k], &h, &g[l]).conj();
        }
    }
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    m[0][0] -= half_tr;
    m[1][1] -= half_tr;
    m
}

/// `sigma_n = -(sqrt(3) sigma_x + sigma_z)/2`.
pub fn sigma_n() -> Mat2 {
    let s = 3f64.sqrt() / 2.0;
    [[c(-0.5), c(-s)], [c(-s), c(0.5)]]
}

/// Unit Bloch axis of `sigma_n`.
pub const N_AXIS: [f64; 3] = [-0.866_025_403_784_438_6, 0.0, -0.5];

/// Shortest sequence of calibrated swaps (pi pulses) that carries a singlet
/// on `from_pair` to the `(a, b)` pair of `to_frame`.
///
/// Breadth-first over singlet locations. Each move swaps one singlet member
/// with a neighbor; X axes are tried before Y, then by label number, so the
/// first shortest path found is the preferred one.
pub fn route_singlet(grid: &GridSpec, from_pair: (DotId, DotId), to_frame: &EncodedFrame) -> Result<PulseSeq> {
    let (a, b) = to_frame.assignment.singlet_pair();
    let target = sorted(a, b);
    route_where(grid, from_pair, |p| p == target)
}

/// Route that leaves exactly one singlet member on `axis`, so exchange on it
/// is observable at the start pair after the reverse route.
pub fn route_to_axis(grid: &GridSpec, from_pair: (DotId, DotId), axis: &ExchangeAxis) -> Result<PulseSeq> {
    if !grid.is_axis_live(axis) {
        return Err(Error::NoRoute(format!("axis {} is not live", axis.label)));
    }
    route_where(grid, from_pair, |(u, v)| axis.touches(u) != axis.touches(v))
}

fn sorted(u: DotId, v: DotId) -> (DotId, DotId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn route_where(
    grid: &GridSpec,
    from_pair: (DotId, DotId),
    goal: impl Fn((DotId, DotId)) -> bool,
) -> Result<PulseSeq> {
    let (u, v) = from_pair;
    if !grid.is_dot_live(u) || !grid.is_dot_live(v) {
        return Err(Error::NoRoute("start pair has a dead dot".into()));
    }
    if !grid.live_link(u, v) {
        return Err(Error::NoRoute(format!(
            "start pair {}-{} is not joined by a live axis",
            grid.dot_name(u),
            grid.dot_name(v)
        )));
    }
    let mut axes = grid.live_axes();
    axes.sort_by_key(|a| a.order_key());

    let start = sorted(u, v);
    let mut parent: Vec<((DotId, DotId), Option<(usize, usize)>)> = vec![(start, None)];
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        let pair = parent[node].0;
        if goal(pair) {
            let mut pulses = Vec::new();
            let mut cur = node;
            while let Some((prev, axis)) = parent[cur].1 {
                pulses.push(Pulse {
                    axis: axes[axis].label.clone(),
                    theta: PI,
                    t_pulse_s: 0.0,
                    t_idle_s: 0.0,
                });
                cur = prev;
            }
            pulses.reverse();
            return Ok(PulseSeq { pulses });
        }
        for (ai, ax) in axes.iter().enumerate() {
            let (p, q) = pair;
            let next = match (ax.touches(p), ax.touches(q)) {
                (true, false) => sorted(other_end(ax, p), q),
                (false, true) => sorted(p, other_end(ax, q)),
                _ => continue,
            };
            if seen.insert(next) {
                parent.push((next, Some((node, ai))));
                queue.push_back(parent.len() - 1);
            }
        }
    }
    Err(Error::NoRoute(format!(
        "no live path from {}-{}",
        grid.dot_name(u),
        grid.dot_name(v)
    )))
}

fn other_end(ax: &ExchangeAxis, d: DotId) -> DotId {
    if ax.a == d {
        ax.b
    } else {
        ax.a
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::lattice::enumerate_qubit_assignments;
    use crate::pulse_seq::apply_ideal;

    fn grid23() -> GridSpec {
        GridSpec::new(2, 3).unwrap()
    }

    fn frame_named(grid: &GridSpec, name: &str) -> EncodedFrame {
        enumerate_qubit_assignments(grid)
            .into_iter()
            .map(|q| EncodedFrame::new(grid, q).unwrap())
            .find(|f| f.name() == name)
            .unwrap_or_else(|| panic!("no frame {name}"))
    }

    fn p(grid: &GridSpec, name: &str) -> DotId {
        grid.dot_by_name(name).unwrap()
    }

    #[test]
    fn basis_is_orthonormal_and_complete() {
        let b = doublet_basis();
        let vs: Vec<&Vec8> = b.iter().flat_map(|g| g.iter()).collect();
        for (i, u) in vs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                let ip: Complex64 = (0..8).map(|k| u[k].conj() * v[k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip.re, expect, epsilon = 1e-14);
                assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-14);
            }
        }
        let [p0, p1, q] = logical_projectors();
        let tr: f64 = (0..8).map(|i| q[i][i].re).sum();
        assert_abs_diff_eq!(tr, 4.0, epsilon = 1e-12);
        for i in 0..8 {
            for j in 0..8 {
                let s = p0[i][j] + p1[i][j] + q[i][j];
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((s - Complex64::new(id, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_sectors_agree() {
        for (ji, jj) in [(1.0, 0.0), (0.0, 1.0), (0.3, 1.7)] {
            let a = projected_hamiltonian(ji, jj, 0);
            let b = projected_hamiltonian(ji, jj, 1);
            for k in 0..2 {
                for l in 0..2 {
                    assert!((a[k][l] - b[k][l]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_axes() {
        let j = 1e8;
        let hz = effective_qubit_hamiltonian(j, 0.0);
        assert!(hz[0][1].norm() < 1e-10 * j);
        assert_abs_diff_eq!(hz[0][0].re, j / 2.0, epsilon = 1e-6);
        let hn = effective_qubit_hamiltonian(0.0, j);
        let sn = sigma_n();
        for k in 0..2 {
            for l in 0..2 {
                assert!((hn[k][l] - sn[k][l] * (j / 2.0)).norm() < 1e-10 * j);
            }
        }
    }

    #[test]
    fn equal_exchange_splitting() {
        let j = 3.0e7;
        let h = effective_qubit_hamiltonian(j, j);
        // eigenvalues of traceless hermitian: +-sqrt(h00^2 + |h01|^2)
        let split = 2.0 * (h[0][0].re.powi(2) + h[0][1].norm_sqr()).sqrt();
        assert_abs_diff_eq!(split, j, epsilon = 1e-6);
    }

    #[test]
    fn encoded_zero_readout() {
        let g = grid23();
        for q in enumerate_qubit_assignments(&g) {
            let f = EncodedFrame::new(&g, q).unwrap();
            let s = encoded_zero(&f, &g, &SpectatorSpec::AllUp).unwrap();
            let r = logical_bloch(&s, &f).unwrap();
            assert_abs_diff_eq!(r.bloch[2], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.bloch[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.p_leak, 0.0, epsilon = 1e-12);
            let (a, b) = f.singlet_spins();
            assert_abs_diff_eq!(s.singlet_probability((a, b)).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                s.singlet_probability((a, f.spins[2])).unwrap(),
                0.25,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn z_pulse_keeps_zero_and_n_pi_reflects() {
        let g = grid23();
        let f = frame_named(&g, "X1X2");
        for theta in [0.3, 1.0, PI, 5.0] {
            let mut s = encoded_zero(&f, &g, &SpectatorSpec::AllUp).unwrap();
            s.apply_exchange(f.singlet_spins(), theta).unwrap();
            let r = logical_bloch(&s, &f).unwrap();
            assert_abs_diff_eq!(r.bloch[2], 1.0, epsilon = 1e-12);
        }
        let mut s = encoded_zero(&f, &g, &SpectatorSpec::AllUp).unwrap();
        s.apply_exchange((f.spins[1], f.spins[2]), PI).unwrap();
        let r = logical_bloch(&s, &f).unwrap();
        assert_abs_diff_eq!(r.bloch[0], 3f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bloch[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bloch[2], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_leak, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn n_rotation_is_right_handed() {
        // R_n(t) z for right-handed rotation about n
        let g = grid23();
        let f = frame_named(&g, "X2Y5");
        let t = 0.7;
        let mut s = encoded_zero(&f, &g, &SpectatorSpec::AllUp).unwrap();
        s.apply_exchange((f.spins[1], f.spins[2]), t).unwrap();
        let r = logical_bloch(&s, &f).unwrap();
        let n = N_AXIS;
        let v = [0.0, 0.0, 1.0];
        let dot = n[2];
        let cross = [n[1] * v[2] - n[2] * v[1], n[2] * v[0] - n[0] * v[2], n[0] * v[1] - n[1] * v[0]];
        for k in 0..3 {
            let expect = v[k] * t.cos() + cross[k] * t.sin() + n[k] * dot * (1.0 - t.cos());
            assert_abs_diff_eq!(r.bloch[k], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn frame_rejects_dead_axis() {
        let g = grid23().with_dead_axis("Y5").unwrap();
        let ok = grid23();
        let q = enumerate_qubit_assignments(&ok)
            .into_iter()
            .find(|q| EncodedFrame::new(&ok, *q).unwrap().name() == "X2Y5")
            .unwrap();
        assert!(matches!(EncodedFrame::new(&g, q), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn route_examples() {
        let g = grid23();
        let spam = (p(&g, "P2"), p(&g, "P3"));

        let here = frame_named(&g, "X2Y5");
        assert!(route_singlet(&g, spam, &here).unwrap().is_empty());

        // singlet (P2, P6): one swap on P3-P6
        let to_p6 = route_where(&g, spam, |x| x == sorted(p(&g, "P2"), p(&g, "P6"))).unwrap();
        assert_eq!(to_p6.len(), 1);
        assert_eq!(to_p6.pulses[0].axis, "Y6");
        assert_eq!(to_p6.pulses[0].theta, PI);

        let to_p1p2 = frame_named(&g, "X1Y4");
        let seq = route_singlet(&g, spam, &to_p1p2).unwrap();
        let axes: Vec<_> = seq.pulses.iter().map(|p| p.axis.as_str()).collect();
        assert_eq!(axes, ["X1", "X2"]);
    }

    #[test]
    fn route_moves_singlet() {
        let g = grid23();
        let spam = (p(&g, "P2"), p(&g, "P3"));
        let spam_idx = (g.dot_index(spam.0), g.dot_index(spam.1));
        for q in enumerate_qubit_assignments(&g) {
            let f = EncodedFrame::new(&g, q).unwrap();
            let seq = route_singlet(&g, spam, &f).unwrap();
            let mut s = prepare_state(6, Some(spam_idx), &SpectatorSpec::AllUp).unwrap();
            apply_ideal(&mut s, &g, &seq).unwrap();
            assert_abs_diff_eq!(s.singlet_probability(f.singlet_spins()).unwrap(), 1.0, epsilon = 1e-12);
            let r = logical_bloch(&s, &f).unwrap();
            assert_abs_diff_eq!(r.bloch[2], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_route_through_dead_region() {
        let g = GridSpec::new(1, 5).unwrap().with_dead_axis("X3").unwrap();
        let spam = (DotId::new(0, 0), DotId::new(0, 1));
        let ax = g.axis_by_label("X4").unwrap();
        assert!(matches!(route_to_axis(&g, spam, &ax), Err(Error::NoRoute(_))));
        let bad = (DotId::new(0, 0), DotId::new(0, 2));
        assert!(route_to_axis(&g, bad, &g.axis_by_label("X1").unwrap()).is_err());
    }

    #[test]
    fn route_to_axis_leaves_one_member() {
        let g = grid23();
        let spam = (p(&g, "P2"), p(&g, "P3"));
        for ax in g.axes() {
            let seq = route_to_axis(&g, spam, &ax).unwrap();
            if ax.label == "X2" {
                assert_eq!(seq.len(), 1);
            }
            if ["X1", "Y5", "Y6"].contains(&ax.label.as_str()) {
                assert!(seq.is_empty());
            }
        }
    }
}
