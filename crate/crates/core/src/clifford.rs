//! Single-qubit Clifford group and its compilation onto the two exchange
//! rotation axes `z` and `n = -(sqrt 3, 0, 1)/2`.
//!
//! Rotations are unit quaternions `[w, x, y, z]`; global phase is ignored, so
//! `q` and `-q` are the same element.
//!
//! Each element is decomposed into at most four alternating rotations. The
//! search runs over lengths 1..=4 and both starting axes. Lengths up to three
//! use a closed-form solve for `R_a(t3) R_b(t2) R_a(t1)`. Length four sweeps the
//! first angle to the smallest feasible value and then solves the remaining
//! three. The table keeps the fewest pulses, then the lexicographically
//! smallest angle tuple (compared at 1e-12).

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodedFrame, N_AXIS};
use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::pulse_seq::{wrap_angle, Pulse, PulseSeq};

pub type Quat = [f64; 4];

pub const GROUP_ORDER: usize = 24;

pub fn quat_mul(p: &Quat, q: &Quat) -> Quat {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

pub fn quat_conj(q: &Quat) -> Quat {
    [q[0], -q[1], -q[2], -q[3]]
}

/// Right-handed rotation by `angle` about unit `axis`.
pub fn rotation(axis: [f64; 3], angle: f64) -> Quat {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (s, c) = (angle / 2.0).sin_cos();
    [c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n]
}

/// `(|<p, q>|)^2`, which is `(|tr(U_p^dag U_q)|/2)^2`.
pub fn trace_fidelity(p: &Quat, q: &Quat) -> f64 {
    let d: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    d * d
}

pub fn rotate_vector(q: &Quat, v: [f64; 3]) -> [f64; 3] {
    let p = [0.0, v[0], v[1], v[2]];
    let r = quat_mul(&quat_mul(q, &p), &quat_conj(q));
    [r[1], r[2], r[3]]
}

fn canonical(mut q: Quat) -> Quat {
    let lead = q.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
    if lead < 0.0 {
        for x in &mut q {
            *x = -*x;
        }
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisRole {
    Z,
    N,
}

impl AxisRole {
    pub fn bloch_axis(self) -> [f64; 3] {
        match self {
            AxisRole::Z => [0.0, 0.0, 1.0],
            AxisRole::N => N_AXIS,
        }
    }

    fn other(self) -> Self {
        match self {
            AxisRole::Z => AxisRole::N,
            AxisRole::N => AxisRole::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAnglePulse {
    pub axis_role: AxisRole,
    /// Radians in `[0, 2 pi)`.
    pub angle: f64,
}

impl AxisAnglePulse {
    pub fn rotation(&self) -> Quat {
        rotation(self.axis_role.bloch_axis(), self.angle)
    }
}

/// Composed rotation of pulses applied in order.
pub fn compose_pulses(pulses: &[AxisAnglePulse]) -> Quat {
    pulses
        .iter()
        .fold([1.0, 0.0, 0.0, 0.0], |acc, p| quat_mul(&p.rotation(), &acc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordElement {
    pub index: usize,
    pub name: String,
    pub rotation: Quat,
}

#[derive(Debug, Clone)]
pub struct CliffordTable {
    elements: Vec<CliffordElement>,
    /// `products[a][b]` is `a` applied after `b`.
    products: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    decompositions: Vec<Vec<AxisAnglePulse>>,
}

fn build_elements() -> Vec<CliffordElement> {
    let s = FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    let mut raw: Vec<(String, Quat)> = vec![("I".into(), [1.0, 0.0, 0.0, 0.0])];
    for (name, axis) in [("X", [1.0, 0.0, 0.0]), ("Y", [0.0, 1.0, 0.0]), ("Z", [0.0, 0.0, 1.0])] {
        raw.push((name.into(), rotation(axis, PI)));
    }
    for (name, axis, angle) in [
        ("X/2", [1.0, 0.0, 0.0], PI / 2.0),
        ("-X/2", [1.0, 0.0, 0.0], -PI / 2.0),
        ("Y/2", [0.0, 1.0, 0.0], PI / 2.0),
        ("-Y/2", [0.0, 1.0, 0.0], -PI / 2.0),
        ("S", [0.0, 0.0, 1.0], PI / 2.0),
        ("Sdg", [0.0, 0.0, 1.0], -PI / 2.0),
    ] {
        raw.push((name.into(), rotation(axis, angle)));
    }
    for (name, axis) in [
        ("H", [s, 0.0, s]),
        ("H_x-z", [s, 0.0, -s]),
        ("H_xy", [s, s, 0.0]),
        ("H_x-y", [s, -s, 0.0]),
        ("H_yz", [0.0, s, s]),
        ("H_y-z", [0.0, s, -s]),
    ] {
        raw.push((name.into(), rotation(axis, PI)));
    }
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let sign = |v: f64| if v > 0.0 { '+' } else { '-' };
                let name = format!("C3({}{}{})", sign(sx), sign(sy), sign(sz));
                raw.push((name, rotation([sx * t, sy * t, sz * t], 2.0 * PI / 3.0)));
            }
        }
    }
    raw.into_iter()
        .enumerate()
        .map(|(index, (name, q))| CliffordElement {
            index,
            name,
            rotation: canonical(q),
        })
        .collect()
}

impl CliffordTable {
    fn build() -> Self {
        let elements = build_elements();
        let find = |q: &Quat| -> usize {
            elements
                .iter()
                .position(|e| trace_fidelity(&e.rotation, q) > 1.0 - 1e-9)
                .expect("clifford table is closed")
        };
        let products: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| {
                elements
                    .iter()
                    .map(|b| find(&quat_mul(&a.rotation, &b.rotation)))
                    .collect()
            })
            .collect();
        let inverses = elements.iter().map(|e| find(&quat_conj(&e.rotation))).collect();
        let decompositions = elements.iter().map(|e| decompose_rotation(&e.rotation)).collect();
        Self {
            elements,
            products,
            inverses,
            decompositions,
        }
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of `a` applied after `b`.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.products[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// Looks up a rotation in the table, up to global phase.
    pub fn find(&self, q: &Quat) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| trace_fidelity(&e.rotation, q) > 1.0 - 1e-9)
    }

    pub fn by_name(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    pub fn decomposition(&self, index: usize) -> &[AxisAnglePulse] {
        &self.decompositions[index]
    }

    pub fn mean_pulses(&self) -> f64 {
        self.decompositions.iter().map(Vec::len).sum::<usize>() as f64 / self.len() as f64
    }

    /// Element name -> axis/angle list, for audit export.
    pub fn export(&self) -> Vec<DecompositionEntry> {
        self.elements
            .iter()
            .map(|e| DecompositionEntry {
                index: e.index,
                name: e.name.clone(),
                pulses: self.decompositions[e.index].clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub index: usize,
    pub name: String,
    pub pulses: Vec<AxisAnglePulse>,
}

/// The shared table, built on first use.
pub fn clifford_group() -> &'static CliffordTable {
    static TABLE: OnceLock<CliffordTable> = OnceLock::new();
    TABLE.get_or_init(CliffordTable::build)
}

pub fn decompose_clifford(index: usize) -> &'static [AxisAnglePulse] {
    clifford_group().decomposition(index)
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

const MATCH_FIDELITY: f64 = 1.0 - 1e-12;
const ZERO_ANGLE: f64 = 1e-9;

fn is_zero_angle(t: f64) -> bool {
    let w = wrap_angle(t);
    w < ZERO_ANGLE || TAU - w < ZERO_ANGLE
}

/// Solutions `[t1, t2, t3]` of `R = R_a(t3) R_b(t2) R_a(t1)` for unit axes.
fn solve_aba(target: &Quat, a: [f64; 3], b: [f64; 3]) -> Vec<[f64; 3]> {
    let av = v3(a);
    let ra = v3(rotate_vector(target, a));
    let cab = av.dot(&v3(b));
    let g = (av.dot(&ra) - cab * cab) / (1.0 - cab * cab);
    if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&g) {
        return Vec::new();
    }
    let base = g.clamp(-1.0, 1.0).acos();
    let mut t2s = vec![base];
    if (TAU - base - base).abs() > 1e-12 {
        t2s.push(TAU - base);
    }
    let mut out = Vec::new();
    for t2 in t2s {
        let v = v3(rotate_vector(&rotation(b, t2), a));
        let vp = v - av * av.dot(&v);
        let wp = ra - av * av.dot(&ra);
        let t3 = if vp.norm() < 1e-12 || wp.norm() < 1e-12 {
            0.0
        } else {
            av.dot(&vp.cross(&wp)).atan2(vp.dot(&wp))
        };
        // Q = R_b(t2)^-1 R_a(t3)^-1 R should be a rotation about a.
        let q = quat_mul(
            &quat_conj(&rotation(b, t2)),
            &quat_mul(&quat_conj(&rotation(a, t3)), target),
        );
        let t1 = 2.0 * (q[1] * a[0] + q[2] * a[1] + q[3] * a[2]).atan2(q[0]);
        let sol = [wrap_angle(t1), wrap_angle(t2), wrap_angle(t3)];
        let check = quat_mul(&rotation(a, sol[2]), &quat_mul(&rotation(b, sol[1]), &rotation(a, sol[0])));
        if trace_fidelity(&check, target) > 1.0 - 1e-9 {
            out.push(sol);
        }
    }
    out
}

fn pulses_from(first: AxisRole, angles: &[f64]) -> Vec<AxisAnglePulse> {
    let mut role = first;
    angles
        .iter()
        .map(|&angle| {
            let p = AxisAnglePulse {
                axis_role: role,
                angle: wrap_angle(angle),
            };
            role = role.other();
            p
        })
        .collect()
}

/// Residual: vector part of `target^-1 * product`, sign-fixed.
fn residual(target: &Quat, pulses: &[AxisAnglePulse]) -> Vector3<f64> {
    let e = quat_mul(&quat_conj(target), &compose_pulses(pulses));
    let s = if e[0] < 0.0 { -1.0 } else { 1.0 };
    Vector3::new(s * e[1], s * e[2], s * e[3])
}

/// Gauss-Newton (minimum-norm steps) on all angles.
fn polish(target: &Quat, pulses: &mut [AxisAnglePulse]) {
    let h = 1e-7;
    for _ in 0..20 {
        let r = residual(target, pulses);
        if r.norm() < 1e-16 {
            break;
        }
        let k = pulses.len();
        let mut jac = nalgebra::DMatrix::<f64>::zeros(3, k);
        for i in 0..k {
            let mut plus = pulses.to_vec();
            plus[i].angle += h;
            let mut minus = pulses.to_vec();
            minus[i].angle -= h;
            let d = (residual(target, &plus) - residual(target, &minus)) / (2.0 * h);
            jac.set_column(i, &d);
        }
        let jjt: Matrix3<f64> = (&jac * jac.transpose()).fixed_view::<3, 3>(0, 0).into();
        let Some(inv) = jjt.try_inverse() else {
            break;
        };
        let step = jac.transpose() * (inv * r);
        for (p, d) in pulses.iter_mut().zip(step.iter()) {
            p.angle -= d;
        }
    }
    for p in pulses.iter_mut() {
        p.angle = wrap_angle(p.angle);
    }
}

fn lex_key(pulses: &[AxisAnglePulse]) -> Vec<i64> {
    pulses.iter().map(|p| (p.angle * 1e12).round() as i64).collect()
}

fn accept(target: &Quat, pulses: &[AxisAnglePulse]) -> bool {
    pulses.iter().all(|p| !is_zero_angle(p.angle))
        && trace_fidelity(&compose_pulses(pulses), target) > MATCH_FIDELITY
}

fn candidates_up_to_three(target: &Quat, len: usize) -> Vec<Vec<AxisAnglePulse>> {
    let mut out = Vec::new();
    for first in [AxisRole::Z, AxisRole::N] {
        let (a, b) = (first.bloch_axis(), first.other().bloch_axis());
        match len {
            1 => {
                let axis = v3(a);
                let v = Vector3::new(target[1], target[2], target[3]);
                if v.cross(&axis).norm() < 1e-12 {
                    let angle = 2.0 * v.dot(&axis).atan2(target[0]);
                    out.push(pulses_from(first, &[angle]));
                }
            }
            2 => {
                // R = R_b(t2) R_a(t1) as (b, a, b) with a zero first angle,
                // or (a, b, a) with a zero last angle.
                for s in solve_aba(target, b, a) {
                    if is_zero_angle(s[0]) {
                        out.push(pulses_from(first, &[s[1], s[2]]));
                    }
                }
                for s in solve_aba(target, a, b) {
                    if is_zero_angle(s[2]) {
                        out.push(pulses_from(first, &[s[0], s[1]]));
                    }
                }
            }
            3 => {
                for s in solve_aba(target, a, b) {
                    out.push(pulses_from(first, &s));
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Four pulses starting on `first`: smallest feasible first angle, then the
/// three-pulse solve of the remainder.
fn candidates_four(target: &Quat, first: AxisRole) -> Vec<Vec<AxisAnglePulse>> {
    let (a, b) = (first.bloch_axis(), first.other().bloch_axis());
    let cab = v3(a).dot(&v3(b));
    let feasibility = |t1: f64| -> f64 {
        let rest = quat_mul(target, &quat_conj(&rotation(a, t1)));
        let bv = v3(b);
        let g = (bv.dot(&v3(rotate_vector(&rest, b))) - cab * cab) / (1.0 - cab * cab);
        g + 1.0
    };
    const STEPS: usize = 1 << 14;
    let mut t1 = None;
    if feasibility(0.0) >= 0.0 {
        t1 = Some(0.0);
    } else {
        let mut prev = 0.0;
        for k in 1..STEPS {
            let t = TAU * k as f64 / STEPS as f64;
            if feasibility(t) >= 0.0 {
                let (mut lo, mut hi) = (prev, t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if feasibility(mid) >= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                t1 = Some(hi);
                break;
            }
            prev = t;
        }
    }
    let Some(t1) = t1 else {
        return Vec::new();
    };
    let rest = quat_mul(target, &quat_conj(&rotation(a, t1)));
    solve_aba(&rest, b, a)
        .into_iter()
        .map(|s| pulses_from(first, &[t1, s[0], s[1], s[2]]))
        .collect()
}

/// Fewest alternating z/n pulses reproducing `target` up to global phase.
pub fn decompose_rotation(target: &Quat) -> Vec<AxisAnglePulse> {
    if trace_fidelity(target, &[1.0, 0.0, 0.0, 0.0]) > MATCH_FIDELITY {
        return Vec::new();
    }
    for len in 1..=4 {
        let raw = if len <= 3 {
            candidates_up_to_three(target, len)
        } else {
            let mut v = candidates_four(target, AxisRole::Z);
            v.extend(candidates_four(target, AxisRole::N));
            v
        };
        let mut best: Option<Vec<AxisAnglePulse>> = None;
        for mut cand in raw {
            polish(target, &mut cand);
            if !accept(target, &cand) {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    let (kc, kb) = (lex_key(&cand), lex_key(b));
                    kc < kb || (kc == kb && cand[0].axis_role < b[0].axis_role)
                }
            };
            if better {
                best = Some(cand);
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    unreachable!("two axes 120 degrees apart reach every rotation in four pulses")
}

/// Concatenated decompositions mapped onto the frame's exchange axes: `z`
/// onto the singlet-pair axis, `n` onto the gauge axis. Each pulse is
/// followed by `t_idle_s`.
pub fn compile_sequence(
    grid: &GridSpec,
    frame: &EncodedFrame,
    cliffords: &[usize],
    t_pulse_s: f64,
    t_idle_s: f64,
) -> Result<PulseSeq> {
    if !(t_pulse_s > 0.0) || !(t_idle_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "timings must be positive (t_pulse {t_pulse_s}, t_idle {t_idle_s})"
        )));
    }
    for label in [&frame.z_axis, &frame.n_axis] {
        let live = grid.axis_by_label(label).is_some_and(|a| grid.is_axis_live(&a));
        if !live {
            return Err(Error::InvalidFrame(format!("frame axis {label} is dead")));
        }
    }
    let table = clifford_group();
    let mut seq = PulseSeq::new();
    for &c in cliffords {
        if c >= table.len() {
            return Err(Error::InvalidArgument(format!("clifford index {c} out of range")));
        }
        for p in table.decomposition(c) {
            let axis = match p.axis_role {
                AxisRole::Z => frame.z_axis.clone(),
                AxisRole::N => frame.n_axis.clone(),
            };
            seq.push(Pulse {
                axis,
                theta: p.angle,
                t_pulse_s,
                t_idle_s,
            });
        }
    }
    Ok(seq)
}
