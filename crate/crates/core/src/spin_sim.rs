//! Exact state-vector dynamics for a register of spin-1/2 particles.
//!
//! Basis convention: bit `k` of an amplitude index is spin `k`, with 0 = up
//! and 1 = down. Spin `k` is the dot with row-major index `k`.
//!
//! Frequencies are in Hz and a Zeeman term for spin `k` is `f_k * sigma_z / 2`
//! (up has energy `+f_k/2`). Exchange with strength `J` contributes `-J * P_S`
//! on the pair, so evolution for time `t` multiplies the pair singlet by
//! `exp(i 2 pi J t)` and leaves the triplets alone. A pulse of angle `pi` is
//! exactly SWAP.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SPINS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_spins: usize,
    amps: Vec<Complex64>,
}

/// Single-spin state `alpha |up> + beta |down>`.
pub type SpinState = [Complex64; 2];

pub const SPIN_UP: SpinState = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
pub const SPIN_DOWN: SpinState = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

#[derive(Debug, Clone, PartialEq)]
pub enum SpectatorSpec {
    AllUp,
    /// One entry per spin; entries on the singlet pair are ignored.
    ProductList(Vec<SpinState>),
    /// Haar-random single-spin states drawn from `seed`.
    SampledRandomProduct(u64),
}

/// Quasi-static noise for one shot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    /// Per-spin Larmor offset in Hz. Missing entries are zero.
    pub delta_bz_hz: Vec<f64>,
    /// Per-axis multiplicative exchange factor. Missing entries are one.
    pub j_scale: Vec<f64>,
}

impl NoiseSample {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn delta(&self, spin: usize) -> f64 {
        self.delta_bz_hz.get(spin).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, axis: usize) -> f64 {
        self.j_scale.get(axis).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub b_uniform_hz: f64,
    pub noise: NoiseSample,
}

impl FieldSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn larmor(&self, spin: usize) -> f64 {
        self.b_uniform_hz + self.noise.delta(spin)
    }

    pub fn is_zero(&self) -> bool {
        self.b_uniform_hz == 0.0 && self.noise.delta_bz_hz.iter().all(|d| *d == 0.0)
    }
}

/// Exchange switched on for one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveExchange {
    pub pair: (usize, usize),
    pub j_hz: f64,
    /// Axis index for looking up `j_scale`; `None` means unscaled.
    pub axis: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureOutcome {
    Singlet,
    Triplet,
}

impl PureState {
    fn check_n(n_spins: usize) -> Result<()> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidSpin(format!(
                "register size {n_spins} outside 1..={MAX_SPINS}"
            )));
        }
        Ok(())
    }

    /// Product state from per-spin states.
    pub fn product(spins: &[SpinState]) -> Result<Self> {
        Self::check_n(spins.len())?;
        let n = spins.len();
        let mut amps = vec![Complex64::new(1.0, 0.0); 1 << n];
        for (idx, a) in amps.iter_mut().enumerate() {
            for (k, s) in spins.iter().enumerate() {
                *a *= s[(idx >> k) & 1];
            }
        }
        let mut st = Self { n_spins: n, amps };
        st.normalize();
        Ok(st)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::InvalidSpin("amplitude count is not a power of two".into()));
        }
        Self::check_n(n)?;
        let mut st = Self { n_spins: n, amps };
        st.normalize();
        Ok(st)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Expectation of total S_z (in units of hbar).
    pub fn total_sz(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let downs = idx.count_ones() as f64;
                a.norm_sqr() * (self.n_spins as f64 / 2.0 - downs)
            })
            .sum()
    }

    pub(crate) fn check_pair(&self, pair: (usize, usize)) -> Result<()> {
        let (i, j) = pair;
        if i == j {
            return Err(Error::InvalidSpin(format!("pair ({i},{j}) is not distinct")));
        }
        if i >= self.n_spins || j >= self.n_spins {
            return Err(Error::InvalidSpin(format!(
                "pair ({i},{j}) out of range for {} spins",
                self.n_spins
            )));
        }
        Ok(())
    }

    /// Visits each (up-down, down-up) index pair for spins `i`, `j`:
    /// the first index has spin `i` up and spin `j` down.
    fn for_each_flip_pair(&mut self, pair: (usize, usize), mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let (i, j) = pair;
        let (bi, bj) = (1usize << i, 1usize << j);
        for idx in 0..self.amps.len() {
            if idx & bi == 0 && idx & bj != 0 {
                let other = idx ^ bi ^ bj;
                let (lo, hi) = if idx < other { (idx, other) } else { (other, idx) };
                let (left, right) = self.amps.split_at_mut(hi);
                let (ud, du) = if idx == lo {
                    (&mut left[lo], &mut right[0])
                } else {
                    (&mut right[0], &mut left[lo])
                };
                f(ud, du);
            }
        }
    }

    /// Exchange pulse of angle `theta`: pair singlet gains `exp(i theta)`.
    pub fn apply_exchange(&mut self, pair: (usize, usize), theta: f64) -> Result<()> {
        self.check_pair(pair)?;
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite exchange angle {theta}")));
        }
        let k = Complex64::from_polar(1.0, theta) - 1.0;
        self.for_each_flip_pair(pair, |ud, du| {
            let s = (*ud - *du) * 0.5 * k;
            *ud += s;
            *du -= s;
        });
        Ok(())
    }

    /// Exact evolution for `duration_s` under Zeeman fields and at most one
    /// active exchange axis.
    pub fn evolve_segment(
        &mut self,
        active: &[ActiveExchange],
        duration_s: f64,
        fields: &FieldSpec,
    ) -> Result<()> {
        if active.len() > 1 {
            return Err(Error::MultipleActiveAxes);
        }
        if !(duration_s >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative duration {duration_s}")));
        }
        if duration_s == 0.0 {
            return Ok(());
        }
        let active = active.first().copied();
        if let Some(ax) = active {
            self.check_pair(ax.pair)?;
        }
        let (pi_, pj_) = active.map_or((usize::MAX, usize::MAX), |a| a.pair);
        let omega = 2.0 * PI * duration_s;

        // Zeeman phases for every spin outside the active pair.
        if !fields.is_zero() {
            let freqs: Vec<f64> = (0..self.n_spins)
                .map(|k| {
                    if k == pi_ || k == pj_ {
                        0.0
                    } else {
                        fields.larmor(k)
                    }
                })
                .collect();
            if freqs.iter().any(|f| *f != 0.0) {
                for (idx, a) in self.amps.iter_mut().enumerate() {
                    let mut e = 0.0;
                    for (k, f) in freqs.iter().enumerate() {
                        e += if (idx >> k) & 1 == 0 { 0.5 * f } else { -0.5 * f };
                    }
                    *a *= Complex64::from_polar(1.0, -omega * e);
                }
            }
        }

        let Some(ax) = active else {
            return Ok(());
        };
        let (i, j) = ax.pair;
        let j_eff = ax.j_hz * ax.axis.map_or(1.0, |a| fields.noise.scale(a));
        let (fa, fb) = (fields.larmor(i), fields.larmor(j));

        // |uu>, |dd> pick up Zeeman phases only.
        let (bi, bj) = (1usize << i, 1usize << j);
        let ph_uu = Complex64::from_polar(1.0, -omega * 0.5 * (fa + fb));
        let ph_dd = ph_uu.conj();
        for (idx, a) in self.amps.iter_mut().enumerate() {
            match (idx & bi != 0, idx & bj != 0) {
                (false, false) => *a *= ph_uu,
                (true, true) => *a *= ph_dd,
                _ => {}
            }
        }

        // (ud, du) block: -J/2 I + (J/2) sx + (dz/2) sz with dz = fa - fb.
        let hx = 0.5 * j_eff;
        let hz = 0.5 * (fa - fb);
        let hn = hx.hypot(hz);
        let global = Complex64::from_polar(1.0, omega * 0.5 * j_eff);
        let (c, s) = ((omega * hn).cos(), (omega * hn).sin());
        let (nx, nz) = if hn > 0.0 { (hx / hn, hz / hn) } else { (0.0, 0.0) };
        let i_ = Complex64::i();
        let u00 = global * (c - i_ * s * nz);
        let u11 = global * (c + i_ * s * nz);
        let u01 = global * (-i_ * s * nx);
        self.for_each_flip_pair(ax.pair, |ud, du| {
            let (x, y) = (*ud, *du);
            *ud = u00 * x + u01 * y;
            *du = u01 * x + u11 * y;
        });
        Ok(())
    }

    /// Probability that `pair` is in its singlet.
    pub fn singlet_probability(&self, pair: (usize, usize)) -> Result<f64> {
        self.check_pair(pair)?;
        let (bi, bj) = (1usize << pair.0, 1usize << pair.1);
        let mut p = 0.0;
        for idx in 0..self.amps.len() {
            if idx & bi == 0 && idx & bj != 0 {
                let other = idx ^ bi ^ bj;
                p += 0.5 * (self.amps[idx] - self.amps[other]).norm_sqr();
            }
        }
        Ok(p)
    }

    /// Projective singlet/triplet measurement with collapse.
    pub fn measure_singlet<R: Rng>(&mut self, pair: (usize, usize), rng: &mut R) -> Result<MeasureOutcome> {
        let p = self.singlet_probability(pair)?;
        let singlet = rng.random::<f64>() < p;
        self.for_each_flip_pair(pair, |ud, du| {
            let s = (*ud - *du) * 0.5;
            if singlet {
                *ud = s;
                *du = -s;
            } else {
                *ud -= s;
                *du += s;
            }
        });
        if singlet {
            // Components with the pair aligned have no singlet weight.
            let (bi, bj) = (1usize << pair.0, 1usize << pair.1);
            for (idx, a) in self.amps.iter_mut().enumerate() {
                if (idx & bi == 0) == (idx & bj == 0) {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.normalize();
        Ok(if singlet {
            MeasureOutcome::Singlet
        } else {
            MeasureOutcome::Triplet
        })
    }
}

fn haar_spin<R: Rng>(rng: &mut R) -> SpinState {
    // Uniform on the Bloch sphere.
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let theta = z.acos();
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Register with a singlet on `singlet_pair` (if any) and spectators per `spec`.
pub fn prepare_state(
    n_spins: usize,
    singlet_pair: Option<(usize, usize)>,
    spec: &SpectatorSpec,
) -> Result<PureState> {
    PureState::check_n(n_spins)?;
    let spectators: Vec<SpinState> = match spec {
        SpectatorSpec::AllUp => vec![SPIN_UP; n_spins],
        SpectatorSpec::ProductList(list) => {
            if list.len() != n_spins {
                return Err(Error::InvalidSpin(format!(
                    "product list has {} entries for {n_spins} spins",
                    list.len()
                )));
            }
            list.clone()
        }
        SpectatorSpec::SampledRandomProduct(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n_spins).map(|_| haar_spin(&mut rng)).collect()
        }
    };
    let Some((i, j)) = singlet_pair else {
        return PureState::product(&spectators);
    };
    let probe = PureState {
        n_spins,
        amps: Vec::new(),
    };
    probe.check_pair((i, j))?;

    let (bi, bj) = (1usize << i, 1usize << j);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
    for (idx, a) in amps.iter_mut().enumerate() {
        let pair_amp = match (idx & bi != 0, idx & bj != 0) {
            (false, true) => FRAC_1_SQRT_2,
            (true, false) => -FRAC_1_SQRT_2,
            _ => continue,
        };
        let mut v = Complex64::new(pair_amp, 0.0);
        for (k, s) in spectators.iter().enumerate() {
            if k != i && k != j {
                v *= s[(idx >> k) & 1];
            }
        }
        *a = v;
    }
    PureState::from_amplitudes(amps)
}
