//! Brute-force reference: the full spin-boson Hamiltonian on a truncated
//! Fock space, and a small master-equation solver for dephasing.

mod exact;
mod fock;
mod lindblad;
mod rk45;

pub use exact::{evolve_exact, evolve_exact_auto, evolve_exact_with, evolve_state, OracleOptions, OracleReport, MAX_EXACT_IONS};
pub use lindblad::{evolve_lindblad, evolve_lindblad_with, DephasingWindow, LindbladOptions, LindbladReport, MAX_LINDBLAD_IONS};

use crate::error::{invalid, Result};
use crate::types::PulseSchedule;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Weights over initial Fock states.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    /// discarded geometric tail
    pub const TAIL: f64 = 1e-10;

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return invalid(format!("nbar must be >= 0, got {nbar}"));
        }
        if nbar == 0.0 {
            return Ok(Self { weights: vec![1.0] });
        }
        let r = nbar / (nbar + 1.0);
        // tail mass beyond n_max is r^(n_max + 1)
        let n_max = ((Self::TAIL.ln() / r.ln()).ceil() as usize).saturating_sub(1);
        let mut w: Vec<f64> = (0..=n_max).map(|n| (1.0 - r) * r.powi(n as i32)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        Ok(Self { weights: w })
    }

    pub fn fock(n: usize) -> Self {
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        Self { weights: w }
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum()
    }
}

/// Pure state on (Dicke ladder) × (Fock space): row k is m_z = k − N/2.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeBosonState {
    pub n_ions: u32,
    pub n_cut: usize,
    pub amplitudes: DMatrix<Complex64>,
}

impl DickeBosonState {
    /// All spins along +x, oscillator in Fock state `n`.
    pub fn coherent_x(n_ions: u32, n_cut: usize, n: usize) -> Result<Self> {
        if n + 2 >= n_cut {
            return invalid(format!("Fock state {n} does not fit below cutoff {n_cut}"));
        }
        let c = css_amplitudes(n_ions);
        let mut a = DMatrix::zeros(n_ions as usize + 1, n_cut);
        for (k, ck) in c.iter().enumerate() {
            a[(k, n)] = Complex64::new(*ck, 0.0);
        }
        Ok(Self { n_ions, n_cut, amplitudes: a })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Population in the two highest Fock levels.
    pub fn leakage(&self) -> f64 {
        let n = self.n_cut;
        self.amplitudes.columns(n - 2, 2).norm_squared()
    }

    /// (⟨J_x⟩, ⟨J_y⟩, ⟨J_y²⟩)
    pub fn spin_expectations(&self) -> (f64, f64, f64) {
        let rho = &self.amplitudes * self.amplitudes.adjoint();
        let ops = DickeOps::new(self.n_ions);
        (expect(&rho, &ops.jx), expect(&rho, &ops.jy), expect(&rho, &ops.jy2))
    }
}

/// √C(N, k) / 2^{N/2}
pub(crate) fn css_amplitudes(n_ions: u32) -> Vec<f64> {
    let n = n_ions as usize;
    let mut ln_binom = vec![0.0f64; n + 1];
    for k in 1..=n {
        ln_binom[k] = ln_binom[k - 1] + ((n - k + 1) as f64).ln() - (k as f64).ln();
    }
    ln_binom.iter().map(|&l| (0.5 * l - 0.5 * n as f64 * std::f64::consts::LN_2).exp()).collect()
}

pub(crate) struct DickeOps {
    pub jx: DMatrix<Complex64>,
    pub jy: DMatrix<Complex64>,
    pub jy2: DMatrix<Complex64>,
    /// (J₊J₋ + J₋J₊)/2
    pub transverse: DMatrix<Complex64>,
}

impl DickeOps {
    pub fn new(n_ions: u32) -> Self {
        let d = n_ions as usize + 1;
        let j = n_ions as f64 / 2.0;
        let mut jp = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d - 1 {
            let m = k as f64 - j;
            jp[(k + 1, k)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        spin_ops_from_raising(jp)
    }
}

pub(crate) fn spin_ops_from_raising(jp: DMatrix<Complex64>) -> DickeOps {
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let jy2 = &jy * &jy;
    let transverse = (&jp * &jm + &jm * &jp) * Complex64::new(0.5, 0.0);
    DickeOps { jx, jy, jy2, transverse }
}

/// Re tr(ρ O)
pub(crate) fn expect(rho: &DMatrix<Complex64>, op: &DMatrix<Complex64>) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc.re
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Evolve { duration: f64, g: f64, eta: f64 },
    Kick { beta: f64 },
}

impl Op {
    pub fn drive_dependent(&self) -> bool {
        match *self {
            Op::Evolve { eta, .. } => eta != 0.0,
            Op::Kick { beta } => beta != 0.0,
        }
    }
}

/// Time-ordered sequence of evolutions and kicks; segments are split at kicks.
pub(crate) fn timeline(s: &PulseSchedule) -> Vec<Op> {
    let mut kicks = s.kicks.clone();
    kicks.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut next = 0;
    let mut ops = Vec::new();
    let mut start = 0.0;
    for seg in &s.segments {
        let end = start + seg.duration;
        let mut cur = start;
        while next < kicks.len() && kicks[next].time < end {
            let t = kicks[next].time.max(cur);
            if t > cur {
                ops.push(Op::Evolve { duration: t - cur, g: seg.g, eta: seg.eta });
            }
            ops.push(Op::Kick { beta: kicks[next].beta });
            cur = t;
            next += 1;
        }
        if end > cur {
            ops.push(Op::Evolve { duration: end - cur, g: seg.g, eta: seg.eta });
        }
        start = end;
    }
    for k in &kicks[next..] {
        ops.push(Op::Kick { beta: k.beta });
    }
    ops
}

/// Largest coherent amplitude any Dicke block reaches, with drives scaled by `drive`.
pub(crate) fn max_displacement(s: &PulseSchedule, delta: f64, n_ions: u32, drive: f64) -> f64 {
    let half = (n_ions as f64).sqrt() / 2.0;
    let mut h = Complex64::new(0.0, 0.0);
    let mut hmax = 0.0f64;
    let mut start = 0.0;
    for seg in &s.segments {
        for i in 1..=16 {
            let t = seg.duration * i as f64 / 16.0;
            let part = Complex64::from_polar(t * crate::numerics::sinc(0.5 * delta * t), -delta * (start + 0.5 * t));
            hmax = hmax.max((h + seg.g * part).norm());
        }
        h += seg.g * Complex64::from_polar(seg.duration * crate::numerics::sinc(0.5 * delta * seg.duration), -delta * (start + 0.5 * seg.duration));
        start += seg.duration;
    }
    let drives: f64 = s.kicks.iter().map(|k| k.beta.abs()).sum::<f64>()
        + s.segments.iter().map(|x| (x.eta * x.duration).abs()).sum::<f64>();
    half * hmax + drive * drives
}

/// Fock cutoff: the rule ceil(8(n̄+1) + 4|α|² + 20), raised so that the top
/// thermal state kept by the ensemble still fits after displacement.
pub fn default_n_cut(schedule: &PulseSchedule, delta: f64, n_ions: u32, ensemble: &ThermalEnsemble, nbar: f64, drive: f64) -> usize {
    let a = max_displacement(schedule, delta, n_ions, drive);
    let rule = (8.0 * (nbar + 1.0) + 4.0 * a * a + 20.0).ceil() as usize;
    let nm = ensemble.n_max() as f64;
    let thermal = (nm + 2.0 * a * nm.sqrt() + a * a + 4.0 * a + 20.0).ceil() as usize;
    rule.max(thermal)
}
