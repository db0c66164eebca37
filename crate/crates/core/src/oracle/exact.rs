//! Hamiltonian evolution in the Dicke ladder.
//!
//! The Hamiltonian is diagonal in m_z, so each Dicke block carries its own
//! driven oscillator H_m = −δ a†a + (g m/√N)(a + a†) + iη(a† − a). Blocks are
//! propagated with cached eigendecompositions; an ensemble of initial Fock
//! states is evolved as the columns of one matrix per block, pre-scaled by
//! √(weight) so spin expectations are plain Frobenius products.

use super::fock::{block_eigen, displacement_operator, CMat, Eigen};
use super::{css_amplitudes, default_n_cut, expect, timeline, DickeBosonState, DickeOps, Op, ThermalEnsemble};
use crate::error::{invalid, Error, Result};
use crate::moments::SpinMoments;
use crate::types::ProtocolSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::rc::Rc;

/// Above this the Dicke×Fock products get slow for a test oracle.
pub const MAX_EXACT_IONS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// allowed population in the top two Fock levels
    pub leak_tol: f64,
    /// finite-difference step in units of total coherent displacement
    pub fd_step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { leak_tol: 1e-10, fd_step: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub moments: SpinMoments,
    /// ⟨(J₊J₋ + J₋J₊)/2⟩ at the working point
    pub transverse: f64,
    /// worst weighted population of the top two Fock levels seen during the run
    pub leakage: f64,
    pub n_cut: usize,
}

struct Engine {
    delta: f64,
    n_cut: usize,
    /// m/√N for each Dicke block
    coupling: Vec<f64>,
    eig: HashMap<(u64, u64), Rc<Eigen>>,
    kicks: HashMap<u64, Rc<DMatrix<f64>>>,
}

fn key(x: f64) -> u64 {
    // fold −0 onto +0
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl Engine {
    fn new(n_ions: u32, n_cut: usize, delta: f64) -> Self {
        let j = n_ions as f64 / 2.0;
        let sn = (n_ions as f64).sqrt();
        Self {
            delta,
            n_cut,
            coupling: (0..=n_ions as usize).map(|k| (k as f64 - j) / sn).collect(),
            eig: HashMap::new(),
            kicks: HashMap::new(),
        }
    }

    fn apply(&mut self, op: Op, lambda: f64, blocks: &mut [CMat]) {
        match op {
            Op::Evolve { duration, g, eta } => {
                let e = eta * lambda;
                for (b, &cm) in blocks.iter_mut().zip(&self.coupling) {
                    let c = g * cm;
                    let (n, d) = (self.n_cut, self.delta);
                    let eig = self
                        .eig
                        .entry((key(c), key(e)))
                        .or_insert_with(|| Rc::new(block_eigen(n, d, c, e)))
                        .clone();
                    eig.propagate(b, duration);
                }
            }
            Op::Kick { beta } => {
                let b = beta * lambda;
                if b == 0.0 {
                    return;
                }
                let n = self.n_cut;
                let d = self.kicks.entry(key(b)).or_insert_with(|| Rc::new(displacement_operator(n, b))).clone();
                for x in blocks.iter_mut() {
                    x.left_mul_real(&d);
                }
            }
        }
    }
}

fn leakage(blocks: &[CMat]) -> f64 {
    blocks.iter().map(|b| b.tail_norm_sq(2)).sum()
}

/// Runs `ops` for every drive scale in `lambdas`, sharing the drive-free prefix.
fn run(engine: &mut Engine, ops: &[Op], init: Vec<CMat>, lambdas: &[f64], leak_tol: f64) -> Result<(Vec<Vec<CMat>>, f64)> {
    let mut shared = Some(init);
    let mut split: Vec<Vec<CMat>> = Vec::new();
    let mut worst = 0.0f64;
    for &op in ops {
        if op.drive_dependent() {
            if let Some(s) = shared.take() {
                split = lambdas.iter().map(|_| s.clone()).collect();
            }
        }
        let mut check = |blocks: &[CMat]| -> Result<()> {
            let l = leakage(blocks);
            worst = worst.max(l);
            if l > leak_tol {
                return Err(Error::Leakage { leak: l, tol: leak_tol });
            }
            Ok(())
        };
        match shared.as_mut() {
            Some(s) => {
                engine.apply(op, 1.0, s);
                check(s)?;
            }
            None => {
                for (&l, s) in lambdas.iter().zip(split.iter_mut()) {
                    engine.apply(op, l, s);
                    check(s)?;
                }
            }
        }
    }
    if let Some(s) = shared {
        split = lambdas.iter().map(|_| s.clone()).collect();
    }
    Ok((split, worst))
}

/// ρ_{kk'} = ⟨X_{k'}, X_k⟩
fn spin_density(blocks: &[CMat]) -> DMatrix<Complex64> {
    let d = blocks.len();
    let mut rho = DMatrix::zeros(d, d);
    for k in 0..d {
        for kp in k..d {
            let v = blocks[kp].inner(&blocks[k]);
            rho[(k, kp)] = v;
            rho[(kp, k)] = v.conj();
        }
    }
    rho
}

fn check_size(spec: &ProtocolSpec, n_cut: usize, ensemble: &ThermalEnsemble) -> Result<()> {
    spec.validate()?;
    if spec.ion_count > MAX_EXACT_IONS {
        return invalid(format!("exact oracle is limited to N <= {MAX_EXACT_IONS}"));
    }
    if ensemble.n_max() + 3 > n_cut {
        return invalid(format!("cutoff {n_cut} is too small for initial Fock states up to {}", ensemble.n_max()));
    }
    Ok(())
}

/// Working-point moments and the drive slope from the full Hamiltonian, Γ = 0.
pub fn evolve_exact(spec: &ProtocolSpec, delta: f64, n_cut: usize, initial: &ThermalEnsemble) -> Result<SpinMoments> {
    evolve_exact_with(spec, delta, n_cut, initial, &OracleOptions::default()).map(|r| r.moments)
}

pub fn evolve_exact_with(
    spec: &ProtocolSpec,
    delta: f64,
    n_cut: usize,
    initial: &ThermalEnsemble,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    check_size(spec, n_cut, initial)?;
    let unit = spec.unit_drive();
    let ops = timeline(&unit.schedule());
    let scale = unit.unit_displacement().abs();
    let h = if scale > 0.0 { opts.fd_step / scale } else { opts.fd_step };
    let lambdas = [0.0, h, -h, 2.0 * h, -2.0 * h];

    let c = css_amplitudes(spec.ion_count);
    let init: Vec<CMat> = c
        .iter()
        .map(|&ck| {
            let mut x = CMat::zeros(n_cut, initial.weights.len());
            for (n, &w) in initial.weights.iter().enumerate() {
                x.re[(n, n)] = ck * w.sqrt();
            }
            x
        })
        .collect();

    let mut engine = Engine::new(spec.ion_count, n_cut, delta);
    let (finals, worst) = run(&mut engine, &ops, init, &lambdas, opts.leak_tol)?;
    let dicke = DickeOps::new(spec.ion_count);
    let rho: Vec<DMatrix<Complex64>> = finals.iter().map(|b| spin_density(b)).collect();
    let jy: Vec<f64> = rho.iter().map(|r| expect(r, &dicke.jy)).collect();
    let d1 = (jy[1] - jy[2]) / (2.0 * h);
    let d2 = (jy[3] - jy[4]) / (4.0 * h);
    let moments = SpinMoments {
        jy_mean: jy[0],
        jy_sq: expect(&rho[0], &dicke.jy2),
        slope: (4.0 * d1 - d2) / 3.0,
        jx_mean: expect(&rho[0], &dicke.jx),
    };
    Ok(OracleReport { moments, transverse: expect(&rho[0], &dicke.transverse), leakage: worst, n_cut })
}

/// Chooses the cutoff itself and enlarges it when leakage is detected.
pub fn evolve_exact_auto(spec: &ProtocolSpec, delta: f64, nbar: f64) -> Result<OracleReport> {
    let ens = ThermalEnsemble::thermal(nbar)?;
    let unit = spec.unit_drive();
    let mut n_cut = default_n_cut(&unit.schedule(), delta, spec.ion_count, &ens, nbar, 0.0);
    let opts = OracleOptions::default();
    let mut last = None;
    for _ in 0..3 {
        match evolve_exact_with(spec, delta, n_cut, &ens, &opts) {
            Err(e @ Error::Leakage { .. }) => {
                last = Some(e);
                n_cut = n_cut * 3 / 2;
            }
            other => return other,
        }
    }
    Err(last.expect("loop ran"))
}

/// Evolves one pure state through the schedule with its drives as given.
pub fn evolve_state(spec: &ProtocolSpec, delta: f64, state: &DickeBosonState) -> Result<DickeBosonState> {
    spec.validate()?;
    if state.n_ions != spec.ion_count {
        return invalid("state and protocol disagree on the ion count");
    }
    let n_cut = state.n_cut;
    let init: Vec<CMat> = (0..state.amplitudes.nrows())
        .map(|k| {
            let row = state.amplitudes.row(k);
            CMat {
                re: DMatrix::from_fn(n_cut, 1, |n, _| row[n].re),
                im: DMatrix::from_fn(n_cut, 1, |n, _| row[n].im),
            }
        })
        .collect();
    let mut engine = Engine::new(spec.ion_count, n_cut, delta);
    let ops = timeline(&spec.schedule());
    let (mut out, _) = run(&mut engine, &ops, init, &[1.0], OracleOptions::default().leak_tol)?;
    let blocks = out.pop().expect("one drive scale");
    let amplitudes = DMatrix::from_fn(blocks.len(), n_cut, |k, n| Complex64::new(blocks[k].re[(n, 0)], blocks[k].im[(n, 0)]));
    Ok(DickeBosonState { n_ions: state.n_ions, n_cut, amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernels_for;
    use crate::moments::moments_at_detuning;
    use crate::types::{NoiseModel, Protocol};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn perfect_echo_for_two_ions() {
        let spec = ProtocolSpec::new(Protocol::Displacement { g: 1.0, tau: 1.0, beta: 0.0 }, 2).unwrap();
        let r = evolve_exact(&spec, 0.0, 40, &ThermalEnsemble::thermal(0.0).unwrap()).unwrap();
        assert!((r.jy_sq - 0.5).abs() < 1e-10);
        assert!((r.jx_mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_closed_form_with_thermal_phonons() {
        let g = 1.0;
        let spec = ProtocolSpec::new(Protocol::Displacement { g, tau: 1.0, beta: 0.0 }, 4).unwrap();
        let delta = 0.1 * g;
        let r = evolve_exact_auto(&spec, delta, 0.5).unwrap();
        let noise = NoiseModel { nbar: 0.5, ..NoiseModel::ideal() };
        let cf = moments_at_detuning(&kernels_for(&spec.unit_drive(), delta).unwrap(), 4, &noise).unwrap();
        assert!(rel(r.moments.jy_sq, cf.jy_sq) < 1e-6);
        assert!(rel(r.moments.jx_mean, cf.jx_mean) < 1e-6);
        assert!(rel(r.moments.slope, cf.slope) < 1e-5);
        assert!(r.moments.jy_mean.abs() < 1e-12);
    }

    #[test]
    fn echo_ignores_initial_fock_state() {
        let (g, tau, beta, n_ions) = (1.3, 0.8, 0.2, 3);
        let spec = ProtocolSpec::new(Protocol::Displacement { g, tau, beta }, n_ions).unwrap();
        let mut jys = Vec::new();
        for n in [0usize, 1, 2, 5] {
            let s = DickeBosonState::coherent_x(n_ions, 70, n).unwrap();
            let out = evolve_state(&spec, 0.0, &s).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-10);
            jys.push(out.spin_expectations().1);
        }
        for w in jys.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9, "{jys:?}");
        }
        // rotation by 2gτβ/√N about z
        let phi = 2.0 * g * tau * beta / (n_ions as f64).sqrt();
        assert!((jys[0] + 1.5 * phi.sin()).abs() < 1e-9);
    }

    #[test]
    fn leakage_is_reported() {
        let spec = ProtocolSpec::new(Protocol::Displacement { g: 3.0, tau: 1.0, beta: 0.0 }, 4).unwrap();
        let e = evolve_exact(&spec, 0.3, 8, &ThermalEnsemble::thermal(0.0).unwrap());
        assert!(matches!(e, Err(Error::Leakage { .. })));
    }

    #[test]
    fn rejects_large_systems() {
        let spec = ProtocolSpec::new(Protocol::Displacement { g: 1.0, tau: 1.0, beta: 0.0 }, 13).unwrap();
        assert!(evolve_exact(&spec, 0.0, 40, &ThermalEnsemble::thermal(0.0).unwrap()).is_err());
    }
}
