//! Master equation with single-spin dephasing, L ρ = (Γ/4) Σᵢ (σ_zⁱ ρ σ_zⁱ − ρ).
//!
//! Works in the full 2^N spin-configuration basis. The Hamiltonian and the
//! dissipator are both diagonal in σ_z configurations, so ρ splits into
//! oscillator blocks ρ_{ss'} obeying
//! dρ_{ss'}/dt = −i(H_s ρ_{ss'} − ρ_{ss'} H_{s'}) − (Γ/2) d(s, s') ρ_{ss'},
//! with d the Hamming distance. The blocks are integrated together.

use super::fock::{displacement_operator, tridiag_left, tridiag_right, CMat};
use super::rk45::{integrate, Tolerance};
use super::{expect, spin_ops_from_raising, timeline, Op, ThermalEnsemble};
use crate::error::{invalid, Error, Result};
use crate::moments::SpinMoments;
use crate::types::ProtocolSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const MAX_LINDBLAD_IONS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingWindow {
    /// only while the ODF coupling is non-zero
    OdfOn,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub atol: f64,
    pub rtol: f64,
    pub trace_tol: f64,
    pub leak_tol: f64,
    pub fd_step: f64,
    pub window: DephasingWindow,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10, trace_tol: 1e-8, leak_tol: 1e-9, fd_step: 1e-4, window: DephasingWindow::OdfOn }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladReport {
    pub moments: SpinMoments,
    /// ⟨(J₊J₋ + J₋J₊)/2⟩
    pub transverse: f64,
    pub j_plus: Complex64,
    pub trace_error: f64,
    pub n_cut: usize,
}

struct Model {
    n_ions: u32,
    n_cut: usize,
    delta: f64,
    /// J_z eigenvalue of each configuration divided by √N
    coupling: Vec<f64>,
    /// Hamming distance for each block, row-major over (s, s')
    distance: Vec<u32>,
}

impl Model {
    fn configs(&self) -> usize {
        1 << self.n_ions
    }

    fn block_len(&self) -> usize {
        2 * self.n_cut * self.n_cut
    }

    fn load(&self, y: &[f64], b: usize, out: &mut CMat) {
        let n2 = self.n_cut * self.n_cut;
        let o = b * 2 * n2;
        out.re.as_mut_slice().copy_from_slice(&y[o..o + n2]);
        out.im.as_mut_slice().copy_from_slice(&y[o + n2..o + 2 * n2]);
    }

    fn store(&self, y: &mut [f64], b: usize, m: &CMat) {
        let n2 = self.n_cut * self.n_cut;
        let o = b * 2 * n2;
        y[o..o + n2].copy_from_slice(m.re.as_slice());
        y[o + n2..o + 2 * n2].copy_from_slice(m.im.as_slice());
    }

    /// dρ/dt for a constant segment.
    fn rhs(&self, g: f64, eta: f64, gamma: f64, y: &[f64], dy: &mut [f64], scratch: &mut [CMat; 3]) {
        let d = self.configs();
        let [x, l, r] = scratch;
        for s in 0..d {
            for sp in 0..d {
                let b = s * d + sp;
                self.load(y, b, x);
                tridiag_left(self.delta, g * self.coupling[s], eta, x, l);
                tridiag_right(self.delta, g * self.coupling[sp], eta, x, r);
                let damp = -0.5 * gamma * self.distance[b] as f64;
                // −i(l − r) + damp x
                let n2 = self.n_cut * self.n_cut;
                let o = b * 2 * n2;
                let (xr, xi) = (x.re.as_slice(), x.im.as_slice());
                let (lr, li, rr, ri) = (l.re.as_slice(), l.im.as_slice(), r.re.as_slice(), r.im.as_slice());
                for k in 0..n2 {
                    dy[o + k] = (li[k] - ri[k]) + damp * xr[k];
                    dy[o + n2 + k] = -(lr[k] - rr[k]) + damp * xi[k];
                }
            }
        }
    }

    fn trace(&self, y: &[f64]) -> f64 {
        let d = self.configs();
        let n = self.n_cut;
        let n2 = n * n;
        (0..d).map(|s| {
            let o = (s * d + s) * 2 * n2;
            (0..n).map(|k| y[o + k * n + k]).sum::<f64>()
        }).sum()
    }

    fn top_population(&self, y: &[f64]) -> f64 {
        let d = self.configs();
        let n = self.n_cut;
        let n2 = n * n;
        (0..d).map(|s| {
            let o = (s * d + s) * 2 * n2;
            (n - 2..n).map(|k| y[o + k * n + k]).sum::<f64>()
        }).sum()
    }

    /// Spin density matrix ρ_S[s, s'] = tr ρ_{ss'}.
    fn spin_density(&self, y: &[f64]) -> DMatrix<Complex64> {
        let d = self.configs();
        let n = self.n_cut;
        let n2 = n * n;
        DMatrix::from_fn(d, d, |s, sp| {
            let o = (s * d + sp) * 2 * n2;
            let re: f64 = (0..n).map(|k| y[o + k * n + k]).sum();
            let im: f64 = (0..n).map(|k| y[o + n2 + k * n + k]).sum();
            Complex64::new(re, im)
        })
    }

    fn kick(&self, y: &mut [f64], beta: f64) {
        let dmat = displacement_operator(self.n_cut, beta);
        let mut x = CMat::zeros(self.n_cut, self.n_cut);
        for b in 0..self.configs() * self.configs() {
            self.load(y, b, &mut x);
            x.re = &dmat * &x.re * dmat.transpose();
            x.im = &dmat * &x.im * dmat.transpose();
            self.store(y, b, &x);
        }
    }
}

fn raising_operator(n_ions: u32) -> DMatrix<Complex64> {
    let d = 1usize << n_ions;
    let mut jp = DMatrix::zeros(d, d);
    for s in 0..d {
        for i in 0..n_ions {
            if s & (1 << i) == 0 {
                jp[(s | (1 << i), s)] += Complex64::new(1.0, 0.0);
            }
        }
    }
    jp
}

fn model(n_ions: u32, n_cut: usize, delta: f64) -> Model {
    let d = 1usize << n_ions;
    let sn = (n_ions as f64).sqrt();
    let coupling = (0..d)
        .map(|s| {
            let up = (s as u32).count_ones() as f64;
            (up - n_ions as f64 / 2.0) / sn
        })
        .collect();
    let distance = (0..d * d).map(|b| ((b / d) ^ (b % d)).count_ones()).collect();
    Model { n_ions, n_cut, delta, coupling, distance }
}

pub fn evolve_lindblad(spec: &ProtocolSpec, delta: f64, n_cut: usize, nbar: f64, gamma: f64) -> Result<SpinMoments> {
    evolve_lindblad_with(spec, delta, n_cut, nbar, gamma, &LindbladOptions::default()).map(|r| r.moments)
}

pub fn evolve_lindblad_with(
    spec: &ProtocolSpec,
    delta: f64,
    n_cut: usize,
    nbar: f64,
    gamma: f64,
    opts: &LindbladOptions,
) -> Result<LindbladReport> {
    spec.validate()?;
    if spec.ion_count > MAX_LINDBLAD_IONS {
        return invalid(format!("master-equation oracle is limited to N <= {MAX_LINDBLAD_IONS}"));
    }
    if !(gamma >= 0.0) {
        return invalid("gamma must be >= 0");
    }
    let ens = ThermalEnsemble::thermal(nbar)?;
    if ens.n_max() + 3 > n_cut {
        return invalid(format!("cutoff {n_cut} is too small for nbar = {nbar}"));
    }
    let m = model(spec.ion_count, n_cut, delta);
    let d = m.configs();
    let mut y0 = vec![0.0; d * d * m.block_len()];
    for b in 0..d * d {
        let o = b * m.block_len();
        for (k, w) in ens.weights.iter().enumerate() {
            y0[o + k * n_cut + k] = w / d as f64;
        }
    }

    let unit = spec.unit_drive();
    let ops = timeline(&unit.schedule());
    let scale = unit.unit_displacement().abs();
    let h = if scale > 0.0 { opts.fd_step / scale } else { opts.fd_step };
    let lambdas = [0.0, h, -h, 2.0 * h, -2.0 * h];
    let tol = Tolerance { atol: opts.atol, rtol: opts.rtol, max_steps: 2_000_000 };
    let mut scratch = [CMat::zeros(n_cut, n_cut), CMat::zeros(n_cut, n_cut), CMat::zeros(n_cut, n_cut)];
    let mut worst_trace = 0.0f64;

    let mut step = |y: &mut Vec<f64>, op: Op, lambda: f64| -> Result<()> {
        match op {
            Op::Evolve { duration, g, eta } => {
                let dephasing = match opts.window {
                    DephasingWindow::Always => gamma,
                    DephasingWindow::OdfOn if g != 0.0 => gamma,
                    DephasingWindow::OdfOn => 0.0,
                };
                let e = eta * lambda;
                integrate(|y, dy| m.rhs(g, e, dephasing, y, dy, &mut scratch), y, duration, &tol)?;
            }
            Op::Kick { beta } => {
                if beta * lambda != 0.0 {
                    m.kick(y, beta * lambda);
                }
            }
        }
        let tr = (m.trace(y) - 1.0).abs();
        worst_trace = worst_trace.max(tr);
        if tr > opts.trace_tol {
            return Err(Error::TraceDrift(tr));
        }
        let top = m.top_population(y);
        if top > opts.leak_tol {
            return Err(Error::Leakage { leak: top, tol: opts.leak_tol });
        }
        Ok(())
    };

    let mut shared = Some(y0);
    let mut split: Vec<Vec<f64>> = Vec::new();
    for &op in &ops {
        if op.drive_dependent() {
            if let Some(s) = shared.take() {
                split = lambdas.iter().map(|_| s.clone()).collect();
            }
        }
        match shared.as_mut() {
            Some(s) => step(s, op, 1.0)?,
            None => {
                for (&l, s) in lambdas.iter().zip(split.iter_mut()) {
                    step(s, op, l)?;
                }
            }
        }
    }
    if let Some(s) = shared {
        split = lambdas.iter().map(|_| s.clone()).collect();
    }

    let ops_s = spin_ops_from_raising(raising_operator(spec.ion_count));
    let rho: Vec<DMatrix<Complex64>> = split.iter().map(|y| m.spin_density(y)).collect();
    let jy: Vec<f64> = rho.iter().map(|r| expect(r, &ops_s.jy)).collect();
    let d1 = (jy[1] - jy[2]) / (2.0 * h);
    let d2 = (jy[3] - jy[4]) / (4.0 * h);
    let jp = raising_operator(spec.ion_count);
    let mut j_plus = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            j_plus += rho[0][(i, j)] * jp[(j, i)];
        }
    }
    Ok(LindbladReport {
        moments: SpinMoments {
            jy_mean: jy[0],
            jy_sq: expect(&rho[0], &ops_s.jy2),
            slope: (4.0 * d1 - d2) / 3.0,
            jx_mean: expect(&rho[0], &ops_s.jx),
        },
        transverse: expect(&rho[0], &ops_s.transverse),
        j_plus,
        trace_error: worst_trace,
        n_cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{evolve_exact, ThermalEnsemble};
    use crate::types::{Protocol, PulseSchedule, Segment};

    /// −i[H, ρ] + (Γ/4) Σ (Z ρ Z − ρ) with dense matrices on the full space.
    fn dense_rhs(n_ions: u32, n_cut: usize, delta: f64, g: f64, eta: f64, gamma: f64, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = 1usize << n_ions;
        let dim = d * n_cut;
        let mut a = DMatrix::<Complex64>::zeros(n_cut, n_cut);
        for k in 0..n_cut - 1 {
            a[(k, k + 1)] = Complex64::new(((k + 1) as f64).sqrt(), 0.0);
        }
        let ad = a.adjoint();
        let num = &ad * &a;
        let eye_b = DMatrix::<Complex64>::identity(n_cut, n_cut);
        let eye_s = DMatrix::<Complex64>::identity(d, d);
        let mut jz = DMatrix::<Complex64>::zeros(d, d);
        let mut zs = Vec::new();
        for i in 0..n_ions {
            let mut z = DMatrix::<Complex64>::zeros(d, d);
            for s in 0..d {
                let v = if s & (1 << i) != 0 { 1.0 } else { -1.0 };
                z[(s, s)] = Complex64::new(v, 0.0);
                jz[(s, s)] += Complex64::new(0.5 * v, 0.0);
            }
            zs.push(z.kronecker(&eye_b));
        }
        let i = Complex64::new(0.0, 1.0);
        let hb = num * Complex64::new(-delta, 0.0);
        let xq = &a + &ad;
        let drive = (&ad - &a) * (i * eta);
        let h = eye_s.kronecker(&hb) + jz.kronecker(&xq) * Complex64::new(g / (n_ions as f64).sqrt(), 0.0) + eye_s.kronecker(&drive);
        let mut out = (&h * rho - rho * &h) * (-i);
        for z in &zs {
            out += (z * rho * z - rho) * Complex64::new(gamma / 4.0, 0.0);
        }
        assert_eq!(out.nrows(), dim);
        out
    }

    #[test]
    fn blocked_rhs_matches_dense() {
        let (n_ions, n_cut) = (2u32, 5usize);
        let m = model(n_ions, n_cut, 0.37);
        let d = m.configs();
        let dim = d * n_cut;
        let rho = DMatrix::<Complex64>::from_fn(dim, dim, |r, c| {
            Complex64::new(((r * 3 + c * 7) as f64 * 0.11).sin(), ((r * 5 + c) as f64 * 0.07).cos())
        });
        let mut y = vec![0.0; d * d * m.block_len()];
        for s in 0..d {
            for sp in 0..d {
                let blk = rho.view((s * n_cut, sp * n_cut), (n_cut, n_cut)).clone_owned();
                let c = CMat { re: blk.map(|z| z.re), im: blk.map(|z| z.im) };
                m.store(&mut y, s * d + sp, &c);
            }
        }
        let (g, eta, gamma) = (1.3, 0.4, 0.9);
        let mut dy = vec![0.0; y.len()];
        let mut scratch = [CMat::zeros(n_cut, n_cut), CMat::zeros(n_cut, n_cut), CMat::zeros(n_cut, n_cut)];
        m.rhs(g, eta, gamma, &y, &mut dy, &mut scratch);
        let dense = dense_rhs(n_ions, n_cut, 0.37, g, eta, gamma, &rho);
        let mut x = CMat::zeros(n_cut, n_cut);
        for s in 0..d {
            for sp in 0..d {
                m.load(&dy, s * d + sp, &mut x);
                let blk = dense.view((s * n_cut, sp * n_cut), (n_cut, n_cut));
                for r in 0..n_cut {
                    for c in 0..n_cut {
                        assert!((blk[(r, c)].re - x.re[(r, c)]).abs() < 1e-12);
                        assert!((blk[(r, c)].im - x.im[(r, c)]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pure_dephasing_damps_coherence() {
        let gamma = 2.0;
        let t = 0.4;
        let s = PulseSchedule { segments: vec![Segment { duration: t, g: 0.0, eta: 0.0 }], kicks: vec![] };
        let spec = ProtocolSpec::new(Protocol::Custom(s), 2).unwrap();
        let opts = LindbladOptions { window: DephasingWindow::Always, ..Default::default() };
        let r = evolve_lindblad_with(&spec, 0.0, 6, 0.0, gamma, &opts).unwrap();
        // ⟨J₊⟩(0) = N/2 for spins along +x
        assert!((r.j_plus.re - (-gamma * t / 2.0).exp()).abs() < 1e-9);
        assert!(r.j_plus.im.abs() < 1e-12);
    }

    #[test]
    fn reduces_to_hamiltonian_oracle() {
        let spec = ProtocolSpec::new(Protocol::Displacement { g: 1.0, tau: 0.8, beta: 0.0 }, 2).unwrap();
        let n_cut = 40;
        let a = evolve_lindblad(&spec, 0.2, n_cut, 0.3, 0.0).unwrap();
        let b = evolve_exact(&spec, 0.2, n_cut, &ThermalEnsemble::thermal(0.3).unwrap()).unwrap();
        assert!((a.jy_sq - b.jy_sq).abs() < 1e-8);
        assert!((a.jx_mean - b.jx_mean).abs() < 1e-8);
        assert!((a.slope - b.slope).abs() < 1e-8 * b.slope.abs());
    }

    #[test]
    fn size_guard() {
        let spec = ProtocolSpec::new(Protocol::Displacement { g: 1.0, tau: 0.8, beta: 0.0 }, 4).unwrap();
        assert!(evolve_lindblad(&spec, 0.0, 20, 0.0, 1.0).is_err());
    }
}
