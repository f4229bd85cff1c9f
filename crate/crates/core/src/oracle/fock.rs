//! Truncated Fock-space model of the closed optomechanical Hamiltonian
//! `H = −δ·n_a + n_b − k̄·n_a·X + A·g·X`.
//!
//! The Hamiltonian conserves the photon number, so each photon block is an
//! independent real symmetric matrix on the mechanical Fock space and is
//! diagonalized exactly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::identities::{DenseOperatorModel, DenseSector};
use super::{OracleModel, Propagator, C64};
use crate::error::{Error, Result};
use crate::estimation::{FisherMatrix2, UnitSystem};
use crate::kernel::KernelParams;
use crate::optomech::{MechTime, OptoConfig};

/// Largest discarded weight tolerated anywhere in the truncation.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FockModel {
    cfg: OptoConfig,
    /// Optical amplitudes `√p(n)` of the coherent state, one per photon block.
    photon_amp: Vec<f64>,
    /// Mechanical coherent amplitudes.
    mech: Vec<C64>,
}

fn poisson(mu: f64, n_max: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n_max + 1);
    let mut cur = (-mu).exp();
    for n in 0..=n_max {
        p.push(cur);
        cur *= mu / (n as f64 + 1.0);
    }
    p
}

impl FockModel {
    pub fn from_config(cfg: &OptoConfig) -> Result<Self> {
        let p = poisson(cfg.mu, cfg.photon_max);
        let kept: f64 = p.iter().sum();
        if 1.0 - kept > TRUNCATION_TOL {
            return Err(Error::TruncationTooLarge {
                weight: 1.0 - kept,
                limit: TRUNCATION_TOL,
            });
        }
        let beta = C64::new(cfg.beta_r, cfg.beta_i);
        let mut mech = Vec::with_capacity(cfg.fock_dim);
        let mut cur = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for m in 0..cfg.fock_dim {
            mech.push(cur);
            cur *= beta / ((m + 1) as f64).sqrt();
        }
        let kept_m: f64 = mech.iter().map(|x| x.norm_sqr()).sum();
        if 1.0 - kept_m > TRUNCATION_TOL {
            return Err(Error::TruncationTooLarge {
                weight: 1.0 - kept_m,
                limit: TRUNCATION_TOL,
            });
        }
        let sm = kept_m.sqrt();
        mech.iter_mut().for_each(|x| *x /= sm);
        let photon_amp = p.iter().map(|x| (x / kept).sqrt()).collect();
        Ok(Self {
            cfg: *cfg,
            photon_amp,
            mech,
        })
    }

    pub fn config(&self) -> &OptoConfig {
        &self.cfg
    }

    fn blocks(&self) -> usize {
        self.photon_amp.len()
    }

    fn fock_dim(&self) -> usize {
        self.cfg.fock_dim
    }

    /// Mechanical block `H_n(g)` for photon number `n`.
    pub fn block_hamiltonian(&self, n: usize, g: f64) -> DMatrix<f64> {
        let d = self.fock_dim();
        let c = &self.cfg;
        let nf = n as f64;
        let coupling = c.a_coef * g - c.kbar * nf;
        let mut h = DMatrix::zeros(d, d);
        for m in 0..d {
            h[(m, m)] = -c.delta * nf + m as f64;
            if m + 1 < d {
                let x = coupling * ((m + 1) as f64).sqrt();
                h[(m, m + 1)] = x;
                h[(m + 1, m)] = x;
            }
        }
        h
    }

    /// Mechanical position `X = b + b†`.
    pub fn position(&self) -> DMatrix<f64> {
        let d = self.fock_dim();
        DMatrix::from_fn(d, d, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else if i == j + 1 {
                (i as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    fn eigensystems(&self, g: f64) -> Vec<(DVector<f64>, DMatrix<f64>)> {
        (0..self.blocks())
            .into_par_iter()
            .map(|n| {
                let e = SymmetricEigen::new(self.block_hamiltonian(n, g));
                (e.eigenvalues, e.eigenvectors)
            })
            .collect()
    }

    fn block<'a>(&self, psi: &'a [C64], n: usize) -> &'a [C64] {
        let d = self.fock_dim();
        &psi[n * d..(n + 1) * d]
    }

    /// Photon-number weights `‖ψₙ‖²`.
    pub fn photon_weights(&self, psi: &[C64]) -> Vec<f64> {
        (0..self.blocks())
            .map(|n| self.block(psi, n).iter().map(|x| x.norm_sqr()).sum())
            .collect()
    }

    /// Largest change of the photon-number distribution (each weight, mean
    /// and variance) between the initial state and `U(g, t)|ψ₀⟩`.
    pub fn photon_number_drift(&self, g: f64, t: MechTime) -> Result<f64> {
        let psi0 = self.initial_state();
        let psi = self.propagator(g)?.evolve_steps(&psi0, t.0, 1);
        let w0 = self.photon_weights(&psi0);
        let w1 = self.photon_weights(&psi);
        let moments = |w: &[f64]| {
            let m1: f64 = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            let m2: f64 = w.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
            (m1, m2 - m1 * m1)
        };
        let (a1, a2) = moments(&w0);
        let (b1, b2) = moments(&w1);
        let per_block = w0
            .iter()
            .zip(&w1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(per_block.max((a1 - b1).abs()).max((a2 - b2).abs()))
    }

    /// Eigen-decomposed system at gravity `g`, reusable for any time.
    pub fn spectral_system(&self, g: f64) -> SpectralSystem {
        let x = self.position() * self.cfg.a_coef;
        let blocks = self
            .eigensystems(g)
            .into_par_iter()
            .enumerate()
            .map(|(n, (e, v))| {
                let c = v.transpose() * &x * &v;
                let psi: Vec<C64> = self.mech.iter().map(|m| m * self.photon_amp[n]).collect();
                let vc = v.map(|r| C64::new(r, 0.0));
                let a = vc.transpose() * DVector::from_vec(psi);
                SpectralBlock::new(e.iter().copied().collect(), &c, a.iter().copied().collect())
            })
            .collect();
        SpectralSystem { blocks }
    }

    /// QFIM from the exact spectral representation of the generators.
    pub fn spectral_qfim(&self, g: f64, t: MechTime) -> Result<FisherMatrix2> {
        self.spectral_system(g).qfim(t)
    }

    /// Kernel coefficients from exact generator moments at `g = 0`.
    pub fn harvest_kernel_params(&self, t: MechTime) -> Result<KernelParams> {
        self.spectral_system(0.0).kernel_params(t)
    }

    /// Weight in the top tenth of the mechanical levels, summed over blocks.
    pub fn edge_weight(&self, psi: &[C64]) -> f64 {
        let d = self.fock_dim();
        let band = (d / 10).max(2);
        (0..self.blocks())
            .map(|n| {
                self.block(psi, n)[d - band..]
                    .iter()
                    .map(|x| x.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }
}

struct SpectralBlock {
    energies: Vec<f64>,
    amps: Vec<C64>,
    /// Nonzero `(i, j, ⟨i|A·X|j⟩·a_j)`, grouped by `i`.
    terms: Vec<(usize, usize, C64)>,
    /// `Σ_j ⟨i|A·X|j⟩·a_j`, independent of time.
    coupled: Vec<C64>,
}

/// Products `⟨i|A·X|j⟩·a_j` below this fraction of the block's largest one
/// are dropped from the time-dependent sums.
const TERM_CUTOFF: f64 = 1e-18;

impl SpectralBlock {
    fn new(energies: Vec<f64>, coupling: &DMatrix<f64>, amps: Vec<C64>) -> Self {
        let d = energies.len();
        let mut coupled = vec![C64::new(0.0, 0.0); d];
        let mut all = Vec::new();
        let mut largest = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let w = amps[j] * coupling[(i, j)];
                coupled[i] += w;
                largest = largest.max(w.norm());
                all.push((i, j, w));
            }
        }
        let terms = all
            .into_iter()
            .filter(|(_, _, w)| w.norm() > TERM_CUTOFF * largest)
            .collect();
        Self {
            energies,
            amps,
            terms,
            coupled,
        }
    }
}

/// Per-block eigensystems with the initial state expanded in them.
pub struct SpectralSystem {
    blocks: Vec<SpectralBlock>,
}

/// `∫₀ᵗ exp(i·w·s) ds`.
fn phase_integral(w: f64, t: f64) -> C64 {
    let x = w * t;
    if x.abs() < 1e-4 {
        C64::new(t * (1.0 - x * x / 6.0), t * (x / 2.0 - x * x * x / 24.0))
    } else {
        C64::new((x).sin() / w, (1.0 - x.cos()) / w)
    }
}

#[derive(Default)]
struct Moments {
    g: f64,
    h: f64,
    c: f64,
    gg: f64,
    hh: f64,
    cc: f64,
    gh: f64,
    gc: f64,
    hc: f64,
}

impl SpectralSystem {
    fn moments(&self, t: f64) -> Moments {
        let mut m = Moments::default();
        for b in &self.blocks {
            let mut gv = vec![C64::new(0.0, 0.0); b.energies.len()];
            for &(i, j, w) in &b.terms {
                gv[i] += phase_integral(b.energies[i] - b.energies[j], t) * w;
            }
            for (i, (&gi, &ci)) in gv.iter().zip(&b.coupled).enumerate() {
                let ai = b.amps[i];
                let hi = ai * b.energies[i];
                m.g += (ai.conj() * gi).re;
                m.h += (ai.conj() * hi).re;
                m.c += (ai.conj() * ci).re;
                m.gg += gi.norm_sqr();
                m.hh += hi.norm_sqr();
                m.cc += ci.norm_sqr();
                m.gh += (gi.conj() * hi).re;
                m.gc += (gi.conj() * ci).re;
                m.hc += (hi.conj() * ci).re;
            }
        }
        m
    }

    /// QFIM at time `t` for the gravity this system was built with.
    pub fn qfim(&self, t: MechTime) -> Result<FisherMatrix2> {
        let m = self.moments(t.0);
        FisherMatrix2::new(
            4.0 * (m.gg - m.g * m.g),
            4.0 * (m.gh - m.g * m.h),
            4.0 * (m.hh - m.h * m.h),
            UnitSystem::Mechanical,
        )
    }

    /// Kernel coefficients; meaningful for a system built at `g = 0`.
    pub fn kernel_params(&self, t: MechTime) -> Result<KernelParams> {
        let m = self.moments(t.0);
        KernelParams::new(
            4.0 * (m.hh - m.h * m.h),
            8.0 * (m.hc - m.h * m.c),
            4.0 * (m.cc - m.c * m.c),
            4.0 * (m.gh - m.g * m.h),
            4.0 * (m.gc - m.g * m.c),
            4.0 * (m.gg - m.g * m.g),
            t.0,
        )
    }
}

struct FockPropagator {
    d: usize,
    systems: Vec<(DVector<f64>, DMatrix<f64>)>,
}

impl Propagator for FockPropagator {
    fn evolve_steps(&self, psi: &[C64], t: f64, _steps: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (n, (e, v)) in self.systems.iter().enumerate() {
            let blk = &psi[n * self.d..(n + 1) * self.d];
            let mut a: Vec<C64> = (0..self.d)
                .map(|k| (0..self.d).map(|m| blk[m] * v[(m, k)]).sum())
                .collect();
            a.iter_mut()
                .zip(e.iter())
                .for_each(|(x, ek)| *x *= C64::from_polar(1.0, -ek * t));
            for m in 0..self.d {
                out[n * self.d + m] = (0..self.d).map(|k| a[k] * v[(m, k)]).sum();
            }
        }
        out
    }
}

impl OracleModel for FockModel {
    fn dim(&self) -> usize {
        self.blocks() * self.fock_dim()
    }

    fn units(&self) -> UnitSystem {
        UnitSystem::Mechanical
    }

    fn initial_state(&self) -> Vec<C64> {
        self.photon_amp
            .iter()
            .flat_map(|&p| self.mech.iter().map(move |m| m * p))
            .collect()
    }

    fn propagator(&self, g: f64) -> Result<Box<dyn Propagator + '_>> {
        Ok(Box::new(FockPropagator {
            d: self.fock_dim(),
            systems: self.eigensystems(g),
        }))
    }

    fn steps_for(&self, _t: f64) -> usize {
        1
    }

    fn apply_hamiltonian(&self, psi: &[C64], g: f64) -> Vec<C64> {
        let d = self.fock_dim();
        let c = &self.cfg;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for n in 0..self.blocks() {
            let nf = n as f64;
            let coupling = c.a_coef * g - c.kbar * nf;
            let blk = self.block(psi, n);
            for m in 0..d {
                let mut v = blk[m] * (-c.delta * nf + m as f64);
                if m + 1 < d {
                    v += blk[m + 1] * (coupling * ((m + 1) as f64).sqrt());
                }
                if m > 0 {
                    v += blk[m - 1] * (coupling * (m as f64).sqrt());
                }
                out[n * d + m] = v;
            }
        }
        out
    }

    fn apply_coupling(&self, psi: &[C64]) -> Vec<C64> {
        let d = self.fock_dim();
        let a = self.cfg.a_coef;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for n in 0..self.blocks() {
            let blk = self.block(psi, n);
            for m in 0..d {
                let mut v = C64::new(0.0, 0.0);
                if m + 1 < d {
                    v += blk[m + 1] * ((m + 1) as f64).sqrt();
                }
                if m > 0 {
                    v += blk[m - 1] * (m as f64).sqrt();
                }
                out[n * d + m] = v * a;
            }
        }
        out
    }

    fn check_state(&self, psi: &[C64]) -> Result<()> {
        let w = self.edge_weight(psi);
        if w > TRUNCATION_TOL {
            return Err(Error::TruncationTooLarge {
                weight: w,
                limit: TRUNCATION_TOL,
            });
        }
        Ok(())
    }
}

/// Photon blocks used for operator-level checks.
pub const SECTOR_BLOCKS: usize = 4;
/// Mechanical levels spanned by the interior projection.
pub const SECTOR_BASIS: usize = 8;

impl DenseOperatorModel for FockModel {
    fn sectors(&self, g: f64) -> Result<Vec<DenseSector>> {
        let d = self.fock_dim();
        let k = SECTOR_BASIS.min(d / 4).max(1);
        let interior = DMatrix::from_fn(d, k, |i, j| if i == j { 1.0 } else { 0.0 });
        (0..self.blocks().min(SECTOR_BLOCKS))
            .map(|n| DenseSector::new(self.block_hamiltonian(n, g), self.position(), interior.clone()))
            .collect()
    }
}
