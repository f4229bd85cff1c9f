//! One-dimensional position grid with symmetric split-step spectral stepping.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use super::identities::DenseSector;
use super::{normalize, norm_sq, OracleModel, Propagator, C64};
use crate::error::{require_positive, Error, Result};
use crate::estimation::UnitSystem;

/// Gravity-independent part of the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    Free,
    /// `½·m·ω²·z²`.
    Harmonic { omega: f64 },
    /// `λ·z⁴`, an anharmonic control that violates the weak-commutator condition.
    Quartic { lambda: f64 },
}

impl Background {
    fn potential(&self, z: f64, mass: f64) -> f64 {
        match *self {
            Background::Free => 0.0,
            Background::Harmonic { omega } => 0.5 * mass * omega * omega * z * z,
            Background::Quartic { lambda } => lambda * z.powi(4),
        }
    }
}

/// Grid geometry and physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Power of two.
    pub n_points: usize,
    pub box_length: f64,
    /// Position of the box midpoint.
    pub center: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Width of the initial Gaussian `exp(−(z−z0)²/(2σ²))`.
    pub sigma: f64,
    pub z0: f64,
    pub background: Background,
    /// Largest split-step time step.
    pub dt_max: f64,
}

impl GridSpec {
    /// Natural units (ħ = m = 1), centered free-particle box.
    pub fn natural(n_points: usize, box_length: f64, sigma: f64) -> Self {
        Self {
            n_points,
            box_length,
            center: 0.0,
            mass: 1.0,
            hbar: 1.0,
            sigma,
            z0: 0.0,
            background: Background::Free,
            dt_max: 0.02,
        }
    }

    /// Box and resolution for free fall with `|g| ≤ g_max` up to `t_max`.
    ///
    /// The packet stays at least six widths inside the box and its momentum
    /// distribution stays below three quarters of the Nyquist wavenumber.
    pub fn for_freefall(sigma: f64, g_max: f64, t_max: f64) -> Self {
        let spread = sigma * (1.0 + (t_max / (sigma * sigma)).powi(2)).sqrt();
        let fall = 0.5 * g_max.abs() * t_max * t_max;
        let half = (fall + 8.0 * spread) / 0.875;
        let k_need = g_max.abs() * t_max + 8.0 / sigma;
        let mut spec = Self::natural(0, 2.0 * half, sigma);
        spec.n_points = points_for(2.0 * half, k_need);
        spec
    }

    /// Box and resolution for a three-pulse interferometer with recoil
    /// wavenumber `k0`, pulse separation `t_sep` and gravity `g`.
    pub fn for_kc(sigma: f64, k0: f64, t_sep: f64, g: f64) -> Self {
        let total = 2.0 * t_sep;
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for i in 0..=200 {
            let s = total * i as f64 / 200.0;
            let fall = -0.5 * g * s * s;
            let upper = fall + k0 * s.min(t_sep);
            let lower = fall + k0 * (s - t_sep).max(0.0);
            lo = lo.min(upper.min(lower));
            hi = hi.max(upper.max(lower));
        }
        let spread = sigma * (1.0 + (total / (sigma * sigma)).powi(2)).sqrt();
        let half = (0.5 * (hi - lo) + 8.0 * spread) / 0.875;
        let k_need = k0 + g.abs() * total + 8.0 / sigma;
        let mut spec = Self::natural(0, 2.0 * half, sigma);
        spec.center = 0.5 * (hi + lo);
        spec.n_points = points_for(2.0 * half, k_need);
        spec.dt_max = 0.05;
        spec
    }

    pub fn with_background(mut self, background: Background) -> Self {
        self.background = background;
        self
    }

    pub fn with_points(mut self, n_points: usize) -> Self {
        self.n_points = n_points;
        self
    }

    pub fn with_dt(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }
}

fn points_for(length: f64, k_need: f64) -> usize {
    let k_nyq = k_need / 0.75;
    let dx = PI / k_nyq;
    ((length / dx).ceil() as usize).next_power_of_two().max(64)
}

/// Discretized free-fall type model `H = p²/2m + V_bg(z) + m·g·z`.
#[derive(Clone)]
pub struct GridModel {
    spec: GridSpec,
    dx: f64,
    z: Vec<f64>,
    k: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GridModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridModel").field("spec", &self.spec).finish()
    }
}

/// Fraction of the box on each side that must stay empty.
const EDGE_FRACTION: usize = 16;
/// Weight allowed in the edge bands and above 3/4 of the Nyquist wavenumber.
pub(crate) const TAIL_TOL: f64 = 1e-10;

impl GridModel {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.n_points < 16 || !spec.n_points.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "n_points",
                value: spec.n_points as f64,
                reason: "must be a power of two >= 16",
            });
        }
        require_positive("box_length", spec.box_length)?;
        require_positive("mass", spec.mass)?;
        require_positive("hbar", spec.hbar)?;
        require_positive("sigma", spec.sigma)?;
        require_positive("dt_max", spec.dt_max)?;
        let n = spec.n_points;
        let dx = spec.box_length / n as f64;
        let z = (0..n)
            .map(|j| spec.center + (j as f64 - (n / 2) as f64) * dx)
            .collect();
        let dk = 2.0 * PI / spec.box_length;
        let k = (0..n)
            .map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            spec,
            dx,
            z,
            k,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn positions(&self) -> &[f64] {
        &self.z
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }

    fn potential(&self, z: f64, g: f64) -> f64 {
        self.spec.background.potential(z, self.spec.mass) + self.spec.mass * g * z
    }

    pub(crate) fn forward(&self, buf: &mut [C64]) {
        self.fft.process(buf);
    }

    pub(crate) fn inverse(&self, buf: &mut [C64]) {
        self.ifft.process(buf);
        let s = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|x| *x *= s);
    }

    /// Free-particle kinetic propagator `exp(−i·ħk²·t/2m)` applied exactly.
    pub fn kinetic(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let c = self.spec.hbar / (2.0 * self.spec.mass);
        self.in_momentum(psi, |k| C64::from_polar(1.0, -c * k * k * t))
    }

    /// Applies a momentum-space multiplier `f(k)`.
    pub fn in_momentum(&self, psi: &[C64], f: impl Fn(f64) -> C64) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        buf.iter_mut().zip(&self.k).for_each(|(x, &k)| *x *= f(k));
        self.inverse(&mut buf);
        buf
    }

    /// `exp(−i(a·z + b·p)/ħ)` split symmetrically, which is exact because
    /// `[z, p]` is a c-number.
    pub fn displacement(&self, psi: &[C64], a: f64, b: f64) -> Vec<C64> {
        let h = self.spec.hbar;
        let half: Vec<C64> = self
            .z
            .iter()
            .map(|&z| C64::from_polar(1.0, -0.5 * a * z / h))
            .collect();
        let mut buf: Vec<C64> = psi.iter().zip(&half).map(|(x, p)| x * p).collect();
        buf = self.in_momentum(&buf, |k| C64::from_polar(1.0, -b * k));
        buf.iter_mut().zip(&half).for_each(|(x, p)| *x *= p);
        buf
    }

    pub fn mean_position(&self, psi: &[C64]) -> f64 {
        psi.iter().zip(&self.z).map(|(x, z)| x.norm_sqr() * z).sum::<f64>() / norm_sq(psi)
    }

    pub fn momentum_moments(&self, psi: &[C64]) -> (f64, f64) {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let total: f64 = norm_sq(&buf);
        let h = self.spec.hbar;
        let m1: f64 = buf.iter().zip(&self.k).map(|(x, k)| x.norm_sqr() * h * k).sum::<f64>() / total;
        let m2: f64 = buf
            .iter()
            .zip(&self.k)
            .map(|(x, k)| x.norm_sqr() * (h * k).powi(2))
            .sum::<f64>()
            / total;
        (m1, m2 - m1 * m1)
    }

    /// Gaussian `exp(−(z−z0)²/(2σ²) + i·p0·(z−z0)/ħ)` sampled on the grid.
    pub fn gaussian(&self, z0: f64, p0: f64) -> Vec<C64> {
        let s = self.spec.sigma;
        let mut v: Vec<C64> = self
            .z
            .iter()
            .map(|&z| {
                let x = z - z0;
                C64::from_polar((-x * x / (2.0 * s * s)).exp(), p0 * x / self.spec.hbar)
            })
            .collect();
        normalize(&mut v);
        v
    }

    /// Largest weight found in the box edges or the upper momentum band.
    pub fn tail_weight(&self, psi: &[C64]) -> (f64, f64) {
        let n = psi.len();
        let band = n / EDGE_FRACTION;
        let total = norm_sq(psi);
        let edge: f64 = psi[..band].iter().chain(&psi[n - band..]).map(|x| x.norm_sqr()).sum();
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let ktot = norm_sq(&buf);
        let cut = 0.75 * self.nyquist();
        let high: f64 = buf
            .iter()
            .zip(&self.k)
            .filter(|(_, k)| k.abs() > cut)
            .map(|(x, _)| x.norm_sqr())
            .sum();
        (edge / total, high / ktot)
    }

    /// Dense Hamiltonian `H(g)/ħ` (real symmetric).
    pub fn dense_hamiltonian(&self, g: f64) -> Result<DMatrix<f64>> {
        let n = self.spec.n_points;
        if n > 512 {
            return Err(Error::GridUnderResolved(format!(
                "dense operators limited to 512 points, grid has {n}"
            )));
        }
        let mut kin: Vec<C64> = self.k.iter().map(|k| C64::new(k * k, 0.0)).collect();
        self.inverse(&mut kin);
        let c = self.spec.hbar / (2.0 * self.spec.mass);
        let mut h = DMatrix::from_fn(n, n, |i, j| c * kin[(i + n - j) % n].re);
        for i in 0..n {
            h[(i, i)] += self.potential(self.z[i], g) / self.spec.hbar;
        }
        Ok(h)
    }

    /// Orthonormal Hermite functions of width `sigma` centred on the initial
    /// packet, used to project operator identities away from the box edges.
    pub fn hermite_basis(&self, count: usize) -> DMatrix<f64> {
        let n = self.spec.n_points;
        let w = self.spec.sigma;
        let mut m = DMatrix::zeros(n, count);
        for (i, &z) in self.z.iter().enumerate() {
            let x = (z - self.spec.z0) / w;
            let env = (-0.5 * x * x).exp();
            let mut prev = 0.0;
            let mut cur = env;
            for j in 0..count {
                m[(i, j)] = cur;
                let next = (2.0f64 / (j as f64 + 1.0)).sqrt() * x * cur
                    - (j as f64 / (j as f64 + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
        }
        m.qr().q()
    }

    /// Dense operator sector for identity checks at gravity `g`.
    pub fn dense_sector(&self, g: f64, basis: usize) -> Result<DenseSector> {
        let h = self.dense_hamiltonian(g)?;
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.z));
        DenseSector::new(h, z, self.hermite_basis(basis))
    }
}

/// Split-step propagator at fixed gravity.
pub struct GridPropagator<'a> {
    model: &'a GridModel,
    g: f64,
}

impl Propagator for GridPropagator<'_> {
    fn evolve_steps(&self, psi: &[C64], t: f64, steps: usize) -> Vec<C64> {
        if t == 0.0 {
            return psi.to_vec();
        }
        let m = self.model;
        let steps = steps.max(1);
        let dt = t / steps as f64;
        let h = m.spec.hbar;
        let half: Vec<C64> = m
            .z
            .iter()
            .map(|&z| C64::from_polar(1.0, -0.5 * m.potential(z, self.g) * dt / h))
            .collect();
        let full: Vec<C64> = half.iter().map(|x| x * x).collect();
        let c = h / (2.0 * m.spec.mass);
        let scale = 1.0 / psi.len() as f64;
        let kin: Vec<C64> = m
            .k
            .iter()
            .map(|k| C64::from_polar(scale, -c * k * k * dt))
            .collect();
        let mut buf: Vec<C64> = psi.iter().zip(&half).map(|(x, p)| x * p).collect();
        let mut scratch = vec![C64::new(0.0, 0.0); m.fft.get_inplace_scratch_len()];
        for i in 0..steps {
            m.fft.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().zip(&kin).for_each(|(x, p)| *x *= p);
            m.ifft.process_with_scratch(&mut buf, &mut scratch);
            let pot = if i + 1 == steps { &half } else { &full };
            buf.iter_mut().zip(pot).for_each(|(x, p)| *x *= p);
        }
        buf
    }
}

impl OracleModel for GridModel {
    fn dim(&self) -> usize {
        self.spec.n_points
    }

    fn units(&self) -> UnitSystem {
        if self.spec.hbar == 1.0 && self.spec.mass == 1.0 {
            UnitSystem::Natural
        } else {
            UnitSystem::Si
        }
    }

    fn initial_state(&self) -> Vec<C64> {
        self.gaussian(self.spec.z0, 0.0)
    }

    fn propagator(&self, g: f64) -> Result<Box<dyn Propagator + '_>> {
        Ok(Box::new(GridPropagator { model: self, g }))
    }

    fn steps_for(&self, t: f64) -> usize {
        ((t.abs() / self.spec.dt_max).ceil() as usize).max(1)
    }

    fn apply_hamiltonian(&self, psi: &[C64], g: f64) -> Vec<C64> {
        let c = self.spec.hbar / (2.0 * self.spec.mass);
        let mut out = self.in_momentum(psi, |k| C64::new(c * k * k, 0.0));
        out.iter_mut()
            .zip(psi.iter().zip(&self.z))
            .for_each(|(o, (x, &z))| *o += x * (self.potential(z, g) / self.spec.hbar));
        out
    }

    fn apply_coupling(&self, psi: &[C64]) -> Vec<C64> {
        let c = self.spec.mass / self.spec.hbar;
        psi.iter().zip(&self.z).map(|(x, z)| x * (c * z)).collect()
    }

    fn check_state(&self, psi: &[C64]) -> Result<()> {
        let (edge, high) = self.tail_weight(psi);
        if edge > TAIL_TOL || high > TAIL_TOL {
            return Err(Error::GridUnderResolved(format!(
                "edge weight {edge:e}, high-wavenumber weight {high:e} (limit {TAIL_TOL:e})"
            )));
        }
        Ok(())
    }
}
