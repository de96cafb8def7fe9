//! Sampled model of `L²(R)`: one period of `N` samples at spacing `Δ`, with
//! `Δ`-weighted inner products. Lattices `αZ x βZ` that land on grid nodes
//! reduce to finite lattices `(N, α/Δ, βNΔ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{frame_operator, janssen_operator};
use crate::operators::Operator;
use crate::phase_space::FiniteLattice;
use crate::signals::{Model, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledGrid {
    points: usize,
    spacing: f64,
}

impl SampledGrid {
    pub fn new(points: usize, spacing: f64) -> Result<Self> {
        if points == 0 || points % 2 == 1 {
            return Err(Error::InvalidGrid(format!("point count {points} must be even and positive")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        Ok(SampledGrid { points, spacing })
    }

    /// Grid of `points` samples covering `[-extent/2, extent/2)`.
    pub fn with_extent(points: usize, extent: f64) -> Result<Self> {
        SampledGrid::new(points, extent / points as f64)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extent(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    pub fn frequency_spacing(&self) -> f64 {
        1.0 / self.extent()
    }

    pub fn model(&self) -> Model {
        Model::Sampled { points: self.points, spacing: self.spacing }
    }

    /// `t_k = (k - N/2) Δ`.
    pub fn time(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.spacing
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Signal {
        Signal::new(self.model(), (0..self.points).map(|k| f(self.time(k))).collect()).expect("grid length")
    }
}

/// `2^{1/4} e^{-π t²}` on the grid, renormalised to unit `Δ`-weighted norm.
pub fn gaussian_window(grid: &SampledGrid) -> Signal {
    let c = 2f64.powf(0.25);
    grid.sample(|t| Complex64::new(c * (-PI * t * t).exp(), 0.0)).normalized()
}

fn integer_ratio(x: f64, what: &'static str) -> Result<usize> {
    let r = x.round();
    if r < 1.0 || (x - r).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::OffGridLattice { what, value: x });
    }
    Ok(r as usize)
}

/// The finite lattice `(N, α/Δ, βNΔ)` carrying `αZ x βZ` on the grid.
pub fn grid_lattice(alpha: f64, beta: f64, grid: &SampledGrid) -> Result<FiniteLattice> {
    let n = grid.points;
    let a = integer_ratio(alpha / grid.spacing, "alpha / spacing")?;
    let b = integer_ratio(beta * grid.extent(), "beta * extent")?;
    if n % a != 0 {
        return Err(Error::OffGridLattice { what: "alpha / spacing (must divide N)", value: a as f64 });
    }
    if n % b != 0 {
        return Err(Error::OffGridLattice { what: "beta * extent (must divide N)", value: b as f64 });
    }
    FiniteLattice::new(n, a, b)
}

fn on_grid(s: &Signal, grid: &SampledGrid) -> Result<Signal> {
    s.model().ensure_same(&grid.model())?;
    Signal::new(Model::finite(grid.points), s.as_slice().to_vec())
}

fn sampled(op: Operator, grid: &SampledGrid) -> Operator {
    let m = op.into_matrix() * Complex64::new(grid.spacing, 0.0);
    Operator::new(grid.model(), m).expect("grid dimension")
}

/// `sum_λ <·, π(λ) g>_Δ π(λ) h` over one period of `αZ x βZ`.
pub fn sampled_frame_operator(g: &Signal, h: &Signal, alpha: f64, beta: f64, grid: &SampledGrid) -> Result<Operator> {
    let lattice = grid_lattice(alpha, beta, grid)?;
    Ok(sampled(frame_operator(&on_grid(g, grid)?, &on_grid(h, grid)?, &lattice)?, grid))
}

/// `(1/(αβ)) sum_{λ°} <h, π(λ°) g>_Δ π(λ°)` over one period of `(1/β)Z x (1/α)Z`.
pub fn sampled_janssen_operator(g: &Signal, h: &Signal, alpha: f64, beta: f64, grid: &SampledGrid) -> Result<Operator> {
    let lattice = grid_lattice(alpha, beta, grid)?;
    Ok(sampled(janssen_operator(&on_grid(g, grid)?, &on_grid(h, grid)?, &lattice)?, grid))
}

pub fn sampled_janssen_residual(g: &Signal, h: &Signal, alpha: f64, beta: f64, grid: &SampledGrid) -> Result<f64> {
    let direct = sampled_frame_operator(g, h, alpha, beta, grid)?;
    Ok(direct.op_distance(&sampled_janssen_operator(g, h, alpha, beta, grid)?))
}

pub fn sampled_frame_bounds(g: &Signal, alpha: f64, beta: f64, grid: &SampledGrid) -> Result<(f64, f64)> {
    let s = sampled_frame_operator(g, g, alpha, beta, grid)?;
    let eig = s.into_matrix().symmetric_eigen().eigenvalues;
    Ok((eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0), eig.iter().copied().fold(0.0, f64::max)))
}

fn gaussian2(x: f64, w: f64) -> f64 {
    (-PI * (x * x + w * w)).exp()
}

/// Symplectic Poisson summation for `F(x, ω) = e^{-π(x² + ω²)}` and `Λ = Z x Z`:
/// the periodisation against `sum_{λ°} F_Ω F(λ°) e^{2πi Ω(λ°, z)}`, with `F_Ω F`
/// evaluated as a Riemann sum on the `N x N` phase-space grid.
pub fn poisson_residual(grid: &SampledGrid) -> f64 {
    let n = grid.points;
    let d = grid.spacing;
    let xs: Vec<f64> = (0..n).map(|k| grid.time(k)).collect();
    let reach = (grid.extent() / 2.0).floor() as i64;
    let lattice: Vec<i64> = (-reach..reach).collect();
    // The Riemann sum is 1/Δ-periodic in the dual variable; stay inside the Nyquist band.
    let nyquist = ((0.5 / d).ceil() as i64 - 1).min(reach);
    let dual: Vec<i64> = (-nyquist..=nyquist).collect();
    // hat(x°, ω°) = sum_{j,k} F(x_j, ω_k) e^{-2πi (x_j ω° - x° ω_k)} Δ²
    let mut hat = vec![vec![Complex64::new(0.0, 0.0); dual.len()]; dual.len()];
    for (iw, &w0) in dual.iter().enumerate() {
        let partial: Vec<Complex64> = xs
            .iter()
            .map(|&wk| {
                xs.iter()
                    .map(|&xj| Complex64::from_polar(gaussian2(xj, wk), -2.0 * PI * xj * w0 as f64))
                    .sum::<Complex64>()
            })
            .collect();
        for (ix, &x0) in dual.iter().enumerate() {
            hat[ix][iw] = partial
                .iter()
                .zip(&xs)
                .map(|(p, &wk)| p * Complex64::from_polar(1.0, 2.0 * PI * x0 as f64 * wk))
                .sum::<Complex64>()
                * d
                * d;
        }
    }
    let probes: Vec<f64> = (0..8).map(|k| k as f64 / 8.0).collect();
    let mut worst = 0.0f64;
    for &x in &probes {
        for &w in &probes {
            let lhs: f64 = lattice
                .iter()
                .flat_map(|&p| lattice.iter().map(move |&q| gaussian2(x + p as f64, w + q as f64)))
                .sum();
            let mut rhs = Complex64::new(0.0, 0.0);
            for (ix, &x0) in dual.iter().enumerate() {
                for (iw, &w0) in dual.iter().enumerate() {
                    // Ω(λ°, z) = x w° - x° w
                    let omega = x * w0 as f64 - x0 as f64 * w;
                    rhs += hat[ix][iw] * Complex64::from_polar(1.0, 2.0 * PI * omega);
                }
            }
            worst = worst.max((rhs - lhs).norm());
        }
    }
    worst
}

/// Sampled `V_φ φ` against `e^{-πi x ω} e^{-π(x² + ω²)/2}` on probe points of
/// `[-2, 2]²`.
pub fn moyal_residual(grid: &SampledGrid) -> f64 {
    let g = gaussian_window(grid);
    let gv = g.as_slice();
    let n = grid.points;
    let mut worst = 0.0f64;
    for i in -4i64..=4 {
        for j in -4i64..=4 {
            let (x0, w0) = (i as f64 / 2.0, j as f64 / 2.0);
            let shift = (x0 / grid.spacing).round() as i64;
            let mut v = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let src = (k as i64 - shift).rem_euclid(n as i64) as usize;
                v += gv[k] * gv[src].conj() * Complex64::from_polar(1.0, -2.0 * PI * w0 * grid.time(k));
            }
            v *= grid.spacing;
            let exact = Complex64::from_polar((-PI * (x0 * x0 + w0 * w0) / 2.0).exp(), -PI * x0 * w0);
            worst = worst.max((v - exact).norm());
        }
    }
    worst
}

/// STFT analysis and synthesis over the full grid phase space with FFTs:
/// `f = ‖g‖⁻² ∫ V_g f(z) π(z) g dz`.
pub fn reconstruction_residual(grid: &SampledGrid) -> f64 {
    let n = grid.points;
    let g = gaussian_window(grid);
    let f = grid.sample(|t| {
        Complex64::new((-PI * (t - 0.75).powi(2)).exp(), 0.0) * Complex64::from_polar(1.0, 2.0 * PI * 1.5 * t)
            + Complex64::new(0.5 * (-PI * 2.0 * (t + 1.0).powi(2)).exp(), 0.0)
    });
    let (fv, gv) = (f.as_slice(), g.as_slice());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    // e^{∓2πi ω_q t_k} = e^{∓2πi qk/N} (-1)^q
    let parity = |q: usize| if q % 2 == 0 { 1.0 } else { -1.0 };
    let shifted = |m: usize, k: usize| gv[(k + n - m) % n];
    let stft: Vec<Vec<Complex64>> = (0..n)
        .map(|m| {
            let mut row: Vec<Complex64> = (0..n).map(|k| fv[k] * shifted(m, k).conj()).collect();
            fwd.process(&mut row);
            row.iter().enumerate().map(|(q, v)| v * grid.spacing * parity(q)).collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (m, row) in stft.iter().enumerate() {
        let mut synth: Vec<Complex64> = row.iter().enumerate().map(|(q, v)| v * parity(q)).collect();
        inv.process(&mut synth);
        for (k, s) in synth.iter().enumerate() {
            out[k] += s * shifted(m, k);
        }
    }
    // dx dω = Δ · 1/(NΔ)
    let scale = grid.spacing * grid.frequency_spacing() / g.norm().powi(2);
    out.iter().zip(fv).map(|(o, x)| (o * scale - x).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Poisson,
    Moyal,
    Janssen,
    Reconstruction,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Poisson => "poisson",
            Identity::Moyal => "moyal",
            Identity::Janssen => "janssen",
            Identity::Reconstruction => "reconstruction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub extent: f64,
    pub ladder: Vec<usize>,
    pub identities: Vec<Identity>,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub poisson: f64,
    pub moyal: f64,
    pub janssen: f64,
    pub reconstruction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { poisson: 1e-8, moyal: 1e-8, janssen: 1e-6, reconstruction: 1e-8 }
    }
}

impl Thresholds {
    pub fn get(&self, id: Identity) -> f64 {
        match id {
            Identity::Poisson => self.poisson,
            Identity::Moyal => self.moyal,
            Identity::Janssen => self.janssen,
            Identity::Reconstruction => self.reconstruction,
        }
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            extent: 16.0,
            ladder: vec![128, 256, 512],
            identities: vec![Identity::Poisson, Identity::Moyal, Identity::Janssen, Identity::Reconstruction],
            alpha: 0.5,
            beta: 0.5,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub identity: Identity,
    pub points: usize,
    pub spacing: f64,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFlag {
    pub identity: Identity,
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub trends: Vec<TrendFlag>,
}

impl ConvergenceReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed) && self.trends.iter().all(|t| t.non_increasing)
    }
}

/// Residual floor below which the ladder is treated as a plateau.
pub const PLATEAU_FLOOR: f64 = 1e-12;
pub const PLATEAU_SLACK: f64 = 1.1;

/// `next <= max(1.1 prev, floor)` at every step.
pub fn non_increasing(residuals: &[f64]) -> bool {
    residuals.windows(2).all(|w| w[1] <= (PLATEAU_SLACK * w[0]).max(PLATEAU_FLOOR))
}

pub fn identity_residual(id: Identity, grid: &SampledGrid, alpha: f64, beta: f64) -> Result<f64> {
    Ok(match id {
        Identity::Poisson => poisson_residual(grid),
        Identity::Moyal => moyal_residual(grid),
        Identity::Reconstruction => reconstruction_residual(grid),
        Identity::Janssen => {
            let g = gaussian_window(grid);
            sampled_janssen_residual(&g, &g, alpha, beta, grid)?
        }
    })
}

pub fn convergence_report(config: &ConvergenceConfig) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::default();
    for &id in &config.identities {
        let mut residuals = Vec::with_capacity(config.ladder.len());
        for &n in &config.ladder {
            let grid = SampledGrid::with_extent(n, config.extent)?;
            let residual = identity_residual(id, &grid, config.alpha, config.beta)?;
            let threshold = config.thresholds.get(id);
            report.rows.push(ConvergenceRow {
                identity: id,
                points: n,
                spacing: grid.spacing(),
                residual,
                threshold,
                passed: residual <= threshold,
            });
            residuals.push(residual);
        }
        if residuals.len() > 1 {
            report.trends.push(TrendFlag { identity: id, non_increasing: non_increasing(&residuals) });
        }
    }
    Ok(report)
}
