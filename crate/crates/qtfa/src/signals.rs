//! Signals on `Z_L`, time-frequency shifts, parity, and the phase-space
//! transforms (STFT, ambiguity, cross-Wigner, symplectic Fourier transform,
//! periodisation).

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{kappa, Constant};
use crate::error::{Error, Result};
use crate::phase_space::{all_points, chirp, half_of, root_of_unity, symplectic_form, FiniteLattice, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Finite { order: usize },
    Sampled { points: usize, spacing: f64 },
}

impl Model {
    pub fn finite(order: usize) -> Self {
        Model::Finite { order }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Model::Finite { order } => order,
            Model::Sampled { points, .. } => points,
        }
    }

    pub fn finite_order(&self) -> Result<usize> {
        match *self {
            Model::Finite { order } => Ok(order),
            other => Err(Error::ModelMismatch { left: other.to_string(), right: "finite model".into() }),
        }
    }

    pub fn ensure_same(&self, other: &Model) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ModelMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Finite { order } => write!(f, "finite(L={order})"),
            Model::Sampled { points, spacing } => write!(f, "sampled(N={points}, dt={spacing})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    model: Model,
    values: DVector<Complex64>,
}

impl Signal {
    pub fn new(model: Model, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: values.len() });
        }
        Ok(Signal { model, values: DVector::from_vec(values) })
    }

    pub fn from_vector(model: Model, values: DVector<Complex64>) -> Result<Self> {
        if values.len() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: values.len() });
        }
        Ok(Signal { model, values })
    }

    pub fn zeros(model: Model) -> Self {
        Signal { model, values: DVector::zeros(model.dim()) }
    }

    pub fn delta(model: Model, t: usize) -> Self {
        let mut s = Signal::zeros(model);
        s.values[t % model.dim()] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.values.as_slice()
    }

    pub fn into_vector(self) -> DVector<Complex64> {
        self.values
    }

    /// `<self, other>`, linear in the first slot.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        let raw: Complex64 = self.values.iter().zip(other.values.iter()).map(|(x, y)| x * y.conj()).sum();
        match self.model {
            Model::Sampled { spacing, .. } => raw * spacing,
            Model::Finite { .. } => raw,
        }
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal { model: self.model, values: &self.values * c }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.model.ensure_same(&other.model)?;
        Ok(Signal { model: self.model, values: &self.values + &other.values })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.model.ensure_same(&other.model)?;
        Ok(Signal { model: self.model, values: &self.values - &other.values })
    }

    pub fn normalized(&self) -> Signal {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(Complex64::new(1.0 / n, 0.0))
        }
    }

    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        self.values.iter().zip(other.values.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// A complex function on the `L x L` phase-space grid, row-major in `(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    order: usize,
    values: Vec<Complex64>,
}

impl PhaseFunction {
    pub fn new(order: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != order * order {
            return Err(Error::DimensionMismatch { expected: order * order, found: values.len() });
        }
        Ok(PhaseFunction { order, values })
    }

    pub fn zeros(order: usize) -> Self {
        PhaseFunction { order, values: vec![Complex64::new(0.0, 0.0); order * order] }
    }

    pub fn constant(order: usize, c: Complex64) -> Self {
        PhaseFunction { order, values: vec![c; order * order] }
    }

    pub fn delta(order: usize, z: PhasePoint) -> Self {
        let mut f = PhaseFunction::zeros(order);
        f[z] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(PhasePoint) -> Complex64) -> Self {
        PhaseFunction { order, values: all_points(order).map(&mut f).collect() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn map(&self, mut f: impl FnMut(PhasePoint, Complex64) -> Complex64) -> PhaseFunction {
        PhaseFunction::from_fn(self.order, |z| f(z, self[z]))
    }

    pub fn scale(&self, c: Complex64) -> PhaseFunction {
        PhaseFunction { order: self.order, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn mul(&self, other: &PhaseFunction) -> PhaseFunction {
        PhaseFunction {
            order: self.order,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect(),
        }
    }

    /// `z -> F(z - w)`.
    pub fn translate(&self, w: PhasePoint) -> PhaseFunction {
        let l = self.order;
        PhaseFunction::from_fn(l, |z| self[z.sub(w, l)])
    }

    /// `z -> F(-z)`.
    pub fn reflect(&self) -> PhaseFunction {
        let l = self.order;
        PhaseFunction::from_fn(l, |z| self[z.neg(l)])
    }

    /// `z -> F(k z)`.
    pub fn dilate(&self, k: i64) -> PhaseFunction {
        let l = self.order;
        PhaseFunction::from_fn(l, |z| self[z.scale(k, l)])
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &PhaseFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// Cyclic convolution `(F * G)(z) = sum_w F(w) G(z - w)`.
    pub fn convolve(&self, other: &PhaseFunction) -> PhaseFunction {
        let l = self.order;
        PhaseFunction::from_fn(l, |z| all_points(l).map(|w| self[w] * other[z.sub(w, l)]).sum())
    }
}

impl std::ops::Index<PhasePoint> for PhaseFunction {
    type Output = Complex64;
    fn index(&self, z: PhasePoint) -> &Complex64 {
        &self.values[z.index(self.order)]
    }
}

impl std::ops::IndexMut<PhasePoint> for PhaseFunction {
    fn index_mut(&mut self, z: PhasePoint) -> &mut Complex64 {
        &mut self.values[z.index(self.order)]
    }
}

/// `(pi(m, n) f)[t] = e^{2 pi i n t / L} f[t - m]`.
pub fn tf_shift(z: PhasePoint, f: &Signal) -> Result<Signal> {
    let l = f.model().finite_order()?;
    let src = f.as_slice();
    let values = (0..l)
        .map(|t| root_of_unity((z.n * t) as i64, l) * src[(t + l - z.m % l) % l])
        .collect();
    Signal::new(f.model(), values)
}

/// `(P f)[t] = f[-t]`.
pub fn parity(f: &Signal) -> Signal {
    let l = f.len();
    let src = f.as_slice();
    let values: Vec<Complex64> = (0..l).map(|t| src[(l - t) % l]).collect();
    Signal::new(f.model(), values).expect("length preserved")
}

/// `V_g f(z) = <f, pi(z) g>`.
pub fn stft(f: &Signal, g: &Signal) -> Result<PhaseFunction> {
    f.model().ensure_same(&g.model())?;
    let l = f.model().finite_order()?;
    let (fv, gv) = (f.as_slice(), g.as_slice());
    let mut out = PhaseFunction::zeros(l);
    for m in 0..l {
        let prod: Vec<Complex64> = (0..l).map(|t| fv[t] * gv[(t + l - m) % l].conj()).collect();
        for n in 0..l {
            out[PhasePoint { m, n }] =
                (0..l).map(|t| prod[t] * root_of_unity(-((n * t) as i64), l)).sum();
        }
    }
    Ok(out)
}

/// `f = (1 / (kappa_M <h, g>)) sum_z V_g f(z) pi(z) h`.
pub fn stft_reconstruct(coefficients: &PhaseFunction, g: &Signal, h: &Signal) -> Result<Signal> {
    let l = g.model().finite_order()?;
    g.model().ensure_same(&h.model())?;
    let scale = Complex64::new(kappa(Constant::Moyal, l, 1.0), 0.0) * h.inner(g);
    let mut acc = Signal::zeros(g.model());
    for z in all_points(l) {
        acc = acc.add(&tf_shift(z, h)?.scale(coefficients[z]))?;
    }
    Ok(acc.scale(scale.inv()))
}

/// `A(f, g)(z) = Ph(z) V_g f(z)`.
pub fn ambiguity(f: &Signal, g: &Signal) -> Result<PhaseFunction> {
    let l = f.model().finite_order()?;
    half_of(l).map_err(|_| Error::EvenOrderUnsupported { order: l, operation: "ambiguity function" })?;
    let v = stft(f, g)?;
    Ok(v.map(|z, x| chirp(z, l).expect("odd order") * x))
}

/// `W(f, g) = F_Omega(A(f, g))`.
pub fn cross_wigner(f: &Signal, g: &Signal) -> Result<PhaseFunction> {
    let l = f.model().finite_order()?;
    half_of(l).map_err(|_| Error::EvenOrderUnsupported { order: l, operation: "cross-Wigner distribution" })?;
    Ok(symplectic_dft(&ambiguity(f, g)?))
}

/// Right-hand side of the doubling identity:
/// `kappa_W e^{4 pi i m n / L} V_{Pg} f(2z)`.
pub fn wigner_by_doubling(f: &Signal, g: &Signal) -> Result<PhaseFunction> {
    let l = f.model().finite_order()?;
    half_of(l).map_err(|_| Error::EvenOrderUnsupported { order: l, operation: "Wigner doubling" })?;
    let v = stft(f, &parity(g))?;
    let k = kappa(Constant::WignerDoubling, l, 1.0);
    Ok(PhaseFunction::from_fn(l, |z| root_of_unity(2 * z.product(), l) * v[z.scale(2, l)] * k))
}

/// `(F_Omega F)(z) = (1/L) sum_{z'} F(z') e^{-2 pi i Omega(z, z') / L}`,
/// evaluated as two separable passes.
pub fn symplectic_dft(f: &PhaseFunction) -> PhaseFunction {
    let l = f.order();
    // Omega(z, z') = m' n - m n', so the kernel splits into e^{2 pi i m n'/L} e^{-2 pi i m' n/L}.
    let mut inner = vec![Complex64::new(0.0, 0.0); l * l];
    for mp in 0..l {
        for m in 0..l {
            inner[mp * l + m] = (0..l)
                .map(|np| f[PhasePoint { m: mp, n: np }] * root_of_unity((m * np) as i64, l))
                .sum();
        }
    }
    let scale = 1.0 / l as f64;
    PhaseFunction::from_fn(l, |z| {
        (0..l).map(|mp| inner[mp * l + z.m] * root_of_unity(-((mp * z.n) as i64), l)).sum::<Complex64>() * scale
    })
}

/// `(P_Lambda F)(z) = sum_lambda F(z - lambda)`.
pub fn periodize(f: &PhaseFunction, lattice: &FiniteLattice) -> Result<PhaseFunction> {
    let l = f.order();
    if lattice.order() != l {
        return Err(Error::DimensionMismatch { expected: l, found: lattice.order() });
    }
    let points = lattice.points();
    Ok(PhaseFunction::from_fn(l, |z| points.iter().map(|&p| f[z.sub(p, l)]).sum()))
}

/// Dual side of the symplectic Poisson summation formula:
/// `c sum_{lambda°} F_Omega(F)(lambda°) e^{2 pi i Omega(lambda°, z) / L}`.
pub fn poisson_dual_side(f: &PhaseFunction, lattice: &FiniteLattice) -> Result<PhaseFunction> {
    let l = f.order();
    if lattice.order() != l {
        return Err(Error::DimensionMismatch { expected: l, found: lattice.order() });
    }
    let hat = symplectic_dft(f);
    let adjoint = lattice.adjoint().points();
    let c = kappa(Constant::Poisson, l, lattice.covolume_f64());
    Ok(PhaseFunction::from_fn(l, |z| {
        adjoint.iter().map(|&p| hat[p] * root_of_unity(symplectic_form(p, z), l)).sum::<Complex64>() * c
    }))
}
