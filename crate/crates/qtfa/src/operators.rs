//! Operators on the finite signal space: spreading functions, the
//! Fourier-Wigner transform, Weyl symbols and quantisation, operator
//! translation and modulation, and operator convolutions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constants::{kappa, Constant};
use crate::error::{Error, Result};
use crate::phase_space::{all_points, chirp, half_of, root_of_unity, symplectic_form, PhasePoint};
use crate::signals::{symplectic_dft, Model, PhaseFunction, Signal};

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    model: Model,
    matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(model: Model, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = model.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Operator { model, matrix })
    }

    pub fn zeros(model: Model) -> Self {
        let d = model.dim();
        Operator { model, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(model: Model) -> Self {
        let d = model.dim();
        Operator { model, matrix: DMatrix::identity(d, d) }
    }

    pub fn parity(model: Model) -> Self {
        let d = model.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for t in 0..d {
            matrix[(t, (d - t) % d)] = Complex64::new(1.0, 0.0);
        }
        Operator { model, matrix }
    }

    /// The matrix of `pi(z)` on the finite model.
    pub fn tf_shift(z: PhasePoint, order: usize) -> Self {
        let mut matrix = DMatrix::zeros(order, order);
        for t in 0..order {
            matrix[(t, (t + order - z.m) % order)] = root_of_unity((z.n * t) as i64, order);
        }
        Operator { model: Model::finite(order), matrix }
    }

    /// `(u ⊗ v) w = <w, v> u`.
    pub fn outer(u: &Signal, v: &Signal) -> Result<Self> {
        u.model().ensure_same(&v.model())?;
        let mut matrix = u.values() * v.values().adjoint();
        if let Model::Sampled { spacing, .. } = u.model() {
            matrix *= Complex64::new(spacing, 0.0);
        }
        Ok(Operator { model: u.model(), matrix })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn finite_order(&self) -> Result<usize> {
        self.model.finite_order()
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        self.model.ensure_same(&f.model())?;
        Signal::from_vector(self.model, &self.matrix * f.values())
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.model.ensure_same(&other.model)?;
        Ok(Operator { model: self.model, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.model.ensure_same(&other.model)?;
        Ok(Operator { model: self.model, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.model.ensure_same(&other.model)?;
        Ok(Operator { model: self.model, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Operator { model: self.model, matrix: &self.matrix * c }
    }

    pub fn adjoint(&self) -> Operator {
        Operator { model: self.model, matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.matrix.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            return 0.0;
        }
        self.matrix.clone().singular_values().max()
    }

    /// Frobenius norm.
    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Finite dual Feichtinger norm `sup |<S f, g>| / (||f||_{M^1} ||g||_{M^1})`
    /// for the `delta_0` window, which reduces to `max |S_ij| / L`.
    pub fn mod_infinity_norm(&self) -> f64 {
        let d = self.dim() as f64;
        self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max) / d
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn op_distance(&self, other: &Operator) -> f64 {
        Operator { model: self.model, matrix: &self.matrix - &other.matrix }.op_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).iter().all(|v| v.norm() <= tol)
    }
}

fn require_odd(order: usize, operation: &'static str) -> Result<()> {
    half_of(order).map(|_| ()).map_err(|_| Error::EvenOrderUnsupported { order, operation })
}

/// `eta_S(z) = (1/L) tr(pi(z)^* S)`.
pub fn spreading(s: &Operator) -> Result<PhaseFunction> {
    let l = s.finite_order()?;
    let a = s.matrix();
    let scale = 1.0 / l as f64;
    Ok(PhaseFunction::from_fn(l, |z| {
        (0..l)
            .map(|t| root_of_unity(-((z.n * t) as i64), l) * a[(t, (t + l - z.m) % l)])
            .sum::<Complex64>()
            * scale
    }))
}

/// `S = sum_z eta(z) pi(z)`.
pub fn spreading_synthesis(eta: &PhaseFunction) -> Operator {
    let l = eta.order();
    let mut matrix = DMatrix::zeros(l, l);
    for z in all_points(l) {
        let c = eta[z];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for t in 0..l {
            matrix[(t, (t + l - z.m) % l)] += c * root_of_unity((z.n * t) as i64, l);
        }
    }
    Operator { model: Model::finite(l), matrix }
}

/// `F_W(S) = Ph * eta_S`.
pub fn fourier_wigner(s: &Operator) -> Result<PhaseFunction> {
    let l = s.finite_order()?;
    require_odd(l, "Fourier-Wigner transform")?;
    Ok(spreading(s)?.map(|z, v| chirp(z, l).expect("odd order") * v))
}

/// Inverse of [`fourier_wigner`].
pub fn fourier_wigner_synthesis(fw: &PhaseFunction) -> Result<Operator> {
    let l = fw.order();
    require_odd(l, "Fourier-Wigner synthesis")?;
    Ok(spreading_synthesis(&fw.map(|z, v| chirp(z, l).expect("odd order").conj() * v)))
}

/// `sigma_S = F_Omega(F_W(S))`.
pub fn weyl_symbol(s: &Operator) -> Result<PhaseFunction> {
    let l = s.finite_order()?;
    require_odd(l, "Weyl symbol")?;
    Ok(symplectic_dft(&fourier_wigner(s)?))
}

/// `L_sigma = spreading_synthesis(Ph^{-1} F_Omega(sigma))`.
pub fn weyl_quantize(sigma: &PhaseFunction) -> Result<Operator> {
    require_odd(sigma.order(), "Weyl quantisation")?;
    fourier_wigner_synthesis(&symplectic_dft(sigma))
}

/// `L_sigma = kappa_P sum_z sigma(z) alpha_z(P)`.
pub fn weyl_quantize_via_parity(sigma: &PhaseFunction) -> Result<Operator> {
    let l = sigma.order();
    require_odd(l, "Weyl quantisation via parity")?;
    let mut acc = DMatrix::zeros(l, l);
    for z in all_points(l) {
        let c = sigma[z];
        if c != Complex64::new(0.0, 0.0) {
            add_translated_parity(&mut acc, z, c, l);
        }
    }
    let k = kappa(Constant::ParityQuantization, l, 1.0);
    Ok(Operator { model: Model::finite(l), matrix: acc * Complex64::new(k, 0.0) })
}

/// `acc += c alpha_z(P)` using `alpha_z(P) = e^{-4 pi i m n / L} pi(2z) P`.
pub(crate) fn add_translated_parity(acc: &mut DMatrix<Complex64>, z: PhasePoint, c: Complex64, l: usize) {
    let phase = c * root_of_unity(-2 * z.product(), l);
    let (m2, n2) = ((2 * z.m) % l, (2 * z.n) % l);
    for t in 0..l {
        // (pi(2z) P)[t, s] is nonzero where -s = t - 2m.
        let s = (2 * l + m2 - t) % l;
        acc[(t, s)] += phase * root_of_unity((n2 * t) as i64, l);
    }
}

/// `alpha_z(P)` as an operator.
pub fn translated_parity(z: PhasePoint, order: usize) -> Operator {
    let mut m = DMatrix::zeros(order, order);
    add_translated_parity(&mut m, z, Complex64::new(1.0, 0.0), order);
    Operator { model: Model::finite(order), matrix: m }
}

/// `(1/L) sum_{z'} e^{2 pi i Omega(z, z') / L} Ph(z')^{-1} pi(z')`, which equals
/// `kappa_sp alpha_z(P)`.
pub fn symplectic_parity(z: PhasePoint, order: usize) -> Result<Operator> {
    require_odd(order, "symplectic parity")?;
    let eta = PhaseFunction::from_fn(order, |w| {
        root_of_unity(symplectic_form(z, w), order) * chirp(w, order).expect("odd order").conj()
            / order as f64
    });
    Ok(spreading_synthesis(&eta))
}

/// `alpha_z(S) = pi(z) S pi(z)^*`.
pub fn translate_op(z: PhasePoint, s: &Operator) -> Result<Operator> {
    let l = s.finite_order()?;
    let a = s.matrix();
    let matrix = DMatrix::from_fn(l, l, |t, u| {
        root_of_unity(z.n as i64 * (t as i64 - u as i64), l) * a[((t + l - z.m) % l, (u + l - z.m) % l)]
    });
    Ok(Operator { model: s.model(), matrix })
}

/// The unimodular phase in `beta_w`: `e^{-2 pi i h^2 w_1 w_2 / L}`.
pub fn modulation_phase(w: PhasePoint, order: usize) -> Result<Complex64> {
    let h = half_of(order)? % order as i64;
    Ok(root_of_unity(-(h * h % order as i64) * w.product(), order))
}

/// `beta_w(S) = phi(w) pi(h w) S pi(h w)`.
pub fn modulate_op(w: PhasePoint, s: &Operator) -> Result<Operator> {
    let l = s.finite_order()?;
    require_odd(l, "operator modulation")?;
    let h = half_of(l)?;
    let u = w.scale(h, l);
    let phi = modulation_phase(w, l)?;
    let a = s.matrix();
    let matrix = DMatrix::from_fn(l, l, |t, v| {
        let src_row = (t + l - u.m) % l;
        let src_col = (v + u.m) % l;
        phi * root_of_unity((u.n * t) as i64, l) * a[(src_row, src_col)] * root_of_unity((u.n * src_col) as i64, l)
    });
    Ok(Operator { model: s.model(), matrix })
}

/// `M_w F(z) = e^{-2 pi i Omega(z, w) / L} F(z)`, the symbol-side counterpart
/// of [`modulate_op`].
pub fn symplectic_modulation(w: PhasePoint, f: &PhaseFunction) -> PhaseFunction {
    let l = f.order();
    f.map(|z, v| root_of_unity(-symplectic_form(z, w), l) * v)
}

/// `S -> P S P`.
pub fn reflect_op(s: &Operator) -> Operator {
    let l = s.dim();
    let a = s.matrix();
    let matrix = DMatrix::from_fn(l, l, |t, u| a[((l - t) % l, (l - u) % l)]);
    Operator { model: s.model(), matrix }
}

/// `(S ⋆ T)(z) = tr(S alpha_z(reflect(T)))`.
pub fn conv_op_op(s: &Operator, t: &Operator) -> Result<PhaseFunction> {
    let l = s.finite_order()?;
    s.model().ensure_same(&t.model())?;
    let r = reflect_op(t);
    let (a, b) = (s.matrix(), r.matrix());
    Ok(PhaseFunction::from_fn(l, |z| {
        // tr(S alpha_z(R)) = sum_{u,v} S[u,v] e^{2 pi i n (v-u)/L} R[v-m, u-m]
        let mut acc = Complex64::new(0.0, 0.0);
        for u in 0..l {
            for v in 0..l {
                let rv = b[((v + l - z.m) % l, (u + l - z.m) % l)];
                if rv != Complex64::new(0.0, 0.0) {
                    acc += a[(u, v)] * rv * root_of_unity(z.n as i64 * (v as i64 - u as i64), l);
                }
            }
        }
        acc
    }))
}

/// `f ⋆ S = sum_z f(z) alpha_z(S)`.
pub fn conv_fn_op(f: &PhaseFunction, s: &Operator) -> Result<Operator> {
    let l = s.finite_order()?;
    if f.order() != l {
        return Err(Error::DimensionMismatch { expected: l, found: f.order() });
    }
    let mut acc = Operator::zeros(s.model());
    for z in all_points(l) {
        if f[z] != Complex64::new(0.0, 0.0) {
            acc = acc.add(&translate_op(z, s)?.scale(f[z]))?;
        }
    }
    Ok(acc)
}

/// `<S f, g>` through the Weyl pairing `(kappa_sigma / L) sum sigma_S conj(W(g, f))`.
pub fn weyl_pairing(s: &Operator, f: &Signal, g: &Signal) -> Result<Complex64> {
    let l = s.finite_order()?;
    let sigma = weyl_symbol(s)?;
    let w = crate::signals::cross_wigner(g, f)?;
    let raw: Complex64 = sigma.values().iter().zip(w.values()).map(|(a, b)| a * b.conj()).sum();
    Ok(raw * kappa(Constant::WeylPairing, l, 1.0) / l as f64)
}
