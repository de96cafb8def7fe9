//! Gabor frame operators, Janssen's representation, the Heisenberg module
//! inner products and the twisted sequence algebras over `Λ` and `Λ°`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::phase_space::{cocycle, half_phase, root_of_unity, CocycleKind, FiniteLattice, PhasePoint};
use crate::signals::{tf_shift, Model, Signal};

/// Which side of the duality a sequence lives on. Sequences on an adjoint
/// lattice carry the point weight `s(Λ°)` in norms, products and the
/// integrated representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Lattice,
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSequence {
    lattice: FiniteLattice,
    #[serde(default)]
    domain: Domain,
    #[serde(with = "complex_pairs")]
    values: Vec<Complex64>,
}

pub(crate) mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl CoefficientSequence {
    pub fn new(lattice: FiniteLattice, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.point_count() {
            return Err(Error::DimensionMismatch { expected: lattice.point_count(), found: values.len() });
        }
        Ok(CoefficientSequence { lattice, domain, values })
    }

    pub fn zeros(lattice: FiniteLattice, domain: Domain) -> Self {
        CoefficientSequence { lattice, domain, values: vec![Complex64::new(0.0, 0.0); lattice.point_count()] }
    }

    pub fn delta(lattice: FiniteLattice, domain: Domain, at: PhasePoint) -> Result<Self> {
        let mut s = CoefficientSequence::zeros(lattice, domain);
        let i = lattice.index_of(at).ok_or(Error::LatticeMismatch)?;
        s.values[i] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_fn(lattice: FiniteLattice, domain: Domain, f: impl FnMut(PhasePoint) -> Complex64) -> Self {
        CoefficientSequence { lattice, domain, values: lattice.points().into_iter().map(f).collect() }
    }

    pub fn lattice(&self) -> FiniteLattice {
        self.lattice
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn points(&self) -> Vec<PhasePoint> {
        self.lattice.points()
    }

    /// Value at `z`, zero off the lattice.
    pub fn get(&self, z: PhasePoint) -> Complex64 {
        self.lattice.index_of(z).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// Per-point measure: counting on `Λ`, `s(Λ°)` on an adjoint lattice.
    pub fn weight(&self) -> f64 {
        match self.domain {
            Domain::Lattice => 1.0,
            Domain::Adjoint => self.lattice.covolume_f64(),
        }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        (self.weight() * self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CoefficientSequence { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn max_abs_diff(&self, other: &CoefficientSequence) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn check_window(g: &Signal, lattice: &FiniteLattice) -> Result<usize> {
    let l = g.model().finite_order()?;
    if l != lattice.order() {
        return Err(Error::DimensionMismatch { expected: lattice.order(), found: l });
    }
    Ok(l)
}

/// `S_{g,h,Λ} f = sum_λ V_g f(λ) π(λ) h`, assembled entrywise as
/// `S[t, u] = (L/b) [t - u ∈ (L/b) Z] sum_{m ∈ a Z} h[t - m] conj(g[u - m])`.
pub fn frame_operator(g: &Signal, h: &Signal, lattice: &FiniteLattice) -> Result<Operator> {
    g.model().ensure_same(&h.model())?;
    let l = check_window(g, lattice)?;
    let (a, b) = (lattice.a(), lattice.b());
    let step = l / b;
    let (gv, hv) = (g.as_slice(), h.as_slice());
    let mut matrix = DMatrix::zeros(l, l);
    for t in 0..l {
        for k in 0..b {
            let u = (t + k * step) % l;
            let mut acc = Complex64::new(0.0, 0.0);
            for m in (0..l).step_by(a) {
                acc += hv[(t + l - m) % l] * gv[(u + l - m) % l].conj();
            }
            matrix[(t, u)] = acc * step as f64;
        }
    }
    Operator::new(g.model(), matrix)
}

/// `sum_i S_{g_i, h_i, Λ}`.
pub fn multiwindow_frame_operator(pairs: &[(Signal, Signal)], lattice: &FiniteLattice) -> Result<Operator> {
    let (first, rest) = pairs.split_first().ok_or(Error::EmptyList)?;
    let mut acc = frame_operator(&first.0, &first.1, lattice)?;
    for (g, h) in rest {
        acc = acc.add(&frame_operator(g, h, lattice)?)?;
    }
    Ok(acc)
}

/// Extreme eigenvalues of `S_{g,g,Λ}`.
pub fn frame_bounds(g: &Signal, lattice: &FiniteLattice) -> Result<(f64, f64)> {
    let s = frame_operator(g, g, lattice)?;
    let eig = s.into_matrix().symmetric_eigen().eigenvalues;
    let lower = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let upper = eig.iter().copied().fold(0.0, f64::max);
    Ok((lower, upper))
}

pub const FRAME_TOLERANCE: f64 = 1e-9;

/// The canonical dual window `S_{g,g,Λ}^{-1} g`.
pub fn dual_window(g: &Signal, lattice: &FiniteLattice) -> Result<Signal> {
    let (lower, upper) = frame_bounds(g, lattice)?;
    if upper == 0.0 || lower <= FRAME_TOLERANCE * upper {
        return Err(Error::NotAFrame { lower, upper });
    }
    let s = frame_operator(g, g, lattice)?;
    let solved = s.into_matrix().lu().solve(g.values()).ok_or(Error::NotAFrame { lower, upper })?;
    Signal::from_vector(g.model(), solved)
}

/// `(1/s) sum_{λ° ∈ Λ°} <h, π(λ°) g> π(λ°)`.
pub fn janssen_operator(g: &Signal, h: &Signal, lattice: &FiniteLattice) -> Result<Operator> {
    g.model().ensure_same(&h.model())?;
    let l = check_window(g, lattice)?;
    let scale = 1.0 / lattice.covolume_f64();
    let mut acc = Operator::zeros(g.model());
    for p in lattice.adjoint().points() {
        let w = h.inner(&tf_shift(p, g)?);
        if w.norm() != 0.0 {
            acc = acc.add(&Operator::tf_shift(p, l).scale(w * scale))?;
        }
    }
    Ok(acc)
}

/// `λ -> <f, π(λ) g>`.
pub fn module_inner_left(f: &Signal, g: &Signal, lattice: &FiniteLattice) -> Result<CoefficientSequence> {
    f.model().ensure_same(&g.model())?;
    check_window(f, lattice)?;
    let mut values = Vec::with_capacity(lattice.point_count());
    for p in lattice.points() {
        values.push(f.inner(&tf_shift(p, g)?));
    }
    CoefficientSequence::new(*lattice, Domain::Lattice, values)
}

/// `λ° -> <g, π(λ°)^* f>` on the adjoint lattice.
pub fn module_inner_right(f: &Signal, g: &Signal, lattice: &FiniteLattice) -> Result<CoefficientSequence> {
    f.model().ensure_same(&g.model())?;
    check_window(f, lattice)?;
    let adj = lattice.adjoint();
    let mut values = Vec::with_capacity(adj.point_count());
    for p in adj.points() {
        // π(λ°)^* = e^{-2πi mn/L} π(-λ°)
        let shifted = tf_shift(p.neg(adj.order()), f)?.scale(root_of_unity(-p.product(), adj.order()));
        values.push(g.inner(&shifted));
    }
    CoefficientSequence::new(adj, Domain::Adjoint, values)
}

/// `(a ♮_c b)(λ) = w sum_μ a(μ) b(λ - μ) c(μ, λ - μ)` with the point weight `w`.
pub fn twisted_convolution(
    a: &CoefficientSequence,
    b: &CoefficientSequence,
    kind: CocycleKind,
) -> Result<CoefficientSequence> {
    if a.lattice != b.lattice || a.domain != b.domain {
        return Err(Error::LatticeMismatch);
    }
    let l = a.lattice.order();
    let pts = a.points();
    let mut values = Vec::with_capacity(pts.len());
    for &lam in &pts {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &mu) in pts.iter().enumerate() {
            if a.values[i].norm() == 0.0 {
                continue;
            }
            let rest = lam.sub(mu, l);
            acc += a.values[i] * b.get(rest) * cocycle(kind, mu, rest, l)?;
        }
        values.push(acc * a.weight());
    }
    CoefficientSequence::new(a.lattice, a.domain, values)
}

/// `a^*(λ) = c(λ, λ) conj(a(-λ))`.
pub fn twisted_involution(a: &CoefficientSequence, kind: CocycleKind) -> Result<CoefficientSequence> {
    let l = a.lattice.order();
    let mut values = Vec::with_capacity(a.values.len());
    for p in a.points() {
        values.push(cocycle(kind, p, p, l)? * a.get(p.neg(l)).conj());
    }
    CoefficientSequence::new(a.lattice, a.domain, values)
}

/// `sum_λ a(λ) π(λ)` on a lattice, `s(Λ°) sum_λ° b(λ°) π(λ°)^*` on an adjoint lattice.
pub fn integrated_representation(a: &CoefficientSequence) -> Operator {
    let l = a.lattice.order();
    let mut acc = Operator::zeros(Model::finite(l));
    for (p, &v) in a.points().into_iter().zip(&a.values) {
        if v.norm() == 0.0 {
            continue;
        }
        let shift = Operator::tf_shift(p, l);
        let term = match a.domain {
            Domain::Lattice => shift.scale(v),
            Domain::Adjoint => shift.adjoint().scale(v * a.weight()),
        };
        acc = acc.add(&term).expect("same model");
    }
    acc
}

/// `ρ(λ°) = conj(τ(λ°)) e^{2πi mn/L}` where `τ` is the half phase; this is the
/// chirp for odd orders.
pub fn rho_phase(z: PhasePoint, order: usize) -> Complex64 {
    half_phase(z, order).conj() * root_of_unity(z.product(), order)
}

/// `ρ̃(b)(λ°) = b(-λ°) ρ(λ°)`.
pub fn rho_tilde(b: &CoefficientSequence) -> CoefficientSequence {
    let l = b.lattice.order();
    CoefficientSequence::from_fn(b.lattice, b.domain, |p| b.get(p.neg(l)) * rho_phase(p, l))
}

pub fn rho_tilde_inverse(b: &CoefficientSequence) -> CoefficientSequence {
    let l = b.lattice.order();
    CoefficientSequence::from_fn(b.lattice, b.domain, |p| {
        let q = p.neg(l);
        b.get(q) / rho_phase(q, l)
    })
}

/// `‖S_{g,g,Λ}‖_op^{1/2}`.
pub fn heisenberg_norm(g: &Signal, lattice: &FiniteLattice) -> Result<f64> {
    Ok(frame_operator(g, g, lattice)?.op_norm().sqrt())
}
