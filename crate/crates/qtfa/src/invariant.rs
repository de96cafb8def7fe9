//! Translation- and modulation-invariant operators over a lattice: synthesis
//! and analysis, periodisation, the composition calculus, the `S -> SP`
//! correspondence, frame-operator decompositions and sampled reconstruction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{kappa, Constant};
use crate::error::{Error, Result};
use crate::gabor::{CoefficientSequence, Domain};
use crate::operators::{
    conv_op_op, fourier_wigner, modulate_op, reflect_op, spreading, translate_op, translated_parity, weyl_symbol,
    Operator,
};
use crate::phase_space::{
    all_points, half_of, half_phase, root_of_unity, symplectic_form, FiniteLattice, PhasePoint, Rational,
};
use crate::signals::{Model, PhaseFunction, Signal};

pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceKind {
    Translation,
    Modulation,
}

impl InvarianceKind {
    pub fn name(self) -> &'static str {
        match self {
            InvarianceKind::Translation => "translation",
            InvarianceKind::Modulation => "modulation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub kind: InvarianceKind,
    pub lattice: FiniteLattice,
    pub max_defect: f64,
    pub is_invariant: bool,
    pub tol: f64,
}

fn check_order(t: &Operator, lattice: &FiniteLattice) -> Result<usize> {
    let l = t.finite_order()?;
    if l != lattice.order() {
        return Err(Error::DimensionMismatch { expected: lattice.order(), found: l });
    }
    Ok(l)
}

fn require_odd(order: usize, operation: &'static str) -> Result<()> {
    half_of(order).map(|_| ()).map_err(|_| Error::EvenOrderUnsupported { order, operation })
}

fn relative_tol(t: &Operator) -> f64 {
    DEFAULT_RELATIVE_TOL * t.op_norm().max(1e-300)
}

fn act(kind: InvarianceKind, z: PhasePoint, t: &Operator) -> Result<Operator> {
    match kind {
        InvarianceKind::Translation => translate_op(z, t),
        InvarianceKind::Modulation => modulate_op(z, t),
    }
}

/// Largest operator-norm defect over the two lattice generators, with the
/// default relative tolerance.
pub fn invariance_defect(t: &Operator, lattice: &FiniteLattice, kind: InvarianceKind) -> Result<InvarianceReport> {
    invariance_defect_with_tol(t, lattice, kind, relative_tol(t))
}

pub fn invariance_defect_with_tol(
    t: &Operator,
    lattice: &FiniteLattice,
    kind: InvarianceKind,
    tol: f64,
) -> Result<InvarianceReport> {
    let l = check_order(t, lattice)?;
    if kind == InvarianceKind::Modulation {
        require_odd(l, "modulation invariance")?;
    }
    let mut max_defect = 0.0f64;
    for g in lattice.generators() {
        max_defect = max_defect.max(act(kind, g, t)?.op_distance(t));
    }
    Ok(InvarianceReport { kind, lattice: *lattice, max_defect, is_invariant: max_defect <= tol, tol })
}

fn ensure_invariant(t: &Operator, lattice: &FiniteLattice, kind: InvarianceKind) -> Result<()> {
    let r = invariance_defect(t, lattice, kind)?;
    if r.is_invariant {
        Ok(())
    } else {
        Err(Error::NotInvariant { kind: kind.name(), defect: r.max_defect, tol: r.tol })
    }
}

fn ensure_adjoint_sequence(k: &CoefficientSequence, lattice: &FiniteLattice) -> Result<()> {
    if k.lattice() != lattice.adjoint() {
        return Err(Error::LatticeMismatch);
    }
    Ok(())
}

/// Largest `|F(z)|` over points off `Λ°`.
fn mass_off(f: &PhaseFunction, adjoint: &FiniteLattice) -> f64 {
    all_points(f.order()).filter(|z| !adjoint.contains(*z)).map(|z| f[z].norm()).fold(0.0, f64::max)
}

/// `T = (1/s) sum_{λ°} k(λ°) conj(τ(λ°)) π(λ°)`, with `τ` the half phase.
pub fn synthesize_translation_invariant(k: &CoefficientSequence, lattice: &FiniteLattice) -> Result<Operator> {
    ensure_adjoint_sequence(k, lattice)?;
    let l = lattice.order();
    let scale = 1.0 / lattice.covolume_f64();
    let mut acc = DMatrix::zeros(l, l);
    for (p, &v) in k.points().into_iter().zip(k.values()) {
        if v.norm() == 0.0 {
            continue;
        }
        let c = v * half_phase(p, l).conj() * scale;
        for t in 0..l {
            acc[(t, (t + l - p.m) % l)] += c * root_of_unity((p.n * t) as i64, l);
        }
    }
    Operator::new(Model::finite(l), acc)
}

/// `k(λ°) = s τ(λ°) η_T(λ°)`.
pub fn analyze_translation_invariant(t: &Operator, lattice: &FiniteLattice) -> Result<CoefficientSequence> {
    let eta_scale = spreading(t)?.max_abs().max(1e-300);
    analyze_translation_invariant_with_tol(t, lattice, relative_tol(t), DEFAULT_RELATIVE_TOL * eta_scale)
}

/// As [`analyze_translation_invariant`] with absolute tolerances for the
/// invariance defect and for spreading mass off `Λ°`.
pub fn analyze_translation_invariant_with_tol(
    t: &Operator,
    lattice: &FiniteLattice,
    invariance_tol: f64,
    support_tol: f64,
) -> Result<CoefficientSequence> {
    let l = check_order(t, lattice)?;
    let r = invariance_defect_with_tol(t, lattice, InvarianceKind::Translation, invariance_tol)?;
    if !r.is_invariant {
        return Err(Error::NotInvariant { kind: "translation", defect: r.max_defect, tol: r.tol });
    }
    let eta = spreading(t)?;
    let adj = lattice.adjoint();
    let tol = support_tol;
    let leak = mass_off(&eta, &adj);
    if leak > tol {
        return Err(Error::SupportLeak { mass: leak, tol });
    }
    let s = lattice.covolume_f64();
    Ok(CoefficientSequence::from_fn(adj, Domain::Adjoint, |p| eta[p] * half_phase(p, l) * s))
}

/// Norms entering the periodic estimate for a synthesised operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEstimate {
    pub op_norm: f64,
    pub mod_infinity_norm: f64,
    /// `‖k‖_∞ / s(Λ)`
    pub sup_bound: f64,
    /// `‖k‖_{ℓ¹(Λ°)}`
    pub l1_bound: f64,
}

pub fn periodic_estimate(k: &CoefficientSequence, lattice: &FiniteLattice) -> Result<PeriodicEstimate> {
    let t = synthesize_translation_invariant(k, lattice)?;
    Ok(PeriodicEstimate {
        op_norm: t.op_norm(),
        mod_infinity_norm: t.mod_infinity_norm(),
        sup_bound: k.sup_norm() / lattice.covolume_f64(),
        l1_bound: k.lp_norm(1.0),
    })
}

/// `sum_{λ ∈ Λ} α_λ(S)`.
pub fn operator_periodize(s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    check_order(s, lattice)?;
    let mut acc = Operator::zeros(s.model());
    for p in lattice.points() {
        acc = acc.add(&translate_op(p, s)?)?;
    }
    Ok(acc)
}

/// `sum_{λ ∈ Λ} β_λ(S)`.
pub fn fourier_wigner_periodize(s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    let l = check_order(s, lattice)?;
    require_odd(l, "Fourier-Wigner periodisation")?;
    let mut acc = Operator::zeros(s.model());
    for p in lattice.points() {
        acc = acc.add(&modulate_op(p, s)?)?;
    }
    Ok(acc)
}

/// Samples `σ_T(λ°)` of a modulation-invariant operator.
pub fn trig_samples(t: &Operator, lattice: &FiniteLattice) -> Result<CoefficientSequence> {
    let l = check_order(t, lattice)?;
    require_odd(l, "trigonometric decomposition")?;
    ensure_invariant(t, lattice, InvarianceKind::Modulation)?;
    let sigma = weyl_symbol(t)?;
    let adj = lattice.adjoint();
    let tol = DEFAULT_RELATIVE_TOL * sigma.max_abs().max(1e-300);
    let leak = mass_off(&sigma, &adj);
    if leak > tol {
        return Err(Error::SupportLeak { mass: leak, tol });
    }
    Ok(CoefficientSequence::from_fn(adj, Domain::Adjoint, |p| sigma[p]))
}

/// `max_z |F_W(T)(z) - κ sum_{λ°} σ_T(λ°) e^{2πi Ω(λ°, z)/L}|`.
pub fn trig_decomposition_residual(t: &Operator, lattice: &FiniteLattice) -> Result<f64> {
    let samples = trig_samples(t, lattice)?;
    let l = lattice.order();
    let k = kappa(Constant::TrigDecomposition, l, lattice.covolume_f64());
    let fw = fourier_wigner(t)?;
    let series = PhaseFunction::from_fn(l, |z| {
        samples
            .points()
            .iter()
            .zip(samples.values())
            .map(|(&p, &v)| v * root_of_unity(symplectic_form(p, z), l))
            .sum::<Complex64>()
            * k
    });
    Ok(fw.max_abs_diff(&series))
}

/// `κ_P sum_{λ°} samples(λ°) α_{λ°}(P)`.
pub fn synthesize_modulation_invariant(samples: &CoefficientSequence, lattice: &FiniteLattice) -> Result<Operator> {
    ensure_adjoint_sequence(samples, lattice)?;
    let l = lattice.order();
    require_odd(l, "modulation-invariant synthesis")?;
    let mut acc = Operator::zeros(Model::finite(l));
    for (p, &v) in samples.points().into_iter().zip(samples.values()) {
        if v.norm() != 0.0 {
            acc = acc.add(&translated_parity(p, l).scale(v))?;
        }
    }
    Ok(acc.scale(kappa(Constant::ParityQuantization, l, 1.0).into()))
}

/// `(κ_J / s) sum_{λ°} σ_S(λ°) α_{λ°}(P)`.
pub fn modulation_janssen(s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    let l = check_order(s, lattice)?;
    require_odd(l, "modulation Janssen representation")?;
    let sigma = weyl_symbol(s)?;
    let cov = lattice.covolume_f64();
    let mut acc = Operator::zeros(s.model());
    for p in lattice.adjoint().points() {
        if sigma[p].norm() != 0.0 {
            acc = acc.add(&translated_parity(p, l).scale(sigma[p]))?;
        }
    }
    Ok(acc.scale((kappa(Constant::ModulationJanssen, l, cov) / cov).into()))
}

/// Recovers a modulation-invariant `T` from the samples of `T ⋆ S` on `Λ°`:
/// `T = (κ / σ_S(0)) sum_{λ°} (T ⋆ S)(λ°) α_{λ°}(P)`.
pub fn sampled_convolution_reconstruct(t: &Operator, s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    let l = check_order(t, lattice)?;
    require_odd(l, "sampled-convolution reconstruction")?;
    s.model().ensure_same(&t.model())?;
    ensure_invariant(t, lattice, InvarianceKind::Modulation)?;
    let sigma = weyl_symbol(s)?;
    let scale_ref = sigma.max_abs();
    let s0 = sigma[PhasePoint::ORIGIN];
    if s0.norm() <= 1e-12 * scale_ref.max(1e-300) {
        return Err(Error::ZeroSymbolAtOrigin);
    }
    let adj = lattice.adjoint();
    let tol = DEFAULT_RELATIVE_TOL * scale_ref;
    let stray = adj.points().into_iter().filter(|&p| p != PhasePoint::ORIGIN).map(|p| sigma[p].norm()).fold(0.0, f64::max);
    if stray > tol {
        return Err(Error::SupportViolation { mass: stray, tol });
    }
    let conv = conv_op_op(t, s)?;
    let k = kappa(Constant::SampledReconstruction, l, lattice.covolume_f64());
    let mut acc = Operator::zeros(t.model());
    for p in adj.points() {
        if conv[p].norm() != 0.0 {
            acc = acc.add(&translated_parity(p, l).scale(conv[p]))?;
        }
    }
    Ok(acc.scale(s0.inv() * k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusReport {
    /// `F_W(ST)(2z)`
    pub lhs: PhaseFunction,
    /// `κ (σ_S * σ_{Ť})(z)`
    pub rhs: PhaseFunction,
    pub residual: f64,
    /// `max |S Ť - T Š|`
    pub commutation_residual: f64,
    /// `max |σ_{ST}(z/2) - κ F_W(S) F_W(Ť)|`
    pub weyl_product_residual: f64,
}

/// `ab | 2L`, the finite form of `2Ω(Λ°, Λ°) ⊂ Z`.
pub fn calculus_condition(lattice: &FiniteLattice) -> bool {
    (2 * lattice.order()) % (lattice.a() * lattice.b()) == 0
}

pub fn spreading_calculus(s: &Operator, t: &Operator, lattice: &FiniteLattice) -> Result<CalculusReport> {
    let l = check_order(s, lattice)?;
    s.model().ensure_same(&t.model())?;
    require_odd(l, "spreading function calculus")?;
    if !calculus_condition(lattice) {
        return Err(Error::LatticeConditionViolated {
            order: l,
            a: lattice.a(),
            b: lattice.b(),
            condition: "ab | 2L",
        });
    }
    ensure_invariant(s, lattice, InvarianceKind::Modulation)?;
    ensure_invariant(t, lattice, InvarianceKind::Modulation)?;
    let st = s.compose(t)?;
    let t_check = reflect_op(t);
    let s_check = reflect_op(s);
    let lhs = fourier_wigner(&st)?.dilate(2);
    let k_calc = kappa(Constant::SpreadingCalculus, l, 1.0);
    let rhs = weyl_symbol(s)?.convolve(&weyl_symbol(&t_check)?).scale(k_calc.into());
    let residual = lhs.max_abs_diff(&rhs);
    let commutation_residual = s.compose(&t_check)?.distance(&t.compose(&s_check)?);
    let h = half_of(l)?;
    let k_prod = kappa(Constant::WeylProduct, l, 1.0);
    let product = fourier_wigner(s)?.mul(&fourier_wigner(&t_check)?).scale(k_prod.into());
    let weyl_product_residual = weyl_symbol(&st)?.dilate(h).max_abs_diff(&product);
    Ok(CalculusReport { lhs, rhs, residual, commutation_residual, weyl_product_residual })
}

/// Checks that `ST` is invariant under translations by the half lattice.
pub fn composition_translation_check(s: &Operator, t: &Operator, lattice: &FiniteLattice) -> Result<InvarianceReport> {
    let l = check_order(s, lattice)?;
    require_odd(l, "composition translation check")?;
    ensure_invariant(s, lattice, InvarianceKind::Modulation)?;
    ensure_invariant(t, lattice, InvarianceKind::Modulation)?;
    let half = lattice.half()?;
    invariance_defect(&s.compose(t)?, &half, InvarianceKind::Translation)
}

/// `Θ(S) = S P`.
pub fn theta(s: &Operator) -> Operator {
    s.compose(&Operator::parity(s.model())).expect("same model")
}

/// `max_z |F_W(Θ(S))(2z) - κ_Θ σ_S(z)|`.
pub fn theta_symbol_residual(s: &Operator) -> Result<f64> {
    let l = s.finite_order()?;
    require_odd(l, "theta symbol relation")?;
    let lhs = fourier_wigner(&theta(s))?.dilate(2);
    let rhs = weyl_symbol(s)?.scale(kappa(Constant::Theta, l, 1.0).into());
    Ok(lhs.max_abs_diff(&rhs))
}

/// Pairs `(δ_c, (b/L) T δ_c)` for `c = 0..a`, whose frame operators sum to `T`.
pub fn decompose_into_frame_operators(t: &Operator, lattice: &FiniteLattice) -> Result<Vec<(Signal, Signal)>> {
    let l = check_order(t, lattice)?;
    ensure_invariant(t, lattice, InvarianceKind::Translation)?;
    let scale = Complex64::new(lattice.b() as f64 / l as f64, 0.0);
    (0..lattice.a())
        .map(|c| {
            let g = Signal::delta(t.model(), c);
            let h = t.apply(&g)?.scale(scale);
            Ok((g, h))
        })
        .collect()
}

/// `s(Λ)` for translation, `s(Λ/2)` for modulation.
pub fn generator_lower_bound(lattice: &FiniteLattice, kind: InvarianceKind) -> Result<Rational> {
    match kind {
        InvarianceKind::Translation => Ok(lattice.covolume()),
        InvarianceKind::Modulation => Ok(lattice.half()?.covolume()),
    }
}

/// `s(Λ) = 1/n`, i.e. `ab | L`.
pub fn symbol_calculus_condition(lattice: &FiniteLattice) -> bool {
    lattice.order() % (lattice.a() * lattice.b()) == 0
}

/// `max_z |κ σ_S σ_T - σ_{ST}|` for translation-invariant `S` and `T`.
pub fn symbol_calculus_check(s: &Operator, t: &Operator, lattice: &FiniteLattice) -> Result<f64> {
    let l = check_order(s, lattice)?;
    s.model().ensure_same(&t.model())?;
    require_odd(l, "symbol calculus")?;
    if !symbol_calculus_condition(lattice) {
        return Err(Error::LatticeConditionViolated {
            order: l,
            a: lattice.a(),
            b: lattice.b(),
            condition: "s = 1/n",
        });
    }
    ensure_invariant(s, lattice, InvarianceKind::Translation)?;
    ensure_invariant(t, lattice, InvarianceKind::Translation)?;
    let k = kappa(Constant::SymbolCalculus, l, 1.0);
    let product = weyl_symbol(s)?.mul(&weyl_symbol(t)?).scale(k.into());
    Ok(product.max_abs_diff(&weyl_symbol(&s.compose(t)?)?))
}

/// Synthesises `k` truncated to its `n` points nearest the origin, for growing
/// `n`, and reports `(n, ‖T_n - T‖_op)`.
pub fn truncation_demo(k: &CoefficientSequence, lattice: &FiniteLattice) -> Result<Vec<(usize, f64)>> {
    let full = synthesize_translation_invariant(k, lattice)?;
    let l = lattice.order() as i64;
    let centred = |v: usize| {
        let v = v as i64;
        v.min(l - v)
    };
    let mut order: Vec<usize> = (0..k.values().len()).collect();
    let pts = k.points();
    order.sort_by_key(|&i| {
        let p = pts[i];
        (centred(p.m).pow(2) + centred(p.n).pow(2), i)
    });
    let mut rows = Vec::with_capacity(order.len());
    let mut values = vec![Complex64::new(0.0, 0.0); order.len()];
    for (n, &i) in order.iter().enumerate() {
        values[i] = k.values()[i];
        let partial = CoefficientSequence::new(k.lattice(), k.domain(), values.clone())?;
        rows.push((n + 1, synthesize_translation_invariant(&partial, lattice)?.op_distance(&full)));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::{frame_operator, integrated_representation, module_inner_right, multiwindow_frame_operator, rho_tilde};
    use crate::operators::weyl_quantize;
    use crate::testkit::SeededRng;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lat(l: usize, a: usize, b: usize) -> FiniteLattice {
        FiniteLattice::new(l, a, b).unwrap()
    }

    fn random_adjoint(rng: &mut SeededRng, lattice: &FiniteLattice) -> CoefficientSequence {
        let adj = lattice.adjoint();
        CoefficientSequence::new(adj, Domain::Adjoint, rng.coefficients(adj.point_count())).unwrap()
    }

    fn random_mod_invariant(rng: &mut SeededRng, lattice: &FiniteLattice) -> Operator {
        fourier_wigner_periodize(&rng.operator(Model::finite(lattice.order())), lattice).unwrap()
    }

    #[test]
    fn defect_examples() {
        let m = Model::finite(9);
        for lattice in FiniteLattice::all(9) {
            let id = Operator::identity(m);
            assert_eq!(invariance_defect(&id, &lattice, InvarianceKind::Translation).unwrap().max_defect, 0.0);
            let p = Operator::parity(m);
            assert!(invariance_defect(&p, &lattice, InvarianceKind::Modulation).unwrap().max_defect < 1e-13);
        }
        let t = SeededRng::new(60).operator(m);
        let r = invariance_defect(&t, &lat(9, 3, 3), InvarianceKind::Translation).unwrap();
        assert!(r.max_defect > 1e-3 && !r.is_invariant);
        assert!(matches!(
            invariance_defect(&Operator::identity(Model::finite(8)), &lat(8, 2, 2), InvarianceKind::Modulation),
            Err(Error::EvenOrderUnsupported { .. })
        ));
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.starts_with("{\"kind\":\"translation\",\"lattice\":[9,3,3],\"max_defect\":"));
    }

    #[test]
    fn translation_synthesis_examples() {
        let lattice = lat(4, 2, 2);
        let adj = lattice.adjoint();
        let d0 = CoefficientSequence::delta(adj, Domain::Adjoint, PhasePoint::ORIGIN).unwrap();
        let t = synthesize_translation_invariant(&d0, &lattice).unwrap();
        let s = lattice.covolume_f64();
        assert!(t.distance(&Operator::identity(Model::finite(4)).scale(c(1.0 / s))) < 1e-15);
        let p = PhasePoint { m: 2, n: 2 };
        let single = synthesize_translation_invariant(&CoefficientSequence::delta(adj, Domain::Adjoint, p).unwrap(), &lattice)
            .unwrap();
        assert!(single.distance(&Operator::tf_shift(p, 4).scale(half_phase(p, 4).conj() / s)) < 1e-15);
        assert!(invariance_defect(&single, &lattice, InvarianceKind::Translation).unwrap().max_defect < 1e-14);
        let id = analyze_translation_invariant(&Operator::identity(Model::finite(4)), &lattice).unwrap();
        assert!(id.max_abs_diff(&d0.scale(c(s))) < 1e-15);
        let rnd = SeededRng::new(61).operator(Model::finite(4));
        assert!(matches!(analyze_translation_invariant(&rnd, &lattice), Err(Error::NotInvariant { .. })));
        assert_eq!(synthesize_translation_invariant(&d0, &lat(4, 1, 2)), Err(Error::LatticeMismatch));
    }

    #[test]
    fn translation_round_trips_everywhere() {
        let mut rng = SeededRng::new(62);
        for l in [4usize, 6, 9, 12] {
            for lattice in FiniteLattice::all(l) {
                let k = random_adjoint(&mut rng, &lattice);
                let t = synthesize_translation_invariant(&k, &lattice).unwrap();
                assert!(invariance_defect(&t, &lattice, InvarianceKind::Translation).unwrap().max_defect < 1e-12);
                assert!(analyze_translation_invariant(&t, &lattice).unwrap().max_abs_diff(&k) < 1e-12, "{lattice}");
                // The same operator through the integrated representation of ρ̃(k).
                assert!(t.distance(&integrated_representation(&rho_tilde(&k))) < 1e-12);
            }
        }
    }

    #[test]
    fn frame_operator_coefficients_are_janssen_weights() {
        let lattice = lat(4, 2, 2);
        let d0 = Signal::delta(Model::finite(4), 0);
        let s = frame_operator(&d0, &d0, &lattice).unwrap();
        let k = analyze_translation_invariant(&s, &lattice).unwrap();
        let weights = module_inner_right(&d0, &d0, &lattice).unwrap();
        assert!(integrated_representation(&weights).distance(&s) < 1e-14);
        assert!(rho_tilde(&k).max_abs_diff(&weights) < 1e-14);
        let mut rng = SeededRng::new(63);
        let lattice = lat(12, 3, 4);
        let (g, h) = (rng.signal(Model::finite(12)), rng.signal(Model::finite(12)));
        let s = frame_operator(&g, &h, &lattice).unwrap();
        let k = analyze_translation_invariant(&s, &lattice).unwrap();
        assert!(rho_tilde(&k).max_abs_diff(&module_inner_right(&g, &h, &lattice).unwrap()) < 1e-12);
    }

    #[test]
    fn support_leak_is_reported() {
        let lattice = lat(4, 2, 2);
        let off = Operator::tf_shift(PhasePoint { m: 1, n: 0 }, 4).scale(c(1e-6));
        let t = Operator::identity(Model::finite(4)).add(&off).unwrap();
        assert!(matches!(
            analyze_translation_invariant_with_tol(&t, &lattice, 1e-3, 1e-9),
            Err(Error::SupportLeak { .. })
        ));
        assert!(matches!(analyze_translation_invariant(&t, &lattice), Err(Error::NotInvariant { .. })));
        assert!(analyze_translation_invariant_with_tol(&t, &lattice, 1e-3, 1e-3).is_ok());
    }

    #[test]
    fn periodisation_examples() {
        let mut rng = SeededRng::new(64);
        let lattice = lat(12, 3, 4);
        let m = Model::finite(12);
        let (g, h) = (rng.signal(m), rng.signal(m));
        let per = operator_periodize(&Operator::outer(&h, &g).unwrap(), &lattice).unwrap();
        assert!(per.distance(&frame_operator(&g, &h, &lattice).unwrap()) < 1e-12);
        let id = operator_periodize(&Operator::identity(m), &lattice).unwrap();
        assert!(id.distance(&Operator::identity(m).scale(c(lattice.point_count() as f64))) < 1e-14);
        let s = rng.operator(m);
        assert!(invariance_defect(&operator_periodize(&s, &lattice).unwrap(), &lattice, InvarianceKind::Translation)
            .unwrap()
            .is_invariant);
    }

    #[test]
    fn fourier_wigner_periodisation_examples() {
        let lattice = lat(9, 3, 3);
        let m = Model::finite(9);
        let p = Operator::parity(m);
        let per = fourier_wigner_periodize(&p, &lattice).unwrap();
        assert!(per.distance(&p.scale(c(lattice.point_count() as f64))) < 1e-12);
        let mut rng = SeededRng::new(65);
        let s = rng.operator(Model::finite(5));
        let l5 = lat(5, 1, 5);
        let out = fourier_wigner_periodize(&s, &l5).unwrap();
        assert!(invariance_defect(&out, &l5, InvarianceKind::Modulation).unwrap().is_invariant);
        let fw = fourier_wigner(&s).unwrap();
        let expected = l5.points().iter().fold(PhaseFunction::zeros(5), |acc, &q| {
            let moved = fw.translate(q);
            PhaseFunction::from_fn(5, |z| acc[z] + moved[z])
        });
        assert!(fourier_wigner(&out).unwrap().max_abs_diff(&expected) < 1e-12);
        assert!(matches!(
            fourier_wigner_periodize(&Operator::identity(Model::finite(8)), &lat(8, 2, 2)),
            Err(Error::EvenOrderUnsupported { .. })
        ));
    }

    #[test]
    fn modulation_round_trips() {
        let mut rng = SeededRng::new(66);
        for lattice in FiniteLattice::all(9).into_iter().chain(FiniteLattice::all(15)) {
            let samples = random_adjoint(&mut rng, &lattice);
            let t = synthesize_modulation_invariant(&samples, &lattice).unwrap();
            assert!(invariance_defect(&t, &lattice, InvarianceKind::Modulation).unwrap().max_defect < 1e-12);
            assert!(trig_samples(&t, &lattice).unwrap().max_abs_diff(&samples) < 1e-12);
            assert!(trig_decomposition_residual(&t, &lattice).unwrap() < 1e-12);
            let sigma = weyl_symbol(&t).unwrap();
            assert!(mass_off(&sigma, &lattice.adjoint()) < 1e-12);
        }
        let lattice = lat(9, 3, 3);
        let d0 = CoefficientSequence::delta(lattice.adjoint(), Domain::Adjoint, PhasePoint::ORIGIN).unwrap();
        let p = synthesize_modulation_invariant(&d0, &lattice).unwrap();
        assert!(p.distance(&Operator::parity(Model::finite(9))) < 1e-15);
        assert!(trig_samples(&Operator::parity(Model::finite(9)), &lattice).unwrap().max_abs_diff(&d0) < 1e-14);
        let rnd = rng.operator(Model::finite(9));
        assert!(matches!(trig_samples(&rnd, &lattice), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn trig_samples_of_periodised_operators() {
        let mut rng = SeededRng::new(67);
        let lattice = lat(9, 3, 3);
        let s = rng.operator(Model::finite(9));
        let t = fourier_wigner_periodize(&s, &lattice).unwrap();
        let samples = trig_samples(&t, &lattice).unwrap();
        let sigma = weyl_symbol(&s).unwrap();
        let ratio = kappa(Constant::ModulationJanssen, 9, 1.0) / lattice.covolume_f64();
        for (p, v) in samples.points().iter().zip(samples.values()) {
            assert!((v - sigma[*p] * ratio).norm() < 1e-10);
        }
    }

    #[test]
    fn modulation_janssen_examples() {
        let lattice = lat(9, 3, 3);
        let m = Model::finite(9);
        let p = Operator::parity(m);
        let j = modulation_janssen(&p, &lattice).unwrap();
        assert!(j.distance(&p.scale(c(lattice.point_count() as f64))) < 1e-12);
        let mut rng = SeededRng::new(68);
        for lattice in FiniteLattice::all(9) {
            let (s, t) = (rng.operator(m), rng.operator(m));
            let lhs = fourier_wigner_periodize(&s, &lattice).unwrap();
            assert!(lhs.op_distance(&modulation_janssen(&s, &lattice).unwrap()) < 1e-10, "{lattice}");
            let z = Complex64::new(0.5, -2.0);
            let lin = modulation_janssen(&s.add(&t.scale(z)).unwrap(), &lattice).unwrap();
            let sep = modulation_janssen(&s, &lattice)
                .unwrap()
                .add(&modulation_janssen(&t, &lattice).unwrap().scale(z))
                .unwrap();
            assert!(lin.distance(&sep) < 1e-11);
        }
    }

    #[test]
    fn reconstruction_examples() {
        let lattice = lat(9, 3, 3);
        let mut rng = SeededRng::new(69);
        let t = random_mod_invariant(&mut rng, &lattice);
        let p = weyl_quantize(&PhaseFunction::delta(9, PhasePoint::ORIGIN)).unwrap();
        assert!(sampled_convolution_reconstruct(&t, &p, &lattice).unwrap().distance(&t) < 1e-10);
        let bump = PhaseFunction::from_fn(9, |z| match (z.m, z.n) {
            (0, 0) => c(1.0),
            (1, 0) | (0, 1) => c(0.5),
            _ => c(0.0),
        });
        let s = weyl_quantize(&bump).unwrap();
        assert!(sampled_convolution_reconstruct(&t, &s, &lattice).unwrap().distance(&t) < 1e-10);
        let hole = weyl_quantize(&PhaseFunction::delta(9, PhasePoint { m: 1, n: 1 })).unwrap();
        assert_eq!(sampled_convolution_reconstruct(&t, &hole, &lattice), Err(Error::ZeroSymbolAtOrigin));
        let spill = weyl_quantize(&bump.map(|z, v| if z == (PhasePoint { m: 3, n: 0 }) { c(1.0) } else { v })).unwrap();
        assert!(matches!(
            sampled_convolution_reconstruct(&t, &spill, &lattice),
            Err(Error::SupportViolation { .. })
        ));
    }

    #[test]
    fn spreading_calculus_examples() {
        let lattice = lat(9, 3, 3);
        let p = Operator::parity(Model::finite(9));
        let r = spreading_calculus(&p, &p, &lattice).unwrap();
        assert!(r.lhs.max_abs_diff(&PhaseFunction::delta(9, PhasePoint::ORIGIN)) < 1e-14);
        assert!(r.residual < 1e-14 && r.commutation_residual < 1e-14 && r.weyl_product_residual < 1e-14);
        let mut rng = SeededRng::new(70);
        for lattice in FiniteLattice::all(9).into_iter().filter(calculus_condition) {
            let s = random_mod_invariant(&mut rng, &lattice);
            let t = random_mod_invariant(&mut rng, &lattice);
            let r = spreading_calculus(&s, &t, &lattice).unwrap();
            assert!(r.residual < 1e-10 && r.commutation_residual < 1e-10 && r.weyl_product_residual < 1e-10, "{lattice}");
        }
        let big = lat(15, 5, 5);
        let id = Operator::identity(Model::finite(15));
        assert!(matches!(spreading_calculus(&id, &id, &big), Err(Error::LatticeConditionViolated { .. })));
        let rnd = rng.operator(Model::finite(9));
        assert!(matches!(spreading_calculus(&rnd, &p, &lattice), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn composition_is_half_lattice_translation_invariant() {
        let mut rng = SeededRng::new(71);
        let p = Operator::parity(Model::finite(9));
        for lattice in FiniteLattice::all(9) {
            assert!(composition_translation_check(&p, &p, &lattice).unwrap().max_defect < 1e-14);
            let s = random_mod_invariant(&mut rng, &lattice);
            let t = random_mod_invariant(&mut rng, &lattice);
            let r = composition_translation_check(&s, &t, &lattice).unwrap();
            assert!(r.is_invariant && r.max_defect <= 1e-10 * s.op_norm() * t.op_norm(), "{lattice}");
            let st = s.compose(&t).unwrap();
            assert!(invariance_defect(&st, &lattice, InvarianceKind::Translation).unwrap().is_invariant);
        }
    }

    #[test]
    fn theta_examples() {
        let m = Model::finite(9);
        let (p, id) = (Operator::parity(m), Operator::identity(m));
        assert_eq!(theta(&p), id);
        assert_eq!(theta(&id), p);
        let mut rng = SeededRng::new(72);
        for lattice in FiniteLattice::all(9) {
            let s = random_mod_invariant(&mut rng, &lattice);
            let ts = theta(&s);
            assert_eq!(theta(&ts), s);
            assert!((ts.hs_norm() - s.hs_norm()).abs() < 1e-12 * s.hs_norm());
            assert!((ts.op_norm() - s.op_norm()).abs() < 1e-12 * s.op_norm());
            let half = lattice.half().unwrap();
            assert!(invariance_defect(&ts, &half, InvarianceKind::Translation).unwrap().is_invariant);
            assert!(theta_symbol_residual(&s).unwrap() < 1e-12);
            let k = random_adjoint(&mut rng, &half);
            let inv = synthesize_translation_invariant(&k, &half).unwrap();
            assert!(invariance_defect(&theta(&inv), &lattice, InvarianceKind::Modulation).unwrap().is_invariant);
        }
    }

    #[test]
    fn decomposition_examples() {
        let lattice = lat(4, 2, 2);
        let m = Model::finite(4);
        let id = Operator::identity(m);
        let pairs = decompose_into_frame_operators(&id, &lattice).unwrap();
        assert_eq!(pairs.len(), 2);
        for (i, (g, h)) in pairs.iter().enumerate() {
            assert_eq!(*g, Signal::delta(m, i));
            assert_eq!(*h, Signal::delta(m, i).scale(c(0.5)));
        }
        assert!(multiwindow_frame_operator(&pairs, &lattice).unwrap().distance(&id) < 1e-15);
        let shift = Operator::tf_shift(PhasePoint { m: 2, n: 2 }, 4);
        let pairs = decompose_into_frame_operators(&shift, &lattice).unwrap();
        assert!(multiwindow_frame_operator(&pairs, &lattice).unwrap().distance(&shift) < 1e-12);
        let mut rng = SeededRng::new(73);
        for l in [4usize, 6, 9, 12] {
            for lattice in FiniteLattice::all(l) {
                let t = synthesize_translation_invariant(&random_adjoint(&mut rng, &lattice), &lattice).unwrap();
                let pairs = decompose_into_frame_operators(&t, &lattice).unwrap();
                assert_eq!(pairs.len(), lattice.a());
                assert!(Rational::from_integer(pairs.len() as i64) >= lattice.covolume());
                assert!(multiwindow_frame_operator(&pairs, &lattice).unwrap().distance(&t) < 1e-10);
            }
        }
    }

    #[test]
    fn generator_bounds() {
        assert_eq!(generator_lower_bound(&lat(8, 4, 4), InvarianceKind::Translation).unwrap(), Rational::from_integer(2));
        assert_eq!(generator_lower_bound(&lat(8, 4, 4), InvarianceKind::Modulation).unwrap(), Rational::new(1, 2));
        assert_eq!(generator_lower_bound(&lat(9, 3, 3), InvarianceKind::Modulation).unwrap(), Rational::from_integer(1));
        assert!(matches!(generator_lower_bound(&lat(8, 1, 4), InvarianceKind::Modulation), Err(Error::Unhalvable { .. })));
    }

    #[test]
    fn symbol_calculus_examples() {
        let mut rng = SeededRng::new(74);
        for l in [9usize, 15] {
            let m = Model::finite(l);
            let id = Operator::identity(m);
            for lattice in FiniteLattice::all(l) {
                if !symbol_calculus_condition(&lattice) {
                    assert!(matches!(symbol_calculus_check(&id, &id, &lattice), Err(Error::LatticeConditionViolated { .. })));
                    continue;
                }
                assert!(symbol_calculus_check(&id, &id, &lattice).unwrap() < 1e-14);
                let s = synthesize_translation_invariant(&random_adjoint(&mut rng, &lattice), &lattice).unwrap();
                let t = synthesize_translation_invariant(&random_adjoint(&mut rng, &lattice), &lattice).unwrap();
                assert!(symbol_calculus_check(&s, &t, &lattice).unwrap() < 1e-10, "{lattice}");
            }
        }
        let id = Operator::identity(Model::finite(4));
        assert!(matches!(symbol_calculus_check(&id, &id, &lat(4, 1, 1)), Err(Error::EvenOrderUnsupported { .. })));
    }

    #[test]
    fn truncation_converges() {
        let mut rng = SeededRng::new(75);
        let lattice = lat(12, 2, 2);
        let k = random_adjoint(&mut rng, &lattice);
        let rows = truncation_demo(&k, &lattice).unwrap();
        assert_eq!(rows.len(), lattice.adjoint().point_count());
        assert!(rows.last().unwrap().1 < 1e-12);
        assert!(rows[0].1 > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn periodic_estimate_holds(seed in any::<u64>(), idx in 0usize..64) {
            let l = [4usize, 6, 9, 12][idx % 4];
            let lats = FiniteLattice::all(l);
            let lattice = lats[idx % lats.len()];
            let k = random_adjoint(&mut SeededRng::new(seed), &lattice);
            let e = periodic_estimate(&k, &lattice).unwrap();
            prop_assert!(e.mod_infinity_norm <= e.sup_bound * (1.0 + 1e-12));
            prop_assert!(e.op_norm <= e.l1_bound * (1.0 + 1e-12));
        }
    }
}
