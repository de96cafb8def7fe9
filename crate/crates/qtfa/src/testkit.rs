//! Brute-force oracles, seeded random inputs, and the derivation of the
//! constants table.
//!
//! Everything here is built from explicit matrices and direct sums so that it
//! shares no code path with the fast routines it checks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::{Constant, ConstantEntry, ConstantsTable, Derivation, PhaseConvention, Scaling, TABLE_VERSION};
use crate::error::{Error, Result};
use crate::operators::{
    conv_op_op, fourier_wigner, modulate_op, reflect_op, spreading, symplectic_parity, translate_op,
    translated_parity, weyl_quantize, weyl_symbol, Operator,
};
use crate::phase_space::{all_points, half_of, root_of_unity, FiniteLattice, PhasePoint};
use crate::signals::{cross_wigner, parity, periodize, stft, symplectic_dft, Model, PhaseFunction, Signal};

/// Seeded source of complex Gaussian test data (ChaCha8, real and imaginary
/// parts independent standard normals scaled by `1/sqrt 2`).
pub struct SeededRng {
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn complex(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn real(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    pub fn coefficients(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.complex()).collect()
    }

    pub fn signal(&mut self, model: Model) -> Signal {
        Signal::new(model, self.coefficients(model.dim())).expect("matching length")
    }

    pub fn unit_signal(&mut self, model: Model) -> Signal {
        self.signal(model).normalized()
    }

    pub fn operator(&mut self, model: Model) -> Operator {
        let d = model.dim();
        let values = self.coefficients(d * d);
        Operator::new(model, DMatrix::from_row_slice(d, d, &values)).expect("square")
    }

    pub fn phase_function(&mut self, order: usize) -> PhaseFunction {
        PhaseFunction::new(order, self.coefficients(order * order)).expect("matching length")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    Signal,
    Operator,
    Coefficient,
}

/// Flat row-major values for the requested kind and shape. Signals and
/// coefficient lists take `shape = [n]`, operators `shape = [n, n]`.
pub fn seeded_random(kind: RandomKind, seed: u64, shape: &[usize], normalized: bool) -> Vec<Complex64> {
    let count: usize = match kind {
        RandomKind::Operator if shape.len() == 1 => shape[0] * shape[0],
        _ => shape.iter().product(),
    };
    let mut values = SeededRng::new(seed).coefficients(count);
    if normalized {
        let n = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            values.iter_mut().for_each(|v| *v /= n);
        }
    }
    values
}

fn polar(k: f64, order: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k / order as f64)
}

/// `pi(z) = M_n T_m` as an explicit matrix product.
pub fn shift_matrix(z: PhasePoint, order: usize) -> DMatrix<Complex64> {
    let mut translation = DMatrix::zeros(order, order);
    let mut modulation = DMatrix::zeros(order, order);
    for t in 0..order {
        translation[((t + z.m) % order, t)] = Complex64::new(1.0, 0.0);
        modulation[(t, t)] = polar((z.n * t) as f64, order);
    }
    modulation * translation
}

fn parity_matrix(order: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(order, order, |t, u| {
        if (t + u) % order == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn finite(op: DMatrix<Complex64>, order: usize) -> Operator {
    Operator::new(Model::finite(order), op).expect("square")
}

/// `eta_S(z) = (1/L) tr(pi(z)^* S)` by explicit matrices.
pub fn naive_spreading(s: &Operator) -> PhaseFunction {
    let l = s.dim();
    PhaseFunction::from_fn(l, |z| (shift_matrix(z, l).adjoint() * s.matrix()).trace() / l as f64)
}

/// `V_g f(z) = sum_t f[t] conj((pi(z) g)[t])`.
pub fn naive_stft(f: &Signal, g: &Signal) -> PhaseFunction {
    let l = f.len();
    PhaseFunction::from_fn(l, |z| {
        let shifted = shift_matrix(z, l) * g.values();
        f.values().iter().zip(shifted.iter()).map(|(a, b)| a * b.conj()).sum()
    })
}

/// Direct quadruple loop for `F_Omega`.
pub fn naive_symplectic_dft(f: &PhaseFunction) -> PhaseFunction {
    let l = f.order();
    PhaseFunction::from_fn(l, |z| {
        let mut acc = Complex64::new(0.0, 0.0);
        for w in all_points(l) {
            let omega = (w.m * z.n) as f64 - (z.m * w.n) as f64;
            acc += f[w] * polar(-omega, l);
        }
        acc / l as f64
    })
}

/// `pi(z) S pi(z)^*`.
pub fn naive_translate(z: PhasePoint, s: &Operator) -> Operator {
    let l = s.dim();
    let p = shift_matrix(z, l);
    finite(&p * s.matrix() * p.adjoint(), l)
}

/// `e^{-2 pi i h^2 w1 w2 / L} pi(h w) S pi(h w)` with `h = (L + 1) / 2`.
pub fn naive_modulate(w: PhasePoint, s: &Operator) -> Operator {
    let l = s.dim();
    let h = (l + 1) / 2;
    let u = PhasePoint { m: (h * w.m) % l, n: (h * w.n) % l };
    let phase = polar(-((h * h * w.m * w.n) as f64), l);
    let p = shift_matrix(u, l);
    finite(&p * s.matrix() * &p * phase, l)
}

/// `(S ⋆ T)(z) = tr(S pi(z) P T P pi(z)^*)`.
pub fn naive_conv_op_op(s: &Operator, t: &Operator) -> PhaseFunction {
    let l = s.dim();
    let p = parity_matrix(l);
    let reflected = &p * t.matrix() * &p;
    PhaseFunction::from_fn(l, |z| {
        let shift = shift_matrix(z, l);
        (s.matrix() * &shift * &reflected * shift.adjoint()).trace()
    })
}

/// `sum_lambda (pi(lambda) h)(pi(lambda) g)^*`.
pub fn naive_frame_operator(g: &Signal, h: &Signal, lattice: &FiniteLattice) -> Operator {
    let l = g.len();
    let mut acc = DMatrix::zeros(l, l);
    for p in lattice.points() {
        let shift = shift_matrix(p, l);
        let ph: DVector<Complex64> = &shift * h.values();
        let pg: DVector<Complex64> = &shift * g.values();
        acc += ph * pg.adjoint();
    }
    finite(acc, l)
}

/// `sigma_S` through the naive spreading function and the naive `F_Omega`.
pub fn naive_weyl_symbol(s: &Operator) -> PhaseFunction {
    let l = s.dim();
    let h = ((l + 1) / 2) as f64;
    let eta = naive_spreading(s);
    naive_symplectic_dft(&eta.map(|z, v| polar(h * (z.m * z.n) as f64, l) * v))
}

pub const DERIVATION_ORDERS: [usize; 5] = [3, 4, 5, 6, 9];
pub const DERIVATION_SEED: u64 = 20_240_917;
const DRAWS: usize = 3;

fn pairs(lhs: &[Complex64], rhs: &[Complex64], out: &mut (Vec<Complex64>, Vec<Complex64>)) {
    out.0.extend_from_slice(lhs);
    out.1.extend_from_slice(rhs);
}

fn op_values(s: &Operator) -> Vec<Complex64> {
    s.matrix().iter().copied().collect()
}

fn mod_periodize(s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    let mut acc = Operator::zeros(s.model());
    for p in lattice.points() {
        acc = acc.add(&modulate_op(p, s)?)?;
    }
    Ok(acc)
}

fn trans_periodize(s: &Operator, lattice: &FiniteLattice) -> Result<Operator> {
    let mut acc = Operator::zeros(s.model());
    for p in lattice.points() {
        acc = acc.add(&translate_op(p, s)?)?;
    }
    Ok(acc)
}

fn dilated(f: &PhaseFunction, k: i64) -> Vec<Complex64> {
    f.dilate(k).values().to_vec()
}

fn contexts(c: Constant, order: usize) -> Vec<Option<FiniteLattice>> {
    if c.odd_only() && order % 2 == 0 {
        return Vec::new();
    }
    let all = FiniteLattice::all(order);
    let pick = |f: &dyn Fn(&FiniteLattice) -> bool| all.iter().filter(|x| f(x)).map(|x| Some(*x)).collect();
    match c {
        Constant::Poisson | Constant::ModulationJanssen | Constant::TrigDecomposition | Constant::SampledReconstruction => {
            pick(&|_| true)
        }
        Constant::SpreadingCalculus | Constant::WeylProduct => pick(&|x| (2 * order) % (x.a() * x.b()) == 0),
        Constant::SymbolCalculus => pick(&|x| order % (x.a() * x.b()) == 0),
        Constant::HeisenbergNormBound => pick(&|x| x.a() == 1),
        _ => vec![None],
    }
}

/// Values of both sides of the identity named by `c`, with the constant left out
/// of the right-hand side.
fn sample(
    c: Constant,
    order: usize,
    lattice: Option<FiniteLattice>,
    rng: &mut SeededRng,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let l = order;
    let m = Model::finite(l);
    let lat = || lattice.expect("lattice context");
    let mut out = (Vec::new(), Vec::new());
    for _ in 0..DRAWS {
        match c {
            Constant::Moyal => {
                let (f1, f2, g1, g2) = (rng.signal(m), rng.signal(m), rng.signal(m), rng.signal(m));
                let (v1, v2) = (stft(&f1, &g1)?, stft(&f2, &g2)?);
                let lhs: Complex64 = v1.values().iter().zip(v2.values()).map(|(a, b)| a * b.conj()).sum();
                pairs(&[lhs], &[f1.inner(&f2) * g1.inner(&g2).conj()], &mut out);
            }
            Constant::WignerDoubling => {
                let (f, g) = (rng.signal(m), rng.signal(m));
                let v = stft(&f, &parity(&g))?;
                let rhs = PhaseFunction::from_fn(l, |z| root_of_unity(2 * z.product(), l) * v[z.scale(2, l)]);
                pairs(cross_wigner(&f, &g)?.values(), rhs.values(), &mut out);
            }
            Constant::WignerSum => {
                let (f, g) = (rng.signal(m), rng.signal(m));
                pairs(&[cross_wigner(&f, &g)?.sum()], &[f.inner(&g)], &mut out);
            }
            Constant::WeylPairing => {
                let (s, f, g) = (rng.operator(m), rng.signal(m), rng.signal(m));
                let sigma = weyl_symbol(&s)?;
                let w = cross_wigner(&g, &f)?;
                let raw: Complex64 = sigma.values().iter().zip(w.values()).map(|(a, b)| a * b.conj()).sum();
                pairs(&[s.apply(&f)?.inner(&g)], &[raw / l as f64], &mut out);
            }
            Constant::Poisson => {
                let f = rng.phase_function(l);
                let hat = symplectic_dft(&f);
                let adj = lat().adjoint().points();
                let rhs = PhaseFunction::from_fn(l, |z| {
                    adj.iter()
                        .map(|&p| hat[p] * root_of_unity(crate::phase_space::symplectic_form(p, z), l))
                        .sum()
                });
                pairs(periodize(&f, &lat())?.values(), rhs.values(), &mut out);
            }
            Constant::ParityQuantization => {
                let sigma = rng.phase_function(l);
                let mut acc = Operator::zeros(m);
                for z in all_points(l) {
                    acc = acc.add(&translated_parity(z, l).scale(sigma[z]))?;
                }
                pairs(&op_values(&weyl_quantize(&sigma)?), &op_values(&acc), &mut out);
            }
            Constant::SymplecticParity => {
                let z = PhasePoint::new((rng.uniform() * l as f64) as i64, (rng.uniform() * l as f64) as i64, l);
                pairs(&op_values(&symplectic_parity(z, l)?), &op_values(&translated_parity(z, l)), &mut out);
            }
            Constant::SpreadingIsometry => {
                let s = rng.operator(m);
                pairs(&[spreading(&s)?.l2_norm().into()], &[s.hs_norm().into()], &mut out);
            }
            Constant::OperatorConvolution => {
                let (s, t) = (rng.operator(m), rng.operator(m));
                let rhs = weyl_symbol(&s)?.convolve(&weyl_symbol(&t)?);
                pairs(conv_op_op(&s, &t)?.values(), rhs.values(), &mut out);
            }
            Constant::OperatorConvolutionFourier => {
                let (s, t) = (rng.operator(m), rng.operator(m));
                let rhs = fourier_wigner(&s)?.mul(&fourier_wigner(&t)?);
                pairs(symplectic_dft(&conv_op_op(&s, &t)?).values(), rhs.values(), &mut out);
            }
            Constant::FunctionConvolution => {
                let (f, s) = (rng.phase_function(l), rng.operator(m));
                let mut fs = Operator::zeros(m);
                for z in all_points(l) {
                    fs = fs.add(&translate_op(z, &s)?.scale(f[z]))?;
                }
                pairs(weyl_symbol(&fs)?.values(), f.convolve(&weyl_symbol(&s)?).values(), &mut out);
            }
            Constant::ModulationJanssen => {
                let s = rng.operator(m);
                let lt = lat();
                let sigma = weyl_symbol(&s)?;
                let mut rhs = Operator::zeros(m);
                for p in lt.adjoint().points() {
                    rhs = rhs.add(&translated_parity(p, l).scale(sigma[p]))?;
                }
                let rhs = rhs.scale((1.0 / lt.covolume_f64()).into());
                pairs(&op_values(&mod_periodize(&s, &lt)?), &op_values(&rhs), &mut out);
            }
            Constant::TrigDecomposition => {
                let t = mod_periodize(&rng.operator(m), &lat())?;
                let sigma = weyl_symbol(&t)?;
                let adj = lat().adjoint().points();
                let rhs = PhaseFunction::from_fn(l, |z| {
                    adj.iter()
                        .map(|&p| sigma[p] * root_of_unity(crate::phase_space::symplectic_form(p, z), l))
                        .sum()
                });
                pairs(fourier_wigner(&t)?.values(), rhs.values(), &mut out);
            }
            Constant::SampledReconstruction => {
                let t = mod_periodize(&rng.operator(m), &lat())?;
                let s = weyl_quantize(&PhaseFunction::delta(l, PhasePoint::ORIGIN).scale(rng.complex()))?;
                let s0 = weyl_symbol(&s)?[PhasePoint::ORIGIN];
                let conv = conv_op_op(&t, &s)?;
                let mut rhs = Operator::zeros(m);
                for p in lat().adjoint().points() {
                    rhs = rhs.add(&translated_parity(p, l).scale(conv[p] / s0))?;
                }
                pairs(&op_values(&t), &op_values(&rhs), &mut out);
            }
            Constant::Theta => {
                let s = rng.operator(m);
                let sp = s.compose(&Operator::parity(m))?;
                pairs(&dilated(&fourier_wigner(&sp)?, 2), weyl_symbol(&s)?.values(), &mut out);
            }
            Constant::SpreadingCalculus => {
                let s = mod_periodize(&rng.operator(m), &lat())?;
                let t = mod_periodize(&rng.operator(m), &lat())?;
                let lhs = dilated(&fourier_wigner(&s.compose(&t)?)?, 2);
                let rhs = weyl_symbol(&s)?.convolve(&weyl_symbol(&reflect_op(&t))?);
                pairs(&lhs, rhs.values(), &mut out);
            }
            Constant::WeylProduct => {
                let s = mod_periodize(&rng.operator(m), &lat())?;
                let t = mod_periodize(&rng.operator(m), &lat())?;
                let h = half_of(l)?;
                let lhs = dilated(&weyl_symbol(&s.compose(&t)?)?, h);
                let rhs = fourier_wigner(&s)?.mul(&fourier_wigner(&reflect_op(&t))?);
                pairs(&lhs, rhs.values(), &mut out);
            }
            Constant::SymbolCalculus => {
                let s = trans_periodize(&rng.operator(m), &lat())?;
                let t = trans_periodize(&rng.operator(m), &lat())?;
                let rhs = weyl_symbol(&s)?.mul(&weyl_symbol(&t)?);
                pairs(weyl_symbol(&s.compose(&t)?)?.values(), rhs.values(), &mut out);
            }
            Constant::HeisenbergNormBound => {
                // delta windows on lattices with a = 1 give tight frames, where the bound is sharp.
                let t = (rng.uniform() * l as f64) as usize;
                let g = Signal::delta(m, t).scale(rng.complex());
                let frame = naive_frame_operator(&g, &g, &lat());
                pairs(&[g.norm().into()], &[frame.op_norm().sqrt().into()], &mut out);
            }
        }
    }
    Ok(out)
}

fn recognise(x: f64, max_den: i64, tol: f64) -> Option<Ratio<i64>> {
    (1..=max_den).find_map(|den| {
        let num = (x * den as f64).round();
        ((x - num / den as f64).abs() <= tol).then(|| Ratio::new(num as i64, den))
    })
}

struct Fit {
    scaling: Scaling,
    derivation: Derivation,
}

fn fit(c: Constant, orders: &[usize], rng: &mut SeededRng) -> Result<Fit> {
    let inconsistent = |detail: String| Error::InconsistentConstant { name: c.name().to_string(), detail };
    // (ln L, ln s, kappa)
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut used = Vec::new();
    let mut max_fit_residual = 0.0f64;
    for &l in orders {
        for ctx in contexts(c, l) {
            let (lhs, rhs) = sample(c, l, ctx, rng)?;
            let rr: f64 = rhs.iter().map(|v| v.norm_sqr()).sum();
            if rr < 1e-20 {
                continue;
            }
            let k: Complex64 = rhs.iter().zip(&lhs).map(|(r, x)| r.conj() * x).sum::<Complex64>() / rr;
            let ll: f64 = lhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let res: f64 =
                lhs.iter().zip(&rhs).map(|(x, r)| (x - k * r).norm_sqr()).sum::<f64>().sqrt() / ll.max(1e-300);
            if res > 1e-10 {
                return Err(inconsistent(format!("identity residual {res:e} at L = {l}")));
            }
            if k.re <= 0.0 || k.im.abs() > 1e-9 * k.norm() {
                return Err(inconsistent(format!("fitted value {k} at L = {l} is not a positive real")));
            }
            max_fit_residual = max_fit_residual.max(res);
            rows.push((l, ctx.map_or(1.0, |x| x.covolume_f64()), k.re));
            if !used.contains(&l) {
                used.push(l);
            }
        }
    }
    if used.len() < 2 {
        return Err(inconsistent("needs at least two applicable orders".into()));
    }
    let varies_s = rows.iter().any(|r| (r.1 - rows[0].1).abs() > 1e-12);
    let cols = if varies_s { 3 } else { 2 };
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => (rows[i].0 as f64).ln(),
        _ => rows[i].1.ln(),
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2.ln()));
    let sol = a.clone().svd(true, true).solve(&y, 1e-12).map_err(|e| inconsistent(e.to_string()))?;
    let order_exponent =
        recognise(sol[1], 4, 1e-6).ok_or_else(|| inconsistent(format!("order exponent {}", sol[1])))?;
    let covolume_exponent = if varies_s {
        recognise(sol[2], 4, 1e-6).ok_or_else(|| inconsistent(format!("covolume exponent {}", sol[2])))?
    } else {
        Ratio::from_integer(0)
    };
    let coefficient = recognise(sol[0].exp(), 64, 1e-8)
        .ok_or_else(|| inconsistent(format!("coefficient {}", sol[0].exp())))?;
    let scaling = Scaling::new(coefficient, order_exponent, covolume_exponent);
    let mut max_spread = 0.0f64;
    for &(l, s, k) in &rows {
        let model = scaling.eval(l, s);
        max_spread = max_spread.max((k - model).abs() / model);
    }
    if max_spread > 1e-9 {
        return Err(inconsistent(format!("samples deviate from {scaling} by {max_spread:e}")));
    }
    Ok(Fit {
        scaling,
        derivation: Derivation { orders: used, samples: rows.len() * DRAWS, max_fit_residual, max_spread },
    })
}

/// `e^{pi i k w1 w2 / L} pi(h w) S pi(h w)`: the operator modulation with a
/// phase drawn from the `2L`-th roots of unity.
fn modulate_with(k: i64, w: PhasePoint, s: &Operator) -> Operator {
    let l = s.dim();
    let h = (l + 1) / 2;
    let u = PhasePoint { m: (h * w.m) % l, n: (h * w.n) % l };
    let p = shift_matrix(u, l);
    let phase = Complex64::from_polar(1.0, PI * (k * w.product()) as f64 / l as f64);
    finite(&p * s.matrix() * &p * phase, l)
}

/// Exhaustive search over `k mod 2L` for the modulation phase that makes
/// `F_W(beta_w S) = T_w F_W(S)` hold for every `w`.
pub fn search_modulation_phase(order: usize, rng: &mut SeededRng) -> Result<Vec<i64>> {
    let s = rng.operator(Model::finite(order));
    let fw = fourier_wigner(&s)?;
    let l2 = 2 * order as i64;
    let mut hits = Vec::new();
    for k in 0..l2 {
        let ok = all_points(order).all(|w| {
            fourier_wigner(&modulate_with(k, w, &s)).map(|x| x.max_abs_diff(&fw.translate(w)) < 1e-10).unwrap_or(false)
        });
        if ok {
            hits.push(k);
        }
    }
    Ok(hits)
}

/// Fits every constant on `orders` and validates the modulation phase.
pub fn derive_constants(orders: &[usize], seed: u64) -> Result<ConstantsTable> {
    if !orders.iter().any(|&l| l >= 3 && l % 2 == 1) {
        return Err(Error::ConstantsTable("derivation needs an odd order >= 3".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut entries = Vec::new();
    for c in Constant::ALL {
        let f = fit(c, orders, &mut rng)?;
        entries.push(ConstantEntry {
            name: c,
            identity: c.identity().to_string(),
            scaling: f.scaling,
            derivation: f.derivation,
        });
    }
    let mut validated = Vec::new();
    for &l in orders.iter().filter(|&&l| l % 2 == 1 && l <= 5) {
        let h = half_of(l)?;
        let l2 = 2 * l as i64;
        let expected = (-2 * h * h).rem_euclid(l2);
        let hits = search_modulation_phase(l, &mut rng)?;
        if hits != vec![expected] {
            return Err(Error::InconsistentConstant {
                name: "modulation_phase".into(),
                detail: format!("search at L = {l} found {hits:?}, expected [{expected}]"),
            });
        }
        validated.push(l);
    }
    Ok(ConstantsTable {
        version: TABLE_VERSION,
        seed,
        orders: orders.to_vec(),
        entries,
        modulation_phase: PhaseConvention {
            expression: "phi(w) = e^{-2 pi i h^2 w1 w2 / L}".into(),
            sign: -1,
            h_power: 2,
            validated_orders: validated,
            search_family: "e^{pi i k w1 w2 / L}, k in 0..2L".into(),
        },
    })
}
