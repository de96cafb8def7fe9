//! Normalisation constants of the finite model.
//!
//! Each constant is stored as `coefficient * L^p * s^q` with rational
//! `coefficient`, `p`, `q`, where `L` is the order and `s` the covolume of
//! the lattice involved. The table in `data/constants.json` is produced by
//! [`crate::testkit::derive_constants`] and checked by a regression test.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TABLE_VERSION: u32 = 1;

const BUILTIN: &str = include_str!("../data/constants.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constant {
    Moyal,
    WignerDoubling,
    WignerSum,
    WeylPairing,
    Poisson,
    ParityQuantization,
    SymplecticParity,
    SpreadingIsometry,
    OperatorConvolution,
    OperatorConvolutionFourier,
    FunctionConvolution,
    ModulationJanssen,
    TrigDecomposition,
    SampledReconstruction,
    Theta,
    SpreadingCalculus,
    WeylProduct,
    SymbolCalculus,
    HeisenbergNormBound,
}

impl Constant {
    pub const ALL: [Constant; 19] = [
        Constant::Moyal,
        Constant::WignerDoubling,
        Constant::WignerSum,
        Constant::WeylPairing,
        Constant::Poisson,
        Constant::ParityQuantization,
        Constant::SymplecticParity,
        Constant::SpreadingIsometry,
        Constant::OperatorConvolution,
        Constant::OperatorConvolutionFourier,
        Constant::FunctionConvolution,
        Constant::ModulationJanssen,
        Constant::TrigDecomposition,
        Constant::SampledReconstruction,
        Constant::Theta,
        Constant::SpreadingCalculus,
        Constant::WeylProduct,
        Constant::SymbolCalculus,
        Constant::HeisenbergNormBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constant::Moyal => "moyal",
            Constant::WignerDoubling => "wigner_doubling",
            Constant::WignerSum => "wigner_sum",
            Constant::WeylPairing => "weyl_pairing",
            Constant::Poisson => "poisson",
            Constant::ParityQuantization => "parity_quantization",
            Constant::SymplecticParity => "symplectic_parity",
            Constant::SpreadingIsometry => "spreading_isometry",
            Constant::OperatorConvolution => "operator_convolution",
            Constant::OperatorConvolutionFourier => "operator_convolution_fourier",
            Constant::FunctionConvolution => "function_convolution",
            Constant::ModulationJanssen => "modulation_janssen",
            Constant::TrigDecomposition => "trig_decomposition",
            Constant::SampledReconstruction => "sampled_reconstruction",
            Constant::Theta => "theta",
            Constant::SpreadingCalculus => "spreading_calculus",
            Constant::WeylProduct => "weyl_product",
            Constant::SymbolCalculus => "symbol_calculus",
            Constant::HeisenbergNormBound => "heisenberg_norm_bound",
        }
    }

    /// The identity the constant normalises.
    pub fn identity(self) -> &'static str {
        match self {
            Constant::Moyal => "sum_z V_g1 f1 conj(V_g2 f2) = k <f1,f2> conj(<g1,g2>)",
            Constant::WignerDoubling => "W(f,g)(z) = k e^{4 pi i m n / L} V_{Pg} f(2z)",
            Constant::WignerSum => "sum_z W(f,g)(z) = k <f,g>",
            Constant::WeylPairing => "<S f, g> = (k / L) sum_z sigma_S(z) conj(W(g,f)(z))",
            Constant::Poisson => "(P_Lambda F)(z) = k sum_{l in adj} F_Omega(F)(l) e^{2 pi i Omega(l,z)/L}",
            Constant::ParityQuantization => "L_sigma = k sum_z sigma(z) alpha_z(P)",
            Constant::SymplecticParity => "(1/L) sum_w e^{2 pi i Omega(z,w)/L} Ph(w)^{-1} pi(w) = k alpha_z(P)",
            Constant::SpreadingIsometry => "||eta_S||_2 = k ||S||_HS",
            Constant::OperatorConvolution => "S * T = k sigma_S conv sigma_T",
            Constant::OperatorConvolutionFourier => "F_Omega(S * T) = k F_W(S) F_W(T)",
            Constant::FunctionConvolution => "sigma_{f * S} = k f conv sigma_S",
            Constant::ModulationJanssen => "sum_l beta_l(S) = (k / s) sum_{l in adj} sigma_S(l) alpha_l(P)",
            Constant::TrigDecomposition => "F_W(T)(z) = k sum_{l in adj} sigma_T(l) e^{2 pi i Omega(l,z)/L}",
            Constant::SampledReconstruction => "T = (k / sigma_S(0)) sum_{l in adj} (T * S)(l) alpha_l(P)",
            Constant::Theta => "F_W(S P)(2z) = k sigma_S(z)",
            Constant::SpreadingCalculus => "F_W(S T)(2z) = k (sigma_S conv reflect(sigma_T))(z)",
            Constant::WeylProduct => "sigma_{ST}(h z) = k F_W(S)(z) F_W(reflect(T))(z)",
            Constant::SymbolCalculus => "sigma_{ST} = k sigma_S sigma_T",
            Constant::HeisenbergNormBound => "||g||_2 <= k ||g||_E, sharp",
        }
    }

    pub fn from_name(name: &str) -> Option<Constant> {
        Constant::ALL.iter().copied().find(|c| c.name() == name)
    }

    /// Whether the identity needs the `2^{-1}` chirp.
    pub fn odd_only(self) -> bool {
        !matches!(
            self,
            Constant::Moyal
                | Constant::Poisson
                | Constant::SpreadingIsometry
                | Constant::HeisenbergNormBound
        )
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `coefficient * L^order_exponent * s^covolume_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaling {
    pub coefficient: [i64; 2],
    pub order_exponent: [i64; 2],
    pub covolume_exponent: [i64; 2],
}

impl Scaling {
    pub fn new(coefficient: Ratio<i64>, order_exponent: Ratio<i64>, covolume_exponent: Ratio<i64>) -> Self {
        let pair = |r: Ratio<i64>| [*r.numer(), *r.denom()];
        Scaling {
            coefficient: pair(coefficient),
            order_exponent: pair(order_exponent),
            covolume_exponent: pair(covolume_exponent),
        }
    }

    pub fn eval(&self, order: usize, covolume: f64) -> f64 {
        let r = |p: [i64; 2]| p[0] as f64 / p[1] as f64;
        r(self.coefficient) * (order as f64).powf(r(self.order_exponent)) * covolume.powf(r(self.covolume_exponent))
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |p: [i64; 2]| if p[1] == 1 { p[0].to_string() } else { format!("{}/{}", p[0], p[1]) };
        write!(f, "{}", r(self.coefficient))?;
        if self.order_exponent[0] != 0 {
            write!(f, " * L^{}", r(self.order_exponent))?;
        }
        if self.covolume_exponent[0] != 0 {
            write!(f, " * s^{}", r(self.covolume_exponent))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub orders: Vec<usize>,
    pub samples: usize,
    pub max_fit_residual: f64,
    pub max_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: Constant,
    pub identity: String,
    pub scaling: Scaling,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvention {
    pub expression: String,
    /// Exponent of `e^{2 pi i k w1 w2 / L}` as a polynomial in `h = 2^{-1} mod L`:
    /// `k = sign * h^power`.
    pub sign: i64,
    pub h_power: u32,
    pub validated_orders: Vec<usize>,
    pub search_family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub version: u32,
    pub seed: u64,
    pub orders: Vec<usize>,
    pub entries: Vec<ConstantEntry>,
    pub modulation_phase: PhaseConvention,
}

impl ConstantsTable {
    pub fn builtin() -> &'static ConstantsTable {
        static TABLE: OnceLock<ConstantsTable> = OnceLock::new();
        TABLE.get_or_init(|| ConstantsTable::parse(BUILTIN).expect("embedded constants table is valid"))
    }

    pub fn parse(text: &str) -> Result<ConstantsTable> {
        let table: ConstantsTable =
            serde_json::from_str(text).map_err(|e| Error::ConstantsTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &std::path::Path) -> Result<ConstantsTable> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConstantsTable(format!("{}: {e}", path.display())))?;
        ConstantsTable::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }

    fn validate(&self) -> Result<()> {
        if self.version != TABLE_VERSION {
            return Err(Error::ConstantsTable(format!(
                "version {} does not match expected {}",
                self.version, TABLE_VERSION
            )));
        }
        let names: BTreeMap<Constant, usize> =
            self.entries.iter().enumerate().map(|(i, e)| (e.name, i)).collect();
        for c in Constant::ALL {
            if !names.contains_key(&c) {
                return Err(Error::ConstantsTable(format!("missing entry {c}")));
            }
        }
        for e in &self.entries {
            for p in [e.scaling.coefficient, e.scaling.order_exponent, e.scaling.covolume_exponent] {
                if p[1] == 0 {
                    return Err(Error::ConstantsTable(format!("zero denominator in {}", e.name)));
                }
            }
        }
        Ok(())
    }

    pub fn scaling(&self, c: Constant) -> Scaling {
        self.entries.iter().find(|e| e.name == c).map(|e| e.scaling).expect("validated table")
    }

    /// Entries whose scaling differs from `other`.
    pub fn disagreements(&self, other: &ConstantsTable) -> Vec<Constant> {
        let mut out: Vec<Constant> =
            Constant::ALL.iter().copied().filter(|&c| self.scaling(c) != other.scaling(c)).collect();
        if self.modulation_phase.sign != other.modulation_phase.sign
            || self.modulation_phase.h_power != other.modulation_phase.h_power
        {
            out.push(Constant::ParityQuantization);
            out.dedup();
        }
        out
    }
}

/// Value of a constant for order `order` and covolume `covolume`.
pub fn kappa(c: Constant, order: usize, covolume: f64) -> f64 {
    ConstantsTable::builtin().scaling(c).eval(order, covolume)
}
