use std::collections::BTreeMap;

use num_complex::Complex64;
use qtfa::gabor::CoefficientSequence;
use qtfa::Operator;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Self-describing record of one run. Floats print as shortest round-trip
/// decimals, so a replay compares bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub command: Vec<String>,
    pub constants_version: u32,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub passed: bool,
}

/// Optional tabular view written for `--format csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RunDocument {
    pub fn new(command: Vec<String>, constants_version: u32, seed: Option<u64>, tol: Option<f64>) -> Self {
        RunDocument {
            command,
            constants_version,
            seed,
            tol,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            residuals: BTreeMap::new(),
            passed: true,
        }
    }

    pub fn input(&mut self, key: &str, v: impl Serialize) {
        self.inputs.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn output(&mut self, key: &str, v: impl Serialize) {
        self.outputs.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    /// Records a residual and folds it into `passed` against `tol`.
    pub fn check(&mut self, key: &str, residual: f64, tol: f64) {
        self.residuals.insert(key.into(), residual);
        self.passed &= residual <= tol;
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Residuals as `name,value` rows, or the outputs when there are none.
    pub fn summary_table(&self) -> Table {
        if self.residuals.is_empty() {
            return Table {
                headers: vec!["output".into(), "value".into()],
                rows: self.outputs.iter().map(|(k, v)| vec![k.clone(), v.to_string()]).collect(),
            };
        }
        Table {
            headers: vec!["residual".into(), "value".into()],
            rows: self.residuals.iter().map(|(k, v)| vec![k.clone(), float(*v)]).collect(),
        }
    }
}

/// Shortest round-trip decimal.
pub fn float(x: f64) -> String {
    serde_json::to_string(&x).expect("serializable")
}

pub fn complex(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn matrix(op: &Operator) -> Value {
    let m = op.matrix();
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn diagonal(op: &Operator) -> Value {
    let m = op.matrix();
    Value::Array((0..m.nrows()).map(|i| complex(m[(i, i)])).collect())
}

pub fn sequence(k: &CoefficientSequence) -> Value {
    Value::Array(
        k.points()
            .iter()
            .zip(k.values())
            .map(|(p, &v)| json!({ "point": [p.m, p.n], "value": complex(v) }))
            .collect(),
    )
}

pub fn parse_signal(v: &Value) -> Option<Vec<Complex64>> {
    v.as_array()?
        .iter()
        .map(|pair| {
            let p = pair.as_array()?;
            match p.as_slice() {
                [re, im] => Some(Complex64::new(re.as_f64()?, im.as_f64()?)),
                _ => None,
            }
        })
        .collect()
}
