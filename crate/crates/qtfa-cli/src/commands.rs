use std::path::Path;

use qtfa::constants::{Constant, ConstantsTable};
use qtfa::continuum::{convergence_report, ConvergenceConfig, Thresholds};
use qtfa::gabor::{frame_operator, janssen_operator, CoefficientSequence, Domain};
use qtfa::invariant::{
    analyze_translation_invariant, composition_translation_check, invariance_defect, spreading_calculus,
    synthesize_modulation_invariant, synthesize_translation_invariant, theta, theta_symbol_residual,
    trig_decomposition_residual, trig_samples, InvarianceKind,
};
use qtfa::testkit::{derive_constants, naive_frame_operator, SeededRng};
use qtfa::{kappa, Error, FiniteLattice, Model, Operator, PhasePoint, Signal};
use serde_json::json;

use crate::document::{self, RunDocument, Table};
use crate::{Cli, Command, ConstantsAction, Data, Format, Kind, Mode, Pair, WindowSource};

pub const CONSTANTS_ENV: &str = "QTFA_CONSTANTS";
const EXACT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Environment(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Environment(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NotInvariant { .. }
            | Error::SupportLeak { .. }
            | Error::SupportViolation { .. }
            | Error::NotAFrame { .. }
            | Error::InconsistentConstant { .. } => Failure::Numeric(msg),
            Error::ConstantsTable(_) => Failure::Environment(msg),
            _ => Failure::Usage(msg),
        }
    }
}

type Outcome = Result<(RunDocument, Option<Table>), Failure>;

/// The argument list with `--out` removed, which is all a replay needs.
pub fn echo(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

/// Version of the active constants table. An override named by
/// `QTFA_CONSTANTS` must parse, carry the current version and agree with the
/// compiled table.
pub fn constants_table() -> Result<ConstantsTable, Failure> {
    let builtin = ConstantsTable::builtin();
    let Some(path) = std::env::var_os(CONSTANTS_ENV) else {
        return Ok(builtin.clone());
    };
    let table = ConstantsTable::load(Path::new(&path)).map_err(|e| Failure::Environment(e.to_string()))?;
    let differing = table.disagreements(builtin);
    if !differing.is_empty() {
        let names: Vec<&str> = differing.iter().map(|c| c.name()).collect();
        return Err(Failure::Environment(format!("constants table disagrees on {}", names.join(", "))));
    }
    Ok(table)
}

pub fn execute(cli: &Cli, command: Vec<String>) -> Result<bool, Failure> {
    let table = constants_table()?;
    let (doc, table_view) = match &cli.command {
        Command::Replay { document } => replay(document, &table)?,
        _ => run(cli, command, &table)?,
    };
    let text = match cli.global.format {
        Format::Doc => doc.to_text(),
        Format::Csv => csv_text(&table_view.unwrap_or_else(|| doc.summary_table()))?,
    };
    match &cli.global.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(doc.passed)
}

fn csv_text(table: &Table) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(&table.headers).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

pub fn run(cli: &Cli, command: Vec<String>, table: &ConstantsTable) -> Outcome {
    let g = &cli.global;
    let mut doc = RunDocument::new(command, table.version, g.seed, g.tol);
    let view = match &cli.command {
        Command::LatticeInfo { order, a, b } => {
            lattice_info(&mut doc, *order, *a, *b)?;
            None
        }
        Command::JanssenCheck { order, a, b, windows, windows_file } => {
            janssen_check(&mut doc, *order, *a, *b, *windows, windows_file.as_deref())?;
            None
        }
        Command::Invariant { kind, mode, order, a, b, data } => {
            invariant(&mut doc, *kind, *mode, lattice(*order, *a, *b)?, *data)?;
            None
        }
        Command::Calculus { order, a, b, pair } => {
            calculus(&mut doc, lattice(*order, *a, *b)?, *pair)?;
            None
        }
        Command::Converge { config } => Some(converge(&mut doc, config.as_deref())?),
        Command::Constants { action } => Some(constants(&mut doc, action, table)?),
        Command::Replay { .. } => return Err(Failure::Usage("a replay cannot replay itself".into())),
    };
    Ok((doc, view))
}

fn lattice(order: usize, a: usize, b: usize) -> Result<FiniteLattice, Failure> {
    Ok(FiniteLattice::new(order, a, b)?)
}

fn seed(doc: &RunDocument) -> Result<u64, Failure> {
    doc.seed.ok_or_else(|| Failure::Usage("this input is randomised and needs an explicit --seed".into()))
}

fn tol(doc: &RunDocument, default: f64) -> f64 {
    doc.tol.unwrap_or(default)
}

fn lattice_info(doc: &mut RunDocument, order: usize, a: usize, b: usize) -> Result<(), Failure> {
    doc.input("lattice", [order, a, b]);
    let lat = lattice(order, a, b)?;
    let adj = lat.adjoint();
    doc.output("lattice", lat.triple());
    doc.output("adjoint", adj.triple());
    doc.output("covolume", lat.covolume().to_string());
    doc.output("adjoint_covolume", adj.covolume().to_string());
    doc.output("point_count", lat.point_count());
    doc.output("adjoint_point_count", adj.point_count());
    let (status, half) = match lat.half() {
        Ok(h) if order % 2 == 1 => ("yes (odd)", Some(h.triple())),
        Ok(h) => ("yes (a, b even)", Some(h.triple())),
        Err(_) => ("no", None),
    };
    doc.output("halvable", status);
    doc.output("half_lattice", half);
    Ok(())
}

fn read_windows(path: Option<&Path>, order: usize) -> Result<(Signal, Signal), Failure> {
    let path = path.ok_or_else(|| Failure::Usage("--windows file needs --windows-file".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let signal = |key: &str| -> Result<Option<Signal>, Failure> {
        match v.get(key) {
            None => Ok(None),
            Some(raw) => {
                let values = document::parse_signal(raw)
                    .ok_or_else(|| Failure::Usage(format!("window {key} must be a list of [re, im] pairs")))?;
                Ok(Some(Signal::new(Model::finite(order), values)?))
            }
        }
    };
    let g = signal("g")?.ok_or_else(|| Failure::Usage("window file has no \"g\"".into()))?;
    let h = signal("h")?.unwrap_or_else(|| g.clone());
    Ok((g, h))
}

fn janssen_check(
    doc: &mut RunDocument,
    order: usize,
    a: usize,
    b: usize,
    windows: WindowSource,
    file: Option<&Path>,
) -> Result<(), Failure> {
    doc.input("lattice", [order, a, b]);
    doc.input("windows", format!("{windows:?}").to_lowercase());
    let lat = lattice(order, a, b)?;
    let model = Model::finite(order);
    let (g, h) = match windows {
        WindowSource::Delta => (Signal::delta(model, 0), Signal::delta(model, 0)),
        WindowSource::Random => {
            let mut rng = SeededRng::new(seed(doc)?);
            let g = rng.signal(model);
            (g, rng.signal(model))
        }
        WindowSource::File => {
            let (g, h) = read_windows(file, order)?;
            doc.input("g", g.as_slice().iter().map(|&c| document::complex(c)).collect::<Vec<_>>());
            doc.input("h", h.as_slice().iter().map(|&c| document::complex(c)).collect::<Vec<_>>());
            (g, h)
        }
    };
    let direct = frame_operator(&g, &h, &lat)?;
    let janssen = janssen_operator(&g, &h, &lat)?;
    let t = tol(doc, EXACT_TOL);
    doc.output("frame_operator_diagonal", document::diagonal(&direct));
    doc.output("frame_operator", document::matrix(&direct));
    doc.check("janssen", direct.op_distance(&janssen), t);
    doc.check("naive_frame_operator", direct.op_distance(&naive_frame_operator(&g, &h, &lat)), t);
    Ok(())
}

fn coefficients(data: Data, adj: FiniteLattice, doc: &RunDocument) -> Result<CoefficientSequence, Failure> {
    match data {
        Data::Delta => Ok(CoefficientSequence::delta(adj, Domain::Adjoint, PhasePoint::ORIGIN)?),
        Data::Random => {
            let values = SeededRng::new(seed(doc)?).coefficients(adj.point_count());
            Ok(CoefficientSequence::new(adj, Domain::Adjoint, values)?)
        }
        other => Err(Failure::Usage(format!("synthesis takes --data delta or random, not {other:?}"))),
    }
}

fn operator_input(data: Data, kind: Kind, lat: &FiniteLattice, doc: &RunDocument) -> Result<Operator, Failure> {
    let model = Model::finite(lat.order());
    match data {
        Data::Identity => Ok(Operator::identity(model)),
        Data::Parity => Ok(Operator::parity(model)),
        Data::Generic => Ok(SeededRng::new(seed(doc)?).operator(model)),
        Data::Random => {
            let k = coefficients(Data::Random, lat.adjoint(), doc)?;
            Ok(match kind {
                Kind::Translation => synthesize_translation_invariant(&k, lat)?,
                Kind::Modulation => synthesize_modulation_invariant(&k, lat)?,
            })
        }
        Data::Delta => Err(Failure::Usage("analysis takes --data identity, parity, random or generic".into())),
    }
}

fn invariant(doc: &mut RunDocument, kind: Kind, mode: Mode, lat: FiniteLattice, data: Data) -> Result<(), Failure> {
    doc.input("lattice", lat.triple());
    doc.input("kind", format!("{kind:?}").to_lowercase());
    doc.input("mode", format!("{mode:?}").to_lowercase());
    doc.input("data", format!("{data:?}").to_lowercase());
    let t = tol(doc, EXACT_TOL);
    let inv_kind = match kind {
        Kind::Translation => InvarianceKind::Translation,
        Kind::Modulation => InvarianceKind::Modulation,
    };
    match mode {
        Mode::Synth => {
            let k = coefficients(data, lat.adjoint(), doc)?;
            let op = match kind {
                Kind::Translation => synthesize_translation_invariant(&k, &lat)?,
                Kind::Modulation => synthesize_modulation_invariant(&k, &lat)?,
            };
            let back = match kind {
                Kind::Translation => analyze_translation_invariant(&op, &lat)?,
                Kind::Modulation => trig_samples(&op, &lat)?,
            };
            let report = invariance_defect(&op, &lat, inv_kind)?;
            doc.output("operator", document::matrix(&op));
            doc.check("invariance_defect", report.max_defect, t);
            doc.check("round_trip", back.max_abs_diff(&k), t);
            if kind == Kind::Translation && data == Data::Delta {
                let target = Operator::identity(op.model()).scale((1.0 / lat.covolume_f64()).into());
                doc.check("identity_over_covolume", op.op_distance(&target), t);
            }
        }
        Mode::Analyze => {
            let op = operator_input(data, kind, &lat, doc)?;
            let report = invariance_defect(&op, &lat, inv_kind)?;
            let (k, rebuilt) = match kind {
                Kind::Translation => {
                    let k = analyze_translation_invariant(&op, &lat)?;
                    let rebuilt = synthesize_translation_invariant(&k, &lat)?;
                    (k, rebuilt)
                }
                Kind::Modulation => {
                    let k = trig_samples(&op, &lat)?;
                    let rebuilt = synthesize_modulation_invariant(&k, &lat)?;
                    doc.check("trig_decomposition", trig_decomposition_residual(&op, &lat)?, t);
                    (k, rebuilt)
                }
            };
            doc.output("coefficients", document::sequence(&k));
            doc.check("invariance_defect", report.max_defect, t);
            doc.check("round_trip", rebuilt.op_distance(&op), t);
        }
    }
    Ok(())
}

fn calculus(doc: &mut RunDocument, lat: FiniteLattice, pair: Pair) -> Result<(), Failure> {
    doc.input("lattice", lat.triple());
    doc.input("pair", format!("{pair:?}").to_lowercase());
    let l = lat.order();
    let (s, t_op) = match pair {
        Pair::Parity => (Operator::parity(Model::finite(l)), Operator::parity(Model::finite(l))),
        Pair::Random => {
            let mut rng = SeededRng::new(seed(doc)?);
            let adj = lat.adjoint();
            let mut draw = || -> Result<Operator, Failure> {
                let k = CoefficientSequence::new(adj, Domain::Adjoint, rng.coefficients(adj.point_count()))?;
                Ok(synthesize_modulation_invariant(&k, &lat)?)
            };
            let s = draw()?;
            (s, draw()?)
        }
    };
    let report = spreading_calculus(&s, &t_op, &lat)?;
    let half = composition_translation_check(&s, &t_op, &lat)?;
    let tol = tol(doc, EXACT_TOL);
    let ts = theta(&s);
    doc.output("half_lattice", lat.half()?.triple());
    doc.output(
        "constants",
        json!({
            "spreading_calculus": kappa(Constant::SpreadingCalculus, l, 1.0),
            "weyl_product": kappa(Constant::WeylProduct, l, 1.0),
            "theta": kappa(Constant::Theta, l, 1.0),
        }),
    );
    doc.check("spreading_calculus", report.residual, tol);
    doc.check("commutation", report.commutation_residual, tol);
    doc.check("weyl_product", report.weyl_product_residual, tol);
    doc.check("theta_involution", theta(&ts).op_distance(&s), tol);
    doc.check("theta_hs_norm", (ts.hs_norm() - s.hs_norm()).abs(), tol);
    doc.check("theta_op_norm", (ts.op_norm() - s.op_norm()).abs(), tol);
    doc.check("theta_symbol", theta_symbol_residual(&s)?, tol);
    doc.check("half_lattice_defect", half.max_defect, tol);
    Ok(())
}

fn converge(doc: &mut RunDocument, path: Option<&Path>) -> Result<Table, Failure> {
    let mut config = match path {
        None => ConvergenceConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", p.display())))?
        }
    };
    if let Some(t) = doc.tol {
        config.thresholds = Thresholds { poisson: t, moyal: t, janssen: t, reconstruction: t };
    }
    doc.input("config", &config);
    let report = convergence_report(&config)?;
    for row in &report.rows {
        doc.check(&format!("{}@{}", row.identity.name(), row.points), row.residual, row.threshold);
    }
    doc.output("rows", &report.rows);
    doc.output("trends", &report.trends);
    doc.passed &= report.all_passed();
    Ok(Table {
        headers: ["identity", "N", "delta", "residual"].map(String::from).to_vec(),
        rows: report
            .rows
            .iter()
            .map(|r| vec![r.identity.name().into(), r.points.to_string(), document::float(r.spacing), document::float(r.residual)])
            .collect(),
    })
}

fn constants_view(table: &ConstantsTable) -> Table {
    Table {
        headers: ["name", "scaling", "identity"].map(String::from).to_vec(),
        rows: table
            .entries
            .iter()
            .map(|e| vec![e.name.name().into(), e.scaling.to_string(), e.identity.clone()])
            .collect(),
    }
}

fn constants(doc: &mut RunDocument, action: &ConstantsAction, active: &ConstantsTable) -> Result<Table, Failure> {
    match action {
        ConstantsAction::Show => {
            doc.output("table", active);
            Ok(constants_view(active))
        }
        ConstantsAction::Derive { orders, table_out } => {
            doc.input("orders", orders);
            let seed = seed(doc)?;
            let derived = derive_constants(orders, seed).map_err(|e| match e {
                Error::ConstantsTable(m) => Failure::Usage(m),
                other => Failure::from(other),
            })?;
            let differing: Vec<&str> = derived.disagreements(active).iter().map(|c| c.name()).collect();
            doc.output("table", &derived);
            doc.output("disagreements", &differing);
            doc.passed &= differing.is_empty();
            if let Some(p) = table_out {
                std::fs::write(p, derived.to_json())
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
            }
            Ok(constants_view(&derived))
        }
    }
}

fn replay(path: &Path, table: &ConstantsTable) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let stored: RunDocument = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad document: {e}")))?;
    if stored.constants_version != table.version {
        return Err(Failure::Environment(format!(
            "document uses constants version {}, active table is {}",
            stored.constants_version, table.version
        )));
    }
    let argv = std::iter::once("qtfa".to_string()).chain(stored.command.iter().cloned());
    let cli = <Cli as clap::Parser>::try_parse_from(argv).map_err(|e| Failure::Usage(e.to_string()))?;
    let (fresh, _) = run(&cli, stored.command.clone(), table)?;
    let mut differing = Vec::new();
    for (key, value) in &fresh.outputs {
        if stored.outputs.get(key) != Some(value) {
            differing.push(format!("outputs.{key}"));
        }
    }
    for (key, value) in &fresh.residuals {
        if stored.residuals.get(key).map(|v| v.to_bits()) != Some(value.to_bits()) {
            differing.push(format!("residuals.{key}"));
        }
    }
    if fresh.outputs.len() != stored.outputs.len() || fresh.residuals.len() != stored.residuals.len() {
        differing.push("key sets".into());
    }
    let mut doc = RunDocument::new(vec!["replay".into(), path.display().to_string()], table.version, None, None);
    doc.input("command", &stored.command);
    doc.output("identical", differing.is_empty());
    doc.output("differences", &differing);
    doc.passed = differing.is_empty();
    Ok((doc, None))
}
