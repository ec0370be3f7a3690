//! Subcommand implementations. Each produces an [`OutputDocument`] and, where
//! a table makes sense, a CSV rendering of the same numbers.

use qcat::diagnostics::{
    ep_collapse_report, layer_check_with, layer_cross_validate_with, spectrum_scan_with, LayerSpec,
};
use qcat::linalg::extreme_spectrum_in;
use qcat::metric::{coefficient_matrices_from, ketkets_with, metric_poly_in};
use qcat::model::{build_chain, build_multiparam, build_qc_limit, ModelParams, MultiParamCoeffs};
use qcat::observables::{f_pattern_residual, solve_at_with, solve_z_independent_with};
use qcat::scalar::{Mp, Real};
use qcat::{ComplexMatrix, Error, Tolerances};
use serde_json::{json, Value};

use crate::output::{self, fmt12, num, ErrorBody, ErrorDocument, OutputDocument, SCHEMA_VERSION};
use crate::{Cli, Command, Format, MetricForm, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "usage".into(),
            message: message.into(),
            code: EXIT_DOMAIN,
        }
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension { .. } => "dimension",
        Error::Domain(_) => "domain",
        Error::Shape(_) => "shape",
        Error::DegreeMismatch { .. } => "degree_mismatch",
        Error::DegreeCap { .. } => "degree_cap",
        Error::DivisionResidue { .. } => "division_residue",
        Error::ResidualR { .. } => "residual_r",
        Error::ConsistencyFailure { .. } => "consistency_failure",
        Error::PatternFailure(_) => "pattern_failure",
        Error::NotPositiveDefinite { .. } => "not_positive_definite",
        Error::Invariant(_) => "invariant",
        Error::ConvergenceFailure { .. } => "convergence_failure",
        Error::MissingBounds { .. } => "missing_bounds",
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_invariant_breach() {
        EXIT_INVARIANT
    } else {
        EXIT_DOMAIN
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: error_kind(&e).into(),
            message: e.to_string(),
            code: exit_code(&e),
        }
    }
}

fn error_value(e: &Error) -> Value {
    json!({ "kind": error_kind(e), "message": e.to_string() })
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Response {
    pub params: Value,
    pub payload: Value,
    pub table: Option<Table>,
    pub exit: i32,
}

impl Response {
    fn new(params: Value, payload: Value) -> Self {
        Response {
            params,
            payload,
            table: None,
            exit: EXIT_OK,
        }
    }
}

type Outcome = Result<Response, Failure>;

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Hamiltonian(_) => "hamiltonian",
        Command::Metric(_) => "metric",
        Command::Scan(_) => "scan",
        Command::Observables(_) => "observables",
        Command::Ketkets(_) => "ketkets",
        Command::Coeffmats(_) => "coeffmats",
        Command::EpReport(_) => "ep-report",
        Command::Domain(_) => "domain",
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    match cli.tol {
        None => Ok(Tolerances::default()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerances::uniform(t)),
        Some(t) => Err(Failure::usage(format!("--tol must be positive and finite, got {t}"))),
    }
}

/// Runs the command and writes its document; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let name = command_name(&cli.command);
    let result = tolerances(cli).and_then(|tol| {
        let resp = dispatch(&cli.command, &tol)?;
        if cli.format == Format::Csv && resp.table.is_none() {
            return Err(Failure::usage(format!("csv output is not available for {name}")));
        }
        Ok((resp, tol))
    });
    let mut w = match output::open(cli.out.as_deref()) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("qcat: cannot open output: {e}");
            return EXIT_IO;
        }
    };
    let (written, code) = match result {
        Ok((resp, tol)) => {
            let code = resp.exit;
            let written = match (cli.format, resp.table) {
                (Format::Csv, Some(table)) => write_csv(&mut w, &table),
                _ => output::write_json(
                    &mut w,
                    &OutputDocument {
                        schema_version: SCHEMA_VERSION,
                        command: name,
                        params: resp.params,
                        payload: resp.payload,
                        tolerances: output::tolerances(&tol),
                    },
                ),
            };
            (written, code)
        }
        Err(f) => {
            eprintln!("qcat {name}: {}", f.message);
            let doc = ErrorDocument {
                schema_version: SCHEMA_VERSION,
                command: name,
                error: ErrorBody {
                    kind: f.kind,
                    message: f.message,
                    exit_code: f.code,
                },
            };
            (output::write_json(&mut w, &doc), f.code)
        }
    };
    if let Err(e) = written {
        eprintln!("qcat: write failed: {e}");
        return EXIT_IO;
    }
    code
}

fn write_csv(w: &mut dyn std::io::Write, table: &Table) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&table.header)?;
    for row in &table.rows {
        wtr.write_record(row)?;
    }
    wtr.flush()
}

fn dispatch(c: &Command, tol: &Tolerances) -> Outcome {
    match c {
        Command::Hamiltonian(a) => hamiltonian(a.n, a.lambda, a.variant, a.coeffs.as_deref()),
        Command::Metric(a) => metric(a.n, a.lambda, a.form, tol),
        Command::Scan(a) => scan(a.n, a.lambda_min, a.lambda_max, a.steps, tol),
        Command::Observables(a) => observables(a.n, a.z, a.z_independent, tol),
        Command::Ketkets(a) => ketkets(a.n, tol),
        Command::Coeffmats(a) => coeffmats(a.n, tol),
        Command::EpReport(a) => ep_report(a.n, &a.lambdas),
        Command::Domain(a) => domain(a, tol),
    }
}

fn matrix_table(m: &ComplexMatrix) -> Table {
    let real = m.to_real(0.0);
    let cols = m.ncols();
    let header = match real {
        Some(_) => (0..cols).map(|j| format!("c{j}")).collect(),
        None => (0..cols).flat_map(|j| [format!("c{j}_re"), format!("c{j}_im")]).collect(),
    };
    let rows = (0..m.nrows())
        .map(|i| match &real {
            Some(r) => r.row(i).iter().map(|&x| fmt12(x)).collect(),
            None => m.row(i).iter().flat_map(|z| [fmt12(z.re), fmt12(z.im)]).collect(),
        })
        .collect();
    Table { header, rows }
}

fn hamiltonian(n: usize, lambda: Option<f64>, variant: Variant, coeffs: Option<&[f64]>) -> Outcome {
    let need_lambda = || lambda.ok_or_else(|| Failure::usage("--lambda is required for this variant"));
    let mut extra = json!({});
    let (variant_name, h) = match variant {
        Variant::Chain => ("chain", build_chain(&ModelParams::new(n, need_lambda()?)?)),
        Variant::Qc => ("qc", build_qc_limit(n)?.to_complex()),
        Variant::Multiparam => {
            let c = coeffs.ok_or_else(|| Failure::usage("--coeffs is required for the multiparam variant"))?;
            let built = build_multiparam(n, need_lambda()?, &MultiParamCoeffs::new(c.to_vec()))?;
            extra = json!({ "extrapolated": built.extrapolated });
            ("multiparam", built.matrix)
        }
    };
    let params = json!({
        "n": n,
        "lambda": lambda.map(num),
        "variant": variant_name,
        "coeffs": coeffs.map(|c| c.iter().map(|&x| num(x)).collect::<Vec<_>>()),
    });
    let mut payload = json!({ "matrix": output::complex_matrix(&h) });
    if let (Some(p), Some(e)) = (payload.as_object_mut(), extra.as_object()) {
        p.extend(e.clone());
    }
    let mut resp = Response::new(params, payload);
    resp.table = Some(matrix_table(&h));
    Ok(resp)
}

fn metric(n: usize, lambda: Option<f64>, form: MetricForm, tol: &Tolerances) -> Outcome {
    let poly = metric_poly_in::<Mp>(n, tol)?;
    let params = json!({
        "n": n,
        "lambda": lambda.map(num),
        "form": match form { MetricForm::Poly => "poly", MetricForm::Numeric => "numeric" },
    });
    match form {
        MetricForm::Poly => {
            let entries: Vec<Vec<Value>> = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let p = poly.entry(a, b).to_f64();
                            let c: Vec<Value> = (0..=p.degree()).map(|k| num(p.coeff(k))).collect();
                            json!(c)
                        })
                        .collect()
                })
                .collect();
            let payload = json!({
                "variable": "z",
                "order": "ascending",
                "max_degree": poly.max_degree(),
                "entries": entries,
            });
            Ok(Response::new(params, payload))
        }
        MetricForm::Numeric => {
            let lambda = lambda.ok_or_else(|| Failure::usage("--lambda is required for the numeric form"))?;
            let theta = poly.eval_lambda(lambda)?;
            let (min_eig, cond) = extreme_spectrum_in(&theta);
            let m = theta.map(Real::to_f64);
            let payload = json!({
                "z": num((1.0 - lambda).sqrt()),
                "matrix": output::real_matrix(&m),
                "min_eigenvalue": num(min_eig),
                "condition_number": num(cond),
                "positive_definite": min_eig > 0.0,
            });
            let mut resp = Response::new(params, payload);
            resp.table = Some(matrix_table(&m.to_complex()));
            Ok(resp)
        }
    }
}

/// `steps` equally spaced points from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

fn scan(n: usize, lo: f64, hi: f64, steps: usize, tol: &Tolerances) -> Outcome {
    if steps < 2 {
        return Err(Failure::usage(format!("--steps must be at least 2, got {steps}")));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Failure::usage("lambda bounds must be finite"));
    }
    let lambdas = grid(lo, hi, steps);
    let rows = spectrum_scan_with(n, &lambdas, tol)?;

    let mut json_rows = Vec::with_capacity(rows.len());
    let mut header = vec!["lambda".to_string()];
    for k in 0..n {
        header.push(format!("e{k}_re"));
        header.push(format!("e{k}_im"));
    }
    header.extend(["all_real", "near_ep", "theta_min_eig", "theta_cond", "error"].map(String::from));
    let mut cells = Vec::with_capacity(rows.len());
    let mut ok_rows = 0;
    let mut worst = EXIT_DOMAIN;
    for (lambda, row) in lambdas.iter().zip(&rows) {
        match row {
            Ok(r) => {
                ok_rows += 1;
                json_rows.push(json!({
                    "lambda": num(r.lambda),
                    "energies": r.energies.values.iter().map(|&z| output::complex(z)).collect::<Vec<_>>(),
                    "all_real": r.all_real,
                    "near_ep": r.near_ep,
                    "theta_min_eig": opt_num(r.theta_min_eig),
                    "theta_cond": opt_num(r.theta_cond),
                }));
                let mut line = vec![fmt12(r.lambda)];
                for z in &r.energies.values {
                    line.push(fmt12(z.re));
                    line.push(fmt12(z.im));
                }
                line.push(r.all_real.to_string());
                line.push(r.near_ep.to_string());
                line.push(opt_cell(r.theta_min_eig));
                line.push(opt_cell(r.theta_cond));
                line.push(String::new());
                cells.push(line);
            }
            Err(e) => {
                worst = worst.max(exit_code(e));
                json_rows.push(json!({ "lambda": num(*lambda), "error": error_value(e) }));
                let mut line = vec![fmt12(*lambda)];
                line.extend(std::iter::repeat_n(String::new(), 2 * n + 4));
                line.push(format!("{}: {e}", error_kind(e)));
                cells.push(line);
            }
        }
    }
    let params = json!({
        "n": n,
        "lambda_min": num(lo),
        "lambda_max": num(hi),
        "steps": steps,
    });
    let payload = json!({ "rows": json_rows, "succeeded": ok_rows, "failed": rows.len() - ok_rows });
    let mut resp = Response::new(params, payload);
    resp.table = Some(Table { header, rows: cells });
    if ok_rows == 0 {
        resp.exit = worst;
    }
    Ok(resp)
}

fn observables(n: usize, z: Option<f64>, z_independent: bool, tol: &Tolerances) -> Outcome {
    let poly = metric_poly_in::<f64>(n, tol)?;
    let params = json!({ "n": n, "z": z.map(num), "z_independent": z_independent });
    let mut payload = match z {
        Some(z) => {
            if !(z.is_finite() && (0.0..1.0).contains(&z)) {
                return Err(Error::Domain(format!("z must lie in [0, 1), got {z}")).into());
            }
            let basis = solve_at_with(&poly.eval_z(&z), tol)?;
            json!({
                "dimension": basis.dim(),
                "expected_dimension": n * (n + 1) / 2,
                "basis": basis.basis.iter().map(output::real_matrix).collect::<Vec<_>>(),
            })
        }
        None => {
            let basis = solve_z_independent_with(n, &poly, tol)?;
            let mut p = json!({
                "dimension": basis.dim(),
                "basis": basis.basis.iter().map(output::real_matrix).collect::<Vec<_>>(),
            });
            if n == 3 {
                p["f_pattern"] = json!(basis.basis.iter().map(|g| f_pattern_residual(g) < tol.nullspace).collect::<Vec<_>>());
            }
            p
        }
    };
    payload["constraint"] = json!("G^T Theta = Theta G");
    Ok(Response::new(params, payload))
}

fn ketkets(n: usize, tol: &Tolerances) -> Outcome {
    let set = ketkets_with(n, tol)?;
    let rows: Vec<Value> = (0..n)
        .map(|i| {
            let k = set.energy_index(i);
            json!({
                "row": i,
                "energy_index": k,
                "energy_over_sqrt_lambda": 2 * k as i64 + 1 - n as i64,
                "components": set.row(i).iter().map(|p| p.coeffs().iter().map(|&c| num(c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let payload = json!({
        "degree": n - 1,
        "basis": "coefficient m multiplies u^(degree-m) v^m",
        "rows": rows,
    });
    Ok(Response::new(json!({ "n": n }), payload))
}

fn coeffmats(n: usize, tol: &Tolerances) -> Outcome {
    let mats = coefficient_matrices_from(&ketkets_with(n, tol)?, tol)?;
    let list: Vec<Value> = mats
        .mats()
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let mut entries = Vec::new();
            for i in 0..n {
                for k in 0..n {
                    if m[(i, k)].abs() > tol.residue {
                        entries.push(json!([i, k, num(m[(i, k)])]));
                    }
                }
            }
            json!({ "j": j + 1, "entries": entries })
        })
        .collect();
    let payload = json!({
        "index_base": 0,
        "expansion": "stacked ketkets = sum_j u^(N-j) (-v)^(j-1) M(j)",
        "matrices": list,
    });
    Ok(Response::new(json!({ "n": n }), payload))
}

fn ep_report(n: usize, lambdas: &[f64]) -> Outcome {
    let report = ep_collapse_report(n, lambdas)?;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "lambda": num(r.lambda),
                "energy_spread": num(r.energy_spread),
                "max_cos_h": num(r.max_cos_h),
                "max_cos_hdag": num(r.max_cos_hdag),
                "theta_min_eig": num(r.theta_min_eig),
            })
        })
        .collect();
    let params = json!({ "n": n, "lambdas": lambdas.iter().map(|&x| num(x)).collect::<Vec<_>>() });
    Ok(Response::new(params, json!({ "rows": rows, "monotone": true })))
}

fn domain(a: &crate::DomainArgs, tol: &Tolerances) -> Outcome {
    let given = [a.a, a.b, a.c, a.d];
    let j = a.n / 2;
    if given.iter().skip(j).any(Option::is_some) {
        return Err(Failure::usage(format!("N = {} takes {j} coefficients", a.n)));
    }
    let coeffs: Vec<f64> = given[..j.min(4)]
        .iter()
        .zip(["A", "B", "C", "D"])
        .map(|(x, name)| x.ok_or_else(|| Failure::usage(format!("--{name} is required for N = {}", a.n))))
        .collect::<Result<_, _>>()?;
    let mut spec = LayerSpec::with_known_bounds(a.n)?;
    if a.mu.is_some() {
        spec.mu = a.mu;
    }
    if a.nu.is_some() {
        spec.nu = a.nu;
    }
    let coeffs = MultiParamCoeffs::new(coeffs);
    let class = layer_check_with(&spec, &coeffs, tol)?;
    let (lo, hi) = spec.bounds()?;
    let mut payload = json!({
        "combo": spec.combo.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "functional": num(spec.functional(&coeffs)?),
        "bounds": [num(lo), num(hi)],
        "boundary_distance": num(spec.boundary_distance(&coeffs)?),
        "class": class.as_str(),
    });
    if a.validate {
        let report = layer_cross_validate_with(a.n, std::slice::from_ref(&coeffs), a.lambda_small, tol)?;
        payload["validation"] = match report.rows.first() {
            Some(r) => json!({
                "lambda_small": num(a.lambda_small),
                "excluded": false,
                "all_real": r.all_real,
                "max_imag": num(r.max_imag),
                "agree": r.agree,
            }),
            None => json!({ "lambda_small": num(a.lambda_small), "excluded": true }),
        };
    }
    let params = json!({
        "n": a.n,
        "coeffs": coeffs.as_slice().iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "mu": a.mu.map(num),
        "nu": a.nu.map(num),
        "validate": a.validate,
        "lambda_small": num(a.lambda_small),
    });
    Ok(Response::new(params, payload))
}
