use std::fs;
use std::path::Path;

use ncpoly::json::{self, Artifact, MeasureArtifact, PovmKind};
use ncpoly::linalg::{is_psd, min_eigenvalue};
use ncpoly::measure::event_family;
use ncpoly::povm::{validate_povm, validate_pvm, AxiomCheck, Pvm, ValidationReport};
use ncpoly::qpoly::{disintegrate, disintegrate_left, make_qpoly};
use ncpoly::suite::{run_suite, SuiteConfig};
use ncpoly::{Error, Tolerance64};
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::Side;

/// Process outcome, mapped onto the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Violation,
    Usage,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Violation => 1,
            Status::Usage => 2,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

pub fn emit(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

/// Reports an error as JSON and picks the exit status: malformed input is a
/// usage error, anything the mathematics rejects is a violation.
pub fn report_error(e: &Error) -> Status {
    let status = match e {
        Error::Parse(_) => Status::Usage,
        _ => Status::Violation,
    };
    eprintln!("error: {e}");
    emit(&json!({"error": e.to_string(), "pass": false}));
    status
}

fn usage(msg: impl std::fmt::Display) -> Status {
    eprintln!("error: {msg}");
    emit(&json!({"error": msg.to_string(), "pass": false}));
    Status::Usage
}

fn load(path: &Path, tol: &Tolerance64) -> Result<Artifact<f64>, Status> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    json::parse_artifact(&text, tol).map_err(|e| match e {
        Error::Parse(msg) => usage(format!("{}: {msg}", path.display())),
        other => report_error(&other),
    })
}

fn check(name: &'static str, residual: f64, passed: bool) -> AxiomCheck {
    AxiomCheck { name, passed, worst_residual: residual }
}

fn print_checks(report: &ValidationReport) {
    for c in &report.checks {
        let mark = if c.passed { "ok" } else { "FAIL" };
        eprintln!("  {:<18} {:<4} worst residual {:.3e}", c.name, mark, c.worst_residual);
    }
    eprintln!("{}: {}", report.kind, if report.passed() { "valid" } else { "INVALID" });
}

pub fn validate(path: &Path, tol: &Tolerance64) -> Status {
    let artifact = match load(path, tol) {
        Ok(a) => a,
        Err(status) => return status,
    };
    let report = match artifact {
        Artifact::Povm(q, PovmKind::Povm) => validate_povm(&q, tol),
        Artifact::Povm(q, PovmKind::Pvm) => validate_pvm(&Pvm::from_povm(q), tol),
        Artifact::Kernel(k) => {
            let g = k.gram();
            let min = min_eigenvalue(&g).unwrap_or(f64::NAN);
            let ok = is_psd(&g, tol).unwrap_or(false);
            ValidationReport { kind: "kernel", checks: vec![check("positive_definite", (-min).max(0.0), ok)] }
        }
        Artifact::Density(raw) => {
            let (_, anti) = raw.matrix.hermitian_part();
            let min = min_eigenvalue(&raw.matrix).unwrap_or(f64::NAN);
            let trace_gap = (raw.matrix.trace() - ncpoly::Cplx::new(1.0, 0.0)).norm();
            let scale = raw.matrix.max_abs();
            ValidationReport {
                kind: "density",
                checks: vec![
                    check("self_adjointness", anti, anti <= tol.scaled(scale)),
                    check("positivity", (-min).max(0.0), is_psd(&raw.matrix, tol).unwrap_or(false)),
                    check("unit_trace", trace_gap, trace_gap <= tol.scaled(raw.dim as f64)),
                ],
            }
        }
        Artifact::Measure(m) => {
            let (total, n) = match &m {
                MeasureArtifact::Single(mu) => (mu.total(), mu.space().len()),
                MeasureArtifact::Joint(nu) => (nu.total(), nu.space().joint.len()),
            };
            let gap = (total - 1.0).abs();
            ValidationReport {
                kind: "measure",
                checks: vec![
                    check("nonnegativity", 0.0, true),
                    check("normalization", gap, gap <= tol.scaled(n as f64)),
                ],
            }
        }
    };
    print_checks(&report);
    let mut out = json::validation_to_json(&report);
    out["path"] = json!(path.display().to_string());
    emit(&out);
    Status::from_pass(report.passed())
}

pub fn dilate(path: &Path, compress: bool, out: Option<&Path>, tol: &Tolerance64) -> Status {
    let q = match load(path, tol) {
        Ok(Artifact::Povm(q, _)) => q,
        Ok(_) => return usage(format!("{}: expected a POVM or PVM file", path.display())),
        Err(status) => return status,
    };
    let dil = match ncpoly::dilation::dilate(&q, compress, tol) {
        Ok(d) => d,
        Err(e) => {
            print_checks(&validate_povm(&q, tol));
            return report_error(&e);
        }
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let events = event_family(q.space(), 1 << 12, 64, &mut rng);
    let residual = match dil.max_reconstruction_residual(&events) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let defect = dil.isometry_defect();
    eprintln!("big_dim {} (source dim {}, {} atoms)", dil.big_dim(), q.dim(), q.space().len());
    eprintln!("max reconstruction residual {residual:.3e} over {} events", events.len());
    eprintln!("isometry defect {defect:.3e}");
    let pass = residual <= 10.0 * tol.abs && defect <= tol.abs;
    let mut report = json!({
        "big_dim": dil.big_dim(),
        "compress": compress,
        "events_checked": events.len(),
        "max_reconstruction_residual": residual,
        "isometry_defect": defect,
        "pass": pass,
    });
    let exported = json::dilation_to_json(&dil);
    match out {
        Some(p) => {
            let text = serde_json::to_string_pretty(&exported).expect("values serialize");
            if let Err(e) = fs::write(p, text) {
                return usage(format!("cannot write {}: {e}", p.display()));
            }
            report["out"] = json!(p.display().to_string());
        }
        None => report["dilation"] = exported,
    }
    emit(&report);
    Status::from_pass(pass)
}

pub fn rn(path: &Path, event: &str, side: Side, tol: &Tolerance64) -> Status {
    let q = match load(path, tol) {
        Ok(Artifact::Povm(q, _)) => q,
        Ok(_) => return usage(format!("{}: expected a POVM or PVM file", path.display())),
        Err(status) => return status,
    };
    let qp = match make_qpoly(&q, tol) {
        Ok(qp) => qp,
        Err(e) => return report_error(&e),
    };
    let factor = match side {
        Side::Right => &qp.product().right,
        Side::Left => &qp.product().left,
    };
    let ev = match json::event_from_labels(factor, event) {
        Ok(e) => e,
        Err(e) => return usage(format!("--B: {e}")),
    };
    let result = match side {
        Side::Right => disintegrate(&qp, &ev, tol),
        Side::Left => disintegrate_left(&qp, &ev, tol),
    };
    let res = match result {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let spectrum: Vec<String> = res.gamma_spectrum.iter().map(|x| format!("{x:.6}")).collect();
    eprintln!("conditioning event {} ({:?} side), kernel rank {}", res.event, side, res.factorization.rank());
    eprintln!("gamma spectrum [{}]", spectrum.join(", "));
    eprintln!("|gamma - compressed projection| = {:.3e}", res.gamma_residual);
    eprintln!("domination margin {:.3e}", res.domination_margin);
    let mut report = json::disintegration_to_json(&res, tol);
    if q.dim() == 1 {
        match res.atom_conditionals(tol) {
            Ok(values) => {
                let other = match side {
                    Side::Right => &qp.product().left,
                    Side::Left => &qp.product().right,
                };
                let map: serde_json::Map<String, Value> = other
                    .labels()
                    .iter()
                    .zip(&values)
                    .map(|(l, v)| (l.clone(), json!(v)))
                    .collect();
                for (l, v) in other.labels().iter().zip(&values) {
                    match v {
                        Some(v) => eprintln!("  P({} | {l}) = {v:.12}", res.event),
                        None => eprintln!("  P({} | {l}) undefined (zero mass)", res.event),
                    }
                }
                report["atom_conditionals"] = Value::Object(map);
            }
            Err(e) => return report_error(&e),
        }
    }
    let pass = res.passed(tol);
    emit(&report);
    Status::from_pass(pass)
}

pub fn suite(cfg: &SuiteConfig, out: Option<&Path>) -> Status {
    let report = match run_suite(cfg) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    for p in &report.properties {
        let mark = if p.failed == 0 { "PASS" } else { "FAIL" };
        eprintln!(
            "{mark} {:<36} {:>4}/{:<4} worst {:.3e}",
            p.name, p.passed, p.trials, p.worst_residual
        );
        if let Some(f) = &p.failure {
            eprintln!("     first failure: trial {} seed {} residual {:.3e}", f.trial, f.seed, f.residual);
        }
    }
    eprintln!(
        "{} properties, {} failures (seed {}, {} trials)",
        report.properties.len(),
        report.total_failures,
        cfg.seed,
        cfg.trials
    );
    let value = report.to_json();
    match out {
        Some(p) => {
            let text = serde_json::to_string_pretty(&value).expect("values serialize");
            if let Err(e) = fs::write(p, text) {
                return usage(format!("cannot write {}: {e}", p.display()));
            }
            emit(&json!({"out": p.display().to_string(), "pass": report.pass, "total_failures": report.total_failures}));
        }
        None => emit(&value),
    }
    Status::from_pass(report.pass)
}
