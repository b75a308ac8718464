//! JSON encodings for matrices, spaces, measures, POVMs, dilations, kernels,
//! density operators and verification reports.
//!
//! Complex scalars are `[re, im]` pairs. Maps keyed by atom label are written
//! in atom order. Product spaces carry their factors:
//! `{"atoms": ["a|x", ...], "left": {"atoms": [...]}, "right": {"atoms": [...]}}`
//! where `atoms` may be omitted on input.

use serde_json::{json, Map, Value};

use crate::classical::{FiniteMeasure, JointMeasure};
use crate::dilation::NaimarkDilation;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::measure::{product, Event, FiniteSpace};
use crate::opkernels::OperatorKernel;
use crate::povm::{Povm, ValidationReport};
use crate::qpoly::{ContractionReport, DisintegrationResult, TensorDilationReport, TensorRnReport};
use crate::scalar::{Cplx, Real};
use crate::states::{DensityOperator, ScalarKernel};

fn parse_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

/// Parses text, reporting syntax errors with line and column.
pub fn parse_value(text: &str) -> Result<Value> {
    // serde_json messages end with "at line L column C"
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(path, format!("missing field \"{key}\"")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(path, "expected a number"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(path, "expected an object"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| parse_err(path, "expected a string"))
}

fn num<T: Real>(x: T) -> Value {
    json!(x.as_f64())
}

fn nums<T: Real>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn matrix_to_json<T: Real>(m: &ComplexMatrix<T>) -> Value {
    let data: Vec<Value> = m
        .row_major()
        .into_iter()
        .map(|z| json!([z.re.as_f64(), z.im.as_f64()]))
        .collect();
    json!({"rows": m.rows(), "cols": m.cols(), "data": data})
}

pub fn matrix_from_json<T: Real>(v: &Value, path: &str) -> Result<ComplexMatrix<T>> {
    let rows = as_usize(field(v, "rows", path)?, &format!("{path}.rows"))?;
    let cols = as_usize(field(v, "cols", path)?, &format!("{path}.cols"))?;
    let data = as_array(field(v, "data", path)?, &format!("{path}.data"))?;
    let entries = data
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let p = format!("{path}.data[{k}]");
            match z.as_array().map(Vec::as_slice) {
                Some([re, im]) => Ok(Cplx::new(T::lit(as_f64(re, &p)?), T::lit(as_f64(im, &p)?))),
                _ => Err(parse_err(&p, "expected [re, im]")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_row_major(rows, cols, entries).map_err(|e| parse_err(path, e))
}

pub fn space_to_json(space: &FiniteSpace) -> Value {
    let mut obj = Map::new();
    obj.insert("atoms".into(), json!(space.labels()));
    if let Some(ps) = space.as_product() {
        obj.insert("left".into(), space_to_json(&ps.left));
        obj.insert("right".into(), space_to_json(&ps.right));
    }
    Value::Object(obj)
}

pub fn space_from_json(v: &Value, path: &str) -> Result<FiniteSpace> {
    if let (Some(l), Some(r)) = (v.get("left"), v.get("right")) {
        let left = space_from_json(l, &format!("{path}.left"))?;
        let right = space_from_json(r, &format!("{path}.right"))?;
        let joint = product(&left, &right).joint;
        if let Some(atoms) = v.get("atoms") {
            let labels: Vec<&str> = as_array(atoms, &format!("{path}.atoms"))?
                .iter()
                .map(|a| as_str(a, &format!("{path}.atoms")))
                .collect::<Result<_>>()?;
            if labels != joint.labels().iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(parse_err(path, "atoms do not match the product of left and right"));
            }
        }
        return Ok(joint);
    }
    let atoms = as_array(field(v, "atoms", path)?, &format!("{path}.atoms"))?;
    let labels = atoms
        .iter()
        .map(|a| as_str(a, &format!("{path}.atoms")).map(str::to_owned))
        .collect::<Result<Vec<_>>>()?;
    FiniteSpace::new(labels).map_err(|e| parse_err(path, e))
}

pub fn event_to_json(event: &Event) -> Value {
    json!({"space": space_to_json(event.space()), "members": event.labels()})
}

pub fn event_from_json(v: &Value, path: &str) -> Result<Event> {
    let space = space_from_json(field(v, "space", path)?, &format!("{path}.space"))?;
    let members = as_array(field(v, "members", path)?, &format!("{path}.members"))?
        .iter()
        .map(|m| as_str(m, &format!("{path}.members")))
        .collect::<Result<Vec<_>>>()?;
    Event::from_labels(&space, &members).map_err(|e| parse_err(path, e))
}

/// Comma separated labels; `{}` or an empty string is the empty event and `*`
/// the full space.
pub fn event_from_labels(space: &FiniteSpace, text: &str) -> Result<Event> {
    let text = text.trim();
    match text {
        "" | "{}" => return Ok(Event::empty(space)),
        "*" => return Ok(Event::full(space)),
        _ => {}
    }
    let inner = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')).unwrap_or(text);
    let labels: Vec<&str> = inner.split(',').map(str::trim).collect();
    Event::from_labels(space, &labels)
}

fn weights_object<T: Real>(space: &FiniteSpace, weights: &[T]) -> Value {
    let map: Map<String, Value> = space
        .labels()
        .iter()
        .zip(weights)
        .map(|(l, &w)| (l.clone(), num(w)))
        .collect();
    Value::Object(map)
}

pub fn measure_to_json<T: Real>(mu: &FiniteMeasure<T>) -> Value {
    json!({"space": space_to_json(mu.space()), "weights": weights_object(mu.space(), mu.weights())})
}

pub fn joint_measure_to_json<T: Real>(nu: &JointMeasure<T>) -> Value {
    let joint = &nu.space().joint;
    json!({"space": space_to_json(joint), "weights": weights_object(joint, nu.weights())})
}

/// Either kind of measure, depending on whether the space is a product.
#[derive(Debug, Clone)]
pub enum MeasureArtifact<T: Real> {
    Single(FiniteMeasure<T>),
    Joint(JointMeasure<T>),
}

pub fn measure_from_json<T: Real>(v: &Value, path: &str) -> Result<MeasureArtifact<T>> {
    let space = space_from_json(field(v, "space", path)?, &format!("{path}.space"))?;
    let wpath = format!("{path}.weights");
    let obj = as_object(field(v, "weights", path)?, &wpath)?;
    let mut weights = vec![T::zero(); space.len()];
    for (label, w) in obj {
        let i = space
            .index_of(label)
            .ok_or_else(|| parse_err(&wpath, format!("unknown atom \"{label}\"")))?;
        weights[i] = T::lit(as_f64(w, &format!("{wpath}.{label}"))?);
    }
    match space.as_product() {
        Some(ps) => Ok(MeasureArtifact::Joint(JointMeasure::new(&ps, weights)?)),
        None => Ok(MeasureArtifact::Single(FiniteMeasure::new(&space, weights)?)),
    }
}

/// The `kind` field of a POVM file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmKind {
    Povm,
    Pvm,
}

impl PovmKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PovmKind::Povm => "povm",
            PovmKind::Pvm => "pvm",
        }
    }
}

pub fn povm_to_json<T: Real>(q: &Povm<T>, kind: PovmKind) -> Value {
    let effects: Map<String, Value> = q
        .space()
        .labels()
        .iter()
        .zip(q.effects())
        .map(|(l, e)| (l.clone(), matrix_to_json(e)))
        .collect();
    json!({
        "kind": kind.as_str(),
        "space": space_to_json(q.space()),
        "dim": q.dim(),
        "effects": effects,
    })
}

pub fn povm_from_json<T: Real>(v: &Value, path: &str) -> Result<(Povm<T>, PovmKind)> {
    let kind = match v.get("kind").map(|k| as_str(k, &format!("{path}.kind"))).transpose()? {
        None | Some("povm") => PovmKind::Povm,
        Some("pvm") => PovmKind::Pvm,
        Some(other) => return Err(parse_err(path, format!("unknown kind \"{other}\""))),
    };
    let space = space_from_json(field(v, "space", path)?, &format!("{path}.space"))?;
    let dim = as_usize(field(v, "dim", path)?, &format!("{path}.dim"))?;
    let epath = format!("{path}.effects");
    let obj = as_object(field(v, "effects", path)?, &epath)?;
    let mut effects: Vec<Option<ComplexMatrix<T>>> = vec![None; space.len()];
    for (label, m) in obj {
        let i = space
            .index_of(label)
            .ok_or_else(|| parse_err(&epath, format!("unknown atom \"{label}\"")))?;
        let m = matrix_from_json(m, &format!("{epath}.{label}"))?;
        if m.shape() != (dim, dim) {
            return Err(parse_err(&format!("{epath}.{label}"), format!("expected a {dim}x{dim} matrix")));
        }
        effects[i] = Some(m);
    }
    let effects = effects
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| parse_err(&epath, format!("missing effect for atom \"{}\"", space.label(i)))))
        .collect::<Result<Vec<_>>>()?;
    Ok((Povm::new(&space, effects)?, kind))
}

pub fn dilation_to_json<T: Real>(d: &NaimarkDilation<T>) -> Value {
    let blocks: Map<String, Value> = d
        .source()
        .space()
        .labels()
        .iter()
        .zip(d.blocks())
        .map(|(l, r)| (l.clone(), json!([r.start, r.end])))
        .collect();
    json!({"big_dim": d.big_dim(), "V": matrix_to_json(d.isometry()), "blocks": blocks})
}

pub fn kernel_to_json<T: Real>(k: &OperatorKernel<T>) -> Value {
    let blocks: Vec<Value> = (0..k.len())
        .map(|i| Value::Array((0..k.len()).map(|j| matrix_to_json(k.block(i, j))).collect()))
        .collect();
    json!({"indices": k.labels(), "dim": k.dim(), "blocks": blocks})
}

/// Row `i` of `blocks` may hold `n − i` entries (the upper triangle from the
/// diagonal) or `n` entries with `null` allowed below the diagonal. Missing
/// blocks are filled by Hermitian symmetry.
pub fn kernel_from_json<T: Real>(v: &Value, path: &str, tol: &Tolerance<T>) -> Result<OperatorKernel<T>> {
    let indices = as_array(field(v, "indices", path)?, &format!("{path}.indices"))?
        .iter()
        .map(|s| match s {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(parse_err(&format!("{path}.indices"), "expected strings")),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = indices.len();
    let dim = as_usize(field(v, "dim", path)?, &format!("{path}.dim"))?;
    let bpath = format!("{path}.blocks");
    let rows = as_array(field(v, "blocks", path)?, &bpath)?;
    if rows.len() != n {
        return Err(parse_err(&bpath, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut grid: Vec<Vec<Option<ComplexMatrix<T>>>> = vec![vec![None; n]; n];
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{bpath}[{i}]");
        let row = as_array(row, &rpath)?;
        let offset = if row.len() == n {
            0
        } else if row.len() == n - i {
            i
        } else {
            return Err(parse_err(&rpath, format!("expected {} or {n} entries", n - i)));
        };
        for (k, entry) in row.iter().enumerate() {
            let j = k + offset;
            if entry.is_null() {
                if j >= i {
                    return Err(parse_err(&format!("{rpath}[{k}]"), "upper-triangle blocks are required"));
                }
                continue;
            }
            let m: ComplexMatrix<T> = matrix_from_json(entry, &format!("{rpath}[{k}]"))?;
            if m.shape() != (dim, dim) {
                return Err(parse_err(&format!("{rpath}[{k}]"), format!("expected a {dim}x{dim} matrix")));
            }
            grid[i][j] = Some(m);
        }
    }
    for i in 0..n {
        for j in 0..i {
            if grid[i][j].is_none() {
                grid[i][j] = Some(grid[j][i].as_ref().expect("upper triangle present").adjoint());
            }
        }
    }
    let grid = grid
        .into_iter()
        .map(|row| row.into_iter().map(|m| m.expect("filled")).collect())
        .collect();
    OperatorKernel::new(indices, dim, grid, tol)
}

pub fn scalar_kernel_to_json<T: Real>(c: &ScalarKernel<T>) -> Value {
    json!({"indices": c.labels(), "values": matrix_to_json(c.values())})
}

pub fn density_to_json<T: Real>(rho: &DensityOperator<T>) -> Value {
    json!({
        "dim": rho.dim(),
        "split": rho.split().map(|(a, b)| json!([a, b])).unwrap_or(Value::Null),
        "matrix": matrix_to_json(rho.matrix()),
    })
}

/// A density file before its state axioms are checked.
#[derive(Debug, Clone)]
pub struct RawDensity<T: Real> {
    pub dim: usize,
    pub split: Option<(usize, usize)>,
    pub matrix: ComplexMatrix<T>,
}

impl<T: Real> RawDensity<T> {
    pub fn into_density(self, tol: &Tolerance<T>) -> Result<DensityOperator<T>> {
        match self.split {
            Some((a, b)) => DensityOperator::with_split(self.matrix, a, b, tol),
            None => DensityOperator::new(self.matrix, tol),
        }
    }
}

pub fn density_from_json<T: Real>(v: &Value, path: &str) -> Result<RawDensity<T>> {
    let dim = as_usize(field(v, "dim", path)?, &format!("{path}.dim"))?;
    let split = match v.get("split") {
        None | Some(Value::Null) => None,
        Some(s) => match s.as_array().map(Vec::as_slice) {
            Some([a, b]) => Some((as_usize(a, &format!("{path}.split"))?, as_usize(b, &format!("{path}.split"))?)),
            _ => return Err(parse_err(&format!("{path}.split"), "expected [d1, d2] or null")),
        },
    };
    let matrix = matrix_from_json(field(v, "matrix", path)?, &format!("{path}.matrix"))?;
    if matrix.shape() != (dim, dim) {
        return Err(parse_err(path, format!("matrix is not {dim}x{dim}")));
    }
    if let Some((a, b)) = split {
        if a * b != dim {
            return Err(parse_err(&format!("{path}.split"), format!("{a}x{b} does not equal dim {dim}")));
        }
    }
    Ok(RawDensity { dim, split, matrix })
}

/// Any artifact the command line reads.
#[derive(Debug, Clone)]
pub enum Artifact<T: Real> {
    Povm(Povm<T>, PovmKind),
    Kernel(OperatorKernel<T>),
    Density(RawDensity<T>),
    Measure(MeasureArtifact<T>),
}

/// Detects the artifact type from its fields: `effects` (POVM or PVM),
/// `indices` (kernel), `matrix` (density operator) or `weights` (measure).
pub fn parse_artifact<T: Real>(text: &str, tol: &Tolerance<T>) -> Result<Artifact<T>> {
    let v = parse_value(text)?;
    if !v.is_object() {
        return Err(parse_err("$", "expected an object"));
    }
    if v.get("effects").is_some() {
        let (q, kind) = povm_from_json(&v, "$")?;
        Ok(Artifact::Povm(q, kind))
    } else if v.get("indices").is_some() {
        Ok(Artifact::Kernel(kernel_from_json(&v, "$", tol)?))
    } else if v.get("matrix").is_some() {
        Ok(Artifact::Density(density_from_json(&v, "$")?))
    } else if v.get("weights").is_some() {
        Ok(Artifact::Measure(measure_from_json(&v, "$")?))
    } else {
        Err(parse_err("$", "unrecognized artifact (expected effects, indices, matrix or weights)"))
    }
}

pub fn validation_to_json(report: &ValidationReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "worst_residual": c.worst_residual}))
        .collect();
    json!({"kind": report.kind, "pass": report.passed(), "checks": checks})
}

pub fn disintegration_to_json<T: Real>(res: &DisintegrationResult<T>, tol: &Tolerance<T>) -> Value {
    json!({
        "theorem": "4-2",
        "side": match res.conditioned {
            crate::measure::Coordinate::Second => "right",
            crate::measure::Coordinate::First => "left",
        },
        "event": res.event.labels(),
        "index_events": res.index_events.len(),
        "rank": res.factorization.rank(),
        "residuals": {
            "gamma_vs_compressed_projection": num(res.gamma_residual),
            "reconstruction": num(res.reconstruction_residual),
            "intertwiner_defect": num(res.intertwiner_defect),
            "rectangle": num(res.rectangle_residual),
            "commutator": num(res.commutator_residual),
        },
        "domination_margin": num(res.domination_margin),
        "gamma_spectrum": nums(&res.gamma_spectrum),
        "pass": res.passed(tol),
    })
}

pub fn tensor_to_json<T: Real>(
    dil: &TensorDilationReport<T>,
    rn: &TensorRnReport<T>,
    tol: &Tolerance<T>,
) -> Value {
    json!({
        "theorem": "4-5",
        "residuals": {
            "rectangle_joint_dilation": num(dil.joint_dilation_residual),
            "rectangle_factor_dilations": num(dil.factor_dilation_residual),
            "right_gamma": num(rn.right.gamma_residual),
            "left_gamma": num(rn.left.gamma_residual),
            "right_reconstruction": num(rn.right.reconstruction_residual),
            "left_reconstruction": num(rn.left.reconstruction_residual),
        },
        "rectangles_checked": dil.rectangles_checked,
        "gamma_spectrum": nums(&rn.right.gamma_spectrum),
        "left_gamma_spectrum": nums(&rn.left.gamma_spectrum),
        "pass": dil.max_residual() <= tol.scaled(T::lit(10.0)) && rn.passed(tol),
    })
}

pub fn contraction_to_json<T: Real>(rep: &ContractionReport<T>) -> Value {
    json!({
        "theorem": "corollary",
        "samples": rep.samples,
        "violations": rep.violations,
        "residuals": {
            "max_excess": num(rep.max_excess),
            "range": num(rep.max_range_residual),
            "compatibility": num(rep.compatibility_residual),
        },
        "gamma_spectrum": [],
        "pass": rep.passed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::product;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_format() {
        let m = ComplexMatrix::<f64>::from_row_major(1, 2, vec![Cplx::new(1.0, 0.0), Cplx::new(0.0, -2.5)]).unwrap();
        let v = matrix_to_json(&m);
        assert_eq!(v, json!({"rows": 1, "cols": 2, "data": [[1.0, 0.0], [0.0, -2.5]]}));
        let back: ComplexMatrix<f64> = matrix_from_json(&v, "$").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_matrices() {
        let bad = json!({"rows": 2, "cols": 2, "data": [[1.0, 0.0]]});
        assert!(matches!(matrix_from_json::<f64>(&bad, "$"), Err(Error::Parse(_))));
        let bad = json!({"rows": 1, "cols": 1, "data": [[1.0]]});
        assert!(matrix_from_json::<f64>(&bad, "$").is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_value("{\n  \"rows\": 2,\n  \"data\": [").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn product_povm_round_trip_keeps_atom_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps = product(&FiniteSpace::new(["z", "a"]).unwrap(), &FiniteSpace::new(["y", "b"]).unwrap());
        let q = random::povm::<f64, _>(&mut rng, &ps.joint, 2);
        let v = povm_to_json(&q, PovmKind::Povm);
        let keys: Vec<&String> = v["effects"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["z|y", "z|b", "a|y", "a|b"]);
        let text = serde_json::to_string(&v).unwrap();
        let (back, kind) = povm_from_json::<f64>(&parse_value(&text).unwrap(), "$").unwrap();
        assert_eq!(kind, PovmKind::Povm);
        assert_eq!(back.space(), q.space());
        assert!(back.space().is_product());
        for (a, b) in back.effects().iter().zip(q.effects()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn upper_triangle_kernel_input() {
        let tol = Tolerance::default();
        let one = json!({"rows": 1, "cols": 1, "data": [[1.0, 0.0]]});
        let off = json!({"rows": 1, "cols": 1, "data": [[0.5, 0.5]]});
        let v = json!({"indices": ["s", "t"], "dim": 1, "blocks": [[one, off], [one]]});
        let k = kernel_from_json::<f64>(&v, "$", &tol).unwrap();
        assert_eq!(k.block(1, 0).get(0, 0), Cplx::new(0.5, -0.5));
        let v = json!({"indices": ["s", "t"], "dim": 1, "blocks": [[one, off], [null, one]]});
        assert!(kernel_from_json::<f64>(&v, "$", &tol).is_ok());
        let v = json!({"indices": ["s", "t"], "dim": 1, "blocks": [[one, null], [null, one]]});
        assert!(kernel_from_json::<f64>(&v, "$", &tol).is_err());
        let back = kernel_from_json::<f64>(&kernel_to_json(&k), "$", &tol).unwrap();
        assert_eq!(back.max_abs_diff(&k).unwrap(), 0.0);
    }

    #[test]
    fn density_and_measure_formats() {
        let rho = DensityOperator::<f64>::maximally_mixed(4).unwrap().split_as(2, 2).unwrap();
        let v = density_to_json(&rho);
        assert_eq!(v["split"], json!([2, 2]));
        let raw = density_from_json::<f64>(&v, "$").unwrap();
        assert_eq!(raw.split, Some((2, 2)));
        assert!(raw.into_density(&Tolerance::default()).is_ok());

        let ps = product(&FiniteSpace::new(["a", "b"]).unwrap(), &FiniteSpace::new(["x"]).unwrap());
        let nu = JointMeasure::<f64>::new(&ps, vec![0.25, 0.75]).unwrap();
        let v = joint_measure_to_json(&nu);
        assert_eq!(v["weights"], json!({"a|x": 0.25, "b|x": 0.75}));
        match measure_from_json::<f64>(&v, "$").unwrap() {
            MeasureArtifact::Joint(back) => assert_eq!(back.weights(), nu.weights()),
            MeasureArtifact::Single(_) => panic!("expected a joint measure"),
        }
    }

    #[test]
    fn event_label_syntax() {
        let s = FiniteSpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(event_from_labels(&s, "a, c").unwrap().members(), [0, 2]);
        assert_eq!(event_from_labels(&s, "{b}").unwrap().members(), [1]);
        assert!(event_from_labels(&s, "{}").unwrap().is_empty());
        assert_eq!(event_from_labels(&s, "*").unwrap().len(), 3);
        assert!(event_from_labels(&s, "d").is_err());
        let e = event_from_labels(&s, "c,a").unwrap();
        assert_eq!(event_from_json(&event_to_json(&e), "$").unwrap(), e);
    }
}
