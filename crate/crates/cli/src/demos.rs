use ncpoly::classical::{conditional, disintegration_check, marginals, JointMeasure};
use ncpoly::dilation::dilate;
use ncpoly::json;
use ncpoly::measure::{all_events, product, Coordinate, Event, FiniteSpace};
use ncpoly::opkernels::is_pd;
use ncpoly::povm::Povm;
use ncpoly::qpoly::{disintegrate, disintegrate_left, make_qpoly, tensor_dilation_check, tensor_rn_check};
use ncpoly::states::{in_poly, link_kernels, partial_traces, slice, DensityOperator, ScalarKernel};
use ncpoly::{random, ComplexMatrix64, Cplx, Error, Tolerance64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::{emit, report_error, Status};

type M = ComplexMatrix64;
type DemoFn = fn(&Tolerance64) -> Result<(Value, bool), Error>;

pub const DEMOS: [(&str, DemoFn); 6] = [
    ("classical-bayes", classical_bayes),
    ("naimark", naimark),
    ("disintegration", disintegration),
    ("tensor", tensor),
    ("link-kernels", link),
    ("entangled-marginals", entangled_marginals),
];

pub fn run(name: &str, tol: &Tolerance64) -> Status {
    let Some((_, demo)) = DEMOS.iter().find(|(n, _)| *n == name) else {
        let names: Vec<&str> = DEMOS.iter().map(|(n, _)| *n).collect();
        eprintln!("error: unknown demo \"{name}\"");
        eprintln!("available demos: {}", names.join(", "));
        emit(&json!({"error": format!("unknown demo \"{name}\""), "available": names, "pass": false}));
        return Status::Usage;
    };
    match demo(tol) {
        Ok((mut report, pass)) => {
            report["demo"] = json!(name);
            report["pass"] = json!(pass);
            eprintln!("{}", if pass { "all identities verified" } else { "VIOLATION" });
            emit(&report);
            Status::from_pass(pass)
        }
        Err(e) => report_error(&e),
    }
}

fn trine() -> Povm<f64> {
    let space = FiniteSpace::new(["t0", "t1", "t2"]).expect("labels");
    let effects = (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let psi = [Cplx::new(a.cos(), 0.0), Cplx::new(a.sin(), 0.0)];
            M::ket_bra(&psi, &psi).scale_real(2.0 / 3.0)
        })
        .collect();
    Povm::new(&space, effects).expect("2x2 effects")
}

fn classical_bayes(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let ps = product(&FiniteSpace::new(["rain", "dry", "fog"])?, &FiniteSpace::new(["wet", "clear"])?);
    let nu = JointMeasure::<f64>::from_table(&ps, &[vec![0.30, 0.05], vec![0.10, 0.55], vec![0.0, 0.0]])?;
    let (m1, _) = marginals(&nu);
    eprintln!("joint table nu(a,b) and the reconstruction mu1(a) * nu(b|a)");
    eprintln!("{:<6} {:<6} {:>10} {:>10} {:>10} {:>10}", "a", "b", "nu(a,b)", "mu1(a)", "nu(b|a)", "residual");
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for a in 0..ps.left.len() {
        let cond = conditional(&nu, Coordinate::First, a).ok();
        for b in 0..ps.right.len() {
            let joint = nu.weight(a, b);
            let (c, res) = match &cond {
                Some(c) => (Some(c.weight(b)), (joint - m1.weight(a) * c.weight(b)).abs()),
                None => (None, 0.0),
            };
            worst = worst.max(res);
            let shown = c.map(|c| format!("{c:.6}")).unwrap_or_else(|| "-".into());
            eprintln!(
                "{:<6} {:<6} {:>10.6} {:>10.6} {:>10} {:>10.2e}",
                ps.left.label(a),
                ps.right.label(b),
                joint,
                m1.weight(a),
                shown,
                res
            );
            rows.push(json!({
                "a": ps.left.label(a), "b": ps.right.label(b),
                "joint": joint, "marginal": m1.weight(a), "conditional": c, "residual": res,
            }));
        }
    }
    let report = disintegration_check(&nu, tol);
    eprintln!("rectangle sweep over {} rectangles: worst {:.2e}", report.rectangles_checked, report.max_violation());

    // the same conditionals through the dim-1 quantum pipeline
    let qp = make_qpoly(&Povm::from_joint(&nu), tol)?;
    let mut quantum_gap = 0.0f64;
    for b in all_events(&ps.right)? {
        let got = disintegrate(&qp, &b, tol)?.atom_conditionals(tol)?;
        for (a, g) in got.iter().enumerate() {
            if let (Ok(c), Some(g)) = (conditional(&nu, Coordinate::First, a), g) {
                quantum_gap = quantum_gap.max((c.measure_of(&b)? - g).abs());
            }
        }
    }
    eprintln!("quantum disintegration vs classical conditionals: worst {quantum_gap:.2e}");
    let pass = worst <= tol.abs && report.passed(tol) && quantum_gap <= tol.abs;
    Ok((
        json!({
            "measure": json::joint_measure_to_json(&nu),
            "rows": rows,
            "max_residual": worst,
            "rectangle_residual": report.max_violation(),
            "quantum_residual": quantum_gap,
        }),
        pass,
    ))
}

fn naimark(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let q = trine();
    let mut out = serde_json::Map::new();
    let mut pass = true;
    for compress in [false, true] {
        let dil = dilate(&q, compress, tol)?;
        eprintln!("dilation (compress = {compress}): big_dim {}, |V*V - I| = {:.2e}", dil.big_dim(), dil.isometry_defect());
        let mut events = Vec::new();
        for a in all_events(q.space())? {
            let res = dil.reconstruct(&a)?.max_abs_diff(&q.evaluate(&a)?);
            eprintln!("  V*P({a})V = Q({a})   residual {res:.2e}");
            pass &= res <= 10.0 * tol.abs;
            events.push(json!({"event": a.labels(), "residual": res}));
        }
        pass &= dil.isometry_defect() <= tol.abs;
        let key = if compress { "compressed" } else { "full" };
        out.insert(
            key.into(),
            json!({"big_dim": dil.big_dim(), "isometry_defect": dil.isometry_defect(), "events": events}),
        );
    }
    out.insert("povm".into(), json::povm_to_json(&q, json::PovmKind::Povm));
    Ok((Value::Object(out), pass))
}

fn disintegration(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ps = product(&FiniteSpace::new(["x0", "x1"])?, &FiniteSpace::new(["y0", "y1", "y2"])?);
    let q = random::povm::<f64, _>(&mut rng, &ps.joint, 2);
    let qp = make_qpoly(&q, tol)?;
    let mut results = Vec::new();
    let mut pass = true;
    eprintln!("dQ(. x B)/dQ1 against the compressed coordinate projection P2(B)");
    for b in all_events(&ps.right)? {
        let r = disintegrate(&qp, &b, tol)?;
        eprintln!(
            "  B = {:<12} spectrum {:<40} residual {:.2e}  margin {:.2e}",
            b.to_string(),
            format!("{:.4?}", r.gamma_spectrum),
            r.gamma_residual,
            r.domination_margin
        );
        pass &= r.passed(tol);
        results.push(json::disintegration_to_json(&r, tol));
    }
    eprintln!("dQ(A x .)/dQ2 against P1(A)");
    for a in all_events(&ps.left)? {
        let r = disintegrate_left(&qp, &a, tol)?;
        eprintln!("  A = {:<12} residual {:.2e}  margin {:.2e}", a.to_string(), r.gamma_residual, r.domination_margin);
        pass &= r.passed(tol);
        results.push(json::disintegration_to_json(&r, tol));
    }
    Ok((json!({"povm": json::povm_to_json(&q, json::PovmKind::Povm), "results": results}), pass))
}

fn tensor(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let q1 = trine();
    let q2 = random::povm::<f64, _>(&mut rng, &FiniteSpace::new(["u", "v"])?, 2);
    let dil = tensor_dilation_check(&q1, &q2, tol)?;
    eprintln!(
        "rectangle identity over {} rectangles: joint dilation {:.2e}, factor dilations {:.2e}",
        dil.rectangles_checked, dil.joint_dilation_residual, dil.factor_dilation_residual
    );
    let mut checks = Vec::new();
    let mut pass = dil.max_residual() <= 10.0 * tol.abs;
    for a in 0..3 {
        for b in 0..2 {
            let ea = Event::atom(q1.space(), a)?;
            let eb = Event::atom(q2.space(), b)?;
            let rn = tensor_rn_check(&q1, &q2, &ea, &eb, tol)?;
            eprintln!(
                "  A = {ea}, B = {eb}: |Gamma - I(x)P2(B)| {:.2e}, |Gamma - P1(A)(x)I| {:.2e}",
                rn.right.gamma_residual, rn.left.gamma_residual
            );
            pass &= rn.passed(tol);
            checks.push(json::tensor_to_json(&dil, &rn, tol));
        }
    }
    Ok((json!({"checks": checks}), pass))
}

fn link(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let xs = [0.0, 0.5, 1.3, 2.0];
    let labels: Vec<String> = xs.iter().map(|x| format!("x={x}")).collect();
    let grid = |f: &dyn Fn(f64, f64) -> f64| M::from_fn(4, 4, |i, j| Cplx::new(f(xs[i], xs[j]), 0.0));
    let c1 = ScalarKernel::new(labels.clone(), grid(&|s, t| (-(s - t) * (s - t)).exp()))?;
    let c2 = ScalarKernel::new(labels, grid(&|s, t| 1.0 + s.min(t)))?;
    let (k, rho1, rho2) = link_kernels(&c1, &c2, 2, tol)?;
    let pd = is_pd(&k, tol);
    let r1 = slice(&k, &rho1)?.values().max_abs_diff(c1.values());
    let r2 = slice(&k, &rho2)?.values().max_abs_diff(c2.values());
    eprintln!("c1 = gaussian kernel, c2 = 1 + min(s,t) on {xs:?}");
    eprintln!("K = c1 rho1 + c2 rho2 positive definite: {pd}");
    eprintln!("tr(rho1 K) = c1   residual {r1:.2e}");
    eprintln!("tr(rho2 K) = c2   residual {r2:.2e}");
    let pass = pd && r1 <= tol.abs && r2 <= tol.abs;
    Ok((
        json!({
            "kernel": json::kernel_to_json(&k),
            "rho1": json::density_to_json(&rho1),
            "rho2": json::density_to_json(&rho2),
            "is_pd": pd,
            "residuals": {"slice1": r1, "slice2": r2},
        }),
        pass,
    ))
}

fn entangled_marginals(tol: &Tolerance64) -> Result<(Value, bool), Error> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Cplx::new(0.0, 0.0);
    let bell = DensityOperator::pure(&[Cplx::new(h, 0.0), z, z, Cplx::new(h, 0.0)])?.split_as(2, 2)?;
    let half = DensityOperator::maximally_mixed(2)?;
    let prod = DensityOperator::product(&half, &half);
    let (b1, b2) = partial_traces(&bell)?;
    let (p1, p2) = partial_traces(&prod)?;
    let r_bell = b1.matrix().max_abs_diff(half.matrix()).max(b2.matrix().max_abs_diff(half.matrix()));
    let r_prod = p1.matrix().max_abs_diff(half.matrix()).max(p2.matrix().max_abs_diff(half.matrix()));
    eprintln!("Bell state: tr_2 = tr_1 = I/2   residual {r_bell:.2e}");
    eprintln!("I/2 (x) I/2: tr_2 = tr_1 = I/2  residual {r_prod:.2e}");
    let bell_in = in_poly(&bell, &half, &half, tol)?;
    let prod_in = in_poly(&prod, &half, &half, tol)?;
    let ket0 = DensityOperator::pure(&[Cplx::new(1.0, 0.0), z])?;
    let bell_wrong = in_poly(&bell, &ket0, &half, tol)?;
    eprintln!("both states couple (I/2, I/2): {bell_in}, {prod_in}");
    eprintln!("Bell state couples (|0><0|, I/2): {bell_wrong}");
    let purity = |m: &M| (m * m).trace().re;
    eprintln!(
        "purity: Bell {:.3}, product {:.3}; the marginals do not see the difference",
        purity(bell.matrix()),
        purity(prod.matrix())
    );
    let pass = r_bell <= tol.abs && r_prod <= tol.abs && bell_in && prod_in && !bell_wrong;
    Ok((
        json!({
            "bell": json::density_to_json(&bell),
            "marginals": [json::density_to_json(&b1), json::density_to_json(&b2)],
            "residuals": {"bell": r_bell, "product": r_prod},
            "in_poly": {"bell": bell_in, "product": prod_in, "bell_vs_pure_zero": bell_wrong},
        }),
        pass,
    ))
}
