//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails. Runs without the libtest
//! harness so the lines are never captured.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ncpoly::classical::JointMeasure;
use ncpoly::dilation::{dilate, NaimarkDilation};
use ncpoly::linalg::{kron, pinv};
use ncpoly::measure::{all_events, product, sample_events, Event, FiniteSpace, ProductSpace};
use ncpoly::opkernels::{domination_margin, factor, is_pd, leq, rn_derivative, OperatorKernel};
use ncpoly::povm::{covariance_operator, Povm};
use ncpoly::qpoly::{disintegrate, disintegrate_left, make_qpoly, tensor_dilation_check, tensor_povm, tensor_rn_check};
use ncpoly::states::{classical_embed, link_kernels, partial_traces};
use ncpoly::{random, ComplexMatrix64 as M, Cplx, Tolerance64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Rng8 = ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn effect_sum(q: &Povm<f64>, members: impl Iterator<Item = usize>) -> M {
    members.fold(M::zeros(q.dim(), q.dim()), |acc, k| &acc + q.effect(k))
}

/// Diagonal projection onto the dilation blocks of the atoms accepted by `keep`.
fn block_projection(dil: &NaimarkDilation<f64>, keep: impl Fn(usize) -> bool) -> M {
    let mut diag = vec![0.0; dil.big_dim()];
    for (k, range) in dil.blocks().iter().enumerate() {
        if keep(k) {
            for i in range.clone() {
                diag[i] = 1.0;
            }
        }
    }
    M::from_real_diagonal(&diag)
}

fn naimark(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut worst_rec, mut worst_iso) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(1..=5);
        let d = rng.random_range(1..=4);
        let space = FiniteSpace::numbered("x", n).unwrap();
        let q = random::povm::<f64, _>(rng, &space, d);
        for compress in [false, true] {
            let dil = dilate(&q, compress, tol).unwrap();
            let v = dil.isometry();
            worst_iso = worst_iso.max((&v.adjoint() * v).max_abs_diff(&M::identity(d)));
            for mask in 0..(1u64 << n) {
                let p = block_projection(&dil, |k| mask >> k & 1 == 1);
                let expected = effect_sum(&q, (0..n).filter(|k| mask >> k & 1 == 1));
                worst_rec = worst_rec.max((&(&v.adjoint() * &p) * v).max_abs_diff(&expected));
            }
        }
    }
    verdict(
        worst_rec <= 1e-8 && worst_iso <= 1e-9,
        format!("max reconstruction {worst_rec:.2e}, isometry defect {worst_iso:.2e}"),
    )
}

fn rn_equivalence(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut agree, mut planted_count, mut refused) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    let trials = 240;
    for t in 0..trials {
        let n = rng.random_range(1..=5);
        let d = rng.random_range(1..=3);
        let rank = rng.random_range(1..=n * d);
        let k = random::gram_kernel::<f64, _>(rng, n, d, rank);
        let f = factor(&k, tol).unwrap();
        let labels = k.labels().to_vec();
        let planted = t % 2 == 0;
        let (l, gamma0) = if planted {
            planted_count += 1;
            let g0 = random::contraction::<f64, _>(rng, f.rank());
            let l = OperatorKernel::from_fn(labels, d, |i, j| &(&f.factor(i).adjoint() * &g0) * &f.factor(j)).unwrap();
            (l, Some(g0))
        } else {
            let rank = rng.random_range(1..=n * d);
            let c = 10f64.powf(rng.random::<f64>() * 2.5 - 2.0);
            (random::gram_kernel::<f64, _>(rng, n, d, rank).scale(c), None)
        };
        let ordered = leq(&l, &k, tol).unwrap();
        let rn = rn_derivative(&l, &k, tol);
        if ordered == rn.is_ok() {
            agree += 1;
        }
        if rn.is_err() {
            refused += 1;
        }
        if let (Some(g0), Ok(rn)) = (gamma0, rn) {
            let w = rn.with_respect_to.global();
            let j = &(&pinv(&(w * &w.adjoint()), tol) * w) * &f.global().adjoint();
            worst = worst.max(rn.gamma.max_abs_diff(&(&(&j * &g0) * &j.adjoint())));
        }
    }
    verdict(
        agree == trials && worst <= 1e-7,
        format!(
            "{agree}/{trials} agree ({planted_count} planted, {refused} refused), planted gamma error {worst:.2e}"
        ),
    )
}

/// `K(A_k, A_l) = Q(π⁻¹(A_k ∩ A_l))` for the given coordinate, built from effects.
fn marginal_kernel(q: &Povm<f64>, ps: &ProductSpace, left: bool, family: &[Event], within: Option<&Event>) -> OperatorKernel<f64> {
    let labels = (0..family.len()).map(|i| format!("e{i}")).collect();
    OperatorKernel::from_fn(labels, q.dim(), |a, b| {
        let meet = family[a].intersection(&family[b]).unwrap();
        effect_sum(
            q,
            (0..ps.joint.len()).filter(|&k| {
                let (i, j) = ps.split(k);
                let (mine, other) = if left { (i, j) } else { (j, i) };
                meet.contains(mine) && within.is_none_or(|w| w.contains(other))
            }),
        )
    })
    .unwrap()
}

fn disintegration(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut worst_gamma, mut worst_rec, mut worst_margin) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut events = 0usize;
    for _ in 0..100 {
        let ps = product(
            &FiniteSpace::numbered("a", rng.random_range(1..=3)).unwrap(),
            &FiniteSpace::numbered("b", rng.random_range(1..=3)).unwrap(),
        );
        let d = rng.random_range(1..=3);
        let q = random::povm::<f64, _>(rng, &ps.joint, d);
        let qp = make_qpoly(&q, tol).unwrap();
        let dil = dilate(&q, false, tol).unwrap();
        let v = dil.isometry();
        for b in all_events(&ps.right).unwrap() {
            events += 1;
            let res = disintegrate(&qp, &b, tol).unwrap();
            let family = &res.index_events;
            // reference factor: column block k is P1(A_k) V
            let pieces: Vec<M> = family
                .iter()
                .map(|a| &block_projection(&dil, |k| a.contains(ps.split(k).0)) * v)
                .collect();
            let r = M::from_fn(dil.big_dim(), family.len() * d, |row, col| pieces[col / d].get(row, col % d));
            let w = res.factorization.global();
            let j = &(&pinv(&(w * &w.adjoint()), tol) * w) * &r.adjoint();
            let p2 = block_projection(&dil, |k| b.contains(ps.split(k).1));
            worst_gamma = worst_gamma.max(res.gamma.max_abs_diff(&(&(&j * &p2) * &j.adjoint())));
            let l = marginal_kernel(&q, &ps, true, family, Some(&b));
            worst_rec = worst_rec.max((&(&w.adjoint() * &res.gamma) * w).max_abs_diff(&l.gram()));
            let k = marginal_kernel(&q, &ps, true, family, None);
            worst_margin = worst_margin.min(domination_margin(&l, &k).unwrap());
        }
        for a in all_events(&ps.left).unwrap() {
            let res = disintegrate_left(&qp, &a, tol).unwrap();
            let l = marginal_kernel(&q, &ps, false, &res.index_events, Some(&a));
            let k = marginal_kernel(&q, &ps, false, &res.index_events, None);
            worst_margin = worst_margin.min(domination_margin(&l, &k).unwrap());
        }
    }
    verdict(
        worst_gamma <= 1e-7 && worst_margin >= -1e-9,
        format!(
            "{events} events, gamma vs compressed P2(B) {worst_gamma:.2e}, reconstruction {worst_rec:.2e}, min margin {worst_margin:.2e}"
        ),
    )
}

fn tensor(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut worst_rect, mut worst_rn) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (n1, n2) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let (d1, d2) = (rng.random_range(1..=3), rng.random_range(1..=2));
        let q1 = random::povm::<f64, _>(rng, &FiniteSpace::numbered("a", n1).unwrap(), d1);
        let q2 = random::povm::<f64, _>(rng, &FiniteSpace::numbered("b", n2).unwrap(), d2);
        let qt = tensor_povm(&q1, &q2);
        let ps = product(q1.space(), q2.space());
        for a in all_events(q1.space()).unwrap() {
            for b in all_events(q2.space()).unwrap() {
                let rect = ps.rectangle(&a, &b).unwrap();
                let expected = kron(&effect_sum(&q1, a.members().iter().copied()), &effect_sum(&q2, b.members().iter().copied()));
                worst_rect = worst_rect.max(qt.evaluate(&rect).unwrap().max_abs_diff(&expected));
            }
        }
        worst_rect = worst_rect.max(tensor_dilation_check(&q1, &q2, tol).unwrap().max_residual());
        for _ in 0..2 {
            let a = sample_events(q1.space(), 1, rng).remove(0);
            let b = sample_events(q2.space(), 1, rng).remove(0);
            worst_rn = worst_rn.max(tensor_rn_check(&q1, &q2, &a, &b, tol).unwrap().max_gamma_residual());
        }
    }
    verdict(
        worst_rect <= 1e-8 && worst_rn <= 1e-7,
        format!("rectangle identity {worst_rect:.2e}, derivative identities {worst_rn:.2e}"),
    )
}

fn classical(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut worst_cond, mut worst_trace) = (0.0f64, 0.0f64);
    let mut mismatched = 0usize;
    for _ in 0..100 {
        let (n1, n2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let ps = product(&FiniteSpace::numbered("a", n1).unwrap(), &FiniteSpace::numbered("b", n2).unwrap());
        let nu: JointMeasure<f64> = random::probability_table(rng, &ps, 0.25);
        let qp = make_qpoly(&Povm::from_joint(&nu), tol).unwrap();
        let mass1: Vec<f64> = (0..n1).map(|i| (0..n2).map(|j| nu.weight(i, j)).sum()).collect();
        let mass2: Vec<f64> = (0..n2).map(|j| (0..n1).map(|i| nu.weight(i, j)).sum()).collect();
        let mut compare = |got: Vec<Option<f64>>, oracle: &dyn Fn(usize) -> Option<f64>| {
            for (x, g) in got.into_iter().enumerate() {
                match (oracle(x), g) {
                    (Some(o), Some(g)) => worst_cond = worst_cond.max((o - g).abs()),
                    (None, None) => {}
                    _ => mismatched += 1,
                }
            }
        };
        for b in all_events(&ps.right).unwrap() {
            let got = disintegrate(&qp, &b, tol).unwrap().atom_conditionals(tol).unwrap();
            let oracle = |i: usize| {
                (mass1[i] > 0.0).then(|| b.members().iter().map(|&j| nu.weight(i, j)).sum::<f64>() / mass1[i])
            };
            compare(got, &oracle);
        }
        for a in all_events(&ps.left).unwrap() {
            let got = disintegrate_left(&qp, &a, tol).unwrap().atom_conditionals(tol).unwrap();
            let oracle = |j: usize| {
                (mass2[j] > 0.0).then(|| a.members().iter().map(|&i| nu.weight(i, j)).sum::<f64>() / mass2[j])
            };
            compare(got, &oracle);
        }
        let (r1, r2) = partial_traces(&classical_embed(&nu, false).unwrap()).unwrap();
        worst_trace = worst_trace.max(r1.matrix().max_abs_diff(&M::from_real_diagonal(&mass1)));
        worst_trace = worst_trace.max(r2.matrix().max_abs_diff(&M::from_real_diagonal(&mass2)));
    }
    verdict(
        mismatched == 0 && worst_cond <= 1e-10 && worst_trace <= 1e-12,
        format!("conditionals {worst_cond:.2e} ({mismatched} zero-mass mismatches), partial traces {worst_trace:.2e}"),
    )
}

fn covariance(rng: &mut Rng8) -> Verdict {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let space = FiniteSpace::numbered("s", rng.random_range(1..=6)).unwrap();
        let d = rng.random_range(1..=4);
        let f = random::vector_field::<f64, _>(rng, &space, d);
        let g = random::vector_field::<f64, _>(rng, &space, d);
        let mu = random::measure::<f64, _>(rng, &space, 0.2);
        let oracle: Cplx<f64> = (0..space.len())
            .map(|s| f.vector(s).iter().zip(g.vector(s)).map(|(x, y)| x.conj() * y).sum::<Cplx<f64>>() * mu.weight(s))
            .sum();
        let trace = covariance_operator(&f, &g, &mu).unwrap().operator.trace();
        let diff = (trace - oracle).norm();
        worst = worst.max(if oracle.norm() > 0.0 { diff / oracle.norm() } else { diff });
    }
    verdict(worst <= 1e-10, format!("relative trace error {worst:.2e}"))
}

fn linked(rng: &mut Rng8, tol: &Tolerance64) -> Verdict {
    let (mut all_pd, mut worst) = (true, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let dim = rng.random_range(2..=4);
        let (k1, k2) = (rng.random_range(1..=n), rng.random_range(1..=n));
        let c1 = random::scalar_kernel::<f64, _>(rng, n, k1);
        let c2 = random::scalar_kernel::<f64, _>(rng, n, k2);
        let (k, rho1, rho2) = link_kernels(&c1, &c2, dim, tol).unwrap();
        all_pd &= is_pd(&k, tol);
        for (rho, c) in [(&rho1, &c1), (&rho2, &c2)] {
            for s in 0..n {
                for t in 0..n {
                    let got = (rho.matrix() * k.block(s, t)).trace();
                    worst = worst.max((got - c.values().get(s, t)).norm());
                }
            }
        }
    }
    verdict(all_pd && worst <= 1e-12, format!("all positive definite: {all_pd}, slice error {worst:.2e}"))
}

fn run_suite(seed: u64, out: &PathBuf) -> (Value, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_ncpoly"))
        .args(["suite", "--seed", &seed.to_string(), "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(status.status.code().is_some(), "suite was killed");
    let text = std::fs::read_to_string(out).expect("suite report written");
    (serde_json::from_str(&text).expect("report parses"), elapsed)
}

fn verdicts(report: &Value) -> Vec<(String, u64, u64)> {
    report["properties"]
        .as_array()
        .expect("properties array")
        .iter()
        .map(|p| {
            (
                p["name"].as_str().unwrap().to_string(),
                p["passed"].as_u64().unwrap(),
                p["failed"].as_u64().unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("ncpoly-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (first, t1) = run_suite(2718, &dir.join("first.json"));
    let (second, t2) = run_suite(2718, &dir.join("second.json"));
    std::fs::remove_dir_all(&dir).ok();
    let same = verdicts(&first) == verdicts(&second) && first["properties"] == second["properties"];
    let budget = Duration::from_secs(180);
    verdict(
        same && t1 < budget && t2 < budget && first["pass"] == Value::Bool(true),
        format!(
            "identical reports: {same}, suite pass: {}, runs {:.1}s and {:.1}s",
            first["pass"],
            t1.as_secs_f64(),
            t2.as_secs_f64()
        ),
    )
}

fn main() {
    let tol = Tolerance64::default();
    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let rng = |seed| Rng8::seed_from_u64(seed);
    let criteria: Vec<(&str, Option<u64>, Check)> = vec![
        ("1 naimark dilation", Some(10), Box::new(|| naimark(&mut rng(101), &tol))),
        ("2 kernel order vs derivative", Some(20), Box::new(|| rn_equivalence(&mut rng(202), &tol))),
        ("3 disintegration", Some(60), Box::new(|| disintegration(&mut rng(303), &tol))),
        ("4 tensor identities", Some(30), Box::new(|| tensor(&mut rng(404), &tol))),
        ("5 classical consistency", None, Box::new(|| classical(&mut rng(505), &tol))),
        ("6 covariance trace", None, Box::new(|| covariance(&mut rng(606)))),
        ("7 linked kernels", None, Box::new(|| linked(&mut rng(707), &tol))),
        ("8 suite determinism", None, Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let mut v = check();
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = budget {
            if secs > *limit as f64 {
                v.pass = false;
                v.detail.push_str(&format!(" (over the {limit}s budget)"));
            }
        }
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!("{mark} criterion {name}: {} [{secs:.2}s]", v.detail);
        if !v.pass {
            failed.push(*name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
