use ncpoly::classical::JointMeasure;
use ncpoly::dilation::dilate;
use ncpoly::measure::{all_events, product, Event, FiniteSpace};
use ncpoly::povm::{validate_povm, Povm};
use ncpoly::qpoly::{disintegrate, make_qpoly};
use ncpoly::states::{partial_traces, DensityOperator};
use ncpoly::{random, ComplexMatrix32, ComplexMatrix64, Cplx, Tolerance32, Tolerance64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Cplx<f64> {
    Cplx::new(re, 0.0)
}

#[test]
fn bayes_table_through_the_quantum_pipeline() {
    let ps = product(
        &FiniteSpace::new(["rain", "dry"]).unwrap(),
        &FiniteSpace::new(["wet", "clear"]).unwrap(),
    );
    let nu = JointMeasure::<f64>::from_table(&ps, &[vec![0.27, 0.03], vec![0.14, 0.56]]).unwrap();
    let tol = Tolerance64::default();
    let qp = make_qpoly(&Povm::from_joint(&nu), &tol).unwrap();
    let wet = Event::from_labels(&ps.right, &["wet"]).unwrap();
    let got = disintegrate(&qp, &wet, &tol).unwrap().atom_conditionals(&tol).unwrap();
    assert!((got[0].unwrap() - 0.9).abs() < 1e-12);
    assert!((got[1].unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn trine_dilates_to_six_dimensions() {
    let s3 = 3f64.sqrt();
    let dirs = [(1.0, 0.0), (-0.5, s3 / 2.0), (-0.5, -s3 / 2.0)];
    let effects = dirs
        .iter()
        .map(|&(x, y)| {
            ComplexMatrix64::from_row_major(2, 2, vec![c(2.0 * x * x / 3.0), c(2.0 * x * y / 3.0), c(2.0 * x * y / 3.0), c(2.0 * y * y / 3.0)])
                .unwrap()
        })
        .collect();
    let q = Povm::new(&FiniteSpace::numbered("t", 3).unwrap(), effects).unwrap();
    let tol = Tolerance64::default();
    assert!(validate_povm(&q, &tol).passed());
    let full = dilate(&q, false, &tol).unwrap();
    let compressed = dilate(&q, true, &tol).unwrap();
    assert_eq!(full.big_dim(), 6);
    assert_eq!(compressed.big_dim(), 3);
    let events = all_events(q.space()).unwrap();
    assert!(full.max_reconstruction_residual(&events).unwrap() < 1e-12);
    assert!(compressed.max_reconstruction_residual(&events).unwrap() < 1e-12);
}

#[test]
fn bell_state_has_maximally_mixed_marginals() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityOperator::pure(&[c(h), c(0.0), c(0.0), c(h)]).unwrap().split_as(2, 2).unwrap();
    let (r1, r2) = partial_traces(&bell).unwrap();
    let half = DensityOperator::<f64>::maximally_mixed(2).unwrap();
    assert!(r1.matrix().max_abs_diff(half.matrix()) < 1e-15);
    assert!(r2.matrix().max_abs_diff(half.matrix()) < 1e-15);
}

#[test]
fn single_precision_disintegration() {
    let tol = Tolerance32::new(1e-4, 1e-4, 1e-6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ps = product(&FiniteSpace::numbered("a", 2).unwrap(), &FiniteSpace::numbered("b", 2).unwrap());
    let q = random::povm::<f32, _>(&mut rng, &ps.joint, 2);
    let total = q.effects().iter().fold(ComplexMatrix32::zeros(2, 2), |acc, e| &acc + e);
    assert!(total.max_abs_diff(&ComplexMatrix32::identity(2)) < 1e-5);
    let qp = make_qpoly(&q, &tol).unwrap();
    let res = disintegrate(&qp, &Event::atom(&ps.right, 1).unwrap(), &tol).unwrap();
    assert!(res.gamma_residual < 1e-3);
}
