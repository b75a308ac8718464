use ncpoly::linalg::{pinv, psd_factor};
use ncpoly::{ComplexMatrix64, Cplx, Tolerance64};
use proptest::prelude::*;

fn from_pairs(rows: usize, cols: usize, data: &[(f64, f64)]) -> ComplexMatrix64 {
    ComplexMatrix64::from_row_major(rows, cols, data.iter().map(|&(re, im)| Cplx::new(re, im)).collect()).unwrap()
}

fn penrose_residual(a: &ComplexMatrix64, x: &ComplexMatrix64) -> f64 {
    let ax = a * x;
    let xa = x * a;
    [
        (&ax * a).max_abs_diff(a) / a.max_abs().max(f64::MIN_POSITIVE),
        (&xa * x).max_abs_diff(x) / x.max_abs().max(f64::MIN_POSITIVE),
        ax.adjoint().max_abs_diff(&ax),
        xa.adjoint().max_abs_diff(&xa),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn pinv_of_ill_conditioned_full_rank() {
    // condition number about 1e5
    let a = from_pairs(3, 2, &[(2.921763335203742, -0.9512292207410205), (3.6927357183647502, -1.286927949923588), (-1.79995482477717, 0.7145135482511937), (-2.2714942445823905, 0.9563962594916164), (3.31239757687973, 1.3370345975210653), (4.249650109274736, 1.61431212628738)]);
    let x = pinv(&a, &Tolerance64::default());
    assert!(penrose_residual(&a, &x) < 1e-9);
}

#[test]
fn pinv_of_tiny_rank_deficient() {
    // entries near 1e-6, exact rank 3
    let a = from_pairs(4, 6, &[(6.157401365892969e-07, -8.077379705248156e-08), (-1.5853717495422074e-06, -2.2094251282222565e-07), (1.5452415093647715e-06, 1.1403606031845418e-06), (-1.1370125931579324e-06, 6.353660379349626e-07), (-5.922299460183163e-07, 1.3793971572885494e-06), (-1.5045373754634264e-06, -2.8705176524789734e-07), (-5.104324221942442e-08, -7.208773297485825e-08), (-8.949105360345878e-07, 1.1377618634901314e-07), (-7.296457114069978e-07, -2.636349888062409e-07), (7.205639775485172e-07, -1.2114808067991108e-06), (3.2536864969248806e-07, 1.9461288022190706e-06), (3.153059093325042e-07, -8.450692950321442e-07), (4.873094816875857e-07, -2.8622808651595067e-07), (1.3712768881651449e-06, -1.4570066436174326e-06), (-8.026581022348917e-07, 9.475240980276861e-07), (1.4085234022494748e-06, 1.3602943110770492e-06), (1.0449554672953528e-06, 3.3409640584177583e-07), (-1.5140783996626334e-06, -6.593575788649593e-07), (1.3117233514133828e-07, -3.1675787594343584e-08), (5.745920712346621e-07, 8.87757119793272e-08), (7.363180864854064e-07, 1.783177234546484e-07), (-5.705422370583372e-07, 1.1769570125910302e-06), (3.4374059672846196e-09, -1.1117358662332023e-06), (-5.267225027636496e-07, 6.477387922551951e-07)]);
    let x = pinv(&a, &Tolerance64::default());
    assert!(penrose_residual(&a, &x) < 1e-9, "residual {}", penrose_residual(&a, &x));
}

#[test]
fn pinv_of_wide_rank_one() {
    let a = from_pairs(5, 6, &[(8.168007655948452e-05, -0.00014923016725204376), (-0.00044866261981796676, 0.0004266133437739269), (0.00031189554671719053, 0.0003379961889846401), (-0.0005723946368317002, 0.0002601110117817966), (-0.0005493907686388772, 0.00025265717136367763), (-0.0001749395740157873, 0.0005930631941438189), (-0.00011566850528205593, -8.424622514848039e-05), (0.00030744177839859025, 0.0004203227241451737), (0.0003156221040848045, -0.00022369221248349177), (0.0001551904137397836, 0.0005055642531913025), (0.00015145582027859035, 0.00048557004462898996), (0.0004758411799694519, 0.0002099548033021013), (-4.750758403658154e-05, -0.0001356428515151762), (1.4175518968147325e-05, 0.0005228438158393688), (0.00038851491116631694, -4.721328955824505e-06), (-0.00016030236875484756, 0.000506390877957545), (-0.00015197683007868492, 0.0004877354743074529), (0.00027341597506064247, 0.0004451050531124822), (-4.8674471075848884e-05, 7.826543045429757e-05), (0.00025553521670989193, -0.00021726704418026312), (-0.00015854283003531724, -0.00019221969674856093), (0.0003174551684574499, -0.00012347675347208165), (0.000304787293003956, -0.0001201370135391822), (0.00011247855926722337, -0.00031554284994890204), (4.5078518444899585e-05, 0.00011745591385465816), (-2.593343495733188e-05, -0.00045711308002879494), (-0.00033982210769864285, 1.4185025128636125e-05), (0.00012715767175569336, -0.00044723214065745063), (0.00012035572170693187, -0.0004306935159218813), (-0.00025075294229995543, -0.0003823843247108636)]);
    let x = pinv(&a, &Tolerance64::default());
    assert!(penrose_residual(&a, &x) < 1e-9);
}

fn arb_matrix(max: usize) -> impl Strategy<Value = ComplexMatrix64> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), r * c)
            .prop_map(move |v| from_pairs(r, c, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pinv_satisfies_penrose(a in arb_matrix(5)) {
        let x = pinv(&a, &Tolerance64::default());
        prop_assert!(penrose_residual(&a, &x) < 1e-8);
    }

    #[test]
    fn psd_factor_round_trip(b in arb_matrix(5)) {
        let tol = Tolerance64::default();
        let g = &b.adjoint() * &b;
        let w = psd_factor(&g, &tol).unwrap();
        let back = &w.adjoint() * &w;
        prop_assert!(back.max_abs_diff(&g) <= 1e-9 * g.max_abs().max(1.0) * 10.0);
    }
}
