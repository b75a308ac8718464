//! Seeded randomized verification of every documented invariant.
//!
//! Each registered [`Property`] is run for `trials` independent trials. The
//! seed for trial `t` of property `p` is
//! `splitmix64(trial_seed(master, t) ^ fnv1a(p.name))`, so any single trial
//! can be replayed with [`run_trial`]. Trials run on the rayon pool; results
//! are collected in trial order, which keeps the report deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::{conditional, disintegration_check, is_polymorphism, marginals, JointMeasure};
use crate::dilation::{dilate, split_product};
use crate::json;
use crate::linalg::{
    eigenvalues, kron, min_eigenvalue, partial_trace, pinv, psd_factor, ComplexMatrix, Subsystem,
    Tolerance,
};
use crate::measure::{all_events, product, sample_events, Coordinate, Event, FiniteSpace, ProductSpace};
use crate::opkernels::{
    domination_margin, event_kernel, factor, is_pd, leq, povm_kernel, rn_derivative, rn_derivative_with,
    KernelFactorization, OperatorKernel,
};
use crate::povm::{covariance_operator, marginal_povm, validate_povm, validate_pvm, Povm};
use crate::qpoly::{
    disintegrate, disintegrate_left, index_family, make_qpoly, rkhs_pullback_contraction, tensor_dilation_check,
    tensor_rn_check,
};
use crate::random;
use crate::scalar::Cplx;
use crate::states::{classical_embed, in_poly, link_kernels, partial_traces, slice, slice_with, DensityOperator};
use crate::Result;

type M = ComplexMatrix<f64>;
type Tol = Tolerance<f64>;

/// Knobs for one suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_atoms: usize,
    pub max_dim: usize,
    #[serde(serialize_with = "ser_tol")]
    pub tol: Tol,
    /// Run only properties whose name contains one of these substrings.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
}

fn ser_tol<S: serde::Serializer>(t: &Tol, s: S) -> std::result::Result<S::Ok, S::Error> {
    json!({"abs": t.abs, "rel": t.rel, "pinv_cutoff_ratio": t.pinv_cutoff_ratio}).serialize(s)
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            max_atoms: 4,
            max_dim: 3,
            tol: Tolerance::default(),
            only: Vec::new(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_atoms == 0 || self.max_dim == 0 {
            return Err(crate::Error::Domain("trials, max_atoms and max_dim must be positive".into()));
        }
        Ok(())
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed shared by every property in trial `t`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64(trial as u64))
}

pub fn property_seed(master: u64, trial: usize, property: &str) -> u64 {
    splitmix64(trial_seed(master, trial) ^ fnv1a(property))
}

/// Result of one trial of one property.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub residual: f64,
    pub threshold: f64,
    /// Rough instance size (atoms times dimension); the smallest failing
    /// instance is the one reported.
    pub size: usize,
    pub instance: Option<Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

fn verdict(residual: f64, threshold: f64, size: usize, instance: impl FnOnce() -> Value) -> Outcome {
    let mut out = Outcome { residual, threshold, size, instance: None };
    if !out.passed() {
        out.instance = Some(instance());
    }
    out
}

fn boolean(ok: bool, size: usize, instance: impl FnOnce() -> Value) -> Outcome {
    verdict(if ok { 0.0 } else { 1.0 }, 0.5, size, instance)
}

/// Random-instance source handed to each property.
pub struct Trial<'a> {
    pub rng: ChaCha8Rng,
    pub cfg: &'a SuiteConfig,
}

impl Trial<'_> {
    fn tol(&self) -> &Tol {
        &self.cfg.tol
    }

    fn atoms(&mut self) -> usize {
        self.rng.random_range(1..=self.cfg.max_atoms)
    }

    fn factor_atoms(&mut self) -> usize {
        self.rng.random_range(1..=self.cfg.max_atoms.min(3))
    }

    fn dim(&mut self) -> usize {
        self.rng.random_range(1..=self.cfg.max_dim)
    }

    fn space(&mut self, prefix: &str) -> FiniteSpace {
        let n = self.atoms();
        FiniteSpace::numbered(prefix, n).expect("positive size")
    }

    fn product_space(&mut self) -> ProductSpace {
        let (n1, n2) = (self.factor_atoms(), self.factor_atoms());
        product(
            &FiniteSpace::numbered("a", n1).expect("positive"),
            &FiniteSpace::numbered("b", n2).expect("positive"),
        )
    }

    fn povm(&mut self, space: &FiniteSpace, dim: usize) -> Povm<f64> {
        random::povm(&mut self.rng, space, dim)
    }

    fn table(&mut self, ps: &ProductSpace) -> JointMeasure<f64> {
        random::probability_table(&mut self.rng, ps, 0.25)
    }

    fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

pub type PropertyFn = fn(&mut Trial) -> Result<Outcome>;

/// One registered invariant.
#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    pub run: PropertyFn,
}

/// Every property the suite runs, grouped by module.
pub fn registry() -> Vec<Property> {
    macro_rules! p {
        ($module:literal, $name:literal, $desc:literal, $f:ident) => {
            Property { name: concat!($module, ".", $name), module: $module, description: $desc, run: $f }
        };
    }
    vec![
        p!("linalg", "psd_factor_round_trip", "‖G − W*W‖ ≤ 1e-8·max(1,‖G‖) for random PSD G up to 12×12", psd_factor_round_trip),
        p!("linalg", "partial_trace_linear", "partial_trace is linear, trace-preserving and factors on products", partial_trace_linear),
        p!("linalg", "kron_laws", "kron is associative, mixed-product and trace-multiplicative", kron_laws),
        p!("linalg", "pinv_penrose", "pinv satisfies the four Penrose identities for condition numbers ≤ 1e6", pinv_penrose),
        p!("measure", "preimage_commutes", "preimages commute with ∩, ∪ and complement", preimage_commutes),
        p!("measure", "product_order", "product atoms are ordered lexicographically and survive serialization", product_order),
        p!("classical", "mass_conservation", "both marginals carry the total mass", mass_conservation),
        p!("classical", "disintegration", "ν(A×B) = Σ μ₁(a)ν(B|a) on every rectangle", classical_disintegration),
        p!("classical", "coupling_symmetry", "swapping factors swaps marginals and conditionals", coupling_symmetry),
        p!("classical", "polymorphism_convexity", "convex combinations of polymorphisms are polymorphisms", polymorphism_convexity),
        p!("povm", "additivity", "Q(A∪B) = Q(A) + Q(B) for disjoint A, B", povm_additivity),
        p!("povm", "monotonicity", "A ⊆ B ⇒ Q(B) − Q(A) PSD", povm_monotonicity),
        p!("povm", "dim_one_reduction", "dim-1 POVMs are probability measures with classical marginals", dim_one_reduction),
        p!("povm", "pvm_is_povm", "valid PVMs pass the POVM axioms", pvm_is_povm),
        p!("povm", "covariance_trace", "tr C_{F,G} = Σ μ(s)⟨F(s),G(s)⟩ to 1e-10 relative", covariance_trace),
        p!("dilation", "isometry", "‖V*V − I‖ ≤ 1e-9", dilation_isometry),
        p!("dilation", "reconstruction", "V*P(A)V = Q(A) for every event", dilation_reconstruction),
        p!("dilation", "pvm_laws", "P is additive, idempotent and multiplicative upstairs", dilation_pvm_laws),
        p!("dilation", "commutation", "‖[P₁(A), P₂(B)]‖ ≤ 1e-10", dilation_commutation),
        p!("dilation", "marginal_consistency", "V*P_i(A)V = Q_i(A)", marginal_consistency),
        p!("opkernels", "rn_equivalence", "L ≤ K exactly when dL/dK exists; planted Γ₀ is recovered", rn_equivalence),
        p!("opkernels", "gauge_invariance", "different factorizations give the same W*ΓW and spectrum", gauge_invariance),
        p!("opkernels", "order_properties", "≤ is reflexive, transitive and antisymmetric", order_properties),
        p!("opkernels", "povm_kernel_pd", "Q(E ∩ F) is a positive-definite kernel", povm_kernel_pd),
        p!("qpoly", "rectangle_identity", "Q(A×B) = V*P₁(A)P₂(B)V", rectangle_identity),
        p!("qpoly", "domination", "Q(·×B) ≤ Q₁ and Q(A×·) ≤ Q₂ as kernels", qpoly_domination),
        p!("qpoly", "disintegration", "dQ(·×B)/dQ₁ equals the compressed P₂(B), and the mirror identity", qpoly_disintegration),
        p!("qpoly", "classical_consistency", "dim-1 disintegration reproduces classical conditionals", qpoly_classical),
        p!("qpoly", "unitary_robustness", "conjugating Q by a unitary leaves residuals and Γ spectra unchanged", unitary_robustness),
        p!("qpoly", "tensor_identities", "tensor POVM rectangle identity and both tensor derivatives", tensor_identities),
        p!("qpoly", "rkhs_contraction", "restriction along coordinate preimages does not increase RKHS norms", rkhs_contraction),
        p!("states", "correspondence", "classical_embed then partial traces equals marginals then embed", correspondence),
        p!("states", "poly_convexity", "convex combinations of members of poly(s₁,s₂) are members", poly_convexity),
        p!("states", "product_witness", "s₁⊗s₂ ∈ poly(s₁,s₂)", product_witness),
        p!("states", "link_kernels", "linked kernel is p.d. and both slices round-trip", link_kernels_lemma),
        p!("states", "slice_linearity", "slice is linear in K and in ρ", slice_linearity),
    ]
}

/// Runs one trial of one property with its derived seed.
pub fn run_trial(property: &Property, cfg: &SuiteConfig, trial: usize) -> (u64, Outcome) {
    let seed = property_seed(cfg.seed, trial, property.name);
    let mut t = Trial { rng: ChaCha8Rng::seed_from_u64(seed), cfg };
    let out = match (property.run)(&mut t) {
        Ok(out) => out,
        Err(e) => Outcome {
            residual: f64::INFINITY,
            threshold: 0.0,
            size: usize::MAX,
            instance: Some(json!({"error": e.to_string()})),
        },
    };
    (seed, out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub residual: f64,
    pub threshold: f64,
    pub instance: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst_residual: f64,
    pub worst_trial: usize,
    pub worst_seed: u64,
    /// Smallest failing instance, ties broken by trial index.
    pub failure: Option<FailureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    /// `trial_seed(seed, t)` for each trial; property seeds mix in the name.
    pub trial_seeds: Vec<u64>,
    pub properties: Vec<PropertyReport>,
    pub total_failures: usize,
    pub pass: bool,
}

impl SuiteReport {
    /// Pass/fail counts only, for comparing runs.
    pub fn verdicts(&self) -> Vec<(&'static str, usize, usize)> {
        self.properties.iter().map(|p| (p.name, p.passed, p.failed)).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn run_property(property: &Property, cfg: &SuiteConfig) -> PropertyReport {
    let outcomes: Vec<(u64, Outcome)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(property, cfg, t))
        .collect();
    let mut report = PropertyReport {
        name: property.name,
        module: property.module,
        description: property.description,
        trials: cfg.trials,
        passed: 0,
        failed: 0,
        worst_residual: 0.0,
        worst_trial: 0,
        worst_seed: outcomes.first().map(|o| o.0).unwrap_or(0),
        failure: None,
    };
    let mut smallest = usize::MAX;
    for (trial, (seed, out)) in outcomes.into_iter().enumerate() {
        let residual = if out.residual.is_nan() { f64::INFINITY } else { out.residual };
        if residual > report.worst_residual {
            report.worst_residual = residual;
            report.worst_trial = trial;
            report.worst_seed = seed;
        }
        if out.passed() {
            report.passed += 1;
            continue;
        }
        report.failed += 1;
        if report.failure.is_none() || out.size < smallest {
            smallest = out.size;
            report.failure = Some(FailureRecord {
                trial,
                seed,
                residual: out.residual,
                threshold: out.threshold,
                instance: out.instance.unwrap_or(Value::Null),
            });
        }
    }
    report
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let selected: Vec<Property> = registry()
        .into_iter()
        .filter(|p| cfg.only.is_empty() || cfg.only.iter().any(|s| p.name.contains(s.as_str())))
        .collect();
    let properties: Vec<PropertyReport> = selected.iter().map(|p| run_property(p, cfg)).collect();
    let total_failures = properties.iter().map(|p| p.failed).sum();
    Ok(SuiteReport {
        config: cfg.clone(),
        trial_seeds: (0..cfg.trials).map(|t| trial_seed(cfg.seed, t)).collect(),
        properties,
        total_failures,
        pass: total_failures == 0,
    })
}

// ---- linalg ----

fn psd_factor_round_trip(t: &mut Trial) -> Result<Outcome> {
    let n = t.rng.random_range(1..=12);
    let rank = t.rng.random_range(0..=n);
    let scale = 10f64.powf(t.unit() * 4.0 - 2.0);
    let g = random::psd::<f64, _>(&mut t.rng, n, rank).scale_real(scale);
    let w = psd_factor(&g, t.tol())?;
    let res = g.max_abs_diff(&(&w.adjoint() * &w)) / g.max_abs().max(1.0);
    Ok(verdict(res, 10.0 * t.tol().abs, n, || json!({"G": json::matrix_to_json(&g)})))
}

fn partial_trace_linear(t: &mut Trial) -> Result<Outcome> {
    let (d1, d2) = (t.dim(), t.dim());
    let n = d1 * d2;
    let a = random::gaussian_matrix::<f64, _>(&mut t.rng, n, n);
    let b = random::gaussian_matrix::<f64, _>(&mut t.rng, n, n);
    let x = random::gaussian_matrix::<f64, _>(&mut t.rng, d1, d1);
    let y = random::gaussian_matrix::<f64, _>(&mut t.rng, d2, d2);
    let c = random::gaussian::<f64, _>(&mut t.rng);
    let mut worst = 0.0f64;
    for sub in [Subsystem::First, Subsystem::Second] {
        let pt = |m: &M| partial_trace(m, d1, d2, sub);
        let lhs = pt(&(&a.scale(c) + &b))?;
        let rhs = &pt(&a)?.scale(c) + &pt(&b)?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
        worst = worst.max((pt(&a)?.trace() - a.trace()).norm());
        let xy = kron(&x, &y);
        let expected = match sub {
            Subsystem::Second => x.scale(y.trace()),
            Subsystem::First => y.scale(x.trace()),
        };
        worst = worst.max(pt(&xy)?.max_abs_diff(&expected));
    }
    Ok(verdict(worst, 10.0 * t.tol().abs, n, || json!({"d1": d1, "d2": d2, "A": json::matrix_to_json(&a)})))
}

fn kron_laws(t: &mut Trial) -> Result<Outcome> {
    let mut dims = || (t.rng.random_range(1..=3usize), t.rng.random_range(1..=3usize));
    let (da, db, dc) = (dims(), dims(), dims());
    let a = random::gaussian_matrix::<f64, _>(&mut t.rng, da.0, da.1);
    let b = random::gaussian_matrix::<f64, _>(&mut t.rng, db.0, db.1);
    let c = random::gaussian_matrix::<f64, _>(&mut t.rng, dc.0, dc.1);
    let assoc = kron(&kron(&a, &b), &c).max_abs_diff(&kron(&a, &kron(&b, &c)));
    let c2 = random::gaussian_matrix::<f64, _>(&mut t.rng, da.1, 2);
    let d2 = random::gaussian_matrix::<f64, _>(&mut t.rng, db.1, 2);
    let mixed = (&kron(&a, &b) * &kron(&c2, &d2)).max_abs_diff(&kron(&(&a * &c2), &(&b * &d2)));
    let sa = random::gaussian_matrix::<f64, _>(&mut t.rng, da.0, da.0);
    let sb = random::gaussian_matrix::<f64, _>(&mut t.rng, db.0, db.0);
    let trace = (kron(&sa, &sb).trace() - sa.trace() * sb.trace()).norm();
    let res = assoc.max(mixed).max(trace) / 100.0;
    Ok(verdict(res, t.tol().abs, da.0 * db.0 * dc.0, || {
        json!({"A": json::matrix_to_json(&a), "B": json::matrix_to_json(&b), "C": json::matrix_to_json(&c)})
    }))
}

fn pinv_penrose(t: &mut Trial) -> Result<Outcome> {
    let (m, n) = (t.rng.random_range(1..=6usize), t.rng.random_range(1..=6usize));
    let k = m.min(n);
    let rank = t.rng.random_range(1..=k);
    let u = random::unitary::<f64, _>(&mut t.rng, m).block(0, 0, m, k);
    let v = random::unitary::<f64, _>(&mut t.rng, n).block(0, 0, n, k);
    let top = 10f64.powf(t.unit() * 4.0 - 2.0);
    let sigma: Vec<f64> = (0..k)
        .map(|i| if i < rank { top * 10f64.powf(-6.0 * t.unit()) } else { 0.0 })
        .collect();
    let a = &(&u * &M::from_real_diagonal(&sigma)) * &v.adjoint();
    let x = pinv(&a, t.tol());
    let na = a.max_abs().max(f64::MIN_POSITIVE);
    let nx = x.max_abs().max(f64::MIN_POSITIVE);
    let ax = &a * &x;
    let xa = &x * &a;
    let res = [
        (&ax * &a).max_abs_diff(&a) / na,
        (&xa * &x).max_abs_diff(&x) / nx,
        ax.adjoint().max_abs_diff(&ax),
        xa.adjoint().max_abs_diff(&xa),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(verdict(res, 10.0 * t.tol().abs, m * n, || json!({"A": json::matrix_to_json(&a)})))
}

// ---- measure ----

fn preimage_commutes(t: &mut Trial) -> Result<Outcome> {
    let n1 = t.rng.random_range(1..=t.cfg.max_atoms.min(4));
    let n2 = t.rng.random_range(1..=t.cfg.max_atoms.min(4));
    let ps = product(&FiniteSpace::numbered("a", n1)?, &FiniteSpace::numbered("b", n2)?);
    let mut bad = 0usize;
    for coord in [Coordinate::First, Coordinate::Second] {
        let events = all_events(ps.factor(coord))?;
        let pre = |e: &Event| ps.preimage(coord, e);
        for a in &events {
            if pre(&a.complement())? != pre(a)?.complement() {
                bad += 1;
            }
            for b in &events {
                if pre(&a.intersection(b)?)? != pre(a)?.intersection(&pre(b)?)? {
                    bad += 1;
                }
                if pre(&a.union(b)?)? != pre(a)?.union(&pre(b)?)? {
                    bad += 1;
                }
            }
        }
    }
    Ok(boolean(bad == 0, n1 * n2, || json!({"left": n1, "right": n2, "mismatches": bad})))
}

fn product_order(t: &mut Trial) -> Result<Outcome> {
    let labels = |n: usize, t: &mut Trial| -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        while v.len() < n {
            let s = format!("x{}", t.rng.random_range(0..1000));
            if !v.contains(&s) {
                v.push(s);
            }
        }
        v
    };
    let (n1, n2) = (t.atoms(), t.atoms());
    let l = labels(n1, t);
    let r = labels(n2, t);
    let ps = product(&FiniteSpace::new(l.clone())?, &FiniteSpace::new(r.clone())?);
    let mut ok = true;
    for i in 0..n1 {
        for j in 0..n2 {
            let k = ps.index(i, j);
            ok &= k == i * n2 + j && ps.split(k) == (i, j);
            ok &= ps.joint.label(k) == format!("{}|{}", l[i], r[j]);
        }
    }
    let text = json::space_to_json(&ps.joint).to_string();
    let back = json::space_from_json(&json::parse_value(&text)?, "$")?;
    ok &= back == ps.joint && back.labels() == ps.joint.labels();
    Ok(boolean(ok, n1 * n2, || json!({"space": json::space_to_json(&ps.joint)})))
}

// ---- classical ----

fn joint_json(nu: &JointMeasure<f64>) -> Value {
    json::joint_measure_to_json(nu)
}

fn mass_conservation(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let scale = 10f64.powf(t.unit() * 4.0 - 2.0);
    let p = t.table(&ps);
    let nu = JointMeasure::new(&ps, p.weights().iter().map(|w| w * scale).collect())?;
    let (m1, m2) = marginals(&nu);
    let res = (m1.total() - nu.total()).abs().max((m2.total() - nu.total()).abs()) / scale;
    Ok(verdict(res, t.tol().abs / 1000.0, ps.joint.len(), || joint_json(&nu)))
}

fn classical_disintegration(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let report = disintegration_check(&nu, t.tol());
    let (m1, _) = marginals(&nu);
    let mut worst = report.max_violation();
    for a in 0..ps.left.len() {
        if let Ok(c) = conditional(&nu, Coordinate::First, a) {
            for b in 0..ps.right.len() {
                worst = worst.max((nu.weight(a, b) - m1.weight(a) * c.weight(b)).abs());
            }
        }
    }
    Ok(verdict(worst, t.tol().abs / 1000.0, ps.joint.len(), || joint_json(&nu)))
}

fn coupling_symmetry(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let sw = nu.swapped();
    let (m1, m2) = marginals(&nu);
    let (s1, s2) = marginals(&sw);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut worst = diff(m1.weights(), s2.weights()).max(diff(m2.weights(), s1.weights()));
    for b in 0..ps.right.len() {
        match (conditional(&nu, Coordinate::Second, b), conditional(&sw, Coordinate::First, b)) {
            (Ok(x), Ok(y)) => worst = worst.max(diff(x.weights(), y.weights())),
            (Err(_), Err(_)) => {}
            _ => worst = f64::INFINITY,
        }
    }
    Ok(verdict(worst, t.tol().abs / 1000.0, ps.joint.len(), || joint_json(&nu)))
}

fn polymorphism_convexity(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let (m1, m2) = marginals(&nu);
    let other = JointMeasure::product(&m1, &m2);
    let w = t.unit();
    let mix = nu.mix(&other, w)?;
    let ok = is_polymorphism(&nu, &m1, &m2, t.tol())?
        && is_polymorphism(&other, &m1, &m2, t.tol())?
        && is_polymorphism(&mix, &m1, &m2, t.tol())?;
    Ok(boolean(ok, ps.joint.len(), || json!({"nu": joint_json(&nu), "t": w})))
}

// ---- povm ----

fn povm_json(q: &Povm<f64>) -> Value {
    json::povm_to_json(q, json::PovmKind::Povm)
}

fn povm_additivity(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let events = all_events(&space)?;
    let mut worst = 0.0f64;
    for a in &events {
        for b in &events {
            if a.is_disjoint(b)? {
                let lhs = q.evaluate(&a.union(b)?)?;
                worst = worst.max(lhs.max_abs_diff(&(&q.evaluate(a)? + &q.evaluate(b)?)));
            }
        }
    }
    Ok(verdict(worst, t.tol().scaled(space.len() as f64), space.len() * d, || povm_json(&q)))
}

fn povm_monotonicity(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let mut worst = 0.0f64;
    for b in sample_events(&space, 16, &mut t.rng) {
        let keep: Vec<usize> = b.members().iter().copied().filter(|_| t.rng.random_bool(0.5)).collect();
        let a = Event::new(&space, keep)?;
        let gap = &q.evaluate(&b)? - &q.evaluate(&a)?;
        worst = worst.max(-min_eigenvalue(&gap)?);
    }
    Ok(verdict(worst, t.tol().abs, space.len() * d, || povm_json(&q)))
}

fn dim_one_reduction(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let q = Povm::from_joint(&nu);
    let mut worst: f64 = if validate_povm(&q, t.tol()).passed() { 0.0 } else { f64::INFINITY };
    let (m1, m2) = marginals(&nu);
    for (coord, mu) in [(Coordinate::First, &m1), (Coordinate::Second, &m2)] {
        let qm = marginal_povm(&q, coord)?;
        for (e, w) in qm.effects().iter().zip(mu.weights()) {
            worst = worst.max((e.get(0, 0) - Cplx::new(*w, 0.0)).norm());
        }
    }
    Ok(verdict(worst, t.tol().abs / 1000.0, ps.joint.len(), || joint_json(&nu)))
}

fn pvm_is_povm(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let p = random::pvm::<f64, _>(&mut t.rng, &space, d);
    let ok = validate_pvm(&p, t.tol()).passed() && validate_povm(p.as_povm(), t.tol()).passed();
    Ok(boolean(ok, space.len() * d, || json::povm_to_json(p.as_povm(), json::PovmKind::Pvm)))
}

fn covariance_trace(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("s");
    let d = t.dim();
    let f = random::vector_field::<f64, _>(&mut t.rng, &space, d);
    let g = random::vector_field::<f64, _>(&mut t.rng, &space, d);
    let mu = random::measure::<f64, _>(&mut t.rng, &space, 0.2);
    let cov = covariance_operator(&f, &g, &mu)?;
    let mut oracle = Cplx::new(0.0, 0.0);
    for s in 0..space.len() {
        let inner: Cplx<f64> = f.vector(s).iter().zip(g.vector(s)).map(|(x, y)| x.conj() * y).sum();
        oracle += inner * mu.weight(s);
    }
    let diff = (cov.operator.trace() - oracle).norm();
    let res = if oracle.norm() > 0.0 { diff / oracle.norm() } else { diff };
    Ok(verdict(res, t.tol().abs / 10.0, space.len() * d, || json!({"mu": json::measure_to_json(&mu)})))
}

// ---- dilation ----

fn dilation_isometry(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let compress = t.rng.random_bool(0.5);
    let dil = dilate(&q, compress, t.tol())?;
    Ok(verdict(dil.isometry_defect(), t.tol().abs, space.len() * d, || povm_json(&q)))
}

fn dilation_reconstruction(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let compress = t.rng.random_bool(0.5);
    let dil = dilate(&q, compress, t.tol())?;
    let res = dil.max_reconstruction_residual(&all_events(&space)?)?;
    Ok(verdict(res, 10.0 * t.tol().abs, space.len() * d, || povm_json(&q)))
}

fn dilation_pvm_laws(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let dil = dilate(&q, t.rng.random_bool(0.5), t.tol())?;
    let events = sample_events(&space, 8, &mut t.rng);
    let mut worst = 0.0f64;
    for a in &events {
        let pa = dil.apply_pvm(a)?;
        worst = worst.max((&pa * &pa).max_abs_diff(&pa));
        for b in &events {
            let pb = dil.apply_pvm(b)?;
            worst = worst.max((&pa * &pb).max_abs_diff(&dil.apply_pvm(&a.intersection(b)?)?));
            let disjoint_b = b.difference(a)?;
            let lhs = dil.apply_pvm(&a.union(&disjoint_b)?)?;
            worst = worst.max(lhs.max_abs_diff(&(&pa + &dil.apply_pvm(&disjoint_b)?)));
        }
    }
    Ok(verdict(worst, t.tol().abs, space.len() * d, || povm_json(&q)))
}

fn random_joint_povm(t: &mut Trial) -> (ProductSpace, usize, Povm<f64>) {
    let ps = t.product_space();
    let d = t.dim();
    let q = t.povm(&ps.joint, d);
    (ps, d, q)
}

fn dilation_commutation(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let split = split_product(&dilate(&q, false, t.tol())?)?;
    Ok(verdict(split.commutator_residual, t.tol().abs / 10.0, ps.joint.len() * d, || povm_json(&q)))
}

fn marginal_consistency(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let split = split_product(&dilate(&q, false, t.tol())?)?;
    let mut worst = 0.0f64;
    for coord in [Coordinate::First, Coordinate::Second] {
        let qm = marginal_povm(&q, coord)?;
        for a in all_events(ps.factor(coord))? {
            let up = split.dilation().compress(&split.coordinate_pvm(coord, &a)?);
            worst = worst.max(up.max_abs_diff(&qm.evaluate(&a)?));
        }
    }
    Ok(verdict(worst, 10.0 * t.tol().abs, ps.joint.len() * d, || povm_json(&q)))
}

// ---- opkernels ----

fn kernel_json(k: &OperatorKernel<f64>) -> Value {
    json::kernel_to_json(k)
}

fn kernel_instance(t: &mut Trial) -> (usize, usize, OperatorKernel<f64>, KernelFactorization<f64>) {
    let n = t.rng.random_range(1..=(t.cfg.max_atoms + 1).min(5));
    let d = t.dim();
    let rank = t.rng.random_range(1..=n * d);
    let k = random::gram_kernel::<f64, _>(&mut t.rng, n, d, rank);
    let f = factor(&k, t.tol()).expect("Gram kernels are p.d.");
    (n, d, k, f)
}

fn labels(k: &OperatorKernel<f64>) -> Vec<String> {
    k.labels().to_vec()
}

fn rn_equivalence(t: &mut Trial) -> Result<Outcome> {
    let (n, d, k, f) = kernel_instance(t);
    let planted = t.rng.random_bool(0.5);
    let (l, gamma0) = if planted {
        let g0 = random::contraction::<f64, _>(&mut t.rng, f.rank());
        (f.sandwich(labels(&k), &g0)?, Some(g0))
    } else {
        let rank = t.rng.random_range(1..=n * d);
        let c = 10f64.powf(t.unit() * 2.5 - 2.0);
        (random::gram_kernel::<f64, _>(&mut t.rng, n, d, rank).scale(c), None)
    };
    let ordered = leq(&l, &k, t.tol())?;
    let instance = || json!({"L": kernel_json(&l), "K": kernel_json(&k), "planted": planted});
    let rn = rn_derivative(&l, &k, t.tol());
    let agree = match &rn {
        Ok(_) => ordered,
        Err(crate::Error::OrderingViolation { .. }) => !ordered,
        Err(_) => false,
    };
    if !agree {
        return Ok(boolean(false, n * d, instance));
    }
    match (gamma0, rn) {
        (Some(g0), Ok(rn)) => {
            let j = rn.with_respect_to.intertwiner(f.global(), t.tol())?;
            let expected = &(&j * &g0) * &j.adjoint();
            Ok(verdict(rn.gamma.max_abs_diff(&expected), t.tol().chained(), n * d, instance))
        }
        (Some(_), Err(_)) => Ok(boolean(false, n * d, instance)),
        (None, _) => Ok(boolean(true, n * d, instance)),
    }
}

fn gauge_invariance(t: &mut Trial) -> Result<Outcome> {
    let (n, d, k, f1) = kernel_instance(t);
    let r = f1.rank();
    let g0 = random::contraction::<f64, _>(&mut t.rng, r);
    let l = f1.sandwich(labels(&k), &g0)?;
    let u = random::unitary::<f64, _>(&mut t.rng, r);
    let pad = t.rng.random_range(0..=2);
    let rotated = &u * f1.global();
    let padded = M::vstack(&[rotated, M::zeros(pad, n * d)], n * d);
    let f2 = KernelFactorization::from_global(padded, n, d)?;
    let a = rn_derivative_with(&l, &k, &f1, t.tol())?;
    let b = rn_derivative_with(&l, &k, &f2, t.tol())?;
    let ra = f1.sandwich(labels(&k), &a.gamma)?;
    let rb = f2.sandwich(labels(&k), &b.gamma)?;
    let mut worst = ra.max_abs_diff(&rb)?;
    let top = |s: &[f64]| s.iter().rev().take(r).copied().collect::<Vec<_>>();
    for (x, y) in top(&a.spectrum).iter().zip(top(&b.spectrum)) {
        worst = worst.max((x - y).abs());
    }
    Ok(verdict(worst, t.tol().chained(), n * d, || json!({"L": kernel_json(&l), "K": kernel_json(&k)})))
}

fn order_properties(t: &mut Trial) -> Result<Outcome> {
    let (n, d, k, f) = kernel_instance(t);
    let tol = *t.tol();
    let l = f.sandwich(labels(&k), &random::contraction::<f64, _>(&mut t.rng, f.rank()))?;
    let fl = factor(&l, &tol)?;
    let m = fl.sandwich(labels(&k), &random::contraction::<f64, _>(&mut t.rng, fl.rank()))?;
    let mut ok = leq(&k, &k, &tol)? && leq(&l, &k, &tol)? && leq(&m, &l, &tol)?;
    ok &= leq(&m, &k, &tol)?;
    for (x, y) in [(&k, &k), (&l, &k), (&m, &l)] {
        if leq(x, y, &tol)? && leq(y, x, &tol)? {
            ok &= x.max_abs_diff(y)? <= tol.chained() * k.gram().max_abs().max(1.0);
        }
    }
    Ok(boolean(ok, n * d, || json!({"K": kernel_json(&k), "L": kernel_json(&l), "M": kernel_json(&m)})))
}

fn povm_kernel_pd(t: &mut Trial) -> Result<Outcome> {
    let space = t.space("x");
    let d = t.dim();
    let q = t.povm(&space, d);
    let k = povm_kernel(&q, None)?;
    Ok(boolean(is_pd(&k, t.tol()), space.len() * d, || povm_json(&q)))
}

// ---- qpoly ----

fn rectangle_identity(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let split = split_product(&dilate(&q, false, t.tol())?)?;
    Ok(verdict(split.rectangle_residual, 10.0 * t.tol().abs, ps.joint.len() * d, || povm_json(&q)))
}

fn qpoly_domination(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let qp = make_qpoly(&q, t.tol())?;
    let mut worst = 0.0f64;
    for (indexed, other) in [(Coordinate::First, Coordinate::Second), (Coordinate::Second, Coordinate::First)] {
        let family = index_family(ps.factor(indexed));
        let k = event_kernel(qp.marginal(indexed), &family)?;
        for e in all_events(ps.factor(other))? {
            let lifted: Vec<Event> = family
                .iter()
                .map(|f| match indexed {
                    Coordinate::First => ps.rectangle(f, &e),
                    Coordinate::Second => ps.rectangle(&e, f),
                })
                .collect::<Result<_>>()?;
            let l = event_kernel(&q, &lifted)?;
            worst = worst.max(-domination_margin(&l, &k)?);
        }
    }
    Ok(verdict(worst, t.tol().abs, ps.joint.len() * d, || povm_json(&q)))
}

fn qpoly_disintegration(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let qp = make_qpoly(&q, t.tol())?;
    let mut worst = 0.0f64;
    for b in sample_events(&ps.right, 2, &mut t.rng) {
        worst = worst.max(disintegrate(&qp, &b, t.tol())?.gamma_residual);
    }
    for a in sample_events(&ps.left, 2, &mut t.rng) {
        worst = worst.max(disintegrate_left(&qp, &a, t.tol())?.gamma_residual);
    }
    Ok(verdict(worst, t.tol().chained(), ps.joint.len() * d, || povm_json(&q)))
}

fn qpoly_classical(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let qp = make_qpoly(&Povm::from_joint(&nu), t.tol())?;
    let mut worst = 0.0f64;
    for b in all_events(&ps.right)? {
        let got = disintegrate(&qp, &b, t.tol())?.atom_conditionals(t.tol())?;
        for (a, g) in got.iter().enumerate() {
            match (conditional(&nu, Coordinate::First, a), g) {
                (Ok(c), Some(g)) => worst = worst.max((c.measure_of(&b)? - g).abs()),
                (Err(_), None) => {}
                _ => worst = f64::INFINITY,
            }
        }
    }
    Ok(verdict(worst, t.tol().abs / 10.0, ps.joint.len(), || joint_json(&nu)))
}

fn unitary_robustness(t: &mut Trial) -> Result<Outcome> {
    let (ps, d, q) = random_joint_povm(t);
    let u = random::unitary::<f64, _>(&mut t.rng, d);
    let qp = make_qpoly(&q, t.tol())?;
    let rot = qp.conjugated(&u)?;
    let b = sample_events(&ps.right, 1, &mut t.rng).remove(0);
    let x = disintegrate(&qp, &b, t.tol())?;
    let y = disintegrate(&rot, &b, t.tol())?;
    let mut worst = (x.gamma_residual - y.gamma_residual)
        .abs()
        .max((x.rectangle_residual - y.rectangle_residual).abs())
        .max((x.reconstruction_residual - y.reconstruction_residual).abs());
    if x.gamma_spectrum.len() != y.gamma_spectrum.len() {
        worst = f64::INFINITY;
    }
    for (a, b) in x.gamma_spectrum.iter().zip(&y.gamma_spectrum) {
        worst = worst.max((a - b).abs());
    }
    Ok(verdict(worst, 10.0 * t.tol().abs, ps.joint.len() * d, || {
        json!({"Q": povm_json(&q), "U": json::matrix_to_json(&u), "B": b.labels()})
    }))
}

fn tensor_identities(t: &mut Trial) -> Result<Outcome> {
    let hi = t.cfg.max_atoms.clamp(2, 3);
    let (n1, n2) = (t.rng.random_range(2..=hi), t.rng.random_range(2..=hi));
    let dmax = t.cfg.max_dim.min(2);
    let (d1, d2) = (t.rng.random_range(1..=dmax), t.rng.random_range(1..=dmax));
    let q1 = t.povm(&FiniteSpace::numbered("a", n1)?, d1);
    let q2 = t.povm(&FiniteSpace::numbered("b", n2)?, d2);
    let a = sample_events(q1.space(), 1, &mut t.rng).remove(0);
    let b = sample_events(q2.space(), 1, &mut t.rng).remove(0);
    let dil = tensor_dilation_check(&q1, &q2, t.tol())?;
    let rn = tensor_rn_check(&q1, &q2, &a, &b, t.tol())?;
    // rectangle residuals are held to 1e-8, derivative residuals to 1e-7
    let res = (dil.max_residual() / (10.0 * t.tol().abs)).max(rn.max_gamma_residual() / t.tol().chained());
    Ok(verdict(res, 1.0, n1 * n2 * d1 * d2, || json!({"Q1": povm_json(&q1), "Q2": povm_json(&q2)})))
}

fn rkhs_contraction(t: &mut Trial) -> Result<Outcome> {
    let hi = t.cfg.max_atoms.min(2);
    let (n1, n2) = (t.rng.random_range(1..=hi), t.rng.random_range(1..=hi));
    let ps = product(&FiniteSpace::numbered("a", n1)?, &FiniteSpace::numbered("b", n2)?);
    let d = t.rng.random_range(1..=t.cfg.max_dim.min(2));
    let q = t.povm(&ps.joint, d);
    let coord = if t.rng.random_bool(0.5) { Coordinate::First } else { Coordinate::Second };
    let seed = t.rng.random::<u64>();
    let rep = rkhs_pullback_contraction(&q, coord, 12, seed, t.tol())?;
    let res = if rep.passed() { 0.0 } else { rep.max_excess };
    Ok(verdict(res, 0.0, ps.joint.len() * d, || json!({"Q": povm_json(&q), "seed": seed})))
}

// ---- states ----

fn diag_matches(rho: &DensityOperator<f64>, weights: &[f64]) -> f64 {
    let m = rho.matrix();
    let mut worst = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let expected = if i == j { weights[i] } else { 0.0 };
            worst = worst.max((m.get(i, j) - Cplx::new(expected, 0.0)).norm());
        }
    }
    worst
}

fn correspondence(t: &mut Trial) -> Result<Outcome> {
    let ps = t.product_space();
    let nu = t.table(&ps);
    let (r1, r2) = partial_traces(&classical_embed(&nu, false)?)?;
    let (m1, m2) = marginals(&nu);
    let res = diag_matches(&r1, m1.weights()).max(diag_matches(&r2, m2.weights()));
    Ok(verdict(res, t.tol().abs / 1000.0, ps.joint.len(), || joint_json(&nu)))
}

fn random_state(t: &mut Trial, dim: usize) -> Result<DensityOperator<f64>> {
    DensityOperator::new(random::density::<f64, _>(&mut t.rng, dim), t.tol())
}

fn poly_convexity(t: &mut Trial) -> Result<Outcome> {
    let (d1, d2) = (t.dim(), t.dim());
    let s1 = random_state(t, d1)?;
    let s2 = random_state(t, d2)?;
    let base = DensityOperator::product(&s1, &s2);
    // traceless perturbation with zero partial traces
    let r = random::density::<f64, _>(&mut t.rng, d1 * d2);
    let r1 = partial_trace(&r, d1, d2, Subsystem::Second)?;
    let r2 = partial_trace(&r, d1, d2, Subsystem::First)?;
    let n = (d1 * d2) as f64;
    let x = &(&(&r - &kron(&r1, &M::identity(d2)).scale_real(1.0 / d2 as f64))
        - &kron(&M::identity(d1), &r2).scale_real(1.0 / d1 as f64))
        + &M::identity(d1 * d2).scale_real(1.0 / n);
    let room = min_eigenvalue(base.matrix())?;
    let size = eigenvalues(&x)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lambda = if size > 1e-12 { 0.9 * room / size } else { 0.0 };
    let other = DensityOperator::with_split(&base.matrix().clone() + &x.scale_real(lambda), d1, d2, t.tol())?;
    let w = t.unit();
    let mix = base.mix(&other, w)?;
    let tol = t.tol();
    let ok = in_poly(&other, &s1, &s2, tol)? && in_poly(&mix, &s1, &s2, tol)?;
    Ok(boolean(ok, d1 * d2, || {
        json!({"rho": json::density_to_json(&other), "s1": json::density_to_json(&s1), "s2": json::density_to_json(&s2)})
    }))
}

fn product_witness(t: &mut Trial) -> Result<Outcome> {
    let (d1, d2) = (t.dim(), t.dim());
    let s1 = random_state(t, d1)?;
    let s2 = random_state(t, d2)?;
    let ok = in_poly(&DensityOperator::product(&s1, &s2), &s1, &s2, t.tol())?;
    Ok(boolean(ok, d1 * d2, || json!({"s1": json::density_to_json(&s1), "s2": json::density_to_json(&s2)})))
}

fn link_kernels_lemma(t: &mut Trial) -> Result<Outcome> {
    let n = t.atoms();
    let dim = t.rng.random_range(2..=t.cfg.max_dim.max(2));
    let (k1, k2) = (t.rng.random_range(1..=n), t.rng.random_range(1..=n));
    let c1 = random::scalar_kernel::<f64, _>(&mut t.rng, n, k1);
    let c2 = random::scalar_kernel::<f64, _>(&mut t.rng, n, k2);
    let (k, rho1, rho2) = link_kernels(&c1, &c2, dim, t.tol())?;
    let mut res = if is_pd(&k, t.tol()) { 0.0 } else { f64::INFINITY };
    res = res.max(slice(&k, &rho1)?.values().max_abs_diff(c1.values()));
    res = res.max(slice(&k, &rho2)?.values().max_abs_diff(c2.values()));
    Ok(verdict(res, t.tol().abs / 1000.0, n * dim, || {
        json!({"c1": json::scalar_kernel_to_json(&c1), "c2": json::scalar_kernel_to_json(&c2), "dim": dim})
    }))
}

fn slice_linearity(t: &mut Trial) -> Result<Outcome> {
    let n = t.atoms();
    let d = t.dim();
    let k1 = random::gram_kernel::<f64, _>(&mut t.rng, n, d, d);
    let k2 = random::gram_kernel::<f64, _>(&mut t.rng, n, d, d);
    let rho1 = random::density::<f64, _>(&mut t.rng, d);
    let rho2 = random::density::<f64, _>(&mut t.rng, d);
    let (a, b) = (t.unit() * 4.0 - 2.0, t.unit() * 4.0 - 2.0);
    let combo = k1.scale(a).add_scaled(&k2, b)?;
    let lhs = slice_with(&combo, &rho1)?;
    let rhs = &slice_with(&k1, &rho1)?.values().scale_real(a) + &slice_with(&k2, &rho1)?.values().scale_real(b);
    let mut res = lhs.values().max_abs_diff(&rhs);
    let mixed = &rho1.scale_real(a) + &rho2.scale_real(b);
    let lhs = slice_with(&k1, &mixed)?;
    let rhs = &slice_with(&k1, &rho1)?.values().scale_real(a) + &slice_with(&k1, &rho2)?.values().scale_real(b);
    res = res.max(lhs.values().max_abs_diff(&rhs));
    let scale = k1.gram().max_abs().max(k2.gram().max_abs()).max(1.0);
    Ok(verdict(res / scale, t.tol().abs / 1000.0, n * d, || json!({"K1": kernel_json(&k1), "K2": kernel_json(&k2)})))
}
