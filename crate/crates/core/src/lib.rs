//! Finite-dimensional classical and quantum polymorphisms.
//!
//! POVMs on finite product spaces, their Naimark dilations, operator-valued
//! kernels with a Radon–Nikodym calculus, disintegration of POVMs along
//! coordinates, tensor POVMs, density operators and partial traces.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the scalar.
//!
//! ```
//! use ncpoly::measure::{product, Event, FiniteSpace};
//! use ncpoly::qpoly::{disintegrate, make_qpoly};
//! use ncpoly::{random, Tolerance64};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let ps = product(&FiniteSpace::numbered("a", 2)?, &FiniteSpace::numbered("b", 2)?);
//! let q = random::povm::<f64, _>(&mut rng, &ps.joint, 2);
//! let tol = Tolerance64::default();
//! let qp = make_qpoly(&q, &tol)?;
//! let res = disintegrate(&qp, &Event::atom(&ps.right, 0)?, &tol)?;
//! assert!(res.gamma_residual < 1e-7);
//! # Ok::<(), ncpoly::Error>(())
//! ```

pub mod classical;
pub mod dilation;
pub mod error;
pub mod json;
pub mod linalg;
pub mod measure;
pub mod opkernels;
pub mod povm;
pub mod qpoly;
pub mod random;
pub mod scalar;
pub mod states;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerance};
pub use scalar::{Cplx, Real};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type Tolerance64 = Tolerance<f64>;
pub type Tolerance32 = Tolerance<f32>;
pub type Povm64 = povm::Povm<f64>;
pub type Povm32 = povm::Povm<f32>;
pub type Pvm64 = povm::Pvm<f64>;
pub type Pvm32 = povm::Pvm<f32>;
pub type FiniteMeasure64 = classical::FiniteMeasure<f64>;
pub type JointMeasure64 = classical::JointMeasure<f64>;
pub type NaimarkDilation64 = dilation::NaimarkDilation<f64>;
pub type OperatorKernel64 = opkernels::OperatorKernel<f64>;
pub type QuantumPolymorphism64 = qpoly::QuantumPolymorphism<f64>;
pub type DensityOperator64 = states::DensityOperator<f64>;
pub type ScalarKernel64 = states::ScalarKernel<f64>;
