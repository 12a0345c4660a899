//! Rate-distortion auto-encoders.
//!
//! A single-hidden-layer auto-encoder is trained by gradient ascent on
//!
//! ```text
//! L(W, c, A, b) = S_a(N K_X o K_Xhat) - S_a(K_Xhat) - mu * D_emp
//! ```
//!
//! where `S_a` is the matrix-based Renyi entropy of a trace-normalized Gram
//! matrix and `D_emp` is the mean squared reconstruction error. The first two
//! terms form a conditional entropy of the inputs given the reconstructions;
//! maximizing it discourages the code from retaining information beyond what
//! the distortion budget demands.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`gram`] | normalized Gaussian Gram matrices, Hadamard joints |
//! | [`entropy`] | Renyi entropies and their matrix gradients |
//! | [`autoencoder`] | forward pass, distortion, parameter gradients, Lagrangian |
//! | [`training`] | gradient ascent, clustered mini-batches, baselines |
//! | [`gradcheck`] | central-difference gradient verification |
//! | [`energy`] | reconstruction-energy landscapes |
//! | [`rd`] | Gaussian water-filling and PCA |
//! | [`data`] | synthetic sources, MNIST IDX, CSV/PGM emitters |

pub mod activation;
pub mod autoencoder;
pub mod checkpoint;
pub mod data;
pub mod energy;
pub mod entropy;
pub mod error;
pub mod gradcheck;
pub mod gram;
pub mod kmeans;
pub mod linalg;
pub mod rd;
pub mod rng;
pub mod training;

pub use activation::Activation;
pub use autoencoder::{AutoEncoderParams, ForwardPass, LagrangianTerms, Objective, ParamGrads};
pub use entropy::EntropySpec;
pub use error::{Error, Result};
pub use gram::NormalizedGram;
pub use training::{BatchMode, ObjectiveKind, TrainConfig, TrainHistory};

/// Dense row/column matrix used throughout.
pub type Matrix = faer::Mat<f64>;
