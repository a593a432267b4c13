//! Equiangular tight frames through hermitian unitaries with prescribed
//! entry moduli.

pub mod construct;
pub mod entangle;
pub mod error;
pub mod families;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod roots;
pub mod scalar;
pub mod solver;

pub use error::{EtfError, Result};
pub use frame::{
    fickus_check, frame_from_gram, frame_from_gram_cholesky, gram_from_frame, gram_from_signature,
    k_parameter, naimark_complement, signature_from_gram, signature_of, spec_from_dn,
    target_bistochastic, verify_etf, verify_signature, welch_bound, EtfCandidate, FrameSpec,
    GramMatrix, SignatureCheck, SignatureUnitary, SynthesisMatrix, VerificationReport,
};
pub use matrix::ComplexMatrix;
pub use scalar::Scalar;

pub type C64 = num_complex::Complex<f64>;
pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type FrameSpec64 = FrameSpec<f64>;
pub type SignatureUnitary64 = SignatureUnitary<f64>;
pub type GramMatrix64 = GramMatrix<f64>;
pub type SynthesisMatrix64 = SynthesisMatrix<f64>;
