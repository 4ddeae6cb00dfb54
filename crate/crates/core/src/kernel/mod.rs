//! Smoothing kernels `x ↦ φ⃗(x) ∈ D(Ω)`, mollifiers and kernel sequences.

mod cover;
mod form;
mod mollifier;
mod sequence;

pub use cover::{CoverPiece, DyadicCover, DEFAULT_OVERLAP};
pub use form::{smooth_apply, LocalTranslate, SmoothingKernel};
pub(crate) use form::apply_split;
pub use mollifier::{make_mollifier, Mollifier, MOLLIFIER_CAP};
pub use sequence::*;
