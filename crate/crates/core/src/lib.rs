//! Video fire detection from salient regions, a flame-color gate and
//! LBP-TOP texture classified by a kernel SVM.

pub mod clipio;
pub mod colormodel;
pub mod error;
pub mod fraction;
pub mod imaging;
pub mod pipeline;
pub mod saliency;
pub mod segmentation;
pub mod svm;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
