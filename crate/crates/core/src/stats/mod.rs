//! Numerical operators over plain slices and series.

pub mod causality;
pub mod correlation;
pub mod decomposition;
pub mod features;
pub mod hypothesis;
pub mod moments;
pub mod spikes;
pub mod threshold;
pub mod transform;

pub use causality::{causal_matrix, select_top_ratio};
pub use correlation::{acf, max_corr_lag};
pub use decomposition::{decompose, DecompResult};
pub use features::{feature, Feature, FeatureValue};
pub use hypothesis::{stat_test, TestKind};
pub use spikes::detect_spikes;
pub use threshold::{calibrate_threshold, threshold_to_binary};
pub use transform::{apply, concat, FnSpec};
