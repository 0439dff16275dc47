//! Time-series task reasoning engine: operators, plan language, executor,
//! decomposers, benchmark generation and evaluation.

pub mod benchgen;
pub mod constraint;
pub mod dataset;
pub mod decomposer;
pub mod error;
pub mod evaluator;
pub mod executor;
pub mod http;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod plan;
pub mod registry;
pub mod retrieval;
pub mod rng;
pub mod series;
pub mod stats;
pub mod task;
pub mod value;

pub use error::{OpError, OpResult};
pub use metrics::{f1_binary, mape, mape_guarded, pair_accuracy, Metric, Quality};
pub use series::{Frame, Matrix, TimeSeries};
pub use value::{FittedModel, TestResult, Value, ValueKind};
pub use task::{TaskInstance, TaskKind, TaskView};
