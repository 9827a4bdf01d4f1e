//! Epsilon-insensitive support vector regression, grid search and the
//! leave-one-out harness.

mod kernel;
mod loocv;
mod model;
mod search;
pub mod smo;

pub use kernel::{Kernel, KernelKind};
pub use loocv::{loocv, EvalConfig, FoldOutcome, KRule, LoocvResult, TrainedPipeline};
pub use model::{svr_train, svr_train_with, HyperParams, Standardizer, SvrModel, SVR_FORMAT_VERSION};
pub use search::{cv_folds, grid_search, GridSearchResult, GridSpec};
pub use smo::{dual_objective, solve_dual, DualSolution, SolveStatus, SolverOptions};
