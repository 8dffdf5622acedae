//! RBF support vector classification (one-vs-one, trained by SMO) and the
//! k-fold and leave-one-subject-out evaluation protocols.

mod dataset;
mod protocol;
mod svm;

pub use dataset::{check_samples, Dataset, LabeledSample, MinMaxScaler};
pub use protocol::{
    evaluate, grid_search, kfold, loso, EvalReport, Fold, FoldReport, Protocol, Tuning, GRID_C,
    GRID_GAMMA_LOG2,
};
pub use svm::{
    kernel_matrix, rbf, smo, train, BinaryMachine, BinarySolution, SvmModel, SvmParams, SMO_EPS,
    VOTE_EPS,
};
