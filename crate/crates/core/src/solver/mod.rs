pub mod residual;
pub mod rules;
pub mod saddle;
pub mod schur;
pub mod stability;
pub mod trajectory;

pub use residual::residual_check;
pub use rules::{AnticipatedPath, PolicyRule};
pub use saddle::{simulate_backward, simulate_divergent, solve_saddle_path, SaddleOptions};
pub use schur::ComplexSchur;
pub use stability::{classify_matrix, eigen_classify, Classification, StabilityReport, UNIT_CIRCLE_TOL};
pub use trajectory::{InstrumentLags, InstrumentSlots, Trajectory};
