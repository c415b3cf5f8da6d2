//! Built-in test problems: a separable quartic toy instance with known
//! stationary points, Student's t-regression over subsampled DCT
//! measurements, and random quadratic-plus-l1 instances for property tests.

pub mod quadratic;
pub mod student_t;
pub mod toy;

pub use quadratic::{random_l1_quadratic, QuadraticOracle};
pub use student_t::{
    build_student_t, dct2_orthonormal, SignalSpec, StudentTFixture, StudentTOracle,
};
pub use toy::{toy_known_points, toy_problem, ToyOracle};
