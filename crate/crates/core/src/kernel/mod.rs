//! Charts, tensor fields, exterior calculus and Riemannian curvature.

pub mod connection;
pub mod forms;
pub mod manifold;
pub mod ops;
pub mod residual;
pub mod tensor;

pub use connection::{covariant_derivative, curvature, levi_civita, Curvature};
pub use forms::{exterior_derivative, interior, min_topform_magnitude, wedge};
pub use manifold::{Chart, ChartedManifold, Overlap, PointRef, SmoothMap};
pub use ops::{eval_jet, lie_bracket, lie_derivative_2, nijenhuis_complex, nijenhuis_endo, pullback, ChartMap};
pub use residual::transition_residual;
pub use tensor::{ComplexStructureField, MetricField, Tensor, TensorField, Valence};
