//! Analytic continuation, movable singularities and holonomy for complex
//! rational ODEs `dy/dx = P(x, y) / Q(x, y)`.

pub mod algebra;
pub mod continuation;
pub mod foliation;
pub mod holonomy;
pub mod integrate;
pub mod oracles;
pub mod scalar;

pub type C64 = num_complex::Complex64;
pub type UniPoly64 = algebra::UniPoly<f64>;
pub type BiPoly64 = algebra::BiPoly<f64>;
pub type OdeModel64 = foliation::OdeModel<f64>;
pub type UniPoly32 = algebra::UniPoly<f32>;
pub type BiPoly32 = algebra::BiPoly<f32>;
pub type OdeModel32 = foliation::OdeModel<f32>;
