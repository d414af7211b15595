//! Self-contained special functions, adaptive quadrature, and bracketed root
//! finding used by every other module.

pub mod quad;
pub mod roots;
pub mod special;

pub use quad::{integrate, QuadratureSpec};
pub use roots::invert_monotone;
pub use special::{lambert_w0, ln_gamma, marcum_q1, regularized_lower_gamma, scaled_bessel_i0};
