//! Closed-form bounds: premise and Cesàro tail bounds with their derived
//! constants, the `I_q` integral, the normal CDF and the Berry–Esseen margin.

mod berry_esseen;
mod integral;
mod normal;
mod params;

pub use berry_esseen::{berry_esseen_detail, berry_esseen_margin, BeMargin, NormalApprox};
pub use integral::{exp_poly_integral, exp_poly_integral_bound};
pub use normal::{erf, erfc, normal_cdf, normal_quantile, normal_sf};
pub use params::{validate_params, CesaroTail, DerivedConstants, TailBound, TailBoundParams};
