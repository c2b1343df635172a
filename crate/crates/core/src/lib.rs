//! Principal eigenvalues of drift-diffusion operators with large advection.
//!
//! The operator is `-phi'' - 2 s m' phi' + c phi` on [0,1] with Robin or
//! periodic boundary data. Everything is computed on the self-adjoint
//! transformed form `-w'' + (s^2 m'^2 + s m'' + c) w` with `w = e^{s m} phi`.

mod error;
pub mod lab;
pub mod limit;
pub mod maxset;
pub mod operator;
pub mod poly;
pub mod profile;
pub mod schema;
pub mod spectral;
pub mod templates;

pub use error::Error;
