//! Robust stylized aesthetic QR codes.
//!
//! [`pipeline::generate`] blends a QR symbol into an image,
//! [`stylize::apply_stylizer`] restyles it, and [`pipeline::stage_c`]
//! repairs whatever the stylizer broke so the result decodes with margin.

pub mod aesthetic;
pub mod cli;
pub mod corpus;
pub mod correction;
pub mod decoder;
pub mod error;
pub mod gf;
pub mod grid;
pub mod metrics;
pub mod pipeline;
pub mod qr;
pub mod raster;
pub mod rs;
pub mod sidecar;
pub mod stylize;

pub use error::{Error, Result};
