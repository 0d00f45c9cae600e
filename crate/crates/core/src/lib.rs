//! Constructing outer functions that tame positive measures on the unit
//! disc, together with the dyadic scans and seminorms that certify them.
//!
//! The layers, from the bottom up:
//!
//! * [`geometry`]: dyadic arcs, Carleson squares, disc points.
//! * [`measure`]: atomic measures, Carleson profiles, the annulus splitter,
//!   discretized area measures.
//! * [`boundary`]: grid functions on the circle, BMO/VMO scans, adapted
//!   bumps and the exhaustion function.
//! * [`outer`]: Herglotz quadrature, Poisson extensions, analytic samplers.
//! * [`taming`]: heavy squares, stopping trees, and the two constructors.
//! * [`verification`]: weighted profiles, probes and sharpness experiments.
//! * [`applications`]: multiplier, flattening and Volterra demos.
//! * [`io`]: file formats shared by the command line front end.

pub mod applications;
pub mod boundary;
pub mod error;
pub mod geometry;
pub mod io;
pub mod measure;
pub mod outer;
pub mod taming;
pub mod verification;

pub use error::{Error, Result};
