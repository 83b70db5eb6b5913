pub mod archive;
pub mod env;
pub mod error;
pub mod experiment;
pub mod io;
pub mod measures;
pub mod model;
pub mod mtmb;
pub mod runner;
pub mod scalar;
pub mod selection;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GenomeF64 = model::Genome<f64>;
pub type GenomeF32 = model::Genome<f32>;
pub type TaskArchiveF64 = mtmb::TaskArchive<f64>;
pub type TaskArchiveF32 = mtmb::TaskArchive<f32>;
pub type TaskSetF64 = mtmb::TaskSet<f64>;
pub type TaskSetF32 = mtmb::TaskSet<f32>;
pub type RunManifestF64 = runner::RunManifest<f64>;
pub type RunManifestF32 = runner::RunManifest<f32>;
