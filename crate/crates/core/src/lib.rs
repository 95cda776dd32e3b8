//! Superpixel segmentation by interpolating a coarse seed grid up to full
//! resolution.
//!
//! The label map starts as one label per seed and is expanded level by level;
//! every inserted element copies one of its two existing neighbors, chosen by
//! an association score. Superpixels are therefore 4-connected by
//! construction, with no post-processing. A SLIC baseline, the usual
//! superpixel metrics and a small command-line tool are included.

pub mod benchmark;
pub mod cli;
pub mod color;
pub mod config;
pub mod error;
pub mod grid;
pub mod interp;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod overlay;
pub mod pipeline;
pub mod scoring;
pub mod slic;
pub mod training;

pub use error::{Error, Result};
pub use grid::{ExpansionSchedule, ImageGrid, LabelMap};
pub use interp::{check_connectivity, expand, AssociationScores, Axis};
pub use loss::GroundTruth;
pub use metrics::MetricsReport;
pub use pipeline::{segment, ScorerChoice, SegmentOptions, Segmentation};
pub use scoring::{ColorAffinityScorer, GtGuidedScorer, Scorer};
