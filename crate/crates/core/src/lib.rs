//! Approximate Euclidean minimum spanning trees and TSP tours on a simulated
//! massively parallel machine.
//!
//! The pipeline normalizes the input, builds leveled 2-hop spanners over a
//! randomly shifted grid, grows a consistent hierarchy of components with
//! early-terminated leader compression, extracts a spanning tree, assembles
//! an Euler tour of it level by level, and shortcuts the tour into a cycle.
//! Every bulk step is charged to a [`runtime::RoundLedger`].

pub mod compression;
pub mod config;
pub mod error;
pub mod euler;
pub mod gen;
pub mod geometry;
pub mod io;
pub mod levels;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod report;
pub mod runtime;
pub mod spanner;
pub mod tsp;
pub mod verify;

pub use config::{AlgorithmConfig, SpannerStrategy};
pub use error::{Error, Result};
pub use geometry::PointSet;
pub use report::{solve, OracleMode, RunReport, Solution};
