//! Clustering by direct maximization of the average silhouette width.
//!
//! The optimizer ([`osil`]) runs steepest ascent over single-object
//! relabels from any initial partition; [`pamsil`] restricts the search to
//! medoid-induced partitions. Initializers, validation indices and the
//! benchmark data generators live alongside.

pub mod datagen;
pub mod error;
pub mod geometry;
pub mod init;
pub mod optimizer;
pub mod rng;
pub mod silhouette;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{pairwise_distances, DataSet, DistanceMatrix, Metric, Partition};
pub use init::{initialize, InitMethod, Linkage};
pub use optimizer::{osil, osil_full, pamsil, OsilConfig, OsilResult, PamsilConfig, PamsilResult};
pub use silhouette::{asw, silhouette_widths, SilhouetteCache};
pub use validation::{adjusted_rand_index, calinski_harabasz, estimate_k, KEstimate, KMethod};
