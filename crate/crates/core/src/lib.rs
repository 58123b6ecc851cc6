//! Distance-encoded quantum-inspired clustering on a simulated register.
//!
//! Points are encoded by their distance to an origin as integer codes, loaded
//! into a statevector, and grouped either by entangling the high bits of each
//! code onto an ancilla register or by a sequence of Gaussian unsharp
//! measurements.

pub mod analysis;
pub mod clustering;
pub mod data;
pub mod encoding;
pub mod error;
pub mod qhca;
pub mod quantum;
pub mod unsharp;

pub use clustering::{Cluster, ClusterParams, Clustering};
pub use encoding::{DistanceEncoding, EncodingConfig, Metric, OriginPolicy, Point, ScalePolicy};
pub use error::{Error, Result};
pub use qhca::{qhca_run, AncillaSpec, QhcaConfig, TargetK};
pub use quantum::{RegisterLayout, StateVector, Weighting};
pub use unsharp::{unsharp_run, CenterPolicy, DeltaSpec, UnsharpConfig};
