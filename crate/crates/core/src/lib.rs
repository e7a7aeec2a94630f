//! Persistent homology of point clouds and k-means clustering of the
//! resulting persistence diagrams, persistence measures and their
//! vectorizations.
//!
//! The pipeline is
//!
//! 1. [`shapes`]: labeled synthetic point clouds (circle, sphere, torus).
//! 2. [`homology`]: Vietoris–Rips filtrations and persistence over Z/2Z.
//! 3. [`metrics`]: exact Wasserstein distance between diagrams and optimal
//!    partial transport between measures, with plan certificates.
//! 4. [`means`]: Fréchet means of diagrams and empirical means of measures.
//! 5. [`embeddings`]: Betti curves, persistence landscapes and images.
//! 6. [`clustering`]: representation-generic k-means with k-means++ seeding
//!    and partial-optimality / KKT diagnostics.
//! 7. [`evaluation`]: adjusted Rand index.

pub mod clustering;
pub mod diagram;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod homology;
pub mod means;
pub mod metrics;
pub mod shapes;

pub use diagram::{DiagramPoint, PersistenceDiagram};
pub use error::{Error, Result};
pub use metrics::{Order, PersistenceMeasure, TransportPlan};
pub use shapes::PointCloud;
