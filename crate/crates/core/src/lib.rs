//! Convex-hull bay features for isolated handwritten digits, and the
//! one-hidden-layer perceptron that classifies them.
//!
//! Per image: hull of the object pixels ([`geometry`]), deficiency labelling
//! and four directional `d_cp` scans ([`deficiency`]), then a 125-value
//! vector made of one whole-image block and four centroid-quadrant blocks
//! ([`features`]). [`dataset`] reads MNIST IDX files, [`mlp`] trains and
//! persists the classifier, and [`pipeline`] ties the steps together.

pub mod dataset;
pub mod deficiency;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod image;
pub mod mlp;
pub mod par;
pub mod pipeline;

pub use deficiency::{
    build_deficiency_map, perimeter_contact_count, scan_direction, DeficiencyMap, Direction, DirectionalBayFeatures, Label,
};
pub use features::{extract_feature_vector, FeatureMatrix, FeatureVector, FEATURE_COUNT, LAYOUT_VERSION};
pub use geometry::{graham_scan, point_in_polygon, polygon_area, polygon_centroid, ConvexHull, GeometryError, GridPoint, Location};
pub use image::BinaryImage;
pub use mlp::{MlpModel, Network, TrainConfig};
