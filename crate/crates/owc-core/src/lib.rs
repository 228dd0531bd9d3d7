//! Indoor optical wireless channel simulation and multi-user resource
//! allocation.
//!
//! The crate traces the optical channel of a rectangular room with Lambertian
//! reflectors (line of sight plus up to two reflections), models two receiver
//! front ends (a four-branch angle-diversity receiver and a 3x3-pixel imaging
//! receiver), derives frequency-domain channel metrics, and assigns access
//! points, wavelengths and receiver elements to users by maximizing the sum
//! of per-user SINRs with an exact branch-and-bound search.
//!
//! Entry points:
//! - [`scene::default_room_scene`] builds the bundled reference room.
//! - [`propagation::build_channel_db`] traces the full channel database.
//! - [`analysis::bandwidth_cdf`] aggregates per-location 3 dB bandwidths.
//! - [`allocation::optimize`] solves the assignment problem.
//! - [`cli`] backs the `owc` command-line binary.

pub mod allocation;
pub mod analysis;
pub mod cli;
pub mod db;
pub mod error;
pub mod geometry;
pub mod propagation;
pub mod receivers;
pub mod scene;

pub use error::{Error, Result};
