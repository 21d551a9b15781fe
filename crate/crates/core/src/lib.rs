//! Admissible contact-force maps for thin-walled objects.
//!
//! The crate turns a triangle mesh into a cylindrical wall-thickness field,
//! converts that field into an admissible lateral force map, re-ranks grasp
//! candidates against the map and simulates a force-aware impedance grip.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the `gripmap` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bvh;
pub mod command;
pub mod fixtures;
pub mod forcemap;
pub mod frame;
pub mod geometry;
pub mod grasp;
pub mod grip;
pub mod mesh;
pub mod ramp;
pub mod stats;
pub mod thickness;

pub use bvh::{Bvh, MeshIndex, RayHit};
pub use command::{parse_command, Action, InteractionMode, Lexicon, ObjectId, TaskCommand};
pub use forcemap::{ForceMap, MaterialId, MaterialModel};
pub use frame::{compute_frame, PrincipalFrame};
pub use geometry::Vec3;
pub use grasp::{GraspCandidate, RankedGrasp};
pub use grip::{GripMode, GripReport, ImpedanceParams};
pub use mesh::TriangleMesh;
pub use thickness::ThicknessGrid;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
