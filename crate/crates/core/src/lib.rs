//! Semantic-aware image and video transmission simulator.
//!
//! A sender isolates the foreground of a frame, matches the rest against a
//! background library shared with the receiver, and pushes only the
//! foreground crop through an analog block-DCT channel codec over AWGN. The
//! receiver pastes the decoded crop back onto its copy of the background.
//! When no background matches, the whole frame goes through the same codec.
//!
//! Modules, bottom-up:
//!
//! - [`imaging`]: RGB images, binary masks, PSNR, resizing, compositing.
//! - [`features`]: oriented FAST, rotated BRIEF, Hamming matching.
//! - [`bglib`]: background library, best-match selection, `.bgl` files.
//! - [`segmentation`]: convex hulls from landmarks, pluggable segmenters.
//! - [`keyinfo`]: crop extraction and restoration bookkeeping.
//! - [`channel`]: block-DCT analog codec and the AWGN channel.
//! - [`dynbg`]: background stitching from video and scene splitting.
//! - [`scheduler`]: per-user power needs and the knapsack-style planner.
//! - [`pipeline`]: end-to-end flows, wire frames, evaluation sweeps.
//! - [`cli`]: the `semtx` command line.
//! - [`synth`]: seeded synthetic corpus with known ground truth.

pub mod bglib;
pub mod channel;
pub mod cli;
mod codec;
pub mod dynbg;
pub mod error;
pub mod features;
pub mod imaging;
pub mod keyinfo;
pub mod pipeline;
pub mod scheduler;
pub mod segmentation;
pub mod synth;

pub use error::{Error, FormatError, Result};
pub use imaging::{BoundingRect, ImageBuf, MaskBuf, Psnr};
