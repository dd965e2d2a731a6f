//! Proposal filtering, persistent ids, logit binarization and identity-drift
//! frame acceptance over ingested segmenter outputs.

mod grid;
mod proposals;
mod tracking;

pub use grid::{binarize_logits, BinaryMask, SoftMask};
pub use proposals::{filter_proposals, load_proposals, parse_proposals, FilterConfig, RegionProposal};
pub use tracking::{accept_frames, overlap_ratio, TrackedMaskSet};

/// Default overlap ratio below which a frame is skipped.
pub const DEFAULT_ACCEPT_THRESHOLD: f64 = 0.5;
