//! Explicit maps behind the reductions, each with the finite inequality that
//! makes it work.

pub mod blocks;
pub mod clamp;
pub mod koch;
pub mod normalize;
pub mod pairing;

pub use blocks::{
    block_reduce, realize, select_blocks, verify_block_inequality, verify_block_inequality_family,
    weight_streams, Block, BlockPlan, BlockVerification, LevelMargin, LevelPairs, Slot,
};
pub use clamp::{clamp_entry, clamp_reduce, covering_window, row_difference, ClampTable};
pub use koch::{curve_csv, estimate_holder, koch_interleave, koch_point, HolderEstimate, KochParams};
pub use normalize::{indicator_modulus, normalize_metric, placement};
pub use pairing::{cantor_pair, cantor_unpair, int_from_index, int_index, pair_nz, unpair_nz};
