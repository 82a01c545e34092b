//! Probabilistically shaped LDPC coding for on-off keying over AWGN.
//!
//! The pipeline is: a constant-composition distribution matcher produces
//! biased message bits, a decimation encoder on the generator-matrix graph
//! picks extra shaping bits so the parity block is also biased, the codeword
//! is sent over an OOK/AWGN channel and decoded with sum-product BP.

pub mod bp;
pub mod channel;
pub mod code;
pub mod dm;
pub mod gf2;
pub mod info;
pub mod shaping;
pub mod sim;

pub use bp::{bp_decode, syndrome_check, BpDecoder, DecodeResult};
pub use code::{LdpcCode, OffsetMode, ShapingSpec};
pub use dm::{dm_dematch, dm_match, DmCodebook};
pub use gf2::{BinMatrix, SparseBinMatrix};
pub use shaping::{build_shaping_graph, llps_exact, shape_encode, GeneratorGraph};
