//! Instance formats, generators and trace export.

pub mod generate;
pub mod json;
pub mod sdpa;
pub mod trace;

pub use generate::{gen_central_path_sdp, gen_hp_instance};
pub use json::{parse_hp_json, parse_sdp_start, write_hp_json, write_sdp_start, HpJsonInstance};
pub use sdpa::{parse_sdpa, write_sdpa};
pub use trace::{export_trace, parse_trace_json, TraceFile, TraceFormat};
