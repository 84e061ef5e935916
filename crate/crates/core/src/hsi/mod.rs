//! Loading, saving and synthesizing hyperspectral cubes and labels.

pub mod envi;
pub mod maps;
pub mod raw;
pub mod synth;

pub use envi::{load_envi, save_envi, EnviHeader, Interleave};
pub use maps::{
    read_ground_truth_csv, read_ground_truth_pgm, read_pgm, write_ground_truth_csv, write_ground_truth_pgm,
    write_mask_pgm, write_pgm,
};
pub use raw::{load_raw, save_load_raw, save_raw};
pub use synth::{synth_scene, Component, SynthConfig};
