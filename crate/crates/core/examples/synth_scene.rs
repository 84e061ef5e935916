//! Generate the default synthetic scene and write it as a raw container plus
//! a ground-truth PGM.
//!
//! ```text
//! cargo run --example synth_scene -- /tmp/scene
//! ```

use std::path::PathBuf;

use bigset::hsi::{save_raw, synth_scene, write_ground_truth_pgm, SynthConfig};

fn main() -> bigset::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scene".into()));
    std::fs::create_dir_all(&dir).map_err(|e| bigset::Error::Io { path: dir.clone(), source: e })?;

    let cfg = SynthConfig::default();
    let (cube, gt) = synth_scene(&cfg)?;
    save_raw(&cube, dir.join("cube.raw"))?;
    write_ground_truth_pgm(&gt, dir.join("gt.pgm"))?;

    let (lo, hi) = cube.min_max();
    println!("{}x{}x{} cube, values in [{lo:.3}, {hi:.3}]", cube.height(), cube.width(), cube.bands());
    println!("{} anomalous pixels:", gt.anomaly_count());
    for (p, _) in gt.labels().iter().enumerate().filter(|(_, &l)| l) {
        println!("  row {:2} col {:2}", p / cube.width(), p % cube.width());
    }
    println!("written to {}", dir.display());
    Ok(())
}
