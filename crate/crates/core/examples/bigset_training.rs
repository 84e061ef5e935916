//! Separation training on the synthetic scene with traces and masks written
//! to disk.
//!
//! ```text
//! cargo run --release --example bigset_training -- /tmp/run
//! ```

use std::path::PathBuf;

use bigset::hsi::{save_raw, synth_scene, write_mask_pgm, SynthConfig};
use bigset::{auc_score, export_map, TrainConfig, Trainer};

fn main() -> bigset::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bigset-run".into()));
    std::fs::create_dir_all(&dir).map_err(|e| bigset::Error::Io { path: dir.clone(), source: e })?;

    let (cube, gt) = synth_scene(&SynthConfig::default())?;
    let cfg = TrainConfig::default();
    let result = Trainer::new(cfg.clone()).with_ground_truth(&gt).run(&cube)?;

    println!("tau {:.4}", result.tau);
    for (i, mask) in result.masks.iter().enumerate() {
        let hits = mask.bits().iter().zip(gt.labels()).filter(|(m, g)| **m && **g).count();
        let last = &result.loss_trace[(i + 1) * cfg.epochs_per_iter - 1];
        println!(
            "iteration {}: loss {:.4e} (br {:.4e}, as {:.4e}), {} masked, {} of them anomalies",
            i + 1,
            last.total,
            last.l_br,
            last.l_as,
            mask.count_ones(),
            hits
        );
        write_mask_pgm(mask, dir.join(format!("mask_{}.pgm", i + 1)))?;
    }
    println!("final AUC {:.4}", auc_score(&result.detection, &gt)?);

    std::fs::write(dir.join("trace.csv"), result.trace_csv()).map_err(|e| bigset::Error::Io { path: dir.join("trace.csv"), source: e })?;
    save_raw(&result.detection.to_cube(), dir.join("detection.raw"))?;
    export_map(&result.detection, dir.join("detection.pgm"))?;
    println!("outputs in {}", dir.display());
    Ok(())
}
