//! Plain reconstruction training slowly learns to reproduce the anomalies
//! too, and its AUC falls. Separation training on the same scene keeps them
//! out of the training signal.

use bigset::hsi::{synth_scene, SynthConfig};
use bigset::{auc_score, train_plain, TrainConfig, Trainer};

fn main() -> bigset::Result<()> {
    let (cube, gt) = synth_scene(&SynthConfig::default())?;

    let long = TrainConfig { iterations: 1, epochs_per_iter: 5000, auc_every: 50, ..Default::default() };
    let plain = Trainer::new(long.plain()).with_ground_truth(&gt).run(&cube)?;
    let peak = plain.auc_trace.iter().map(|a| a.auc).fold(0.0, f64::max);
    for a in plain.auc_trace.iter().filter(|a| a.epoch % 250 == 0) {
        println!("plain epoch {:5}  AUC {:.4}", a.epoch, a.auc);
    }
    println!("plain peak {peak:.4}, final {:.4}", plain.auc_trace.last().map_or(f64::NAN, |a| a.auc));

    let cfg = TrainConfig::default();
    let plain_750 = auc_score(&train_plain(&cube, &cfg)?.detection, &gt)?;
    let separated = Trainer::new(cfg.clone()).with_ground_truth(&gt).run(&cube)?;
    for a in separated.auc_trace.iter().filter(|a| a.epoch % cfg.epochs_per_iter == 0) {
        println!("separation epoch {:4}  AUC {:.4}", a.epoch, a.auc);
    }
    println!(
        "after {} epochs: plain {plain_750:.4}, separation {:.4}",
        cfg.total_epochs(),
        auc_score(&separated.detection, &gt)?
    );
    Ok(())
}
