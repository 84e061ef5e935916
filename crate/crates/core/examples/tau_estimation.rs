//! Proportion threshold from the RX distance histogram.

use bigset::hsi::{synth_scene, SynthConfig};
use bigset::threshold::{estimate_tau, DEFAULT_BINS};

fn main() -> bigset::Result<()> {
    let (cube, gt) = synth_scene(&SynthConfig::default())?;
    let true_fraction = 1.0 - gt.anomaly_count() as f64 / gt.labels().len() as f64;

    for gamma in [1.0, 2.0, 3.0] {
        let est = estimate_tau(&cube, gamma, DEFAULT_BINS)?;
        println!(
            "gamma {gamma}: corner bin {} (value {:.3}), tau {:.4}  [background fraction {:.4}]",
            est.corner_bin, est.corner_value, est.tau, true_fraction
        );
    }

    let est = estimate_tau(&cube, 2.0, DEFAULT_BINS)?;
    let counts = est.histogram.counts();
    let last = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    println!("non-empty bins up to {last}:");
    for (b, &c) in counts.iter().enumerate().take(last + 1).filter(|(_, &c)| c > 0) {
        println!("  bin {b:3} [{:.3}, {:.3}) {c}", est.histogram.edges()[b], est.histogram.edges()[b + 1]);
    }
    Ok(())
}
