//! ROC curve and AUC of the RX map, written as CSV.

use bigset::hsi::{synth_scene, SynthConfig};
use bigset::{auc, roc_curve, rx_detect};

fn main() -> bigset::Result<()> {
    let cfg = SynthConfig { contrast: 0.6, noise_std: 0.05, ..Default::default() };
    let (cube, gt) = synth_scene(&cfg)?;
    let curve = roc_curve(&rx_detect(&cube)?, &gt)?;
    println!("{} operating points, AUC {:.4}", curve.points().len(), auc(&curve));
    for p in curve.points().iter().take(8) {
        println!("  P_f {:.4}  P_d {:.4}", p.p_f, p.p_d);
    }
    let path = std::env::temp_dir().join("bigset-roc.csv");
    curve.write_csv(&path)?;
    println!("curve written to {}", path.display());

    let inverted = roc_curve(&rx_detect(&cube)?, &gt.inverted())?;
    println!("swapped labels: AUC {:.4}", auc(&inverted));
    Ok(())
}
