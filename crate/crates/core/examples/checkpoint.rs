//! Train briefly, save the autoencoder with its optimizer state, reload it
//! and continue.

use bigset::hsi::{synth_scene, SynthConfig};
use bigset::{load_checkpoint, save_checkpoint, train_plain, Reconstructor, TrainConfig, VanillaAe};

fn main() -> bigset::Result<()> {
    let (cube, _) = synth_scene(&SynthConfig::default())?;
    let cfg = TrainConfig { iterations: 1, epochs_per_iter: 50, ..Default::default() };
    let result = train_plain(&cube, &cfg)?;

    let path = std::env::temp_dir().join("bigset-ae.bin");
    save_checkpoint(&path, &result.model.params, Some(&result.model.adam))?;
    let (params, adam) = load_checkpoint(&path)?;
    println!("reloaded {} parameters, ADAM step {}", params.len(), adam.as_ref().map_or(0, |a| a.t));
    assert_eq!(params, result.model.params);

    let mut model = VanillaAe::from_params(params, adam.expect("optimizer state was saved"));
    let x = cube.normalized();
    let before = bigset::error_map(&model.reconstruct(&x)?, &x)?.values().iter().sum::<f64>();
    for _ in 0..50 {
        let recon = model.forward(&x)?;
        let (_, grad) = bigset::trainer::separation_loss_grad(&recon, &x, &bigset::BinaryMask::zeros(x.height(), x.width()), 0.0, 1e-8)?;
        model.accumulate_grad(&grad)?;
        model.apply_update()?;
    }
    let after = bigset::error_map(&model.reconstruct(&x)?, &x)?.values().iter().sum::<f64>();
    println!("summed error {before:.4} -> {after:.4} after 50 more epochs");
    Ok(())
}
