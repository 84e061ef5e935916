//! Central finite differences against the analytic gradient of the
//! separation loss with respect to every autoencoder parameter.

use bigset::trainer::separation_loss_grad;
use bigset::{ae_backward, ae_forward, init_params, total_loss, BinaryMask, HsiCube};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bigset::Result<()> {
    let (h, w, l, hidden) = (4, 4, 6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = HsiCube::new(h, w, l, (0..h * w * l).map(|_| rng.random_range(0.0..1.0)).collect())?;
    let mask = BinaryMask::from_bits(h, w, (0..h * w).map(|_| rng.random_bool(0.3)).collect())?;
    let lambda = 0.1;
    let params = init_params(l, hidden, 5)?;

    let loss = |flat: &[f64]| -> f64 {
        let p = bigset::AeParams::from_flat(l, hidden, flat).expect("shape");
        let (recon, _) = ae_forward(&p, &x).expect("forward");
        total_loss(&recon, &x, &mask, lambda, 1e-8).expect("loss").total
    };

    let (recon, cache) = ae_forward(&params, &x)?;
    let (_, grad_out) = separation_loss_grad(&recon, &x, &mask, lambda, 1e-8)?;
    let analytic = ae_backward(&params, &cache, &grad_out)?.to_flat();

    let flat = params.to_flat();
    let step = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..flat.len() {
        let mut plus = flat.clone();
        plus[i] += step;
        let mut minus = flat.clone();
        minus[i] -= step;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * step);
        let rel = (numeric - analytic[i]).abs() / numeric.abs().max(analytic[i].abs()).max(1e-8);
        worst = worst.max(rel);
    }
    println!("{} parameters, {} masked pixels, worst relative error {worst:.2e}", flat.len(), mask.count_ones());
    Ok(())
}
