//! LoG response of an impulse and the masked suppression energy.

use bigset::{log_conv, suppression_value, BinaryMask, HsiCube, LOG_KERNEL};

fn main() -> bigset::Result<()> {
    println!("kernel:");
    for row in LOG_KERNEL {
        println!("  {row:?}");
    }

    let mut cube = HsiCube::zeros(7, 7, 1)?;
    cube.set(3, 3, 0, 1.0);
    let response = log_conv(&cube);
    println!("impulse response:");
    for r in 0..7 {
        let row: Vec<String> = (0..7).map(|c| format!("{:4}", response.get(r, c, 0))).collect();
        println!("  {}", row.join(""));
    }

    let mut mask = BinaryMask::zeros(7, 7);
    mask.set(3 * 7 + 3, true);
    println!("energy at the masked centre: {}", suppression_value(&cube, &mask)?);

    let flat = HsiCube::new(7, 7, 1, vec![0.4; 49])?;
    println!("energy of a flat patch: {}", suppression_value(&flat, &BinaryMask::ones(7, 7))?);
    Ok(())
}
