//! Write a cube in each ENVI interleave and read it back.

use bigset::hsi::{load_envi, save_envi, synth_scene, Interleave, SynthConfig};

fn main() -> bigset::Result<()> {
    let cfg = SynthConfig { height: 8, width: 6, bands: 5, anomalies: 2, ..Default::default() };
    let (cube, _) = synth_scene(&cfg)?;
    let dir = tempfile_dir();

    for interleave in [Interleave::Bsq, Interleave::Bil, Interleave::Bip] {
        let stem = dir.join(format!("{interleave:?}").to_lowercase());
        let header = save_envi(&cube, &stem, interleave)?;
        let back = load_envi(&header)?;
        let worst = cube
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{interleave:?}: {} -> {}x{}x{}, max |diff| {worst:.2e} (f32 storage)", header.display(), back.height(), back.width(), back.bands());
    }
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("bigset-envi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}
