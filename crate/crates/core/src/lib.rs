//! Hyperspectral anomaly detection by background/anomaly separation.
//!
//! A small autoencoder is trained to reconstruct the background of a cube
//! while pixels suspected to be anomalous are masked out of the input and
//! pushed towards a smooth reconstruction. Reconstruction errors become the
//! detection map. The crate also ships the RX detector, the proportion
//! threshold estimator, ENVI and raw-container I/O, a synthetic scene
//! generator and ROC/AUC evaluation.
//!
//! ```no_run
//! use bigset::{hsi::{synth_scene, SynthConfig}, train, TrainConfig, auc_score};
//!
//! let (cube, gt) = synth_scene(&SynthConfig::default())?;
//! let result = train(&cube, &TrainConfig::default())?;
//! println!("AUC {:.4}", auc_score(&result.detection, &gt)?);
//! # Ok::<(), bigset::Error>(())
//! ```


pub mod cli;
pub mod cube;
pub mod error;
pub mod hsi;
pub mod laplacian;
pub mod metrics;
pub mod nn;
pub mod rx;
pub mod threshold;
pub mod trainer;

pub use cube::{BinaryMask, DistanceMap, ErrorMap, GroundTruth, HsiCube};
pub use error::{Error, Result};
pub use laplacian::{log_conv, log_conv_adjoint, suppression_grad, suppression_value, LOG_KERNEL};
pub use metrics::{auc, auc_score, export_map, roc_curve, RocCurve, RocPoint};
pub use nn::{
    adam_step, ae_backward, ae_forward, init_params, load_checkpoint, save_checkpoint, AdamState, AeGrads, AeParams,
    Reconstructor, VanillaAe,
};
pub use rx::{background_stats, mahalanobis_map, relative_distance, rx_detect, BackgroundStats};
pub use threshold::{build_histogram, estimate_tau, gamma_transform, unimodal_corner, Histogram, TauEstimate};
pub use trainer::{
    error_map, loss_as, loss_br, mask_input, total_loss, train, train_plain, update_mask, LossParts, TrainConfig,
    TrainResult, Trainer,
};
