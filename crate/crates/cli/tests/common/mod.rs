#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fpcs::synthetic::{generate, FingerGroup, SyntheticConfig, Texture};
use fpcs::FingerprintDatabase;

pub fn fpcs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpcs"))
}

pub fn run(args: &[&str]) -> Output {
    fpcs().args(args).output().expect("binary runs")
}

pub fn ridge_and_blob_db(size: usize, per_class: u32, impressions: u32, seed: u64) -> FingerprintDatabase {
    generate(&SyntheticConfig {
        height: size,
        width: size,
        impressions,
        groups: vec![
            FingerGroup { texture: Texture::Ridges, fingers: per_class },
            FingerGroup { texture: Texture::Blobs, fingers: per_class },
        ],
        seed,
        ..SyntheticConfig::default()
    })
    .unwrap()
}

/// Writes every database image as `finger_impression.pgm`.
pub fn write_pgm_dir(db: &FingerprintDatabase, dir: &Path) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    db.labels()
        .iter()
        .enumerate()
        .map(|(m, label)| {
            let path = dir.join(format!(
                "{}_{}.pgm",
                label.finger.unwrap(),
                label.impression.unwrap()
            ));
            db.image(m).save_pgm(&path).unwrap();
            path
        })
        .collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
