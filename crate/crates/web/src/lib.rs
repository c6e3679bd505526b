//! WebAssembly bindings for the browser demo in `www/`.

use fpcs::edges::apply_edge_stage;
use fpcs::evaluation::{roc_from_scan, threshold_grid};
use fpcs::synthetic::{generate, FingerGroup, SyntheticConfig, Texture};
use fpcs::{
    h_scan, split_database, train, EdgeConfig, EdgeMethod, EigenSpace, FingerprintDatabase,
    HScanRow, LabeledTestSet, NoiseLevel, NoiseLevelName, SplitPolicy, Truth,
};
use wasm_bindgen::prelude::*;

/// A synthetic base of ridge fingers and blob fingers, split and trained.
#[wasm_bindgen]
pub struct Demo {
    db: FingerprintDatabase,
    space: EigenSpace,
    tests: LabeledTestSet,
}

fn parse_method(name: &str) -> Result<EdgeMethod, String> {
    name.parse::<EdgeMethod>().map_err(|e| e.to_string())
}

fn parse_level(name: &str) -> Result<NoiseLevelName, String> {
    match name {
        "none" => Ok(NoiseLevelName::None),
        "low" => Ok(NoiseLevelName::Low),
        "medium" => Ok(NoiseLevelName::Medium),
        "high" => Ok(NoiseLevelName::High),
        other => Err(format!("unknown noise level {other:?}")),
    }
}

impl Demo {
    pub fn build(seed: u32, size: usize, fingers: u32, edges: &str) -> Result<Demo, String> {
        let db = generate(&SyntheticConfig {
            height: size,
            width: size,
            impressions: 4,
            groups: vec![
                FingerGroup { texture: Texture::Ridges, fingers },
                FingerGroup { texture: Texture::Blobs, fingers },
            ],
            seed: u64::from(seed),
            ..SyntheticConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let (enrolled, tests) =
            split_database(&db, SplitPolicy::HalfFingers).map_err(|e| e.to_string())?;
        let space = train(&enrolled, &EdgeConfig::with_method(parse_method(edges)?))
            .map_err(|e| e.to_string())?;
        Ok(Demo { db, space, tests })
    }

    /// Edge stage of database image `index` as 8-bit gray bytes.
    pub fn edges_of(&self, index: usize, method: &str, sigma: f64) -> Result<Vec<u8>, String> {
        let img = self.image_of(index)?;
        let cfg = EdgeConfig {
            canny_sigma: sigma,
            ..EdgeConfig::with_method(parse_method(method)?)
        };
        Ok(apply_edge_stage(&img, &cfg).map_err(|e| e.to_string())?.to_bytes())
    }

    fn image_of(&self, index: usize) -> Result<fpcs::GrayImage, String> {
        if index >= self.db.len() {
            return Err(format!("image {index} out of range 0..{}", self.db.len()));
        }
        Ok(self.db.image(index))
    }

    pub fn scan(&self, level: &str, seed: u32) -> Result<Vec<HScanRow>, String> {
        let noise = NoiseLevel::standard(parse_level(level)?, u64::from(seed));
        h_scan(&self.space, &self.tests, &noise).map_err(|e| e.to_string())
    }

    /// `[t, fn_rate, fp_rate]` triples, flattened.
    pub fn sweep(&self, level: &str, seed: u32, steps: usize) -> Result<Vec<f64>, String> {
        let grid = threshold_grid(0.0, 1.0, steps).map_err(|e| e.to_string())?;
        let rows = self.scan(level, seed)?;
        let points = roc_from_scan(&rows, &grid).map_err(|e| e.to_string())?;
        Ok(points
            .iter()
            .flat_map(|p| [p.threshold, p.fn_rate, p.fp_rate])
            .collect())
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, size: usize, fingers: u32, edges: &str) -> Result<Demo, JsError> {
        Demo::build(seed, size, fingers, edges).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.db.dims().0
    }

    #[wasm_bindgen(getter)]
    pub fn count(&self) -> usize {
        self.db.len()
    }

    pub fn image(&self, index: usize) -> Result<Vec<u8>, JsError> {
        Ok(self.image_of(index).map_err(|e| JsError::new(&e))?.to_bytes())
    }

    pub fn edges(&self, index: usize, method: &str, sigma: f64) -> Result<Vec<u8>, JsError> {
        self.edges_of(index, method, sigma).map_err(|e| JsError::new(&e))
    }

    /// H per probe; probes in base come first.
    #[wasm_bindgen(js_name = hScan)]
    pub fn h_scan(&self, level: &str, seed: u32) -> Result<Vec<f64>, JsError> {
        let rows = self.scan(level, seed).map_err(|e| JsError::new(&e))?;
        Ok(rows.iter().map(|r| r.h).collect())
    }

    /// 1 for probes in base, 0 otherwise, aligned with `hScan`.
    #[wasm_bindgen(js_name = inBase)]
    pub fn in_base(&self) -> Vec<u8> {
        self.tests
            .entries
            .iter()
            .map(|e| u8::from(e.truth == Truth::InBase))
            .collect()
    }

    pub fn roc(&self, level: &str, seed: u32, steps: usize) -> Result<Vec<f64>, JsError> {
        self.sweep(level, seed, steps).map_err(|e| JsError::new(&e))
    }
}
