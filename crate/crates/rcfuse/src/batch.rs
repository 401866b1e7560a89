//! Runs the pipeline over a directory of scenes on a bounded worker pool.
//!
//! Every scene is processed independently and written to its own file, so
//! the output bytes do not depend on the number of workers or on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::write_planes;
use crate::pipeline::{run_pipeline, Diagnostics, PipelineConfig};
use crate::schema::{load_scene, save_detections, DetectionFile};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSummary {
    pub scene_id: String,
    pub detections: PathBuf,
    pub diagnostics: Diagnostics,
}

/// `*.json` files directly inside `dir`, sorted by name.
pub fn list_json(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))
}

fn run_one(path: &Path, out_dir: &Path, cfg: &PipelineConfig, export_planes: bool) -> Result<SceneSummary> {
    let scene = load_scene(path)?;
    let out = run_pipeline(&scene, cfg)?;
    let det_path = out_dir.join(format!("{}.json", scene.scene_id));
    save_detections(&DetectionFile::new(&scene.scene_id, &out.detections), &det_path)?;
    if export_planes {
        write_planes(&out.features, &out_dir.join(format!("{}.planes.bin", scene.scene_id)))?;
    }
    log::debug!(
        "{}: {} objects, {} associated, {} multi-claimed pillars",
        scene.scene_id,
        out.diagnostics.total_objects,
        out.diagnostics.matched,
        out.diagnostics.multi_claim
    );
    Ok(SceneSummary {
        scene_id: scene.scene_id,
        detections: det_path,
        diagnostics: out.diagnostics,
    })
}

/// Processes `scenes` with at most `threads` workers. Results come back in
/// input order; the first failing scene (in input order) is reported.
pub fn run_batch(
    scenes: &[PathBuf],
    out_dir: &Path,
    cfg: &PipelineConfig,
    threads: usize,
    export_planes: bool,
) -> Result<Vec<SceneSummary>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = build_pool(threads)?;
    let results: Vec<Result<SceneSummary>> = pool.install(|| {
        scenes
            .par_iter()
            .map(|p| run_one(p, out_dir, cfg, export_planes))
            .collect()
    });
    results.into_iter().collect()
}
