//! The batch preprocessing pipeline.
//!
//! Order of operations: resize every real image to the working size,
//! shuffle them, augment them, append the externally supplied synthetic
//! images (resized only), then normalize everything. Each image gets a PNG
//! (8-bit, pre-normalization) and an `HF01` tensor sidecar (normalized).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{
    canny_edge_density, fisher_yates_in_place, normalize, reencode_psnr, resize_bilinear, tensor_bytes,
    AugmentSpec, ImageBuffer,
};
use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_atomic};
use crate::manifest::{DatasetManifest, SampleRecord};
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq)]
pub struct PrepOptions {
    /// Side length of the square working resolution.
    pub size: u32,
    /// Images whose round trip through the working resolution scores at or
    /// below this PSNR (dB) are flagged.
    pub psnr_threshold: f64,
    /// Images with a lower Canny edge density are flagged for review.
    pub edge_density_floor: f64,
    /// Directory that relative manifest paths are resolved against.
    pub input_root: PathBuf,
}

impl Default for PrepOptions {
    fn default() -> Self {
        PrepOptions {
            size: 224,
            psnr_threshold: 22.0,
            edge_density_floor: 0.01,
            input_root: PathBuf::from("."),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailedImage {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrepReport {
    pub processed: usize,
    pub failed: Vec<FailedImage>,
    pub flagged_low_edge_density: Vec<String>,
    pub flagged_low_psnr: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct PrepOutcome {
    /// Output records in pipeline order, with new paths and digests.
    pub manifest: DatasetManifest,
    pub report: PrepReport,
}

struct Loaded {
    record: SampleRecord,
    image: ImageBuffer,
    low_psnr: bool,
    low_edges: bool,
}

fn load_one(record: &SampleRecord, opts: &PrepOptions) -> Result<Loaded> {
    let original = ImageBuffer::open(&opts.input_root.join(&record.path))?;
    let image = resize_bilinear(&original, opts.size, opts.size)?;
    let quality = reencode_psnr(&original, opts.size)?;
    let density = canny_edge_density(&image)?;
    Ok(Loaded {
        record: record.clone(),
        image,
        low_psnr: quality <= opts.psnr_threshold,
        low_edges: density < opts.edge_density_floor,
    })
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

fn write_outputs(loaded: &Loaded, out_dir: &Path) -> Result<SampleRecord> {
    let png = loaded.image.encode_png()?;
    let tensor = tensor_bytes(&normalize(&loaded.image)?)?;
    let stem = file_stem(&loaded.record.id);
    let rel = format!("images/{stem}.png");
    write_atomic(&out_dir.join(&rel), &png)?;
    write_atomic(&out_dir.join(format!("tensors/{stem}.hf01")), &tensor)?;
    let mut rec = loaded.record.clone();
    rec.path = rel;
    rec.sha256 = sha256_hex(&png);
    Ok(rec)
}

/// Run the pipeline over every manifest record. Undecodable inputs are
/// reported and skipped.
pub fn run_prep_pipeline(
    m: &DatasetManifest,
    spec: &AugmentSpec,
    seed: Seed,
    out_dir: &Path,
    opts: &PrepOptions,
) -> Result<PrepOutcome> {
    spec.validate()?;
    let results: Vec<(String, Result<Loaded>)> = m
        .samples()
        .par_iter()
        .map(|r| (r.id.clone(), load_one(r, opts)))
        .collect();

    let mut report = PrepReport::default();
    let mut real = Vec::new();
    let mut synthetic = Vec::new();
    for (id, res) in results {
        match res {
            Ok(l) if l.record.synthetic => synthetic.push(l),
            Ok(l) => real.push(l),
            Err(e) => report.failed.push(FailedImage {
                id,
                reason: e.to_string(),
            }),
        }
    }

    fisher_yates_in_place(&mut real, &mut seed.substream("shuffle").rng());
    let augmented: Vec<Loaded> = real
        .into_par_iter()
        .map(|l| {
            let params = spec.sample(seed.substream(&format!("augment/{}", l.record.id)));
            Ok(Loaded {
                image: params.apply(&l.image)?,
                ..l
            })
        })
        .collect::<Result<_>>()?;

    let ordered: Vec<Loaded> = augmented.into_iter().chain(synthetic).collect();
    let records: Vec<SampleRecord> = ordered
        .par_iter()
        .map(|l| write_outputs(l, out_dir))
        .collect::<Result<_>>()?;

    report.processed = records.len();
    for l in &ordered {
        if l.low_edges {
            report.flagged_low_edge_density.push(l.record.id.clone());
        }
        if l.low_psnr {
            report.flagged_low_psnr.push(l.record.id.clone());
        }
    }
    let manifest = DatasetManifest::new(records).map_err(|e| match e {
        Error::Record { record, field, message } => Error::record(record, field, format!("after prep: {message}")),
        other => other,
    })?;
    Ok(PrepOutcome { manifest, report })
}
