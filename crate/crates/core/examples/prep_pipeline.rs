// Resize, quality-gate, shuffle and augment a handful of generated images.

use herdsight::image::{
    augment, canny_edge_density, psnr, read_tensor, run_prep_pipeline, AugmentSpec, ImageBuffer, Interval,
    PrepOptions,
};
use herdsight::io::{sha256_hex, write_atomic};
use herdsight::manifest::{DatasetManifest, Gps, SampleRecord, Source};
use herdsight::rng::Seed;
use herdsight::{ClassLabel, Split};

fn record(id: &str, class: ClassLabel, synthetic: bool, png: &[u8]) -> SampleRecord {
    SampleRecord {
        id: id.into(),
        path: format!("raw/{id}.png"),
        class,
        split: Split::Training,
        synthetic,
        sha256: sha256_hex(png),
        source: Source {
            farm_id: "farm-07".into(),
            gps: Gps { lat: 18.52, lon: 73.85 },
            timestamp: "2024-05-02T09:30:00Z".into(),
            breed: "Holstein".into(),
            age_months: 26,
            vet_confirmed: true,
        },
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let work = tempfile::tempdir()?;
    let mut records = Vec::new();
    for (i, (id, class, synthetic)) in [
        ("hoof-01", ClassLabel::FmdFoot, false),
        ("mouth-01", ClassLabel::HealthyMouth, false),
        ("skin-gan-01", ClassLabel::LsdSkin, true),
    ]
    .into_iter()
    .enumerate()
    {
        let img = ImageBuffer::from_fn(96, 72, |x, y| {
            let stripe = ((x / 8 + y / 8 + i as u32) % 2) as u8 * 120;
            [stripe + 40, (x * 2) as u8, (y * 3) as u8]
        });
        let png = img.encode_png()?;
        write_atomic(&work.path().join(format!("raw/{id}.png")), &png)?;
        records.push(record(id, class, synthetic, &png));
    }
    let manifest = DatasetManifest::new(records)?;

    let opts = PrepOptions {
        size: 64,
        input_root: work.path().to_path_buf(),
        ..PrepOptions::default()
    };
    let out = work.path().join("prepared");
    let outcome = run_prep_pipeline(&manifest, &AugmentSpec::default(), Seed(42), &out, &opts)?;
    println!("processed {} images; report {:?}", outcome.report.processed, outcome.report);
    for r in outcome.manifest.samples() {
        println!("  {:<12} -> {} ({}…)", r.id, r.path, &r.sha256[..12]);
    }
    let tensor = read_tensor(&std::fs::read(out.join("tensors/hoof-01.hf01"))?)?;
    println!("tensor {}x{}, normalized = {}", tensor.width(), tensor.height(), tensor.is_normalized());

    // individual building blocks
    let img = ImageBuffer::from_fn(64, 64, |x, _| if x < 32 { [20; 3] } else { [230; 3] });
    let rotated = augment(
        &img,
        &AugmentSpec {
            rotation_deg: Interval::fixed(20.0),
            ..AugmentSpec::identity()
        },
        Seed(1),
    )?;
    println!(
        "step edge density {:.4}; rotated copy {:.4}; PSNR after rotation {:.2} dB",
        canny_edge_density(&img)?,
        canny_edge_density(&rotated)?,
        psnr(&img, &rotated)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
