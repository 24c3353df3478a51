// Build a manifest, drop duplicate images by digest and check the split
// accounting against the published table.

use herdsight::io::sha256_hex;
use herdsight::manifest::{
    dedup_by_digest, parse_manifest, verify_split_accounting, CountTable, DatasetManifest,
};
use herdsight::{ClassLabel, Split};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let text = r#"{"samples": [
        {"id": "a1", "path": "img/a1.png", "class": "fmd-foot", "split": "training", "synthetic": false,
         "sha256": "SHA_A", "source": {"farm_id": "f1", "gps": {"lat": 18.5, "lon": 73.8},
         "timestamp": "2024-03-01T10:15:00Z", "breed": "Gir", "age_months": 30, "vet_confirmed": true}},
        {"id": "a2", "path": "img/a2.png", "class": "fmd-foot", "split": "training", "synthetic": false,
         "sha256": "SHA_A", "source": {"farm_id": "f1", "gps": {"lat": 18.5, "lon": 73.8},
         "timestamp": "2024-03-01", "breed": "Gir", "age_months": 30, "vet_confirmed": true}},
        {"id": "b1", "path": "img/b1.png", "class": "lsd-skin", "split": "testing", "synthetic": false,
         "sha256": "SHA_B", "source": {"farm_id": "f2", "gps": {"lat": 19.1, "lon": 72.9},
         "timestamp": "2024-04-11T08:00:00", "breed": "Sahiwal", "age_months": 48, "vet_confirmed": false}}
    ]}"#
    .replace("SHA_A", &sha256_hex(b"image a"))
    .replace("SHA_B", &sha256_hex(b"image b"));

    let manifest = parse_manifest(&text)?;
    let (kept, removed) = dedup_by_digest(&manifest);
    println!("{} records, {} after dedup, removed {removed:?}", manifest.len(), kept.len());

    let report = verify_split_accounting(&kept, &CountTable::table1());
    println!("against the published split table: {} mismatched cells", report.mismatches.len());

    let mut expected = CountTable::default();
    expected.set(ClassLabel::FmdFoot, Split::Training, false, 1);
    expected.set(ClassLabel::LsdSkin, Split::Testing, false, 1);
    print!("{}", verify_split_accounting(&kept, &expected));

    assert_eq!(DatasetManifest::new(kept.samples().to_vec())?.len(), 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
