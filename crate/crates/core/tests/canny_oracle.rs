//! Edge density checked against an independent Canny implementation.

use herdsight::image::{canny_edge_density, ImageBuffer, CANNY_HIGH_RATIO, CANNY_LOW_RATIO};
use imageproc::edges::canny;
use imageproc::filter::gaussian_blur_f32;
use imageproc::gradients::{horizontal_sobel, vertical_sobel};

fn to_gray(img: &ImageBuffer) -> image::GrayImage {
    image::GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.rgb(x, y).unwrap();
        image::Luma([(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8])
    })
}

/// imageproc takes absolute thresholds; derive them from its own maximum
/// gradient so both sides use the same relative rule.
fn oracle_density(img: &ImageBuffer) -> f64 {
    let gray = to_gray(img);
    let blurred = gaussian_blur_f32(&gray, 1.4);
    let gx = horizontal_sobel(&blurred);
    let gy = vertical_sobel(&blurred);
    let max = gx
        .iter()
        .zip(gy.iter())
        .map(|(a, b)| (*a as f32).hypot(*b as f32))
        .fold(0.0f32, f32::max);
    let edges = canny(&gray, CANNY_LOW_RATIO as f32 * max, CANNY_HIGH_RATIO as f32 * max);
    edges.iter().filter(|v| **v > 0).count() as f64 / (img.width() * img.height()) as f64
}

#[test]
fn step_image_density_agrees_with_reference() {
    let img = ImageBuffer::from_fn(64, 64, |x, _| if x < 32 { [0; 3] } else { [255; 3] });
    let ours = canny_edge_density(&img).unwrap();
    let reference = oracle_density(&img);
    assert!(reference > 0.0);
    assert!(
        (ours - reference).abs() <= 0.2 * reference,
        "ours {ours}, reference {reference}"
    );
}

fn checkerboard(cell: u32) -> ImageBuffer {
    ImageBuffer::from_fn(64, 64, |x, y| if (x / cell + y / cell).is_multiple_of(2) { [0; 3] } else { [255; 3] })
}

#[test]
fn checkerboard_is_denser_than_step() {
    let step = ImageBuffer::from_fn(64, 64, |x, _| if x < 32 { [0; 3] } else { [255; 3] });
    let s = canny_edge_density(&step).unwrap();
    let checker = checkerboard(8);
    let c = canny_edge_density(&checker).unwrap();
    assert!(c > s, "checker {c} vs step {s}");
    assert!(oracle_density(&checker) > oracle_density(&step));
}

#[test]
fn two_pixel_checkerboard_is_smoothed_away() {
    // Period-4 texture is attenuated ~100x by the sigma=1.4 blur, so only
    // border artefacts survive; the reference behaves the same way.
    let step = ImageBuffer::from_fn(64, 64, |x, _| if x < 32 { [0; 3] } else { [255; 3] });
    let checker = checkerboard(2);
    let c = canny_edge_density(&checker).unwrap();
    assert!(c < canny_edge_density(&step).unwrap());
    assert!(oracle_density(&checker) < oracle_density(&step));
}
