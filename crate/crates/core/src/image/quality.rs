use super::{resize_bilinear, ImageBuffer};
use crate::error::{Error, Result};

/// Peak signal-to-noise ratio in dB over all samples; `f64::INFINITY` for
/// identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Validation(format!(
            "psnr of {}x{} against {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (da, db) = (a.as_u8()?, b.as_u8()?);
    if da.is_empty() {
        return Err(Error::Validation("psnr of empty images".into()));
    }
    let sse: u64 = da
        .iter()
        .zip(db)
        .map(|(x, y)| {
            let d = (*x as i64 - *y as i64).unsigned_abs();
            d * d
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / da.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// PSNR of an image against its own round trip through the working
/// resolution (down to `size`x`size` and back). Images already at the
/// working size score `+inf`.
pub fn reencode_psnr(original: &ImageBuffer, size: u32) -> Result<f64> {
    let working = resize_bilinear(original, size, size)?;
    let back = resize_bilinear(&working, original.width(), original.height())?;
    psnr(original, &back)
}
