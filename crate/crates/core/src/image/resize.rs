use super::{ImageBuffer, CHANNELS};
use crate::error::{Error, Result};

/// Bilinear resize with half-pixel-center sampling and edge clamping.
pub fn resize_bilinear(img: &ImageBuffer, out_w: u32, out_h: u32) -> Result<ImageBuffer> {
    if out_w == 0 || out_h == 0 || img.width() == 0 || img.height() == 0 {
        return Err(Error::Validation(format!(
            "cannot resize {}x{} to {out_w}x{out_h}",
            img.width(),
            img.height()
        )));
    }
    let src = img.as_u8()?;
    let (in_w, in_h) = (img.width() as usize, img.height() as usize);
    let (ow, oh) = (out_w as usize, out_h as usize);
    let sx = in_w as f64 / ow as f64;
    let sy = in_h as f64 / oh as f64;

    let cols: Vec<(usize, usize, f64)> = (0..ow).map(|x| taps((x as f64 + 0.5) * sx - 0.5, in_w)).collect();
    let mut out = Vec::with_capacity(ow * oh * CHANNELS);
    for y in 0..oh {
        let (y0, y1, fy) = taps((y as f64 + 0.5) * sy - 0.5, in_h);
        for &(x0, x1, fx) in &cols {
            for c in 0..CHANNELS {
                let at = |xx: usize, yy: usize| src[(yy * in_w + xx) * CHANNELS + c] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                out.push(to_u8(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    ImageBuffer::from_rgb8(out_w, out_h, out)
}

/// Neighbouring source indices and the fractional weight of the second one.
fn taps(pos: f64, len: usize) -> (usize, usize, f64) {
    let pos = pos.clamp(0.0, (len - 1) as f64);
    let i0 = pos.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, pos - i0 as f64)
}

pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_to_four_matches_hand_evaluation() {
        let img = ImageBuffer::from_rgb8(2, 1, vec![0, 0, 0, 255, 255, 255]).unwrap();
        let out = resize_bilinear(&img, 4, 1).unwrap();
        // source x at half-pixel centers: -0.25, 0.25, 0.75, 1.25 -> clamp to [0, 1]
        let expected: Vec<u8> = [0.0, 0.25, 0.75, 1.0]
            .iter()
            .map(|f: &f64| (255.0 * f).round() as u8)
            .collect();
        assert_eq!(expected, [0, 64, 191, 255]);
        for (x, e) in expected.iter().enumerate() {
            assert_eq!(out.rgb(x as u32, 0).unwrap(), [*e; 3]);
        }
    }

    #[test]
    fn identity_scale_is_bit_identical() {
        let img = ImageBuffer::from_fn(224, 224, |x, y| [(x * 7 % 256) as u8, (y * 3 % 256) as u8, ((x ^ y) % 256) as u8]);
        assert_eq!(resize_bilinear(&img, 224, 224).unwrap(), img);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let img = ImageBuffer::filled(3, 3, [1, 2, 3]);
        assert!(resize_bilinear(&img, 0, 5).is_err());
        assert!(resize_bilinear(&img, 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn constants_stay_constant(w in 1u32..20, h in 1u32..20, ow in 1u32..40, oh in 1u32..40, rgb in prop::array::uniform3(any::<u8>())) {
            let out = resize_bilinear(&ImageBuffer::filled(w, h, rgb), ow, oh).unwrap();
            prop_assert_eq!(out, ImageBuffer::filled(ow, oh, rgb));
        }
    }
}
