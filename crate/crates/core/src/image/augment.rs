use serde::{Deserialize, Serialize};

use super::resize::to_u8;
use super::{ImageBuffer, CHANNELS};
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Closed interval `[lo, hi]` from which a parameter is drawn uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn fixed(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn within(&self, name: &str, bounds: Interval) -> Result<()> {
        if !(self.lo <= self.hi && self.lo >= bounds.lo && self.hi <= bounds.hi) {
            return Err(Error::Validation(format!(
                "{name} interval [{}, {}] must be ordered and inside [{}, {}]",
                self.lo, self.hi, bounds.lo, bounds.hi
            )));
        }
        Ok(())
    }
}

/// Augmentation ranges. Defaults are the full published ranges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub rotation_deg: Interval,
    pub width_shift: Interval,
    pub height_shift: Interval,
    pub zoom: Interval,
    pub brightness: Interval,
    pub channel_shift: Interval,
}

const ROTATION_BOUNDS: Interval = Interval::new(-35.0, 35.0);
const SHIFT_BOUNDS: Interval = Interval::new(0.0, 0.3);
const ZOOM_BOUNDS: Interval = Interval::new(0.7, 1.3);
const BRIGHTNESS_BOUNDS: Interval = Interval::new(0.6, 1.4);
const CHANNEL_SHIFT_BOUNDS: Interval = Interval::new(0.0, 60.0);

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec {
            rotation_deg: ROTATION_BOUNDS,
            width_shift: SHIFT_BOUNDS,
            height_shift: SHIFT_BOUNDS,
            zoom: ZOOM_BOUNDS,
            brightness: BRIGHTNESS_BOUNDS,
            channel_shift: CHANNEL_SHIFT_BOUNDS,
        }
    }
}

impl AugmentSpec {
    pub fn identity() -> Self {
        AugmentSpec {
            rotation_deg: Interval::fixed(0.0),
            width_shift: Interval::fixed(0.0),
            height_shift: Interval::fixed(0.0),
            zoom: Interval::fixed(1.0),
            brightness: Interval::fixed(1.0),
            channel_shift: Interval::fixed(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rotation_deg.within("rotation", ROTATION_BOUNDS)?;
        self.width_shift.within("width shift", SHIFT_BOUNDS)?;
        self.height_shift.within("height shift", SHIFT_BOUNDS)?;
        self.zoom.within("zoom", ZOOM_BOUNDS)?;
        self.brightness.within("brightness", BRIGHTNESS_BOUNDS)?;
        self.channel_shift.within("channel shift", CHANNEL_SHIFT_BOUNDS)
    }

    /// Draw one parameter set. Stream order: rotation, width shift, height
    /// shift, zoom, brightness, then the three channel offsets.
    pub fn sample(&self, seed: Seed) -> AugmentParams {
        let mut rng = seed.rng();
        let mut draw = |i: Interval| rng.uniform(i.lo, i.hi);
        AugmentParams {
            rotation_deg: draw(self.rotation_deg),
            width_shift: draw(self.width_shift),
            height_shift: draw(self.height_shift),
            zoom: draw(self.zoom),
            brightness: draw(self.brightness),
            channel_offsets: [
                draw(self.channel_shift),
                draw(self.channel_shift),
                draw(self.channel_shift),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentParams {
    pub rotation_deg: f64,
    pub width_shift: f64,
    pub height_shift: f64,
    pub zoom: f64,
    pub brightness: f64,
    pub channel_offsets: [f64; 3],
}

impl AugmentParams {
    /// Apply rotation about the centre, translation and zoom about the centre
    /// as one inverse-mapped affine warp with bilinear sampling and
    /// nearest-edge fill, then brightness and per-channel offsets.
    pub fn apply(&self, img: &ImageBuffer) -> Result<ImageBuffer> {
        let src = img.as_u8()?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        if w == 0 || h == 0 {
            return Ok(img.clone());
        }
        let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
        let (tx, ty) = (self.width_shift * w as f64, self.height_shift * h as f64);
        let (sin, cos) = self.rotation_deg.to_radians().sin_cos();
        let z = self.zoom;

        let max_x = (w - 1) as f64;
        let max_y = (h - 1) as f64;
        let mut out = Vec::with_capacity(src.len());
        for oy in 0..h {
            for ox in 0..w {
                // forward: q = c + z * (R (p - c) + t); invert for p
                let ux = (ox as f64 - cx) / z - tx;
                let uy = (oy as f64 - cy) / z - ty;
                let px = (cx + cos * ux + sin * uy).clamp(0.0, max_x);
                let py = (cy - sin * ux + cos * uy).clamp(0.0, max_y);
                let x0 = px.floor() as usize;
                let y0 = py.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let y1 = (y0 + 1).min(h - 1);
                let fx = px - x0 as f64;
                let fy = py - y0 as f64;
                for c in 0..CHANNELS {
                    let at = |xx: usize, yy: usize| src[(yy * w + xx) * CHANNELS + c] as f64;
                    let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                    let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                    let v = to_u8(top * (1.0 - fy) + bottom * fy) as f64;
                    let v = (v * self.brightness).clamp(0.0, 255.0);
                    out.push(to_u8(v + self.channel_offsets[c]));
                }
            }
        }
        ImageBuffer::from_rgb8(img.width(), img.height(), out)
    }
}

/// Draw parameters from `spec` with `seed` and apply them.
pub fn augment(img: &ImageBuffer, spec: &AugmentSpec, seed: Seed) -> Result<ImageBuffer> {
    spec.validate()?;
    spec.sample(seed).apply(img)
}
