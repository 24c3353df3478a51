use super::{ImageBuffer, CHANNELS};
use crate::error::{Error, Result};

/// Hysteresis thresholds as fractions of the maximum gradient magnitude.
pub const CANNY_HIGH_RATIO: f64 = 0.3;
pub const CANNY_LOW_RATIO: f64 = 0.1;

const GAUSS_SIGMA: f64 = 1.4;

fn gaussian_kernel() -> [f64; 5] {
    let mut k = [0.0; 5];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        *v = (-d * d / (2.0 * GAUSS_SIGMA * GAUSS_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Sample with replicated borders.
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[y * self.w + x]
    }

    fn map(&self, f: impl Fn(isize, isize) -> f64) -> Plane {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                data.push(f(x, y));
            }
        }
        Plane {
            w: self.w,
            h: self.h,
            data,
        }
    }
}

/// Binary edge map (row-major, `true` = edge) from grayscale conversion,
/// 5x5 Gaussian blur, Sobel gradients, non-maximum suppression and
/// double-threshold hysteresis.
pub fn canny_edges(img: &ImageBuffer) -> Result<Vec<bool>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w < 5 || h < 5 {
        return Err(Error::Validation(format!(
            "edge detection needs at least 5x5 pixels, got {w}x{h}"
        )));
    }
    let src = img.as_u8()?;
    let gray = Plane {
        w,
        h,
        data: src
            .chunks_exact(CHANNELS)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect(),
    };

    let k = gaussian_kernel();
    let horiz = gray.map(|x, y| (0..5).map(|i| k[i] * gray.at(x + i as isize - 2, y)).sum());
    let blurred = horiz.map(|x, y| (0..5).map(|i| k[i] * horiz.at(x, y + i as isize - 2)).sum());

    let b = &blurred;
    let gx = b.map(|x, y| {
        (b.at(x + 1, y - 1) + 2.0 * b.at(x + 1, y) + b.at(x + 1, y + 1))
            - (b.at(x - 1, y - 1) + 2.0 * b.at(x - 1, y) + b.at(x - 1, y + 1))
    });
    let gy = b.map(|x, y| {
        (b.at(x - 1, y + 1) + 2.0 * b.at(x, y + 1) + b.at(x + 1, y + 1))
            - (b.at(x - 1, y - 1) + 2.0 * b.at(x, y - 1) + b.at(x + 1, y - 1))
    });
    let mag: Vec<f64> = gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect();
    let max = mag.iter().copied().fold(0.0, f64::max);
    // blurred constants leave rounding-level gradients; treat them as flat
    if max <= 1e-9 {
        return Ok(vec![false; w * h]);
    }

    // non-maximum suppression along the quantized gradient direction
    let get = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let angle = gy.data[i].atan2(gx.data[i]).to_degrees().rem_euclid(180.0);
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            if m >= get(xi + dx, yi + dy) && m >= get(xi - dx, yi - dy) {
                thin[i] = m;
            }
        }
    }

    let high = CANNY_HIGH_RATIO * max;
    let low = CANNY_LOW_RATIO * max;
    let mut edges = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| thin[i] >= high).collect();
    for &i in &stack {
        edges[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edges[j] && thin[j] >= low {
                    edges[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Ok(edges)
}

/// Fraction of pixels marked as edges.
pub fn canny_edge_density(img: &ImageBuffer) -> Result<f64> {
    let edges = canny_edges(img)?;
    Ok(edges.iter().filter(|e| **e).count() as f64 / edges.len() as f64)
}
