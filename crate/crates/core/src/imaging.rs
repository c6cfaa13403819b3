//! Pixel-level colour mathematics shared by the spatial metrics.
//!
//! All channel math runs in `f64` after a single division of the 8-bit value
//! by 255. The Lab conversion uses the sRGB primaries with a D65 white point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An 8-bit RGB pixel.
pub type Rgb = [u8; 3];

/// A decoded raster page in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlideImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl SlideImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from a packed `RGBRGB...` byte buffer.
    pub fn from_rgb_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::InvalidInput(format!(
                "buffer of {} bytes does not hold {width}x{height} RGB pixels",
                bytes.len()
            )));
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, pixels)
    }

    pub fn solid(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Applies `f` to every pixel, keeping the geometry.
    pub fn map_pixels(&self, f: impl Fn(Rgb) -> Rgb) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    /// Degrees in `[0, 360)`.
    pub hue: f64,
    pub saturation: f64,
    pub value: f64,
}

/// CIE Lab with the unit-range normalisation used by the clutter metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabPixel {
    /// `(L/100, (a+128)/255, (b+128)/255)`, clamped to `[0, 1]`.
    pub fn normalized(&self) -> [f64; 3] {
        [
            (self.l / 100.0).clamp(0.0, 1.0),
            ((self.a + 128.0) / 255.0).clamp(0.0, 1.0),
            ((self.b + 128.0) / 255.0).clamp(0.0, 1.0),
        ]
    }
}

#[inline]
pub fn channel_fraction(c: u8) -> f64 {
    f64::from(c) / 255.0
}

/// Piecewise sRGB transfer inverse.
pub fn srgb_to_linear(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("channel fraction {c} outside [0, 1]")));
    }
    Ok(linearize(c))
}

#[inline]
fn linearize(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// BT.709 relative luminance of an 8-bit sRGB pixel.
pub fn relative_luminance(p: Rgb) -> f64 {
    let [r, g, b] = p.map(|c| linearize(channel_fraction(c)));
    (0.2126 * r + 0.7152 * g + 0.0722 * b).clamp(0.0, 1.0)
}

/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv(p: Rgb) -> HsvPixel {
    let [r, g, b] = p.map(channel_fraction);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let value = max;
    let saturation = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return HsvPixel {
            hue: 0.0,
            saturation,
            value,
        };
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut hue = 60.0 * sector;
    if hue >= 360.0 {
        hue -= 360.0;
    }
    HsvPixel {
        hue,
        saturation,
        value,
    }
}

pub fn hsv_to_rgb(hsv: HsvPixel) -> Rgb {
    let h = hsv.hue.rem_euclid(360.0) / 60.0;
    let s = hsv.saturation.clamp(0.0, 1.0);
    let v = hsv.value.clamp(0.0, 1.0);
    let c = v * s;
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|ch| ((ch + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

// D65 reference white for the 2° observer.
const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

pub fn rgb_to_lab(p: Rgb) -> LabPixel {
    let [r, g, b] = p.map(|c| linearize(channel_fraction(c)));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;

    let f = |t: f64| {
        const EPS: f64 = 216.0 / 24389.0;
        const KAPPA: f64 = 24389.0 / 27.0;
        if t > EPS {
            t.cbrt()
        } else {
            (KAPPA * t + 16.0) / 116.0
        }
    };
    let (fx, fy, fz) = (f(x / WHITE_X), f(y / WHITE_Y), f(z / WHITE_Z));
    LabPixel {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

pub fn rgb_to_lab_normalized(p: Rgb) -> [f64; 3] {
    rgb_to_lab(p).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linearization_fixed_points() {
        assert_eq!(srgb_to_linear(0.0).unwrap(), 0.0);
        assert_eq!(srgb_to_linear(1.0).unwrap(), 1.0);
    }

    #[test]
    fn linearization_is_continuous_at_breakpoint() {
        let low = 0.04045 / 12.92;
        let high = ((0.04045f64 + 0.055) / 1.055).powf(2.4);
        assert!((low - high).abs() < 1e-6);
        assert!((srgb_to_linear(0.04045).unwrap() - 0.003_131).abs() < 1e-6);
    }

    #[test]
    fn linearization_rejects_out_of_range() {
        assert!(matches!(srgb_to_linear(1.5), Err(Error::Domain(_))));
        assert!(srgb_to_linear(-0.01).is_err());
    }

    #[test]
    fn luminance_endpoints() {
        assert_eq!(relative_luminance([255, 255, 255]), 1.0);
        assert_eq!(relative_luminance([0, 0, 0]), 0.0);
        assert!((relative_luminance([255, 0, 0]) - 0.2126).abs() < 1e-12);
    }

    #[test]
    fn hsv_primaries() {
        let red = rgb_to_hsv([255, 0, 0]);
        assert_eq!((red.hue, red.saturation, red.value), (0.0, 1.0, 1.0));
        let gray = rgb_to_hsv([128, 128, 128]);
        assert_eq!((gray.hue, gray.saturation), (0.0, 0.0));
        assert_eq!(rgb_to_hsv([0, 255, 255]).hue, 180.0);
    }

    #[test]
    fn lab_white_and_black() {
        let white = rgb_to_lab_normalized([255, 255, 255]);
        assert!((white[0] - 1.0).abs() < 1e-4);
        assert!((white[1] - 128.0 / 255.0).abs() < 1e-3);
        assert!((white[2] - 128.0 / 255.0).abs() < 1e-3);
        assert!(rgb_to_lab_normalized([0, 0, 0])[0].abs() < 1e-12);
    }

    #[test]
    fn lab_neutral_axis() {
        for v in (0..=255).step_by(5) {
            let [_, a, b] = rgb_to_lab_normalized([v as u8; 3]);
            assert!((a - 0.51).abs() <= 0.01, "a'={a} for gray {v}");
            assert!((b - 0.51).abs() <= 0.01, "b'={b} for gray {v}");
        }
    }

    #[test]
    fn solid_image_rejects_zero_size() {
        assert!(SlideImage::solid(0, 4, [0, 0, 0]).is_err());
        assert!(SlideImage::new(2, 2, vec![[0; 3]; 3]).is_err());
    }

    proptest! {
        #[test]
        fn luminance_monotone_per_channel(p in any::<[u8; 3]>(), ch in 0usize..3) {
            let base = relative_luminance(p);
            prop_assert!((0.0..=1.0).contains(&base));
            if p[ch] < 255 {
                let mut q = p;
                q[ch] += 1;
                prop_assert!(relative_luminance(q) >= base);
            }
        }

        #[test]
        fn channel_cycle_rotates_hue_by_120(x in 0u8..=255, order in 0usize..3) {
            // Fully saturated: one channel at 255 and one at 0.
            let p = [[255, x, 0], [0, 255, x], [x, 0, 255]][order];
            let rotated = [p[2], p[0], p[1]];
            let h0 = rgb_to_hsv(p).hue;
            let h1 = rgb_to_hsv(rotated).hue;
            let diff = (h1 - h0).rem_euclid(360.0);
            prop_assert!((diff - 120.0).abs() < 1e-9, "h0={h0} h1={h1}");
        }

        #[test]
        fn hsv_round_trip_for_saturated(p in any::<[u8; 3]>()) {
            let hsv = rgb_to_hsv(p);
            prop_assume!(hsv.saturation > 0.1);
            let back = rgb_to_hsv(hsv_to_rgb(hsv));
            let d = (back.hue - hsv.hue).rem_euclid(360.0);
            prop_assert!(d.min(360.0 - d) <= 1.0);
        }

        #[test]
        fn linearization_strictly_increasing(a in 0u16..1000, b in 0u16..1000) {
            prop_assume!(a < b);
            let fa = srgb_to_linear(f64::from(a) / 999.0).unwrap();
            let fb = srgb_to_linear(f64::from(b) / 999.0).unwrap();
            prop_assert!(fa < fb);
        }
    }
}
