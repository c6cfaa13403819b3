//! Frequency-domain steerable pyramid.
//!
//! The decomposition follows the usual Fourier construction: a high-pass
//! residual is split off first, then each level applies a raised-cosine
//! band-pass ring times `K` angular masks `cos(theta - pi k / K)^(K-1)`, after
//! which the low-pass remainder is cropped to half resolution in the Fourier
//! domain. The radial masks form a tight frame (`hi^2 + lo^2 = 1`), and with
//! the standard angular normalisation the oriented bands of one level sum
//! their squared responses to the band-pass ring.
//!
//! Bands are real: the odd-order angular masks are anti-symmetric, so the
//! `(-i)^(K-1)` factor makes every band spectrum Hermitian.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PyramidConfig {
    pub levels: usize,
    pub orientations: usize,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            orientations: 4,
        }
    }
}

impl PyramidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.orientations == 0 {
            return Err(Error::InvalidInput(
                "pyramid levels and orientations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A real 2-D array in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "plane of {} values cannot be {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn variance(&self) -> f64 {
        let n = self.data.len() as f64;
        let m = self.data.iter().sum::<f64>() / n;
        self.data.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
    }

    /// Top-left `width x height` window.
    fn crop(&self, width: usize, height: usize) -> Plane {
        Plane::from_fn(width, height, |x, y| self.data[y * self.width + x])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subband {
    pub level: usize,
    pub orientation: usize,
    pub plane: Plane,
}

#[derive(Debug, Clone)]
pub struct SteerablePyramid {
    pub highpass: Plane,
    /// Oriented band-pass subbands, level-major.
    pub bands: Vec<Subband>,
    pub lowpass: Plane,
}

impl SteerablePyramid {
    /// Sum of squared coefficients over the oriented bands, each band
    /// weighted by `4^level` to undo the decimation.
    pub fn band_energy(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.plane.energy() * 4f64.powi(b.level as i32))
            .sum()
    }
}

/// Raised-cosine high-pass transition over one octave ending at `top`
/// (both in log2 of normalised radius).
#[inline]
fn high_mask(log_rad: f64, top: f64) -> f64 {
    if log_rad >= top {
        1.0
    } else if log_rad <= top - 1.0 {
        0.0
    } else {
        (PI / 2.0 * (top - log_rad)).cos()
    }
}

#[inline]
fn low_mask(log_rad: f64, top: f64) -> f64 {
    let h = high_mask(log_rad, top);
    (1.0 - h * h).max(0.0).sqrt()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Signed frequency index for position `k` of an `n`-point DFT.
#[inline]
fn signed_freq(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

struct Fft2 {
    width: usize,
    height: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(planner: &mut FftPlanner<f64>, width: usize, height: usize, inverse: bool) -> Self {
        let (row, col) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        Self {
            width,
            height,
            row,
            col,
        }
    }

    fn run(&self, data: &mut [Complex64]) {
        for row in data.chunks_exact_mut(self.width) {
            self.row.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for y in 0..self.height {
                column[y] = data[y * self.width + x];
            }
            self.col.process(&mut column);
            for y in 0..self.height {
                data[y * self.width + x] = column[y];
            }
        }
    }
}

/// Spectrum on a grid of the given size, with per-bin polar coordinates
/// expressed in the units of the original (full-resolution) image.
struct Spectrum {
    width: usize,
    height: usize,
    /// Sample spacing relative to the original grid (1, 2, 4, ...).
    scale: f64,
    values: Vec<Complex64>,
    log_rad: Vec<f64>,
    angle: Vec<f64>,
}

impl Spectrum {
    /// `scale` is the ratio between this grid's sample spacing and the
    /// original one (1, 2, 4, ...).
    fn polar(width: usize, height: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
        let mut log_rad = Vec::with_capacity(width * height);
        let mut angle = Vec::with_capacity(width * height);
        for y in 0..height {
            // Normalised so that the original Nyquist frequency sits at radius 1.
            let fy = 2.0 * signed_freq(y, height) / height as f64 / scale;
            for x in 0..width {
                let fx = 2.0 * signed_freq(x, width) / width as f64 / scale;
                let r = (fx * fx + fy * fy).sqrt();
                log_rad.push(if r > 0.0 { r.log2() } else { f64::NEG_INFINITY });
                angle.push(fy.atan2(fx));
            }
        }
        (log_rad, angle)
    }

    /// Keeps the central half of the spectrum in each dimension.
    fn decimate(&self) -> Spectrum {
        let (w, h) = (self.width / 2, self.height / 2);
        let map = |k: usize, n_new: usize, n_old: usize| {
            if k < n_new.div_ceil(2) {
                k
            } else {
                k + n_old - n_new
            }
        };
        let mut values = Vec::with_capacity(w * h);
        for y in 0..h {
            let oy = map(y, h, self.height);
            for x in 0..w {
                let ox = map(x, w, self.width);
                values.push(self.values[oy * self.width + ox]);
            }
        }
        let scale = self.scale * 2.0;
        let (log_rad, angle) = Spectrum::polar(w, h, scale);
        Spectrum {
            width: w,
            height: h,
            scale,
            values,
            log_rad,
            angle,
        }
    }
}

/// Decomposes `channel` into a steerable pyramid.
///
/// Dimensions are cropped to a multiple of `2^(levels - 1)` so every
/// decimation is exact; the smallest level must still be at least 2x2.
pub fn steerable_pyramid(channel: &Plane, config: &PyramidConfig) -> Result<SteerablePyramid> {
    config.validate()?;
    let multiple = 1usize << (config.levels - 1);
    let (width, height) = (
        channel.width / multiple * multiple,
        channel.height / multiple * multiple,
    );
    for level in 0..config.levels {
        if (width >> level) < 2 || (height >> level) < 2 {
            return Err(Error::ImageTooSmall {
                level,
                width: channel.width,
                height: channel.height,
            });
        }
    }
    let input = if (width, height) == (channel.width, channel.height) {
        channel.clone()
    } else {
        channel.crop(width, height)
    };

    let mut planner = FftPlanner::new();
    let forward = Fft2::new(&mut planner, width, height, false);
    let mut values: Vec<Complex64> = input.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.run(&mut values);
    let full_count = (width * height) as f64;

    let (log_rad, angle) = Spectrum::polar(width, height, 1.0);
    let mut spectrum = Spectrum {
        width,
        height,
        scale: 1.0,
        values,
        log_rad,
        angle,
    };

    let inverse = |planner: &mut FftPlanner<f64>, w: usize, h: usize, mut data: Vec<Complex64>| {
        Fft2::new(planner, w, h, true).run(&mut data);
        Plane {
            width: w,
            height: h,
            data: data.iter().map(|c| c.re / full_count).collect(),
        }
    };

    let hi0: Vec<Complex64> = spectrum
        .values
        .iter()
        .zip(&spectrum.log_rad)
        .map(|(v, &lr)| v * high_mask(lr, 0.0))
        .collect();
    let highpass = inverse(&mut planner, width, height, hi0);
    for (v, &lr) in spectrum.values.iter_mut().zip(&spectrum.log_rad) {
        *v *= low_mask(lr, 0.0);
    }

    let k = config.orientations;
    let order = k - 1;
    let norm = (2f64.powi(2 * order as i32) * factorial(order).powi(2)
        / (k as f64 * factorial(2 * order)))
    .sqrt();
    // (-i)^order
    let phase = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };

    let mut bands = Vec::with_capacity(config.levels * k);
    for level in 0..config.levels {
        let top = -1.0 - level as f64;
        for b in 0..k {
            let theta_b = PI * b as f64 / k as f64;
            let band: Vec<Complex64> = (0..spectrum.values.len())
                .map(|i| {
                    let radial = high_mask(spectrum.log_rad[i], top);
                    if radial == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let angular = norm * (spectrum.angle[i] - theta_b).cos().powi(order as i32);
                    spectrum.values[i] * phase * radial * angular
                })
                .collect();
            let plane = inverse(&mut planner, spectrum.width, spectrum.height, band);
            bands.push(Subband {
                level,
                orientation: b,
                plane,
            });
        }
        for (v, &lr) in spectrum.values.iter_mut().zip(&spectrum.log_rad) {
            *v *= low_mask(lr, top);
        }
        if level + 1 < config.levels {
            spectrum = spectrum.decimate();
        }
    }
    let lowpass = inverse(&mut planner, spectrum.width, spectrum.height, spectrum.values);

    Ok(SteerablePyramid {
        highpass,
        bands,
        lowpass,
    })
}
