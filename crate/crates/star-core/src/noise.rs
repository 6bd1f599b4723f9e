//! Reproducible synthetic corruption: additive Gaussian noise,
//! salt-and-pepper impulses, and dead lines.
//!
//! Data lives in [0, 1]; Gaussian sigma is quoted on the 0-255 scale and
//! divided by 255 internally. Gaussian output is not clipped (the noise
//! model is purely additive); metrics clamp for display only. Every
//! corruption derives one RNG stream per band, so results do not depend
//! on band processing order.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::rng::{derive_seed, SplitMix64};
use crate::tensor::Cube;
use crate::Result;

/// Stream tags keeping the three corruption kinds statistically disjoint
/// even when chained with the same base seed.
const STREAM_GAUSSIAN: u64 = 0x01;
const STREAM_IMPULSE: u64 = 0x02;
const STREAM_DEADLINE_BANDS: u64 = 0x03;
const STREAM_DEADLINE_COLS: u64 = 0x04;

/// Which corruption to apply, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// i.i.d. normal with standard deviation `sigma_255 / 255`.
    Gaussian { sigma_255: f64 },
    /// Per band, `round(ratio * n1 * n2)` distinct pixels forced to 0 or 1.
    Impulse { ratio: f64 },
    /// `round(band_ratio * n3)` bands get 1-3 full columns zeroed.
    DeadLines { band_ratio: f64 },
}

/// Applies one corruption with the given seed.
pub fn apply(x: &Cube, spec: NoiseSpec, seed: u64) -> Result<Cube> {
    match spec {
        NoiseSpec::Gaussian { sigma_255 } => add_gaussian(x, sigma_255, seed),
        NoiseSpec::Impulse { ratio } => add_impulse(x, ratio, seed),
        NoiseSpec::DeadLines { band_ratio } => add_dead_lines(x, band_ratio, seed),
    }
}

pub fn add_gaussian(x: &Cube, sigma_255: f64, seed: u64) -> Result<Cube> {
    if !(sigma_255 >= 0.0) || !sigma_255.is_finite() {
        return Err(Error::Param(format!(
            "gaussian sigma must be finite and >= 0, got {sigma_255}"
        )));
    }
    if sigma_255 == 0.0 {
        return Ok(x.clone());
    }
    let sigma = sigma_255 / 255.0;
    let (n1, n2, n3) = x.dims();
    let mut y = x.clone();
    for band in 0..n3 {
        let mut rng = SplitMix64::new(derive_seed(seed ^ STREAM_GAUSSIAN, band as u64));
        let base = n1 * n2 * band;
        let mut pending: Option<f64> = None;
        for v in 0..n1 * n2 {
            let z = match pending.take() {
                Some(z) => z,
                None => {
                    let (a, b) = rng.next_normal_pair();
                    pending = Some(b);
                    a
                }
            };
            y.data_mut()[base + v] += sigma * z;
        }
    }
    Ok(y)
}

pub fn add_impulse(x: &Cube, ratio: f64, seed: u64) -> Result<Cube> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Param(format!(
            "impulse ratio must be in [0, 1], got {ratio}"
        )));
    }
    let (n1, n2, n3) = x.dims();
    let pixels = n1 * n2;
    let hits = libm::round(ratio * pixels as f64) as usize;
    let mut y = x.clone();
    if hits == 0 {
        return Ok(y);
    }
    for band in 0..n3 {
        let mut rng = SplitMix64::new(derive_seed(seed ^ STREAM_IMPULSE, band as u64));
        let mut idx: Vec<usize> = (0..pixels).collect();
        rng.partial_shuffle(&mut idx, hits);
        // First ceil(hits/2) selected pixels become salt, the rest pepper.
        let salt = hits - hits / 2;
        let base = pixels * band;
        for (pos, &p) in idx[..hits].iter().enumerate() {
            y.data_mut()[base + p] = if pos < salt { 1.0 } else { 0.0 };
        }
    }
    Ok(y)
}

pub fn add_dead_lines(x: &Cube, band_ratio: f64, seed: u64) -> Result<Cube> {
    if !(0.0..=1.0).contains(&band_ratio) {
        return Err(Error::Param(format!(
            "dead-line band ratio must be in [0, 1], got {band_ratio}"
        )));
    }
    let (n1, n2, n3) = x.dims();
    let affected = libm::round(band_ratio * n3 as f64) as usize;
    let mut y = x.clone();
    if affected == 0 {
        return Ok(y);
    }
    let mut band_rng = SplitMix64::new(derive_seed(seed ^ STREAM_DEADLINE_BANDS, 0));
    let mut bands: Vec<usize> = (0..n3).collect();
    band_rng.partial_shuffle(&mut bands, affected);
    for &band in &bands[..affected] {
        let mut rng = SplitMix64::new(derive_seed(seed ^ STREAM_DEADLINE_COLS, band as u64));
        let lines = 1 + rng.next_below(3.min(n2));
        let mut cols: Vec<usize> = (0..n2).collect();
        rng.partial_shuffle(&mut cols, lines);
        for &j in &cols[..lines] {
            for i in 0..n1 {
                y.set(i, j, band, 0.0);
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn unit_cube(dims: (usize, usize, usize), seed: u64) -> Cube {
        let mut rng = SplitMix64::new(seed);
        let n = dims.0 * dims.1 * dims.2;
        Cube::from_vec(dims, (0..n).map(|_| 0.1 + 0.8 * rng.next_f64()).collect()).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let x = unit_cube((8, 8, 3), 1);
        let y = add_gaussian(&x, 0.0, 5).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn gaussian_noise_has_the_requested_scale() {
        let x = unit_cube((64, 64, 8), 2);
        let y = add_gaussian(&x, 30.0, 7).unwrap();
        let diffs: Vec<f64> = y
            .data()
            .iter()
            .zip(x.data())
            .map(|(a, b)| a - b)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let sd = libm::sqrt(var);
        let want = 30.0 / 255.0;
        assert!((sd - want).abs() / want < 0.03, "sd {sd} vs {want}");
    }

    #[test]
    fn gaussian_is_seed_deterministic() {
        let x = unit_cube((16, 16, 4), 3);
        let a = add_gaussian(&x, 50.0, 99).unwrap();
        let b = add_gaussian(&x, 50.0, 99).unwrap();
        assert_eq!(a.data(), b.data());
        let c = add_gaussian(&x, 50.0, 100).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn stacked_half_variance_apps_match_one_full_application() {
        let x = unit_cube((64, 64, 8), 4);
        let sigma = 40.0;
        let half = sigma / libm::sqrt(2.0);
        let stacked = add_gaussian(&add_gaussian(&x, half, 11).unwrap(), half, 12).unwrap();
        let single = add_gaussian(&x, sigma, 13).unwrap();
        let sd = |y: &Cube| {
            let n = y.len() as f64;
            let d: Vec<f64> = y.data().iter().zip(x.data()).map(|(a, b)| a - b).collect();
            let m = d.iter().sum::<f64>() / n;
            libm::sqrt(d.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
        };
        let rel = (sd(&stacked) - sd(&single)).abs() / sd(&single);
        assert!(rel < 0.05, "rel {rel}");
    }

    #[test]
    fn impulse_ratio_zero_and_one() {
        let x = unit_cube((10, 10, 3), 5);
        assert_eq!(add_impulse(&x, 0.0, 1).unwrap().data(), x.data());
        let all = add_impulse(&x, 1.0, 1).unwrap();
        assert!(all.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn impulse_corrupts_the_exact_pixel_count_per_band() {
        let x = unit_cube((15, 13, 4), 6);
        let ratio = 0.2;
        let y = add_impulse(&x, ratio, 21).unwrap();
        let (n1, n2, n3) = x.dims();
        let want = libm::round(ratio * (n1 * n2) as f64) as usize;
        for band in 0..n3 {
            let mut hit = 0;
            for v in 0..n1 * n2 {
                let idx = n1 * n2 * band + v;
                if y.data()[idx] != x.data()[idx] {
                    hit += 1;
                    assert!(y.data()[idx] == 0.0 || y.data()[idx] == 1.0);
                }
            }
            // Input values are in (0.1, 0.9), so every corrupted pixel
            // changes value and is counted.
            assert_eq!(hit, want, "band {band}");
        }
        assert!(matches!(add_impulse(&x, 1.5, 0), Err(Error::Param(_))));
    }

    #[test]
    fn dead_lines_zero_whole_columns_in_the_right_number_of_bands() {
        let x = unit_cube((12, 14, 10), 7);
        let y = add_dead_lines(&x, 0.2, 33).unwrap();
        let (n1, n2, n3) = x.dims();
        let mut affected = 0;
        for band in 0..n3 {
            let mut band_has_line = false;
            for j in 0..n2 {
                let zeroed = (0..n1).all(|i| y.get(i, j, band) == 0.0);
                let was_zero = (0..n1).all(|i| x.get(i, j, band) == 0.0);
                if zeroed && !was_zero {
                    band_has_line = true;
                    // Full height: already checked by `zeroed`.
                }
            }
            if band_has_line {
                affected += 1;
            }
        }
        assert_eq!(affected, 2); // round(0.2 * 10)
        assert_eq!(add_dead_lines(&x, 0.0, 1).unwrap().data(), x.data());
    }

    #[test]
    fn corruptions_are_pure_functions_of_seed() {
        let x = unit_cube((9, 9, 5), 8);
        for spec in [
            NoiseSpec::Gaussian { sigma_255: 25.0 },
            NoiseSpec::Impulse { ratio: 0.3 },
            NoiseSpec::DeadLines { band_ratio: 0.4 },
        ] {
            let a = apply(&x, spec, 77).unwrap();
            let b = apply(&x, spec, 77).unwrap();
            assert_eq!(a.data(), b.data());
        }
    }
}
