//! Evaluation indexes: PSNR, SSIM, SAM, ERGAS.
//!
//! Definitions are pinned here so external oracles can reproduce every
//! value exactly:
//!
//! * PSNR — per band `10*log10(1 / max(MSE, 1e-12))` against a unit
//!   dynamic range, averaged over bands; the floor caps the value at
//!   120 dB so reports stay finite.
//! * SSIM — per band with an 11x11 Gaussian window (sigma 1.5),
//!   K1 = 0.01, K2 = 0.03, dynamic range 1.0, evaluated at every fully
//!   interior window position and averaged, then averaged over bands.
//!   Inputs are clamped to [0, 1] on entry. Bands smaller than the window
//!   fall back to one uniform full-band window (flagged in the report).
//! * SAM — mean over spatial pixels of the angle between the spectral
//!   vectors; zero-norm pixels are skipped and counted.
//! * ERGAS — `100 * sqrt(mean_b (RMSE_b / mean_b)^2)` with resolution
//!   ratio 1; bands whose reference mean is zero are skipped and counted.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::tensor::Cube;
use crate::Result;

const MSE_FLOOR: f64 = 1e-12;
const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// All four indexes plus the fallback/skip diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub sam_rad: f64,
    pub ergas: f64,
    /// SSIM used the uniform full-band window (spatial dims < 11).
    pub ssim_uniform_window: bool,
    /// Pixels skipped by SAM because a spectral vector had zero norm.
    pub sam_skipped_pixels: usize,
    /// Bands skipped by ERGAS because the reference mean was zero.
    pub ergas_skipped_bands: usize,
}

fn check_dims(x_hat: &Cube, x_ref: &Cube) -> Result<()> {
    if x_hat.dims() != x_ref.dims() {
        return Err(Error::Dims(format!(
            "metric inputs differ: {:?} vs {:?}",
            x_hat.dims(),
            x_ref.dims()
        )));
    }
    Ok(())
}

/// Band-averaged peak signal-to-noise ratio in dB, capped at 120.
pub fn psnr(x_hat: &Cube, x_ref: &Cube) -> Result<f64> {
    check_dims(x_hat, x_ref)?;
    let (n1, n2, n3) = x_hat.dims();
    let pixels = n1 * n2;
    let mut total = 0.0;
    for band in 0..n3 {
        let base = pixels * band;
        let mut mse = 0.0;
        for v in 0..pixels {
            let d = x_hat.data()[base + v] - x_ref.data()[base + v];
            mse += d * d;
        }
        mse /= pixels as f64;
        total += 10.0 * libm::log10(1.0 / mse.max(MSE_FLOOR));
    }
    Ok(total / n3 as f64)
}

/// Mean structural similarity; see module docs for the exact convention.
pub fn ssim(x_hat: &Cube, x_ref: &Cube) -> Result<f64> {
    ssim_detail(x_hat, x_ref).map(|(v, _)| v)
}

/// SSIM value plus whether the uniform-window fallback was used.
pub fn ssim_detail(x_hat: &Cube, x_ref: &Cube) -> Result<(f64, bool)> {
    check_dims(x_hat, x_ref)?;
    let (n1, n2, n3) = x_hat.dims();
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);
    let uniform = n1 < SSIM_WINDOW || n2 < SSIM_WINDOW;

    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let mut total = 0.0;
    for band in 0..n3 {
        let band_val = if uniform {
            // One uniform window over the whole band.
            let pixels = (n1 * n2) as f64;
            let mut mx = 0.0;
            let mut my = 0.0;
            for j in 0..n2 {
                for i in 0..n1 {
                    mx += clamp(x_hat.get(i, j, band));
                    my += clamp(x_ref.get(i, j, band));
                }
            }
            mx /= pixels;
            my /= pixels;
            let mut vx = 0.0;
            let mut vy = 0.0;
            let mut cov = 0.0;
            for j in 0..n2 {
                for i in 0..n1 {
                    let a = clamp(x_hat.get(i, j, band)) - mx;
                    let b = clamp(x_ref.get(i, j, band)) - my;
                    vx += a * a;
                    vy += b * b;
                    cov += a * b;
                }
            }
            vx /= pixels;
            vy /= pixels;
            cov /= pixels;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
        } else {
            let w = gaussian_window();
            let mut sum = 0.0;
            let mut count = 0usize;
            for b in 0..=(n2 - SSIM_WINDOW) {
                for a in 0..=(n1 - SSIM_WINDOW) {
                    let mut mx = 0.0;
                    let mut my = 0.0;
                    let mut sxx = 0.0;
                    let mut syy = 0.0;
                    let mut sxy = 0.0;
                    for v in 0..SSIM_WINDOW {
                        for u in 0..SSIM_WINDOW {
                            let wt = w[u + SSIM_WINDOW * v];
                            let xv = clamp(x_hat.get(a + u, b + v, band));
                            let yv = clamp(x_ref.get(a + u, b + v, band));
                            mx += wt * xv;
                            my += wt * yv;
                            sxx += wt * xv * xv;
                            syy += wt * yv * yv;
                            sxy += wt * xv * yv;
                        }
                    }
                    let vx = sxx - mx * mx;
                    let vy = syy - my * my;
                    let cov = sxy - mx * my;
                    sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                        / ((mx * mx + my * my + c1) * (vx + vy + c2));
                    count += 1;
                }
            }
            sum / count as f64
        };
        total += band_val;
    }
    Ok((total / n3 as f64, uniform))
}

/// Normalized 11x11 Gaussian weights, row-major (u + 11*v).
fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut w = vec![0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut sum = 0.0;
    for v in 0..SSIM_WINDOW {
        for u in 0..SSIM_WINDOW {
            let du = u as f64 - half;
            let dv = v as f64 - half;
            let g = libm::exp(-(du * du + dv * dv) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
            w[u + SSIM_WINDOW * v] = g;
            sum += g;
        }
    }
    for x in &mut w {
        *x /= sum;
    }
    w
}

/// Mean spectral angle in radians.
pub fn sam(x_hat: &Cube, x_ref: &Cube) -> Result<f64> {
    sam_detail(x_hat, x_ref).map(|(v, _)| v)
}

/// SAM value plus the number of skipped zero-norm pixels.
pub fn sam_detail(x_hat: &Cube, x_ref: &Cube) -> Result<(f64, usize)> {
    check_dims(x_hat, x_ref)?;
    let (n1, n2, n3) = x_hat.dims();
    let mut total = 0.0;
    let mut kept = 0usize;
    let mut skipped = 0usize;
    for j in 0..n2 {
        for i in 0..n1 {
            let mut dot = 0.0;
            let mut nu = 0.0;
            let mut nv = 0.0;
            for k in 0..n3 {
                let u = x_hat.get(i, j, k);
                let v = x_ref.get(i, j, k);
                dot += u * v;
                nu += u * u;
                nv += v * v;
            }
            if nu == 0.0 || nv == 0.0 {
                skipped += 1;
                continue;
            }
            // Compare dot² against nu*nv before dividing so identical and
            // exactly-proportional spectra give an angle of exactly 0 (or
            // pi), untouched by sqrt rounding.
            let denom2 = nu * nv;
            let angle = if dot * dot >= denom2 {
                if dot >= 0.0 {
                    0.0
                } else {
                    core::f64::consts::PI
                }
            } else {
                libm::acos((dot / libm::sqrt(denom2)).clamp(-1.0, 1.0))
            };
            total += angle;
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::MetricUndefined(
            "sam: every pixel has a zero-norm spectrum".into(),
        ));
    }
    Ok((total / kept as f64, skipped))
}

/// Relative dimensionless global error (resolution ratio 1).
pub fn ergas(x_hat: &Cube, x_ref: &Cube) -> Result<f64> {
    ergas_detail(x_hat, x_ref).map(|(v, _)| v)
}

/// ERGAS value plus the number of skipped zero-mean bands.
pub fn ergas_detail(x_hat: &Cube, x_ref: &Cube) -> Result<(f64, usize)> {
    check_dims(x_hat, x_ref)?;
    let (n1, n2, n3) = x_hat.dims();
    let pixels = (n1 * n2) as f64;
    let mut acc = 0.0;
    let mut kept = 0usize;
    let mut skipped = 0usize;
    for band in 0..n3 {
        let base = n1 * n2 * band;
        let mut mean = 0.0;
        let mut mse = 0.0;
        for v in 0..n1 * n2 {
            mean += x_ref.data()[base + v];
            let d = x_hat.data()[base + v] - x_ref.data()[base + v];
            mse += d * d;
        }
        mean /= pixels;
        mse /= pixels;
        if mean == 0.0 {
            skipped += 1;
            continue;
        }
        let ratio = libm::sqrt(mse) / mean;
        acc += ratio * ratio;
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::MetricUndefined(
            "ergas: every band has zero reference mean".into(),
        ));
    }
    Ok((100.0 * libm::sqrt(acc / kept as f64), skipped))
}

/// Computes all four indexes in one call.
pub fn evaluate(x_hat: &Cube, x_ref: &Cube) -> Result<MetricReport> {
    let psnr_db = psnr(x_hat, x_ref)?;
    let (ssim, ssim_uniform_window) = ssim_detail(x_hat, x_ref)?;
    let (sam_rad, sam_skipped_pixels) = sam_detail(x_hat, x_ref)?;
    let (ergas, ergas_skipped_bands) = ergas_detail(x_hat, x_ref)?;
    Ok(MetricReport {
        psnr_db,
        ssim,
        sam_rad,
        ergas,
        ssim_uniform_window,
        sam_skipped_pixels,
        ergas_skipped_bands,
    })
}
