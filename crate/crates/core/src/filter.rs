//! Separable convolution on float rasters with edge replication.

use crate::raster::FloatRaster;

/// Normalized 1-D Gaussian taps for radius `ceil(3 sigma)`. `sigma == 0`
/// yields the single tap `[1.0]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Convolves rows, then columns, with the odd-length `kernel`. Samples
/// outside the image take the nearest edge pixel.
pub fn convolve_separable(raster: &FloatRaster, kernel: &[f64]) -> FloatRaster {
    debug_assert!(kernel.len() % 2 == 1);
    let (w, h, c) = (raster.width(), raster.height(), raster.channels());
    let radius = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut rows = vec![0.0f64; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for (t, &k) in kernel.iter().enumerate() {
                let sx = clamp(x as isize + t as isize - radius, w);
                let src = raster.pixel(sx, y);
                let dst = &mut rows[(y * w + x) * c..(y * w + x + 1) * c];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += k * s;
                }
            }
        }
    }
    let mut out = vec![0.0f64; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for (t, &k) in kernel.iter().enumerate() {
                let sy = clamp(y as isize + t as isize - radius, h);
                let i = (sy * w + x) * c;
                let dst = &mut out[(y * w + x) * c..(y * w + x + 1) * c];
                for (d, s) in dst.iter_mut().zip(&rows[i..i + c]) {
                    *d += k * s;
                }
            }
        }
    }
    FloatRaster::new(w, h, c, out).expect("same shape as the input")
}

pub fn gaussian_blur_raster(raster: &FloatRaster, sigma: f64) -> FloatRaster {
    if sigma <= 0.0 {
        return raster.clone();
    }
    convolve_separable(raster, &gaussian_kernel(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_sized() {
        let k = gaussian_kernel(1.2);
        assert_eq!(k.len(), 2 * 4 + 1);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(gaussian_kernel(0.0), vec![1.0]);
    }

    #[test]
    fn impulse_mass_is_preserved() {
        let mut data = vec![0.0; 15 * 15];
        data[7 * 15 + 7] = 255.0;
        let r = FloatRaster::new(15, 15, 1, data).unwrap();
        let b = gaussian_blur_raster(&r, 1.5);
        assert!((b.data().iter().sum::<f64>() - 255.0).abs() < 1e-9);
    }

    #[test]
    fn constant_is_fixed_point() {
        let r = FloatRaster::new(6, 4, 3, vec![42.0; 72]).unwrap();
        let b = gaussian_blur_raster(&r, 2.0);
        assert!(b.data().iter().all(|&v| (v - 42.0).abs() < 1e-9));
    }
}
