//! Standardized grid initialization shared by the seeded algorithms.

use crate::error::{Error, Result};

/// A `cols x rows` grid of equally sized cells over the image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLayout {
    pub cols: usize,
    pub rows: usize,
    pub cell_width: f64,
    pub cell_height: f64,
}

impl GridLayout {
    /// Picks the grid whose aspect ratio follows the image: the row count is
    /// taken from `floor`/`ceil` of `sqrt(k * h / w)`, columns from
    /// `ceil(k / rows)`, and the candidate with the fewest cells wins (ties:
    /// closer aspect ratio, then fewer rows).
    pub fn new(width: usize, height: usize, k: usize) -> Result<Self> {
        if k == 0 || k > width * height {
            return Err(Error::param(
                "k",
                format!("cannot place {k} seeds on a {width}x{height} image"),
            ));
        }
        let ideal = (k as f64 * height as f64 / width as f64).sqrt();
        let lo = k.div_ceil(width).max(1);
        let hi = height.min(k);
        let aspect = width as f64 / height as f64;
        let mut best: Option<(usize, f64, usize, usize)> = None;
        for rows in [ideal.floor() as usize, ideal.ceil() as usize] {
            let rows = rows.clamp(lo, hi);
            let cols = k.div_ceil(rows);
            let skew = ((cols as f64 / rows as f64) / aspect).ln().abs();
            let cand = (cols * rows, skew, rows, cols);
            let better = match best {
                None => true,
                Some(b) => {
                    cand.0 < b.0 || (cand.0 == b.0 && (cand.1 < b.1 || (cand.1 == b.1 && cand.2 < b.2)))
                }
            };
            if better {
                best = Some(cand);
            }
        }
        let (_, _, rows, cols) = best.expect("two candidates evaluated");
        Ok(Self {
            cols,
            rows,
            cell_width: width as f64 / cols as f64,
            cell_height: height as f64 / rows as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell centers in pixel-index coordinates (pixel `i` sits at `i`),
    /// row-major.
    pub fn centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.rows {
            for i in 0..self.cols {
                out.push((
                    (i as f64 + 0.5) * self.cell_width - 0.5,
                    (j as f64 + 0.5) * self.cell_height - 0.5,
                ));
            }
        }
        out
    }

    /// Seed pixel of every cell: the floor of the cell center measured in
    /// continuous image coordinates, row-major.
    pub fn seeds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.rows {
            for i in 0..self.cols {
                out.push((
                    ((i as f64 + 0.5) * self.cell_width).floor() as usize,
                    ((j as f64 + 0.5) * self.cell_height).floor() as usize,
                ));
            }
        }
        out
    }
}

/// Seed pixels of the standardized grid for `k_desired` superpixels.
pub fn grid_seeds(width: usize, height: usize, k_desired: usize) -> Result<Vec<(usize, usize)>> {
    Ok(GridLayout::new(width, height, k_desired)?.seeds())
}
