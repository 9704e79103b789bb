use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xai_core::{Error, FillPolicy, ImageBuffer, Mask, Pipeline};

/// Baseline-class confidence for each square patch position, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionHeatmap {
    pub patch_size: u32,
    pub stride: u32,
    pub cols: u32,
    pub rows: u32,
    pub baseline_class: usize,
    pub baseline_label: String,
    pub baseline_confidence: f64,
    pub cells: Vec<f64>,
}

impl OcclusionHeatmap {
    pub fn get(&self, col: u32, row: u32) -> f64 {
        self.cells[(row * self.cols + col) as usize]
    }

    /// Confidence lost when the patch at (col, row) is filled.
    pub fn drop_at(&self, col: u32, row: u32) -> f64 {
        self.baseline_confidence - self.get(col, row)
    }

    /// Cell with the lowest confidence; first in row-major order on ties.
    pub fn argmin(&self) -> (u32, u32) {
        let i = self
            .cells
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .map_or(0, |(i, _)| i as u32);
        (i % self.cols, i / self.cols)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in 0..self.rows {
            let record: Vec<String> = (0..self.cols)
                .map(|col| format!("{:.6}", self.get(col, row)))
                .collect();
            w.write_record(&record).expect("writing to a Vec cannot fail");
        }
        w.into_inner().expect("flushed")
    }
}

/// Grid dimensions `(cols, rows)` for a patch sweep.
pub fn grid_dims(width: u32, height: u32, patch: u32, stride: u32) -> xai_core::Result<(u32, u32)> {
    if patch == 0 || stride == 0 {
        return Err(Error::Argument("patch size and stride must be at least 1".into()));
    }
    if patch > width || patch > height {
        return Err(Error::Argument(format!(
            "patch {patch} does not fit in a {width}x{height} image"
        )));
    }
    Ok(((width - patch) / stride + 1, (height - patch) / stride + 1))
}

/// Mask with the single square patch at grid cell (col, row) painted.
pub fn patch_mask(width: u32, height: u32, patch: u32, stride: u32, col: u32, row: u32) -> Mask {
    let (x0, y0) = (col * stride, row * stride);
    Mask::from_fn(width, height, |x, y| {
        (x0..x0 + patch).contains(&x) && (y0..y0 + patch).contains(&y)
    })
    .expect("image dimensions are valid")
}

pub fn occlusion_sweep(
    pipeline: &Pipeline,
    image: &ImageBuffer,
    patch: u32,
    stride: u32,
    fill: FillPolicy,
) -> xai_core::Result<OcclusionHeatmap> {
    let (w, h) = image.dimensions();
    let (cols, rows) = grid_dims(w, h, patch, stride)?;
    let baseline = pipeline.score(image)?;
    let class = xai_core::argmax(&baseline.probs);
    let cells = (0..cols * rows)
        .into_par_iter()
        .map(|i| {
            let mask = patch_mask(w, h, patch, stride, i % cols, i / cols);
            Ok(pipeline.score_masked(image, &mask, fill)?.probs[class])
        })
        .collect::<xai_core::Result<Vec<f64>>>()?;
    Ok(OcclusionHeatmap {
        patch_size: patch,
        stride,
        cols,
        rows,
        baseline_class: class,
        baseline_label: pipeline.model().labels().name(class).unwrap_or_default().to_string(),
        baseline_confidence: baseline.probs[class],
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_dimensions() {
        assert_eq!(grid_dims(224, 224, 56, 56).unwrap(), (4, 4));
        assert_eq!(grid_dims(320, 240, 50, 30).unwrap(), (10, 7));
        assert_eq!(grid_dims(224, 224, 224, 17).unwrap(), (1, 1));
        assert!(grid_dims(100, 50, 60, 10).is_err());
        assert!(grid_dims(100, 100, 0, 10).is_err());
        assert!(grid_dims(100, 100, 10, 0).is_err());
    }

    #[test]
    fn patch_mask_covers_one_square() {
        let m = patch_mask(10, 8, 3, 2, 1, 2);
        assert_eq!(m.painted_count(), 9);
        assert!(m.get(2, 4) && m.get(4, 6));
        assert!(!m.get(1, 4) && !m.get(5, 6) && !m.get(2, 7));
    }
}
