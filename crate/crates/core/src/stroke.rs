//! Paint and erase gestures rasterized onto a [`Mask`].
//!
//! Canvas coordinates put the center of cell `(x, y)` at `(x, y)`. A stroke
//! covers every cell whose center lies within `brush_radius` of its polyline:
//! a disk at each point plus the capsule joining consecutive points. No
//! anti-aliasing; coverage outside the mask is clipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;

pub const DEFAULT_BRUSH_RADIUS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrokeMode {
    Paint,
    Erase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub mode: StrokeMode,
    pub brush_radius: f64,
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(mode: StrokeMode, brush_radius: f64, points: Vec<Point>) -> Result<Self> {
        let stroke = Self {
            mode,
            brush_radius,
            points,
        };
        stroke.validate()?;
        Ok(stroke)
    }

    pub fn paint(brush_radius: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            StrokeMode::Paint,
            brush_radius,
            points.into_iter().map(Point::from).collect(),
        )
    }

    pub fn erase(brush_radius: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            StrokeMode::Erase,
            brush_radius,
            points.into_iter().map(Point::from).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidStroke("stroke has no points".into()));
        }
        if !(self.brush_radius.is_finite() && self.brush_radius > 0.0) {
            return Err(Error::InvalidStroke(format!(
                "brush radius must be a positive finite number, got {}",
                self.brush_radius
            )));
        }
        if let Some(p) = self.points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidStroke(format!(
                "non-finite point ({}, {})",
                p.x, p.y
            )));
        }
        Ok(())
    }

    /// Consecutive point pairs; a single-point stroke yields one degenerate segment.
    fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let single = (self.points.len() == 1).then(|| (self.points[0], self.points[0]));
        single
            .into_iter()
            .chain(self.points.windows(2).map(|w| (w[0], w[1])))
    }

    /// Whether the cell centered at `(x, y)` is within the brush of this stroke.
    pub fn covers(&self, x: f64, y: f64) -> bool {
        let r2 = self.brush_radius * self.brush_radius;
        self.segments()
            .any(|(a, b)| within_segment(x, y, a, b, r2))
    }
}

/// Whether `(px, py)` lies within `sqrt(r2)` of the closed segment `a..b`.
///
/// Division-free, so it is exact whenever the coordinates are exactly
/// representable with a few fractional bits.
pub(crate) fn within_segment(px: f64, py: f64, a: Point, b: Point, r2: f64) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (ux, uy) = (px - a.x, py - a.y);
    let len_sq = dx * dx + dy * dy;
    let dot = ux * dx + uy * dy;
    if dot <= 0.0 || len_sq == 0.0 {
        ux * ux + uy * uy <= r2
    } else if dot >= len_sq {
        let (vx, vy) = (px - b.x, py - b.y);
        vx * vx + vy * vy <= r2
    } else {
        let cross = ux * dy - uy * dx;
        cross * cross <= r2 * len_sq
    }
}

/// Inclusive cell index range covering `[lo, hi]`, clipped to `0..len`.
fn cell_span(lo: f64, hi: f64, len: u32) -> Option<(u32, u32)> {
    let lo = (lo - 1.0).ceil().max(0.0);
    let hi = (hi + 1.0).floor().min(len as f64 - 1.0);
    (lo <= hi).then(|| (lo as u32, hi as u32))
}

impl Mask {
    /// In-place variant of [`apply_stroke`].
    pub fn apply_stroke(&mut self, stroke: &Stroke) -> Result<()> {
        stroke.validate()?;
        let value = stroke.mode == StrokeMode::Paint;
        let r = stroke.brush_radius;
        let r2 = r * r;
        for (a, b) in stroke.segments() {
            let Some((x0, x1)) = cell_span(a.x.min(b.x) - r, a.x.max(b.x) + r, self.width())
            else {
                continue;
            };
            let Some((y0, y1)) = cell_span(a.y.min(b.y) - r, a.y.max(b.y) + r, self.height())
            else {
                continue;
            };
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if within_segment(x as f64, y as f64, a, b, r2) {
                        self.set(x, y, value);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Returns `mask` with `stroke` painted or erased.
pub fn apply_stroke(mask: &Mask, stroke: &Stroke) -> Result<Mask> {
    let mut out = mask.clone();
    out.apply_stroke(stroke)?;
    Ok(out)
}
