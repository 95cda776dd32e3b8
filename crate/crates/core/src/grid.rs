//! Grid geometry: images, label maps, and the seed/expansion schedule.
//!
//! A seed grid of `h0 x w0` superpixels is laid over the image every `S`
//! pixels, starting at the top-left pixel. Each expansion level halves the
//! stride, so after `log2(S)` levels every pixel carries a label. Image sizes
//! reachable this way are `(h0 - 1) * S + 1` by `(w0 - 1) * S + 1`; other sizes
//! are resized to the nearest valid one first.

use crate::error::{Error, Result};

/// Row-major image with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageGrid {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be non-zero"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::invalid(format!(
                "expected {} samples for {height}x{width}x{channels}, got {}",
                height * width * channels,
                data.len()
            )));
        }
        if let Some(bad) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::invalid(format!(
                "channel value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Image with every pixel set to `color`.
    pub fn filled(height: usize, width: usize, color: &[f32]) -> Result<Self> {
        let data = color
            .iter()
            .copied()
            .cycle()
            .take(height * width * color.len())
            .collect();
        Self::new(height, width, color.len(), data)
    }

    pub fn from_fn<F>(height: usize, width: usize, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f32,
    {
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for c in 0..width {
                for k in 0..channels {
                    data.push(f(r, c, k));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Copy with three channels; grayscale is replicated.
    pub fn to_rgb(&self) -> ImageGrid {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ImageGrid {
            height: self.height,
            width: self.width,
            channels: 3,
            data,
        }
    }
}

/// Grid of superpixel IDs, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(Error::invalid(format!(
                "expected {} labels for {height}x{width}, got {}",
                height * width,
                labels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    /// Builds a map from equally long rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut labels = Vec::with_capacity(height * width);
        for row in rows {
            assert_eq!(row.as_ref().len(), width, "ragged label rows");
            labels.extend_from_slice(row.as_ref());
        }
        Self {
            height,
            width,
            labels,
        }
    }

    pub fn filled(height: usize, width: usize, label: u32) -> Self {
        Self {
            height,
            width,
            labels: vec![label; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.labels[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        // chunks_exact(0) panics, and a 0-wide map has no rows worth yielding.
        self.labels
            .chunks_exact(self.width.max(1))
            .take(self.height)
    }

    pub fn transpose(&self) -> LabelMap {
        let mut labels = Vec::with_capacity(self.labels.len());
        for c in 0..self.width {
            for r in 0..self.height {
                labels.push(self.get(r, c));
            }
        }
        LabelMap {
            height: self.width,
            width: self.height,
            labels,
        }
    }

    pub fn max_label(&self) -> Option<u32> {
        self.labels.iter().copied().max()
    }

    pub fn distinct_count(&self) -> usize {
        let mut seen = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Relabels to `0..n` in order of first row-major appearance.
    pub fn compacted(&self) -> LabelMap {
        let mut remap = std::collections::HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|l| {
                let next = remap.len() as u32;
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        LabelMap {
            height: self.height,
            width: self.width,
            labels,
        }
    }
}

fn check_seed_step(seed_step: usize) -> Result<()> {
    if seed_step < 2 || !seed_step.is_power_of_two() {
        return Err(Error::invalid(format!(
            "seed step must be a power of two >= 2, got {seed_step}"
        )));
    }
    Ok(())
}

/// Seed grid size for an `height x width` image sampled every `seed_step` pixels.
pub fn init_dims(height: usize, width: usize, seed_step: usize) -> Result<(usize, usize)> {
    check_seed_step(seed_step)?;
    if height == 0 || width == 0 {
        return Err(Error::invalid("image dimensions must be non-zero"));
    }
    Ok((height.div_ceil(seed_step), width.div_ceil(seed_step)))
}

/// Map size after one expansion step: one new element between every pair.
pub fn expanded_dims(height: usize, width: usize) -> (usize, usize) {
    (2 * height - 1, 2 * width - 1)
}

fn nearest_valid_extent(extent: usize, seed_step: usize) -> usize {
    let below = (extent.max(1) - 1) / seed_step * seed_step + 1;
    if below == extent {
        return extent;
    }
    let above = below + seed_step;
    // ties go to the larger size
    if above - extent <= extent - below {
        above
    } else {
        below
    }
}

/// Closest image size the seed grid can expand to exactly.
///
/// With `target = Some((rows, cols))` the size is the one producing that
/// superpixel grid; otherwise each axis moves to its nearest valid extent.
pub fn nearest_valid_size(
    height: usize,
    width: usize,
    seed_step: usize,
    target: Option<(usize, usize)>,
) -> Result<(usize, usize)> {
    check_seed_step(seed_step)?;
    match target {
        Some((rows, cols)) => {
            if rows == 0 || cols == 0 {
                return Err(Error::invalid("target superpixel grid must be non-empty"));
            }
            Ok((
                rows * seed_step - (seed_step - 1),
                cols * seed_step - (seed_step - 1),
            ))
        }
        None => Ok((
            nearest_valid_extent(height, seed_step),
            nearest_valid_extent(width, seed_step),
        )),
    }
}

/// Splits a superpixel budget into a `rows x cols` seed grid following the
/// image aspect ratio.
pub fn grid_for_count(count: usize, height: usize, width: usize) -> Result<(usize, usize)> {
    if count == 0 || height == 0 || width == 0 {
        return Err(Error::invalid(
            "superpixel count and image size must be non-zero",
        ));
    }
    let rows = ((count as f64 * height as f64 / width as f64).sqrt().round() as usize).max(1);
    let cols = ((count as f64 / rows as f64).round() as usize).max(1);
    Ok((rows, cols))
}

/// Per-level map sizes for one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSchedule {
    seed_step: usize,
    dims: Vec<(usize, usize)>,
}

impl ExpansionSchedule {
    /// Schedule for an image that already has a valid size.
    pub fn new(height: usize, width: usize, seed_step: usize) -> Result<Self> {
        let (h0, w0) = init_dims(height, width, seed_step)?;
        if (h0 - 1) * seed_step + 1 != height || (w0 - 1) * seed_step + 1 != width {
            return Err(Error::InvalidSize {
                height,
                width,
                seed_step,
                nearest: nearest_valid_size(height, width, seed_step, None)?,
            });
        }
        let levels = seed_step.trailing_zeros() as usize;
        let mut dims = Vec::with_capacity(levels + 1);
        dims.push((h0, w0));
        for _ in 0..levels {
            let (h, w) = *dims.last().unwrap();
            dims.push(expanded_dims(h, w));
        }
        debug_assert_eq!(dims[levels], (height, width));
        Ok(Self { seed_step, dims })
    }

    pub fn seed_step(&self) -> usize {
        self.seed_step
    }

    /// Number of expansion steps, `log2(S)`.
    pub fn levels(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[(usize, usize)] {
        &self.dims
    }

    pub fn seed_dims(&self) -> (usize, usize) {
        self.dims[0]
    }

    pub fn image_dims(&self) -> (usize, usize) {
        self.dims[self.levels()]
    }

    /// Pixel spacing between map elements at `level`: `S / 2^level`.
    pub fn stride(&self, level: usize) -> usize {
        self.seed_step >> level
    }

    pub fn superpixel_count(&self) -> usize {
        let (h0, w0) = self.dims[0];
        h0 * w0
    }
}

pub fn build_schedule(height: usize, width: usize, seed_step: usize) -> Result<ExpansionSchedule> {
    ExpansionSchedule::new(height, width, seed_step)
}

/// Seed map: every seed is its own superpixel, IDs row-major from 0.
pub fn init_map(h0: usize, w0: usize) -> LabelMap {
    LabelMap {
        height: h0,
        width: w0,
        labels: (0..(h0 * w0) as u32).collect(),
    }
}

/// Image coordinate of element `(i, j)` of the level-`level` map.
pub fn level_coord_to_pixel(
    level: usize,
    i: usize,
    j: usize,
    schedule: &ExpansionSchedule,
) -> Result<(usize, usize)> {
    let Some(&(h, w)) = schedule.dims().get(level) else {
        return Err(Error::invalid(format!(
            "level {level} outside 0..={}",
            schedule.levels()
        )));
    };
    if i >= h || j >= w {
        return Err(Error::invalid(format!(
            "({i}, {j}) outside level-{level} map of {h}x{w}"
        )));
    }
    let s = schedule.stride(level);
    Ok((i * s, j * s))
}

// Corner-aligned sample positions: the first and last pixels map onto each other.
fn sample_axis(out_len: usize, in_len: usize) -> Vec<(usize, usize, f32)> {
    (0..out_len)
        .map(|o| {
            if out_len == 1 || in_len == 1 {
                return (0, 0, 0.0);
            }
            let num = o * (in_len - 1);
            let den = out_len - 1;
            let lo = num / den;
            let frac = (num % den) as f64 / den as f64;
            let hi = (lo + 1).min(in_len - 1);
            (lo, hi, frac as f32)
        })
        .collect()
}

/// Bilinear resampling with corner-aligned grids.
pub fn resize_image(image: &ImageGrid, height: usize, width: usize) -> Result<ImageGrid> {
    if height == 0 || width == 0 {
        return Err(Error::invalid("target dimensions must be non-zero"));
    }
    if image.dims() == (height, width) {
        return Ok(image.clone());
    }
    let rows = sample_axis(height, image.height);
    let cols = sample_axis(width, image.width);
    let ch = image.channels;
    let mut data = Vec::with_capacity(height * width * ch);
    for &(r0, r1, fr) in &rows {
        for &(c0, c1, fc) in &cols {
            let p00 = image.pixel(r0, c0);
            let p01 = image.pixel(r0, c1);
            let p10 = image.pixel(r1, c0);
            let p11 = image.pixel(r1, c1);
            for k in 0..ch {
                let top = p00[k] + (p01[k] - p00[k]) * fc;
                let bottom = p10[k] + (p11[k] - p10[k]) * fc;
                let v = top + (bottom - top) * fr;
                data.push(v.clamp(0.0, 1.0));
            }
        }
    }
    ImageGrid::new(height, width, ch, data)
}
