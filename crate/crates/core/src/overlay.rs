use std::collections::HashMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, LabelMap};
use crate::metrics::boundary_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlayMode {
    /// Boundary pixels painted over the image.
    #[default]
    Boundary,
    /// Each superpixel filled with its mean color.
    MeanColor,
}

impl FromStr for OverlayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boundary" => Ok(OverlayMode::Boundary),
            "mean" => Ok(OverlayMode::MeanColor),
            other => Err(Error::invalid(format!("unknown overlay mode {other:?}"))),
        }
    }
}

/// RGB color from `r,g,b` bytes.
pub fn parse_color(s: &str) -> Result<[f32; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, g, b] = parts[..] else {
        return Err(Error::invalid(format!("color {s:?} is not r,g,b")));
    };
    let byte = |v: &str| {
        v.parse::<u8>()
            .map(|b| b as f32 / 255.0)
            .map_err(|_| Error::invalid(format!("bad color component {v:?}")))
    };
    Ok([byte(r)?, byte(g)?, byte(b)?])
}

pub const DEFAULT_BOUNDARY_COLOR: [f32; 3] = [1.0, 0.0, 0.0];

pub fn render_overlay(
    image: &ImageGrid,
    labels: &LabelMap,
    mode: OverlayMode,
    color: [f32; 3],
) -> Result<ImageGrid> {
    if image.dims() != labels.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            actual: labels.dims(),
        });
    }
    let (h, w) = image.dims();
    let ch = image.channels();
    match mode {
        OverlayMode::Boundary => {
            let edges = boundary_map(labels);
            if !edges.iter().any(|b| *b) {
                return Ok(image.clone());
            }
            let rgb = image.to_rgb();
            let mut data = rgb.data().to_vec();
            for (idx, _) in edges.iter().enumerate().filter(|(_, e)| **e) {
                data[idx * 3..idx * 3 + 3].copy_from_slice(&color);
            }
            ImageGrid::new(h, w, 3, data)
        }
        OverlayMode::MeanColor => {
            let mut sums: HashMap<u32, (Vec<f64>, usize)> = HashMap::new();
            for (idx, &l) in labels.labels().iter().enumerate() {
                let entry = sums.entry(l).or_insert_with(|| (vec![0.0; ch], 0));
                for (acc, v) in entry
                    .0
                    .iter_mut()
                    .zip(&image.data()[idx * ch..(idx + 1) * ch])
                {
                    *acc += *v as f64;
                }
                entry.1 += 1;
            }
            let means: HashMap<u32, Vec<f32>> = sums
                .into_iter()
                .map(|(l, (s, n))| (l, s.iter().map(|v| (v / n as f64) as f32).collect()))
                .collect();
            let data = labels
                .labels()
                .iter()
                .flat_map(|l| means[l].iter().copied())
                .collect();
            ImageGrid::new(h, w, ch, data)
        }
    }
}
