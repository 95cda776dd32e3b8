//! sRGB to CIELAB (D65 white point).

use crate::grid::ImageGrid;

const WHITE_D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];

fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// `[L, a, b]` for an sRGB triple in `[0, 1]`. `L` spans `[0, 100]`.
pub fn srgb_to_lab(rgb: [f32; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|v| srgb_to_linear(v as f64));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let fx = lab_f(x / WHITE_D65[0]);
    let fy = lab_f(y / WHITE_D65[1]);
    let fz = lab_f(z / WHITE_D65[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Per-pixel Lab triples, row-major. Grayscale is treated as neutral gray.
pub fn image_to_lab(image: &ImageGrid) -> Vec<[f64; 3]> {
    let rgb = image.to_rgb();
    rgb.data()
        .chunks_exact(3)
        .map(|p| srgb_to_lab([p[0], p[1], p[2]]))
        .collect()
}

/// Lab packed into `[0, 1]` with one uniform scale (`1/255`) on all axes, so
/// Euclidean distances stay proportional to Lab distances.
pub fn image_to_packed_lab(image: &ImageGrid) -> ImageGrid {
    let data = image_to_lab(image)
        .into_iter()
        .flat_map(|[l, a, b]| {
            [
                (l / 255.0).clamp(0.0, 1.0) as f32,
                ((a + 128.0) / 255.0).clamp(0.0, 1.0) as f32,
                ((b + 128.0) / 255.0).clamp(0.0, 1.0) as f32,
            ]
        })
        .collect();
    ImageGrid::new(image.height(), image.width(), 3, data)
        .expect("packed Lab keeps the source geometry")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn reference_colors() {
        assert!(close(srgb_to_lab([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0], 1e-9));
        assert!(close(srgb_to_lab([1.0, 1.0, 1.0]), [100.0, 0.0, 0.0], 1e-2));
        // sRGB red under D65
        assert!(close(
            srgb_to_lab([1.0, 0.0, 0.0]),
            [53.24, 80.09, 67.20],
            5e-2
        ));
        assert!(close(
            srgb_to_lab([0.0, 0.0, 1.0]),
            [32.30, 79.19, -107.86],
            5e-2
        ));
    }
}
