//! A piecewise-smooth test scene: gradient background, rectangles, and discs.
//!
//! Loosely arranged like the classic photographer scene (dark figure, tripod,
//! bright sky) so the harness can run without external images.

use crate::spectral::ImageGrid;

/// `size × size` pseudo-cameraman with intensities in [0, 1].
pub fn pseudo_cameraman(size: usize) -> ImageGrid {
    let n = size.max(1) as f64;
    let mut pixels = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let (y, x) = ((r as f64 + 0.5) / n, (c as f64 + 0.5) / n);
            // Sky brightening toward the top, darker ground below the horizon.
            let mut v = if y < 0.62 { 0.78 - 0.25 * y } else { 0.42 + 0.18 * (y - 0.62) };
            // Distant building.
            if (0.68..0.86).contains(&x) && (0.40..0.62).contains(&y) {
                v = 0.62;
            }
            // Coat: a tall dark block with a rounded head above it.
            if (0.28..0.52).contains(&x) && (0.34..0.92).contains(&y) {
                v = 0.10 + 0.06 * (x - 0.28);
            }
            if disc(x, y, 0.40, 0.25, 0.085) {
                v = 0.18;
            }
            // Camera on the tripod.
            if (0.52..0.64).contains(&x) && (0.30..0.38).contains(&y) {
                v = 0.05;
            }
            if disc(x, y, 0.63, 0.34, 0.025) {
                v = 0.85;
            }
            // Tripod legs.
            for (x0, x1) in [(0.58, 0.50), (0.58, 0.66), (0.58, 0.58)] {
                if y > 0.38 && y < 0.96 {
                    let t = (y - 0.38) / 0.58;
                    let xl = x0 + t * (x1 - x0);
                    if (x - xl).abs() < 0.008 {
                        v = 0.08;
                    }
                }
            }
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    ImageGrid::new(size.max(1), size.max(1), pixels).expect("square buffer")
}

fn disc(x: f64, y: f64, cx: f64, cy: f64, radius: f64) -> bool {
    (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_range_and_not_flat() {
        let img = pseudo_cameraman(64);
        assert_eq!(img.shape(), (64, 64));
        let (lo, hi) = img.pixels().iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(lo >= 0.0 && hi <= 1.0);
        assert!(hi - lo > 0.5);
    }

    #[test]
    fn deterministic() {
        assert_eq!(pseudo_cameraman(32), pseudo_cameraman(32));
    }
}
