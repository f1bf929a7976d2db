//! Small spatial filters on single-channel planes.

/// Separable Gaussian blur; taps falling outside the image are dropped and the
/// remaining weights renormalised, so constant planes are preserved exactly
/// up to rounding.
pub fn gaussian_blur(plane: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    assert_eq!(plane.len(), width * height);
    if sigma <= 0.0 {
        return plane.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();

    let pass = |src: &[f64], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut dst = vec![0.0; src.len()];
        for l in 0..lines {
            let base = l * line_stride;
            for i in 0..len as isize {
                let (mut acc, mut norm) = (0.0, 0.0);
                for (k, w) in taps.iter().enumerate() {
                    let j = i + k as isize - radius;
                    if j >= 0 && j < len as isize {
                        acc += w * src[base + j as usize * stride];
                        norm += w;
                    }
                }
                dst[base + i as usize * stride] = acc / norm;
            }
        }
        dst
    };
    let horizontal = pass(plane, width, 1, height, width);
    pass(&horizontal, height, width, width, 1)
}
