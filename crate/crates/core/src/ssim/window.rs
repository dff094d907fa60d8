//! Gaussian window and the separable filtering used by SSIM.
//!
//! Borders are extended symmetrically (half-sample reflection:
//! `x[-1] = x[0]`, `x[-2] = x[1]`, ...), so every output has the size of
//! its input.

use crate::error::{Error, Result};

/// Normalized, separable Gaussian window.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    taps: Vec<f64>,
}

impl Window {
    pub fn size(&self) -> usize {
        self.taps.len()
    }

    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    /// 1-D taps; the 2-D weight is `taps[i] * taps[j]`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.taps[i] * self.taps[j]
    }

    /// Row-major `size x size` kernel.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.size())
            .map(|i| (0..self.size()).map(|j| self.weight(i, j)).collect())
            .collect()
    }
}

pub fn gaussian_window(size: usize, sigma: f64) -> Result<Window> {
    if size.is_multiple_of(2) || !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidWindow { size, sigma });
    }
    let r = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    Ok(Window {
        taps: raw.iter().map(|v| v / sum).collect(),
    })
}

/// Half-sample symmetric reflection of `i` into `[0, n)`. Requires
/// `-n <= i < 2n`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - i - 1
    } else {
        i
    };
    debug_assert!((0..n).contains(&j));
    j as usize
}

#[cfg(test)]
thread_local! {
    pub(crate) static FILTER_CALLS: std::cell::Cell<usize> = const { std::cell::Cell::new(0) };
}

#[inline]
fn count_call() {
    #[cfg(test)]
    FILTER_CALLS.with(|c| c.set(c.get() + 1));
}

/// Vertical taps for each output row as `(source row, weight)`. The adjoint
/// plan is the transpose of the forward one.
fn vertical_plan(height: usize, win: &Window, adjoint: bool) -> Vec<Vec<(usize, f64)>> {
    let r = win.radius() as isize;
    let mut plan = vec![Vec::with_capacity(win.size()); height];
    for y in 0..height {
        for (k, &t) in win.taps().iter().enumerate() {
            let sy = reflect(y as isize + k as isize - r, height);
            if adjoint {
                plan[sy].push((y, t));
            } else {
                plan[y].push((sy, t));
            }
        }
    }
    plan
}

/// Window filtering of `width x height` images with reusable buffers.
///
/// Each output row reads source rows within the window radius, so a ring
/// of `size` row results replaces a full intermediate image.
pub(crate) struct Filter {
    win: Window,
    width: usize,
    forward: Vec<Vec<(usize, f64)>>,
    adjoint: Vec<Vec<(usize, f64)>>,
    ring: Vec<f64>,
    tags: Vec<usize>,
    padded: Vec<f64>,
    product: Vec<f64>,
}

impl Filter {
    pub(crate) fn new(win: &Window, width: usize, height: usize) -> Self {
        Self {
            win: win.clone(),
            width,
            forward: vertical_plan(height, win, false),
            adjoint: vertical_plan(height, win, true),
            ring: vec![0.0; win.size() * width],
            tags: vec![usize::MAX; win.size()],
            padded: vec![0.0; width + 2 * win.radius()],
            product: vec![0.0; width],
        }
    }

    /// `dst = W src`.
    pub(crate) fn apply(&mut self, src: &[f64], dst: &mut [f64]) {
        self.run(false, dst, |sy, w, row| row.copy_from_slice(&src[sy * w..(sy + 1) * w]));
    }

    /// `dst = W (a ⊙ b)` without materializing the product image.
    pub(crate) fn apply_product(&mut self, a: &[f64], b: &[f64], dst: &mut [f64]) {
        self.run(false, dst, |sy, w, row| {
            let (a, b) = (&a[sy * w..(sy + 1) * w], &b[sy * w..(sy + 1) * w]);
            for ((o, p), q) in row.iter_mut().zip(a).zip(b) {
                *o = p * q;
            }
        });
    }

    /// `dst = Wᵀ src`: `<W a, b> == <a, Wᵀ b>`.
    ///
    /// Away from the borders this is the same filtering; near them the
    /// reflected taps are folded back onto the pixels they were read from.
    pub(crate) fn apply_adjoint(&mut self, src: &[f64], dst: &mut [f64]) {
        self.run(true, dst, |sy, w, row| row.copy_from_slice(&src[sy * w..(sy + 1) * w]));
    }

    /// Row pass on each source row (loaded by `load`), then the column pass
    /// from the ring. The two axes commute, so the adjoint can also run
    /// rows first.
    fn run(&mut self, adjoint: bool, dst: &mut [f64], mut load: impl FnMut(usize, usize, &mut [f64])) {
        count_call();
        let w = self.width;
        let n = self.win.size();
        let r = self.win.radius() as isize;
        let taps = self.win.taps();
        let plan = if adjoint { &self.adjoint } else { &self.forward };
        self.tags.iter_mut().for_each(|t| *t = usize::MAX);
        for (out, column) in dst.chunks_exact_mut(w).zip(plan) {
            out.iter_mut().for_each(|v| *v = 0.0);
            for &(sy, t) in column {
                let slot = sy % n;
                let row = &mut self.ring[slot * w..(slot + 1) * w];
                if self.tags[slot] != sy {
                    load(sy, w, &mut self.product);
                    if adjoint {
                        self.padded.iter_mut().for_each(|v| *v = 0.0);
                        for (x, &g) in self.product.iter().enumerate() {
                            for (k, &tk) in taps.iter().enumerate() {
                                self.padded[x + k] += tk * g;
                            }
                        }
                        row.iter_mut().for_each(|v| *v = 0.0);
                        for (p, &v) in self.padded.iter().enumerate() {
                            row[reflect(p as isize - r, w)] += v;
                        }
                    } else {
                        for (p, slot) in self.padded.iter_mut().enumerate() {
                            *slot = self.product[reflect(p as isize - r, w)];
                        }
                        for (x, o) in row.iter_mut().enumerate() {
                            *o = taps.iter().zip(&self.padded[x..x + n]).map(|(t, v)| t * v).sum();
                        }
                    }
                    self.tags[slot] = sy;
                }
                for (o, v) in out.iter_mut().zip(row.iter()) {
                    *o += t * v;
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) fn filter(src: &[f64], width: usize, height: usize, win: &Window) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    Filter::new(win, width, height).apply(src, &mut dst);
    dst
}

#[cfg(test)]
pub(crate) fn filter_adjoint(src: &[f64], width: usize, height: usize, win: &Window) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    Filter::new(win, width, height).apply_adjoint(src, &mut dst);
    dst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_window() {
        let w = gaussian_window(1, 0.7).unwrap();
        assert_eq!(w.to_matrix(), vec![vec![1.0]]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn window_is_normalized_and_symmetric() {
        let w = gaussian_window(11, 1.5).unwrap();
        let m = w.to_matrix();
        let sum: f64 = m.iter().flatten().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..11 {
            for j in 0..11 {
                assert_eq!(m[i][j], m[j][i]);
                assert_eq!(m[i][j], m[10 - i][j]);
                assert!(m[i][j] >= 0.0);
            }
        }
    }

    #[test]
    fn bad_windows() {
        assert!(gaussian_window(10, 1.5).is_err());
        assert!(gaussian_window(11, 0.0).is_err());
        assert!(gaussian_window(11, -1.0).is_err());
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(3, 5), 3);
    }

    #[test]
    fn filter_matches_direct_sum() {
        let (w, h) = (13, 12);
        let win = gaussian_window(5, 1.1).unwrap();
        let src: Vec<f64> = (0..w * h).map(|i| ((i * 37) % 23) as f64).collect();
        let out = filter(&src, w, h, &win);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for i in 0..5 {
                    for j in 0..5 {
                        let sy = reflect(y as isize + i as isize - 2, h);
                        let sx = reflect(x as isize + j as isize - 2, w);
                        s += win.weight(i, j) * src[sy * w + sx];
                    }
                }
                assert!((s - out[y * w + x]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_identity() {
        let (w, h) = (14, 11);
        let win = gaussian_window(11, 1.5).unwrap();
        let a: Vec<f64> = (0..w * h).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let b: Vec<f64> = (0..w * h).map(|i| ((i * 7) % 13) as f64 * 0.5).collect();
        let fa = filter(&a, w, h, &win);
        let atb = filter_adjoint(&b, w, h, &win);
        let lhs: f64 = fa.iter().zip(&b).map(|(x, y)| x * y).sum();
        let rhs: f64 = a.iter().zip(&atb).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }
}
