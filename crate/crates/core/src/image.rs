//! Image and histogram types.
//!
//! [`GrayImage`] holds integer intensities in `[0, levels)`; [`RealImage`]
//! holds unbounded reals and is what the SSIM code and the optimizer work
//! on. Conversions go through the raw `[0, L-1]` intensity scale, with no
//! normalization, so step sizes tuned on 8-bit data carry over.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Row-major grayscale image with `levels` intensity levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, levels: usize, data: Vec<u16>) -> Result<Self> {
        if levels == 0 || levels > u16::MAX as usize + 1 {
            return Err(Error::InvalidImage(format!("unsupported level count {levels}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&d| d as usize >= levels) {
            return Err(Error::InvalidImage(format!("intensity {bad} outside [0, {levels})")));
        }
        Ok(Self {
            width,
            height,
            levels,
            data,
        })
    }

    /// Constant image filled with `value`.
    pub fn filled(width: usize, height: usize, levels: usize, value: u16) -> Result<Self> {
        Self::new(width, height, levels, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, levels: usize, mut f: impl FnMut(usize, usize) -> u16) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, levels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Pixel count M.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn to_real(&self) -> RealImage {
        RealImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&d| f64::from(d)).collect(),
        }
    }
}

/// Row-major real-valued image. Values must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RealImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("non-finite sample".into()));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Wraps a buffer produced internally; callers guarantee the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_size(&self, other: &RealImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self + scale * other`, element-wise.
    pub fn add_scaled(&self, other: &RealImage, scale: f64) -> Result<RealImage> {
        if !self.same_size(other) {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + scale * b).collect();
        Ok(Self::from_raw(self.width, self.height, data))
    }
}

/// Absolute histogram `{h_0, ..., h_{L-1}}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn zeros(levels: usize) -> Self {
        Self {
            counts: vec![0; levels],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Indices of the non-empty bins in ascending order.
    pub fn occupied(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn histogram_of(img: &GrayImage) -> Histogram {
    let mut counts = vec![0u64; img.levels()];
    for &d in img.data() {
        counts[d as usize] += 1;
    }
    Histogram::new(counts)
}

/// Scales `h` to sum to exactly `target_total`.
///
/// Largest-remainder apportionment: every bin gets the floor of its exact
/// quota, and the leftover units go to the largest fractional remainders,
/// lower bin index first on ties. Empty bins stay empty.
pub fn rescale_histogram(h: &Histogram, target_total: u64) -> Result<Histogram> {
    let sum: u128 = h.counts().iter().map(|&c| c as u128).sum();
    if sum == 0 {
        return Err(Error::EmptyHistogram);
    }
    if target_total == 0 {
        return Err(Error::InvalidParameter("target total must be positive".into()));
    }
    let target = target_total as u128;
    let mut out = Vec::with_capacity(h.levels());
    let mut remainders = Vec::with_capacity(h.levels());
    for (i, &c) in h.counts().iter().enumerate() {
        let scaled = c as u128 * target;
        out.push((scaled / sum) as u64);
        remainders.push((scaled % sum, i));
    }
    let assigned: u128 = out.iter().map(|&c| c as u128).sum();
    let leftover = (target - assigned) as usize;
    // Remainders share the denominator `sum`, so comparing numerators is exact.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(leftover) {
        out[i] += 1;
    }
    Ok(Histogram::new(out))
}

/// Shapes of target histogram the tools know how to build.
#[derive(Debug, Clone, Copy)]
pub enum TargetKind<'a> {
    /// Flat histogram; specifying it is exact histogram equalization.
    Uniform,
    /// Bin `i` weighted by `i + 1`.
    Linear,
    /// The histogram of another image.
    FromImage(&'a GrayImage),
}

pub fn generate_target(kind: TargetKind<'_>, levels: usize, total: u64) -> Result<Histogram> {
    let weights = match kind {
        TargetKind::Uniform => Histogram::new(vec![1; levels]),
        TargetKind::Linear => Histogram::new((1..=levels as u64).collect()),
        TargetKind::FromImage(src) => {
            if src.levels() != levels {
                return Err(Error::LevelMismatch {
                    histogram: src.levels(),
                    image: levels,
                });
            }
            histogram_of(src)
        }
    };
    rescale_histogram(&weights, total)
}

/// Number of distinct images with histogram `h`: the multinomial
/// `M! / (h_0! h_1! ... h_{L-1}!)`.
pub fn count_images_with_histogram(h: &Histogram) -> BigUint {
    // Product of binomials C(n_i, h_i) where n_i counts the pixels not yet
    // placed; each partial product stays an integer.
    let mut count = BigUint::one();
    let mut remaining: u64 = 0;
    for &c in h.counts() {
        for k in 1..=c {
            remaining += 1;
            count *= remaining;
            count /= k;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(c: &[u64]) -> Histogram {
        Histogram::new(c.to_vec())
    }

    #[test]
    fn histogram_counts_small_image() {
        let img = GrayImage::new(2, 2, 4, vec![0, 0, 1, 3]).unwrap();
        assert_eq!(histogram_of(&img).counts(), &[2, 1, 0, 1]);

        let zero = GrayImage::filled(3, 3, 256, 0).unwrap();
        let h = histogram_of(&zero);
        assert_eq!(h.counts()[0], 9);
        assert_eq!(h.total(), 9);
        assert!(h.counts()[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn gray_image_rejects_out_of_range() {
        assert!(GrayImage::new(2, 1, 4, vec![0, 4]).is_err());
        assert!(GrayImage::new(2, 2, 4, vec![0, 1, 2]).is_err());
        assert!(RealImage::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(
            rescale_histogram(&hist(&[1, 1, 1, 1]), 8).unwrap().counts(),
            &[2, 2, 2, 2]
        );
        assert_eq!(rescale_histogram(&hist(&[1, 2]), 4).unwrap().counts(), &[1, 3]);
        assert_eq!(rescale_histogram(&hist(&[3, 1]), 2).unwrap().counts(), &[2, 0]);
        assert!(matches!(
            rescale_histogram(&hist(&[0, 0]), 4),
            Err(Error::EmptyHistogram)
        ));
    }

    #[test]
    fn targets() {
        assert_eq!(
            generate_target(TargetKind::Uniform, 4, 8).unwrap().counts(),
            &[2, 2, 2, 2]
        );
        assert_eq!(generate_target(TargetKind::Linear, 3, 6).unwrap().counts(), &[1, 2, 3]);
        let src = GrayImage::from_fn(256, 256, 256, |x, y| ((x * 7 + y * 3) % 256) as u16).unwrap();
        let t = generate_target(TargetKind::FromImage(&src), 256, 65536).unwrap();
        assert_eq!(t.total(), 65536);
        assert_eq!(t, histogram_of(&src));
        assert!(generate_target(TargetKind::FromImage(&src), 16, 100).is_err());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_images_with_histogram(&hist(&[1, 1])), BigUint::from(2u32));
        assert_eq!(count_images_with_histogram(&hist(&[2, 1])), BigUint::from(3u32));
        assert_eq!(count_images_with_histogram(&hist(&[2, 2])), BigUint::from(6u32));
        assert_eq!(count_images_with_histogram(&hist(&[2, 1, 1])), BigUint::from(12u32));
        assert_eq!(count_images_with_histogram(&hist(&[0, 5, 0])), BigUint::from(1u32));
    }

    #[test]
    fn count_is_large_for_small_images() {
        // 64x64 with 16 pixels in each of 256 levels: far beyond u64.
        let h = Histogram::new(vec![16; 256]);
        let n = count_images_with_histogram(&h);
        assert!(n.bits() > 64);
    }

    proptest! {
        #[test]
        fn rescale_sums_exactly(
            counts in proptest::collection::vec(0u64..1000, 1..64),
            target in 1u64..100_000,
        ) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let h = Histogram::new(counts.clone());
            let out = rescale_histogram(&h, target).unwrap();
            prop_assert_eq!(out.total(), target);
            for (i, &c) in counts.iter().enumerate() {
                if c == 0 {
                    prop_assert_eq!(out.counts()[i], 0);
                }
            }
        }

        #[test]
        fn histogram_matches_independent_tally(
            data in proptest::collection::vec(0u16..16, 1..200),
        ) {
            let n = data.len();
            let img = GrayImage::new(n, 1, 16, data.clone()).unwrap();
            let h = histogram_of(&img);
            for level in 0..16u16 {
                let tally = data.iter().filter(|&&d| d == level).count() as u64;
                prop_assert_eq!(h.counts()[level as usize], tally);
            }
        }
    }
}
