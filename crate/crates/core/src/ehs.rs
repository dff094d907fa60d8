//! Exact histogram specification.
//!
//! Both variants sort the pixels in ascending key order and then deal them
//! out to the target bins: the first `h_0` pixels get intensity 0, the next
//! `h_1` get intensity 1, and so on. The classic variant keys on intensity
//! alone; the strict-ordering variant breaks intensity ties with the means
//! of six nested square neighborhoods. Remaining ties fall back to raster
//! order, which makes the output fully deterministic.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::image::{GrayImage, Histogram, RealImage};

/// Number of nested neighborhoods used by the strict-ordering keys.
pub const AUX_KEYS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EhsVariant {
    #[default]
    Classic,
    StrictOrdering,
}

/// Sort key of one pixel: `(primary, aux..., raster index)`, compared
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelKey {
    pub primary: f64,
    pub aux: Vec<f64>,
    pub index: usize,
}

impl PixelKey {
    /// Total order over keys. Keys of one image all carry the same number
    /// of auxiliary values.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then_with(|| cmp_aux(&self.aux, &other.aux))
            .then(self.index.cmp(&other.index))
    }
}

fn cmp_aux(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone)]
pub struct EhsReport {
    pub output: GrayImage,
    /// Pixels whose key matched another pixel's on every component except
    /// the raster index.
    pub unresolved_ties: usize,
}

fn check_target(pixels: usize, h: &Histogram) -> Result<()> {
    let total = h.total();
    if total != pixels as u64 {
        return Err(Error::HistogramMismatch {
            histogram: total,
            pixels: pixels as u64,
        });
    }
    if h.levels() == 0 || h.levels() > u16::MAX as usize + 1 {
        return Err(Error::InvalidParameter(format!(
            "unsupported level count {}",
            h.levels()
        )));
    }
    Ok(())
}

/// Deals the pixels listed in `order` out to the bins of `h`.
fn fill_bins(width: usize, height: usize, order: &[u32], h: &Histogram) -> Result<GrayImage> {
    let mut data = vec![0u16; order.len()];
    let mut pos = 0usize;
    for (level, &count) in h.counts().iter().enumerate() {
        let end = pos + count as usize;
        for &p in &order[pos..end] {
            data[p as usize] = level as u16;
        }
        pos = end;
    }
    GrayImage::new(width, height, h.levels(), data)
}

/// Maps `f64` to `u64` so that integer order equals `f64::total_cmp` order.
fn ordered_bits(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Counts pixels that belong to a run of at least two equal keys in the
/// sorted order. `same_as_prev(w)` compares sorted positions `w - 1` and `w`.
fn count_ties(n: usize, same_as_prev: impl Fn(usize) -> bool) -> usize {
    let mut ties = 0;
    let mut run = 1;
    for w in 1..=n {
        if w < n && same_as_prev(w) {
            run += 1;
            continue;
        }
        if run > 1 {
            ties += run;
        }
        run = 1;
    }
    ties
}

/// Classic EHS: pixels ordered by value, then raster index.
///
/// Accepts real input so the optimizer can re-project its unquantized
/// iterate.
pub fn classic_ehs(x: &RealImage, h: &Histogram) -> Result<EhsReport> {
    check_target(x.len(), h)?;
    let v = x.data();
    // Value and raster index packed into one integer; the order matches
    // `(f64::total_cmp, index)` and every key is distinct.
    let mut keyed: Vec<u128> = v
        .iter()
        .enumerate()
        .map(|(i, &p)| (u128::from(ordered_bits(p)) << 32) | i as u128)
        .collect();
    keyed.sort_unstable();
    let order: Vec<u32> = keyed.iter().map(|&k| k as u32).collect();
    let unresolved_ties = count_ties(keyed.len(), |w| keyed[w - 1] >> 32 == keyed[w] >> 32);
    let output = fill_bins(x.width(), x.height(), &order, h)?;
    Ok(EhsReport {
        output,
        unresolved_ties,
    })
}

/// Auxiliary keys: for `j = 1..=6`, the mean over the `(2j+1)x(2j+1)`
/// square centered on each pixel, with replicated borders.
///
/// Returned as one `[f64; 6]` per pixel in raster order. Every window sum
/// is accumulated in the same order, so pixels with identical
/// neighborhoods get bit-identical means.
pub fn neighborhood_means(x: &RealImage) -> Vec<[f64; AUX_KEYS]> {
    let (w, h) = (x.width(), x.height());
    let src = x.data();
    let mut out = vec![[0.0; AUX_KEYS]; w * h];
    let mut rows = vec![0.0; w * h];
    for j in 1..=AUX_KEYS {
        let r = j as isize;
        let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            for xx in 0..w {
                let mut s = 0.0;
                for k in -r..=r {
                    s += row[clamp(xx as isize + k, w)];
                }
                rows[y * w + xx] = s;
            }
        }
        let area = ((2 * j + 1) * (2 * j + 1)) as f64;
        for y in 0..h {
            for xx in 0..w {
                let mut s = 0.0;
                for k in -r..=r {
                    s += rows[clamp(y as isize + k, h) * w + xx];
                }
                out[y * w + xx][j - 1] = s / area;
            }
        }
    }
    out
}

/// Full strict-ordering keys of an integer image.
pub fn coltuc_keys(img: &GrayImage) -> Vec<PixelKey> {
    let real = img.to_real();
    neighborhood_means(&real)
        .into_iter()
        .zip(real.data())
        .enumerate()
        .map(|(index, (aux, &primary))| PixelKey {
            primary,
            aux: aux.to_vec(),
            index,
        })
        .collect()
}

/// Strict-ordering EHS on a real-valued image.
pub fn strict_ordering_ehs_real(x: &RealImage, h: &Histogram) -> Result<EhsReport> {
    check_target(x.len(), h)?;
    let v = x.data();
    let aux = neighborhood_means(x);
    let same = |a: usize, b: usize| v[a].total_cmp(&v[b]).is_eq() && cmp_aux(&aux[a], &aux[b]).is_eq();
    let mut order: Vec<u32> = (0..x.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        v[a].total_cmp(&v[b])
            .then_with(|| cmp_aux(&aux[a], &aux[b]))
            .then(a.cmp(&b))
    });
    let unresolved_ties = count_ties(order.len(), |w| same(order[w - 1] as usize, order[w] as usize));
    let output = fill_bins(x.width(), x.height(), &order, h)?;
    Ok(EhsReport {
        output,
        unresolved_ties,
    })
}

pub fn strict_ordering_ehs(img: &GrayImage, h: &Histogram) -> Result<EhsReport> {
    strict_ordering_ehs_real(&img.to_real(), h)
}

/// Dispatches to the requested variant.
pub fn specify(x: &RealImage, h: &Histogram, variant: EhsVariant) -> Result<EhsReport> {
    match variant {
        EhsVariant::Classic => classic_ehs(x, h),
        EhsVariant::StrictOrdering => strict_ordering_ehs_real(x, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::histogram_of;
    use proptest::prelude::*;

    fn real(w: usize, h: usize, v: &[f64]) -> RealImage {
        RealImage::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn classic_hand_trace() {
        let x = real(4, 1, &[1.0, 0.0, 3.0, 0.0]);
        let r = classic_ehs(&x, &Histogram::new(vec![1, 1, 1, 1])).unwrap();
        assert_eq!(r.output.data(), &[2, 0, 3, 1]);
        assert_eq!(r.unresolved_ties, 2);
    }

    #[test]
    fn classic_single_bin() {
        let x = real(3, 2, &[5.0; 6]);
        let r = classic_ehs(&x, &Histogram::new(vec![0, 0, 6, 0])).unwrap();
        assert!(r.output.data().iter().all(|&d| d == 2));
    }

    #[test]
    fn classic_rank_preserving() {
        let x = real(3, 1, &[0.1, 0.5, 0.9]);
        let r = classic_ehs(&x, &Histogram::new(vec![1, 1, 1])).unwrap();
        assert_eq!(r.output.data(), &[0, 1, 2]);
        assert_eq!(r.output.levels(), 3);
        assert_eq!(r.unresolved_ties, 0);
    }

    #[test]
    fn mismatched_histogram_is_rejected() {
        let x = real(2, 2, &[0.0; 4]);
        assert!(matches!(
            classic_ehs(&x, &Histogram::new(vec![1, 1])),
            Err(Error::HistogramMismatch {
                histogram: 2,
                pixels: 4
            })
        ));
        let g = GrayImage::filled(2, 2, 4, 0).unwrap();
        assert!(strict_ordering_ehs(&g, &Histogram::new(vec![5, 0, 0, 0])).is_err());
    }

    #[test]
    fn constant_image_keys_all_tie() {
        let g = GrayImage::filled(5, 4, 16, 7).unwrap();
        let keys = coltuc_keys(&g);
        for k in &keys {
            assert_eq!(k.primary, 7.0);
            assert!(k.aux.iter().all(|&a| a == 7.0));
        }
        let g = GrayImage::filled(2, 2, 4, 3).unwrap();
        let r = strict_ordering_ehs(&g, &Histogram::new(vec![1, 1, 1, 1])).unwrap();
        assert_eq!(r.output.data(), &[0, 1, 2, 3]);
        assert_eq!(r.unresolved_ties, 4);
    }

    #[test]
    fn isolated_bright_pixel_has_larger_means() {
        let g = GrayImage::from_fn(31, 31, 256, |x, y| if (x, y) == (15, 15) { 200 } else { 0 }).unwrap();
        let keys = coltuc_keys(&g);
        let center = &keys[15 * 31 + 15];
        let far = &keys[0];
        for j in 0..AUX_KEYS {
            assert!(center.aux[j] > far.aux[j]);
        }
    }

    #[test]
    fn center_mean_of_3x3() {
        let g = GrayImage::from_fn(3, 3, 16, |x, y| if (x, y) == (1, 1) { 9 } else { 0 }).unwrap();
        let keys = coltuc_keys(&g);
        assert!((keys[4].aux[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn strict_matches_classic_on_distinct_values() {
        let g = GrayImage::new(4, 2, 8, vec![3, 0, 7, 5, 1, 6, 2, 4]).unwrap();
        let h = Histogram::new(vec![2, 0, 2, 0, 2, 0, 2, 0]);
        let a = classic_ehs(&g.to_real(), &h).unwrap();
        let b = strict_ordering_ehs(&g, &h).unwrap();
        assert_eq!(a.output, b.output);
        assert_eq!(b.unresolved_ties, 0);
    }

    #[test]
    fn strict_breaks_ties_by_neighborhood() {
        // Two pixels of value 5: one in a dark area, one in a bright area.
        let g = GrayImage::from_fn(12, 1, 16, |x, _| match x {
            2 => 5,
            9 => 5,
            x if x < 6 => 0,
            _ => 15,
        })
        .unwrap();
        let mut counts = histogram_of(&g).counts().to_vec();
        counts[5] = 1;
        counts[6] = 1;
        let r = strict_ordering_ehs(&g, &Histogram::new(counts)).unwrap();
        assert_eq!(r.output.get(2, 0), 5);
        assert_eq!(r.output.get(9, 0), 6);
    }

    #[test]
    fn packed_order_matches_total_cmp() {
        let vals = [-f64::INFINITY, -3.5, -0.0, 0.0, 1e-300, 2.0, 255.5, f64::INFINITY];
        for a in vals {
            for b in vals {
                assert_eq!(ordered_bits(a).cmp(&ordered_bits(b)), a.total_cmp(&b), "{a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn output_has_target_histogram(
            w in 1usize..20,
            h in 1usize..20,
            seed in any::<u64>(),
            levels in prop::sample::select(vec![4usize, 16, 256]),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = w * h;
            let img = GrayImage::from_fn(w, h, levels, |_, _| rng.gen_range(0..levels) as u16).unwrap();
            let weights = Histogram::new((0..levels).map(|_| rng.gen_range(0..5)).chain([1]).take(levels).collect());
            prop_assume!(weights.total() > 0);
            let target = crate::image::rescale_histogram(&weights, m as u64).unwrap();
            let a = classic_ehs(&img.to_real(), &target).unwrap();
            let b = strict_ordering_ehs(&img, &target).unwrap();
            prop_assert_eq!(histogram_of(&a.output), target.clone());
            prop_assert_eq!(histogram_of(&b.output), target);
        }

        #[test]
        fn classic_is_idempotent_on_own_histogram(
            data in proptest::collection::vec(0u16..16, 1..120),
        ) {
            let img = GrayImage::new(data.len(), 1, 16, data).unwrap();
            let r = classic_ehs(&img.to_real(), &histogram_of(&img)).unwrap();
            prop_assert_eq!(r.output, img);
        }

        #[test]
        fn output_is_monotone_in_key(
            data in proptest::collection::vec(0u16..8, 4..60),
            weights in proptest::collection::vec(0u64..4, 8),
        ) {
            prop_assume!(weights.iter().any(|&c| c > 0));
            let n = data.len();
            let img = GrayImage::new(n, 1, 8, data).unwrap();
            let target = crate::image::rescale_histogram(&Histogram::new(weights), n as u64).unwrap();
            let r = strict_ordering_ehs(&img, &target).unwrap();
            let keys = coltuc_keys(&img);
            for p in 0..n {
                for q in 0..n {
                    if keys[p].cmp_key(&keys[q]).is_lt() {
                        prop_assert!(r.output.data()[p] <= r.output.data()[q]);
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let g = GrayImage::from_fn(17, 13, 16, |x, y| ((x * y) % 5) as u16).unwrap();
        let h = crate::image::generate_target(crate::image::TargetKind::Uniform, 16, 17 * 13).unwrap();
        let a = strict_ordering_ehs(&g, &h).unwrap();
        let b = strict_ordering_ehs(&g, &h).unwrap();
        assert_eq!(a.output, b.output);
        assert_eq!(a.unresolved_ties, b.unresolved_ties);
    }
}
