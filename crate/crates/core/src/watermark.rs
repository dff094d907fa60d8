//! Histogram watermarking with empty bins.
//!
//! A message bit `k` is carried by the `(2k+1)`-th occupied bin of the
//! host histogram (0-based, ascending): a `1` empties that bin by moving
//! its pixels into the occupied bin just below it, a `0` leaves it alone.
//! The marked image is produced by the SSIM-optimized EHS, so the hole
//! pattern is exact.
//!
//! Detection is blind: it only needs the marked histogram. Counting from
//! the lowest occupied bin `lo`, bit `k` is read from bin `lo + 2k + 1`.
//! This lines up with the occupied-bin numbering as long as the host has
//! no empty bins in the stretch that carries the message, which is what
//! [`capacity`] measures.

use crate::error::{Error, Result};
use crate::image::{histogram_of, GrayImage, Histogram};
use crate::optimizer::{ascend, Ascent, AscentConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkSpec {
    pub message: Vec<bool>,
    /// Bins emptied in the embedded target, ascending.
    pub hole_bins: Vec<usize>,
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Watermark(format!("invalid bit {other:?} in message"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Length of the run of occupied bins starting at the lowest occupied one.
fn leading_run(h: &Histogram) -> Option<(usize, usize)> {
    let counts = h.counts();
    let lo = counts.iter().position(|&c| c > 0)?;
    let run = counts[lo..].iter().take_while(|&&c| c > 0).count();
    Some((lo, run))
}

/// Number of bits `h` can carry.
pub fn capacity(h: &Histogram) -> usize {
    leading_run(h).map_or(0, |(_, run)| run / 2)
}

/// Builds the hole histogram for `message`.
pub fn plan(host: &Histogram, message: &[bool]) -> Result<(WatermarkSpec, Histogram)> {
    let cap = capacity(host);
    if message.len() > cap {
        return Err(Error::Watermark(format!(
            "message of {} bits exceeds capacity of {cap}",
            message.len()
        )));
    }
    let occupied = host.occupied();
    let mut target = host.clone();
    let mut hole_bins = Vec::new();
    for (k, &bit) in message.iter().enumerate() {
        if !bit {
            continue;
        }
        let (anchor, hole) = (occupied[2 * k], occupied[2 * k + 1]);
        let moved = target.counts()[hole];
        target.counts_mut()[anchor] += moved;
        target.counts_mut()[hole] = 0;
        hole_bins.push(hole);
    }
    Ok((
        WatermarkSpec {
            message: message.to_vec(),
            hole_bins,
        },
        target,
    ))
}

/// Embeds `message` into `host` and returns the optimized result.
pub fn embed(host: &GrayImage, message: &[bool], cfg: &AscentConfig) -> Result<(WatermarkSpec, Ascent)> {
    let (spec, target) = plan(&histogram_of(host), message)?;
    let run = ascend(host, &target, cfg)?;
    Ok((spec, run))
}

/// Reads `bits` message bits from a marked histogram.
pub fn detect(h: &Histogram, bits: usize) -> Result<Vec<bool>> {
    let counts = h.counts();
    let Some((lo, _)) = leading_run(h) else {
        return Err(Error::Watermark("empty histogram carries no message".into()));
    };
    (0..bits)
        .map(|k| {
            let anchor = lo + 2 * k;
            let slot = anchor + 1;
            if slot >= counts.len() || counts[anchor] == 0 {
                return Err(Error::Watermark(format!(
                    "no watermark signal at bit {k}: anchor bin {anchor} is empty or out of range"
                )));
            }
            Ok(counts[slot] == 0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host() -> Histogram {
        // Occupied run 2..=9, then a gap, then more.
        let mut c = vec![0u64; 16];
        for (i, v) in c.iter_mut().enumerate().take(10).skip(2) {
            *v = i as u64;
        }
        c[12] = 5;
        Histogram::new(c)
    }

    #[test]
    fn bits_parse() {
        assert_eq!(parse_bits("1010").unwrap(), vec![true, false, true, false]);
        assert!(parse_bits("10x").is_err());
        assert_eq!(format_bits(&[true, false]), "10");
        assert_eq!(parse_bits("").unwrap(), Vec::<bool>::new());
    }

    #[test]
    fn capacity_counts_leading_run() {
        assert_eq!(capacity(&host()), 4);
        assert_eq!(capacity(&Histogram::new(vec![0, 3, 0])), 0);
        assert_eq!(capacity(&Histogram::zeros(4)), 0);
    }

    #[test]
    fn plan_moves_counts_down() {
        let h = host();
        let (spec, t) = plan(&h, &[true, false, true]).unwrap();
        assert_eq!(spec.hole_bins, vec![3, 7]);
        assert_eq!(t.counts()[2], 2 + 3);
        assert_eq!(t.counts()[3], 0);
        assert_eq!(t.counts()[6], 6 + 7);
        assert_eq!(t.counts()[7], 0);
        assert_eq!(t.total(), h.total());
        assert_eq!(detect(&t, 3).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn too_long_and_no_signal() {
        assert!(plan(&host(), &[false; 5]).is_err());
        assert!(detect(&Histogram::zeros(8), 1).is_err());
        // Anchor bin empty.
        assert!(detect(&Histogram::new(vec![4, 1, 0, 0, 2]), 2).is_err());
        // Runs off the top of the range.
        assert!(detect(&Histogram::new(vec![0, 0, 3]), 1).is_err());
    }

    #[test]
    fn empty_message_is_identity() {
        let img = crate::pattern::test_pattern(24, 24, 256);
        let (spec, run) = embed(&img, &[], &AscentConfig::new(67.0).iterations(10)).unwrap();
        assert!(spec.hole_bins.is_empty());
        assert_eq!(run.image, img);
    }
}
