//! How many images share a histogram.

use ssimehs::image::{count_images_with_histogram, generate_target, histogram_of, TargetKind};
use ssimehs::pattern::test_pattern;
use ssimehs::Histogram;

fn main() -> ssimehs::Result<()> {
    let tiny = Histogram::new(vec![2, 1, 1]);
    println!(
        "2x2 image, counts {:?}: {}",
        tiny.counts(),
        count_images_with_histogram(&tiny)
    );

    for side in [8usize, 16, 64] {
        let img = test_pattern(side, side, 256);
        let own = count_images_with_histogram(&histogram_of(&img));
        let flat = count_images_with_histogram(&generate_target(TargetKind::Uniform, 256, img.len() as u64)?);
        println!(
            "{side}x{side}: {} decimal digits for its own histogram, {} for a flat one",
            own.to_string().len(),
            flat.to_string().len()
        );
    }
    Ok(())
}
