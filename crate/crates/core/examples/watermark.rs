//! Hide a bit string in the histogram of an image and read it back.

use ssimehs::image::histogram_of;
use ssimehs::optimizer::AscentConfig;
use ssimehs::pattern::test_pattern;
use ssimehs::watermark::{capacity, detect, embed, format_bits, parse_bits};

fn main() -> ssimehs::Result<()> {
    let message = std::env::args().nth(1).unwrap_or_else(|| "1011001110001011".into());
    let bits = parse_bits(&message)?;
    let host = test_pattern(128, 128, 256);
    println!("capacity {} bits", capacity(&histogram_of(&host)));

    let (spec, run) = embed(&host, &bits, &AscentConfig::new(67.0).iterations(40))?;
    println!("emptied bins {:?}", spec.hole_bins);
    println!(
        "SSIM to host: plain EHS {:.5}, optimized {:.5}",
        run.trace.records[0].ssim, run.trace.best_ssim
    );

    let read = detect(&histogram_of(&run.image), bits.len())?;
    println!("recovered {}", format_bits(&read));
    assert_eq!(read, bits);
    Ok(())
}
