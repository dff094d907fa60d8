//! Give one image the histogram of another and print the SSIM per iteration.
//!
//! cargo run --example specify_histogram -- [input.pgm reference.pgm]

use ssimehs::image::{generate_target, GrayImage, TargetKind};
use ssimehs::io::{read_pgm, trace_to_csv};
use ssimehs::optimizer::{ascend, AscentConfig};
use ssimehs::pattern::test_pattern;

fn main() -> ssimehs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (img, reference) = match args.as_slice() {
        [a, b] => (read_pgm(a)?, read_pgm(b)?),
        _ => {
            // A dark, low-contrast copy of the scene lends its histogram.
            let scene = test_pattern(128, 128, 256);
            let dim = GrayImage::from_fn(128, 128, 256, |x, y| scene.get(y, x) / 3 + 20)?;
            (scene, dim)
        }
    };

    let target = generate_target(TargetKind::FromImage(&reference), img.levels(), img.len() as u64)?;
    let cfg = AscentConfig::new(67.0).iterations(40).plateau(0.0);
    let run = ascend(&img, &target, &cfg)?;
    print!("{}", trace_to_csv(&run.trace));
    eprintln!(
        "best SSIM {:.4} at iteration {}",
        run.trace.best_ssim, run.trace.best_iteration
    );
    Ok(())
}
