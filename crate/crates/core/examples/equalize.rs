//! Exact histogram equalization of a PGM image.
//!
//! cargo run --example equalize -- [input.pgm] [output.pgm]
//!
//! Without arguments a synthetic scene is equalized and written to
//! `equalized.pgm`.

use ssimehs::image::{generate_target, histogram_of, TargetKind};
use ssimehs::io::{read_pgm, write_pgm};
use ssimehs::optimizer::{ascend, AscentConfig, DEFAULT_MU_PROBE};
use ssimehs::pattern::test_pattern;

fn main() -> ssimehs::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => read_pgm(path)?,
        None => test_pattern(256, 256, 256),
    };
    let output = args.next().unwrap_or_else(|| "equalized.pgm".into());

    let flat = generate_target(TargetKind::Uniform, img.levels(), img.len() as u64)?;
    let run = ascend(&img, &flat, &AscentConfig::new(DEFAULT_MU_PROBE).iterations(30))?;
    assert_eq!(histogram_of(&run.image), flat);

    println!("plain EHS   SSIM {:.4}", run.trace.records[0].ssim);
    println!(
        "after ascent SSIM {:.4} (iteration {})",
        run.trace.best_ssim, run.trace.best_iteration
    );
    write_pgm(&output, &run.image)?;
    println!("wrote {output}");
    Ok(())
}
