//! Step-size selection: the probe estimate, the grid search and a sweep.

use ssimehs::ehs::EhsVariant;
use ssimehs::image::{generate_target, TargetKind};
use ssimehs::optimizer::{ascend, auto_mu, estimate_mu0, mu_grid, AscentConfig, DEFAULT_MU_PROBE};
use ssimehs::pattern::test_pattern;
use ssimehs::ssim::SsimParams;

fn main() -> ssimehs::Result<()> {
    let img = test_pattern(160, 160, 256);
    let target = generate_target(TargetKind::Linear, 256, img.len() as u64)?;

    match estimate_mu0(
        &img,
        &target,
        DEFAULT_MU_PROBE,
        EhsVariant::Classic,
        &SsimParams::default(),
    ) {
        Ok(e) => println!(
            "probe: p={:.3e} q={:.3} ssim_init={:.4} -> mu0={:.2}",
            e.p, e.q, e.ssim_init, e.mu0
        ),
        Err(e) => println!("probe rejected: {e}"),
    }

    let base = AscentConfig::new(DEFAULT_MU_PROBE).iterations(12).plateau(0.0);
    let choice = auto_mu(&img, &target, DEFAULT_MU_PROBE, 8, &base)?;
    println!("selected mu {:.2}", choice.mu);

    println!("mu, SSIM after 12 iterations");
    let centre = choice.estimate.map_or(DEFAULT_MU_PROBE, |e| e.mu0);
    for mu in mu_grid(centre * 3.0, 10) {
        let run = ascend(&img, &target, &AscentConfig { mu, ..base.clone() })?;
        println!("{mu:8.2}, {:.4}", run.trace.best_ssim);
    }
    Ok(())
}
