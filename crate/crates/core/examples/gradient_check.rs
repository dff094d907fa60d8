//! Compare the closed-form SSIM gradient with central differences.

use ssimehs::pattern::test_pattern;
use ssimehs::ssim::{ssim_index, ssim_with_gradient, SsimParams};
use ssimehs::RealImage;

fn main() -> ssimehs::Result<()> {
    let (w, h) = (20, 16);
    let x = test_pattern(w, h, 256).to_real();
    let y = RealImage::from_fn(w, h, |i, j| x.get(i, j) * 0.8 + ((i * 7 + j * 3) % 11) as f64)?;
    let p = SsimParams::default();

    let (s, grad) = ssim_with_gradient(&x, &y, &p)?;
    println!("SSIM {s:.6}");

    let step = 1e-3;
    let mut worst: f64 = 0.0;
    for (k, &g) in grad.data().iter().enumerate() {
        let nudge = |d: f64| {
            let mut v = y.data().to_vec();
            v[k] += d;
            ssim_index(&x, &RealImage::new(w, h, v).unwrap(), &p).unwrap()
        };
        let fd = (nudge(step) - nudge(-step)) / (2.0 * step);
        worst = worst.max((fd - g).abs() / g.abs().max(1e-12));
    }
    println!("max relative error over {} pixels: {worst:.2e}", w * h);
    Ok(())
}
