//! Windowed SSIM and its closed-form gradient.
//!
//! Local statistics come from five window filterings (`x`, `y`, `x²`,
//! `y²`, `xy`). The gradient of the mean index with respect to `y` needs
//! three more: the adjoint filter applied to `M1`, to `∂map/∂σxy` and to
//! `∂map/∂σy²`, combined per pixel as
//!
//! ```text
//! M ∇y SSIM = Wᵀ M1 + (Wᵀ ∂map/∂σxy) · x + 2 (Wᵀ ∂map/∂σy²) · y
//! ```
//!
//! where `W` is the boundary-extended window filter. The adjoint is what
//! makes the gradient exact for the index as computed here, borders
//! included.

mod window;

pub use window::{gaussian_window, Window};

use window::Filter;

use crate::error::{Error, Result};
use crate::image::RealImage;

#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams {
    pub window_size: usize,
    pub window_sigma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SsimParams {
    /// Standard constants for images with `levels` intensity levels:
    /// 11x11 Gaussian window with σ = 1.5, `C1 = (0.01 (L-1))²`,
    /// `C2 = (0.03 (L-1))²`.
    pub fn for_levels(levels: usize) -> Self {
        let range = levels.saturating_sub(1).max(1) as f64;
        Self {
            window_size: 11,
            window_sigma: 1.5,
            c1: (0.01 * range).powi(2),
            c2: (0.03 * range).powi(2),
        }
    }

    pub fn window(&self) -> Result<Window> {
        gaussian_window(self.window_size, self.window_sigma)
    }

    fn validate(&self) -> Result<Window> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "SSIM constants must be positive (c1={}, c2={})",
                self.c1, self.c2
            )));
        }
        self.window()
    }
}

impl Default for SsimParams {
    fn default() -> Self {
        Self::for_levels(256)
    }
}

/// Per-pixel SSIM statistics, all the size of the inputs.
#[derive(Debug, Clone)]
pub struct SsimFields {
    pub width: usize,
    pub height: usize,
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub sigma2_x: Vec<f64>,
    pub sigma2_y: Vec<f64>,
    pub sigma_xy: Vec<f64>,
    pub ssim_map: Vec<f64>,
    /// Denominator `(μx² + μy² + C1)(σx² + σy² + C2)`.
    pub denom: Vec<f64>,
    /// Auxiliary gradient term `∂map/∂μy - μx ∂map/∂σxy - 2μy ∂map/∂σy²`.
    pub m1: Vec<f64>,
}

impl SsimFields {
    pub fn mean(&self) -> f64 {
        mean(&self.ssim_map)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_inputs(x: &RealImage, y: &RealImage, p: &SsimParams) -> Result<Window> {
    if !x.same_size(y) {
        return Err(Error::DimensionMismatch(x.width(), x.height(), y.width(), y.height()));
    }
    let win = p.validate()?;
    if x.width() < win.size() || x.height() < win.size() {
        return Err(Error::ImageTooSmall {
            width: x.width(),
            height: x.height(),
            window: win.size(),
        });
    }
    Ok(win)
}

#[inline]
fn map_terms(mx: f64, my: f64, sxx: f64, syy: f64, sxy: f64, p: &SsimParams) -> (f64, f64, f64, f64) {
    let a1 = 2.0 * mx * my + p.c1;
    let a2 = 2.0 * sxy + p.c2;
    let b1 = mx * mx + my * my + p.c1;
    let b2 = sxx + syy + p.c2;
    let d = b1 * b2;
    (a1 * a2 / d, d, b1, b2)
}

/// Repeated SSIM evaluations against one reference image.
///
/// The reference's window statistics are computed once and every working
/// buffer is reused, so an evaluation costs three filterings for the index
/// and six with the gradient, and allocates only its result.
pub struct SsimEvaluator {
    params: SsimParams,
    reference: RealImage,
    filter: Filter,
    mu_x: Vec<f64>,
    /// `W(x²)`, before subtracting `μx²`.
    xx: Vec<f64>,
    mu_y: Vec<f64>,
    yy: Vec<f64>,
    xy: Vec<f64>,
    m1: Vec<f64>,
    d_sxy: Vec<f64>,
    d_syy: Vec<f64>,
}

impl SsimEvaluator {
    pub fn new(reference: &RealImage, params: &SsimParams) -> Result<Self> {
        let win = check_inputs(reference, reference, params)?;
        Ok(Self::with_window(reference, params, &win))
    }

    fn with_window(reference: &RealImage, params: &SsimParams, win: &Window) -> Self {
        let n = reference.len();
        let mut filter = Filter::new(win, reference.width(), reference.height());
        let (mut mu_x, mut xx) = (vec![0.0; n], vec![0.0; n]);
        filter.apply(reference.data(), &mut mu_x);
        filter.apply_product(reference.data(), reference.data(), &mut xx);
        Self {
            params: params.clone(),
            reference: reference.clone(),
            filter,
            mu_x,
            xx,
            mu_y: vec![0.0; n],
            yy: vec![0.0; n],
            xy: vec![0.0; n],
            m1: vec![0.0; n],
            d_sxy: vec![0.0; n],
            d_syy: vec![0.0; n],
        }
    }

    pub fn reference(&self) -> &RealImage {
        &self.reference
    }

    pub fn params(&self) -> &SsimParams {
        &self.params
    }

    fn load(&mut self, y: &RealImage) -> Result<()> {
        let x = &self.reference;
        if !x.same_size(y) {
            return Err(Error::DimensionMismatch(x.width(), x.height(), y.width(), y.height()));
        }
        self.filter.apply(y.data(), &mut self.mu_y);
        self.filter.apply_product(y.data(), y.data(), &mut self.yy);
        self.filter.apply_product(x.data(), y.data(), &mut self.xy);
        Ok(())
    }

    /// Terms of the SSIM map at pixel `i`: `(map, denominator, B1, B2)`
    /// and the local moments.
    #[inline]
    fn terms(&self, i: usize) -> ([f64; 5], (f64, f64, f64, f64)) {
        let (mx, my) = (self.mu_x[i], self.mu_y[i]);
        let m = [mx, my, self.xx[i] - mx * mx, self.yy[i] - my * my, self.xy[i] - mx * my];
        (m, map_terms(m[0], m[1], m[2], m[3], m[4], &self.params))
    }

    /// Mean SSIM between the reference and `y`.
    pub fn index(&mut self, y: &RealImage) -> Result<f64> {
        self.load(y)?;
        // The map goes through a work buffer so every path sums it the same way.
        let mut map = std::mem::take(&mut self.m1);
        for (i, v) in map.iter_mut().enumerate() {
            *v = self.terms(i).1 .0;
        }
        let s = mean(&map);
        self.m1 = map;
        Ok(s)
    }

    /// All per-pixel statistics.
    pub fn fields(&mut self, y: &RealImage) -> Result<SsimFields> {
        self.load(y)?;
        let n = y.len();
        let mut f = SsimFields {
            width: y.width(),
            height: y.height(),
            mu_x: Vec::with_capacity(n),
            mu_y: Vec::with_capacity(n),
            sigma2_x: Vec::with_capacity(n),
            sigma2_y: Vec::with_capacity(n),
            sigma_xy: Vec::with_capacity(n),
            ssim_map: Vec::with_capacity(n),
            denom: Vec::with_capacity(n),
            m1: Vec::with_capacity(n),
        };
        let p = &self.params;
        for i in 0..n {
            let ([mx, my, sxx, syy, sxy], (s, d, b1, b2)) = self.terms(i);
            f.mu_x.push(mx);
            f.mu_y.push(my);
            f.sigma2_x.push(sxx);
            f.sigma2_y.push(syy);
            f.sigma_xy.push(sxy);
            f.ssim_map.push(s);
            f.denom.push(d);
            f.m1.push(m1_term(mx, my, sxy, s, d, b1, b2, p));
        }
        Ok(f)
    }

    /// Mean SSIM and its gradient with respect to `y`.
    pub fn with_gradient(&mut self, y: &RealImage) -> Result<(f64, RealImage)> {
        self.load(y)?;
        let n = y.len();
        let p = self.params.clone();
        // The SSIM map is parked in `d_syy` until the mean is taken.
        for i in 0..n {
            let ([mx, my, _, _, sxy], (s, d, b1, b2)) = self.terms(i);
            self.m1[i] = m1_term(mx, my, sxy, s, d, b1, b2, &p);
            self.d_sxy[i] = 2.0 * (p.c1 + 2.0 * mx * my) / d;
            self.d_syy[i] = s;
        }
        let ssim = mean(&self.d_syy);
        for i in 0..n {
            let b2 = self.terms(i).1 .3;
            self.d_syy[i] = -self.d_syy[i] / b2;
        }
        // Adjoint filterings, written over the moment buffers.
        self.filter.apply_adjoint(&self.m1, &mut self.mu_y);
        self.filter.apply_adjoint(&self.d_sxy, &mut self.yy);
        self.filter.apply_adjoint(&self.d_syy, &mut self.xy);
        let (rd, yd) = (self.reference.data(), y.data());
        let inv_m = 1.0 / n as f64;
        let grad = (0..n)
            .map(|i| (self.mu_y[i] + self.yy[i] * rd[i] + 2.0 * self.xy[i] * yd[i]) * inv_m)
            .collect();
        Ok((ssim, RealImage::from_raw(y.width(), y.height(), grad)))
    }
}

/// `M1 = ∂map/∂μy - μx ∂map/∂σxy - 2μy ∂map/∂σy²`, simplified.
#[allow(clippy::too_many_arguments)]
#[inline]
fn m1_term(mx: f64, my: f64, sxy: f64, s: f64, d: f64, b1: f64, b2: f64, p: &SsimParams) -> f64 {
    (2.0 * mx * (2.0 * sxy + p.c2 - 2.0 * mx * my - p.c1) - 2.0 * my * (b2 - b1) * s) / d
}

fn evaluator(x: &RealImage, y: &RealImage, p: &SsimParams) -> Result<SsimEvaluator> {
    let win = check_inputs(x, y, p)?;
    Ok(SsimEvaluator::with_window(x, p, &win))
}

pub fn ssim_fields(x: &RealImage, y: &RealImage, p: &SsimParams) -> Result<SsimFields> {
    evaluator(x, y, p)?.fields(y)
}

/// Mean of the SSIM map.
pub fn ssim_index(x: &RealImage, y: &RealImage, p: &SsimParams) -> Result<f64> {
    evaluator(x, y, p)?.index(y)
}

/// `∇y SSIM(reference, y)`, one component per pixel of `y`.
pub fn ssim_gradient(reference: &RealImage, y: &RealImage, p: &SsimParams) -> Result<RealImage> {
    Ok(ssim_with_gradient(reference, y, p)?.1)
}

/// SSIM index and its gradient, sharing the five moment filterings.
pub fn ssim_with_gradient(reference: &RealImage, y: &RealImage, p: &SsimParams) -> Result<(f64, RealImage)> {
    evaluator(reference, y, p)?.with_gradient(y)
}
