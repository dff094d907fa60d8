//! CSV export of an ascent trace.

use std::fmt::Write as _;

use crate::optimizer::AscentTrace;

pub const TRACE_HEADER: &str = "iteration,ssim,predicted_delta,actual_delta,elapsed_s";

/// Plain decimal with at least `sig` significant digits (no exponent).
pub fn format_decimal(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.1}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).clamp(1, 340) as usize;
    format!("{v:.decimals$}")
}

pub fn trace_to_csv(trace: &AscentTrace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            format_decimal(r.ssim, 12),
            format_decimal(r.predicted_delta, 12),
            format_decimal(r.actual_delta, 12),
            format_decimal(r.elapsed, 12),
        );
    }
    out
}
