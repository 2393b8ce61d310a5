//! Shared fixtures for the volfit benchmarks.

use volfit::{ForwardContext, SkewSabrParams, Smile};

/// The market baseline used across benchmarks: forward 5685.6, tau 0.176.
pub fn baseline_ctx() -> ForwardContext {
    ForwardContext::new(5685.6, 0.176).expect("baseline context is valid")
}

/// Thirteen strikes spanning 85%..115% of the forward.
pub fn baseline_strikes(ctx: &ForwardContext) -> Vec<f64> {
    (0..13)
        .map(|i| ctx.forward * (0.85 + 0.025 * f64::from(i)))
        .collect()
}

/// A smooth skewed smile over the baseline strikes, the standard
/// calibration workload.
pub fn baseline_smile() -> Smile {
    let ctx = baseline_ctx();
    let params = SkewSabrParams::new(0.25, -0.35, 1.4, -0.08, 0.01).expect("valid params");
    let strikes = baseline_strikes(&ctx);
    let ivs: Vec<f64> = strikes
        .iter()
        .map(|&k| params.vol(&ctx, k).expect("valid strike"))
        .collect();
    Smile::from_vols(ctx, &strikes, &ivs).expect("valid smile")
}
