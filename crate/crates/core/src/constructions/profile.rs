//! Quintic smoothstep used for cut-offs and interface motion.

/// 6t⁵ − 15t⁴ + 10t³ clamped to [0,1].
pub fn psi(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn dpsi(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

pub fn d2psi(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    60.0 * t * (t - 1.0) * (2.0 * t - 1.0)
}
