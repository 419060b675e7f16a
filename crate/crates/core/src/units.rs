//! Conversions between dimensionless `g t` and laboratory units.

use std::f64::consts::PI;

/// Coupling strength assumed when reporting times in ns, in MHz.
pub const DEFAULT_G_MHZ: f64 = 360.0;

/// `t [ns] = g t / (2 pi g[MHz]) * 1e3`.
pub fn gt_to_ns(gt: f64, g_mhz: f64) -> f64 {
    gt * 1e3 / (2.0 * PI * g_mhz)
}

/// Nanoseconds per unit of `g t`.
pub fn ns_per_gt(g_mhz: f64) -> f64 {
    gt_to_ns(1.0, g_mhz)
}

/// Dimensionless decay rate `r/g` for a lifetime `1/r` in seconds.
pub fn rate_from_lifetime(lifetime_s: f64, g_mhz: f64) -> f64 {
    1.0 / (2.0 * PI * g_mhz * 1e6 * lifetime_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((gt_to_ns(2.0 * PI, 50.0) - 20.0).abs() < 1e-12);
        assert!((ns_per_gt(50.0) * 2.0 * PI * 50.0 - 1e3).abs() < 1e-9);
        // 1 us photon lifetime, 25 us qudit lifetime at 360 MHz
        assert!((1.0 / rate_from_lifetime(1e-6, 360.0) - 2261.9).abs() < 0.1);
        assert!((1.0 / rate_from_lifetime(25e-6, 360.0) - 56548.7).abs() < 0.1);
    }
}
