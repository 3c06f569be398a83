use serde::{Deserialize, Serialize};

use crate::env::FapState;
use crate::error::{Error, Result};

pub const BITS_PER_MEGABYTE: f64 = 8.0e6;

/// Physical-layer and backhaul constants of the delay model.
///
/// Channel gain is deterministic path loss `distance^(-pathloss_exponent)`;
/// per-RB interference is `kappa * (N-1) * transmit_power * h_ref` where
/// `h_ref` is the gain at coverage-edge distance, so it grows linearly with
/// the number of F-APs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayModel {
    /// RB bandwidth in Hz.
    pub rb_bandwidth: f64,
    /// Per-RB transmit power in watts.
    pub transmit_power: f64,
    /// Noise power spectral density in watts/Hz.
    pub noise_density: f64,
    /// Interference power per RB in watts.
    pub interference: f64,
    /// Content transfer delay between F-APs, seconds.
    pub fap_to_fap_delay: f64,
    /// Content transfer delay between cloud and F-AP, seconds.
    pub cloud_to_fap_delay: f64,
    pub pathloss_exponent: f64,
}

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            self.rb_bandwidth,
            self.transmit_power,
            self.fap_to_fap_delay,
            self.cloud_to_fap_delay,
        ];
        if positives.iter().any(|&v| v <= 0.0) || self.noise_density <= 0.0 {
            return Err(Error::InvalidParameter(
                "delays, powers, bandwidth and noise density must be strictly positive".into(),
            ));
        }
        if self.interference < 0.0 {
            return Err(Error::InvalidParameter("interference must be non-negative".into()));
        }
        Ok(())
    }

    pub fn channel_gain(&self, distance_m: f64) -> f64 {
        distance_m.max(1.0).powf(-self.pathloss_exponent)
    }
}

/// Shannon-capacity downlink rate (bits/s) of an F-AP to one of its users
/// over the user's assigned RB.
pub fn downlink_rate(model: &DelayModel, fap: &FapState, user: usize) -> Result<f64> {
    fap.check_rb(user)?;
    let h = model.channel_gain(fap.distance_to_user(user));
    let sinr = model.transmit_power * h
        / (model.interference + model.rb_bandwidth * model.noise_density);
    Ok(model.rb_bandwidth * (1.0 + sinr).log2())
}

/// Transmission delay (seconds) of a content of `size_mb` megabytes at
/// `rate` bits/s.
pub fn user_delay(rate: f64, size_mb: f64) -> Result<f64> {
    if rate <= 0.0 {
        return Err(Error::UnreachableUser);
    }
    Ok(size_mb * BITS_PER_MEGABYTE / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(interference: f64) -> DelayModel {
        DelayModel {
            rb_bandwidth: 20.0e6,
            transmit_power: 1.0,
            noise_density: 10f64.powf(-20.4),
            interference,
            fap_to_fap_delay: 0.002,
            cloud_to_fap_delay: 0.010,
            pathloss_exponent: 3.0,
        }
    }

    fn one_user_fap(distance: f64) -> FapState {
        FapState::new(0, 20.0, 10, 1, vec![0], vec![distance], 4).unwrap()
    }

    #[test]
    fn zero_gain_gives_zero_rate_and_unreachable_delay() {
        // log2(1 + 0) = 0.
        let m = model(0.0);
        let sinr = 0.0f64;
        let rate = m.rb_bandwidth * (1.0 + sinr).log2();
        assert_eq!(rate, 0.0);
        assert!(matches!(user_delay(rate, 1.0), Err(Error::UnreachableUser)));
    }

    #[test]
    fn rate_matches_closed_form_golden_value() {
        // P*h = 1e-10 at distance h = d^-3 -> d = 10^(10/3).
        let m = model(0.0);
        let d = 10f64.powf(10.0 / 3.0);
        let fap = one_user_fap(d);
        let rate = downlink_rate(&m, &fap, 0).unwrap();
        // Independently: B*log2(1 + 1e-10 / (B*N0)), B*N0 = 2e7 * 10^-20.4.
        let expected = 20.0e6 * (1.0 + 1.0e-10 / (20.0e6 * 10f64.powf(-20.4))).log2();
        assert_abs_diff_eq!(rate, expected, epsilon = expected * 1e-12);
        // Frozen magnitude check of the same closed form.
        assert_abs_diff_eq!(rate, 2.0593e8, epsilon = 0.01e8);
    }

    #[test]
    fn doubling_interference_strictly_decreases_rate() {
        let fap = one_user_fap(100.0);
        let r1 = downlink_rate(&model(1e-9), &fap, 0).unwrap();
        let r2 = downlink_rate(&model(2e-9), &fap, 0).unwrap();
        assert!(r2 < r1);
    }

    #[test]
    fn delay_is_linear_in_size_and_inverse_in_rate() {
        assert_abs_diff_eq!(user_delay(8.0e6, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(user_delay(16.0e6, 1.0).unwrap(), 0.5, epsilon = 1e-12);
        let d1 = user_delay(3.0e6, 1.0).unwrap();
        let d3 = user_delay(3.0e6, 3.0).unwrap();
        assert_abs_diff_eq!(d3, 3.0 * d1, epsilon = 1e-12);
    }
}
