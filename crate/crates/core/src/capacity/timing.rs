//! Frame timing when every training slot's feedback must cross the uplink.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Bits fed back per pilot subcarrier and training slot.
pub const FEEDBACK_BITS_PER_SAMPLE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    pub n_nodes: usize,
    pub n_pilot_subcarriers: usize,
    /// Bits per second; `inf` when feedback is not a bottleneck.
    pub feedback_rate: f64,
    pub frame_length: f64,
    pub coherence_time: f64,
}

/// `T_f = max(2 N M_p / R_f, N t_ofdm)`, `T_c = 3 T_f`.
pub fn frame_timing(n_nodes: usize, m_p: usize, feedback_rate: f64, t_ofdm: f64) -> Result<FrameTiming> {
    if feedback_rate.is_nan() || feedback_rate <= 0.0 {
        return Err(invalid("feedback_rate", format!("{feedback_rate} must be positive")));
    }
    if !(t_ofdm >= 0.0 && t_ofdm.is_finite()) {
        return Err(invalid("t_ofdm", "must be finite and non-negative"));
    }
    let n = n_nodes as f64;
    let feedback_limited = FEEDBACK_BITS_PER_SAMPLE * n * m_p as f64 / feedback_rate;
    let frame_length = feedback_limited.max(n * t_ofdm);
    Ok(FrameTiming {
        n_nodes,
        n_pilot_subcarriers: m_p,
        feedback_rate,
        frame_length,
        coherence_time: 3.0 * frame_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T_OFDM: f64 = 1e-3 / 14.0;

    #[test]
    fn feedback_limited_frames() {
        let t = frame_timing(10, 200, 132e3, T_OFDM).unwrap();
        assert!((t.frame_length - 4000.0 / 132e3).abs() < 1e-15);
        assert!((t.coherence_time - 0.0909).abs() < 1e-3);
        let fast = frame_timing(10, 200, 3e6, T_OFDM).unwrap();
        assert!((fast.coherence_time - 4.0e-3).abs() < 1e-12);
    }

    #[test]
    fn unlimited_feedback() {
        let t = frame_timing(10, 200, f64::INFINITY, T_OFDM).unwrap();
        assert!((t.frame_length - 10.0 * T_OFDM).abs() < 1e-15);
        assert!(frame_timing(10, 200, 0.0, T_OFDM).is_err());
    }

    #[test]
    fn frame_never_shorter_than_training() {
        for rate in [1e3, 1e5, 1e7, 1e9] {
            let t = frame_timing(7, 200, rate, T_OFDM).unwrap();
            assert!(t.frame_length >= 7.0 * T_OFDM);
            assert_eq!(t.coherence_time, 3.0 * t.frame_length);
        }
    }
}
