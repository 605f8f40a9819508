//! Hata path loss and the range at which a required SNR is still met.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HataEnvironment {
    Urban,
    Suburban,
    OpenArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub carrier_frequency: f64,
    pub tx_height: f64,
    pub rx_height: f64,
    pub noise_figure_db: f64,
    pub implementation_margin_db: f64,
    /// Noise bandwidth in hertz.
    pub bandwidth: f64,
    pub environment: HataEnvironment,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            tx_power_dbm: 20.0,
            carrier_frequency: 800e6,
            tx_height: 30.0,
            rx_height: 1.5,
            noise_figure_db: 6.0,
            implementation_margin_db: 5.0,
            bandwidth: 2e6,
            environment: HataEnvironment::OpenArea,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "nodes")]
pub enum GainMode {
    Single,
    PowerPooling(usize),
    Beamforming(usize),
}

impl GainMode {
    pub fn gain_db(self) -> f64 {
        match self {
            GainMode::Single => 0.0,
            GainMode::PowerPooling(n) => 10.0 * (n as f64).log10(),
            GainMode::Beamforming(n) => 20.0 * (n as f64).log10(),
        }
    }
}

/// Frequency range of the Hata fit, MHz.
pub const HATA_FREQUENCY_MHZ: (f64, f64) = (150.0, 1500.0);

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_figure_db", self.noise_figure_db),
            ("implementation_margin_db", self.implementation_margin_db),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(invalid("bandwidth", "must be positive"));
        }
        let f = self.carrier_frequency / 1e6;
        if !(f >= HATA_FREQUENCY_MHZ.0 && f <= HATA_FREQUENCY_MHZ.1) {
            return Err(Error::OutsideValidity(format!("carrier {f} MHz outside 150-1500 MHz")));
        }
        if !(30.0..=200.0).contains(&self.tx_height) {
            return Err(Error::OutsideValidity(format!("base height {} m outside 30-200 m", self.tx_height)));
        }
        if !(1.0..=10.0).contains(&self.rx_height) {
            return Err(Error::OutsideValidity(format!("mobile height {} m outside 1-10 m", self.rx_height)));
        }
        Ok(())
    }

    /// Median path loss in dB at `distance_km`.
    pub fn path_loss_db(&self, distance_km: f64) -> f64 {
        let f = self.carrier_frequency / 1e6;
        let lf = f.log10();
        let hb = self.tx_height;
        let hm = self.rx_height;
        // small/medium city mobile antenna correction
        let a_hm = (1.1 * lf - 0.7) * hm - (1.56 * lf - 0.8);
        let urban = 69.55 + 26.16 * lf - 13.82 * hb.log10() - a_hm
            + (44.9 - 6.55 * hb.log10()) * distance_km.log10();
        match self.environment {
            HataEnvironment::Urban => urban,
            HataEnvironment::Suburban => urban - 2.0 * (f / 28.0).log10().powi(2) - 5.4,
            HataEnvironment::OpenArea => urban - 4.78 * lf * lf + 18.33 * lf - 40.94,
        }
    }

    /// Thermal noise plus noise figure over the bandwidth, dBm.
    pub fn noise_floor_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth.log10() + self.noise_figure_db
    }

    /// Per-node SNR at `distance_km` plus the array gain, minus the margin.
    pub fn snr_db(&self, distance_km: f64, mode: GainMode) -> f64 {
        self.tx_power_dbm - self.path_loss_db(distance_km) - self.noise_floor_dbm() + mode.gain_db()
            - self.implementation_margin_db
    }
}

/// Search interval for the range, km.
const RANGE_BRACKET_KM: (f64, f64) = (1e-3, 1e3);

/// Largest distance in km at which `snr_db >= required_snr_db`.
pub fn hata_range(budget: &LinkBudget, required_snr_db: f64, mode: GainMode) -> Result<f64> {
    budget.validate()?;
    if let GainMode::PowerPooling(0) | GainMode::Beamforming(0) = mode {
        return Err(invalid("nodes", "at least one node is required"));
    }
    let excess = |d: f64| budget.snr_db(d, mode) - required_snr_db;
    let (mut lo, mut hi) = RANGE_BRACKET_KM;
    if excess(lo) < 0.0 {
        return Err(Error::NoFeasibleRange(format!(
            "required SNR not met even at {lo} km"
        )));
    }
    if excess(hi) >= 0.0 {
        return Err(Error::NoFeasibleRange(format!("range exceeds {hi} km")));
    }
    // path loss is linear in log10 d, so bisect there
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if excess(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Ok(lo)
}
