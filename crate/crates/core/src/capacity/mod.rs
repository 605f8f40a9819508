//! Downlink and uplink capacity analysis, frame timing and link budget.

pub mod link_budget;
pub mod outage;
pub mod timing;
pub mod uplink;
pub mod wideband;

pub use link_budget::{hata_range, GainMode, HataEnvironment, LinkBudget};
pub use outage::{
    ergodic_capacity_mc, gaussian_outage_capacity, narrowband_outage_capacity_mc, narrowband_row,
    saa_outage_capacity, NarrowbandRow, OutageSpec,
};
pub use timing::{frame_timing, FrameTiming};
pub use uplink::{uplink_outage_rate, uplink_samples, SubcarrierPlacement, UplinkRates, UplinkSpec, UplinkStrategy};
pub use wideband::{wideband_outage_capacity, wideband_rates, CsiMode, WidebandTraining, WidebandTrialRates};
