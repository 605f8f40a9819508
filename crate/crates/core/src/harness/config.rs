//! Experiment configuration: a flat key-value parameter set with defaults,
//! read from TOML text and overridable key by key.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiments::Experiment;
use crate::beamforming::quantizer::{QuantizerConfig, DEFAULT_CLIP_MULTIPLIER};
use crate::beamforming::stochastic::{M2bfConfig, ObfConfig, R2bfConfig};
use crate::beamforming::{Algorithm, AlgorithmConfig};
use crate::capacity::link_budget::{HataEnvironment, LinkBudget};
use crate::capacity::uplink::{SubcarrierPlacement, UplinkSpec, UplinkStrategy};
use crate::channel::{PdpConfig, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

/// Text form of one parameter value.
pub trait ParamValue: Sized {
    fn parse_param(key: &str, text: &str) -> Result<Self>;
    fn format_param(&self) -> String;
}

fn bad(key: &str, text: &str, what: &str) -> Error {
    Error::Config(format!("{key}: cannot parse {text:?} as {what}"))
}

macro_rules! from_str_param {
    ($($t:ty => $what:literal),*) => {$(
        impl ParamValue for $t {
            fn parse_param(key: &str, text: &str) -> Result<Self> {
                text.trim().parse().map_err(|_| bad(key, text, $what))
            }
            fn format_param(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

from_str_param!(usize => "a non-negative integer", u32 => "a non-negative integer", bool => "a boolean");

impl ParamValue for f64 {
    fn parse_param(key: &str, text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            t => t.parse().map_err(|_| bad(key, text, "a number")),
        }
    }
    fn format_param(&self) -> String {
        self.to_string()
    }
}

impl ParamValue for Algorithm {
    fn parse_param(_: &str, text: &str) -> Result<Self> {
        text.parse()
    }
    fn format_param(&self) -> String {
        self.to_string()
    }
}

macro_rules! enum_param {
    ($t:ty { $($name:literal => $v:expr),* }) => {
        impl ParamValue for $t {
            fn parse_param(key: &str, text: &str) -> Result<Self> {
                match text.trim() {
                    $($name => Ok($v),)*
                    _ => Err(bad(key, text, concat!("one of", $(" ", $name),*))),
                }
            }
            fn format_param(&self) -> String {
                match self {
                    $(x if *x == $v => $name.to_string(),)*
                    _ => unreachable!(),
                }
            }
        }
    };
}

enum_param!(SubcarrierPlacement { "interleaved" => SubcarrierPlacement::Interleaved, "contiguous" => SubcarrierPlacement::Contiguous });
enum_param!(HataEnvironment {
    "urban" => HataEnvironment::Urban,
    "suburban" => HataEnvironment::Suburban,
    "open_area" => HataEnvironment::OpenArea
});

impl<T: ParamValue> ParamValue for Vec<T> {
    fn parse_param(key: &str, text: &str) -> Result<Self> {
        let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
        inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| T::parse_param(key, s.trim_matches('"')))
            .collect()
    }
    fn format_param(&self) -> String {
        self.iter().map(T::format_param).collect::<Vec<_>>().join(",")
    }
}

macro_rules! params {
    ($( $(#[doc = $doc:literal])* $key:ident : $ty:ty = $default:expr; )*) => {
        /// Every tunable of every experiment. Keys are the field names.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct Params {
            $( $(#[doc = $doc])* pub $key: $ty, )*
        }

        impl Default for Params {
            fn default() -> Self {
                Params { $( $key: $default, )* }
            }
        }

        impl Params {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($key)),*];

            /// Sets one key from text; unknown keys are rejected.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( stringify!($key) => self.$key = <$ty as ParamValue>::parse_param(key, value)?, )*
                    _ => return Err(Error::UnknownKey(key.to_string())),
                }
                Ok(())
            }

            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $( stringify!($key) => Some(self.$key.format_param()), )*
                    _ => None,
                }
            }
        }
    };
}

params! {
    n_nodes: usize = 10;
    /// Per-node SNR in dB; `inf` for noiseless links.
    snr_db: f64 = -5.0;
    epsilon: f64 = 0.01;
    iterations: usize = 500;
    algorithms: Vec<Algorithm> = Algorithm::ALL.to_vec();
    /// 0 selects `L = n_nodes`.
    training_length: usize = 0;
    /// Total bits per complex feedback sample; 0 disables quantization.
    feedback_bits: u32 = 2;
    clip_multiplier: f64 = DEFAULT_CLIP_MULTIPLIER;
    n_nodes_list: Vec<usize> = (1..=20).collect();
    snr_db_list: Vec<f64> = vec![-10.0, -5.0, 0.0, 5.0];
    feedback_bits_list: Vec<u32> = vec![2, 4, 6];
    obf_perturbation_deg: f64 = ObfConfig::default().perturbation_deg;
    /// 0 keeps the running best.
    obf_window: usize = 0;
    r2bf_beta1: f64 = R2bfConfig::default().betas[0];
    r2bf_beta2: f64 = R2bfConfig::default().betas[1];
    r2bf_beta3: f64 = R2bfConfig::default().betas[2];
    r2bf_xi1: f64 = R2bfConfig::default().xi[0];
    r2bf_xi2: f64 = R2bfConfig::default().xi[1];
    m2bf_alpha1: f64 = M2bfConfig::default().alpha1;
    m2bf_alpha2: f64 = M2bfConfig::default().alpha2;
    m2bf_initial_range_deg: f64 = M2bfConfig::default().initial_range_deg;
    m2bf_decay: f64 = M2bfConfig::default().decay;
    m2bf_floor_deg: f64 = M2bfConfig::default().floor_deg;
    pdp_delays_ns: Vec<f64> = PdpConfig::epa().delays_ns;
    pdp_powers_db: Vec<f64> = PdpConfig::epa().powers_db;
    bandwidth: f64 = OfdmConfig::default().bandwidth;
    n_subcarriers: usize = OfdmConfig::default().n_subcarriers;
    n_pilot_subcarriers: usize = OfdmConfig::default().n_pilot_subcarriers;
    fft_size: usize = OfdmConfig::default().fft_size;
    subcarrier_spacing: f64 = OfdmConfig::default().subcarrier_spacing;
    subframe_length: f64 = OfdmConfig::default().subframe_length;
    symbols_per_subframe: usize = OfdmConfig::default().symbols_per_subframe;
    grid2d_pilot_symbols: usize = OfdmConfig::default().grid2d_pilot_symbols;
    doppler_spread: f64 = OfdmConfig::default().doppler_spread;
    /// Emit averaged per-subcarrier rows in the wideband RSS experiment.
    per_subcarrier: bool = true;
    feedback_bandwidth: f64 = UplinkSpec::default().feedback_bandwidth;
    n_uplink_subcarriers: usize = UplinkSpec::default().n_uplink_subcarriers;
    uplink_placement: SubcarrierPlacement = SubcarrierPlacement::Interleaved;
    tx_power_dbm: f64 = LinkBudget::default().tx_power_dbm;
    carrier_frequencies: Vec<f64> = vec![800e6, 200e6];
    tx_height: f64 = LinkBudget::default().tx_height;
    rx_height: f64 = LinkBudget::default().rx_height;
    noise_figure_db: f64 = LinkBudget::default().noise_figure_db;
    implementation_margin_db: f64 = LinkBudget::default().implementation_margin_db;
    link_bandwidth: f64 = LinkBudget::default().bandwidth;
    hata_environment: HataEnvironment = HataEnvironment::OpenArea;
    /// Post-combining SNR the link must deliver.
    required_snr_db: f64 = 15.0;
}

fn range_error(key: &str, reason: &str) -> Error {
    Error::InvalidParameter {
        name: key.to_string(),
        reason: reason.to_string(),
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_nodes_list.contains(&0) || self.n_nodes_list.is_empty() {
            return Err(range_error("n_nodes", "node counts must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(range_error("epsilon", "must lie in (0, 1)"));
        }
        if self.snr_db.is_nan() || self.snr_db_list.iter().any(|s| s.is_nan()) || self.snr_db_list.is_empty() {
            return Err(range_error("snr_db", "must be a number"));
        }
        if self.iterations == 0 {
            return Err(range_error("iterations", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(range_error("algorithms", "select at least one"));
        }
        if self.training_length != 0 && self.training_length < self.n_nodes {
            return Err(Error::TrainingTooShort {
                length: self.training_length,
                nodes: self.n_nodes,
            });
        }
        for &b in std::iter::once(&self.feedback_bits).chain(&self.feedback_bits_list) {
            if b % 2 != 0 || b > 32 {
                return Err(range_error("feedback_bits", "must be even and at most 32 (0 disables)"));
            }
        }
        if !(self.clip_multiplier > 0.0 && self.clip_multiplier.is_finite()) {
            return Err(range_error("clip_multiplier", "must be positive"));
        }
        self.obf()?.validate()?;
        self.r2bf()?.validate()?;
        self.m2bf()?.validate()?;
        self.pdp()?;
        self.ofdm()?;
        let spec = self.uplink(UplinkStrategy::SingleNode, self.snr_db);
        spec.validate(&self.ofdm()?)?;
        if self.carrier_frequencies.is_empty() {
            return Err(range_error("carrier_frequencies", "list at least one carrier"));
        }
        for &f in &self.carrier_frequencies {
            self.link_budget(f).validate()?;
        }
        if !self.required_snr_db.is_finite() {
            return Err(range_error("required_snr_db", "must be finite"));
        }
        Ok(())
    }

    pub fn obf(&self) -> Result<ObfConfig> {
        Ok(ObfConfig {
            perturbation_deg: self.obf_perturbation_deg,
            window: (self.obf_window > 0).then_some(self.obf_window),
        })
    }

    pub fn r2bf(&self) -> Result<R2bfConfig> {
        Ok(R2bfConfig {
            betas: [self.r2bf_beta1, self.r2bf_beta2, self.r2bf_beta3],
            xi: [self.r2bf_xi1, self.r2bf_xi2],
        })
    }

    pub fn m2bf(&self) -> Result<M2bfConfig> {
        Ok(M2bfConfig {
            alpha1: self.m2bf_alpha1,
            alpha2: self.m2bf_alpha2,
            initial_range_deg: self.m2bf_initial_range_deg,
            decay: self.m2bf_decay,
            floor_deg: self.m2bf_floor_deg,
        })
    }

    pub fn quantizer(&self, bits: u32) -> QuantizerConfig {
        if bits == 0 {
            QuantizerConfig::bypass().with_clip(self.clip_multiplier)
        } else {
            QuantizerConfig::bits(bits).with_clip(self.clip_multiplier)
        }
    }

    pub fn training_length_for(&self, n: usize) -> usize {
        if self.training_length == 0 {
            n
        } else {
            self.training_length
        }
    }

    /// Algorithm configuration with `bits` of feedback for the training schemes.
    pub fn algorithm(&self, algorithm: Algorithm, bits: u32) -> Result<AlgorithmConfig> {
        Ok(match algorithm {
            Algorithm::Dost => AlgorithmConfig::Dost {
                training_length: (self.training_length > 0).then_some(self.training_length),
                quantizer: self.quantizer(bits),
            },
            Algorithm::Sddb => AlgorithmConfig::Sddb {
                quantizer: self.quantizer(bits),
            },
            Algorithm::Obf => AlgorithmConfig::Obf(self.obf()?),
            Algorithm::R2bf => AlgorithmConfig::R2bf(self.r2bf()?),
            Algorithm::M2bf => AlgorithmConfig::M2bf(self.m2bf()?),
        })
    }

    pub fn pdp(&self) -> Result<PowerDelayProfile> {
        PowerDelayProfile::from_config(&PdpConfig {
            delays_ns: self.pdp_delays_ns.clone(),
            powers_db: self.pdp_powers_db.clone(),
        })
    }

    pub fn ofdm(&self) -> Result<OfdmConfig> {
        let cfg = OfdmConfig {
            bandwidth: self.bandwidth,
            n_subcarriers: self.n_subcarriers,
            n_pilot_subcarriers: self.n_pilot_subcarriers,
            fft_size: self.fft_size,
            subcarrier_spacing: self.subcarrier_spacing,
            subframe_length: self.subframe_length,
            symbols_per_subframe: self.symbols_per_subframe,
            grid2d_pilot_symbols: self.grid2d_pilot_symbols,
            doppler_spread: self.doppler_spread,
        };
        cfg.validate()?;
        cfg.comb_spacing()?;
        Ok(cfg)
    }

    pub fn uplink(&self, strategy: UplinkStrategy, snr_db: f64) -> UplinkSpec {
        UplinkSpec {
            feedback_bandwidth: self.feedback_bandwidth,
            n_uplink_subcarriers: self.n_uplink_subcarriers,
            placement: self.uplink_placement,
            strategy,
            snr_per_node_db: snr_db,
            n_nodes: self.n_nodes,
        }
    }

    pub fn link_budget(&self, carrier_frequency: f64) -> LinkBudget {
        LinkBudget {
            tx_power_dbm: self.tx_power_dbm,
            carrier_frequency,
            tx_height: self.tx_height,
            rx_height: self.rx_height,
            noise_figure_db: self.noise_figure_db,
            implementation_margin_db: self.implementation_margin_db,
            bandwidth: self.link_bandwidth,
            environment: self.hata_environment,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub params: Params,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Catalog defaults for `experiment`.
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: DEFAULT_SEED,
            trials: experiment.default_trials(),
            params: experiment.default_params(),
            output_path: None,
            format: OutputFormat::default(),
        }
    }

    /// Sets a parameter or one of the run keys `seed`, `trials`, `output`, `format`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = u64::from_str(value.trim()).map_err(|_| bad(key, value, "an integer"))?,
            "trials" => self.trials = usize::parse_param(key, value)?,
            "output" => self.output_path = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(Error::Config(format!(
                        "configuration is for {e}, not {}",
                        self.experiment
                    )));
                }
            }
            _ => self.params.set(key, value)?,
        }
        Ok(())
    }

    /// Applies `key=value` assignments in order.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(range_error("trials", "must be at least 1"));
        }
        self.params.validate()
    }
}

/// Assignments read from a configuration file, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub entries: Vec<(String, String)>,
}

/// Splits `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got {text:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn toml_to_text(key: &str, v: &toml::Value) -> Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(a) => a
            .iter()
            .map(|x| toml_to_text(key, x))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => return Err(Error::Config(format!("{key}: nested tables are not supported"))),
    })
}

/// Reads flat TOML (`key = value` lines). Keys are checked when applied.
pub fn parse_config_file(text: &str) -> Result<ConfigFile> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut file = ConfigFile::default();
    for (k, v) in &table {
        let value = toml_to_text(k, v)?;
        if k == "experiment" {
            file.experiment = Some(value.parse()?);
        } else {
            file.entries.push((k.clone(), value));
        }
    }
    Ok(file)
}

/// Complete configuration from text naming its experiment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let file = parse_config_file(text)?;
    let experiment = file
        .experiment
        .ok_or_else(|| Error::Config("missing key `experiment`".into()))?;
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.apply(file.entries.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    cfg.validate()?;
    Ok(cfg)
}
