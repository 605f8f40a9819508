//! The experiment catalog. Every experiment is a pure function of its
//! configuration: trials run in parallel on per-trial seed streams and are
//! reduced in trial order.

use std::fmt;
use std::fs::File;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Params};
use super::record::{write_records, ResultRecord};
use crate::beamforming::quantizer::{training_sigma, QuantizerSpec};
use crate::beamforming::signal::{gain_db, noise_variance};
use crate::beamforming::{run_adaptation, AdaptationTrace, Algorithm};
use crate::capacity::link_budget::{hata_range, GainMode};
use crate::capacity::outage::{narrowband_row, OutageSpec};
use crate::capacity::timing::frame_timing;
use crate::capacity::uplink::{rates_from_samples, uplink_samples, UplinkStrategy};
use crate::capacity::wideband::{wideband_quantile, wideband_rates, CsiMode, WidebandTraining};
use crate::channel::{sample_node_channel, PowerDelayProfile, ResponseGrid};
use crate::error::{Error, Result};
use crate::ofdm::{
    channel_responses, comb_grid, training_time, wideband_dost, wideband_rss_from_responses, PilotArrangement,
    PilotGrid,
};
use crate::rng::{domain, SeedTree};
use crate::stats::{amplitude_db, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig2NoiselessEvolution,
    Fig3NoisyEvolution,
    Fig4QuantizationSweep,
    Fig6WidebandRss,
    Fig7NarrowbandOutage,
    Fig8WidebandOutage,
    Fig9UplinkOutage,
    TabFrameTiming,
    TabLinkBudget,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Fig2NoiselessEvolution,
        Experiment::Fig3NoisyEvolution,
        Experiment::Fig4QuantizationSweep,
        Experiment::Fig6WidebandRss,
        Experiment::Fig7NarrowbandOutage,
        Experiment::Fig8WidebandOutage,
        Experiment::Fig9UplinkOutage,
        Experiment::TabFrameTiming,
        Experiment::TabLinkBudget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2NoiselessEvolution => "fig2-noiseless-evolution",
            Experiment::Fig3NoisyEvolution => "fig3-noisy-evolution",
            Experiment::Fig4QuantizationSweep => "fig4-quantization-sweep",
            Experiment::Fig6WidebandRss => "fig6-wideband-rss",
            Experiment::Fig7NarrowbandOutage => "fig7-narrowband-outage",
            Experiment::Fig8WidebandOutage => "fig8-wideband-outage",
            Experiment::Fig9UplinkOutage => "fig9-uplink-outage",
            Experiment::TabFrameTiming => "tab-frame-timing",
            Experiment::TabLinkBudget => "tab-link-budget",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Fig2NoiselessEvolution => "mean beamforming gain per iteration, noiseless feedback",
            Experiment::Fig3NoisyEvolution => "mean beamforming gain per iteration at the configured per-node SNR",
            Experiment::Fig4QuantizationSweep => "final gap to ideal for training schemes over feedback bits and SNR",
            Experiment::Fig6WidebandRss => "subcarrier-averaged RSS of comb-pilot and all-pilot wideband training",
            Experiment::Fig7NarrowbandOutage => "ergodic and outage capacity vs nodes: Monte Carlo, Gaussian, small-argument",
            Experiment::Fig8WidebandOutage => "wideband outage rate vs nodes with ideal CSI and with training",
            Experiment::Fig9UplinkOutage => "feedback-link outage rates of single-node, best-node and combined reception",
            Experiment::TabFrameTiming => "frame length and coherence time implied by each feedback strategy",
            Experiment::TabLinkBudget => "Hata range for single node, power pooling and beamforming",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Experiment::Fig2NoiselessEvolution | Experiment::Fig3NoisyEvolution | Experiment::Fig4QuantizationSweep => {
                2000
            }
            Experiment::Fig6WidebandRss => 1000,
            Experiment::Fig7NarrowbandOutage => 100_000,
            Experiment::Fig8WidebandOutage => 2000,
            Experiment::Fig9UplinkOutage | Experiment::TabFrameTiming => 10_000,
            Experiment::TabLinkBudget => 1,
        }
    }

    pub fn default_params(self) -> Params {
        let mut p = Params::default();
        match self {
            Experiment::Fig2NoiselessEvolution => {
                p.n_nodes = 100;
                p.snr_db = f64::INFINITY;
            }
            Experiment::Fig3NoisyEvolution => {
                p.n_nodes = 100;
                p.algorithms = vec![Algorithm::Dost, Algorithm::Sddb, Algorithm::M2bf, Algorithm::R2bf];
            }
            Experiment::Fig4QuantizationSweep => {
                p.n_nodes = 100;
                p.algorithms = vec![Algorithm::Dost, Algorithm::Sddb];
            }
            Experiment::Fig8WidebandOutage => p.n_nodes_list = (1..=10).collect(),
            Experiment::Fig9UplinkOutage => p.snr_db_list = vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            _ => {}
        }
        p
    }

    /// Keys that influence this experiment.
    pub fn keys(self) -> &'static [&'static str] {
        const STOCHASTIC: &[&str] = &[
            "n_nodes", "snr_db", "iterations", "algorithms", "training_length", "feedback_bits", "clip_multiplier",
            "obf_perturbation_deg", "obf_window", "r2bf_beta1", "r2bf_beta2", "r2bf_beta3", "r2bf_xi1", "r2bf_xi2",
            "m2bf_alpha1", "m2bf_alpha2", "m2bf_initial_range_deg", "m2bf_decay", "m2bf_floor_deg", "pdp_delays_ns",
            "pdp_powers_db",
        ];
        match self {
            Experiment::Fig2NoiselessEvolution | Experiment::Fig3NoisyEvolution => STOCHASTIC,
            Experiment::Fig4QuantizationSweep => &[
                "n_nodes", "snr_db_list", "feedback_bits_list", "algorithms", "training_length", "clip_multiplier",
                "pdp_delays_ns", "pdp_powers_db",
            ],
            Experiment::Fig6WidebandRss => &[
                "n_nodes", "snr_db", "training_length", "feedback_bits", "clip_multiplier", "per_subcarrier",
                "pdp_delays_ns", "pdp_powers_db", "n_subcarriers", "n_pilot_subcarriers", "subcarrier_spacing",
            ],
            Experiment::Fig7NarrowbandOutage => &["n_nodes_list", "snr_db", "epsilon"],
            Experiment::Fig8WidebandOutage => &[
                "n_nodes_list", "snr_db", "epsilon", "feedback_bits", "clip_multiplier", "training_length",
                "pdp_delays_ns", "pdp_powers_db", "n_subcarriers", "n_pilot_subcarriers", "subcarrier_spacing",
            ],
            Experiment::Fig9UplinkOutage => &[
                "n_nodes", "snr_db_list", "epsilon", "feedback_bandwidth", "n_uplink_subcarriers", "uplink_placement",
                "pdp_delays_ns", "pdp_powers_db",
            ],
            Experiment::TabFrameTiming => &[
                "n_nodes", "snr_db", "epsilon", "feedback_bandwidth", "n_uplink_subcarriers", "uplink_placement",
                "n_pilot_subcarriers", "subframe_length", "symbols_per_subframe", "grid2d_pilot_symbols",
            ],
            Experiment::TabLinkBudget => &[
                "n_nodes", "required_snr_db", "carrier_frequencies", "tx_power_dbm", "tx_height", "rx_height",
                "noise_figure_db", "implementation_margin_db", "link_bandwidth", "hata_environment",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// One catalog line per experiment followed by its default parameters.
pub fn catalog_listing() -> String {
    let mut out = String::new();
    for e in Experiment::ALL {
        let p = e.default_params();
        out.push_str(&format!("{}\n  {}\n  trials = {}\n", e.name(), e.description(), e.default_trials()));
        for key in e.keys() {
            out.push_str(&format!("  {key} = {}\n", p.get(key).unwrap_or_default()));
        }
    }
    out
}

/// Runs the experiment and, if an output path is set, writes the records.
/// The output file is created before any work starts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let sink = cfg.output_path.as_ref().map(File::create).transpose()?;
    let records = match cfg.experiment {
        Experiment::Fig2NoiselessEvolution | Experiment::Fig3NoisyEvolution => evolution(cfg)?,
        Experiment::Fig4QuantizationSweep => quantization_sweep(cfg)?,
        Experiment::Fig6WidebandRss => wideband_rss_experiment(cfg)?,
        Experiment::Fig7NarrowbandOutage => narrowband_outage(cfg)?,
        Experiment::Fig8WidebandOutage => wideband_outage(cfg)?,
        Experiment::Fig9UplinkOutage => uplink_outage(cfg)?,
        Experiment::TabFrameTiming => frame_timing_table(cfg)?,
        Experiment::TabLinkBudget => link_budget_table(cfg)?,
    };
    if let Some(file) = sink {
        write_records(&records, cfg.format, std::io::BufWriter::new(file))?;
    }
    Ok(records)
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Single-subcarrier gains of `n` independent channels drawn from `tree.child(i)`.
pub fn narrowband_gains(pdp: &PowerDelayProfile, n: usize, tree: &SeedTree) -> Vec<Complex64> {
    let grid = ResponseGrid::new(pdp, &[0.0]);
    (0..n as u64)
        .map(|i| grid.evaluate(&sample_node_channel(pdp, &mut tree.child(i).rng()))[0])
        .collect()
}

/// Runs one algorithm over `trials` realizations. Trial `t` uses channels
/// from `[t, CHANNEL]` and feedback noise from `[t, NOISE]`, shared by all
/// algorithms and settings.
fn adaptation_trials(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    bits: u32,
    snr_db: f64,
    iterations: usize,
) -> Result<Vec<AdaptationTrace>> {
    let p = &cfg.params;
    let pdp = p.pdp()?;
    let config = p.algorithm(algorithm, bits)?;
    let tree = SeedTree::new(cfg.seed);
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let gains = narrowband_gains(&pdp, p.n_nodes, &tree.path(&[t, domain::CHANNEL]));
            let mut rng = tree.path(&[t, domain::NOISE]).rng();
            run_adaptation(&config, &gains, snr_db, iterations, &mut rng)
        })
        .collect()
}

fn evolution(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let name = cfg.experiment.name();
    let mut records = Vec::new();
    for &alg in &p.algorithms {
        let traces = adaptation_trials(cfg, alg, p.feedback_bits, p.snr_db, p.iterations)?;
        let ideal = mean(&traces.iter().map(|t| t.ideal_rss).collect::<Vec<_>>());
        for it in 0..=p.iterations {
            let rss = mean(&traces.iter().map(|t| t.rss_at(it)).collect::<Vec<_>>());
            records.push(
                ResultRecord::new(name, cfg.seed)
                    .param("algorithm", alg)
                    .param("iteration", it)
                    .param("n_nodes", p.n_nodes)
                    .param("snr_db", p.snr_db)
                    .metric("mean_rss", rss)
                    .metric("mean_ideal_rss", ideal)
                    .metric("gain_db", gain_db(rss, p.n_nodes))
                    .metric("gap_db", amplitude_db(rss / ideal)),
            );
        }
    }
    Ok(records)
}

fn quantization_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let mut records = Vec::new();
    for &snr in &p.snr_db_list {
        for &bits in &p.feedback_bits_list {
            for &alg in &p.algorithms {
                let iterations = match alg {
                    Algorithm::Dost => p.training_length_for(p.n_nodes),
                    Algorithm::Sddb => p.n_nodes,
                    _ => p.iterations,
                };
                let traces = adaptation_trials(cfg, alg, bits, snr, iterations)?;
                let rss = mean(&traces.iter().map(|t| t.final_rss()).collect::<Vec<_>>());
                let ideal = mean(&traces.iter().map(|t| t.ideal_rss).collect::<Vec<_>>());
                records.push(
                    ResultRecord::new(cfg.experiment.name(), cfg.seed)
                        .param("algorithm", alg)
                        .param("snr_db", snr)
                        .param("feedback_bits", bits)
                        .param("n_nodes", p.n_nodes)
                        .param("iterations", iterations)
                        .metric("mean_rss", rss)
                        .metric("mean_ideal_rss", ideal)
                        .metric("gain_db", gain_db(rss, p.n_nodes))
                        .metric("gap_db", amplitude_db(rss / ideal)),
                );
            }
        }
    }
    Ok(records)
}

fn quantizer_for(p: &Params, n: usize, snr_db: f64) -> Result<Option<QuantizerSpec>> {
    p.quantizer(p.feedback_bits)
        .resolve(training_sigma(n, noise_variance(snr_db)))
}

struct WidebandTrial {
    comb: Vec<f64>,
    full_average: f64,
    comb_average: f64,
    ideal: Vec<f64>,
    ideal_average: f64,
}

fn wideband_rss_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let ofdm = p.ofdm()?;
    let pdp = p.pdp()?;
    let n = p.n_nodes;
    let comb = comb_grid(&ofdm)?;
    let full = PilotGrid::full(ofdm.n_subcarriers);
    let q = quantizer_for(p, n, p.snr_db)?;
    let length = p.training_length_for(n);
    let tree = SeedTree::new(cfg.seed);
    let trials: Vec<WidebandTrial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let ch_tree = tree.path(&[t, domain::CHANNEL]);
            let channels: Vec<_> = (0..n as u64)
                .map(|i| sample_node_channel(&pdp, &mut ch_tree.child(i).rng()))
                .collect();
            let responses = channel_responses(&channels, &ofdm)?;
            let noise = tree.path(&[t, domain::NOISE]);
            let c = wideband_dost(&channels, &ofdm, &comb, length, p.snr_db, q.as_ref(), &noise)?;
            let f = wideband_dost(&channels, &ofdm, &full, length, p.snr_db, q.as_ref(), &noise)?;
            let rc = wideband_rss_from_responses(&c, &responses)?;
            let rf = wideband_rss_from_responses(&f, &responses)?;
            Ok(WidebandTrial {
                comb_average: rc.average,
                full_average: rf.average,
                ideal_average: rc.ideal_average,
                comb: rc.per_subcarrier,
                ideal: rc.ideal_per_subcarrier,
            })
        })
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&WidebandTrial) -> f64| mean(&trials.iter().map(f).collect::<Vec<_>>());
    let ideal = col(&|t| t.ideal_average);
    let comb_rss = col(&|t| t.comb_average);
    let full_rss = col(&|t| t.full_average);
    let name = cfg.experiment.name();
    let base = |pilots: &str| {
        ResultRecord::new(name, cfg.seed)
            .param("pilots", pilots)
            .param("n_nodes", n)
            .param("snr_db", p.snr_db)
    };
    let mut records = vec![
        base("comb")
            .metric("mean_rss", comb_rss)
            .metric("mean_ideal_rss", ideal)
            .metric("gain_db", gain_db(comb_rss, n))
            .metric("ideal_gain_db", gain_db(ideal, n))
            .metric("gap_db", amplitude_db(comb_rss / ideal)),
        base("full")
            .metric("mean_rss", full_rss)
            .metric("mean_ideal_rss", ideal)
            .metric("gain_db", gain_db(full_rss, n))
            .metric("ideal_gain_db", gain_db(ideal, n))
            .metric("gap_db", amplitude_db(full_rss / ideal)),
        base("comb_vs_full").metric("penalty_db", amplitude_db(full_rss / comb_rss)),
    ];
    if p.per_subcarrier {
        let mut is_pilot = vec![false; ofdm.n_subcarriers];
        for &k in &comb.pilot_indices {
            is_pilot[k] = true;
        }
        for (k, pilot) in is_pilot.iter().enumerate() {
            records.push(
                base("comb")
                    .param("subcarrier", k)
                    .param("interpolated", !pilot)
                    .metric("ideal_rss", col(&|t| t.ideal[k]))
                    .metric("dost_rss", col(&|t| t.comb[k])),
            );
        }
    }
    Ok(records)
}

fn outage_spec(p: &Params, n: usize, trials: usize) -> OutageSpec {
    OutageSpec {
        epsilon: p.epsilon,
        snr_per_node_db: p.snr_db,
        n_nodes: n,
        n_trials: trials,
    }
}

fn narrowband_outage(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let tree = SeedTree::new(cfg.seed);
    p.n_nodes_list
        .iter()
        .map(|&n| {
            let row = narrowband_row(&outage_spec(p, n, cfg.trials), &tree)?;
            Ok(ResultRecord::new(cfg.experiment.name(), cfg.seed)
                .param("n_nodes", n)
                .param("snr_db", p.snr_db)
                .param("epsilon", p.epsilon)
                .metric("ergodic", row.ergodic)
                .metric("outage_mc", row.outage_mc)
                .metric("outage_gaussian", row.outage_gaussian)
                .metric("outage_saa", row.outage_saa))
        })
        .collect()
}

fn wideband_outage(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let ofdm = p.ofdm()?;
    let pdp = p.pdp()?;
    let tree = SeedTree::new(cfg.seed);
    p.n_nodes_list
        .iter()
        .map(|&n| {
            let spec = outage_spec(p, n, cfg.trials);
            spec.validate()?;
            let training = WidebandTraining {
                feedback_bits: (p.feedback_bits > 0).then_some(p.feedback_bits),
                clip_multiplier: p.clip_multiplier,
                training_length: (p.training_length > 0).then_some(p.training_length.max(n)),
            };
            let rates = wideband_rates(&spec, &ofdm, &pdp, &training, &tree)?;
            Ok(ResultRecord::new(cfg.experiment.name(), cfg.seed)
                .param("n_nodes", n)
                .param("snr_db", p.snr_db)
                .param("epsilon", p.epsilon)
                .metric("outage_ideal", wideband_quantile(&rates, CsiMode::Ideal, p.epsilon))
                .metric("outage_dost", wideband_quantile(&rates, CsiMode::Dost, p.epsilon))
                .metric("mean_ideal", mean(&rates.iter().map(|r| r.ideal).collect::<Vec<_>>()))
                .metric("mean_dost", mean(&rates.iter().map(|r| r.dost).collect::<Vec<_>>())))
        })
        .collect()
}

fn check_quantile_trials(p: &Params, trials: usize) -> Result<()> {
    let required = OutageSpec::required_trials(p.epsilon);
    if trials < required {
        return Err(Error::InsufficientTrials {
            epsilon: p.epsilon,
            required,
            trials,
        });
    }
    Ok(())
}

fn uplink_outage(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    check_quantile_trials(p, cfg.trials)?;
    let ofdm = p.ofdm()?;
    let pdp = p.pdp()?;
    let tree = SeedTree::new(cfg.seed);
    p.snr_db_list
        .iter()
        .map(|&snr| {
            let spec = p.uplink(UplinkStrategy::SingleNode, snr);
            let r = rates_from_samples(&uplink_samples(&spec, &ofdm, &pdp, cfg.trials, &tree)?, p.epsilon);
            Ok(ResultRecord::new(cfg.experiment.name(), cfg.seed)
                .param("snr_db", snr)
                .param("n_nodes", p.n_nodes)
                .param("epsilon", p.epsilon)
                .metric("r_single", r.single_node)
                .metric("r_best", r.best_node)
                .metric("r_best_quantile", r.best_node_from_quantile)
                .metric("r_beam", r.receive_beamforming))
        })
        .collect()
}

fn frame_timing_table(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    check_quantile_trials(p, cfg.trials)?;
    let ofdm = p.ofdm()?;
    let pdp = p.pdp()?;
    let spec = p.uplink(UplinkStrategy::SingleNode, p.snr_db);
    let rates = rates_from_samples(
        &uplink_samples(&spec, &ofdm, &pdp, cfg.trials, &SeedTree::new(cfg.seed))?,
        p.epsilon,
    );
    let t_ofdm = ofdm.symbol_duration();
    let name = cfg.experiment.name();
    let mut records = Vec::new();
    let strategies = [
        ("single_node", rates.single_node),
        ("best_node", rates.best_node),
        ("receive_beamforming", rates.receive_beamforming),
        ("unlimited", f64::INFINITY),
    ];
    for (label, rate) in strategies {
        let feedback_rate = rate * p.feedback_bandwidth;
        let t = frame_timing(p.n_nodes, ofdm.n_pilot_subcarriers, feedback_rate, t_ofdm)?;
        records.push(
            ResultRecord::new(name, cfg.seed)
                .param("strategy", label)
                .param("n_nodes", p.n_nodes)
                .param("snr_db", p.snr_db)
                .metric("rate_bps_hz", rate)
                .metric("feedback_rate_bps", feedback_rate)
                .metric("frame_length_ms", t.frame_length * 1e3)
                .metric("coherence_time_ms", t.coherence_time * 1e3),
        );
    }
    for (label, arrangement) in [
        ("comb", PilotArrangement::Comb),
        ("block", PilotArrangement::Block),
        ("grid2d", PilotArrangement::Grid2D),
    ] {
        records.push(
            ResultRecord::new(name, cfg.seed)
                .param("arrangement", label)
                .param("n_nodes", p.n_nodes)
                .metric("training_time_ms", training_time(&ofdm, p.n_nodes, arrangement) * 1e3),
        );
    }
    Ok(records)
}

fn link_budget_table(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = &cfg.params;
    let n = p.n_nodes;
    let mut records = Vec::new();
    for &f in &p.carrier_frequencies {
        let budget = p.link_budget(f);
        for (label, mode) in [
            ("single", GainMode::Single),
            ("power_pooling", GainMode::PowerPooling(n)),
            ("beamforming", GainMode::Beamforming(n)),
        ] {
            let range = hata_range(&budget, p.required_snr_db, mode)?;
            records.push(
                ResultRecord::new(cfg.experiment.name(), cfg.seed)
                    .param("carrier_mhz", f / 1e6)
                    .param("mode", label)
                    .param("n_nodes", n)
                    .param("required_snr_db", p.required_snr_db)
                    .metric("range_km", range)
                    .metric("path_loss_db", budget.path_loss_db(range))
                    .metric("array_gain_db", mode.gain_db()),
            );
        }
    }
    Ok(records)
}
