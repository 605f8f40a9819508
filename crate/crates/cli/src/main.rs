//! `dbs`: runs catalog experiments and writes their records as CSV or JSON.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use dbs_core::harness::{
    catalog_listing, parse_assignment, parse_config_file, write_records, Experiment, ExperimentConfig,
    OutputFormat, Params,
};
use dbs_core::run_experiment;

fn run_command() -> Command {
    let mut cmd = Command::new("run")
        .about("Run one experiment")
        .arg(Arg::new("experiment").help("catalog name (see `dbs list`)"))
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_parser(value_parser!(PathBuf))
                .help("flat TOML file of key = value settings; flags override it"),
        )
        .arg(Arg::new("seed").long("seed").help("master seed"))
        .arg(Arg::new("trials").long("trials").help("Monte Carlo realizations"))
        .arg(
            Arg::new("output")
                .long("out")
                .short('o')
                .help("output file; records go to stdout when absent"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .help("csv or json; inferred from a .json output path"),
        )
        .arg(
            Arg::new("set")
                .long("set")
                .short('s')
                .action(ArgAction::Append)
                .value_name("KEY=VALUE")
                .help("override any configuration key"),
        );
    for key in Params::KEYS {
        cmd = cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .hide_short_help(true),
        );
    }
    cmd
}

fn cli() -> Command {
    Command::new("dbs")
        .about("Distributed transmit beamforming experiments")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(Command::new("list").about("Print the experiment catalog with default parameters"))
        .subcommand(run_command())
}

/// Flag assignments in command-line order so later flags win.
fn flag_assignments(m: &ArgMatches) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    let direct = ["seed", "trials", "output", "format"].into_iter().chain(Params::KEYS.iter().copied());
    for key in direct {
        if let (Some(values), Some(indices)) = (m.get_many::<String>(key), m.indices_of(key)) {
            for (v, i) in values.zip(indices) {
                out.push((i, key.to_string(), v.clone()));
            }
        }
    }
    if let (Some(values), Some(indices)) = (m.get_many::<String>("set"), m.indices_of("set")) {
        for (v, i) in values.zip(indices) {
            let (k, v) = parse_assignment(v)?;
            out.push((i, k, v));
        }
    }
    out.sort_by_key(|(i, _, _)| *i);
    Ok(out.into_iter().map(|(_, k, v)| (k, v)).collect())
}

fn build_config(m: &ArgMatches) -> Result<ExperimentConfig> {
    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(parse_config_file(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let named = m.get_one::<String>("experiment").map(|s| s.parse::<Experiment>()).transpose()?;
    let experiment = match (named, file.as_ref().and_then(|f| f.experiment)) {
        (Some(a), Some(b)) if a != b => bail!("command line names {a} but the config file is for {b}"),
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) => bail!("no experiment given; run `dbs list` for the catalog"),
    };
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(file) = &file {
        cfg.apply(file.entries.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    }
    let flags = flag_assignments(m)?;
    cfg.apply(flags.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let format_given = file.iter().flat_map(|f| &f.entries).chain(&flags).any(|(k, _)| k == "format");
    if !format_given && cfg.output_path.as_deref().is_some_and(is_json_path) {
        cfg.format = OutputFormat::Json;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_json_path(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn run(m: &ArgMatches) -> Result<()> {
    let cfg = build_config(m)?;
    let records = run_experiment(&cfg).with_context(|| format!("running {}", cfg.experiment))?;
    match &cfg.output_path {
        Some(path) => eprintln!("{}: {} records written to {}", cfg.experiment, records.len(), path.display()),
        None => {
            let stdout = io::stdout().lock();
            write_records(&records, cfg.format, stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("list", _)) => io::stdout()
            .lock()
            .write_all(catalog_listing().as_bytes())
            .map_err(Into::into),
        Some(("run", m)) => run(m),
        _ => unreachable!("subcommand_required"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig> {
        let m = cli().try_get_matches_from(args)?;
        build_config(m.subcommand_matches("run").unwrap())
    }

    #[test]
    fn command_is_well_formed() {
        cli().debug_assert();
    }

    #[test]
    fn every_key_has_a_flag() {
        let cfg = parse(&["dbs", "run", "fig6-wideband-rss", "--n_nodes", "12", "--snr_db", "-3"]).unwrap();
        assert_eq!(cfg.params.n_nodes, 12);
        assert_eq!(cfg.params.snr_db, -3.0);
    }

    #[test]
    fn later_flags_win() {
        let cfg = parse(&["dbs", "run", "fig6-wideband-rss", "--n_nodes", "12", "--set", "n_nodes=7"]).unwrap();
        assert_eq!(cfg.params.n_nodes, 7);
        let cfg = parse(&["dbs", "run", "fig6-wideband-rss", "--set", "n_nodes=7", "--n_nodes", "12"]).unwrap();
        assert_eq!(cfg.params.n_nodes, 12);
    }

    #[test]
    fn json_inferred_from_extension() {
        let cfg = parse(&["dbs", "run", "tab-link-budget", "--out", "x.JSON"]).unwrap();
        assert_eq!(cfg.format, OutputFormat::Json);
        let cfg = parse(&["dbs", "run", "tab-link-budget", "--out", "x.json", "--format", "csv"]).unwrap();
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse(&["dbs", "run", "fig5"]).is_err());
        assert!(parse(&["dbs", "run"]).is_err());
        assert!(parse(&["dbs", "run", "fig7-narrowband-outage", "--epsilon", "1.5"]).is_err());
        assert!(parse(&["dbs", "run", "fig7-narrowband-outage", "--set", "bogus=1"]).is_err());
        assert!(parse(&["dbs", "run", "fig7-narrowband-outage", "--set", "n_nodes"]).is_err());
    }
}
