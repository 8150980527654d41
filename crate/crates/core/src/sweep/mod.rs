//! Experiment harness: configuration, the bundled presets, sweep
//! evaluation and CSV output.

mod config;
mod run;

pub use config::{parse_experiment, parse_mode_list, parse_sweep, Axis, Experiment, Mode, SweepGrid};
pub use run::{
    evaluate_sweep, gnuplot_script, run_sweep, write_sweep_csv, write_table2_csv, SweepRow, CSV_HEADER,
    TABLE2_HEADER,
};

use crate::error::{Error, Result};

/// A configuration shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

impl Preset {
    pub fn experiment(&self) -> Result<Experiment> {
        parse_experiment(self.source)
    }

    /// The `description` line of the preset.
    pub fn description(&self) -> String {
        match toml::from_str::<toml::Table>(self.source) {
            Ok(t) => t.get("description").and_then(|v| v.as_str()).unwrap_or_default().to_string(),
            Err(_) => String::new(),
        }
    }
}

macro_rules! preset {
    ($name:literal) => {
        Preset { name: $name, source: include_str!(concat!("../../presets/", $name, ".toml")) }
    };
}

pub const PRESETS: [Preset; 8] = [
    preset!("fig1-n5"),
    preset!("fig1-n10"),
    preset!("fig2-5m"),
    preset!("fig2-8m"),
    preset!("fig3-128db-30m"),
    preset!("fig3-128db-45m"),
    preset!("fig3-110db-15m"),
    preset!("table2"),
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in &PRESETS {
            let e = p.experiment().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            if let Experiment::Sweep(g) = e {
                assert_eq!(g.name, p.name);
            }
            assert!(!p.description().is_empty(), "{}", p.name);
        }
        assert!(preset("fig9").is_err());
    }
}
