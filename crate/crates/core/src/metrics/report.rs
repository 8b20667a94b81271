use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::Model;
use crate::scenario::{Phase, Population, RiskLabel};

/// Column key of one report cell (the model is the row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReportKey {
    pub model: Model,
    pub population: Population,
    pub scenario: RiskLabel,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetRecord {
    pub rater_id: String,
    pub scenario_id: String,
    pub population: Population,
    pub delta: f64,
    pub onset: bool,
}

/// Per-phase RMSE of every evaluated condition plus onset flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: BTreeMap<ReportKey, f64>,
    pub onsets: Vec<OnsetRecord>,
}

const SCENARIOS: [RiskLabel; 2] = [RiskLabel::Hrs, RiskLabel::Lrs];

impl EvalReport {
    pub fn insert(&mut self, key: ReportKey, rmse: f64) {
        self.rmse.insert(key, rmse);
    }

    /// Table-shaped CSV: one row per model, one column per
    /// population/scenario/phase. Missing cells are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["model".to_string()];
        for pop in Population::ALL {
            for sc in SCENARIOS {
                for ph in Phase::SCORED {
                    header.push(format!("{pop}/{sc}/{ph}"));
                }
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for model in Model::ALL {
            let mut row = vec![model.to_string()];
            for population in Population::ALL {
                for scenario in SCENARIOS {
                    for phase in Phase::SCORED {
                        let key = ReportKey {
                            model,
                            population,
                            scenario,
                            phase,
                        };
                        row.push(
                            self.rmse
                                .get(&key)
                                .map(|v| format!("{v:.6}"))
                                .unwrap_or_default(),
                        );
                    }
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn onset_fraction(&self) -> Option<f64> {
        if self.onsets.is_empty() {
            return None;
        }
        let hits = self.onsets.iter().filter(|o| o.onset).count();
        Some(hits as f64 / self.onsets.len() as f64)
    }

    pub fn write_onset_summary<W: Write>(&self, mut w: W, threshold: f64) -> std::io::Result<()> {
        writeln!(w, "rater_id,scenario_id,population,delta,onset")?;
        for o in &self.onsets {
            writeln!(
                w,
                "{},{},{},{:.6},{}",
                o.rater_id, o.scenario_id, o.population, o.delta, o.onset
            )?;
        }
        if let Some(f) = self.onset_fraction() {
            writeln!(w, "# threshold {threshold}, onset fraction: {f:.2}")?;
        }
        Ok(())
    }
}
