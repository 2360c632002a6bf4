//! Strategy comparison relative to the baseline run, in the layout of the
//! wake-energy and turbine-performance tables.

use std::fmt::Write as _;

use crate::analysis::stats::{pitch_activity, relative_delta, series_stats};
use crate::error::{Error, Result};
use crate::excitation::StrategyKind;
use crate::scenario::ScenarioRun;

pub const REPORT_COLUMNS: [&str; 11] = [
    "strategy",
    "energy_3d_pct",
    "energy_5d_pct",
    "energy_7d_pct",
    "power_mean_pct",
    "power_var_pct",
    "thrust_mean_pct",
    "thrust_var_pct",
    "moment_mean_pct",
    "moment_var_pct",
    "pitch_activity_deg_s",
];

/// Row labels of the merged text table, one per metric column.
const TABLE_ROWS: [&str; 10] = [
    "Energy at 3D",
    "Energy at 5D",
    "Energy at 7D",
    "Power capture",
    "Variance of power",
    "Thrust force",
    "Variance of thrust",
    "Moment on blades (blade-1 flapwise)",
    "Variance of moment",
    "Pitch activity [deg/s]",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub strategy: StrategyKind,
    /// Streamtube energy change at 3D, 5D, 7D, percent.
    pub energy: [f64; 3],
    pub power_mean: f64,
    pub power_var: f64,
    pub thrust_mean: f64,
    pub thrust_var: f64,
    pub moment_mean: f64,
    pub moment_var: f64,
    /// Absolute mean pitch rate, deg/s.
    pub pitch_activity: f64,
}

impl MetricsRow {
    pub fn zero(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            energy: [0.0; 3],
            power_mean: 0.0,
            power_var: 0.0,
            thrust_mean: 0.0,
            thrust_var: 0.0,
            moment_mean: 0.0,
            moment_var: 0.0,
            pitch_activity: 0.0,
        }
    }

    pub fn metrics(&self) -> [f64; 10] {
        [
            self.energy[0],
            self.energy[1],
            self.energy[2],
            self.power_mean,
            self.power_var,
            self.thrust_mean,
            self.thrust_var,
            self.moment_mean,
            self.moment_var,
            self.pitch_activity,
        ]
    }

    fn from_metrics(strategy: StrategyKind, m: [f64; 10]) -> Self {
        Self {
            strategy,
            energy: [m[0], m[1], m[2]],
            power_mean: m[3],
            power_var: m[4],
            thrust_mean: m[5],
            thrust_var: m[6],
            moment_mean: m[7],
            moment_var: m[8],
            pitch_activity: m[9],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
}

/// Column order of the results table: DIPC variants first, then the
/// induction strategies.
fn table_rank(kind: StrategyKind) -> usize {
    match kind {
        StrategyKind::Baseline => 0,
        StrategyKind::YawDipc => 1,
        StrategyKind::TiltDipc => 2,
        StrategyKind::HelixCcw => 3,
        StrategyKind::HelixCw => 4,
        StrategyKind::Dic => 5,
        StrategyKind::Sic => 6,
    }
}

/// Builds the report. `f_e` is the excitation frequency (Hz) used to check
/// the series length for pitch activity.
pub fn build_report(runs: &[ScenarioRun], ambient_ti: f64, f_e: f64) -> Result<MetricsReport> {
    let baseline = runs
        .iter()
        .find(|r| r.strategy.kind == StrategyKind::Baseline)
        .ok_or_else(|| Error::invalid("strategies", "a baseline run is required"))?;
    let base_energy = baseline.wake.mean_energy();

    let mut rows = Vec::with_capacity(runs.len());
    for run in runs {
        if run.strategy.kind == StrategyKind::Baseline {
            let mut row = MetricsRow::zero(StrategyKind::Baseline);
            row.pitch_activity = pitch_activity(&run.series, f_e)?;
            rows.push(row);
            continue;
        }
        if (run.wake.window_start - baseline.wake.window_start).abs() > 1e-9 {
            return Err(Error::invalid("runs", "analysis windows differ between runs"));
        }
        let stats = series_stats(&run.series, &baseline.series, run.wake.window_start, ambient_ti)?;
        let energy = run.wake.mean_energy();
        rows.push(MetricsRow {
            strategy: run.strategy.kind,
            energy: [0, 1, 2].map(|i| relative_delta(energy[i], base_energy[i])),
            power_mean: stats.power.mean,
            power_var: stats.power.variance,
            thrust_mean: stats.thrust.mean,
            thrust_var: stats.thrust.variance,
            moment_mean: stats.moment.mean,
            moment_var: stats.moment.variance,
            pitch_activity: pitch_activity(&run.series, f_e)?,
        });
    }
    rows.sort_by_key(|r| table_rank(r.strategy));
    rows.dedup_by_key(|r| r.strategy);
    Ok(MetricsReport { rows })
}

impl MetricsReport {
    pub fn row(&self, kind: StrategyKind) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.strategy == kind)
    }

    /// CSV payload, one row per strategy. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_csv(&self, comments: &[String]) -> Result<String> {
        let mut out = String::new();
        for c in comments {
            writeln!(out, "# {c}").expect("write to string");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_COLUMNS)?;
        for row in &self.rows {
            let mut rec = vec![row.strategy.name().to_string()];
            rec.extend(row.metrics().iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().ne(REPORT_COLUMNS.iter().copied()) {
            return Err(Error::parse(1, format!("unexpected report header `{}`", header.iter().collect::<Vec<_>>().join(","))));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != REPORT_COLUMNS.len() {
                return Err(Error::parse(line, format!("expected {} fields, got {}", REPORT_COLUMNS.len(), rec.len())));
            }
            let strategy = rec[0]
                .parse::<StrategyKind>()
                .map_err(|e| Error::parse(line, e.to_string()))?;
            let mut m = [0.0; 10];
            for (i, slot) in m.iter_mut().enumerate() {
                *slot = rec[i + 1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad number `{}` in column {}", &rec[i + 1], REPORT_COLUMNS[i + 1])))?;
            }
            rows.push(MetricsRow::from_metrics(strategy, m));
        }
        Ok(Self { rows })
    }

    /// Aligned text table: metrics as rows, strategies as columns.
    pub fn to_table(&self) -> String {
        let mut cols: Vec<&MetricsRow> = self
            .rows
            .iter()
            .filter(|r| r.strategy != StrategyKind::Baseline)
            .collect();
        if cols.is_empty() {
            cols = self.rows.iter().collect();
        }
        let label_w = TABLE_ROWS.iter().map(|s| s.len()).max().unwrap_or(0);
        let col_w = cols.iter().map(|r| r.strategy.label().len()).max().unwrap_or(0).max(9);

        let mut out = String::new();
        write!(out, "{:<label_w$}", "").unwrap();
        for c in &cols {
            write!(out, " | {:>col_w$}", c.strategy.label()).unwrap();
        }
        out.push('\n');
        out.push_str(&"-".repeat(label_w + cols.len() * (col_w + 3)));
        out.push('\n');
        for (i, label) in TABLE_ROWS.iter().enumerate() {
            write!(out, "{label:<label_w$}").unwrap();
            for c in &cols {
                let v = c.metrics()[i];
                let cell = if i == 9 {
                    format!("{v:.2}")
                } else {
                    format!("{v:+.1}%")
                };
                write!(out, " | {cell:>col_w$}").unwrap();
            }
            out.push('\n');
            if i == 2 {
                out.push_str(&"-".repeat(label_w + cols.len() * (col_w + 3)));
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> MetricsReport {
        let mut helix = MetricsRow::zero(StrategyKind::HelixCcw);
        helix.energy = [4.1, 10.7, 15.25];
        helix.power_mean = -2.3;
        helix.moment_var = 423.0 / 3.0;
        helix.pitch_activity = 1.6794;
        MetricsReport {
            rows: vec![MetricsRow::zero(StrategyKind::Baseline), helix],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let report = sample_report();
        let text = report.to_csv(&["config-hash: abc".into()]).unwrap();
        assert!(text.starts_with("# config-hash: abc\nstrategy,"));
        assert_eq!(MetricsReport::from_csv(&text).unwrap(), report);
    }

    #[test]
    fn csv_rejects_bad_payloads() {
        assert!(MetricsReport::from_csv("a,b\n1,2\n").is_err());
        let mut text = sample_report().to_csv(&[]).unwrap();
        text.push_str("helix-ccw,1,2\n");
        assert!(MetricsReport::from_csv(&text).is_err());
        let bad = sample_report().to_csv(&[]).unwrap().replace("10.7", "ten");
        assert!(MetricsReport::from_csv(&bad).is_err());
    }

    #[test]
    fn table_layout() {
        let table = sample_report().to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].contains("CCW Helix") && !lines[0].contains("Baseline"));
        assert!(table.contains("Energy at 5D") && table.contains("+10.7%"));
        assert!(table.contains("Pitch activity [deg/s]") && table.contains("1.68"));
    }

    #[test]
    fn baseline_only_table_has_baseline_column() {
        let report = MetricsReport {
            rows: vec![MetricsRow::zero(StrategyKind::Baseline)],
        };
        assert!(report.to_table().contains("Baseline"));
    }
}
