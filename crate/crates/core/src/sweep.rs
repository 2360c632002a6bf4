//! Exhaustive Strouhal × amplitude grid search.
//!
//! ```toml
//! strategy = "helix-ccw"
//! objective = "energy-5d"
//! strouhal = { min = 0.05, max = 0.6, count = 12 }
//! amplitude = { min = 0.0, max = 2.5, count = 3 }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::stats::{relative_delta, series_stats};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::excitation::StrategyKind;
use crate::scenario::{Scenario, ScenarioRun};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "HELIXWAKE_THREADS";

pub const SWEEP_COLUMNS: [&str; 8] = [
    "rank",
    "strouhal",
    "amplitude_deg",
    "objective",
    "power_delta_pct",
    "energy_3d_pct",
    "energy_5d_pct",
    "energy_7d_pct",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        crate::error::ensure_finite(&format!("{name}.min"), self.min)?;
        crate::error::ensure_finite(&format!("{name}.max"), self.max)?;
        if self.count == 0 {
            return Err(Error::invalid(format!("{name}.count"), "grid must not be empty"));
        }
        if self.count > MAX_AXIS_POINTS {
            return Err(Error::invalid(format!("{name}.count"), format!("at most {MAX_AXIS_POINTS} points")));
        }
        if self.count == 1 {
            if self.min > self.max {
                return Err(Error::invalid(name, format!("min {} > max {}", self.min, self.max)));
            }
        } else if self.min >= self.max {
            return Err(Error::invalid(name, format!("min {} must be < max {}", self.min, self.max)));
        }
        Ok(())
    }

    /// Evenly spaced points including both ends; a single point sits at `min`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * (i as f64 / last))
            .collect()
    }
}

const MAX_AXIS_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[serde(rename = "energy-3d")]
    Energy3D,
    #[serde(rename = "energy-5d")]
    Energy5D,
    #[serde(rename = "energy-7d")]
    Energy7D,
    /// Energy gain at 5D plus `penalty_weight` times the (negative) power change.
    Penalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub strategy: StrategyKind,
    pub strouhal: GridAxis,
    /// Excitation amplitude grid, deg.
    pub amplitude: GridAxis,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    /// λ of the penalized objective.
    #[serde(default)]
    pub penalty_weight: f64,
    /// Excitation periods simulated after spin-up at every grid point.
    #[serde(default = "default_periods")]
    pub periods: f64,
}

fn default_objective() -> Objective {
    Objective::Energy5D
}

fn default_periods() -> f64 {
    10.0
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep spec serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.strouhal.validate("strouhal")?;
        self.amplitude.validate("amplitude")?;
        if self.strouhal.min <= 0.0 {
            return Err(Error::invalid("strouhal.min", "must be > 0"));
        }
        if self.amplitude.min < 0.0 {
            return Err(Error::invalid("amplitude.min", "must be >= 0"));
        }
        ensure_non_negative("penalty_weight", self.penalty_weight)?;
        ensure_positive("periods", self.periods)?;
        if self.periods < 10.0 {
            return Err(Error::invalid("periods", "at least 10 excitation periods are required"));
        }
        Ok(())
    }

    /// Grid points in `(St, A)` order, amplitude varying fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let amps = self.amplitude.values();
        self.strouhal
            .values()
            .into_iter()
            .flat_map(|st| amps.iter().map(move |&a| (st, a)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub strouhal: f64,
    pub amplitude: f64,
    pub objective: f64,
    pub power_delta: f64,
    /// Streamtube energy change at 3D, 5D, 7D, percent.
    pub energy_delta: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub strouhal: f64,
    pub amplitude: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ranked, best first.
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
}

/// Scenario for one grid point, long enough for the requested periods.
pub fn point_scenario(base: &Scenario, spec: &SweepSpec, strouhal: f64, amplitude: f64) -> Result<Scenario> {
    let mut s = base.clone();
    s.excitation.strouhal = strouhal;
    s.excitation.amplitude = amplitude;
    s.duration = s.duration.max(s.minimum_duration(spec.periods)?);
    Ok(s)
}

fn evaluate(spec: &SweepSpec, run: &ScenarioRun, baseline: &ScenarioRun, ti: f64) -> Result<SweepPoint> {
    let stats = series_stats(&run.series, &baseline.series, run.wake.window_start, ti)?;
    let (e, b) = (run.wake.mean_energy(), baseline.wake.mean_energy());
    let energy_delta = [0, 1, 2].map(|i| relative_delta(e[i], b[i]));
    let objective = match spec.objective {
        Objective::Energy3D => energy_delta[0],
        Objective::Energy5D => energy_delta[1],
        Objective::Energy7D => energy_delta[2],
        Objective::Penalized => energy_delta[1] + spec.penalty_weight * stats.power.mean,
    };
    if !objective.is_finite() {
        return Err(Error::ModelValidity(format!("non-finite objective {objective}")));
    }
    Ok(SweepPoint {
        strouhal: run.strategy.excitation.strouhal,
        amplitude: run.strategy.excitation.amplitude,
        objective,
        power_delta: stats.power.mean,
        energy_delta,
    })
}

/// Descending objective; ties go to the lower amplitude, then the lower St.
pub fn rank(points: &mut [SweepPoint]) {
    points.sort_by(|a, b| {
        b.objective
            .total_cmp(&a.objective)
            .then(a.amplitude.total_cmp(&b.amplitude))
            .then(a.strouhal.total_cmp(&b.strouhal))
    });
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a pool honouring [`THREADS_ENV`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(THREADS_ENV, e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_sweep(spec: &SweepSpec, base: &Scenario) -> Result<SweepResult> {
    spec.validate()?;
    base.validate()?;
    let points = spec.points();

    // Baselines shared by all points with the same sampling window.
    let mut windows: BTreeMap<(u64, u64), Scenario> = BTreeMap::new();
    let mut prepared = Vec::with_capacity(points.len());
    for &(st, a) in &points {
        let prep = point_scenario(base, spec, st, a).and_then(|s| {
            let key = (s.duration.to_bits(), s.window_start()?.to_bits());
            windows.entry(key).or_insert_with(|| s.clone());
            Ok((s, key))
        });
        prepared.push(prep);
    }

    let windows: Vec<((u64, u64), Scenario)> = windows.into_iter().collect();
    let outcomes = with_pool(|| {
        let baselines: Vec<((u64, u64), Result<ScenarioRun>)> = windows
            .par_iter()
            .map(|(key, s)| (*key, s.run(StrategyKind::Baseline)))
            .collect();
        let baselines: BTreeMap<_, _> = baselines.into_iter().collect();
        prepared
            .par_iter()
            .map(|prep| {
                let (s, key) = prep.as_ref().map_err(|e| Error::ModelValidity(e.to_string()))?;
                let baseline = baselines[key].as_ref().map_err(|e| Error::ModelValidity(format!("baseline: {e}")))?;
                let run = s.run(spec.strategy)?;
                evaluate(spec, &run, baseline, s.flow.turbulence_intensity)
            })
            .collect::<Vec<Result<SweepPoint>>>()
    })?;

    let mut result = SweepResult {
        points: Vec::new(),
        failures: Vec::new(),
    };
    for (&(st, a), outcome) in points.iter().zip(outcomes) {
        match outcome {
            Ok(p) => result.points.push(p),
            Err(e) => result.failures.push(SweepFailure {
                strouhal: st,
                amplitude: a,
                message: e.to_string(),
            }),
        }
    }
    rank(&mut result.points);
    Ok(result)
}

impl SweepResult {
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points.first()
    }

    /// CSV with the spec and `comments` echoed as `#` lines and failed
    /// points appended as `# failed:` annotations.
    pub fn to_csv(&self, spec: &SweepSpec, comments: &[String]) -> Result<String> {
        let mut out = String::new();
        for c in comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "# sweep spec:").unwrap();
        for line in spec.to_toml().lines() {
            writeln!(out, "#   {line}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SWEEP_COLUMNS)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(
                [p.strouhal, p.amplitude, p.objective, p.power_delta, p.energy_delta[0], p.energy_delta[1], p.energy_delta[2]]
                    .iter()
                    .map(|v| v.to_string()),
            );
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        for f in &self.failures {
            writeln!(out, "# failed: strouhal={} amplitude={}: {}", f.strouhal, f.amplitude, f.message.replace('\n', " ")).unwrap();
        }
        Ok(out)
    }

    /// Parses the ranked rows of [`SweepResult::to_csv`]; annotations are ignored.
    pub fn points_from_csv(text: &str) -> Result<Vec<SweepPoint>> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().ne(SWEEP_COLUMNS.iter().copied()) {
            return Err(Error::parse(1, "unexpected sweep header"));
        }
        let mut points = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != SWEEP_COLUMNS.len() {
                return Err(Error::parse(line, format!("expected {} fields", SWEEP_COLUMNS.len())));
            }
            let mut v = [0.0; 7];
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = rec[i + 1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad number in column {}", SWEEP_COLUMNS[i + 1])))?;
            }
            points.push(SweepPoint {
                strouhal: v[0],
                amplitude: v[1],
                objective: v[2],
                power_delta: v[3],
                energy_delta: [v[4], v[5], v[6]],
            });
        }
        Ok(points)
    }
}
