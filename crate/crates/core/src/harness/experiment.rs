//! Repeats of one experiment: trial alternation, probes, snapshots and
//! output files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::ExperimentConfig;
use super::metrics::{self, MetricsRow, PopulationStats};
use super::snapshot;
use super::stats::final_window_mean;
use super::trial::{run_trial, stability_probe, StabilityTracker, TrialLogs, TrialMode};
use crate::engine::{Engine, StepRecord};
use crate::env::{EnvKind, Environment};
use crate::error::{Error, Result};
use crate::evolution::GaEvent;
use crate::genome::fmt_real;
use crate::rng::Streams;

/// Fraction of exploit trials averaged for final values.
pub const FINAL_WINDOW: f64 = 0.1;

/// Output of one trial.
pub struct TrialOutput {
    pub trial: u64,
    /// Present for exploit trials only.
    pub row: Option<MetricsRow>,
    pub trace: Vec<StepRecord>,
    pub ga_events: Vec<GaEvent>,
}

/// One independent run of an experiment.
pub struct Repeat {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub engine: Engine,
    pub env: Box<dyn Environment + Send>,
    pub streams: Streams,
    /// Index of the next trial; even indices explore, odd ones exploit.
    pub next_trial: u64,
    pub stability: StabilityTracker,
}

impl Repeat {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let env = config.make_env();
        let engine = Engine::new(config.engine.clone(), config.network_spec(env.state_dim()), env.decoder())?;
        Ok(Repeat {
            config: config.clone(),
            seed,
            engine,
            env,
            streams: Streams::new(seed),
            next_trial: 0,
            stability: StabilityTracker::default(),
        })
    }

    pub fn finished(&self) -> bool {
        self.next_trial >= self.config.trials
    }

    fn probing(&self) -> bool {
        self.config.stability_probe && self.config.env == EnvKind::GridWorld
    }

    pub fn step(&mut self) -> Result<TrialOutput> {
        let t = self.next_trial;
        let exploit = t % 2 == 1;
        let mode = if exploit { TrialMode::EXPLOIT } else { TrialMode::EXPLORE };
        self.env.reset(&mut self.streams.env);
        let mut trace = Vec::new();
        let mut ga_events = Vec::new();
        let logs = TrialLogs {
            trace: (exploit && self.config.trajectory).then_some(&mut trace),
            ga: self.config.ga_log.then_some(&mut ga_events),
        };
        let r = run_trial(&mut self.engine, self.env.as_mut(), mode, t, &mut self.streams, logs)?;
        self.next_trial += 1;
        let row = if exploit {
            let probe_steps = if self.probing() {
                let steps = stability_probe(
                    &self.engine,
                    self.config.grid_step,
                    self.config.grid_noise,
                    &mut self.streams.probe,
                )?;
                let optimal = steps == StabilityTracker::optimum(self.config.grid_step);
                self.stability.record(t, optimal, self.config.stability_streak);
                Some(steps)
            } else {
                None
            };
            Some(MetricsRow {
                trial: t,
                phase: "exploit",
                macro_steps: r.macro_steps,
                atomic_steps: r.atomic_steps,
                reward: r.reward,
                success: r.success,
                probe_steps,
                population: PopulationStats::of(&self.engine.population),
            })
        } else {
            None
        };
        Ok(TrialOutput { trial: t, row, trace, ga_events })
    }

    /// Run every remaining trial and return the exploit rows.
    pub fn run_to_end(&mut self) -> Result<Vec<MetricsRow>> {
        let mut rows = Vec::new();
        while !self.finished() {
            if let Some(r) = self.step()?.row {
                rows.push(r);
            }
        }
        Ok(rows)
    }

    pub fn snapshot(&self) -> String {
        let s = &self.stability;
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        let mut header = vec![
            ("trial".to_string(), self.next_trial.to_string()),
            ("config".to_string(), self.config.digest()),
            ("repr".to_string(), self.config.representation.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("next_id".to_string(), self.engine.population.next_id().to_string()),
            ("stability".to_string(), format!("{},{},{}", s.streak, opt(s.streak_start), opt(s.stable_at))),
        ];
        for label in Streams::LABELS {
            header.push((format!("rng.{label}"), self.streams.encode(label).expect("known label")));
        }
        snapshot::render(&header, &self.engine.population)
    }

    /// Rebuild a repeat from a snapshot taken under the same configuration.
    pub fn resume(config: &ExperimentConfig, text: &str) -> Result<Self> {
        let parsed = snapshot::parse(text)?;
        let get = |k: &str| {
            parsed
                .header
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::config(format!("snapshot lacks `{k}`")))
        };
        if get("config")? != config.digest() {
            return Err(Error::config("snapshot was taken under a different configuration"));
        }
        let seed: u64 = get("seed")?.parse().map_err(|_| Error::config("bad seed"))?;
        let mut rep = Repeat::new(config, seed)?;
        rep.next_trial = get("trial")?.parse().map_err(|_| Error::config("bad trial"))?;
        let st: Vec<&str> = get("stability")?.split(',').collect();
        if st.len() != 3 {
            return Err(Error::config("bad stability field"));
        }
        let opt = |v: &str| -> Result<Option<u64>> {
            if v == "-" {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| Error::config("bad stability field"))
            }
        };
        rep.stability = StabilityTracker {
            streak: st[0].parse().map_err(|_| Error::config("bad stability field"))?,
            streak_start: opt(st[1])?,
            stable_at: opt(st[2])?,
        };
        for label in Streams::LABELS {
            rep.streams.restore(label, get(&format!("rng.{label}"))?)?;
        }
        rep.engine.population = parsed.population;
        Ok(rep)
    }
}

/// Summary of one finished repeat.
#[derive(Clone, Debug)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub stable_at: Option<u64>,
}

impl RepeatOutcome {
    pub fn final_mean(&self, f: impl Fn(&MetricsRow) -> f64) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().map(f).collect();
        final_window_mean(&v, FINAL_WINDOW)
    }
}

fn write_trace(out: &mut impl Write, trial: u64, trace: &[StepRecord]) -> std::io::Result<()> {
    for s in trace {
        let join = |v: &[f64]| v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(";");
        writeln!(
            out,
            "{trial},{},{},{},{},{},{}",
            s.macro_step,
            s.step,
            join(&s.true_state),
            join(&s.sensed),
            s.action,
            s.reward
        )?;
    }
    Ok(())
}

/// Run one repeat, writing metrics, snapshots and optional logs to `dir`.
pub fn run_repeat(config: &ExperimentConfig, seed: u64, dir: &Path) -> Result<RepeatOutcome> {
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps)?;
    let mut rep = Repeat::new(config, seed)?;
    let mut trajectory = if config.trajectory {
        let mut w = BufWriter::new(fs::File::create(dir.join("trajectory.csv"))?);
        writeln!(w, "trial,macro_step,step,true_state,sensed_state,action,reward")?;
        Some(w)
    } else {
        None
    };
    let mut ga_log =
        if config.ga_log { Some(BufWriter::new(fs::File::create(dir.join("ga_events.log"))?)) } else { None };
    let mut rows = Vec::new();
    while !rep.finished() {
        let out = rep.step()?;
        if let Some(w) = trajectory.as_mut() {
            write_trace(w, out.trial, &out.trace)?;
        }
        if let Some(w) = ga_log.as_mut() {
            for ev in &out.ga_events {
                writeln!(w, "{}", ev.to_record())?;
            }
        }
        if let Some(r) = out.row {
            rows.push(r);
        }
        if rep.next_trial % config.snapshot_period == 0 {
            fs::write(snaps.join(format!("trial-{:06}.snap", rep.next_trial)), rep.snapshot())?;
        }
    }
    if let Some(mut w) = trajectory {
        w.flush()?;
    }
    if let Some(mut w) = ga_log {
        w.flush()?;
    }
    fs::write(dir.join("metrics.csv"), metrics::render(&config.digest(), &rows))?;
    Ok(RepeatOutcome { seed, rows, stable_at: rep.stability.stable_at })
}

pub fn repeat_dir(out_dir: &Path, k: u32) -> PathBuf {
    out_dir.join(format!("repeat-{k:02}"))
}

/// Marker left behind when an experiment stops early.
pub const PARTIAL_MARKER: &str = "PARTIAL";

/// Run all repeats (in parallel) with seeds `seed + k`, then write the
/// aggregate and summary files.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RepeatOutcome>> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let marker = out_dir.join(PARTIAL_MARKER);
    fs::write(&marker, "running\n")?;
    let result = run_all(config, out_dir);
    match &result {
        Ok(_) => fs::remove_file(&marker)?,
        Err(e) => fs::write(&marker, format!("{e}\n"))?,
    }
    result
}

fn run_all(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RepeatOutcome>> {
    fs::write(out_dir.join("config.txt"), config.to_text())?;
    let n = config.repeats as usize;
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RepeatOutcome>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= n {
                    break;
                }
                let seed = config.seed.wrapping_add(k as u64);
                let r = run_repeat(config, seed, &repeat_dir(out_dir, k as u32));
                results.lock().expect("no poisoned workers")[k] = Some(r);
            });
        }
    });
    let outcomes = results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every repeat ran"))
        .collect::<Result<Vec<_>>>()?;
    let digest = config.digest();
    let all_rows: Vec<Vec<MetricsRow>> = outcomes.iter().map(|o| o.rows.clone()).collect();
    fs::write(out_dir.join("aggregate.csv"), metrics::aggregate(&digest, &all_rows))?;
    let mut summary =
        format!("{}\nrepeat,seed,final_macro_steps,final_success,stable_at\n", metrics::header_comment(&digest));
    for (k, o) in outcomes.iter().enumerate() {
        let fm = o.final_mean(|r| r.macro_steps as f64).map_or(String::new(), |v| v.to_string());
        let fs_ = o.final_mean(|r| r.success as u8 as f64).map_or(String::new(), |v| v.to_string());
        let st = o.stable_at.map_or("not attained".to_string(), |v| v.to_string());
        summary.push_str(&format!("{k},{},{fm},{fs_},{st}\n", o.seed));
    }
    fs::write(out_dir.join("summary.csv"), summary)?;
    Ok(outcomes)
}
