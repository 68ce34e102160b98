//! Experiment configuration as flat `key=value` text.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::engine::EngineParams;
use crate::env::grid_world::DEFAULT_NOISE;
use crate::env::{EnvKind, Environment, GridWorld, MountainCar, RobotArena};
use crate::error::{Error, Result};
use crate::genome::{fmt_real, NetworkSpec, Representation};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub representation: Representation,
    pub seed: u64,
    pub repeats: u32,
    /// Total trials, explore and exploit together.
    pub trials: u64,
    pub hidden: usize,
    pub density: f64,
    pub grid_step: f64,
    pub grid_noise: f64,
    pub robot_noise: bool,
    /// Run the fixed-start probe after each exploit trial (grid only).
    pub stability_probe: bool,
    /// Consecutive optimal probes that define stability.
    pub stability_streak: u32,
    pub snapshot_period: u64,
    pub trajectory: bool,
    pub ga_log: bool,
    pub engine: EngineParams,
}

impl ExperimentConfig {
    /// Defaults of the named experiment. The grid step matters because the
    /// fine grid uses a longer drop timeout.
    pub fn defaults(env: EnvKind, grid_step: f64) -> Self {
        let mut engine = EngineParams::default();
        let mut cfg = ExperimentConfig {
            env,
            representation: Representation::Spiking,
            seed: 0,
            repeats: 10,
            trials: 5000,
            hidden: 1,
            density: 1.0,
            grid_step,
            grid_noise: DEFAULT_NOISE,
            robot_noise: true,
            stability_probe: false,
            stability_streak: 50,
            snapshot_period: 50,
            trajectory: false,
            ga_log: false,
            engine: engine.clone(),
        };
        match env {
            EnvKind::MountainCar => {
                engine.population_cap = 1000;
                engine.t_drop = 20;
            }
            EnvKind::GridWorld => {
                engine.population_cap = 20000;
                engine.t_drop = if grid_step < 0.01 { 200 } else { 20 };
                cfg.trials = 20000;
                cfg.stability_probe = true;
            }
            EnvKind::Robot => {
                engine.population_cap = 3000;
                engine.t_drop = 300;
                cfg.trials = 500;
                cfg.hidden = 6;
                cfg.density = 0.5;
            }
        }
        cfg.engine = engine;
        cfg
    }

    /// Build from ordered key/value pairs; later pairs override earlier ones.
    /// `env` and `grid_step` choose the defaults the other keys override.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let lookup = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let env: EnvKind = lookup("env").ok_or_else(|| Error::config("missing key `env`"))?.parse()?;
        let step = match lookup("grid_step") {
            Some(v) => parse_num(v, "grid_step")?,
            None => 0.05,
        };
        let mut cfg = Self::defaults(env, step);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let e = &mut self.engine;
        match key {
            "env" => self.env = value.parse()?,
            "repr" | "representation" => self.representation = value.parse()?,
            "seed" => self.seed = parse_num(value, key)?,
            "repeats" => self.repeats = parse_num(value, key)?,
            "trials" => self.trials = parse_num(value, key)?,
            "hidden" => self.hidden = parse_num(value, key)?,
            "density" => self.density = parse_num(value, key)?,
            "grid_step" => self.grid_step = parse_num(value, key)?,
            "grid_noise" => self.grid_noise = parse_num(value, key)?,
            "robot_noise" => self.robot_noise = parse_num(value, key)?,
            "stability_probe" => self.stability_probe = parse_num(value, key)?,
            "stability_streak" => self.stability_streak = parse_num(value, key)?,
            "snapshot_period" => self.snapshot_period = parse_num(value, key)?,
            "trajectory" => self.trajectory = parse_num(value, key)?,
            "ga_log" => self.ga_log = parse_num(value, key)?,
            "N" | "population_cap" => e.population_cap = parse_num(value, key)?,
            "t_drop" => e.t_drop = parse_num(value, key)?,
            "beta" => e.beta = parse_num(value, key)?,
            "theta_ga" => e.theta_ga = parse_num(value, key)?,
            "theta_del" => e.theta_del = parse_num(value, key)?,
            "x0" => e.x0 = parse_num(value, key)?,
            "eta" => e.eta = parse_num(value, key)?,
            "phi" => e.phi = parse_num(value, key)?,
            "rho" => e.rho = parse_num(value, key)?,
            "epsilon0" => e.epsilon0 = parse_num(value, key)?,
            "alpha" => e.alpha = parse_num(value, key)?,
            "nu" => e.nu = parse_num(value, key)?,
            "theta_sub" => e.theta_sub = parse_num(value, key)?,
            "delta" => e.delta = parse_num(value, key)?,
            "max_macro_steps" => e.max_macro_steps = parse_num(value, key)?,
            "cover_attempt_cap" => e.cover_attempt_cap = parse_num(value, key)?,
            "cover_windows" => e.cover_windows = parse_num(value, key)?,
            "rate_min" => e.rate_min = parse_num(value, key)?,
            "init_error" => e.initial.error = parse_num(value, key)?,
            "init_fitness" => e.initial.fitness = parse_num(value, key)?,
            "init_action_set_size" => e.initial.action_set_size = parse_num(value, key)?,
            "child_fitness_factor" => e.child_fitness_factor = parse_num(value, key)?,
            other => return Err(Error::config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.engine.validate()?;
        if self.trials == 0 || !self.trials.is_multiple_of(2) {
            return Err(Error::config(format!("trials must be positive and even, got {}", self.trials)));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats must be at least 1"));
        }
        if self.hidden == 0 {
            return Err(Error::config("hidden must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::config("density must lie in [0, 1]"));
        }
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(Error::config("grid_step must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.grid_noise) {
            return Err(Error::config("grid_noise must lie in [0, 1)"));
        }
        if self.snapshot_period == 0 {
            return Err(Error::config("snapshot_period must be positive"));
        }
        Ok(())
    }

    /// Canonical listing of every setting, one `key=value` per line.
    pub fn to_text(&self) -> String {
        let e = &self.engine;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("env", self.env.to_string());
        put("repr", self.representation.to_string());
        put("seed", self.seed.to_string());
        put("repeats", self.repeats.to_string());
        put("trials", self.trials.to_string());
        put("hidden", self.hidden.to_string());
        put("density", fmt_real(self.density));
        put("grid_step", fmt_real(self.grid_step));
        put("grid_noise", fmt_real(self.grid_noise));
        put("robot_noise", self.robot_noise.to_string());
        put("stability_probe", self.stability_probe.to_string());
        put("stability_streak", self.stability_streak.to_string());
        put("snapshot_period", self.snapshot_period.to_string());
        put("trajectory", self.trajectory.to_string());
        put("ga_log", self.ga_log.to_string());
        put("N", e.population_cap.to_string());
        put("t_drop", e.t_drop.to_string());
        put("beta", fmt_real(e.beta));
        put("theta_ga", fmt_real(e.theta_ga));
        put("theta_del", e.theta_del.to_string());
        put("x0", fmt_real(e.x0));
        put("eta", fmt_real(e.eta));
        put("phi", fmt_real(e.phi));
        put("rho", fmt_real(e.rho));
        put("epsilon0", fmt_real(e.epsilon0));
        put("alpha", fmt_real(e.alpha));
        put("nu", fmt_real(e.nu));
        put("theta_sub", e.theta_sub.to_string());
        put("delta", fmt_real(e.delta));
        put("max_macro_steps", e.max_macro_steps.to_string());
        put("cover_attempt_cap", e.cover_attempt_cap.to_string());
        put("cover_windows", e.cover_windows.to_string());
        put("rate_min", fmt_real(e.rate_min));
        put("init_error", fmt_real(e.initial.error));
        put("init_fitness", fmt_real(e.initial.fitness));
        put("init_action_set_size", fmt_real(e.initial.action_set_size));
        put("child_fitness_factor", fmt_real(e.child_fitness_factor));
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical listing, with the
    /// seed and repeat count left out so repeats share a digest.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.seed = 0;
        c.repeats = 1;
        let d = Sha256::digest(c.to_text().as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn network_spec(&self, inputs: usize) -> NetworkSpec {
        NetworkSpec { representation: self.representation, inputs, hidden: self.hidden, density: self.density }
    }

    pub fn make_env(&self) -> Box<dyn Environment + Send> {
        match self.env {
            EnvKind::MountainCar => Box::new(MountainCar::new()),
            EnvKind::GridWorld => Box::new(GridWorld::new(self.grid_step, self.grid_noise)),
            EnvKind::Robot => {
                let mut arena = RobotArena::new(Default::default());
                arena.noise_enabled = self.robot_noise;
                Box::new(arena)
            }
        }
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::config(format!("bad value `{value}` for `{key}`")))
}

/// Split `key=value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: n + 1, msg: format!("expected key=value, got `{line}`") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_experiment_defaults() {
        let mc = ExperimentConfig::defaults(EnvKind::MountainCar, 0.05);
        assert_eq!((mc.engine.population_cap, mc.engine.t_drop, mc.trials), (1000, 20, 5000));
        let fine = ExperimentConfig::defaults(EnvKind::GridWorld, 0.005);
        assert_eq!((fine.engine.population_cap, fine.engine.t_drop), (20000, 200));
        let robot = ExperimentConfig::defaults(EnvKind::Robot, 0.05);
        assert_eq!((robot.engine.population_cap, robot.engine.t_drop, robot.trials), (3000, 300, 500));
        assert_eq!((robot.hidden, robot.density), (6, 0.5));
    }

    #[test]
    fn text_round_trip() {
        let cfg = ExperimentConfig::parse("env=grid\ngrid_step=0.005\nN=500 # small\ntrials=100\n").unwrap();
        assert_eq!(cfg.engine.population_cap, 500);
        assert_eq!(cfg.engine.t_drop, 200);
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn digest_ignores_seed_only() {
        let a = ExperimentConfig::defaults(EnvKind::Robot, 0.05);
        let mut b = a.clone();
        b.seed = 99;
        assert_eq!(a.digest(), b.digest());
        b.engine.t_drop = 10;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn bad_input_is_a_config_error() {
        assert!(ExperimentConfig::parse("trials=10").is_err());
        assert!(ExperimentConfig::parse("env=grid\ntrials=11").is_err());
        assert!(ExperimentConfig::parse("env=grid\nbogus=1").is_err());
        assert!(ExperimentConfig::parse("env=grid\nbeta=0").is_err());
        assert!(matches!(ExperimentConfig::parse("env=grid\nnonsense"), Err(Error::Parse { line: 2, .. })));
    }
}
