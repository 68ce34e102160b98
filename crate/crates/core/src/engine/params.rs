use crate::classifier::InitialParams;
use crate::error::{Error, Result};

/// Learning parameters of the classifier system.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineParams {
    /// Learning rate for error, fitness and action-set size.
    pub beta: f64,
    /// GA fires in a set when the trial counter exceeds its mean timestamp by this much.
    pub theta_ga: f64,
    /// Experience beyond which low fitness raises deletion votes.
    pub theta_del: u64,
    pub x0: f64,
    /// Prediction-weight learning rate.
    pub eta: f64,
    /// Discount on external reward per total agent step.
    pub phi: f64,
    /// Discount on delayed reward per agent step since the last match set.
    pub rho: f64,
    /// Population cap on summed numerosity.
    pub population_cap: usize,
    /// Agent steps one action set may control the agent before it is dropped.
    pub t_drop: u64,
    /// Error below which a classifier counts as fully accurate. Sized for
    /// the discounted payoffs, which are mostly far below the raw reward.
    pub epsilon0: f64,
    pub alpha: f64,
    pub nu: f64,
    pub theta_sub: u64,
    pub delta: f64,
    /// Match set formations after which a trial ends unrewarded.
    pub max_macro_steps: u64,
    pub cover_attempt_cap: u64,
    /// Presentation windows a covering candidate may use to settle.
    pub cover_windows: usize,
    pub initial: InitialParams,
    pub rate_min: f64,
    /// Offspring fitness as a fraction of the parent's.
    pub child_fitness_factor: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            beta: 0.2,
            theta_ga: 50.0,
            theta_del: 50,
            x0: 1.0,
            eta: 0.2,
            phi: 0.45,
            rho: 0.005,
            population_cap: 1000,
            t_drop: 20,
            epsilon0: 0.01,
            alpha: 0.1,
            nu: 5.0,
            theta_sub: 20,
            delta: 0.1,
            max_macro_steps: 200,
            cover_attempt_cap: 100_000,
            cover_windows: 3,
            initial: InitialParams::default(),
            rate_min: 1e-4,
            child_fitness_factor: 0.1,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        unit("beta", self.beta)?;
        unit("eta", self.eta)?;
        if self.population_cap == 0 {
            return Err(Error::config("population cap must be positive"));
        }
        if self.t_drop == 0 {
            return Err(Error::config("t_drop must be positive"));
        }
        if self.epsilon0 <= 0.0 {
            return Err(Error::config("epsilon0 must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rate_min) {
            return Err(Error::config("rate_min must lie in [0, 1]"));
        }
        if self.cover_windows == 0 {
            return Err(Error::config("cover_windows must be at least 1"));
        }
        Ok(())
    }
}
