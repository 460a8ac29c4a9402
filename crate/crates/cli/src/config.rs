use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use slhnet::components::Variant;
use slhnet::lindblad::{IntegratorOptions, Method, RhsForm, DEFAULT_ATOL, DEFAULT_RTOL};
use slhnet::network::MemoryParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `(|ggg⟩ - i|hhh⟩)/√2 ⊗ |hh⟩`
    #[default]
    Codeword,
    FlipQ1,
    FlipQ2,
    FlipQ3,
}

impl InitialState {
    pub fn error_qubit(self) -> Option<&'static str> {
        match self {
            Self::Codeword => None,
            Self::FlipQ1 => Some("Q1"),
            Self::FlipQ2 => Some("Q2"),
            Self::FlipQ3 => Some("Q3"),
        }
    }
}

/// Everything a run needs. Loaded from JSON, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Variant,
    pub omega: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    /// Defaults to `omega / 8`.
    pub alpha: Option<f64>,
    pub gamma_flip: f64,
    pub stark_compensated: bool,
    pub relay_dephasing: Option<f64>,
    pub initial_state: InitialState,
    pub t_max: f64,
    pub sample_interval: f64,
    pub integrator: Method,
    pub rhs: RhsForm,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opts = IntegratorOptions::default();
        Self {
            variant: Variant::BitFlip,
            omega: None,
            omegas: None,
            alpha: None,
            gamma_flip: 0.1,
            stark_compensated: false,
            relay_dephasing: None,
            initial_state: InitialState::Codeword,
            t_max: opts.t_max,
            sample_interval: opts.sample_interval,
            integrator: opts.method,
            rhs: opts.rhs,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn memory_params(&self, omega: f64) -> MemoryParams {
        MemoryParams {
            omega,
            alpha: self.alpha.unwrap_or(omega / 8.0),
            gamma_flip: self.gamma_flip,
            variant: self.variant,
            stark_compensated: self.stark_compensated,
            relay_dephasing: self.relay_dephasing,
        }
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        IntegratorOptions {
            method: self.integrator,
            t_max: self.t_max,
            sample_interval: self.sample_interval,
            rhs: self.rhs,
            ..Default::default()
        }
    }

    /// Checks shared by every command that runs dynamics.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.integrator_options().validate()?;
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                bail!("alpha must be finite and non-negative");
            }
        }
        Ok(())
    }
}

/// Flag values; `None` leaves the config value untouched.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Probe amplitude (default omega/8).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Single-qubit flip rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// bitflip or phaseflip.
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Remove the Stark-shift terms from the feedback Hamiltonian.
    #[arg(long)]
    pub compensated: bool,
    /// Keep the relay-dephasing couplings with this drive amplitude.
    #[arg(long)]
    pub relay_dephasing: Option<f64>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialState>,
    /// End time of the run.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Time between CSV rows.
    #[arg(long)]
    pub interval: Option<f64>,
    /// Adaptive relative tolerance.
    #[arg(long, conflicts_with = "dt")]
    pub rtol: Option<f64>,
    /// Adaptive absolute tolerance.
    #[arg(long, conflicts_with = "dt")]
    pub atol: Option<f64>,
    /// Fixed RK4 step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Use the commutator-form right-hand side.
    #[arg(long)]
    pub reference_rhs: bool,
    /// CSV file for `simulate`, directory for `sweep`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = Some(v);
        }
        if let Some(v) = self.gamma {
            cfg.gamma_flip = v;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if self.compensated {
            cfg.stark_compensated = true;
        }
        if let Some(v) = self.relay_dephasing {
            cfg.relay_dephasing = Some(v);
        }
        if let Some(v) = self.initial {
            cfg.initial_state = v;
        }
        if let Some(v) = self.tmax {
            cfg.t_max = v;
        }
        if let Some(v) = self.interval {
            cfg.sample_interval = v;
        }
        if let Some(dt) = self.dt {
            cfg.integrator = Method::Rk4 { dt };
        } else if self.rtol.is_some() || self.atol.is_some() {
            let (rtol, atol) = match cfg.integrator {
                Method::DormandPrince { rtol, atol } => (rtol, atol),
                Method::Rk4 { .. } => (DEFAULT_RTOL, DEFAULT_ATOL),
            };
            cfg.integrator = Method::DormandPrince {
                rtol: self.rtol.unwrap_or(rtol),
                atol: self.atol.unwrap_or(atol),
            };
        }
        if self.reference_rhs {
            cfg.rhs = RhsForm::Commutator;
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        Ok(cfg)
    }
}
