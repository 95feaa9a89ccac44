use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::drifts::{CubicDrift, RohrsDrift, TwoCartDrift};
use super::ScenarioError;
use crate::asd::{
    build_input_chain, transform, xi_bound, DecompositionKind, InputChain, ParamSchedule, TransformedSystem,
    UncertainPlant,
};
use crate::control::{fifth_order_filter, lead_time_constant, InversionCompensator, ReferenceSignal, TrackingLaw};
use crate::lti::{l1_gain_default, l1_gain_delay_mismatch, StateSpaceModel, TransferFunction, DEFAULT_L1_DT};
use crate::sim::{SimConfig, DEFAULT_DT};

/// Default noise seed.
pub const DEFAULT_SEED: u64 = 42;

/// Parameters of the two-cart model with estimate-level values.
pub const TWO_CART_TRUE: [f64; 6] = [1.0, 2.0, 0.8, 0.5, 1.3, 0.9];
pub const TWO_CART_ESTIMATE: [f64; 6] = [1.0, 1.0, 1.0, 0.9, 1.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Rohrs,
    Nonlinear,
    #[serde(alias = "two-cart")]
    TwoCart,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 3] = [Self::Rohrs, Self::Nonlinear, Self::TwoCart];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rohrs => "rohrs",
            Self::Nonlinear => "nonlinear",
            Self::TwoCart => "twocart",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rohrs" => Ok(Self::Rohrs),
            "nonlinear" | "cubic" => Ok(Self::Nonlinear),
            "twocart" | "two-cart" | "two_cart" => Ok(Self::TwoCart),
            _ => Err(ScenarioError::UnknownScenario(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Step,
    Sine,
}

impl ReferenceKind {
    pub fn signal(&self) -> ReferenceSignal {
        match self {
            Self::Step => ReferenceSignal::step(),
            Self::Sine => ReferenceSignal::sine(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Step => "step",
            Self::Sine => "sine",
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "step" => Ok(Self::Step),
            "sine" | "sin" => Ok(Self::Sine),
            _ => Err(ScenarioError::UnknownReference(s.to_string())),
        }
    }
}

/// Optional per-run changes to a scenario's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub a: Option<f64>,
    pub theta_hat: Option<Vec<f64>>,
    pub noise: Option<bool>,
    pub corrected_coupling: Option<bool>,
    pub alternative_decomposition: Option<bool>,
}

/// Colored measurement-free process noise `ζ = K/(s + α) ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gain: f64,
    pub pole: f64,
    pub intensity: f64,
}

impl NoiseSpec {
    /// `0.1/(s + 0.1)` driven by unit-intensity white noise.
    pub fn low_pass() -> Self {
        Self {
            gain: 0.1,
            pole: 0.1,
            intensity: 1.0,
        }
    }
}

/// A fully parameterized benchmark run, before the reference is chosen.
#[derive(Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub case: Option<u8>,
    pub plant: UncertainPlant,
    pub theta_hat: Vec<f64>,
    pub filter: TransferFunction,
    pub a: f64,
    pub config: SimConfig,
    /// `None` disables the noise source even if the plant has a noise input.
    pub noise: Option<NoiseSpec>,
    pub decomposition: DecompositionKind,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("case", &self.case)
            .field("theta_hat", &self.theta_hat)
            .field("filter", &self.filter.to_string())
            .field("a", &self.a)
            .field("config", &self.config)
            .field("noise", &self.noise)
            .finish()
    }
}

/// Everything the controller needs, derived from a validated scenario.
pub struct Design {
    pub model: TransformedSystem,
    pub chain: InputChain,
    pub law: TrackingLaw,
    pub lead: f64,
}

impl Scenario {
    /// Checks the standing assumptions and builds the controller design.
    pub fn design(&self) -> Result<Design, ScenarioError> {
        self.plant.validate()?;
        self.config.validate()?;
        let model = transform(&self.plant, &self.theta_hat)?;
        let chain = build_input_chain(&self.filter, self.a)?;
        let (law, lead) = match self.name {
            ScenarioName::Rohrs => (
                TrackingLaw::Rohrs {
                    theta_hat: self.theta_hat[0],
                },
                lead_time_constant(&self.filter)?,
            ),
            ScenarioName::Nonlinear => (
                TrackingLaw::Nonlinear {
                    theta_hat: self.theta_hat[0],
                },
                lead_time_constant(&self.filter)?,
            ),
            ScenarioName::TwoCart => {
                let g = self.primary_transfer_function(&model)?;
                let comp = InversionCompensator::new(&g, &self.filter, &fifth_order_filter())?;
                (TrackingLaw::Inversion(Box::new(comp)), 0.0)
            }
        };
        Ok(Design { model, chain, law, lead })
    }

    /// `G_yu(s) = cᵀ(sI − A(θ̂))⁻¹ b` for linear drifts.
    pub fn primary_transfer_function(&self, model: &TransformedSystem) -> Result<TransferFunction, ScenarioError> {
        let a = model
            .linear_matrix()
            .ok_or_else(|| ScenarioError::Invalid("inversion needs a linear drift".into()))?;
        let ss = StateSpaceModel::new(a, model.b_in.clone().into(), model.c_out.clone().into(), 0.0)?;
        Ok(ss.transfer_function()?)
    }

    /// `ε_H = ‖C(H − 1)‖_L1`.
    pub fn eps_h(&self) -> Result<f64, ScenarioError> {
        let h_minus_1 = self.plant.channel.parallel(&TransferFunction::constant(-1.0));
        Ok(l1_gain_default(&self.filter.series(&h_minus_1))?)
    }

    /// `ε_τ = ‖s C‖_L1`.
    pub fn eps_tau(&self) -> Result<f64, ScenarioError> {
        let s_c = TransferFunction::new(vec![1.0, 0.0], vec![1.0])?.series(&self.filter);
        Ok(l1_gain_default(&s_c)?)
    }

    /// `(ε_H + τ ε_τ)·a`.
    pub fn xi_bound(&self) -> Result<f64, ScenarioError> {
        Ok(xi_bound(self.eps_h()?, self.eps_tau()?, self.plant.delay, self.a))
    }

    /// Direct `‖C(H e^{−τs} − 1)‖_L1`, tighter than the component bound.
    pub fn channel_l1(&self) -> Result<f64, ScenarioError> {
        let delayed = self.filter.series(&self.plant.channel);
        let horizon = 10.0 * delayed.slowest_time_constant().max(self.filter.slowest_time_constant()) + self.plant.delay;
        let est = l1_gain_delay_mismatch(&delayed, self.plant.delay, &self.filter, DEFAULT_L1_DT, horizon)?;
        Ok(est.value)
    }
}

fn rohrs_channel() -> TransferFunction {
    TransferFunction::new(vec![229.0], vec![1.0, 30.0, 229.0]).expect("valid channel")
}

fn apply(mut s: Scenario, ov: &ScenarioOverrides) -> Result<Scenario, ScenarioError> {
    if let Some(dt) = ov.dt {
        s.config.dt = dt;
    }
    if let Some(h) = ov.horizon {
        s.config.horizon = h;
    }
    if let Some(seed) = ov.seed {
        s.config.rng_seed = seed;
    }
    if let Some(a) = ov.a {
        s.a = a;
    }
    if let Some(th) = &ov.theta_hat {
        if th.len() != s.theta_hat.len() {
            return Err(ScenarioError::Invalid(format!(
                "theta_hat needs {} entries, got {}",
                s.theta_hat.len(),
                th.len()
            )));
        }
        s.theta_hat = th.clone();
    }
    if ov.noise == Some(false) {
        s.noise = None;
    } else if ov.noise == Some(true) && s.plant.noise_input.is_some() {
        s.noise = Some(NoiseSpec::low_pass());
    }
    if let Some(corrected) = ov.corrected_coupling {
        if s.name != ScenarioName::TwoCart {
            return Err(ScenarioError::Invalid("corrected_coupling only applies to twocart".into()));
        }
        s.plant.drift = Arc::new(TwoCartDrift {
            corrected_coupling: corrected,
        });
    }
    if ov.alternative_decomposition == Some(true) {
        let n = s.plant.dim();
        s.decomposition = DecompositionKind::Alternative(-DMatrix::<f64>::identity(n, n));
    }
    s.config.validate()?;
    Ok(s)
}

/// Builds a benchmark with its default parameters.
pub fn build_scenario(name: ScenarioName, case: Option<u8>) -> Result<Scenario, ScenarioError> {
    build_scenario_with(name, case, &ScenarioOverrides::default())
}

/// Builds a benchmark and applies `overrides`.
pub fn build_scenario_with(
    name: ScenarioName,
    case: Option<u8>,
    overrides: &ScenarioOverrides,
) -> Result<Scenario, ScenarioError> {
    let lag = TransferFunction::first_order_lag(2.0);
    let base = match name {
        ScenarioName::Rohrs | ScenarioName::Nonlinear if case.is_some() => {
            return Err(ScenarioError::UnexpectedCase { scenario: name });
        }
        ScenarioName::Rohrs => Scenario {
            name,
            case,
            plant: UncertainPlant {
                drift: Arc::new(RohrsDrift),
                b_in: vec![2.0],
                c_out: vec![1.0],
                x0: vec![1.0],
                theta: ParamSchedule::Constant(vec![-2.0]),
                disturbance: None,
                noise_input: None,
                channel: rohrs_channel(),
                delay: 0.0,
            },
            theta_hat: vec![0.0],
            filter: lag,
            a: 5.0,
            config: SimConfig::new(DEFAULT_DT, 60.0, DEFAULT_SEED),
            noise: None,
            decomposition: DecompositionKind::Standard,
        },
        ScenarioName::Nonlinear => Scenario {
            name,
            case,
            plant: UncertainPlant {
                drift: Arc::new(CubicDrift),
                b_in: vec![1.0],
                c_out: vec![1.0],
                x0: vec![1.0],
                theta: ParamSchedule::varying(1, |t, th| th[0] = 0.2 * (0.1 * t + 1.0).sin()),
                disturbance: Some(Arc::new(|t, d: &mut [f64]| d[0] = 0.5 * (0.2 * t).sin())),
                noise_input: None,
                channel: TransferFunction::constant(1.0),
                delay: 0.1,
            },
            theta_hat: vec![0.0],
            filter: lag,
            a: 5.0,
            config: SimConfig::new(DEFAULT_DT, 60.0, DEFAULT_SEED),
            noise: None,
            decomposition: DecompositionKind::Standard,
        },
        ScenarioName::TwoCart => {
            let case = case.ok_or(ScenarioError::MissingCase)?;
            let (theta, theta_hat) = match case {
                1 => (TWO_CART_TRUE, TWO_CART_TRUE),
                2 => (TWO_CART_TRUE, TWO_CART_ESTIMATE),
                3 => (TWO_CART_ESTIMATE, TWO_CART_ESTIMATE),
                other => return Err(ScenarioError::UnknownCase(other)),
            };
            let (m1, m2) = (theta[0], theta[1]);
            Scenario {
                name,
                case: Some(case),
                plant: UncertainPlant {
                    drift: Arc::new(TwoCartDrift::default()),
                    b_in: vec![0.0, 0.0, 1.0 / m1, 0.0],
                    c_out: vec![0.0, 1.0, 0.0, 0.0],
                    x0: vec![0.0; 4],
                    theta: ParamSchedule::Constant(theta.to_vec()),
                    disturbance: None,
                    noise_input: Some(vec![0.0, 0.0, 0.0, 1.0 / m2]),
                    channel: rohrs_channel(),
                    delay: 0.1,
                },
                theta_hat: theta_hat.to_vec(),
                filter: lag,
                a: 1.0,
                config: SimConfig::new(DEFAULT_DT, 100.0, DEFAULT_SEED),
                noise: Some(NoiseSpec::low_pass()),
                decomposition: DecompositionKind::Standard,
            }
        }
    };
    let s = apply(base, overrides)?;
    s.design()?;
    Ok(s)
}
