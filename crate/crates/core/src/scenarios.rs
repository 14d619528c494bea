//! The triadic network-reconfiguration scenario and the matching-pennies
//! opponent-modelling experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    draw_side, Algorithm, LearnerParams, LearnerState, NaiveNeAgent, Orchestrator, PredictorState,
    Side,
};
use crate::error::{Error, Result};
use crate::game::{effective_game_with_reward, triadic_utilities, Action, ORCHESTRATOR_AMPLITUDE};
use crate::info::{excess_tdmi, JointSeries, MeasureReport, SymbolSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// The orchestrator sees the signal but cannot relay it.
    TriadicA,
    /// The orchestrator reshapes the dyad's game from the signal.
    TriadicB,
    MatchingPennies,
}

/// Behaviour of the animal player in matching pennies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MonkeyModel {
    /// Softmax delta-rule learner configured by `ScenarioConfig::learner`.
    #[default]
    Learner,
    /// Stationary bias: `Right` with fixed probability.
    Biased {
        p_right: f64,
    },
    WinStayLoseShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub steps: usize,
    pub seed: u64,
    /// Steps before the dyad responds to the orchestrator.
    pub delay: usize,
    /// Value produced by mutual cooperation, `R`.
    pub reward: f64,
    /// Probability the environmental signal repeats its previous value.
    pub signal_persistence: f64,
    pub algorithm: u8,
    /// Significance level of the predictors' null test.
    pub alpha: f64,
    pub monkey: MonkeyModel,
    pub learner: LearnerParams,
    pub taus: Vec<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::TriadicB,
            steps: 100_000,
            seed: 0,
            delay: 1,
            reward: 1.0,
            signal_persistence: 0.0,
            algorithm: 0,
            alpha: 0.05,
            monkey: MonkeyModel::default(),
            learner: LearnerParams::default(),
            taus: vec![1, 2, 3],
        }
    }
}

impl ScenarioConfig {
    pub fn triadic(kind: ScenarioKind, steps: usize, seed: u64) -> Self {
        Self {
            kind,
            steps,
            seed,
            ..Default::default()
        }
    }

    pub fn matching_pennies(algorithm: u8, steps: usize, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::MatchingPennies,
            steps,
            seed,
            algorithm,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.taus.contains(&0) {
            return Err(Error::Config("taus must be positive".into()));
        }
        if let Some(&max) = self.taus.iter().max() {
            if self.steps < max + 1 {
                return Err(Error::Config(format!(
                    "steps {} too short for tau {max}",
                    self.steps
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.signal_persistence) {
            return Err(Error::Config("signal_persistence must be in [0, 1]".into()));
        }
        if !(self.reward.is_finite() && self.reward > 0.0) {
            return Err(Error::Config("reward must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must be in (0, 1)".into()));
        }
        Algorithm::try_from(self.algorithm)?;
        if let MonkeyModel::Biased { p_right } = self.monkey {
            if !(0.0..=1.0).contains(&p_right) {
                return Err(Error::Config("p_right must be in [0, 1]".into()));
            }
        }
        self.learner.validate()
    }
}

/// Stream ids so each agent draws from an independent sequence.
mod streams {
    pub const SIGNAL: u64 = 0;
    pub const COMPUTER: u64 = 1;
    pub const MONKEY: u64 = 2;
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadicStep {
    pub t: usize,
    pub signal: i8,
    pub x1: f64,
    /// Coupling `c` of the game the dyad is playing this step.
    pub coupling: f64,
    pub x2: i8,
    pub x3: i8,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingPenniesStep {
    pub t: usize,
    /// 0 = left, 1 = right.
    pub monkey: u8,
    pub computer: u8,
    pub monkey_reward: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", content = "steps", rename_all = "kebab-case")]
pub enum EpisodeLog {
    Triadic(Vec<TriadicStep>),
    MatchingPennies(Vec<MatchingPenniesStep>),
}

impl EpisodeLog {
    pub fn len(&self) -> usize {
        match self {
            EpisodeLog::Triadic(s) => s.len(),
            EpisodeLog::MatchingPennies(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Names of the measured agent-state columns.
    pub fn agent_names(&self) -> Vec<String> {
        let names: &[&str] = match self {
            EpisodeLog::Triadic(_) => &["x1", "x2", "x3"],
            EpisodeLog::MatchingPennies(_) => &["monkey", "computer"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Agent states as binary symbols.
    ///
    /// Triadic states map by sign (negative to 0); matching-pennies choices
    /// map left to 0 and right to 1.
    pub fn state_series(&self) -> Result<JointSeries> {
        let columns: Vec<Vec<usize>> = match self {
            EpisodeLog::Triadic(steps) => vec![
                steps.iter().map(|s| usize::from(s.x1 > 0.0)).collect(),
                steps.iter().map(|s| usize::from(s.x2 > 0)).collect(),
                steps.iter().map(|s| usize::from(s.x3 > 0)).collect(),
            ],
            EpisodeLog::MatchingPennies(steps) => vec![
                steps.iter().map(|s| usize::from(s.monkey)).collect(),
                steps.iter().map(|s| usize::from(s.computer)).collect(),
            ],
        };
        JointSeries::new(
            columns
                .into_iter()
                .map(|c| SymbolSeries::new(c, 2))
                .collect::<Result<_>>()?,
        )
    }
}

fn sign_of(a: Action) -> i8 {
    match a {
        Action::Cooperate => 1,
        Action::Defect => -1,
    }
}

fn next_signal(rng: &mut ChaCha8Rng, previous: Option<i8>, persistence: f64) -> i8 {
    // Always consume two draws so persistence does not shift the stream.
    let keep = rng.gen::<f64>() < persistence;
    let fresh = if rng.gen::<bool>() { 1 } else { -1 };
    match previous {
        Some(p) if keep => p,
        _ => fresh,
    }
}

pub fn run_triadic(config: &ScenarioConfig) -> Result<EpisodeLog> {
    config.validate()?;
    let relay = match config.kind {
        ScenarioKind::TriadicA => false,
        ScenarioKind::TriadicB => true,
        ScenarioKind::MatchingPennies => {
            return Err(Error::Config("not a triadic scenario".into()))
        }
    };
    let orchestrator = Orchestrator::calibrate(config.reward)?;
    // Before any influence arrives the dyad plays the defect-dominant game.
    let status_quo = orchestrator.emit(-1)?;
    let (a2, a3) = (NaiveNeAgent::new(0), NaiveNeAgent::new(1));
    let mut rng = stream_rng(config.seed, streams::SIGNAL);

    let mut steps: Vec<TriadicStep> = Vec::with_capacity(config.steps);
    let mut previous = None;
    for t in 0..config.steps {
        let signal = next_signal(&mut rng, previous, config.signal_persistence);
        previous = Some(signal);

        let x1 = if relay {
            orchestrator.emit(signal)?
        } else {
            f64::from(signal)
        };
        let coupling = if relay && t >= config.delay {
            if config.delay == 0 {
                x1
            } else {
                steps[t - config.delay].x1
            }
        } else {
            status_quo
        };
        let game = effective_game_with_reward(coupling, config.reward);
        let (x2, x3) = (a2.act(&game)?, a3.act(&game)?);
        let [u1, u2, u3] = if relay {
            triadic_utilities(coupling, x2, x3, config.reward)?
        } else {
            [0.0, game.payoff(0, &[x2, x3]), game.payoff(1, &[x2, x3])]
        };
        steps.push(TriadicStep {
            t,
            signal,
            x1,
            coupling,
            x2: sign_of(x2),
            x3: sign_of(x3),
            u1,
            u2,
            u3,
            value: u8::from(x2 == Action::Cooperate && x3 == Action::Cooperate),
        });
    }
    Ok(EpisodeLog::Triadic(steps))
}

/// Checks the per-step invariants of a triadic log.
pub fn verify_triadic_step(step: &TriadicStep, reward: f64, relayed: bool) -> Result<()> {
    let x2 = Action::from_sign(f64::from(step.x2))?;
    let x3 = Action::from_sign(f64::from(step.x3))?;
    let value = u8::from(step.x2 == 1 && step.x3 == 1);
    if step.value != value {
        return Err(Error::Domain(format!(
            "step {}: output value mismatch",
            step.t
        )));
    }
    let expected = if relayed {
        triadic_utilities(step.coupling, x2, x3, reward)?
    } else {
        let g = effective_game_with_reward(step.coupling, reward);
        [0.0, g.payoff(0, &[x2, x3]), g.payoff(1, &[x2, x3])]
    };
    if expected != [step.u1, step.u2, step.u3] {
        return Err(Error::Domain(format!(
            "step {}: utilities mismatch",
            step.t
        )));
    }
    if (step.coupling.abs() - ORCHESTRATOR_AMPLITUDE).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "step {}: coupling out of family",
            step.t
        )));
    }
    Ok(())
}

enum Monkey {
    Learner(LearnerState),
    Biased(f64),
    WinStayLoseShift,
}

pub fn run_matching_pennies(config: &ScenarioConfig) -> Result<EpisodeLog> {
    config.validate()?;
    if config.kind != ScenarioKind::MatchingPennies {
        return Err(Error::Config("not a matching-pennies scenario".into()));
    }
    let mut computer = PredictorState::new(Algorithm::try_from(config.algorithm)?, config.alpha);
    let mut monkey = match config.monkey {
        MonkeyModel::Learner => Monkey::Learner(LearnerState::new(config.learner)?),
        MonkeyModel::Biased { p_right } => Monkey::Biased(p_right),
        MonkeyModel::WinStayLoseShift => Monkey::WinStayLoseShift,
    };
    let mut computer_rng = stream_rng(config.seed, streams::COMPUTER);
    let mut monkey_rng = stream_rng(config.seed, streams::MONKEY);

    let mut steps = Vec::with_capacity(config.steps);
    let mut last: Option<(Side, f64)> = None;
    for t in 0..config.steps {
        let c = computer.choose(&mut computer_rng);
        let m = match &mut monkey {
            Monkey::Learner(l) => l.step(last, &mut monkey_rng),
            Monkey::Biased(p) => draw_side(&mut monkey_rng, *p),
            Monkey::WinStayLoseShift => match last {
                Some((prev, r)) if r > 0.0 => prev,
                Some((prev, _)) => prev.opposite(),
                None => draw_side(&mut monkey_rng, 0.5),
            },
        };
        let won = m == c;
        computer.observe(m, won);
        last = Some((m, if won { 1.0 } else { 0.0 }));
        steps.push(MatchingPenniesStep {
            t,
            monkey: m.index() as u8,
            computer: c.index() as u8,
            monkey_reward: u8::from(won),
        });
    }
    Ok(EpisodeLog::MatchingPennies(steps))
}

pub fn run(config: &ScenarioConfig) -> Result<EpisodeLog> {
    match config.kind {
        ScenarioKind::MatchingPennies => run_matching_pennies(config),
        _ => run_triadic(config),
    }
}

/// Excess TDMI of the log's agent states at each lag.
pub fn measure_log(log: &EpisodeLog, taus: &[usize]) -> Result<Vec<MeasureReport>> {
    let joint = log.state_series()?;
    taus.iter().map(|&tau| excess_tdmi(&joint, tau)).collect()
}

/// Fraction of matching-pennies trials the monkey won.
pub fn monkey_reward_rate(log: &EpisodeLog) -> Option<f64> {
    match log {
        EpisodeLog::MatchingPennies(steps) if !steps.is_empty() => Some(
            steps
                .iter()
                .map(|s| f64::from(s.monkey_reward))
                .sum::<f64>()
                / steps.len() as f64,
        ),
        _ => None,
    }
}
