//! Behavioural agents for the matching-pennies and triadic scenarios.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::game::{self, effective_game_with_reward, pure_nash, Action, GameTable, NashSet};

/// A matching-pennies choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Draws `Right` with probability `p_right` using exactly one uniform draw.
pub fn draw_side<R: Rng + ?Sized>(rng: &mut R, p_right: f64) -> Side {
    if rng.gen::<f64>() < p_right {
        Side::Right
    } else {
        Side::Left
    }
}

/// Test of the 50:50 null on `k` successes out of `n` trials.
pub trait NullTest {
    fn p_value(&self, k: u64, n: u64) -> f64;
}

/// Exact two-sided binomial test against `p = 1/2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactBinomialTest;

impl NullTest for ExactBinomialTest {
    fn p_value(&self, k: u64, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let tail = k.min(n - k);
        if 2 * tail == n {
            return 1.0;
        }
        let dist = Binomial::new(0.5, n).expect("valid binomial");
        (2.0 * dist.cdf(tail)).min(1.0)
    }
}

/// Never rejects; reduces the predictors to uniform play.
#[derive(Clone, Copy, Debug, Default)]
pub struct RetainNull;

impl NullTest for RetainNull {
    fn p_value(&self, _k: u64, _n: u64) -> f64 {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Uniform,
    ChoiceHistory,
    ChoiceRewardHistory,
}

impl Algorithm {
    pub fn id(self) -> u8 {
        match self {
            Algorithm::Uniform => 0,
            Algorithm::ChoiceHistory => 1,
            Algorithm::ChoiceRewardHistory => 2,
        }
    }
}

impl TryFrom<u8> for Algorithm {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            0 => Ok(Algorithm::Uniform),
            1 => Ok(Algorithm::ChoiceHistory),
            2 => Ok(Algorithm::ChoiceRewardHistory),
            _ => Err(Error::Config(format!("unknown algorithm {id}"))),
        }
    }
}

/// Number of preceding trials in a conditioning context.
pub const CONTEXT_LEN: usize = 4;

const CHOICE_CONTEXTS: usize = 1 << CONTEXT_LEN;
const PAIR_CONTEXTS: usize = 1 << (2 * CONTEXT_LEN);

/// Which statistic drove a decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub p_value: f64,
    /// Estimated probability the opponent picks `Right` in this context.
    pub p_right: f64,
    pub uses_rewards: bool,
}

/// Outcome of one predictor decision, before sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub p_right: f64,
    pub detection: Option<Detection>,
}

/// Computer opponent in matching pennies.
///
/// Keeps the opponent's full choice and reward history and, for the two
/// predicting algorithms, per-context outcome counts over the preceding
/// [`CONTEXT_LEN`] trials.
#[derive(Clone, Debug)]
pub struct PredictorState<T: NullTest = ExactBinomialTest> {
    algorithm: Algorithm,
    alpha: f64,
    test: T,
    choices: Vec<Side>,
    rewards: Vec<bool>,
    choice_counts: Vec<[u64; 2]>,
    pair_counts: Vec<[u64; 2]>,
}

impl PredictorState<ExactBinomialTest> {
    pub fn new(algorithm: Algorithm, alpha: f64) -> Self {
        Self::with_test(algorithm, alpha, ExactBinomialTest)
    }
}

impl<T: NullTest> PredictorState<T> {
    pub fn with_test(algorithm: Algorithm, alpha: f64, test: T) -> Self {
        Self {
            algorithm,
            alpha,
            test,
            choices: Vec::new(),
            rewards: Vec::new(),
            choice_counts: vec![[0; 2]; CHOICE_CONTEXTS],
            pair_counts: vec![[0; 2]; PAIR_CONTEXTS],
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn history_len(&self) -> usize {
        self.choices.len()
    }

    fn choice_context(&self, end: usize) -> usize {
        self.choices[end - CONTEXT_LEN..end]
            .iter()
            .fold(0, |acc, c| (acc << 1) | c.index())
    }

    fn pair_context(&self, end: usize) -> usize {
        (end - CONTEXT_LEN..end).fold(0, |acc, t| {
            (acc << 2) | (self.choices[t].index() << 1) | usize::from(self.rewards[t])
        })
    }

    /// Records the opponent's choice and whether the opponent was rewarded.
    pub fn observe(&mut self, choice: Side, reward: bool) {
        let t = self.choices.len();
        if t >= CONTEXT_LEN {
            let cc = self.choice_context(t);
            let pc = self.pair_context(t);
            self.choice_counts[cc][choice.index()] += 1;
            self.pair_counts[pc][choice.index()] += 1;
        }
        self.choices.push(choice);
        self.rewards.push(reward);
    }

    fn detect(&self, counts: [u64; 2], uses_rewards: bool) -> Option<Detection> {
        let n = counts[0] + counts[1];
        if n == 0 {
            return None;
        }
        let p_value = self.test.p_value(counts[1], n);
        (p_value < self.alpha).then(|| Detection {
            p_value,
            p_right: counts[1] as f64 / n as f64,
            uses_rewards,
        })
    }

    pub fn decide(&self) -> Decision {
        let uniform = Decision {
            p_right: 0.5,
            detection: None,
        };
        let t = self.choices.len();
        if self.algorithm == Algorithm::Uniform || t <= CONTEXT_LEN {
            return uniform;
        }
        let by_choice = self.detect(self.choice_counts[self.choice_context(t)], false);
        let by_pair = match self.algorithm {
            Algorithm::ChoiceRewardHistory => {
                self.detect(self.pair_counts[self.pair_context(t)], true)
            }
            _ => None,
        };
        let detection = match (by_choice, by_pair) {
            (Some(a), Some(b)) => Some(if b.p_value < a.p_value { b } else { a }),
            (a, b) => a.or(b),
        };
        match detection {
            // Opponent is rewarded on a match, so counter its bias.
            Some(d) => Decision {
                p_right: 1.0 - d.p_right,
                detection: Some(d),
            },
            None => uniform,
        }
    }

    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Side {
        draw_side(rng, self.decide().p_right)
    }
}

/// Parameters of the softmax delta-rule learner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerParams {
    pub learning_rate: f64,
    pub inverse_temperature: f64,
    /// Gain with which a below-chance running reward lowers the inverse
    /// temperature; zero disables the adaptation.
    pub exploration_gain: f64,
    /// Smoothing rate of the running reward baseline.
    pub reward_smoothing: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.2,
            inverse_temperature: 10.0,
            exploration_gain: 100.0,
            reward_smoothing: 0.0005,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config("learning_rate must be in (0, 1]".into()));
        }
        if !(self.inverse_temperature >= 0.0 && self.inverse_temperature.is_finite()) {
            return Err(Error::Config("inverse_temperature must be >= 0".into()));
        }
        if !(self.exploration_gain >= 0.0 && self.exploration_gain.is_finite()) {
            return Err(Error::Config("exploration_gain must be >= 0".into()));
        }
        if !(self.reward_smoothing > 0.0 && self.reward_smoothing <= 1.0) {
            return Err(Error::Config("reward_smoothing must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Value-learning stand-in for the animal player.
///
/// Choices are a softmax over two action values updated by the delta
/// rule. The learner also tracks a slow running average of its reward and,
/// while that average sits below the 1/2 it could secure by playing 50:50,
/// cools its softmax by `exp(-gain * shortfall)`. An exploited learner thus
/// drifts toward uniform play; against an unexploitable opponent it keeps
/// its base temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    params: LearnerParams,
    values: [f64; 2],
    average_reward: f64,
}

impl LearnerState {
    pub fn new(params: LearnerParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            values: [0.5; 2],
            average_reward: 0.5,
        })
    }

    pub fn with_values(params: LearnerParams, values: [f64; 2]) -> Result<Self> {
        let mut s = Self::new(params)?;
        s.values = values;
        Ok(s)
    }

    pub fn values(&self) -> [f64; 2] {
        self.values
    }

    /// Inverse temperature currently in effect.
    pub fn effective_inverse_temperature(&self) -> f64 {
        let shortfall = (0.5 - self.average_reward).max(0.0);
        self.params.inverse_temperature * (-self.params.exploration_gain * shortfall).exp()
    }

    /// Softmax choice probabilities `[p_left, p_right]`.
    pub fn probabilities(&self) -> [f64; 2] {
        let beta = self.effective_inverse_temperature();
        let z = beta * (self.values[1] - self.values[0]);
        let p_right = 1.0 / (1.0 + (-z).exp());
        [1.0 - p_right, p_right]
    }

    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Side {
        draw_side(rng, self.probabilities()[1])
    }

    /// Delta-rule update of the chosen action's value.
    pub fn learn(&mut self, choice: Side, reward: f64) {
        let v = &mut self.values[choice.index()];
        *v += self.params.learning_rate * (reward - *v);
        self.average_reward += self.params.reward_smoothing * (reward - self.average_reward);
    }

    /// Applies the previous trial's outcome, if any, then chooses.
    pub fn step<R: Rng + ?Sized>(&mut self, last: Option<(Side, f64)>, rng: &mut R) -> Side {
        if let Some((choice, reward)) = last {
            self.learn(choice, reward);
        }
        self.choose(rng)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    Defect,
    Cooperate,
}

/// A player that always plays its part of a pure equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NaiveNeAgent {
    pub player: usize,
    pub tie_break: TieBreak,
}

impl NaiveNeAgent {
    pub fn new(player: usize) -> Self {
        Self {
            player,
            tie_break: TieBreak::default(),
        }
    }

    /// Every agent using the same rule selects the same equilibrium, so a
    /// population of naive agents stays coordinated.
    pub fn select_equilibrium(set: &NashSet, tie_break: TieBreak) -> Result<&[Action]> {
        let preferred = match tie_break {
            TieBreak::Defect => Action::Defect,
            TieBreak::Cooperate => Action::Cooperate,
        };
        set.profiles
            .iter()
            .max_by_key(|p| {
                (
                    p.actions.iter().filter(|&&a| a == preferred).count(),
                    std::cmp::Reverse(p.index),
                )
            })
            .map(|p| p.actions.as_slice())
            .ok_or(Error::NoPureEquilibrium)
    }

    pub fn act(&self, game: &GameTable) -> Result<Action> {
        let set = pure_nash(game);
        let profile = Self::select_equilibrium(&set, self.tie_break)?;
        Ok(profile[self.player])
    }
}

/// The theory-of-mind agent that sets the dyad's coupling from its signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orchestrator {
    sign: f64,
}

impl Orchestrator {
    /// Picks the sign so that signal `+1` induces a game whose unique pure
    /// equilibrium is mutual cooperation.
    pub fn calibrate(reward: f64) -> Result<Self> {
        for sign in [1.0, -1.0] {
            let game = effective_game_with_reward(sign * game::ORCHESTRATOR_AMPLITUDE, reward);
            let coop = pure_nash(&game)
                .unique()
                .is_some_and(|p| p.actions == [Action::Cooperate, Action::Cooperate]);
            let defect_game =
                effective_game_with_reward(-sign * game::ORCHESTRATOR_AMPLITUDE, reward);
            let defect = pure_nash(&defect_game)
                .unique()
                .is_some_and(|p| p.actions == [Action::Defect, Action::Defect]);
            if coop && defect {
                return Ok(Self { sign });
            }
        }
        Err(Error::Domain(format!(
            "no orchestrator sign toggles the dyad at reward {reward}"
        )))
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// `x1 = sign * s / 4`.
    pub fn emit(&self, signal: i8) -> Result<f64> {
        match signal {
            1 | -1 => Ok(self.sign * f64::from(signal) * game::ORCHESTRATOR_AMPLITUDE),
            _ => Err(Error::Domain(format!("signal must be +-1, got {signal}"))),
        }
    }
}
