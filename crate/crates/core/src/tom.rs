//! Belief inference over latent types, ToM-mixed policies and KL-regularised
//! policy objectives.
//!
//! Types, messages, states and actions are plain indices. Everything here is
//! a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over a finite index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Distribution::new(p)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(i) = p.iter().position(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {i} is {}", p[i])));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self(p))
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        if let Some(i) = w.iter().position(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {}",
                w[i]
            )));
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self(w.into_iter().map(|x| x / total).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    pub fn delta(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::Dimension(format!("index {index} of {n}")));
        }
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Ok(Self(p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Prior over latent types `0..k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentTypeSpace {
    pub prior: Distribution,
}

impl LatentTypeSpace {
    pub fn new(prior: Distribution) -> Self {
        Self { prior }
    }

    pub fn num_types(&self) -> usize {
        self.prior.len()
    }
}

/// Row-stochastic likelihood `P(m | theta)`, one row per type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Distribution>", into = "Vec<Distribution>")]
pub struct Channel {
    rows: Vec<Distribution>,
}

impl TryFrom<Vec<Distribution>> for Channel {
    type Error = Error;

    fn try_from(rows: Vec<Distribution>) -> Result<Self> {
        Channel::new(rows)
    }
}

impl From<Channel> for Vec<Distribution> {
    fn from(c: Channel) -> Self {
        c.rows
    }
}

impl Channel {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        check_rectangular(&rows, "channel")?;
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(Distribution::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn num_types(&self) -> usize {
        self.rows.len()
    }

    pub fn num_messages(&self) -> usize {
        self.rows[0].len()
    }

    pub fn likelihood(&self, theta: usize, m: usize) -> f64 {
        self.rows[theta].probs()[m]
    }

    pub fn row(&self, theta: usize) -> &Distribution {
        &self.rows[theta]
    }
}

fn check_rectangular(rows: &[Distribution], what: &str) -> Result<()> {
    let Some(first) = rows.first() else {
        return Err(Error::Dimension(format!("{what} has no rows")));
    };
    if let Some(i) = rows.iter().position(|r| r.len() != first.len()) {
        return Err(Error::Dimension(format!(
            "{what} row {i} has {} entries, expected {}",
            rows[i].len(),
            first.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub posterior: Distribution,
}

/// Action distributions, one row per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Distribution>", into = "Vec<Distribution>")]
pub struct Policy {
    rows: Vec<Distribution>,
}

impl TryFrom<Vec<Distribution>> for Policy {
    type Error = Error;

    fn try_from(rows: Vec<Distribution>) -> Result<Self> {
        Policy::new(rows)
    }
}

impl From<Policy> for Vec<Distribution> {
    fn from(p: Policy) -> Self {
        p.rows
    }
}

impl Policy {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        check_rectangular(&rows, "policy")?;
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(Distribution::new)
                .collect::<Result<_>>()?,
        )
    }

    /// Same distribution in every state.
    pub fn stationary(row: Distribution, num_states: usize) -> Result<Self> {
        Self::new(vec![row; num_states])
    }

    /// Uniform over the maximisers of each row of `q`.
    pub fn greedy(q: &[Vec<f64>]) -> Result<Self> {
        let rows = q
            .iter()
            .map(|row| {
                if row.is_empty() || row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("Q rows must be finite and nonempty".into()));
                }
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Distribution::from_weights(
                    row.iter()
                        .map(|&v| if v == best { 1.0 } else { 0.0 })
                        .collect(),
                )
            })
            .collect::<Result<_>>()?;
        Self::new(rows)
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, s: usize) -> Result<&Distribution> {
        self.rows
            .get(s)
            .ok_or_else(|| Error::Dimension(format!("state {s} of {}", self.rows.len())))
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }
}

/// `pi(a | s, theta)` as one [`Policy`] per latent type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Policy>", into = "Vec<Policy>")]
pub struct ConditionalPolicy {
    by_type: Vec<Policy>,
}

impl TryFrom<Vec<Policy>> for ConditionalPolicy {
    type Error = Error;

    fn try_from(by_type: Vec<Policy>) -> Result<Self> {
        ConditionalPolicy::new(by_type)
    }
}

impl From<ConditionalPolicy> for Vec<Policy> {
    fn from(c: ConditionalPolicy) -> Self {
        c.by_type
    }
}

impl ConditionalPolicy {
    pub fn new(by_type: Vec<Policy>) -> Result<Self> {
        let Some(first) = by_type.first() else {
            return Err(Error::Dimension("conditional policy has no types".into()));
        };
        let shape = (first.num_states(), first.num_actions());
        for (i, p) in by_type.iter().enumerate() {
            if (p.num_states(), p.num_actions()) != shape {
                return Err(Error::Dimension(format!(
                    "policy for type {i} has shape {}x{}, expected {}x{}",
                    p.num_states(),
                    p.num_actions(),
                    shape.0,
                    shape.1
                )));
            }
        }
        Ok(Self { by_type })
    }

    pub fn num_types(&self) -> usize {
        self.by_type.len()
    }

    pub fn num_states(&self) -> usize {
        self.by_type[0].num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.by_type[0].num_actions()
    }

    pub fn policy(&self, theta: usize) -> &Policy {
        &self.by_type[theta]
    }
}

/// Posterior over types after observing message `m`.
pub fn bayes_update(space: &LatentTypeSpace, channel: &Channel, m: usize) -> Result<BeliefState> {
    if channel.num_types() != space.num_types() {
        return Err(Error::Dimension(format!(
            "channel has {} types, prior has {}",
            channel.num_types(),
            space.num_types()
        )));
    }
    if m >= channel.num_messages() {
        return Err(Error::Dimension(format!(
            "message {m} of {}",
            channel.num_messages()
        )));
    }
    let joint: Vec<f64> = space
        .prior
        .probs()
        .iter()
        .enumerate()
        .map(|(theta, &p)| p * channel.likelihood(theta, m))
        .collect();
    let evidence: f64 = joint.iter().sum();
    if evidence <= 0.0 {
        return Err(Error::ZeroEvidence(m));
    }
    let posterior = joint.into_iter().map(|x| x / evidence).collect();
    Ok(BeliefState {
        posterior: Distribution(posterior),
    })
}

/// `sum_theta b(theta) pi(. | s, theta)`.
pub fn tom_policy_mix(
    conditional: &ConditionalPolicy,
    belief: &BeliefState,
    s: usize,
) -> Result<Distribution> {
    if belief.posterior.len() != conditional.num_types() {
        return Err(Error::Dimension(format!(
            "belief over {} types, policy over {}",
            belief.posterior.len(),
            conditional.num_types()
        )));
    }
    let mut mix = vec![0.0; conditional.num_actions()];
    for (theta, &b) in belief.posterior.probs().iter().enumerate() {
        for (acc, &p) in mix
            .iter_mut()
            .zip(conditional.policy(theta).row(s)?.probs())
        {
            *acc += b * p;
        }
    }
    Ok(Distribution(mix))
}

/// An observer's model of another agent: a prior over its latent types, the
/// channel its messages pass through, and its type-conditional behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomModel {
    pub space: LatentTypeSpace,
    pub channel: Channel,
    pub conditional: ConditionalPolicy,
}

impl TomModel {
    pub fn new(
        space: LatentTypeSpace,
        channel: Channel,
        conditional: ConditionalPolicy,
    ) -> Result<Self> {
        let k = space.num_types();
        if channel.num_types() != k || conditional.num_types() != k {
            return Err(Error::Dimension(format!(
                "prior has {k} types, channel {}, policy {}",
                channel.num_types(),
                conditional.num_types()
            )));
        }
        Ok(Self {
            space,
            channel,
            conditional,
        })
    }

    pub fn belief_after(&self, m: usize) -> Result<BeliefState> {
        bayes_update(&self.space, &self.channel, m)
    }

    /// `pi^ToM(. | s, m)`.
    pub fn policy_given(&self, s: usize, m: usize) -> Result<Distribution> {
        tom_policy_mix(&self.conditional, &self.belief_after(m)?, s)
    }

    /// `pi^ToM(. | ., m)` over every state.
    pub fn policy_table(&self, m: usize) -> Result<Policy> {
        let belief = self.belief_after(m)?;
        let rows = (0..self.conditional.num_states())
            .map(|s| tom_policy_mix(&self.conditional, &belief, s))
            .collect::<Result<_>>()?;
        Policy::new(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageChoice {
    pub message: usize,
    pub expected_utility: f64,
    /// Expected utility of every candidate, `-inf` where some plausible
    /// receiver could not have received the message.
    pub utilities: Vec<f64>,
}

/// Picks the message that maximises the speaker's expected utility.
///
/// `receivers[j]` is how a receiver of type `j` interprets messages and acts;
/// `belief` is the speaker's belief over those receiver types and
/// `utility[j][a]` the speaker's payoff when a type-`j` receiver plays `a`.
/// Ties go to the lowest message index.
pub fn select_message(
    utility: &[Vec<f64>],
    belief: &Distribution,
    receivers: &[TomModel],
    s: usize,
) -> Result<MessageChoice> {
    if receivers.len() != belief.len() || utility.len() != belief.len() {
        return Err(Error::Dimension(format!(
            "{} receiver types, {} utility rows, belief over {}",
            receivers.len(),
            utility.len(),
            belief.len()
        )));
    }
    let num_messages = receivers[0].channel.num_messages();
    for (j, r) in receivers.iter().enumerate() {
        if r.channel.num_messages() != num_messages {
            return Err(Error::Dimension(format!(
                "receiver {j} has {} messages, expected {num_messages}",
                r.channel.num_messages()
            )));
        }
        if utility[j].len() != r.conditional.num_actions() {
            return Err(Error::Dimension(format!(
                "utility row {j} has {} entries for {} actions",
                utility[j].len(),
                r.conditional.num_actions()
            )));
        }
    }

    let mut utilities = Vec::with_capacity(num_messages);
    for m in 0..num_messages {
        let mut eu = 0.0;
        for (j, &b) in belief.probs().iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            match receivers[j].policy_given(s, m) {
                Ok(pi) => {
                    eu += b * dot(pi.probs(), &utility[j]);
                }
                Err(Error::ZeroEvidence(_)) => {
                    eu = f64::NEG_INFINITY;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        utilities.push(eu);
    }
    let message = argmax(&utilities);
    if utilities[message] == f64::NEG_INFINITY {
        return Err(Error::Domain(
            "no message is interpretable by every plausible receiver".into(),
        ));
    }
    Ok(MessageChoice {
        message,
        expected_utility: utilities[message],
        utilities,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

/// `KL(p || q)` in the requested base.
pub fn kl_divergence(p: &Distribution, q: &Distribution, base: LogBase) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "KL between supports of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut nats = 0.0;
    for (i, (&pi, &qi)) in p.probs().iter().zip(q.probs()).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::InfiniteDivergence { index: i });
        }
        nats += pi * (pi / qi).ln();
    }
    let nats = nats.max(0.0);
    Ok(match base {
        LogBase::Nats => nats,
        LogBase::Bits => nats / std::f64::consts::LN_2,
    })
}

/// `KL(pi^RL(. | s) || pi^ToM(. | s, m))` in bits.
pub fn tom_divergence(rl: &Policy, tom: &TomModel, s: usize, m: usize) -> Result<f64> {
    kl_divergence(rl.row(s)?, &tom.policy_given(s, m)?, LogBase::Bits)
}

/// Maximiser of `E_pi[Q] - lambda * KL(pi || anchor)` (KL in nats).
///
/// The solution is `pi(a) ∝ anchor(a) exp(Q(a) / lambda)`. At `lambda = 0`
/// it degenerates to a one-hot on the best action inside the anchor's
/// support, lowest index on ties.
pub fn pikl_best_response(q: &[f64], anchor: &Distribution, lambda: f64) -> Result<Distribution> {
    if q.len() != anchor.len() {
        return Err(Error::Dimension(format!(
            "{} action values for an anchor over {}",
            q.len(),
            anchor.len()
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("action values must be finite".into()));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "regularisation weight must be finite and nonnegative, got {lambda}"
        )));
    }
    let support = anchor.probs().iter().map(|&p| p > 0.0);
    let best = q
        .iter()
        .zip(support.clone())
        .filter(|&(_, s)| s)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);

    if lambda == 0.0 {
        let idx = q
            .iter()
            .zip(support)
            .position(|(&v, s)| s && v == best)
            .expect("anchor has nonempty support");
        return Distribution::delta(q.len(), idx);
    }
    let weights = q
        .iter()
        .zip(anchor.probs())
        .map(|(&v, &a)| {
            if a > 0.0 {
                a * ((v - best) / lambda).exp()
            } else {
                0.0
            }
        })
        .collect();
    Distribution::from_weights(weights)
}

/// Maximiser of `E_pi[Q] - l1 * KL(pi || anchor) - l2 * KL(pi || tom)`.
///
/// This is the per-state optimum of the coupled objective: a geometric
/// blend of the two reference policies tilted by `exp(Q / (l1 + l2))`.
pub fn pikl_coupled_best_response(
    q: &[f64],
    anchor: &Distribution,
    tom: &Distribution,
    lambda_anchor: f64,
    lambda_tom: f64,
) -> Result<Distribution> {
    if tom.len() != anchor.len() {
        return Err(Error::Dimension(format!(
            "ToM policy over {} actions, anchor over {}",
            tom.len(),
            anchor.len()
        )));
    }
    if lambda_tom < 0.0 || !lambda_tom.is_finite() {
        return Err(Error::Domain(format!(
            "regularisation weight must be finite and nonnegative, got {lambda_tom}"
        )));
    }
    if lambda_tom == 0.0 {
        return pikl_best_response(q, anchor, lambda_anchor);
    }
    if lambda_anchor == 0.0 {
        return pikl_best_response(q, tom, lambda_tom);
    }
    // Validates q and lambda_anchor.
    pikl_best_response(q, anchor, lambda_anchor)?;
    let total = lambda_anchor + lambda_tom;
    let logits: Vec<f64> = q
        .iter()
        .zip(anchor.probs().iter().zip(tom.probs()))
        .map(|(&v, (&a, &t))| {
            if a > 0.0 && t > 0.0 {
                (lambda_anchor * a.ln() + lambda_tom * t.ln() + v) / total
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let best = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::Domain(
            "anchor and ToM policies have disjoint supports".into(),
        ));
    }
    Distribution::from_weights(logits.iter().map(|&l| (l - best).exp()).collect())
}

/// `E_pi[Q] - lambda * KL(pi || anchor)` with KL in nats.
pub fn pikl_objective(
    pi: &Distribution,
    q: &[f64],
    anchor: &Distribution,
    lambda: f64,
) -> Result<f64> {
    if q.len() != pi.len() {
        return Err(Error::Dimension(format!(
            "{} action values for a policy over {}",
            q.len(),
            pi.len()
        )));
    }
    Ok(dot(pi.probs(), q) - weighted_kl(lambda, pi, anchor)?.1)
}

/// Returns `(kl, lambda * kl)`. A zero weight tolerates infinite divergence.
fn weighted_kl(lambda: f64, p: &Distribution, q: &Distribution) -> Result<(f64, f64)> {
    match kl_divergence(p, q, LogBase::Nats) {
        Ok(kl) => Ok((kl, lambda * kl)),
        Err(Error::InfiniteDivergence { .. }) if lambda == 0.0 => Ok((f64::INFINITY, 0.0)),
        Err(e) => Err(e),
    }
}

/// How the ToM divergence term relates to the policy being scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationMode {
    /// `pi^RL` is the greedy policy of `Q`; the term does not depend on the
    /// scored policy and acts as a reported metric.
    #[default]
    Diagnostic,
    /// `pi^RL` is the scored policy itself, so the term pulls it toward the
    /// ToM policy.
    Coupled,
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    #[serde(default = "default_lambda")]
    pub lambda_anchor: f64,
    #[serde(default = "default_lambda")]
    pub lambda_tom: f64,
    /// `R(s, a)`.
    pub reward: Vec<Vec<f64>>,
    /// `Q(s, a)`, used for the greedy policy in diagnostic mode.
    pub q: Vec<Vec<f64>>,
}

impl ObjectiveParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_anchor", self.lambda_anchor),
            ("lambda_tom", self.lambda_tom),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.reward.len() != self.q.len() {
            return Err(Error::Dimension(format!(
                "reward has {} states, Q has {}",
                self.reward.len(),
                self.q.len()
            )));
        }
        for (s, (r, q)) in self.reward.iter().zip(&self.q).enumerate() {
            if r.len() != q.len() {
                return Err(Error::Dimension(format!(
                    "state {s}: reward has {} actions, Q has {}",
                    r.len(),
                    q.len()
                )));
            }
            if r.iter().chain(q).any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "state {s}: non-finite reward or value"
                )));
            }
        }
        Ok(())
    }
}

/// Terms of the combined objective. KL terms are in nats and already
/// averaged over the state distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub expected_reward: f64,
    pub anchor_kl: f64,
    pub tom_kl: f64,
    pub total: f64,
}

/// `E[R] - lambda_anchor * KL(pi || anchor) - lambda_tom * KL(pi^RL || pi^ToM)`,
/// with expectations over `state_dist` and `pi`.
pub fn unified_objective(
    pi: &Policy,
    params: &ObjectiveParams,
    anchor: &Policy,
    tom: &Policy,
    state_dist: &Distribution,
    mode: InterpretationMode,
) -> Result<ObjectiveBreakdown> {
    params.validate()?;
    let shape = (pi.num_states(), pi.num_actions());
    for (name, p) in [("anchor", anchor), ("tom", tom)] {
        if (p.num_states(), p.num_actions()) != shape {
            return Err(Error::Dimension(format!(
                "{name} policy is {}x{}, expected {}x{}",
                p.num_states(),
                p.num_actions(),
                shape.0,
                shape.1
            )));
        }
    }
    if params.reward.len() != shape.0 || params.reward[0].len() != shape.1 {
        return Err(Error::Dimension(format!(
            "reward table does not match a {}x{} policy",
            shape.0, shape.1
        )));
    }
    if state_dist.len() != shape.0 {
        return Err(Error::Dimension(format!(
            "state distribution over {} states, policy over {}",
            state_dist.len(),
            shape.0
        )));
    }
    let greedy;
    let rl = match mode {
        InterpretationMode::Diagnostic => {
            greedy = Policy::greedy(&params.q)?;
            &greedy
        }
        InterpretationMode::Coupled => pi,
    };

    let mut out = ObjectiveBreakdown {
        expected_reward: 0.0,
        anchor_kl: 0.0,
        tom_kl: 0.0,
        total: 0.0,
    };
    let (mut anchor_pen, mut tom_pen) = (0.0, 0.0);
    for (s, &d) in state_dist.probs().iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let row = pi.row(s)?;
        out.expected_reward += d * dot(row.probs(), &params.reward[s]);
        let (kl, pen) = weighted_kl(params.lambda_anchor, row, anchor.row(s)?)?;
        out.anchor_kl += d * kl;
        anchor_pen += d * pen;
        let (kl, pen) = weighted_kl(params.lambda_tom, rl.row(s)?, tom.row(s)?)?;
        out.tom_kl += d * kl;
        tom_pen += d * pen;
    }
    out.total = out.expected_reward - anchor_pen - tom_pen;
    Ok(out)
}

/// A complete single-agent instance: objective, reference policies, the
/// agent's ToM model of its partner and the message it observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiklInstance {
    pub objective: ObjectiveParams,
    pub anchor: Policy,
    pub state_distribution: Distribution,
    pub tom: TomModel,
    pub message: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiklSolution {
    pub mode: InterpretationMode,
    pub posterior: Distribution,
    pub tom_policy: Policy,
    /// Per-state maximiser of the objective under `mode`.
    pub policy: Policy,
    /// `KL(greedy(Q) || pi^ToM)` per state, in bits.
    pub tom_divergence_bits: Vec<f64>,
    pub objective: ObjectiveBreakdown,
}

impl PiklInstance {
    pub fn solve(&self, mode: InterpretationMode) -> Result<PiklSolution> {
        self.objective.validate()?;
        let posterior = self.tom.belief_after(self.message)?.posterior;
        let tom_policy = self.tom.policy_table(self.message)?;
        if self.objective.q.len() != tom_policy.num_states() {
            return Err(Error::Dimension(format!(
                "Q has {} states, ToM policy has {}",
                self.objective.q.len(),
                tom_policy.num_states()
            )));
        }
        let rows = self
            .objective
            .q
            .iter()
            .enumerate()
            .map(|(s, q)| {
                let anchor = self.anchor.row(s)?;
                match mode {
                    InterpretationMode::Diagnostic => {
                        pikl_best_response(q, anchor, self.objective.lambda_anchor)
                    }
                    InterpretationMode::Coupled => pikl_coupled_best_response(
                        q,
                        anchor,
                        tom_policy.row(s)?,
                        self.objective.lambda_anchor,
                        self.objective.lambda_tom,
                    ),
                }
            })
            .collect::<Result<_>>()?;
        let policy = Policy::new(rows)?;
        let greedy = Policy::greedy(&self.objective.q)?;
        let tom_divergence_bits = (0..greedy.num_states())
            .map(|s| kl_divergence(greedy.row(s)?, tom_policy.row(s)?, LogBase::Bits))
            .map(|r| match r {
                Err(Error::InfiniteDivergence { .. }) => Ok(f64::INFINITY),
                other => other,
            })
            .collect::<Result<_>>()?;
        let objective = unified_objective(
            &policy,
            &self.objective,
            &self.anchor,
            &tom_policy,
            &self.state_distribution,
            mode,
        )?;
        Ok(PiklSolution {
            mode,
            posterior,
            tom_policy,
            policy,
            tom_divergence_bits,
            objective,
        })
    }
}
