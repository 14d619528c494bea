//! Two-action n-player games and their utility polynomials.
//!
//! Actions are encoded as `x_j in {-1, +1}` with `+1` meaning Cooperate.
//! Payoff tables are indexed by profile in mixed-radix order with player 1
//! as the most significant digit and Cooperate as digit 0, so for two
//! players the order is CC, CD, DC, DD.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Cooperate,
    Defect,
}

pub use Action::{Cooperate as C, Defect as D};

impl Action {
    /// `+1` for Cooperate, `-1` for Defect.
    pub fn sign(self) -> f64 {
        match self {
            Action::Cooperate => 1.0,
            Action::Defect => -1.0,
        }
    }

    pub fn from_sign(x: f64) -> Result<Self> {
        if x == 1.0 {
            Ok(Action::Cooperate)
        } else if x == -1.0 {
            Ok(Action::Defect)
        } else {
            Err(Error::Domain(format!(
                "action sign must be +1 or -1, got {x}"
            )))
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Action::Cooperate => Action::Defect,
            Action::Defect => Action::Cooperate,
        }
    }

    fn digit(self) -> usize {
        match self {
            Action::Cooperate => 0,
            Action::Defect => 1,
        }
    }
}

/// Bit of `player` (0-based) in a profile index or subset mask.
fn player_bit(n: usize, player: usize) -> usize {
    1 << (n - 1 - player)
}

pub fn profile_index(actions: &[Action]) -> usize {
    actions.iter().fold(0, |acc, a| (acc << 1) | a.digit())
}

pub fn profile_actions(n: usize, index: usize) -> Vec<Action> {
    (0..n)
        .map(|j| {
            if index & player_bit(n, j) == 0 {
                Action::Cooperate
            } else {
                Action::Defect
            }
        })
        .collect()
}

/// Subset mask for a set of 0-based players, in the profile bit layout.
pub fn subset_mask(n: usize, players: &[usize]) -> usize {
    players.iter().fold(0, |acc, &j| acc | player_bit(n, j))
}

/// Per-player payoff tables over all `2^n` pure profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameTable")]
pub struct GameTable {
    n: usize,
    payoffs: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawGameTable {
    n: usize,
    payoffs: Vec<Vec<f64>>,
}

impl TryFrom<RawGameTable> for GameTable {
    type Error = Error;

    fn try_from(raw: RawGameTable) -> Result<Self> {
        GameTable::new(raw.n, raw.payoffs)
    }
}

impl GameTable {
    pub fn new(n: usize, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::Domain(format!("unsupported player count {n}")));
        }
        if payoffs.len() != n {
            return Err(Error::Dimension(format!(
                "{} payoff tables for {n} players",
                payoffs.len()
            )));
        }
        for (i, table) in payoffs.iter().enumerate() {
            if table.len() != 1 << n {
                return Err(Error::Dimension(format!(
                    "player {i} has {} payoffs, expected {}",
                    table.len(),
                    1usize << n
                )));
            }
        }
        Ok(Self { n, payoffs })
    }

    /// Symmetric 2x2 game from a row-player matrix `[[CC, CD], [DC, DD]]`.
    pub fn symmetric_2x2(row: [[f64; 2]; 2]) -> Self {
        let p1 = vec![row[0][0], row[0][1], row[1][0], row[1][1]];
        let p2 = vec![row[0][0], row[1][0], row[0][1], row[1][1]];
        Self {
            n: 2,
            payoffs: vec![p1, p2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_profiles(&self) -> usize {
        1 << self.n
    }

    pub fn payoffs(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn payoff(&self, player: usize, actions: &[Action]) -> f64 {
        self.payoffs[player][profile_index(actions)]
    }

    /// Applies `a * u + b` to one player's payoffs.
    pub fn affine_transform(&self, player: usize, scale: f64, shift: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.payoffs[player] {
            *v = scale * *v + shift;
        }
        out
    }
}

/// Which action the value `+1` stands for when expanding utilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    /// `+1` is Cooperate. Used throughout this crate.
    #[default]
    CooperatePositive,
    /// `+1` is Defect, the orientation of the classic quarter-sum formula.
    DefectPositive,
}

impl SignConvention {
    pub fn sign(self, action: Action) -> f64 {
        match self {
            SignConvention::CooperatePositive => action.sign(),
            SignConvention::DefectPositive => -action.sign(),
        }
    }
}

/// Multilinear expansion `U(x) = sum_S a^S prod_{j in S} x_j`.
///
/// Co-factors are indexed by subset mask in the profile bit layout, so
/// `cofactors[0]` is the constant term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityPolynomial {
    n: usize,
    convention: SignConvention,
    cofactors: Vec<f64>,
}

impl UtilityPolynomial {
    pub fn new(n: usize, convention: SignConvention, cofactors: Vec<f64>) -> Result<Self> {
        if cofactors.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} co-factors for {n} variables",
                cofactors.len()
            )));
        }
        Ok(Self {
            n,
            convention,
            cofactors,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            convention: SignConvention::default(),
            cofactors: vec![0.0; 1 << n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn cofactors(&self) -> &[f64] {
        &self.cofactors
    }

    /// Co-factor of the monomial over the given 0-based players.
    pub fn cofactor(&self, players: &[usize]) -> f64 {
        self.cofactors[subset_mask(self.n, players)]
    }

    /// `(a^0, a^own, a^other, a^pair)` for a two-player polynomial.
    pub fn dyadic(&self, own: usize) -> Result<[f64; 4]> {
        if self.n != 2 || own > 1 {
            return Err(Error::WrongArity {
                expected: 2,
                found: self.n,
            });
        }
        let other = 1 - own;
        Ok([
            self.cofactor(&[]),
            self.cofactor(&[own]),
            self.cofactor(&[other]),
            self.cofactor(&[0, 1]),
        ])
    }

    /// Evaluates the multilinear extension at real-valued inputs.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "profile has {} entries, polynomial has {} variables",
                x.len(),
                self.n
            )));
        }
        let mut total = 0.0;
        for (mask, &a) in self.cofactors.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let monomial: f64 = (0..self.n)
                .filter(|&j| mask & player_bit(self.n, j) != 0)
                .map(|j| x[j])
                .product();
            total += a * monomial;
        }
        Ok(total)
    }

    pub fn evaluate_actions(&self, actions: &[Action]) -> Result<f64> {
        let x: Vec<f64> = actions.iter().map(|&a| self.convention.sign(a)).collect();
        self.evaluate(&x)
    }

    /// Re-expresses the polynomial under the other sign convention.
    pub fn with_convention(&self, convention: SignConvention) -> Self {
        if convention == self.convention {
            return self.clone();
        }
        let cofactors = self
            .cofactors
            .iter()
            .enumerate()
            .map(|(mask, &a)| if mask.count_ones() % 2 == 1 { -a } else { a })
            .collect();
        Self {
            n: self.n,
            convention,
            cofactors,
        }
    }
}

/// In-place Walsh-Hadamard butterfly over a power-of-two slice.
fn walsh_hadamard(values: &mut [f64]) {
    let len = values.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (values[i], values[i + h]);
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Boolean-cube Fourier co-factors of one player's payoffs,
/// `a^S = 2^-n sum_x g(x) prod_{j in S} x_j`, with `+1` = Cooperate.
pub fn cofactors_n(table: &GameTable, player: usize) -> Result<UtilityPolynomial> {
    if player >= table.n() {
        return Err(Error::Domain(format!(
            "player {player} in a {}-player game",
            table.n()
        )));
    }
    // With Cooperate as bit 0, prod x_j = (-1)^popcount(S & profile), which
    // is exactly the Hadamard kernel.
    let mut values = table.payoffs(player).to_vec();
    walsh_hadamard(&mut values);
    let scale = 1.0 / table.num_profiles() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    UtilityPolynomial::new(table.n(), SignConvention::CooperatePositive, values)
}

/// Two-player co-factors by the quarter-sum formula.
pub fn cofactors_2x2(
    table: &GameTable,
    player: usize,
    convention: SignConvention,
) -> Result<UtilityPolynomial> {
    if table.n() != 2 {
        return Err(Error::WrongArity {
            expected: 2,
            found: table.n(),
        });
    }
    if player > 1 {
        return Err(Error::Domain(format!("player {player} in a 2-player game")));
    }
    let other = 1 - player;
    let g = |own: Action, opp: Action| {
        let mut actions = [own; 2];
        actions[other] = opp;
        table.payoff(player, &actions)
    };
    let (cc, cd, dc, dd) = (g(C, C), g(C, D), g(D, C), g(D, D));
    // Oriented with +1 = Defect, as the formula is usually printed.
    let constant = (cc + cd + dc + dd) / 4.0;
    let own = ((dc + dd) - (cc + cd)) / 4.0;
    let opp = ((cd + dd) - (cc + dc)) / 4.0;
    let pair = ((cc + dd) - (cd + dc)) / 4.0;

    let mut cofactors = vec![0.0; 4];
    cofactors[0] = constant;
    cofactors[subset_mask(2, &[player])] = own;
    cofactors[subset_mask(2, &[other])] = opp;
    cofactors[subset_mask(2, &[0, 1])] = pair;
    let poly = UtilityPolynomial::new(2, SignConvention::DefectPositive, cofactors)?;
    Ok(poly.with_convention(convention))
}

/// Payoff parameters of the PD/Harmony family: `R = 1`, `P = 0`,
/// `T = R + c`, `S = P - c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGameParam {
    c: f64,
}

impl EffectiveGameParam {
    pub const REWARD: f64 = 1.0;
    pub const PUNISHMENT: f64 = 0.0;

    pub fn new(c: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&c) {
            return Err(Error::Domain(format!("coupling {c} outside [-1/2, 1/2]")));
        }
        Ok(Self { c })
    }

    pub fn c(self) -> f64 {
        self.c
    }

    pub fn temptation(self) -> f64 {
        Self::REWARD + self.c
    }

    pub fn sucker(self) -> f64 {
        Self::PUNISHMENT - self.c
    }
}

/// The symmetric 2x2 game `{CC: (R,R), CD: (-c, R+c), DC: (R+c, -c), DD: (0,0)}`.
pub fn effective_game(param: EffectiveGameParam) -> GameTable {
    effective_game_with_reward(param.c(), EffectiveGameParam::REWARD)
}

pub fn effective_game_with_reward(c: f64, reward: f64) -> GameTable {
    let p = EffectiveGameParam::PUNISHMENT;
    GameTable::symmetric_2x2([[reward, p - c], [reward + c, p]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashProfile {
    pub index: usize,
    pub actions: Vec<Action>,
    /// Some player is indifferent to a unilateral deviation.
    pub weak: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NashSet {
    pub profiles: Vec<NashProfile>,
}

impl NashSet {
    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn contains(&self, actions: &[Action]) -> bool {
        self.profiles.iter().any(|p| p.actions == actions)
    }

    pub fn unique(&self) -> Option<&NashProfile> {
        match self.profiles.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

/// Exhaustive pure-strategy equilibrium enumeration.
pub fn pure_nash(table: &GameTable) -> NashSet {
    let n = table.n();
    let mut profiles = Vec::new();
    for index in 0..table.num_profiles() {
        let mut stable = true;
        let mut weak = false;
        for player in 0..n {
            let payoffs = table.payoffs(player);
            let here = payoffs[index];
            let there = payoffs[index ^ player_bit(n, player)];
            let tol = 1e-12 * here.abs().max(there.abs()).max(1.0);
            if there > here + tol {
                stable = false;
                break;
            }
            if (there - here).abs() <= tol {
                weak = true;
            }
        }
        if stable {
            profiles.push(NashProfile {
                index,
                actions: profile_actions(n, index),
                weak,
            });
        }
    }
    NashSet { profiles }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameClass {
    PrisonersDilemma,
    Harmony,
    Degenerate,
}

/// Dominance classification of the effective game.
pub fn classify_game(param: EffectiveGameParam) -> GameClass {
    let (r, p) = (EffectiveGameParam::REWARD, EffectiveGameParam::PUNISHMENT);
    let (t, s) = (param.temptation(), param.sucker());
    if t > r && p > s {
        GameClass::PrisonersDilemma
    } else if r > t && s > p {
        GameClass::Harmony
    } else {
        GameClass::Degenerate
    }
}

/// Revenue share the orchestrating agent takes from the dyad.
pub const REVENUE_SHARE: f64 = 0.1;

/// Amplitude of the orchestrator's signal, `|x1|`.
pub const ORCHESTRATOR_AMPLITUDE: f64 = 0.25;

fn check_orchestrator_value(x1: f64) -> Result<()> {
    if (x1.abs() - ORCHESTRATOR_AMPLITUDE).abs() > 1e-12 {
        return Err(Error::Domain(format!("x1 must be +-1/4, got {x1}")));
    }
    Ok(())
}

/// `(U1, U2, U3)` when the orchestrator sets the dyad's coupling `c = x1`.
pub fn triadic_utilities(x1: f64, x2: Action, x3: Action, reward: f64) -> Result<[f64; 3]> {
    check_orchestrator_value(x1)?;
    let game = effective_game_with_reward(x1, reward);
    let u2 = game.payoff(0, &[x2, x3]);
    let u3 = game.payoff(1, &[x2, x3]);
    Ok([REVENUE_SHARE * (u2 + u3), u2, u3])
}

/// Utilities of the three agents as polynomials in `(x1, x2, x3)`.
///
/// With `+1` = Cooperate the dyad's utility is
/// `U2 = (R - x1 x2 + (R + x1) x3) / 2`, symmetric for `U3`, and
/// `U1 = (U2 + U3) / 10`. Meaningful for `x1 in {-1/4, +1/4}`.
pub fn hypergraph_polynomials(reward: f64) -> [UtilityPolynomial; 3] {
    let n = 3;
    let mut u2 = vec![0.0; 8];
    u2[0] = reward / 2.0;
    u2[subset_mask(n, &[0, 1])] = -0.5;
    u2[subset_mask(n, &[2])] = reward / 2.0;
    u2[subset_mask(n, &[0, 2])] = 0.5;

    let mut u3 = vec![0.0; 8];
    u3[0] = reward / 2.0;
    u3[subset_mask(n, &[0, 2])] = -0.5;
    u3[subset_mask(n, &[1])] = reward / 2.0;
    u3[subset_mask(n, &[0, 1])] = 0.5;

    let u1: Vec<f64> = u2
        .iter()
        .zip(&u3)
        .map(|(a, b)| REVENUE_SHARE * (a + b))
        .collect();
    let mk = |c| UtilityPolynomial::new(n, SignConvention::CooperatePositive, c).unwrap();
    [mk(u1), mk(u2), mk(u3)]
}
