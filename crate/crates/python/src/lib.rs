//! Python bindings. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cimeasure::game::{self, EffectiveGameParam, GameTable, SignConvention};
use cimeasure::info::{self, JointSeries, SymbolSeries};
use cimeasure::scenarios::{self, ScenarioConfig};
use cimeasure::tom::{
    self, BeliefState, Channel, ConditionalPolicy, Distribution, LatentTypeSpace, LogBase, Policy,
};

fn py_err(e: cimeasure::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Excess-TDMI result at one lag.
#[pyclass(frozen, get_all, module = "pycimeasure")]
struct MeasureReport {
    tau: usize,
    joint_tdmi: f64,
    per_agent_tdmi: Vec<f64>,
    excess: f64,
}

#[pymethods]
impl MeasureReport {
    fn __repr__(&self) -> String {
        format!(
            "MeasureReport(tau={}, joint_tdmi={:.6}, per_agent_tdmi={:?}, excess={:.6})",
            self.tau, self.joint_tdmi, self.per_agent_tdmi, self.excess
        )
    }
}

impl From<info::MeasureReport> for MeasureReport {
    fn from(r: info::MeasureReport) -> Self {
        Self {
            tau: r.tau,
            joint_tdmi: r.joint_tdmi,
            per_agent_tdmi: r.per_agent_tdmi,
            excess: r.excess,
        }
    }
}

fn joint(columns: Vec<Vec<usize>>) -> PyResult<JointSeries> {
    let comps = columns
        .into_iter()
        .map(SymbolSeries::from_symbols)
        .collect::<cimeasure::Result<_>>()
        .map_err(py_err)?;
    JointSeries::new(comps).map_err(py_err)
}

/// TDMI of one symbol sequence, in bits.
#[pyfunction]
fn tdmi(symbols: Vec<usize>, tau: usize) -> PyResult<f64> {
    let s = SymbolSeries::from_symbols(symbols).map_err(py_err)?;
    info::tdmi(&s, tau).map_err(py_err)
}

/// Joint minus summed per-agent TDMI of aligned columns.
#[pyfunction]
fn excess_tdmi(columns: Vec<Vec<usize>>, tau: usize) -> PyResult<MeasureReport> {
    Ok(info::excess_tdmi(&joint(columns)?, tau)
        .map_err(py_err)?
        .into())
}

fn convention(name: &str) -> PyResult<SignConvention> {
    match name {
        "cooperate" => Ok(SignConvention::CooperatePositive),
        "defect" => Ok(SignConvention::DefectPositive),
        other => Err(PyValueError::new_err(format!(
            "convention must be 'cooperate' or 'defect', got {other:?}"
        ))),
    }
}

/// Fourier co-factors of one player's payoffs, indexed by subset mask
/// (player 0 is the most significant bit).
#[pyfunction]
#[pyo3(signature = (payoffs, player, convention = "cooperate"))]
fn cofactors(payoffs: Vec<Vec<f64>>, player: usize, convention: &str) -> PyResult<Vec<f64>> {
    let conv = self::convention(convention)?;
    let n = payoffs.len();
    let table = GameTable::new(n, payoffs).map_err(py_err)?;
    let poly = game::cofactors_n(&table, player).map_err(py_err)?;
    Ok(poly.with_convention(conv).cofactors().to_vec())
}

/// Payoff tables `[player 0, player 1]` of the coupling-`c` game.
#[pyfunction]
fn effective_game(c: f64) -> PyResult<Vec<Vec<f64>>> {
    let table = game::effective_game(EffectiveGameParam::new(c).map_err(py_err)?);
    Ok((0..2).map(|p| table.payoffs(p).to_vec()).collect())
}

/// Pure Nash equilibria as strings such as `"DD"`.
#[pyfunction]
fn pure_nash(payoffs: Vec<Vec<f64>>) -> PyResult<Vec<String>> {
    let n = payoffs.len();
    let table = GameTable::new(n, payoffs).map_err(py_err)?;
    Ok(game::pure_nash(&table)
        .profiles
        .iter()
        .map(|p| {
            p.actions
                .iter()
                .map(|a| match a {
                    game::Action::Cooperate => 'C',
                    game::Action::Defect => 'D',
                })
                .collect()
        })
        .collect())
}

/// Runs a scenario from a JSON config and returns agents, symbolised
/// series, reports and (for matching pennies) the monkey's reward rate.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let config: ScenarioConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let log = scenarios::run(&config).map_err(py_err)?;
    let reports: Vec<MeasureReport> = scenarios::measure_log(&log, &config.taus)
        .map_err(py_err)?
        .into_iter()
        .map(Into::into)
        .collect();
    let series: Vec<Vec<usize>> = log
        .state_series()
        .map_err(py_err)?
        .components()
        .iter()
        .map(|c| c.symbols().to_vec())
        .collect();
    let out = PyDict::new(py);
    out.set_item("agents", log.agent_names())?;
    out.set_item("series", series)?;
    out.set_item("reports", reports)?;
    out.set_item("monkey_reward_rate", scenarios::monkey_reward_rate(&log))?;
    Ok(out)
}

fn dist(p: Vec<f64>) -> PyResult<Distribution> {
    Distribution::new(p).map_err(py_err)
}

/// Posterior over types after message `m`; `likelihood[theta][m]`.
#[pyfunction]
fn bayes_update(prior: Vec<f64>, likelihood: Vec<Vec<f64>>, m: usize) -> PyResult<Vec<f64>> {
    let space = LatentTypeSpace::new(dist(prior)?);
    let channel = Channel::from_rows(likelihood).map_err(py_err)?;
    let b = tom::bayes_update(&space, &channel, m).map_err(py_err)?;
    Ok(b.posterior.probs().to_vec())
}

/// Belief-weighted mixture of per-type action distributions.
#[pyfunction]
fn tom_policy_mix(policies: Vec<Vec<f64>>, belief: Vec<f64>) -> PyResult<Vec<f64>> {
    let cond = ConditionalPolicy::new(
        policies
            .into_iter()
            .map(|row| Policy::from_rows(vec![row]))
            .collect::<cimeasure::Result<_>>()
            .map_err(py_err)?,
    )
    .map_err(py_err)?;
    let belief = BeliefState {
        posterior: dist(belief)?,
    };
    Ok(tom::tom_policy_mix(&cond, &belief, 0)
        .map_err(py_err)?
        .probs()
        .to_vec())
}

/// `argmax_pi E_pi[q] - lam * KL(pi || anchor)`.
#[pyfunction]
fn pikl_best_response(q: Vec<f64>, anchor: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    Ok(tom::pikl_best_response(&q, &dist(anchor)?, lam)
        .map_err(py_err)?
        .probs()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (p, q, base = "bits"))]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>, base: &str) -> PyResult<f64> {
    let base = match base {
        "bits" => LogBase::Bits,
        "nats" => LogBase::Nats,
        other => return Err(PyValueError::new_err(format!("unknown base {other:?}"))),
    };
    tom::kl_divergence(&dist(p)?, &dist(q)?, base).map_err(py_err)
}

#[pymodule]
fn pycimeasure(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MeasureReport>()?;
    m.add_function(wrap_pyfunction!(tdmi, m)?)?;
    m.add_function(wrap_pyfunction!(excess_tdmi, m)?)?;
    m.add_function(wrap_pyfunction!(cofactors, m)?)?;
    m.add_function(wrap_pyfunction!(effective_game, m)?)?;
    m.add_function(wrap_pyfunction!(pure_nash, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_update, m)?)?;
    m.add_function(wrap_pyfunction!(tom_policy_mix, m)?)?;
    m.add_function(wrap_pyfunction!(pikl_best_response, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    Ok(())
}
