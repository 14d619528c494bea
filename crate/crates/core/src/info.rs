//! Plug-in information measures over discrete time series.
//!
//! All quantities are maximum-likelihood estimates from empirical
//! frequencies, reported in bits, with `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single discrete-valued time series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSeries {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl SymbolSeries {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidLag { tau: 0, len: 0 });
        }
        if alphabet_size == 0 {
            return Err(Error::Domain("alphabet size must be positive".into()));
        }
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s >= alphabet_size)
        {
            return Err(Error::SymbolOutOfRange {
                symbol,
                position,
                alphabet_size,
            });
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    /// Builds a series whose alphabet is `max(symbols) + 1`.
    pub fn from_symbols(symbols: Vec<usize>) -> Result<Self> {
        let alphabet_size = symbols.iter().copied().max().map_or(1, |m| m + 1);
        Self::new(symbols, alphabet_size)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Several aligned series, one per agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSeries {
    components: Vec<SymbolSeries>,
}

impl JointSeries {
    pub fn new(components: Vec<SymbolSeries>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Dimension(
                "joint series needs at least one component".into(),
            ));
        };
        let expected = first.len();
        for (index, c) in components.iter().enumerate() {
            if c.len() != expected {
                return Err(Error::Alignment {
                    index,
                    expected,
                    found: c.len(),
                });
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[SymbolSeries] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Collapses the components into one series over the product alphabet.
    ///
    /// Mixed-radix encoding with the first component most significant.
    pub fn product_series(&self) -> Result<SymbolSeries> {
        let mut alphabet = 1usize;
        for c in &self.components {
            alphabet = alphabet
                .checked_mul(c.alphabet_size())
                .ok_or_else(|| Error::Domain("product alphabet overflows usize".into()))?;
        }
        let symbols = (0..self.len())
            .map(|t| {
                self.components
                    .iter()
                    .fold(0usize, |acc, c| acc * c.alphabet_size() + c.symbols()[t])
            })
            .collect();
        Ok(SymbolSeries {
            symbols,
            alphabet_size: alphabet,
        })
    }
}

/// Empirical or analytic joint distribution of (present, lagged) symbols.
///
/// Both axes are relabelled densely in ascending order of the original
/// symbol, so two series with the same pairing structure produce
/// bit-identical tables regardless of the symbol values used.
#[derive(Clone, Debug, PartialEq)]
pub struct LagPairDistribution {
    tau: usize,
    sample_count: Option<usize>,
    present_labels: Vec<usize>,
    lagged_labels: Vec<usize>,
    /// (present index, lagged index, probability), sorted, zero cells omitted.
    cells: Vec<(usize, usize, f64)>,
    present_marginal: Vec<f64>,
    lagged_marginal: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl LagPairDistribution {
    /// Pairs `x[t]` with `x[t - tau]` for every `t` in `tau..T`.
    pub fn from_series(series: &SymbolSeries, tau: usize) -> Result<Self> {
        let len = series.len();
        if tau == 0 || tau >= len {
            return Err(Error::InvalidLag { tau, len });
        }
        let xs = series.symbols();
        let present = &xs[tau..];
        let lagged = &xs[..len - tau];

        let (present_labels, present_codes) = dense_codes(present);
        let (lagged_labels, lagged_codes) = dense_codes(lagged);

        let mut pairs: Vec<(usize, usize)> = present_codes
            .iter()
            .copied()
            .zip(lagged_codes.iter().copied())
            .collect();
        pairs.sort_unstable();

        let total = pairs.len();
        let n = total as f64;
        let mut cells = Vec::new();
        let mut present_counts = vec![0u64; present_labels.len()];
        let mut lagged_counts = vec![0u64; lagged_labels.len()];
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i;
            while j < pairs.len() && pairs[j] == pairs[i] {
                j += 1;
            }
            let (a, b) = pairs[i];
            let count = (j - i) as u64;
            present_counts[a] += count;
            lagged_counts[b] += count;
            cells.push((a, b, count as f64 / n));
            i = j;
        }

        Ok(Self {
            tau,
            sample_count: Some(total),
            present_labels,
            lagged_labels,
            cells,
            present_marginal: present_counts.iter().map(|&c| c as f64 / n).collect(),
            lagged_marginal: lagged_counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }

    /// Joint series are tupled into the product alphabet first.
    pub fn from_joint(joint: &JointSeries, tau: usize) -> Result<Self> {
        Self::from_series(&joint.product_series()?, tau)
    }

    /// Builds a distribution from an explicit probability table
    /// `table[present][lagged]`.
    pub fn from_probabilities(table: &[Vec<f64>], tau: usize) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDistribution("empty probability table".into()));
        }
        let mut cells = Vec::new();
        let mut present_marginal = vec![0.0; rows];
        let mut lagged_marginal = vec![0.0; cols];
        let mut total = 0.0;
        for (a, row) in table.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidDistribution(format!(
                    "row {a} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (b, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "entry ({a}, {b}) = {p} is not a probability"
                    )));
                }
                if p > 0.0 {
                    cells.push((a, b, p));
                    present_marginal[a] += p;
                    lagged_marginal[b] += p;
                    total += p;
                }
            }
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            tau,
            sample_count: None,
            present_labels: (0..rows).collect(),
            lagged_labels: (0..cols).collect(),
            cells,
            present_marginal,
            lagged_marginal,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Number of aligned pairs, `T - tau`, when built from data.
    pub fn sample_count(&self) -> Option<usize> {
        self.sample_count
    }

    /// Nonzero cells as `(present symbol, lagged symbol, probability)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cells
            .iter()
            .map(|&(a, b, p)| (self.present_labels[a], self.lagged_labels[b], p))
    }

    pub fn present_marginal(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.present_labels
            .iter()
            .copied()
            .zip(self.present_marginal.iter().copied())
    }

    pub fn lagged_marginal(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lagged_labels
            .iter()
            .copied()
            .zip(self.lagged_marginal.iter().copied())
    }

    /// The same distribution with the two axes exchanged.
    pub fn transposed(&self) -> Self {
        let mut cells: Vec<_> = self.cells.iter().map(|&(a, b, p)| (b, a, p)).collect();
        cells.sort_by_key(|c| (c.0, c.1));
        Self {
            tau: self.tau,
            sample_count: self.sample_count,
            present_labels: self.lagged_labels.clone(),
            lagged_labels: self.present_labels.clone(),
            cells,
            present_marginal: self.lagged_marginal.clone(),
            lagged_marginal: self.present_marginal.clone(),
        }
    }
}

fn dense_codes(xs: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut labels = xs.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let codes = xs
        .iter()
        .map(|x| labels.binary_search(x).expect("label present"))
        .collect();
    (labels, codes)
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Plug-in entropy of a series' empirical symbol frequencies.
pub fn series_entropy(series: &SymbolSeries) -> f64 {
    let mut counts = vec![0u64; series.alphabet_size()];
    for &s in series.symbols() {
        counts[s] += 1;
    }
    let n = series.len() as f64;
    entropy_bits(counts.into_iter().map(|c| c as f64 / n))
}

/// `I = sum p(a,b) log2[p(a,b) / (p(a) p(b))]`, clamped at zero.
pub fn mutual_information(dist: &LagPairDistribution) -> f64 {
    let mi: f64 = dist
        .cells
        .iter()
        .map(|&(a, b, p)| p * (p / (dist.present_marginal[a] * dist.lagged_marginal[b])).log2())
        .sum();
    debug_assert!(mi > -1e-9, "mutual information {mi} is negative");
    mi.max(0.0)
}

/// Time-delayed mutual information of one series, in bits.
pub fn tdmi(series: &SymbolSeries, tau: usize) -> Result<f64> {
    Ok(mutual_information(&LagPairDistribution::from_series(
        series, tau,
    )?))
}

/// Whole-system versus per-agent TDMI at one lag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub tau: usize,
    pub joint_tdmi: f64,
    pub per_agent_tdmi: Vec<f64>,
    pub excess: f64,
}

impl MeasureReport {
    pub fn new(tau: usize, joint_tdmi: f64, per_agent_tdmi: Vec<f64>) -> Self {
        let excess = joint_tdmi - per_agent_tdmi.iter().sum::<f64>();
        Self {
            tau,
            joint_tdmi,
            per_agent_tdmi,
            excess,
        }
    }
}

/// Excess TDMI: joint TDMI minus the sum of each agent's own TDMI.
///
/// Negative values (redundancy) are reported unclamped.
pub fn excess_tdmi(joint: &JointSeries, tau: usize) -> Result<MeasureReport> {
    let joint_tdmi = mutual_information(&LagPairDistribution::from_joint(joint, tau)?);
    let per_agent = joint
        .components()
        .iter()
        .map(|c| tdmi(c, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureReport::new(tau, joint_tdmi, per_agent))
}
