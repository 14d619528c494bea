//! File formats: symbol-series CSV, episode logs, measurement reports and
//! JSON configuration.
//!
//! Series files look like
//!
//! ```text
//! # alphabet_size: 2,2
//! monkey,computer
//! 0,1
//! 1,1
//! ```
//!
//! The metadata line is optional; without it each column's alphabet is
//! inferred as `max symbol + 1`. All writes go through a temporary file in the
//! destination directory that is renamed into place.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{JointSeries, MeasureReport, SymbolSeries};
use crate::scenarios::{EpisodeLog, MatchingPenniesStep, TriadicStep};

const ALPHABET_KEY: &str = "alphabet_size";

/// A joint series together with its column names.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFile {
    pub names: Vec<String>,
    pub series: JointSeries,
}

/// Writes `path` atomically.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message: message.into(),
    }
}

pub fn parse_series_csv(path: &Path) -> Result<SeriesFile> {
    parse_series_str(&fs::read_to_string(path)?, path)
}

/// Parses series-file text; `path` is only used in error messages.
pub fn parse_series_str(text: &str, path: &Path) -> Result<SeriesFile> {
    let mut declared: Option<Vec<usize>> = None;
    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<usize>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment
                .trim()
                .strip_prefix(ALPHABET_KEY)
                .and_then(|rest| rest.trim_start().strip_prefix(':'))
            {
                if names.is_some() || declared.is_some() {
                    return Err(parse_error(
                        path,
                        line_no,
                        "alphabet metadata must precede the header",
                    ));
                }
                let sizes = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_error(path, line_no, format!("bad alphabet size: {e}")))?;
                if sizes.contains(&0) {
                    return Err(parse_error(
                        path,
                        line_no,
                        "alphabet sizes must be positive",
                    ));
                }
                declared = Some(sizes);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(header) = &names else {
            if let Some(sizes) = &declared {
                if sizes.len() != fields.len() {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!(
                            "{} columns but {} alphabet sizes",
                            fields.len(),
                            sizes.len()
                        ),
                    ));
                }
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(parse_error(path, line_no, "empty column name"));
            }
            columns = vec![Vec::new(); fields.len()];
            names = Some(fields.into_iter().map(String::from).collect());
            continue;
        };
        if fields.len() != header.len() {
            return Err(parse_error(
                path,
                line_no,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        for (col, field) in fields.iter().enumerate() {
            let symbol: usize = field.parse().map_err(|_| {
                parse_error(
                    path,
                    line_no,
                    format!("`{field}` is not a nonnegative integer"),
                )
            })?;
            if let Some(sizes) = &declared {
                if symbol >= sizes[col] {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!(
                            "symbol {symbol} in column `{}` exceeds alphabet size {}",
                            header[col], sizes[col]
                        ),
                    ));
                }
            }
            columns[col].push(symbol);
        }
    }

    let Some(names) = names else {
        return Err(parse_error(
            path,
            text.lines().count().max(1),
            "missing header row",
        ));
    };
    let components = columns
        .into_iter()
        .enumerate()
        .map(|(col, symbols)| match &declared {
            Some(sizes) => SymbolSeries::new(symbols, sizes[col]),
            None => SymbolSeries::from_symbols(symbols),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesFile {
        names,
        series: JointSeries::new(components)?,
    })
}

pub fn write_series_csv(path: &Path, file: &SeriesFile) -> Result<()> {
    let series = &file.series;
    if file.names.len() != series.n() {
        return Err(Error::Dimension(format!(
            "{} names for {} columns",
            file.names.len(),
            series.n()
        )));
    }
    write_atomic(path, |w| {
        let sizes: Vec<String> = series
            .components()
            .iter()
            .map(|c| c.alphabet_size().to_string())
            .collect();
        writeln!(w, "# {ALPHABET_KEY}: {}", sizes.join(","))?;
        writeln!(w, "{}", file.names.join(","))?;
        for t in 0..series.len() {
            let row: Vec<String> = series
                .components()
                .iter()
                .map(|c| c.symbols()[t].to_string())
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })
}

/// Column order: triadic logs `t,signal,x1,coupling,x2,x3,u1,u2,u3,value`;
/// matching-pennies logs `t,monkey,computer,monkey_reward`.
pub fn write_log_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        match log {
            EpisodeLog::Triadic(steps) => steps.iter().try_for_each(|s| out.serialize(s))?,
            EpisodeLog::MatchingPennies(steps) => {
                steps.iter().try_for_each(|s| out.serialize(s))?
            }
        }
        out.flush()?;
        Ok(())
    })
}

/// Reads a log written by [`write_log_csv`], detecting the scenario from the
/// header.
pub fn read_log_csv(path: &Path) -> Result<EpisodeLog> {
    let mut reader = csv::Reader::from_path(path)?;
    let triadic = reader.headers()?.iter().any(|h| h == "signal");
    Ok(if triadic {
        EpisodeLog::Triadic(
            reader
                .deserialize::<TriadicStep>()
                .collect::<std::result::Result<_, _>>()?,
        )
    } else {
        EpisodeLog::MatchingPennies(
            reader
                .deserialize::<MatchingPenniesStep>()
                .collect::<std::result::Result<_, _>>()?,
        )
    })
}

/// Rounds to 6 decimals, mapping negative zero to zero.
pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn fmt6(x: f64) -> String {
    format!("{:.6}", round6(x))
}

/// Measurement results for a set of named agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub agents: Vec<String>,
    pub reports: Vec<MeasureReport>,
}

impl ReportDocument {
    pub fn new(agents: Vec<String>, reports: Vec<MeasureReport>) -> Result<Self> {
        if let Some(r) = reports
            .iter()
            .find(|r| r.per_agent_tdmi.len() != agents.len())
        {
            return Err(Error::Dimension(format!(
                "report at tau {} has {} agents, expected {}",
                r.tau,
                r.per_agent_tdmi.len(),
                agents.len()
            )));
        }
        Ok(Self { agents, reports })
    }

    /// Copy with every value rounded to 6 decimals.
    pub fn rounded(&self) -> Self {
        let reports = self
            .reports
            .iter()
            .map(|r| MeasureReport {
                tau: r.tau,
                joint_tdmi: round6(r.joint_tdmi),
                per_agent_tdmi: r.per_agent_tdmi.iter().map(|&v| round6(v)).collect(),
                excess: round6(r.excess),
            })
            .collect();
        Self {
            agents: self.agents.clone(),
            reports,
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["tau".to_string(), "joint_tdmi".to_string()];
        h.extend(self.agents.iter().map(|a| format!("{a}_tdmi")));
        h.push("excess".to_string());
        h
    }

    /// Aligned text table for terminal output.
    pub fn summary_table(&self) -> String {
        let header = self.header();
        let rows: Vec<Vec<String>> = self
            .reports
            .iter()
            .map(|r| {
                let mut row = vec![r.tau.to_string(), fmt6(r.joint_tdmi)];
                row.extend(r.per_agent_tdmi.iter().map(|&v| fmt6(v)));
                row.push(fmt6(r.excess));
                row
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                rows.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in std::iter::once(&header).chain(&rows) {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:>w$}"))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn write_report_csv(path: &Path, doc: &ReportDocument) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(doc.header())?;
        for r in &doc.reports {
            let mut row = vec![r.tau.to_string(), fmt6(r.joint_tdmi)];
            row.extend(r.per_agent_tdmi.iter().map(|&v| fmt6(v)));
            row.push(fmt6(r.excess));
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    })
}

pub fn read_report_csv(path: &Path) -> Result<ReportDocument> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    let n = header.len();
    let ok = n >= 3
        && &header[0] == "tau"
        && &header[1] == "joint_tdmi"
        && &header[n - 1] == "excess"
        && header
            .iter()
            .take(n - 1)
            .skip(2)
            .all(|h| h.ends_with("_tdmi"));
    if !ok {
        return Err(parse_error(path, 1, "not a report header"));
    }
    let agents = header
        .iter()
        .take(n - 1)
        .skip(2)
        .map(|h| h.trim_end_matches("_tdmi").to_string())
        .collect();
    let mut reports = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line()) as usize;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| parse_error(path, line, format!("`{}` is not a number", &record[i])))
        };
        let tau = record[0]
            .parse()
            .map_err(|_| parse_error(path, line, format!("`{}` is not a lag", &record[0])))?;
        reports.push(MeasureReport {
            tau,
            joint_tdmi: num(1)?,
            per_agent_tdmi: (2..n - 1).map(num).collect::<Result<_>>()?,
            excess: num(n - 1)?,
        });
    }
    ReportDocument::new(agents, reports)
}

/// Writes the document rounded to 6 decimals.
pub fn write_report_json(path: &Path, doc: &ReportDocument) -> Result<()> {
    let rounded = doc.rounded();
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &rounded)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn read_report_json(path: &Path) -> Result<ReportDocument> {
    let doc: ReportDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
    ReportDocument::new(doc.agents, doc.reports)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Loads a JSON config, reporting problems as configuration errors.
pub fn load_json_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Standard file names inside an output directory.
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub dir: PathBuf,
}

impl OutputPaths {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn log(&self) -> PathBuf {
        self.dir.join("log.csv")
    }

    pub fn series(&self) -> PathBuf {
        self.dir.join("series.csv")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.dir.join("report.csv")
    }

    pub fn report_json(&self) -> PathBuf {
        self.dir.join("report.json")
    }
}
