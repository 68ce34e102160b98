//! Per-trial metrics rows and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::Population;
use crate::error::{Error, Result};

pub const COLUMNS: [&str; 15] = [
    "trial",
    "phase",
    "macro_steps",
    "atomic_steps",
    "reward",
    "success",
    "probe_steps",
    "macroclassifiers",
    "numerosity",
    "mean_hidden",
    "mean_connectivity",
    "mean_mu",
    "mean_tau",
    "mean_psi",
    "mean_omega",
];

/// Population aggregates, numerosity-weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PopulationStats {
    pub macroclassifiers: usize,
    pub numerosity: u64,
    pub mean_hidden: f64,
    pub mean_connectivity: f64,
    pub mean_rates: [f64; 4],
}

impl PopulationStats {
    pub fn of(pop: &Population) -> Self {
        let total = pop.numerosity() as f64;
        let mut s = PopulationStats { macroclassifiers: pop.len(), numerosity: pop.numerosity(), ..Default::default() };
        if total == 0.0 {
            return s;
        }
        for cl in pop.iter() {
            let w = cl.numerosity as f64 / total;
            s.mean_hidden += w * cl.genome.connected_hidden() as f64;
            s.mean_connectivity += w * cl.genome.connectivity();
            for (m, r) in s.mean_rates.iter_mut().zip(cl.rates.as_array()) {
                *m += w * r;
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub trial: u64,
    pub phase: &'static str,
    pub macro_steps: u64,
    pub atomic_steps: u64,
    pub reward: f64,
    pub success: bool,
    pub probe_steps: Option<u64>,
    pub population: PopulationStats,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        let p = &self.population;
        let probe = self.probe_steps.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.phase,
            self.macro_steps,
            self.atomic_steps,
            self.reward,
            self.success as u8,
            probe,
            p.macroclassifiers,
            p.numerosity,
            p.mean_hidden,
            p.mean_connectivity,
            p.mean_rates[0],
            p.mean_rates[1],
            p.mean_rates[2],
            p.mean_rates[3]
        )
    }
}

pub fn header_comment(digest: &str) -> String {
    format!("# stcs-metrics v1 config={digest}")
}

/// Full CSV text: comment line, column names, rows.
pub fn render(digest: &str, rows: &[MetricsRow]) -> String {
    let mut s = header_comment(digest);
    s.push('\n');
    s.push_str(&COLUMNS.join(","));
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.to_csv());
    }
    s
}

/// A parsed metrics CSV (comment lines skipped).
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl MetricsTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::config("metrics file has no header"))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines {
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if cells.len() != columns.len() {
                return Err(Error::Parse { line: n + 1, msg: format!("expected {} cells", columns.len()) });
            }
            rows.push(cells);
        }
        Ok(MetricsTable { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Numeric values of one column; empty cells become `None`.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx =
            self.columns.iter().position(|c| c == name).ok_or_else(|| Error::config(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = &r[idx];
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse()
                        .map(Some)
                        .map_err(|_| Error::config(format!("non-numeric value `{cell}` in column `{name}`")))
                }
            })
            .collect()
    }
}

/// Cross-repeat mean of every numeric column, row by row. Rows beyond the
/// shortest repeat are dropped; empty cells are left out of the mean.
pub fn aggregate(digest: &str, repeats: &[Vec<MetricsRow>]) -> String {
    let mut s = header_comment(digest);
    s.push('\n');
    let numeric: Vec<&str> = COLUMNS.iter().copied().filter(|c| *c != "phase").collect();
    s.push_str(&numeric.join(","));
    s.push('\n');
    let len = repeats.iter().map(Vec::len).min().unwrap_or(0);
    for i in 0..len {
        let tables: Vec<Vec<Option<f64>>> = repeats.iter().map(|r| numeric_cells(&r[i])).collect();
        let cells: Vec<String> = (0..numeric.len())
            .map(|c| {
                let vals: Vec<f64> = tables.iter().filter_map(|t| t[c]).collect();
                if vals.is_empty() {
                    String::new()
                } else {
                    (vals.iter().sum::<f64>() / vals.len() as f64).to_string()
                }
            })
            .collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

fn numeric_cells(r: &MetricsRow) -> Vec<Option<f64>> {
    let p = &r.population;
    vec![
        Some(r.trial as f64),
        Some(r.macro_steps as f64),
        Some(r.atomic_steps as f64),
        Some(r.reward),
        Some(r.success as u8 as f64),
        r.probe_steps.map(|x| x as f64),
        Some(p.macroclassifiers as f64),
        Some(p.numerosity as f64),
        Some(p.mean_hidden),
        Some(p.mean_connectivity),
        Some(p.mean_rates[0]),
        Some(p.mean_rates[1]),
        Some(p.mean_rates[2]),
        Some(p.mean_rates[3]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: u64, macro_steps: u64) -> MetricsRow {
        MetricsRow {
            trial,
            phase: "exploit",
            macro_steps,
            atomic_steps: 3 * macro_steps,
            reward: 1000.0,
            success: true,
            probe_steps: None,
            population: PopulationStats::default(),
        }
    }

    #[test]
    fn csv_round_trip() {
        let text = render("abc", &[row(1, 4), row(3, 2)]);
        assert!(text.starts_with("# stcs-metrics v1 config=abc\n"));
        let t = MetricsTable::parse(&text).unwrap();
        assert_eq!(t.column("macro_steps").unwrap(), vec![Some(4.0), Some(2.0)]);
        assert_eq!(t.column("probe_steps").unwrap(), vec![None, None]);
        assert!(t.column("nope").is_err());
    }

    #[test]
    fn aggregate_is_the_arithmetic_mean() {
        let text = aggregate("d", &[vec![row(1, 4), row(3, 2)], vec![row(1, 7), row(3, 3)]]);
        let t = MetricsTable::parse(&text).unwrap();
        assert_eq!(t.column("macro_steps").unwrap(), vec![Some(5.5), Some(2.5)]);
    }
}
