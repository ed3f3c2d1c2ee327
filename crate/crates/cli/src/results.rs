//! Per-run result rows and per-method aggregates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{write_file, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub method: String,
    pub instance: String,
    pub run: usize,
    pub seed: u64,
    /// Hypervolume of the final non-dominated set against the instance's
    /// reference point.
    pub hv: f64,
    pub igd: Option<f64>,
    pub igd_plus: Option<f64>,
    pub nondominated: usize,
}

/// Per-instance statistics over runs, averaged over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: String,
    pub instances: usize,
    pub runs: usize,
    pub hv_mean: f64,
    pub hv_max: f64,
    /// Population standard deviation.
    pub hv_std: f64,
    pub igd_mean: Option<f64>,
    pub igd_plus_mean: Option<f64>,
    pub nondominated_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<MethodAggregate>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Aggregates for each method, in order of first appearance in `rows`.
pub fn aggregate(rows: &[RunRow]) -> Vec<MethodAggregate> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let mine: Vec<&RunRow> = rows.iter().filter(|r| r.method == method).collect();
            let mut instances: Vec<&str> = Vec::new();
            for r in &mine {
                if !instances.contains(&r.instance.as_str()) {
                    instances.push(&r.instance);
                }
            }
            let (mut means, mut maxes, mut stds) = (Vec::new(), Vec::new(), Vec::new());
            for inst in &instances {
                let hv: Vec<f64> = mine.iter().filter(|r| r.instance == *inst).map(|r| r.hv).collect();
                means.push(mean(&hv));
                maxes.push(hv.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                stds.push(std_dev(&hv));
            }
            let optional_mean = |f: fn(&RunRow) -> Option<f64>| {
                let v: Option<Vec<f64>> = mine.iter().map(|r| f(r)).collect();
                v.filter(|v| !v.is_empty()).map(|v| mean(&v))
            };
            let nd: Vec<f64> = mine.iter().map(|r| r.nondominated as f64).collect();
            MethodAggregate {
                method: method.to_string(),
                instances: instances.len(),
                runs: mine.len(),
                hv_mean: mean(&means),
                hv_max: mean(&maxes),
                hv_std: mean(&stds),
                igd_mean: optional_mean(|r| r.igd),
                igd_plus_mean: optional_mean(|r| r.igd_plus),
                nondominated_mean: mean(&nd),
            }
        })
        .collect()
}

impl ResultTable {
    /// Keeps `rows` in the given order and computes aggregates.
    pub fn new(rows: Vec<RunRow>) -> Self {
        let aggregates = aggregate(&rows);
        Self { rows, aggregates }
    }

    pub fn aggregate_for(&self, method: &str) -> Option<&MethodAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<RunRow>, csv::Error> {
        csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
    }

    pub fn aggregates_json(&self) -> String {
        serde_json::to_string_pretty(&self.aggregates).expect("aggregates serialize")
    }

    /// Writes `results.csv` and `aggregates.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_file(&dir.join("results.csv"), self.to_csv())?;
        write_file(&dir.join("aggregates.json"), self.aggregates_json())
    }
}
