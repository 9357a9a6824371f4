//! Calibration-derived noise model.
//!
//! Two-qubit errors are stored per directed pair exactly as the calibration
//! source lists them; [`NoiseModel::error`] is the symmetric lookup every
//! consumer uses. When both directions are stored the lookup returns their
//! mean, so `error(i, k) == error(k, i)` always holds.
//!
//! Two input layouts are accepted: the JSON schema produced by
//! [`NoiseModel::to_json`], and a CSV backend-properties table with the
//! columns `Qubit, Readout assignment error, Prob meas0 prep1,
//! Prob meas1 prep0, ..., Pauli-X error, CNOT error`, where the CNOT column
//! holds `i_j:value` entries separated by `;`. Leading `# key: value` lines
//! in the CSV set `backend` and `date`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZneError};

const MUMBAI_CSV: &str = include_str!("../data/ibmq_mumbai.csv");
const MUMBAI_QUBITS_CSV: &str = include_str!("../data/ibmq_mumbai_qubits.csv");

/// Readout confusion probabilities for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Readout {
    /// P(measure 0 | prepared 1)
    pub meas0_prep1: f64,
    /// P(measure 1 | prepared 0)
    pub meas1_prep0: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseModel {
    pub backend: String,
    pub date: String,
    num_qubits: usize,
    two_qubit_error: BTreeMap<(usize, usize), f64>,
    one_qubit_error: BTreeMap<usize, f64>,
    readout: BTreeMap<usize, Readout>,
    /// Extra per-qubit calibration columns (T1, T2, frequency, ...). Kept
    /// for reference; the noise channels do not use them.
    properties: BTreeMap<usize, BTreeMap<String, f64>>,
}

fn check_prob(what: &str, p: f64) -> Result<f64> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(ZneError::Calibration(format!(
            "{what} = {p} is not a probability in [0, 1]"
        )))
    }
}

impl NoiseModel {
    pub fn new(backend: impl Into<String>, date: impl Into<String>, num_qubits: usize) -> Self {
        Self {
            backend: backend.into(),
            date: date.into(),
            num_qubits,
            ..Default::default()
        }
    }

    /// Line topology `0-1-...-(n-1)` with the same CX error on every edge and
    /// no one-qubit or readout error.
    pub fn uniform_line(num_qubits: usize, cx_error: f64) -> Result<Self> {
        let errors: Vec<f64> = vec![cx_error; num_qubits.saturating_sub(1)];
        Self::line(&errors)
    }

    /// Line topology with `errors[i]` on edge `(i, i+1)`.
    pub fn line(errors: &[f64]) -> Result<Self> {
        let mut m = Self::new("synthetic-line", "", errors.len() + 1);
        for (i, &p) in errors.iter().enumerate() {
            m.set_two_qubit_error(i, i + 1, p)?;
        }
        Ok(m)
    }

    /// The 27-qubit backend snapshot bundled with the crate (captured
    /// 2024-03-26).
    pub fn ibmq_mumbai() -> Self {
        let mut m = Self::from_csv_str(MUMBAI_CSV).expect("bundled calibration table parses");
        m.merge_properties_csv(MUMBAI_QUBITS_CSV)
            .expect("bundled qubit table parses");
        m
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn set_two_qubit_error(&mut self, i: usize, k: usize, p: f64) -> Result<()> {
        if i == k {
            return Err(ZneError::Calibration(format!("self-coupling {i}_{k}")));
        }
        let p = check_prob(&format!("CNOT error {i}_{k}"), p)?;
        if let Some(&old) = self.two_qubit_error.get(&(i, k)) {
            if old != p {
                return Err(ZneError::Calibration(format!(
                    "conflicting CNOT error for {i}_{k}: {old} vs {p}"
                )));
            }
        }
        self.two_qubit_error.insert((i, k), p);
        self.num_qubits = self.num_qubits.max(i.max(k) + 1);
        Ok(())
    }

    pub fn set_one_qubit_error(&mut self, q: usize, p: f64) -> Result<()> {
        let p = check_prob(&format!("one-qubit error of {q}"), p)?;
        self.one_qubit_error.insert(q, p);
        self.num_qubits = self.num_qubits.max(q + 1);
        Ok(())
    }

    pub fn set_readout(&mut self, q: usize, meas0_prep1: f64, meas1_prep0: f64) -> Result<()> {
        let r = Readout {
            meas0_prep1: check_prob(&format!("prob meas0 prep1 of {q}"), meas0_prep1)?,
            meas1_prep0: check_prob(&format!("prob meas1 prep0 of {q}"), meas1_prep0)?,
        };
        self.readout.insert(q, r);
        self.num_qubits = self.num_qubits.max(q + 1);
        Ok(())
    }

    /// Symmetric two-qubit error lookup.
    pub fn error(&self, i: usize, k: usize) -> Result<f64> {
        match (
            self.two_qubit_error.get(&(i, k)),
            self.two_qubit_error.get(&(k, i)),
        ) {
            (Some(&a), Some(&b)) => Ok(0.5 * (a + b)),
            (Some(&a), None) | (None, Some(&a)) => Ok(a),
            (None, None) => Err(ZneError::NoCoupling(i, k)),
        }
    }

    /// The value stored for the directed pair, without fallback.
    pub fn directed_error(&self, i: usize, k: usize) -> Option<f64> {
        self.two_qubit_error.get(&(i, k)).copied()
    }

    pub fn is_coupled(&self, i: usize, k: usize) -> bool {
        self.two_qubit_error.contains_key(&(i, k)) || self.two_qubit_error.contains_key(&(k, i))
    }

    /// Coupled pairs, smaller index first.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.two_qubit_error
            .keys()
            .map(|&(i, k)| (i.min(k), i.max(k)))
            .collect()
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .two_qubit_error
            .keys()
            .filter_map(|&(i, k)| {
                if i == q {
                    Some(k)
                } else if k == q {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn one_qubit_error(&self, q: usize) -> f64 {
        self.one_qubit_error.get(&q).copied().unwrap_or(0.0)
    }

    pub fn readout(&self, q: usize) -> Readout {
        self.readout.get(&q).copied().unwrap_or_default()
    }

    pub fn has_readout_error(&self) -> bool {
        self.readout
            .values()
            .any(|r| r.meas0_prep1 > 0.0 || r.meas1_prep0 > 0.0)
    }

    pub fn properties(&self, q: usize) -> Option<&BTreeMap<String, f64>> {
        self.properties.get(&q)
    }

    /// Same model with readout error switched off.
    pub fn without_readout(&self) -> Self {
        Self {
            readout: BTreeMap::new(),
            ..self.clone()
        }
    }

    /// Sub-model on `physical` relabelled to `0..physical.len()`.
    pub fn restrict(&self, physical: &[usize]) -> Self {
        let index: BTreeMap<usize, usize> = physical
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let remap = |q: &usize| index.get(q).copied();
        Self {
            backend: self.backend.clone(),
            date: self.date.clone(),
            num_qubits: physical.len(),
            two_qubit_error: self
                .two_qubit_error
                .iter()
                .filter_map(|(&(i, k), &p)| Some(((remap(&i)?, remap(&k)?), p)))
                .collect(),
            one_qubit_error: self
                .one_qubit_error
                .iter()
                .filter_map(|(q, &p)| Some((remap(q)?, p)))
                .collect(),
            readout: self
                .readout
                .iter()
                .filter_map(|(q, &r)| Some((remap(q)?, r)))
                .collect(),
            properties: self
                .properties
                .iter()
                .filter_map(|(q, p)| Some((remap(q)?, p.clone())))
                .collect(),
        }
    }

    // ---- JSON -----------------------------------------------------------

    pub fn to_json(&self) -> Result<String> {
        let doc = JsonModel {
            backend: self.backend.clone(),
            date: self.date.clone(),
            num_qubits: self.num_qubits,
            one_qubit_error: self
                .one_qubit_error
                .iter()
                .map(|(q, &p)| (q.to_string(), p))
                .collect(),
            readout: self
                .readout
                .iter()
                .map(|(q, r)| (q.to_string(), [r.meas0_prep1, r.meas1_prep0]))
                .collect(),
            two_qubit_error: self
                .two_qubit_error
                .iter()
                .map(|(&(i, k), &p)| (format!("{i}_{k}"), p))
                .collect(),
            qubit_properties: self
                .properties
                .iter()
                .map(|(q, p)| (q.to_string(), p.clone()))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: JsonModel = serde_json::from_str(text)?;
        let mut m = Self::new(doc.backend, doc.date, doc.num_qubits);
        for (key, p) in doc.one_qubit_error {
            m.set_one_qubit_error(parse_qubit(&key)?, p)?;
        }
        for (key, [p01, p10]) in doc.readout {
            m.set_readout(parse_qubit(&key)?, p01, p10)?;
        }
        for (key, p) in doc.two_qubit_error {
            let (i, k) = parse_pair(&key)?;
            m.set_two_qubit_error(i, k, p)?;
        }
        for (key, props) in doc.qubit_properties {
            m.properties.insert(parse_qubit(&key)?, props);
        }
        if m.num_qubits != doc.num_qubits {
            return Err(ZneError::Calibration(format!(
                "num_qubits = {} but entries reference qubit {}",
                doc.num_qubits,
                m.num_qubits - 1
            )));
        }
        Ok(m)
    }

    // ---- CSV ------------------------------------------------------------

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut m = Self::default();
        let (meta, body) = split_csv_metadata(text);
        if let Some(b) = meta.get("backend") {
            m.backend = b.clone();
        }
        if let Some(d) = meta.get("date") {
            m.date = d.clone();
        }

        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let qubit_col = col("qubit")
            .ok_or_else(|| ZneError::Calibration("missing `Qubit` column".into()))?;
        let p01_col = col("prob meas0 prep1");
        let p10_col = col("prob meas1 prep0");
        let cx_col = col("cnot error");
        let one_q_col = ["pauli-x error", "sx error", "id error"]
            .iter()
            .find_map(|name| col(name));

        for (row_idx, record) in rdr.records().enumerate() {
            let record = record?;
            let row = row_idx + 2;
            let field = |c: usize| record.get(c).unwrap_or("");
            let num = |c: usize| -> Result<f64> {
                field(c).parse().map_err(|_| {
                    ZneError::Calibration(format!(
                        "row {row}: `{}` in column `{}` is not a number",
                        field(c),
                        headers[c]
                    ))
                })
            };
            let q = parse_qubit(field(qubit_col))
                .map_err(|e| ZneError::Calibration(format!("row {row}: {e}")))?;
            m.num_qubits = m.num_qubits.max(q + 1);
            if let (Some(a), Some(b)) = (p01_col, p10_col) {
                m.set_readout(q, num(a)?, num(b)?)?;
            }
            if let Some(c) = one_q_col {
                m.set_one_qubit_error(q, num(c)?)?;
            }
            if let Some(c) = cx_col {
                for entry in field(c).split(';').map(str::trim).filter(|e| !e.is_empty()) {
                    let (pair, value) = entry.split_once(':').ok_or_else(|| {
                        ZneError::Calibration(format!("row {row}: malformed CNOT entry `{entry}`"))
                    })?;
                    let (i, k) = parse_pair(pair.trim())?;
                    let p: f64 = value.trim().parse().map_err(|_| {
                        ZneError::Calibration(format!("row {row}: malformed CNOT entry `{entry}`"))
                    })?;
                    m.set_two_qubit_error(i, k, p)?;
                }
            }
            let known = [Some(qubit_col), p01_col, p10_col, cx_col, one_q_col];
            for (c, name) in headers.iter().enumerate() {
                if known.contains(&Some(c)) {
                    continue;
                }
                if let Ok(v) = field(c).parse::<f64>() {
                    m.properties.entry(q).or_default().insert(name.clone(), v);
                }
            }
        }
        Ok(m)
    }

    /// Adds every numeric column of a per-qubit table (e.g. T1/T2) to the
    /// stored properties.
    pub fn merge_properties_csv(&mut self, text: &str) -> Result<()> {
        let (_, body) = split_csv_metadata(text);
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let qubit_col = headers
            .iter()
            .position(|h| h == "qubit")
            .ok_or_else(|| ZneError::Calibration("missing `Qubit` column".into()))?;
        for record in rdr.records() {
            let record = record?;
            let q = parse_qubit(record.get(qubit_col).unwrap_or(""))?;
            for (c, name) in headers.iter().enumerate() {
                if c == qubit_col {
                    continue;
                }
                if let Some(v) = record.get(c).and_then(|s| s.parse::<f64>().ok()) {
                    self.properties.entry(q).or_default().insert(name.clone(), v);
                }
            }
        }
        Ok(())
    }

    /// Parses JSON when the document starts with `{`, the CSV table otherwise.
    pub fn from_str_auto(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_csv_str(text)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::error::read_file(path)?;
        let mut m = Self::from_str_auto(&text)?;
        if m.backend.is_empty() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                m.backend = stem.to_string();
            }
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonModel {
    backend: String,
    date: String,
    num_qubits: usize,
    #[serde(default)]
    one_qubit_error: BTreeMap<String, f64>,
    #[serde(default)]
    readout: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    two_qubit_error: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    qubit_properties: BTreeMap<String, BTreeMap<String, f64>>,
}

fn parse_qubit(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| ZneError::Calibration(format!("invalid qubit index `{s}`")))
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once('_')
        .ok_or_else(|| ZneError::Calibration(format!("invalid pair key `{s}`, expected i_j")))?;
    Ok((parse_qubit(a)?, parse_qubit(b)?))
}

fn split_csv_metadata(text: &str) -> (BTreeMap<String, String>, String) {
    let mut meta = BTreeMap::new();
    let mut body = String::new();
    for line in text.lines() {
        let t = line.trim_start();
        if let Some(comment) = t.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                meta.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
        } else if !t.is_empty() {
            body.push_str(line);
            body.push('\n');
        }
    }
    (meta, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_rows() {
        let m = NoiseModel::ibmq_mumbai();
        assert_eq!(m.num_qubits(), 27);
        assert_eq!(m.backend, "ibmq_mumbai");
        assert_eq!(m.error(0, 1).unwrap(), 5.62e-3);
        assert_eq!(m.error(1, 0).unwrap(), 5.62e-3);
        assert_eq!(m.one_qubit_error(0), 2.74e-4);
        assert_eq!(
            m.readout(0),
            Readout {
                meas0_prep1: 3.54e-2,
                meas1_prep0: 9.80e-3
            }
        );
        assert_eq!(m.error(8, 5).unwrap(), 2.25e-2);
        assert!(matches!(m.error(0, 5), Err(ZneError::NoCoupling(0, 5))));
        assert_eq!(m.edges().len(), 28);
        let props = m.properties(0).unwrap();
        assert_eq!(props["t1 (us)"], 111.6961464);
        assert_eq!(props["readout length (ns)"], 3512.888889);
    }

    #[test]
    fn largest_cx_error_is_8_5() {
        let m = NoiseModel::ibmq_mumbai();
        let max = m
            .edges()
            .into_iter()
            .max_by(|a, b| {
                m.error(a.0, a.1)
                    .unwrap()
                    .total_cmp(&m.error(b.0, b.1).unwrap())
            })
            .unwrap();
        assert_eq!(max, (5, 8));
    }

    #[test]
    fn asymmetric_entries_average() {
        let m = NoiseModel::ibmq_mumbai();
        assert_eq!(m.directed_error(16, 19), Some(0.01074071841628857));
        assert_eq!(m.directed_error(19, 16), Some(1.07e-2));
        assert_eq!(m.error(16, 19).unwrap(), m.error(19, 16).unwrap());
    }

    #[test]
    fn synthetic_line() {
        let m = NoiseModel::uniform_line(4, 1e-2).unwrap();
        assert_eq!(
            m.edges().into_iter().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3)]
        );
        assert!(NoiseModel::default().edges().is_empty());
        assert_eq!(m.neighbors(1), vec![0, 2]);
    }

    #[test]
    fn rejects_bad_calibration() {
        let mut m = NoiseModel::new("b", "d", 2);
        assert!(m.set_two_qubit_error(0, 1, 1.5).is_err());
        assert!(m.set_one_qubit_error(0, -0.1).is_err());
        m.set_two_qubit_error(0, 1, 0.01).unwrap();
        m.set_two_qubit_error(0, 1, 0.01).unwrap();
        assert!(m.set_two_qubit_error(0, 1, 0.02).is_err());

        let bad = "Qubit,Prob meas0 prep1,Prob meas1 prep0,CNOT error\n0,0.1,0.1,0_1-0.1\n";
        assert!(NoiseModel::from_csv_str(bad).is_err());
        let bad = "Qubit,Prob meas0 prep1,Prob meas1 prep0,CNOT error\n0,0.1,2.0,0_1:0.1\n";
        assert!(NoiseModel::from_csv_str(bad).is_err());
        let dup = "Qubit,CNOT error\n0,0_1:0.1\n1,0_1:0.2\n";
        assert!(NoiseModel::from_csv_str(dup).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = NoiseModel::ibmq_mumbai();
        let json = m.to_json().unwrap();
        assert!(json.contains("\"0_1\": 0.00562"));
        let back = NoiseModel::from_json_str(&json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn restrict_relabels() {
        let m = NoiseModel::ibmq_mumbai();
        let sub = m.restrict(&[25, 26, 24]);
        assert_eq!(sub.num_qubits(), 3);
        assert_eq!(sub.error(0, 1).unwrap(), 4.25e-3);
        assert_eq!(sub.error(0, 2).unwrap(), 5.22e-3);
        assert!(!sub.is_coupled(1, 2));
        assert_eq!(sub.one_qubit_error(1), m.one_qubit_error(26));
    }
}
