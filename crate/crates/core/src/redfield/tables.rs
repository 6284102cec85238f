//! Tabulated order-0 and order-1 relaxation matrices and the conformance
//! report that compares them with the assembled blocks.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{analytic_eigenvalues, RelaxationModel};
use crate::error::{Error, Result};
use crate::phys_params::SpectralDensities;

const EMBEDDED: &str = include_str!("../../data/relaxation_tables.txt");

/// Entry value sqrt(radicand) * (c0 J0 + c1 J1 + c2 J2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub row: usize,
    pub col: usize,
    pub radicand: f64,
    pub coeffs: [f64; 3],
}

impl TableEntry {
    pub fn eval(&self, j: [f64; 3]) -> f64 {
        self.radicand.sqrt() * (self.coeffs[0] * j[0] + self.coeffs[1] * j[1] + self.coeffs[2] * j[2])
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub q: usize,
    pub dim: usize,
    pub forward: String,
    pub backward: String,
    pub entries: Vec<TableEntry>,
    pub errata: Vec<TableEntry>,
}

impl CoefficientTable {
    pub fn eval(&self, j: [f64; 3], with_errata: bool) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for e in &self.entries {
            m[(e.row, e.col)] = e.eval(j);
        }
        if with_errata {
            for e in &self.errata {
                m[(e.row, e.col)] = e.eval(j);
            }
        }
        m
    }
}

/// Parsed fixture: constant bases and the coefficient tables.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub bases: BTreeMap<String, DMatrix<f64>>,
    pub tables: BTreeMap<usize, CoefficientTable>,
}

enum Section {
    None,
    Basis(String),
    Table(usize),
    Erratum(usize),
}

fn rational(tok: &str, line: usize) -> Result<f64> {
    let bad = || Error::Fixture { line, msg: format!("bad number '{tok}'") };
    match tok.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.parse().map_err(|_| bad())?;
            let q: i64 = q.parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(p as f64 / q as f64)
        }
        None => tok.parse::<i64>().map(|v| v as f64).map_err(|_| bad()),
    }
}

fn header_fields(body: &str) -> (String, Option<String>, BTreeMap<String, String>) {
    let mut words = body.split_whitespace();
    let kind = words.next().unwrap_or("").to_string();
    let mut name = None;
    let mut kv = BTreeMap::new();
    for w in words {
        match w.split_once('=') {
            Some((k, v)) => {
                kv.insert(k.to_string(), v.to_string());
            }
            None => name = Some(w.to_string()),
        }
    }
    (kind, name, kv)
}

impl ReferenceTables {
    /// Tables bundled with the crate.
    pub fn embedded() -> &'static ReferenceTables {
        static TABLES: std::sync::OnceLock<ReferenceTables> = std::sync::OnceLock::new();
        TABLES.get_or_init(|| ReferenceTables::parse(EMBEDDED).expect("bundled fixture parses"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut bases: BTreeMap<String, DMatrix<f64>> = BTreeMap::new();
        let mut tables: BTreeMap<usize, CoefficientTable> = BTreeMap::new();
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Fixture { line, msg: msg.to_string() };
            if let Some(body) = s.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                let (kind, name, kv) = header_fields(body);
                let int = |key: &str| -> Result<usize> {
                    kv.get(key).and_then(|v| v.parse().ok()).ok_or_else(|| err(&format!("missing {key}")))
                };
                section = match kind.as_str() {
                    "basis" => {
                        let name = name.ok_or_else(|| err("basis without name"))?;
                        let dim = int("dim")?;
                        bases.insert(name.clone(), DMatrix::zeros(dim, dim));
                        Section::Basis(name)
                    }
                    "table" => {
                        let q = int("q")?;
                        let table = CoefficientTable {
                            q,
                            dim: int("dim")?,
                            forward: kv.get("forward").cloned().ok_or_else(|| err("missing forward"))?,
                            backward: kv.get("backward").cloned().ok_or_else(|| err("missing backward"))?,
                            entries: Vec::new(),
                            errata: Vec::new(),
                        };
                        tables.insert(q, table);
                        Section::Table(q)
                    }
                    "erratum" => {
                        let q = int("q")?;
                        if !tables.contains_key(&q) {
                            return Err(err("erratum before its table"));
                        }
                        Section::Erratum(q)
                    }
                    other => return Err(err(&format!("unknown section '{other}'"))),
                };
                continue;
            }
            let toks: Vec<&str> = s.split_whitespace().collect();
            let index = |k: usize, dim: usize| -> Result<usize> {
                let v: usize = toks[k].parse().map_err(|_| err("bad index"))?;
                if v == 0 || v > dim {
                    return Err(err("index out of range"));
                }
                Ok(v - 1)
            };
            match &section {
                Section::None => return Err(err("entry outside a section")),
                Section::Basis(name) => {
                    if toks.len() != 4 {
                        return Err(err("basis entries need 4 fields"));
                    }
                    let m = bases.get_mut(name).expect("inserted at header");
                    let dim = m.nrows();
                    let (r, c) = (index(0, dim)?, index(1, dim)?);
                    m[(r, c)] = rational(toks[2], line)? * rational(toks[3], line)?.sqrt();
                }
                Section::Table(q) | Section::Erratum(q) => {
                    if toks.len() != 6 {
                        return Err(err("table entries need 6 fields"));
                    }
                    let t = tables.get_mut(q).expect("checked at header");
                    let entry = TableEntry {
                        row: index(0, t.dim)?,
                        col: index(1, t.dim)?,
                        radicand: rational(toks[2], line)?,
                        coeffs: [rational(toks[3], line)?, rational(toks[4], line)?, rational(toks[5], line)?],
                    };
                    if matches!(section, Section::Table(_)) {
                        t.entries.push(entry);
                    } else {
                        t.errata.push(entry);
                    }
                }
            }
        }
        for t in tables.values() {
            for name in [&t.forward, &t.backward] {
                match bases.get(name) {
                    Some(b) if b.nrows() == t.dim => {}
                    _ => return Err(Error::Fixture { line: 0, msg: format!("basis '{name}' missing or wrong size") }),
                }
            }
        }
        Ok(Self { bases, tables })
    }

    pub fn table(&self, q: usize) -> Option<&CoefficientTable> {
        self.tables.get(&q)
    }

    /// Assembled Zeeman block expressed in the table's basis.
    pub fn assembled_in_table_basis(&self, model: &RelaxationModel, q: usize, j: [f64; 3]) -> Result<DMatrix<f64>> {
        let t = self.table(q).ok_or(Error::CoherenceOrder(q as i32))?;
        let b = model.block_matrix(q, j)?;
        Ok(&self.bases[&t.forward] * b * &self.bases[&t.backward])
    }
}

/// One table entry whose value disagrees with the assembled block.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryDeviation {
    pub q: usize,
    /// 1-based row and column.
    pub row: usize,
    pub col: usize,
    pub tabulated: f64,
    pub assembled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableComparison {
    pub q: usize,
    pub max_abs: f64,
    /// Largest deviation relative to the largest tabulated magnitude.
    pub max_rel: f64,
    /// Same with the erratum entries applied.
    pub corrected_max_rel: f64,
    pub deviating: Vec<EntryDeviation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub q: usize,
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tables: Vec<TableComparison>,
    pub spectra: Vec<SpectrumComparison>,
}

impl ValidationReport {
    /// Worst relative deviation over tables as tabulated and all spectra.
    pub fn max_rel(&self) -> f64 {
        self.tables.iter().map(|t| t.max_rel).chain(self.spectra.iter().map(|s| s.max_rel)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.tables.iter().map(|t| t.max_abs).chain(self.spectra.iter().map(|s| s.max_abs)).fold(0.0, f64::max)
    }

    /// Worst relative deviation with erratum entries applied.
    pub fn corrected_max_rel(&self) -> f64 {
        self.tables
            .iter()
            .map(|t| t.corrected_max_rel)
            .chain(self.spectra.iter().map(|s| s.max_rel))
            .fold(0.0, f64::max)
    }
}

/// Entries deviating by more than this (relative) are listed individually.
const LIST_THRESHOLD: f64 = 1e-10;

/// Report comparing the bundled tables and the closed-form spectra with
/// the assembled blocks.
pub fn validate_against_tables(j: &SpectralDensities) -> Result<ValidationReport> {
    validate_with(ReferenceTables::embedded(), RelaxationModel::spin_seven_halves(), j)
}

pub fn validate_with(tables: &ReferenceTables, model: &RelaxationModel, j: &SpectralDensities) -> Result<ValidationReport> {
    let ja = j.as_array();
    let mut out = ValidationReport { tables: Vec::new(), spectra: Vec::new() };
    for (&q, t) in &tables.tables {
        let assembled = tables.assembled_in_table_basis(model, q, ja)?;
        let printed = t.eval(ja, false);
        let corrected = t.eval(ja, true);
        let scale = printed.amax().max(f64::MIN_POSITIVE);
        let diff = &assembled - &printed;
        let mut deviating = Vec::new();
        for r in 0..t.dim {
            for c in 0..t.dim {
                if diff[(r, c)].abs() > LIST_THRESHOLD * scale {
                    deviating.push(EntryDeviation {
                        q,
                        row: r + 1,
                        col: c + 1,
                        tabulated: printed[(r, c)],
                        assembled: assembled[(r, c)],
                    });
                }
            }
        }
        out.tables.push(TableComparison {
            q,
            max_abs: diff.amax(),
            max_rel: diff.amax() / scale,
            corrected_max_rel: (&assembled - &corrected).amax() / corrected.amax().max(f64::MIN_POSITIVE),
            deviating,
        });
    }
    for q in 2..=7 {
        let block = model.block_matrix(q, ja)?;
        let mut numeric: Vec<f64> = nalgebra::SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        let mut closed = analytic_eigenvalues(q, j)?;
        numeric.sort_by(f64::total_cmp);
        closed.sort_by(f64::total_cmp);
        let scale = numeric.iter().map(|x| x.abs()).fold(f64::MIN_POSITIVE, f64::max);
        let max_abs = numeric.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.spectra.push(SpectrumComparison { q, max_abs, max_rel: max_abs / scale });
    }
    Ok(out)
}
