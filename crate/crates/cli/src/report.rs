//! Plain-text report documents.
//!
//! A document is a `# quadrelax <command>` title line followed by sections.
//! Each section starts with `[name]` and holds either `key = value` lines or
//! one comma-separated table (header line, then numeric rows). Blank lines
//! and other `#` lines are ignored by the parser.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    /// Columns printed as integers.
    pub integer: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), integer: vec![false; header.len()], rows: Vec::new() }
    }

    pub fn integer_columns(mut self, cols: &[usize]) -> Self {
        for &c in cols {
            self.integer[c] = true;
        }
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Values(Vec<(String, Value)>),
    Table(Table),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub command: String,
    pub sections: Vec<(String, Section)>,
}

impl Document {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), sections: Vec::new() }
    }

    pub fn values(&mut self, name: &str, kv: Vec<(&str, Value)>) {
        self.sections
            .push((name.to_string(), Section::Values(kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect())));
    }

    pub fn table(&mut self, name: &str, t: Table) {
        self.sections.push((name.to_string(), Section::Table(t)));
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn get_table(&self, name: &str) -> Option<&Table> {
        match self.section(name)? {
            Section::Table(t) => Some(t),
            Section::Values(_) => None,
        }
    }

    pub fn get_value(&self, section: &str, key: &str) -> Option<&Value> {
        match self.section(section)? {
            Section::Values(kv) => kv.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            Section::Table(_) => None,
        }
    }

    pub fn render(&self, raw: bool) -> String {
        let mut s = String::new();
        writeln!(s, "# quadrelax {}", self.command).unwrap();
        for (name, sec) in &self.sections {
            writeln!(s, "\n[{name}]").unwrap();
            match sec {
                Section::Values(kv) => {
                    for (k, v) in kv {
                        writeln!(s, "{k} = {}", format_value(v, raw)).unwrap();
                    }
                }
                Section::Table(t) => s.push_str(&render_table(t, raw)),
            }
        }
        s
    }

    /// Write `<command>.txt` and one `<section>.csv` per table into `dir`.
    pub fn write_dir(&self, dir: &Path, raw: bool) -> CliResult<()> {
        let io = |p: &Path, e: std::io::Error| CliError::Io { path: p.display().to_string(), source: e };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let main = dir.join(format!("{}.txt", self.command));
        std::fs::write(&main, self.render(raw)).map_err(|e| io(&main, e))?;
        for (name, sec) in &self.sections {
            if let Section::Table(t) = sec {
                let p = dir.join(format!("{name}.csv"));
                std::fs::write(&p, render_table(t, raw)).map_err(|e| io(&p, e))?;
            }
        }
        Ok(())
    }
}

pub fn format_num(x: f64, raw: bool) -> String {
    if raw {
        format!("{x:e}")
    } else {
        format!("{x:.3e}")
    }
}

fn format_value(v: &Value, raw: bool) -> String {
    match v {
        Value::Num(x) => format_num(*x, raw),
        Value::Int(i) => i.to_string(),
        Value::Text(t) => t.clone(),
    }
}

fn render_table(t: &Table, raw: bool) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&t.header).expect("in-memory write");
    for row in &t.rows {
        let cells = row.iter().zip(&t.integer).map(|(x, int)| {
            if *int && x.fract() == 0.0 && x.abs() < 9e15 {
                format!("{}", *x as i64)
            } else {
                format_num(*x, raw)
            }
        });
        w.write_record(cells).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn parse_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return Value::Int(i);
    }
    match s.parse::<f64>() {
        Ok(x) => Value::Num(x),
        Err(_) => Value::Text(s.to_string()),
    }
}

/// Inverse of [`Document::render`]. Columns whose cells all parse as
/// integers are marked integer.
pub fn parse_document(text: &str, path: &Path) -> CliResult<Document> {
    let mut doc = Document::default();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((i, raw)) = lines.next() {
        let line = raw.trim();
        if i == 0 {
            if let Some(cmd) = line.strip_prefix("# quadrelax ") {
                doc.command = cmd.trim().to_string();
                continue;
            }
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let name = line
            .strip_prefix('[')
            .and_then(|l| l.strip_suffix(']'))
            .ok_or_else(|| CliError::data(path, Some(i + 1), format!("expected a [section], got '{line}'")))?;
        let mut body: Vec<(usize, &str)> = Vec::new();
        while let Some((j, l)) = lines.peek() {
            let l = l.trim();
            if l.starts_with('[') {
                break;
            }
            if !l.is_empty() && !l.starts_with('#') {
                body.push((j + 1, l));
            }
            lines.next();
        }
        let is_values = body.first().is_some_and(|(_, l)| l.contains(" = "));
        let section = if is_values {
            let mut kv = Vec::new();
            for (n, l) in body {
                let (k, v) = l
                    .split_once(" = ")
                    .ok_or_else(|| CliError::data(path, Some(n), format!("expected `key = value`, got '{l}'")))?;
                kv.push((k.to_string(), parse_value(v)));
            }
            Section::Values(kv)
        } else {
            let Some(((hline, head), rest)) = body.split_first() else {
                return Err(CliError::data(path, Some(i + 1), format!("section '{name}' is empty")));
            };
            let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
            let mut integer = vec![true; header.len()];
            let mut rows = Vec::new();
            for (n, l) in rest {
                let cells: Vec<&str> = l.split(',').map(str::trim).collect();
                if cells.len() != header.len() {
                    return Err(CliError::data(
                        path,
                        Some(*n),
                        format!("expected {} fields (header on line {hline}), found {}", header.len(), cells.len()),
                    ));
                }
                let mut row = Vec::with_capacity(cells.len());
                for (c, cell) in cells.iter().enumerate() {
                    integer[c] &= cell.parse::<i64>().is_ok();
                    row.push(
                        cell.parse::<f64>()
                            .map_err(|_| CliError::data(path, Some(*n), format!("'{cell}' is not a number")))?,
                    );
                }
                rows.push(row);
            }
            if rows.is_empty() {
                integer.iter_mut().for_each(|x| *x = false);
            }
            Section::Table(Table { header, integer, rows })
        };
        doc.sections.push((name.to_string(), section));
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Document {
        let mut d = Document::new("rates");
        d.values("run", vec![("c_hz2", 2.793e11.into()), ("starts", 16usize.into()), ("note", "ok".into())]);
        let mut t = Table::new(&["q", "rate_hz", "time_s"]).integer_columns(&[0]);
        t.push(vec![0.0, 0.0, f64::INFINITY]);
        t.push(vec![7.0, 21690.4, 4.6103e-5]);
        d.table("rates", t);
        d
    }

    #[test]
    fn four_significant_figures() {
        assert_eq!(format_num(21690.4, false), "2.169e4");
        assert_eq!(format_num(4.6103e-5, false), "4.610e-5");
        assert_eq!(format_num(0.1, true), "1e-1");
    }

    #[test]
    fn render_parse_render_is_stable() {
        for raw in [false, true] {
            let text = sample().render(raw);
            let back = parse_document(&text, Path::new("r.txt")).unwrap();
            assert_eq!(back.render(raw), text);
        }
        let back = parse_document(&sample().render(true), Path::new("r.txt")).unwrap();
        assert_eq!(back, sample());
    }
}
