use std::io::Write;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Rows of one command. The last column of every schema is `error`.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        debug_assert_eq!(columns.last(), Some(&"error"));
        Table { columns, rows: Vec::new() }
    }

    /// Appends a row; missing trailing cells (usually `error`) are left empty.
    pub fn push(&mut self, mut row: Vec<Cell>) {
        assert!(row.len() <= self.columns.len(), "row wider than the schema");
        row.resize(self.columns.len(), Cell::Empty);
        self.rows.push(row);
    }

    /// Row with every computed column empty and the message in `error`.
    pub fn push_error(&mut self, mut lead: Vec<Cell>, message: String) {
        lead.resize(self.columns.len() - 1, Cell::Empty);
        lead.push(Cell::Text(message));
        self.rows.push(lead);
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !matches!(r.last(), Some(Cell::Empty))).count()
    }
}

pub struct Metadata {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub config_json: String,
    pub created_unix: u64,
}

/// Writes `#` metadata lines, the header and the rows. Every row also gets
/// the seed and the artifact version.
pub fn write_csv<W: Write>(mut out: W, meta: &Metadata, table: &Table) -> std::io::Result<()> {
    writeln!(out, "# ladder {}", meta.version)?;
    writeln!(out, "# command: {}", meta.command)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# config_sha256: {}", meta.config_hash)?;
    writeln!(out, "# config: {}", meta.config_json)?;
    writeln!(out, "# created_unix: {}", meta.created_unix)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = table.columns.to_vec();
    header.extend(["seed", "version"]);
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.iter().map(Cell::render).collect();
        rec.push(meta.seed.to_string());
        rec.push(meta.version.to_string());
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.9314899971e-3, 1e300, 5e-324, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn error_rows_counted() {
        let mut t = Table::new(&["a", "b", "error"]);
        t.push(vec![1.0.into(), 2.0.into()]);
        t.push_error(vec![3.0.into()], "boom".into());
        assert_eq!(t.failed_rows(), 1);
        assert_eq!(t.rows[1][1], Cell::Empty);
    }

    #[test]
    fn header_only_when_empty() {
        let t = Table::new(&["x", "error"]);
        let meta = Metadata {
            version: "0",
            command: "dimer",
            seed: 1,
            config_hash: "h".into(),
            config_json: "{}".into(),
            created_unix: 0,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &meta, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["x,error,seed,version"]);
    }
}
