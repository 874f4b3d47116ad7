use serde_json::Value;

/// Float cell with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows, all cells already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert!(row.len() <= self.header.len());
        self.rows.push(row);
    }

    /// Footer row `name,value` padded to the header width.
    pub fn push_footer(&mut self, name: &str, value: f64) {
        let mut row = vec![name.to_string(), float(value)];
        row.resize(self.header.len(), String::new());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one command in both output forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub table: Table,
    pub json: Value,
}

impl Artifact {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}
