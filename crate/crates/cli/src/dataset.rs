use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    #[default]
    Csv,
    Tsv,
}

impl DataFormat {
    /// `.tsv` and `.tab` files are tab separated, everything else comma separated.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => DataFormat::Tsv,
            _ => DataFormat::Csv,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Csv => b',',
            DataFormat::Tsv => b'\t',
        }
    }
}

/// Two-sample data as read from a `value,group` table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: Vec<f64>,
    pub groups: Vec<String>,
}

impl Dataset {
    /// Group labels in order of first appearance.
    pub fn levels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = vec![];
        for g in &self.groups {
            if !out.contains(&g.as_str()) {
                out.push(g);
            }
        }
        out
    }

    /// Row counts per level, in the order of [`Dataset::levels`].
    pub fn sizes(&self) -> Vec<usize> {
        self.levels().iter().map(|l| self.groups.iter().filter(|g| g == l).count()).collect()
    }

    pub fn group(&self, label: &str) -> Vec<f64> {
        self.values.iter().zip(&self.groups).filter(|(_, g)| *g == label).map(|(v, _)| *v).collect()
    }

    /// Splits into `(X, Y, label_f, label_g)`. Unnamed groups are taken in
    /// order of first appearance: the first is the sample from F.
    pub fn split(&self, group_f: Option<&str>, group_g: Option<&str>) -> CliResult<(Vec<f64>, Vec<f64>, String, String)> {
        let levels = self.levels();
        if levels.len() != 2 {
            return Err(CliError::Usage(format!(
                "expected exactly two groups, found {}: {:?}",
                levels.len(),
                levels
            )));
        }
        let pick = |want: Option<&str>, other: Option<&str>, default: &str| -> CliResult<String> {
            match want {
                Some(w) if levels.contains(&w) => Ok(w.to_string()),
                Some(w) => Err(CliError::Usage(format!("group {w:?} not found; groups are {levels:?}"))),
                None => match other {
                    Some(o) => Ok(levels.iter().find(|l| **l != o).unwrap_or(&default).to_string()),
                    None => Ok(default.to_string()),
                },
            }
        };
        let lf = pick(group_f, group_g, levels[0])?;
        let lg = pick(group_g, Some(&lf), levels[1])?;
        if lf == lg {
            return Err(CliError::Usage(format!("F and G must be different groups, both are {lf:?}")));
        }
        Ok((self.group(&lf), self.group(&lg), lf, lg))
    }
}

/// Reads a delimited table with a header containing `value` and `group`.
/// Row numbers in errors count data rows from 1.
pub fn load_dataset(path: &Path, format: DataFormat) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::input(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().delimiter(format.delimiter()).trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (vi, gi) = match (col("value"), col("group")) {
        (Some(v), Some(g)) => (v, g),
        _ => return Err(CliError::parse(path, format!("header must contain `value` and `group` columns, got {:?}", headers))),
    };
    let mut ds = Dataset { values: vec![], groups: vec![] };
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::parse(path, format!("row {row}: {e}")))?;
        let (raw, group) = match (rec.get(vi), rec.get(gi)) {
            (Some(v), Some(g)) => (v, g),
            _ => return Err(CliError::parse(path, format!("row {row}: missing value or group"))),
        };
        let v: f64 = raw.parse().map_err(|_| CliError::parse(path, format!("row {row}: value {raw:?} is not a number")))?;
        if !v.is_finite() {
            return Err(CliError::parse(path, format!("row {row}: value {raw:?} is not finite")));
        }
        if group.is_empty() {
            return Err(CliError::parse(path, format!("row {row}: empty group label")));
        }
        ds.values.push(v);
        ds.groups.push(group.to_string());
    }
    if ds.values.is_empty() {
        return Err(CliError::parse(path, "no data rows"));
    }
    Ok(ds)
}
