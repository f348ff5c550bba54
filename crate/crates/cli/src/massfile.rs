use std::path::Path;

use lrorder_core::FiniteMassFunction;

use crate::error::{CliError, CliResult};
use crate::output::write_file;

fn read_table(path: &Path, columns: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::input(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(c))
                .ok_or_else(|| CliError::parse(path, format!("missing column `{c}` (header {:?})", headers)))
        })
        .collect::<CliResult<_>>()?;
    let mut cols = vec![Vec::new(); columns.len()];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::parse(path, format!("row {row}: {e}")))?;
        for (col, &j) in cols.iter_mut().zip(&idx) {
            let raw = rec.get(j).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| CliError::parse(path, format!("row {row}: {raw:?} is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::parse(path, format!("row {row}: {raw:?} is not finite")));
            }
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(CliError::parse(path, "no data rows"));
    }
    Ok(cols)
}

/// Reads a pair of mass functions on a shared support from columns `x,f,g`.
pub fn read_pair(path: &Path) -> CliResult<(FiniteMassFunction, FiniteMassFunction)> {
    let mut cols = read_table(path, &["x", "f", "g"])?;
    let g = cols.pop().expect("three columns");
    let f = cols.pop().expect("three columns");
    let x = cols.pop().expect("three columns");
    let wrap = |e: lrorder_core::Error| CliError::parse(path, e);
    Ok((FiniteMassFunction::new(x.clone(), f).map_err(wrap)?, FiniteMassFunction::new(x, g).map_err(wrap)?))
}

/// Reads a single mass function from columns `x,mass`.
pub fn read_mass(path: &Path) -> CliResult<FiniteMassFunction> {
    let mut cols = read_table(path, &["x", "mass"])?;
    let m = cols.pop().expect("two columns");
    let x = cols.pop().expect("two columns");
    FiniteMassFunction::new(x, m).map_err(|e| CliError::parse(path, e))
}

pub fn format_pair(f: &FiniteMassFunction, g: &FiniteMassFunction) -> String {
    let mut s = String::from("x,f,g\n");
    for ((x, a), b) in f.support().iter().zip(f.masses()).zip(g.masses()) {
        s.push_str(&format!("{x},{a},{b}\n"));
    }
    s
}

pub fn format_mass(m: &FiniteMassFunction) -> String {
    let mut s = String::from("x,mass\n");
    for (x, p) in m.support().iter().zip(m.masses()) {
        s.push_str(&format!("{x},{p}\n"));
    }
    s
}

pub fn write_pair(path: &Path, f: &FiniteMassFunction, g: &FiniteMassFunction) -> CliResult<()> {
    write_file(path, &format_pair(f, g))
}

pub fn write_mass(path: &Path, m: &FiniteMassFunction) -> CliResult<()> {
    write_file(path, &format_mass(m))
}
