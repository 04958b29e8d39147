//! Text formats read and written by the `igs` tool.
//!
//! Geometry files:
//!
//! ```text
//! # comment lines and blank lines are ignored
//! degrees 2 2
//! knots_xi 0 0 0 1 1 1
//! knots_eta 0 0 0 1 1 1
//! size 3 3
//! x y z w        (n * m lines, row-major in (i, j))
//! ```
//!
//! Floats are written with 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use igs_core::{KnotVector, NurbsSurface, WeightedNet};

use crate::CliError;

/// Full-precision float formatting.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn geometry_to_string(s: &NurbsSurface) -> String {
    let (pu, pv) = s.degrees();
    let (n, m) = s.dims();
    let mut out = String::new();
    let join = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "# igs geometry");
    let _ = writeln!(out, "degrees {pu} {pv}");
    let _ = writeln!(out, "knots_xi {}", join(s.kv_xi().knots()));
    let _ = writeln!(out, "knots_eta {}", join(s.kv_eta().knots()));
    let _ = writeln!(out, "size {n} {m}");
    for (p, w) in s.net().points().iter().zip(s.net().weights()) {
        let _ = writeln!(out, "{} {} {} {}", num(p[0]), num(p[1]), num(p[2]), num(*w));
    }
    out
}

fn parse_err(name: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{name}:{line}: {msg}"))
}

fn parse_floats(name: &str, line: usize, fields: &[&str]) -> Result<Vec<f64>, CliError> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(name, line, format!("'{f}' is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(name, line, format!("'{f}' is not finite")))
            }
        })
        .collect()
}

fn parse_usizes(name: &str, line: usize, fields: &[&str], count: usize) -> Result<Vec<usize>, CliError> {
    if fields.len() != count {
        return Err(parse_err(
            name,
            line,
            format!("expected {count} integers, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| parse_err(name, line, format!("'{f}' is not a nonnegative integer")))
        })
        .collect()
}

/// Parses a geometry file. `name` is used in error messages.
pub fn parse_geometry(name: &str, text: &str) -> Result<NurbsSurface, CliError> {
    let mut degrees = None;
    let mut kx = None;
    let mut ke = None;
    let mut size: Option<(usize, usize)> = None;
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match fields[0] {
            "degrees" => {
                let d = parse_usizes(name, line, &fields[1..], 2)?;
                degrees = Some((d[0], d[1]));
            }
            "knots_xi" => kx = Some((line, parse_floats(name, line, &fields[1..])?)),
            "knots_eta" => ke = Some((line, parse_floats(name, line, &fields[1..])?)),
            "size" => {
                let d = parse_usizes(name, line, &fields[1..], 2)?;
                size = Some((d[0], d[1]));
            }
            _ => {
                if size.is_none() {
                    return Err(parse_err(name, line, "control points before the 'size' header"));
                }
                if fields.len() != 4 {
                    return Err(parse_err(
                        name,
                        line,
                        format!("expected 'x y z w', found {} fields", fields.len()),
                    ));
                }
                let v = parse_floats(name, line, &fields)?;
                if v[3] <= 0.0 {
                    return Err(parse_err(name, line, "weights must be positive"));
                }
                pts.push([v[0], v[1], v[2]]);
                wts.push(v[3]);
            }
        }
    }
    let missing = |h: &str| CliError::Input(format!("{name}: missing '{h}' header"));
    let (pu, pv) = degrees.ok_or_else(|| missing("degrees"))?;
    let (lx, kx) = kx.ok_or_else(|| missing("knots_xi"))?;
    let (le, ke) = ke.ok_or_else(|| missing("knots_eta"))?;
    let (n, m) = size.ok_or_else(|| missing("size"))?;
    if pts.len() != n * m {
        return Err(parse_err(
            name,
            last_line,
            format!("size {n} x {m} needs {} control points, found {}", n * m, pts.len()),
        ));
    }
    let kv_xi = KnotVector::new(pu, kx).map_err(|e| parse_err(name, lx, e))?;
    let kv_eta = KnotVector::new(pv, ke).map_err(|e| parse_err(name, le, e))?;
    let net = WeightedNet::new(n, m, pts, wts).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
    NurbsSurface::new(kv_xi, kv_eta, net).map_err(|e| CliError::Input(format!("{name}: {e}")))
}

/// Observation coordinates read from a data file.
#[derive(Debug, Clone, PartialEq)]
pub enum DataPoints {
    Parametric(Vec<[f64; 2]>),
    Physical(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub points: DataPoints,
    pub values: Vec<f64>,
    /// 1-based file line of each record.
    pub lines: Vec<usize>,
}

/// Reads a CSV data file with header `s1,s2,y` (parametric) or
/// `x,y,z,value` (physical; any name for the last column).
pub fn parse_data(name: &str, text: &str) -> Result<DataFile, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{name}: {e}")))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let physical = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["s1", "s2", _] => false,
        ["x", "y", "z", _] => true,
        _ => {
            return Err(parse_err(
                name,
                1,
                format!(
                    "header must be 's1,s2,y' or 'x,y,z,value', found '{}'",
                    header.join(",")
                ),
            ))
        }
    };
    let mut par = Vec::new();
    let mut phys = Vec::new();
    let mut values = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(name, line, e)
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<&str> = rec.iter().collect();
        let v = parse_floats(name, line, &fields)?;
        if physical {
            phys.push([v[0], v[1], v[2]]);
            values.push(v[3]);
        } else {
            par.push([v[0], v[1]]);
            values.push(v[2]);
        }
        lines.push(line);
    }
    if values.is_empty() {
        return Err(CliError::Input(format!("{name}: no data records")));
    }
    let points = if physical {
        DataPoints::Physical(phys)
    } else {
        DataPoints::Parametric(par)
    };
    Ok(DataFile { points, values, lines })
}

/// Reads the coefficient column of a `coefficients.csv` written by `fit`
/// (header `index,i,j,coefficient`), or a bare one-value-per-line list.
pub fn parse_coefficients(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || (k == 0 && t.chars().next().is_some_and(|c| c.is_alphabetic())) {
            continue;
        }
        let last = t.rsplit(',').next().unwrap_or(t).trim();
        out.extend(parse_floats(name, line, &[last])?);
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{name}: no coefficients")));
    }
    Ok(out)
}
