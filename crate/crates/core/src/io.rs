//! Plain-text file formats.
//!
//! - Match files: one correspondence per line, `px py pz qx qy qz`, with `#`
//!   comment lines.
//! - Point clouds: `.xyz` (three or more columns, first three used) and ASCII
//!   `.ply`.
//! - Truth and report files: `key = value` lines. A pose is written as
//!   `theta = <radians>` and `t = <x> <y> <z>`; reports use `theta_rad`
//!   instead of `theta`, and [`parse_pose`] accepts either.
//!
//! Reals are written with 9 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, MatchSet, Point3, Pose4DOF};

/// `v` rounded to 9 significant digits, in the shortest form that reads back
/// to the same rounded value.
pub fn fmt_real(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        // no "-0"
        return "0".into();
    }
    format!("{rounded}")
}

/// Parses a finite real.
pub fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses exactly three whitespace-separated finite reals.
pub fn parse_point(s: &str) -> Option<Point3> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(parse_real)
        .collect::<Option<_>>()?;
    match v[..] {
        [x, y, z] => Some(Point3::new(x, y, z)),
        _ => None,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn is_skipped(line: &str) -> bool {
    line.is_empty() || line.starts_with('#')
}

pub fn parse_matches(text: &str, path: &Path) -> Result<MatchSet> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if is_skipped(line) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                idx + 1,
                format!("expected 6 values, found {}", fields.len()),
            ));
        }
        let mut v = [0.0; 6];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = parse_real(f)
                .ok_or_else(|| parse_error(path, idx + 1, format!("invalid number '{f}'")))?;
        }
        pairs.push(Correspondence::new(
            Point3::new(v[0], v[1], v[2]),
            Point3::new(v[3], v[4], v[5]),
        ));
    }
    if pairs.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no correspondences found".into(),
        });
    }
    MatchSet::new(pairs)
}

/// Reads a match file, preserving row order.
pub fn read_matches(path: impl AsRef<Path>) -> Result<MatchSet> {
    let path = path.as_ref();
    parse_matches(&read_text(path)?, path)
}

/// Match file text; every line of `header` becomes a comment.
pub fn format_matches(matches: &MatchSet, header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for c in matches {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            fmt_real(c.p.x),
            fmt_real(c.p.y),
            fmt_real(c.p.z),
            fmt_real(c.q.x),
            fmt_real(c.q.y),
            fmt_real(c.q.z)
        ));
    }
    out
}

pub fn write_matches(path: impl AsRef<Path>, matches: &MatchSet, header: &str) -> Result<()> {
    write_text(path.as_ref(), &format_matches(matches, header))
}

/// Reads a `.xyz` or ASCII `.ply` point cloud.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<Vec<Point3>> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("xyz") => parse_xyz(&read_text(path)?, path),
        Some("ply") => {
            let bytes = fs::read(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_ply(&bytes, path)
        }
        _ => Err(Error::Format {
            path: path.to_path_buf(),
            message: "unknown point cloud extension, expected .xyz or .ply".into(),
        }),
    }
}

pub fn parse_xyz(text: &str, path: &Path) -> Result<Vec<Point3>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if is_skipped(line) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_error(
                path,
                idx + 1,
                format!("expected at least 3 values, found {}", fields.len()),
            ));
        }
        points.push(parse_xyz_fields(&fields[..3], path, idx + 1)?);
    }
    Ok(points)
}

fn parse_xyz_fields(fields: &[&str], path: &Path, line: usize) -> Result<Point3> {
    let mut v = [0.0; 3];
    for (slot, f) in v.iter_mut().zip(fields) {
        *slot = parse_real(f)
            .ok_or_else(|| parse_error(path, line, format!("invalid number '{f}'")))?;
    }
    Ok(Point3::new(v[0], v[1], v[2]))
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

/// ASCII PLY with `x`, `y`, `z` vertex properties. Other elements are
/// skipped; list properties are allowed outside the vertex element.
pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<Vec<Point3>> {
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let text = String::from_utf8_lossy(bytes);
    let mut lines = text.lines().enumerate();

    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(format_err("missing 'ply' magic line".into())),
    }

    let mut format_seen = false;
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut header_done = false;
    for (idx, raw) in lines.by_ref() {
        let words: Vec<&str> = raw.split_whitespace().collect();
        match words.as_slice() {
            ["format", "ascii", _] => format_seen = true,
            ["format", kind, ..] => {
                return Err(format_err(format!(
                    "{kind} PLY is not supported; convert the file to ASCII PLY"
                )))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count.parse().map_err(|_| {
                    parse_error(path, idx + 1, format!("bad element count '{count}'"))
                })?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            ["property", "list", _, _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(path, idx + 1, "property before any element"))?;
                el.properties.push(name.to_string());
                el.has_list = true;
            }
            ["property", _, name] => {
                elements
                    .last_mut()
                    .ok_or_else(|| parse_error(path, idx + 1, "property before any element"))?
                    .properties
                    .push(name.to_string());
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => {
                return Err(parse_error(
                    path,
                    idx + 1,
                    format!("unrecognised header line '{raw}'"),
                ))
            }
        }
    }
    if !header_done {
        return Err(format_err("missing end_header".into()));
    }
    if !format_seen {
        return Err(format_err("missing format line".into()));
    }
    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| format_err("no vertex element".into()))?;
    let vertex = &elements[vertex_pos];
    if vertex.has_list {
        return Err(format_err(
            "list properties on vertices are not supported".into(),
        ));
    }
    let column = |axis: &str| {
        vertex
            .properties
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| format_err(format!("vertex element has no '{axis}' property")))
    };
    let cols = [column("x")?, column("y")?, column("z")?];

    // element data follow in header order, one line per record
    let skip: usize = elements[..vertex_pos].iter().map(|e| e.count).sum();
    let mut records = lines.filter(|(_, l)| !l.trim().is_empty()).skip(skip);
    let mut points = Vec::with_capacity(vertex.count);
    for _ in 0..vertex.count {
        let (idx, raw) = records.next().ok_or_else(|| {
            format_err(format!(
                "expected {} vertices, file ended early",
                vertex.count
            ))
        })?;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != vertex.properties.len() {
            return Err(parse_error(
                path,
                idx + 1,
                format!(
                    "expected {} values, found {}",
                    vertex.properties.len(),
                    fields.len()
                ),
            ));
        }
        let picked = [fields[cols[0]], fields[cols[1]], fields[cols[2]]];
        points.push(parse_xyz_fields(&picked, path, idx + 1)?);
    }
    Ok(points)
}

pub fn write_cloud_xyz(path: impl AsRef<Path>, points: &[Point3]) -> Result<()> {
    let text: String = points
        .iter()
        .map(|p| format!("{} {} {}\n", fmt_real(p.x), fmt_real(p.y), fmt_real(p.z)))
        .collect();
    write_text(path.as_ref(), &text)
}

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyValue {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits `key = value` lines, skipping blanks, `#` comments and `[section]`
/// headers.
pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<KeyValue>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if is_skipped(line) || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(path, idx + 1, "expected 'key = value'"))?;
        out.push(KeyValue {
            line: idx + 1,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

pub fn format_pose(pose: &Pose4DOF) -> String {
    format!(
        "theta = {}\nt = {} {} {}\n",
        fmt_real(pose.theta()),
        fmt_real(pose.t.x),
        fmt_real(pose.t.y),
        fmt_real(pose.t.z)
    )
}

/// Reads the pose from a truth file or a registration report.
pub fn parse_pose(text: &str, path: &Path) -> Result<Pose4DOF> {
    let entries = parse_key_values(text, path)?;
    let find = |keys: &[&str]| {
        entries
            .iter()
            .find(|e| keys.contains(&e.key.as_str()))
            .ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("missing key '{}'", keys[0]),
            })
    };
    let theta = find(&["theta", "theta_rad"])?;
    let theta_v = parse_real(&theta.value)
        .ok_or_else(|| parse_error(path, theta.line, format!("invalid angle '{}'", theta.value)))?;
    let t = find(&["t"])?;
    let t_v = parse_point(&t.value).ok_or_else(|| {
        parse_error(
            path,
            t.line,
            format!("expected three reals, got '{}'", t.value),
        )
    })?;
    Ok(Pose4DOF::new(theta_v, t_v))
}

pub fn read_pose(path: impl AsRef<Path>) -> Result<Pose4DOF> {
    let path = path.as_ref();
    parse_pose(&read_text(path)?, path)
}

pub fn write_pose(path: impl AsRef<Path>, pose: &Pose4DOF) -> Result<()> {
    write_text(path.as_ref(), &format_pose(pose))
}

/// `prefix` with `suffix` appended to the file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
