//! Trajectory file readers and writers (TCK, CSV, JSON), arc-length resampling
//! and orientation alignment.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{distance, Point3, TrajId, Trajectory, TrajectorySet};

/// Metadata key holding the number of streamlines dropped for having fewer than two points.
pub const DROPPED_SHORT: &str = "dropped_short";
pub const SOURCE_FORMAT: &str = "source_format";

const TCK_MAGIC: &str = "mrtrix tracks";
const CSV_HEADER: [&str; 5] = ["id", "point_index", "x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileFormat {
    Tck,
    Csv,
    Json,
}

impl FileFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FileFormat::Tck => "tck",
            FileFormat::Csv => "csv",
            FileFormat::Json => "json",
        }
    }
}

impl FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tck" => Ok(FileFormat::Tck),
            "csv" => Ok(FileFormat::Csv),
            "json" => Ok(FileFormat::Json),
            other => Err(Error::Unsupported(format!("file format `{other}`"))),
        }
    }
}

/// Parse a trajectory file. Streamlines are returned in file order with ids
/// `0..n`; those with fewer than two points are dropped and counted under
/// [`DROPPED_SHORT`].
pub fn parse(bytes: &[u8], format: FileFormat) -> Result<TrajectorySet> {
    if bytes.is_empty() {
        return Err(Error::Empty("input has no bytes".into()));
    }
    let raw = match format {
        FileFormat::Tck => parse_tck(bytes)?,
        FileFormat::Csv => parse_csv(bytes)?,
        FileFormat::Json => parse_json(bytes)?,
    };
    assemble(raw, format)
}

fn assemble(raw: Vec<Vec<Point3>>, format: FileFormat) -> Result<TrajectorySet> {
    let mut dropped = 0usize;
    let mut trajectories = Vec::with_capacity(raw.len());
    for points in raw {
        if points.len() < 2 {
            dropped += 1;
            continue;
        }
        let id = trajectories.len() as TrajId;
        trajectories.push(Trajectory {
            id,
            points,
            start_step: 0,
        });
    }
    let mut set = TrajectorySet::new(trajectories)?;
    set.metadata
        .insert(SOURCE_FORMAT.into(), format.name().into());
    set.metadata
        .insert(DROPPED_SHORT.into(), dropped.to_string());
    Ok(set)
}

fn check_finite(p: Point3, streamline: usize) -> Result<Point3> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Parse {
            streamline,
            message: format!("non-finite coordinate ({}, {}, {})", p.x, p.y, p.z),
        })
    }
}

struct TckHeader {
    offset: usize,
}

fn parse_tck_header(bytes: &[u8]) -> Result<TckHeader> {
    let mut lines = bytes.split(|&b| b == b'\n');
    let magic = lines.next().unwrap_or_default();
    if std::str::from_utf8(magic).map(str::trim) != Ok(TCK_MAGIC) {
        return Err(Error::format("magic", format!("expected `{TCK_MAGIC}`")));
    }
    let mut datatype = None;
    let mut offset = None;
    let mut header_len = magic.len() + 1;
    let mut terminated = false;
    for line in lines {
        header_len += line.len() + 1;
        let line = std::str::from_utf8(line)
            .map_err(|_| Error::format("header", "non-ASCII header line"))?
            .trim();
        if line == "END" {
            terminated = true;
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::format(line, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "datatype" => datatype = Some(value.to_string()),
            "file" => {
                let mut parts = value.split_whitespace();
                let (Some("."), Some(off), None) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(Error::format(
                        "file",
                        format!("expected `. <offset>`, got `{value}`"),
                    ));
                };
                let off = off
                    .parse::<usize>()
                    .map_err(|_| Error::format("file", format!("bad offset `{off}`")))?;
                offset = Some(off);
            }
            _ => {}
        }
    }
    if !terminated {
        return Err(Error::format("END", "header not terminated"));
    }
    match datatype.as_deref() {
        None => return Err(Error::format("datatype", "missing")),
        Some("Float32LE") => {}
        Some(other) => return Err(Error::Unsupported(format!("TCK datatype `{other}`"))),
    }
    let offset = offset.ok_or_else(|| Error::format("file", "missing"))?;
    if offset < header_len || offset > bytes.len() {
        return Err(Error::format(
            "file",
            format!("offset {offset} outside [{header_len}, {}]", bytes.len()),
        ));
    }
    Ok(TckHeader { offset })
}

fn parse_tck(bytes: &[u8]) -> Result<Vec<Vec<Point3>>> {
    let header = parse_tck_header(bytes)?;
    let payload = &bytes[header.offset..];
    if !payload.len().is_multiple_of(12) {
        return Err(Error::format(
            "payload",
            format!(
                "{} bytes is not a whole number of float32 triplets",
                payload.len()
            ),
        ));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    for chunk in payload.chunks_exact(12) {
        let f = |i: usize| f32::from_le_bytes([chunk[i], chunk[i + 1], chunk[i + 2], chunk[i + 3]]);
        let (x, y, z) = (f(0), f(4), f(8));
        if x.is_nan() && y.is_nan() && z.is_nan() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        if x.is_infinite() && y.is_infinite() && z.is_infinite() {
            break;
        }
        let p = Point3::new(x as f64, y as f64, z as f64);
        current.push(check_finite(p, out.len())?);
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<Vec<Point3>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::format(
            "header",
            format!("expected `{}`", CSV_HEADER.join(",")),
        ));
    }
    let mut out: Vec<Vec<Point3>> = Vec::new();
    let mut prev: Option<(u64, u64)> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::format(CSV_HEADER[i], format!("missing on line {line}")))
        };
        let int = |i: usize| -> Result<u64> {
            let s = field(i)?;
            s.parse().map_err(|_| {
                Error::format(CSV_HEADER[i], format!("bad integer `{s}` on line {line}"))
            })
        };
        let real = |i: usize| -> Result<f64> {
            let s = field(i)?;
            s.parse().map_err(|_| {
                Error::format(CSV_HEADER[i], format!("bad number `{s}` on line {line}"))
            })
        };
        let (id, idx) = (int(0)?, int(1)?);
        let new_streamline = match prev {
            None => true,
            Some((pid, pidx)) if id == pid => {
                if idx != pidx + 1 {
                    return Err(Error::Parse {
                        streamline: out.len() - 1,
                        message: format!(
                            "point_index {idx} after {pidx} on line {line}; rows must be sorted"
                        ),
                    });
                }
                false
            }
            Some((pid, _)) if id > pid => true,
            Some((pid, _)) => {
                return Err(Error::Parse {
                    streamline: out.len(),
                    message: format!("id {id} after {pid} on line {line}; rows must be sorted"),
                });
            }
        };
        if new_streamline {
            if idx != 0 {
                return Err(Error::Parse {
                    streamline: out.len(),
                    message: format!("streamline starts at point_index {idx} on line {line}"),
                });
            }
            out.push(Vec::new());
        }
        let streamline = out.len() - 1;
        let p = check_finite(Point3::new(real(2)?, real(3)?, real(4)?), streamline)?;
        out[streamline].push(p);
        prev = Some((id, idx));
    }
    Ok(out)
}

fn parse_json(bytes: &[u8]) -> Result<Vec<Vec<Point3>>> {
    let raw: Vec<Vec<[f64; 3]>> =
        serde_json::from_slice(bytes).map_err(|e| Error::format("trajectories", e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, pts)| {
            pts.into_iter()
                .map(|p| check_finite(Point3::from(p), i))
                .collect()
        })
        .collect()
}

/// CSV with header `id,point_index,x,y,z`; floats print in shortest round-trip form.
pub fn write_csv(set: &TrajectorySet) -> String {
    let mut out = String::from("id,point_index,x,y,z\n");
    for t in &set.trajectories {
        for (i, p) in t.points.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:?},{:?},{:?}", t.id, i, p.x, p.y, p.z);
        }
    }
    out
}

pub fn write_json(set: &TrajectorySet) -> String {
    let raw: Vec<Vec<[f64; 3]>> = set
        .trajectories
        .iter()
        .map(|t| t.points.iter().map(|p| p.to_array()).collect())
        .collect();
    serde_json::to_string(&raw).expect("arrays of finite floats always serialize")
}

/// Float32LE TCK. Coordinates are narrowed to f32.
pub fn write_tck(set: &TrajectorySet) -> Vec<u8> {
    let body = |offset: usize| {
        format!(
            "{TCK_MAGIC}\ndatatype: Float32LE\ncount: {}\nfile: . {offset}\nEND\n",
            set.len()
        )
    };
    // The offset field's width feeds back into the header length.
    let mut offset = body(0).len();
    while body(offset).len() != offset {
        offset = body(offset).len();
    }
    let mut out = body(offset).into_bytes();
    let mut push = |x: f32, y: f32, z: f32| {
        for v in [x, y, z] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    for t in &set.trajectories {
        for p in &t.points {
            push(p.x as f32, p.y as f32, p.z as f32);
        }
        push(f32::NAN, f32::NAN, f32::NAN);
    }
    push(f32::INFINITY, f32::INFINITY, f32::INFINITY);
    out
}

/// Resample a polyline at arc-length positions `0, δ, 2δ, …`, always ending at
/// the original final point.
pub fn resample(t: &Trajectory, delta: f64) -> Result<Trajectory> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config("resample delta must be positive".into()));
    }
    let total = t.arc_length();
    if total <= 0.0 {
        return Err(Error::ZeroLength);
    }
    // Positions within this slack of the end collapse onto the endpoint.
    let slack = delta * 1e-9;
    let mut points = vec![*t.first()];
    let mut seg = 0usize;
    let mut seg_start = 0.0;
    let mut seg_len = distance(&t.points[0], &t.points[1]);
    let mut j = 1u64;
    loop {
        let s = j as f64 * delta;
        if s >= total - slack {
            break;
        }
        while s > seg_start + seg_len && seg + 2 < t.points.len() {
            seg_start += seg_len;
            seg += 1;
            seg_len = distance(&t.points[seg], &t.points[seg + 1]);
        }
        let frac = if seg_len > 0.0 {
            ((s - seg_start) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        points.push(t.points[seg].lerp(&t.points[seg + 1], frac));
        j += 1;
    }
    points.push(*t.last());
    Ok(Trajectory {
        id: t.id,
        points,
        start_step: t.start_step,
    })
}

pub fn resample_set(set: &TrajectorySet, delta: f64) -> Result<TrajectorySet> {
    let trajectories = set
        .trajectories
        .iter()
        .map(|t| resample(t, delta))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectorySet {
        trajectories,
        metadata: set.metadata.clone(),
    })
}

/// Reverse every trajectory whose endpoints sit closer to the reference
/// (trajectory 0) when flipped.
pub fn orient_align(set: &TrajectorySet) -> Result<TrajectorySet> {
    set.require_non_empty()?;
    let reference = &set.trajectories[0];
    let (rf, rl) = (reference.first(), reference.last());
    let trajectories = set
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == 0 {
                return t.clone();
            }
            let keep = distance(t.first(), rf) + distance(t.last(), rl);
            let flip = distance(t.last(), rf) + distance(t.first(), rl);
            if flip < keep {
                t.reversed()
            } else {
                t.clone()
            }
        })
        .collect();
    Ok(TrajectorySet {
        trajectories,
        metadata: set.metadata.clone(),
    })
}
