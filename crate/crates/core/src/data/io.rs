use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ClinicalClass, DogId, ImuRecording, Placement, Protocol, CHANNELS, SAMPLE_RATE_HZ};
use crate::{Error, Result};

pub const RECORDING_HEADER: [&str; 7] = ["t", "fx", "fy", "fz", "wx", "wy", "wz"];
const MANIFEST_HEADER: [&str; 5] = ["dog_id", "class", "placement", "protocol", "path"];
/// Allowed relative deviation of the mean sample spacing from 1/120 s.
const RATE_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub dog_id: DogId,
    pub class: ClinicalClass,
    pub placement: Placement,
    pub protocol: Protocol,
    /// Relative to the manifest's directory unless absolute.
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory that relative entry paths resolve against.
    pub base_dir: PathBuf,
}

fn schema(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema { path: path.to_path_buf(), message: message.into() }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line: line as usize, message: message.into() }
}

fn csv_line(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))),
            _ => schema(path, e.to_string()),
        })?;
        let header = reader.headers().map_err(|e| schema(path, e.to_string()))?.clone();
        if header.iter().map(str::trim).ne(MANIFEST_HEADER) {
            return Err(schema(path, format!("expected header {}", MANIFEST_HEADER.join(","))));
        }
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(path, csv_line(&e), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != MANIFEST_HEADER.len() {
                return Err(parse_err(path, line, format!("expected 5 fields, got {}", record.len())));
            }
            let field = |i: usize| record[i].trim();
            let bad = |e: Error| parse_err(path, line, e.to_string());
            entries.push(ManifestEntry {
                dog_id: DogId::new(field(0)),
                class: field(1).parse().map_err(bad)?,
                placement: field(2).parse().map_err(bad)?,
                protocol: field(3).parse().map_err(bad)?,
                path: PathBuf::from(field(4)),
            });
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let manifest = Self { entries, base_dir };
        manifest.validate(path)?;
        Ok(manifest)
    }

    /// Dog ids map to a single class and every referenced file exists.
    fn validate(&self, path: &Path) -> Result<()> {
        let mut classes: BTreeMap<&DogId, ClinicalClass> = BTreeMap::new();
        for e in &self.entries {
            if let Some(prev) = classes.insert(&e.dog_id, e.class) {
                if prev != e.class {
                    return Err(schema(path, format!("dog {} listed as both {prev} and {}", e.dog_id, e.class)));
                }
            }
            let file = self.resolve(e);
            if !file.is_file() {
                return Err(schema(path, format!("missing recording {}", file.display())));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    /// Distinct dogs per clinical class.
    pub fn class_counts(&self) -> BTreeMap<ClinicalClass, usize> {
        let mut dogs: BTreeMap<&DogId, ClinicalClass> = BTreeMap::new();
        for e in &self.entries {
            dogs.insert(&e.dog_id, e.class);
        }
        let mut counts = BTreeMap::new();
        for class in dogs.values() {
            *counts.entry(*class).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_csv(&self) -> String {
        let mut out = MANIFEST_HEADER.join(",");
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{}", e.dog_id, e.class, e.placement, e.protocol, e.path.display());
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Parses a recording CSV; metadata comes from the manifest entry.
pub fn load_recording(path: &Path, entry: &ManifestEntry) -> Result<ImuRecording> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(schema(path, "empty recording file"));
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| schema(path, e.to_string()))?.clone();
    if header.len() < RECORDING_HEADER.len() {
        return Err(schema(path, format!("missing channels: header has {} of 7 columns", header.len())));
    }
    if header.iter().map(str::trim).ne(RECORDING_HEADER) {
        return Err(schema(path, format!("expected header {}", RECORDING_HEADER.join(","))));
    }

    let mut samples = Vec::new();
    let mut times = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, csv_line(&e), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != RECORDING_HEADER.len() {
            return Err(parse_err(path, line, format!("expected 7 fields, got {}", record.len())));
        }
        let mut row = [0.0; 7];
        for (i, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("column {} is not a number: '{cell}'", RECORDING_HEADER[i])))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite value in column {}", RECORDING_HEADER[i])));
            }
            row[i] = v;
        }
        if let Some(&prev) = times.last() {
            if row[0] <= prev {
                return Err(parse_err(path, line, "time column is not increasing"));
            }
        }
        times.push(row[0]);
        let mut sample = [0.0; CHANNELS];
        sample.copy_from_slice(&row[1..]);
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(schema(path, "recording has no samples"));
    }
    if times.len() > 1 {
        let spacing = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        let nominal = 1.0 / SAMPLE_RATE_HZ;
        if ((spacing - nominal) / nominal).abs() > RATE_TOLERANCE {
            return Err(schema(path, format!("sample rate {:.2} Hz is not 120 Hz", 1.0 / spacing)));
        }
    }
    Ok(ImuRecording {
        dog_id: entry.dog_id.clone(),
        class: entry.class,
        placement: entry.placement,
        protocol: entry.protocol,
        sample_rate: SAMPLE_RATE_HZ,
        samples,
    })
}

/// Writes the recording CSV with `t` at the nominal 1/120 s spacing. Values
/// are printed with six decimals.
pub fn write_recording(recording: &ImuRecording, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(recording.len() * 72 + 32);
    out.push_str(&RECORDING_HEADER.join(","));
    out.push('\n');
    for (i, s) in recording.samples.iter().enumerate() {
        let _ = write!(out, "{:.6}", i as f64 / recording.sample_rate);
        for v in s {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
