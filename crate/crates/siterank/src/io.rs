//! CSV readers and writers for venues, check-ins and derived tables.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use siterank_core::geo::JensenCoefficients;
use siterank_core::mobility::{RatioVariant, TransitionTables};
use siterank_core::{CheckIn, Dataset, FeatureKind, FeatureVector, LatLon, Venue};

/// Input errors. Record numbers count data rows from 1, not counting the header.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("header must be `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("record {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("duplicate venue id {id:?} at record {line}")]
    DuplicateId { id: String, line: u64 },
    #[error("record {line}: coordinate out of range")]
    OutOfRange { line: u64 },
    #[error("record {line}: empty category")]
    EmptyCategory { line: u64 },
    #[error("record {line}: timestamp is not an integer")]
    MalformedTimestamp { line: u64 },
    #[error("check-in at record {line} refers to unknown venue {venue:?}")]
    UnknownVenue { venue: String, line: u64 },
}

pub const VENUES_HEADER: &str = "id,lat,lon,category,chain";
pub const CHECKINS_HEADER: &str = "user,venue,timestamp";

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::Open {
            path: path.to_path_buf(),
            source,
        })
}

pub fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::Open {
            path: path.to_path_buf(),
            source,
        })
}

fn reader<R: Read>(input: R, expected: &'static str) -> Result<csv::Reader<R>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let found = match rdr.headers() {
        Ok(h) => h.iter().collect::<Vec<_>>().join(","),
        Err(e) => return Err(malformed(0, e)),
    };
    if found.is_empty() {
        return Ok(rdr);
    }
    if found != expected {
        return Err(IoError::Header { expected, found });
    }
    Ok(rdr)
}

fn malformed(line: u64, e: impl ToString) -> IoError {
    IoError::Malformed {
        line,
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
struct VenueRow {
    id: String,
    lat: f64,
    lon: f64,
    category: String,
    chain: Option<String>,
}

pub fn read_venues<R: Read>(input: R) -> Result<Vec<Venue>, IoError> {
    let mut rdr = reader(input, VENUES_HEADER)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<VenueRow>().enumerate() {
        let line = i as u64 + 1;
        let row = row.map_err(|e| malformed(line, e))?;
        if row.id.is_empty() {
            return Err(malformed(line, "empty venue id"));
        }
        let at = LatLon::new(row.lat, row.lon);
        if !at.in_range() {
            return Err(IoError::OutOfRange { line });
        }
        if row.category.is_empty() {
            return Err(IoError::EmptyCategory { line });
        }
        if !seen.insert(row.id.clone()) {
            return Err(IoError::DuplicateId { id: row.id, line });
        }
        let mut v = Venue::new(row.id, row.lat, row.lon, row.category);
        if let Some(chain) = row.chain.filter(|c| !c.is_empty()) {
            v = v.with_chain(chain);
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_checkins<R: Read>(input: R) -> Result<Vec<CheckIn>, IoError> {
    let mut rdr = reader(input, CHECKINS_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let rec = rec.map_err(|e| malformed(line, e))?;
        if rec.len() != 3 {
            return Err(malformed(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let timestamp: i64 = rec[2]
            .parse()
            .map_err(|_| IoError::MalformedTimestamp { line })?;
        out.push(CheckIn::new(&rec[0], &rec[1], timestamp));
    }
    Ok(out)
}

pub fn parse_venues(path: &Path) -> Result<Vec<Venue>, IoError> {
    read_venues(open(path)?)
}

pub fn parse_checkins(path: &Path) -> Result<Vec<CheckIn>, IoError> {
    read_checkins(open(path)?)
}

/// Parses both files and checks that every check-in resolves to a venue.
pub fn load_dataset(
    venues: &Path,
    checkins: &Path,
    max_gap_s: Option<i64>,
) -> Result<Dataset, IoError> {
    let venues = parse_venues(venues)?;
    let checkins = parse_checkins(checkins)?;
    let ids: HashSet<&str> = venues.iter().map(|v| v.id.as_str()).collect();
    if let Some((i, c)) = checkins
        .iter()
        .enumerate()
        .find(|(_, c)| !ids.contains(c.venue.as_str()))
    {
        return Err(IoError::UnknownVenue {
            venue: c.venue.0.clone(),
            line: i as u64 + 1,
        });
    }
    Ok(Dataset::with_max_gap(venues, checkins, max_gap_s))
}

pub fn write_venues<W: Write>(out: W, venues: &[Venue]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VENUES_HEADER.split(','))
        .map_err(io::Error::from)?;
    for v in venues {
        w.write_record([
            v.id.as_str(),
            &v.location.lat.to_string(),
            &v.location.lon.to_string(),
            v.category.as_str(),
            v.chain.as_deref().unwrap_or(""),
        ])
        .map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_checkins<W: Write>(out: W, checkins: &[CheckIn]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHECKINS_HEADER.split(','))
        .map_err(io::Error::from)?;
    for c in checkins {
        w.write_record([c.user.as_str(), c.venue.as_str(), &c.timestamp.to_string()])
            .map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_kappa<W: Write>(out: W, k: &JensenCoefficients) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["from_category", "to_category", "kappa", "baseline_mean"])
        .map_err(io::Error::from)?;
    for (from, to, kappa, mean) in k.rows() {
        w.write_record([from.as_str(), to.as_str(), &kappa.to_string(), &mean.to_string()])
            .map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rho<W: Write>(
    out: W,
    t: &TransitionTables,
    variant: RatioVariant,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["from_category", "to_category", "rho"])
        .map_err(io::Error::from)?;
    for (from, to, _, rho) in t.rows(variant) {
        w.write_record([from.as_str(), to.as_str(), &rho.to_string()])
            .map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_features<W: Write>(out: W, vectors: &[FeatureVector]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["area", "lat", "lon", "radius_m", "target_category", "focal_venue"];
    header.extend(FeatureKind::ALL.iter().map(|k| k.name()));
    header.push("y");
    w.write_record(&header).map_err(io::Error::from)?;
    for v in vectors {
        let mut rec = vec![
            v.area.id.clone(),
            v.area.center.lat.to_string(),
            v.area.center.lon.to_string(),
            v.area.radius_m.to_string(),
            v.area.target_category.0.clone(),
            v.area.focal_venue.as_ref().map_or(String::new(), |f| f.0.clone()),
        ];
        rec.extend(v.x.iter().map(|x| x.to_string()));
        rec.push(v.y.map_or(String::new(), |y| y.to_string()));
        w.write_record(&rec).map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct AreaRow {
    id: String,
    lat: f64,
    lon: f64,
    category: String,
}

/// Candidate areas from a CSV with header `id,lat,lon,category`.
pub fn read_areas<R: Read>(input: R, radius_m: f64) -> Result<Vec<siterank_core::CandidateArea>, IoError> {
    let mut rdr = reader(input, "id,lat,lon,category")?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<AreaRow>().enumerate() {
        let line = i as u64 + 1;
        let row = row.map_err(|e| malformed(line, e))?;
        let at = LatLon::new(row.lat, row.lon);
        if !at.in_range() {
            return Err(IoError::OutOfRange { line });
        }
        out.push(siterank_core::CandidateArea::new(row.id, at, radius_m, row.category));
    }
    Ok(out)
}

pub fn parse_areas(path: &Path, radius_m: f64) -> Result<Vec<siterank_core::CandidateArea>, IoError> {
    read_areas(open(path)?, radius_m)
}
