//! Loading and validation of the external CSV tables.
//!
//! Every table has a fixed header. Airport and carrier codes are normalized to
//! upper case. Structural problems (bad header, unparsable numbers, invariant
//! violations, duplicate keys) are hard errors that list every offending line;
//! flight rows dated outside the requested window are soft rejects that are
//! counted and returned alongside the accepted records.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agreement::{Rater, RatingClass};
use crate::error::{Error, Result};

pub const FLIGHTS_HEADER: &[&str] = &["year", "origin", "destination", "carrier", "passengers"];
pub const AIRPORTS_HEADER: &[&str] = &[
    "code",
    "lat",
    "lon",
    "secnd",
    "slot",
    "az_hub",
    "rival_conn_share",
    "landing_fee",
    "natl_pax_share",
];
pub const CITIES_HEADER: &[&str] = &["region", "year", "population", "income", "unempl", "vacation"];
pub const REGIONS_HEADER: &[&str] = &["code", "region"];
pub const RATER_HEADER: &[&str] = &["variable", "class"];
/// Optional connecting-traffic table used for AZSHCON.
pub const CONNECTIONS_HEADER: &[&str] = &["year", "origin", "destination", "carrier", "passengers"];

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub first: i32,
    pub last: i32,
}

impl YearWindow {
    pub fn new(first: i32, last: i32) -> Result<Self> {
        if first > last {
            return Err(Error::invalid(format!("empty year window {first}:{last}")));
        }
        Ok(YearWindow { first, last })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first..=self.last
    }
}

impl FromStr for YearWindow {
    type Err = Error;

    /// Parses `A:B` (or a single year `A`).
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| Error::invalid(format!("bad year range '{s}'")))
        };
        match s.split_once(':') {
            Some((a, b)) => YearWindow::new(parse(a)?, parse(b)?),
            None => {
                let y = parse(s)?;
                YearWindow::new(y, y)
            }
        }
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub year: i32,
    pub origin: String,
    pub destination: String,
    pub carrier: String,
    pub passengers: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirportRecord {
    pub code: String,
    pub latitude: f64,
    pub longitude: f64,
    pub secondary: bool,
    pub slot: bool,
    pub subject_hub: bool,
    /// Largest share of domestic connecting passengers handled here by any
    /// of the subject carrier's rivals.
    pub rival_connecting_share: f64,
    pub landing_fee: Option<f64>,
    /// National passenger share; when absent it is computed from base-year
    /// flights.
    pub national_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityAttributeRecord {
    pub region: String,
    pub year: i32,
    pub population: f64,
    pub income: f64,
    pub unemployment: f64,
    pub vacation: f64,
}

/// Airport code to mesoregion key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AirportRegionMap {
    map: BTreeMap<String, String>,
}

impl AirportRegionMap {
    pub fn new(map: BTreeMap<String, String>) -> Self {
        AirportRegionMap { map }
    }

    pub fn region(&self, airport: &str) -> Option<&str> {
        self.map.get(airport).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(a, r)| (a.as_str(), r.as_str()))
    }

    /// Fails listing every code in `airports` that has no region.
    pub fn check_covers<'a>(&self, airports: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let missing: BTreeSet<&str> = airports
            .into_iter()
            .filter(|a| !self.map.contains_key(*a))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "airports without a region: {}",
                missing.into_iter().collect::<Vec<_>>().join(", ")
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    OutsideWindow { year: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    #[serde(flatten)]
    pub reason: RejectReason,
}

/// Accepted records plus soft rejects. `records.len() + rejected.len()`
/// equals the number of data rows read.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejected: Vec<Rejection>,
}

impl<T> Loaded<T> {
    pub fn rows_read(&self) -> usize {
        self.records.len() + self.rejected.len()
    }
}

pub fn normalize_code(code: &str) -> String {
    code.trim().to_ascii_uppercase()
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads a headed CSV, verifies the header and hands each record to `row`.
/// Row errors are collected rather than returned on first failure.
fn read_table<R: Read>(
    reader: R,
    label: &Path,
    header: &[&str],
    mut row: impl FnMut(u64, &csv::StringRecord) -> std::result::Result<(), String>,
) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| Error::Schema {
        path: label.to_path_buf(),
        expected: header.join(","),
        found: e.to_string(),
    })?;
    let found_names: Vec<String> = found.iter().map(|h| h.trim_start_matches('\u{feff}').to_string()).collect();
    if found_names.len() != header.len() || found_names.iter().zip(header).any(|(a, b)| a != b) {
        return Err(Error::Schema {
            path: label.to_path_buf(),
            expected: header.join(","),
            found: found_names.join(","),
        });
    }
    let mut errors = Vec::new();
    for result in rdr.records() {
        match result {
            Ok(rec) => {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                if rec.len() != header.len() {
                    errors.push((line, format!("expected {} fields, found {}", header.len(), rec.len())));
                    continue;
                }
                if let Err(msg) = row(line, &rec) {
                    errors.push((line, msg));
                }
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                errors.push((line, e.to_string()));
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Rows {
            path: label.to_path_buf(),
            errors,
        })
    }
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<T, String> {
    let raw = &rec[idx];
    raw.parse::<T>()
        .map_err(|_| format!("{name}: cannot parse '{raw}'"))
}

fn finite(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = field(rec, idx, name)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name}: non-finite value"))
    }
}

fn optional(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<Option<f64>, String> {
    if rec[idx].is_empty() {
        Ok(None)
    } else {
        finite(rec, idx, name).map(Some)
    }
}

fn flag(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<bool, String> {
    match &rec[idx] {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("{name}: expected 0 or 1, found '{other}'")),
    }
}

fn code(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<String, String> {
    let c = normalize_code(&rec[idx]);
    if c.is_empty() {
        Err(format!("{name}: empty code"))
    } else {
        Ok(c)
    }
}

pub fn load_flights(path: impl AsRef<Path>, window: YearWindow) -> Result<Loaded<FlightRecord>> {
    let path = path.as_ref();
    read_flights(open(path)?, path, window)
}

pub fn read_flights<R: Read>(reader: R, label: &Path, window: YearWindow) -> Result<Loaded<FlightRecord>> {
    read_traffic(reader, label, window, FLIGHTS_HEADER)
}

/// Connecting passengers by carrier on each directional pair; same layout as
/// the flights table.
pub fn load_connections(path: impl AsRef<Path>, window: YearWindow) -> Result<Loaded<FlightRecord>> {
    let path = path.as_ref();
    read_traffic(open(path)?, path, window, CONNECTIONS_HEADER)
}

fn read_traffic<R: Read>(
    reader: R,
    label: &Path,
    window: YearWindow,
    header: &[&str],
) -> Result<Loaded<FlightRecord>> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut seen: HashMap<(i32, String, String, String), u64> = HashMap::new();
    let mut duplicates: Vec<(u64, String)> = Vec::new();
    read_table(reader, label, header, |line, rec| {
        let year: i32 = field(rec, 0, "year")?;
        let origin = code(rec, 1, "origin")?;
        let destination = code(rec, 2, "destination")?;
        let carrier = code(rec, 3, "carrier")?;
        let passengers: u64 = field(rec, 4, "passengers")?;
        if origin == destination {
            return Err(format!("origin equals destination ({origin})"));
        }
        let key = (year, origin.clone(), destination.clone(), carrier.clone());
        if let Some(first) = seen.get(&key) {
            duplicates.push((
                line,
                format!("duplicate key ({year}, {origin}, {destination}, {carrier}) first seen on line {first}"),
            ));
            return Ok(());
        }
        seen.insert(key, line);
        if !window.contains(year) {
            rejected.push(Rejection {
                line,
                reason: RejectReason::OutsideWindow { year },
            });
            return Ok(());
        }
        records.push(FlightRecord {
            year,
            origin,
            destination,
            carrier,
            passengers,
        });
        Ok(())
    })?;
    if !duplicates.is_empty() {
        return Err(Error::Rows {
            path: label.to_path_buf(),
            errors: duplicates,
        });
    }
    Ok(Loaded { records, rejected })
}

pub fn load_airports(path: impl AsRef<Path>) -> Result<Vec<AirportRecord>> {
    let path = path.as_ref();
    read_airports(open(path)?, path)
}

pub fn read_airports<R: Read>(reader: R, label: &Path) -> Result<Vec<AirportRecord>> {
    let mut out = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    read_table(reader, label, AIRPORTS_HEADER, |line, rec| {
        let code = code(rec, 0, "code")?;
        let latitude = finite(rec, 1, "lat")?;
        let longitude = finite(rec, 2, "lon")?;
        if latitude.abs() > 90.0 {
            return Err(format!("lat out of range: {latitude}"));
        }
        if longitude.abs() > 180.0 {
            return Err(format!("lon out of range: {longitude}"));
        }
        let rival_connecting_share = finite(rec, 6, "rival_conn_share")?;
        if !(0.0..=1.0).contains(&rival_connecting_share) {
            return Err(format!("rival_conn_share outside [0,1]: {rival_connecting_share}"));
        }
        let landing_fee = optional(rec, 7, "landing_fee")?;
        if landing_fee.is_some_and(|f| f < 0.0) {
            return Err("landing_fee is negative".into());
        }
        let national_share = optional(rec, 8, "natl_pax_share")?;
        if national_share.is_some_and(|s| !(0.0..=1.0).contains(&s)) {
            return Err("natl_pax_share outside [0,1]".into());
        }
        if let Some(first) = seen.get(&code) {
            return Err(format!("duplicate airport code {code} (first on line {first})"));
        }
        seen.insert(code.clone(), line);
        out.push(AirportRecord {
            code,
            latitude,
            longitude,
            secondary: flag(rec, 3, "secnd")?,
            slot: flag(rec, 4, "slot")?,
            subject_hub: flag(rec, 5, "az_hub")?,
            rival_connecting_share,
            landing_fee,
            national_share,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_cities(path: impl AsRef<Path>) -> Result<Vec<CityAttributeRecord>> {
    let path = path.as_ref();
    read_cities(open(path)?, path)
}

pub fn read_cities<R: Read>(reader: R, label: &Path) -> Result<Vec<CityAttributeRecord>> {
    let mut out = Vec::new();
    let mut seen: HashMap<(String, i32), u64> = HashMap::new();
    read_table(reader, label, CITIES_HEADER, |line, rec| {
        let region = rec[0].trim().to_string();
        if region.is_empty() {
            return Err("region: empty key".into());
        }
        let year: i32 = field(rec, 1, "year")?;
        let population = finite(rec, 2, "population")?;
        let income = finite(rec, 3, "income")?;
        let unemployment = finite(rec, 4, "unempl")?;
        let vacation = finite(rec, 5, "vacation")?;
        if population <= 0.0 {
            return Err("population must be positive".into());
        }
        if income <= 0.0 {
            return Err("income must be positive".into());
        }
        // Both enter as geometric means, so zero is as unusable as negative.
        if !(unemployment > 0.0 && unemployment <= 1.0) {
            return Err(format!("unempl outside (0,1]: {unemployment}"));
        }
        if !(vacation > 0.0 && vacation <= 1.0) {
            return Err(format!("vacation outside (0,1]: {vacation}"));
        }
        if let Some(first) = seen.get(&(region.clone(), year)) {
            return Err(format!("duplicate ({region}, {year}) (first on line {first})"));
        }
        seen.insert((region.clone(), year), line);
        out.push(CityAttributeRecord {
            region,
            year,
            population,
            income,
            unemployment,
            vacation,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_regions(path: impl AsRef<Path>) -> Result<AirportRegionMap> {
    let path = path.as_ref();
    read_regions(open(path)?, path)
}

pub fn read_regions<R: Read>(reader: R, label: &Path) -> Result<AirportRegionMap> {
    let mut map = BTreeMap::new();
    read_table(reader, label, REGIONS_HEADER, |_, rec| {
        let code = code(rec, 0, "code")?;
        let region = rec[1].trim().to_string();
        if region.is_empty() {
            return Err("region: empty key".into());
        }
        if map.insert(code.clone(), region).is_some() {
            return Err(format!("duplicate airport code {code}"));
        }
        Ok(())
    })?;
    Ok(AirportRegionMap::new(map))
}

pub fn load_rater_file(path: impl AsRef<Path>) -> Result<Rater> {
    let path = path.as_ref();
    let provenance = path.display().to_string();
    read_rater(open(path)?, path, &provenance)
}

pub fn read_rater<R: Read>(reader: R, label: &Path, provenance: &str) -> Result<Rater> {
    let mut items: Vec<(String, RatingClass)> = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    read_table(reader, label, RATER_HEADER, |line, rec| {
        let name = rec[0].trim().to_string();
        if name.is_empty() {
            return Err("variable: empty name".into());
        }
        let class: RatingClass = rec[1]
            .parse()
            .map_err(|_| format!("unknown class token '{}'", &rec[1]))?;
        let key = crate::covariates::canonical_key(&name);
        if let Some(first) = seen.get(&key) {
            return Err(format!("duplicate variable {name} (first on line {first})"));
        }
        seen.insert(key, line);
        items.push((name, class));
        Ok(())
    })?;
    Rater::new(provenance, items)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io(PathBuf::from("<csv>"), e))?;
    Ok(())
}

pub fn write_flights<W: Write>(w: W, flights: &[FlightRecord]) -> Result<()> {
    write_rows(
        w,
        FLIGHTS_HEADER,
        flights.iter().map(|f| {
            vec![
                f.year.to_string(),
                f.origin.clone(),
                f.destination.clone(),
                f.carrier.clone(),
                f.passengers.to_string(),
            ]
        }),
    )
}

pub fn write_airports<W: Write>(w: W, airports: &[AirportRecord]) -> Result<()> {
    let b = |x: bool| if x { "1" } else { "0" }.to_string();
    write_rows(
        w,
        AIRPORTS_HEADER,
        airports.iter().map(|a| {
            vec![
                a.code.clone(),
                a.latitude.to_string(),
                a.longitude.to_string(),
                b(a.secondary),
                b(a.slot),
                b(a.subject_hub),
                a.rival_connecting_share.to_string(),
                fmt_opt(a.landing_fee),
                fmt_opt(a.national_share),
            ]
        }),
    )
}

pub fn write_cities<W: Write>(w: W, cities: &[CityAttributeRecord]) -> Result<()> {
    write_rows(
        w,
        CITIES_HEADER,
        cities.iter().map(|c| {
            vec![
                c.region.clone(),
                c.year.to_string(),
                c.population.to_string(),
                c.income.to_string(),
                c.unemployment.to_string(),
                c.vacation.to_string(),
            ]
        }),
    )
}

pub fn write_regions<W: Write>(w: W, regions: &AirportRegionMap) -> Result<()> {
    write_rows(
        w,
        REGIONS_HEADER,
        regions.iter().map(|(a, r)| vec![a.to_string(), r.to_string()]),
    )
}

pub fn write_rater<W: Write>(w: W, rater: &Rater) -> Result<()> {
    write_rows(
        w,
        RATER_HEADER,
        rater
            .iter()
            .map(|(name, class)| vec![name.to_string(), class.token().to_string()]),
    )
}

pub fn save_rater(path: impl AsRef<Path>, rater: &Rater) -> Result<()> {
    let path = path.as_ref();
    write_rater(create(path)?, rater)
}

/// Every input table of one run.
#[derive(Debug, Clone)]
pub struct InputTables {
    pub flights: Vec<FlightRecord>,
    pub airports: Vec<AirportRecord>,
    pub cities: Vec<CityAttributeRecord>,
    pub regions: AirportRegionMap,
    pub connections: Vec<FlightRecord>,
    pub flight_rejects: usize,
}

#[derive(Debug, Clone)]
pub struct InputPaths {
    pub flights: PathBuf,
    pub airports: PathBuf,
    pub cities: PathBuf,
    pub regions: PathBuf,
    pub connections: Option<PathBuf>,
}

impl InputPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let connections = dir.join("connections.csv");
        InputPaths {
            flights: dir.join("flights.csv"),
            airports: dir.join("airports.csv"),
            cities: dir.join("cities.csv"),
            regions: dir.join("airport_regions.csv"),
            connections: connections.exists().then_some(connections),
        }
    }

    /// `window` must include the base year.
    pub fn load(&self, window: YearWindow) -> Result<InputTables> {
        let flights = load_flights(&self.flights, window)?;
        let airports = load_airports(&self.airports)?;
        let cities = load_cities(&self.cities)?;
        let regions = load_regions(&self.regions)?;
        let connections = match &self.connections {
            Some(p) => load_connections(p, window)?.records,
            None => Vec::new(),
        };
        Ok(InputTables {
            flight_rejects: flights.rejected.len(),
            flights: flights.records,
            airports,
            cities,
            regions,
            connections,
        })
    }
}

/// Writes the four ingest tables (and connections when non-empty) into `dir`
/// using the conventional names.
pub fn write_input_dir(dir: impl AsRef<Path>, tables: &InputTables) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_flights(create(&dir.join("flights.csv"))?, &tables.flights)?;
    write_airports(create(&dir.join("airports.csv"))?, &tables.airports)?;
    write_cities(create(&dir.join("cities.csv"))?, &tables.cities)?;
    write_regions(create(&dir.join("airport_regions.csv"))?, &tables.regions)?;
    if !tables.connections.is_empty() {
        let path = dir.join("connections.csv");
        let mut w = create(&path)?;
        write_rows(
            &mut w,
            CONNECTIONS_HEADER,
            tables.connections.iter().map(|f| {
                vec![
                    f.year.to_string(),
                    f.origin.clone(),
                    f.destination.clone(),
                    f.carrier.clone(),
                    f.passengers.to_string(),
                ]
            }),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label() -> &'static Path {
        Path::new("test.csv")
    }

    fn window() -> YearWindow {
        YearWindow::new(2007, 2018).unwrap()
    }

    #[test]
    fn three_valid_flights() {
        let csv = "year,origin,destination,carrier,passengers\n\
                   2008,vcp,POA,AZU,1200\n2009,VCP,POA,AZU,1500\n2009,POA,VCP,glo,10\n";
        let loaded = read_flights(csv.as_bytes(), label(), window()).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert!(loaded.rejected.is_empty());
        assert_eq!(loaded.records[0].origin, "VCP");
        assert_eq!(loaded.records[2].carrier, "GLO");
    }

    #[test]
    fn origin_equal_destination_names_line() {
        let csv = "year,origin,destination,carrier,passengers\n2008,VCP,POA,AZU,1\n2008,CGH,cgh,AZU,5\n";
        let err = read_flights(csv.as_bytes(), label(), window()).unwrap_err();
        match err {
            Error::Rows { errors, .. } => {
                assert_eq!(errors.len(), 1);
                assert_eq!(errors[0].0, 3);
                assert!(errors[0].1.contains("origin equals destination"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_outside_window_is_rejected_not_fatal() {
        let csv = "year,origin,destination,carrier,passengers\n2021,VCP,POA,AZU,1\n";
        let loaded = read_flights(csv.as_bytes(), label(), window()).unwrap();
        assert_eq!(loaded.records.len(), 0);
        assert_eq!(loaded.rejected.len(), 1);
        assert_eq!(loaded.rejected[0].reason, RejectReason::OutsideWindow { year: 2021 });
        assert_eq!(loaded.rows_read(), 1);
    }

    #[test]
    fn schema_and_numeric_errors() {
        let bad_header = "yr,origin,destination,carrier,passengers\n";
        assert!(matches!(
            read_flights(bad_header.as_bytes(), label(), window()),
            Err(Error::Schema { .. })
        ));
        let short = "year,origin,destination,carrier\n";
        assert!(matches!(read_flights(short.as_bytes(), label(), window()), Err(Error::Schema { .. })));
        let nonnum = "year,origin,destination,carrier,passengers\n2008,A,B,C,many\n";
        let err = read_flights(nonnum.as_bytes(), label(), window()).unwrap_err();
        assert!(err.to_string().contains("passengers"));
        let negative = "year,origin,destination,carrier,passengers\n2008,A,B,C,-4\n";
        assert!(read_flights(negative.as_bytes(), label(), window()).is_err());
    }

    #[test]
    fn duplicate_flight_keys_list_lines() {
        let csv = "year,origin,destination,carrier,passengers\n\
                   2008,A,B,AZU,1\n2008,a,b,azu,2\n2008,A,B,GLO,3\n2008,A,B,AZU,4\n";
        let err = read_flights(csv.as_bytes(), label(), window()).unwrap_err();
        match err {
            Error::Rows { errors, .. } => {
                let lines: Vec<u64> = errors.iter().map(|e| e.0).collect();
                assert_eq!(lines, vec![3, 5]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn airports_validate_coordinates_and_uniqueness() {
        let head = AIRPORTS_HEADER.join(",");
        let ok = format!("{head}\nVCP,-23.0,-47.1,1,0,1,0.2,35.5,\nCGH,-23.6,-46.6,0,1,0,0.4,,0.05\n");
        let a = read_airports(ok.as_bytes(), label()).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].landing_fee, Some(35.5));
        assert_eq!(a[0].national_share, None);
        assert_eq!(a[1].national_share, Some(0.05));

        let bad_lat = format!("{head}\nVCP,-93.0,-47.1,1,0,1,0.2,35.5,\n");
        assert!(read_airports(bad_lat.as_bytes(), label()).is_err());
        let dup = format!("{head}\nVCP,-23,-47,1,0,1,0.2,1,\nvcp,-23,-47,1,0,1,0.2,1,\n");
        let err = read_airports(dup.as_bytes(), label()).unwrap_err();
        assert!(err.to_string().contains("duplicate airport code VCP"));
        let bad_flag = format!("{head}\nVCP,-23,-47,yes,0,1,0.2,1,\n");
        assert!(read_airports(bad_flag.as_bytes(), label()).is_err());
    }

    #[test]
    fn cities_validate_rates() {
        let head = CITIES_HEADER.join(",");
        let ok = format!("{head}\nR1,2008,100000,2500.5,0.12,0.03\n");
        assert_eq!(read_cities(ok.as_bytes(), label()).unwrap().len(), 1);
        let bad = format!("{head}\nR1,2008,100000,2500.5,1.2,0.03\n");
        assert!(read_cities(bad.as_bytes(), label()).is_err());
        let zero_pop = format!("{head}\nR1,2008,0,2500.5,0.1,0.03\n");
        assert!(read_cities(zero_pop.as_bytes(), label()).is_err());
    }

    #[test]
    fn region_map_coverage() {
        let csv = "code,region\nvcp,R1\nPOA,R2\n";
        let m = read_regions(csv.as_bytes(), label()).unwrap();
        assert_eq!(m.region("VCP"), Some("R1"));
        assert!(m.check_covers(["VCP", "POA"]).is_ok());
        let err = m.check_covers(["VCP", "GRU"]).unwrap_err();
        assert!(err.to_string().contains("GRU"));
    }

    #[test]
    fn rater_file_parsing() {
        let csv = "variable,class\nPAX,POS\nSLOT,NEG\n";
        let r = read_rater(csv.as_bytes(), label(), "t").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.get("PAX"), Some(RatingClass::SignificantPositive));

        let bad = "variable,class\nPAX,MAYBE\n";
        let err = read_rater(bad.as_bytes(), label(), "t").unwrap_err();
        assert!(err.to_string().contains("MAYBE"));

        let dup = "variable,class\nPAX,POS\npax,NS\n";
        assert!(read_rater(dup.as_bytes(), label(), "t").is_err());
    }

    #[test]
    fn flights_round_trip() {
        let flights = vec![
            FlightRecord { year: 2008, origin: "A".into(), destination: "B".into(), carrier: "AZU".into(), passengers: 7 },
            FlightRecord { year: 2010, origin: "B".into(), destination: "A".into(), carrier: "GLO".into(), passengers: 0 },
        ];
        let mut buf = Vec::new();
        write_flights(&mut buf, &flights).unwrap();
        let back = read_flights(buf.as_slice(), label(), window()).unwrap();
        assert_eq!(back.records, flights);
    }

    #[test]
    fn year_window_parsing() {
        let w: YearWindow = "2008:2011".parse().unwrap();
        assert_eq!(w.len(), 4);
        assert!(w.contains(2011) && !w.contains(2012));
        assert!("2012:2008".parse::<YearWindow>().is_err());
        assert_eq!("2010".parse::<YearWindow>().unwrap().len(), 1);
    }
}
