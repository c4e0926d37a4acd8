//! Synthetic datasets with known ground truth.
//!
//! Every generator expands one seed into named ChaCha8 streams, so adding a
//! regressor or a year never shifts the draws of another component.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::covariates::{DesignMatrix, INTERCEPT};
use crate::error::{Error, Result};
use crate::estimators::normal::norm_cdf;
use crate::ingest::{
    write_input_dir, AirportRecord, AirportRegionMap, CityAttributeRecord, FlightRecord, InputTables,
};
use crate::panel::{apply_distance_filter, enumerate_pairs, DEFAULT_MAX_MILES, DEFAULT_MIN_MILES, EARTH_RADIUS_MILES};

const STREAM_DESIGN: u64 = 1 << 32;
const STREAM_NOISE: u64 = 2;
const STREAM_GROUPS: u64 = 3;
const STREAM_ATTRIBUTES: u64 = 4;
const STREAM_TRAFFIC: u64 = 5;
const STREAM_ENTRY: u64 = 6;
const STREAM_CITIES: u64 = 7;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthLink {
    Probit,
    Logit,
}

impl SynthLink {
    pub fn cdf(self, eta: f64) -> f64 {
        match self {
            SynthLink::Probit => norm_cdf(eta),
            SynthLink::Logit => 1.0 / (1.0 + (-eta).exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    /// Slopes; the regressor count is their length.
    pub beta: Vec<f64>,
    pub link: SynthLink,
    /// Index offset; sets how rare the event is.
    pub intercept: f64,
    /// Random-intercept groups; 0 for none.
    pub groups: usize,
    pub group_sd: f64,
    /// The last `dummies` regressors are Bernoulli(½) instead of N(0, 1).
    pub dummies: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(n: usize, beta: Vec<f64>, link: SynthLink, seed: u64) -> Self {
        SynthConfig {
            n,
            beta,
            link,
            intercept: 0.0,
            groups: 0,
            group_sd: 0.0,
            dummies: 0,
            seed,
        }
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::invalid("synthetic design needs at least one regressor"));
        }
        if self.n <= k + 1 {
            return Err(Error::invalid(format!("n = {} must exceed the parameter count {}", self.n, k + 1)));
        }
        if self.beta.iter().chain([&self.intercept, &self.group_sd]).any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficients and group SD must be finite"));
        }
        if self.group_sd < 0.0 {
            return Err(Error::invalid("group SD must be nonnegative"));
        }
        if self.group_sd > 0.0 && self.groups == 0 {
            return Err(Error::invalid("a group SD needs groups > 0"));
        }
        if self.dummies > k {
            return Err(Error::invalid("more dummies than regressors"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub config: SynthConfig,
    /// Coefficient names, intercept first.
    pub names: Vec<String>,
    /// True coefficients aligned with `names`.
    pub beta: Vec<f64>,
    pub positives: usize,
    pub positive_rate: f64,
    /// Σ F(ηᵢ), the expected positive count given the draws of X and u.
    pub expected_positives: f64,
    /// Group of each row; empty without groups.
    pub group_of: Vec<u32>,
    pub group_effects: Vec<f64>,
}

impl SynthTruth {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Draws `(X, y)` from the configured link. The design carries an intercept
/// column; clusters and groups are the groups when present, the rows
/// otherwise.
pub fn generate(config: &SynthConfig) -> Result<(DesignMatrix, SynthTruth)> {
    config.validate()?;
    let (n, k) = (config.n, config.k());
    let columns: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut rng = stream(config.seed, STREAM_DESIGN + j as u64);
            if j >= k - config.dummies {
                (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect()
            } else {
                (0..n).map(|_| normal(&mut rng)).collect()
            }
        })
        .collect();

    let (group_of, group_effects) = if config.groups > 0 {
        let mut rng = stream(config.seed, STREAM_GROUPS);
        let effects: Vec<f64> = (0..config.groups).map(|_| config.group_sd * normal(&mut rng)).collect();
        let of: Vec<u32> = (0..n).map(|_| rng.random_range(0..config.groups as u32)).collect();
        (of, effects)
    } else {
        (Vec::new(), Vec::new())
    };

    let mut noise = stream(config.seed, STREAM_NOISE);
    let mut x = Vec::with_capacity(n * (k + 1));
    let mut y = Vec::with_capacity(n);
    let mut expected = 0.0;
    for i in 0..n {
        x.push(1.0);
        let mut eta = config.intercept;
        for (j, col) in columns.iter().enumerate() {
            x.push(col[i]);
            eta += config.beta[j] * col[i];
        }
        if let Some(&g) = group_of.get(i) {
            eta += group_effects[g as usize];
        }
        let p = config.link.cdf(eta);
        expected += p;
        y.push(f64::from(u8::from(noise.random::<f64>() < p)));
    }
    let positives = y.iter().filter(|v| **v == 1.0).count();
    if positives == 0 || positives == n {
        return Err(Error::invalid(format!(
            "synthetic outcome has no variation ({positives} positives in {n}); move the intercept"
        )));
    }
    let mut names = vec![INTERCEPT.to_string()];
    names.extend((1..=k).map(|j| format!("X{j}")));
    let clusters: Vec<u32> = if group_of.is_empty() {
        (0..n as u32).collect()
    } else {
        group_of.clone()
    };
    let design = DesignMatrix::new(names.clone(), x, y, clusters)?;
    let mut beta = vec![config.intercept];
    beta.extend(&config.beta);
    let truth = SynthTruth {
        config: config.clone(),
        names,
        beta,
        positives,
        positive_rate: positives as f64 / n as f64,
        expected_positives: expected,
        group_of,
        group_effects,
    };
    Ok((design, truth))
}

/// Shape of a synthetic airport network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelFixtureConfig {
    pub airports: usize,
    /// Directional pairs closer than 100 miles; must be even.
    pub out_of_range_pairs: usize,
    pub years: usize,
    pub first_year: i32,
    pub seed: u64,
}

impl PanelFixtureConfig {
    pub fn new(seed: u64) -> Self {
        PanelFixtureConfig {
            airports: 312,
            out_of_range_pairs: 1334,
            years: 11,
            first_year: 2008,
            seed,
        }
    }

    pub fn base_year(&self) -> i32 {
        self.first_year - 1
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.years as i32 - 1
    }
}

/// Coefficients of the entry process behind the fixture's subject flights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryProcess {
    pub intercept: f64,
    pub hub: f64,
    pub log_base_passengers: f64,
    pub distance_thousands: f64,
    pub network: f64,
    pub log_size: f64,
    /// Yearly probability of staying on a route once entered.
    pub retention: f64,
}

const ENTRY: EntryProcess = EntryProcess {
    intercept: -3.7,
    hub: 1.1,
    log_base_passengers: 0.06,
    distance_thousands: -0.35,
    network: 0.45,
    log_size: 0.22,
    retention: 0.93,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureTruth {
    pub config: PanelFixtureConfig,
    pub subject: String,
    pub base_year: i32,
    pub enumerated_pairs: usize,
    pub retained_pairs: usize,
    pub observations: usize,
    /// Airport groups whose members lie within 100 miles of each other.
    pub close_groups: Vec<Vec<String>>,
    pub subject_hubs: Vec<String>,
    pub entry_process: EntryProcess,
    /// Route starts of the subject carrier, counted per directional pair.
    pub subject_entries: usize,
}

#[derive(Debug, Clone)]
pub struct PanelFixture {
    pub tables: InputTables,
    pub truth: FixtureTruth,
}

impl PanelFixture {
    /// Writes the ingest tables and `truth.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_input_dir(dir, &self.tables)?;
        let path = dir.join("truth.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.truth)? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Hex-lattice spacing between ordinary airports.
const SPACING: f64 = 150.0;
/// Spacing inside a close group.
const CLOSE_SPACING: f64 = 10.0;
/// Largest close group; its radius stays under a quarter of the 100-mile
/// floor.
const MAX_GROUP: usize = 61;
const CENTER: (f64, f64) = (-14.0, -50.0);

/// Hex lattice points sorted by distance from the origin, ties by angle.
fn hex_sites(count: usize, spacing: f64) -> Vec<(f64, f64)> {
    let mut rings = 0i64;
    while ((1 + 3 * rings * (rings + 1)) as usize) < count * 2 + 8 {
        rings += 1;
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for q in -rings..=rings {
        for r in (-rings).max(-q - rings)..=rings.min(-q + rings) {
            let x = spacing * (q as f64 + r as f64 / 2.0);
            let y = spacing * (r as f64 * 3f64.sqrt() / 2.0);
            pts.push((x, y));
        }
    }
    pts.sort_by(|a, b| {
        let da = a.0.hypot(a.1);
        let db = b.0.hypot(b.1);
        (da.round() as i64, a.1.atan2(a.0).to_bits()).cmp(&(db.round() as i64, b.1.atan2(b.0).to_bits()))
    });
    pts.truncate(count);
    pts
}

/// Inverse azimuthal-equidistant projection about [`CENTER`]: planar miles
/// east/north to `(lat, lon)` degrees.
fn unproject(x: f64, y: f64) -> (f64, f64) {
    let (lat0, lon0) = (CENTER.0.to_radians(), CENTER.1.to_radians());
    let c = x.hypot(y) / EARTH_RADIUS_MILES;
    let az = x.atan2(y);
    let lat = (lat0.sin() * c.cos() + lat0.cos() * c.sin() * az.cos()).asin();
    let lon = lon0 + (az.sin() * c.sin() * lat0.cos()).atan2(c.cos() - lat0.sin() * lat.sin());
    (lat.to_degrees(), lon.to_degrees())
}

/// Group sizes whose pair counts c(c−1)/2 add up to `pairs`.
fn close_group_sizes(mut pairs: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    while pairs > 0 {
        let mut c = 2;
        while c < MAX_GROUP && (c + 1) * c / 2 <= pairs {
            c += 1;
        }
        sizes.push(c);
        pairs -= c * (c - 1) / 2;
    }
    sizes
}

fn airport_code(i: usize) -> String {
    let b = |v: usize| (b'A' + (v % 26) as u8) as char;
    [b(i / 676), b(i / 26), b(i)].iter().collect()
}

/// Planar layout: close groups on widely spaced lattice sites, all other
/// airports one per site.
fn layout(config: &PanelFixtureConfig) -> Result<(Vec<(f64, f64)>, Vec<Vec<usize>>)> {
    if config.out_of_range_pairs % 2 != 0 {
        return Err(Error::invalid("out-of-range pairs come in directional couples; the count must be even"));
    }
    let sizes = close_group_sizes(config.out_of_range_pairs / 2);
    let grouped: usize = sizes.iter().sum();
    if grouped > config.airports {
        return Err(Error::invalid(format!(
            "{} close pairs need {grouped} airports but only {} were requested",
            config.out_of_range_pairs, config.airports
        )));
    }
    let singles = config.airports - grouped;
    let sites = hex_sites(singles + sizes.len(), SPACING);
    let mut group_sites: Vec<usize> = Vec::new();
    for (i, s) in sites.iter().enumerate() {
        if group_sites.len() == sizes.len() {
            break;
        }
        if group_sites.iter().all(|&g| (sites[g].0 - s.0).hypot(sites[g].1 - s.1) > 2.5 * SPACING) {
            group_sites.push(i);
        }
    }
    if group_sites.len() < sizes.len() {
        return Err(Error::invalid("too few lattice sites to keep close groups apart"));
    }
    let mut points = Vec::with_capacity(config.airports);
    let mut groups = Vec::new();
    for (&site, &size) in group_sites.iter().zip(&sizes) {
        let start = points.len();
        for (dx, dy) in hex_sites(size, CLOSE_SPACING) {
            points.push((sites[site].0 + dx, sites[site].1 + dy));
        }
        groups.push((start..points.len()).collect());
    }
    for (i, s) in sites.iter().enumerate() {
        if !group_sites.contains(&i) {
            points.push(*s);
        }
    }
    Ok((points, groups))
}

const INCUMBENTS: [(&str, f64); 7] = [
    ("TAM", 0.30),
    ("GLO", 0.28),
    ("ONE", 0.10),
    ("WEB", 0.08),
    ("PTB", 0.09),
    ("TTL", 0.08),
    ("BRB", 0.07),
];

fn pick_carrier(rng: &mut ChaCha8Rng, taken: &[&str]) -> &'static str {
    loop {
        let mut u = rng.random::<f64>();
        for (c, w) in INCUMBENTS {
            if u < w {
                if !taken.contains(&c) {
                    return c;
                }
                break;
            }
            u -= w;
        }
    }
}

/// An ingest-ready airport network whose panel arithmetic is known exactly:
/// `airports·(airports−1)` enumerated pairs, `out_of_range_pairs` of them
/// under 100 miles, every other pair within 3,000 miles.
pub fn make_panel_fixture(config: &PanelFixtureConfig) -> Result<PanelFixture> {
    if config.airports < 2 || config.years == 0 {
        return Err(Error::invalid("a panel fixture needs at least two airports and one year"));
    }
    if config.airports > 26 * 26 * 26 {
        return Err(Error::invalid("at most 17,576 airports have three-letter codes"));
    }
    let (points, groups) = layout(config)?;
    let n = points.len();
    let codes: Vec<String> = (0..n).map(airport_code).collect();
    let coords: Vec<(f64, f64)> = points.iter().map(|&(x, y)| unproject(x, y)).collect();

    let mut attr = stream(config.seed, STREAM_ATTRIBUTES);
    let size: Vec<f64> = (0..n).map(|_| (1.1 * normal(&mut attr)).exp()).collect();
    let mut by_size: Vec<usize> = (0..n).collect();
    by_size.sort_by(|a, b| size[*b].total_cmp(&size[*a]).then(a.cmp(b)));
    let rank: Vec<usize> = {
        let mut r = vec![0; n];
        for (pos, &a) in by_size.iter().enumerate() {
            r[a] = pos;
        }
        r
    };
    let airports: Vec<AirportRecord> = (0..n)
        .map(|a| {
            let secondary = attr.random::<f64>() < 0.08;
            let rival = if rank[a] < 12 { 0.05 + 0.4 * attr.random::<f64>() } else { 0.0 };
            let fee = 5.0 + 20.0 * attr.random::<f64>();
            AirportRecord {
                code: codes[a].clone(),
                latitude: coords[a].0,
                longitude: coords[a].1,
                secondary,
                slot: rank[a] < 4,
                subject_hub: (1..4).contains(&rank[a]),
                rival_connecting_share: rival,
                landing_fee: Some(fee),
                national_share: None,
            }
        })
        .collect();

    let filtered = apply_distance_filter(enumerate_pairs(&airports)?, DEFAULT_MIN_MILES, DEFAULT_MAX_MILES)?;
    if filtered.discarded.len() != config.out_of_range_pairs
        || filtered.discarded.iter().any(|p| p.distance >= DEFAULT_MIN_MILES)
    {
        return Err(Error::invalid(format!(
            "infeasible layout: {} airports cannot hold {} out-of-range pairs within {} miles ({} discarded)",
            config.airports,
            config.out_of_range_pairs,
            DEFAULT_MAX_MILES,
            filtered.discarded.len()
        )));
    }

    let base = config.base_year();
    let years: Vec<i32> = (base..=config.last_year()).collect();
    let index: std::collections::HashMap<&str, usize> = codes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut undirected: Vec<(usize, usize, f64)> = filtered
        .retained
        .iter()
        .map(|p| (index[p.origin.as_str()], index[p.destination.as_str()], p.distance))
        .filter(|(o, d, _)| o < d)
        .collect();
    undirected.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    // Incumbent traffic.
    let mut traffic = stream(config.seed, STREAM_TRAFFIC);
    let mut flights = Vec::new();
    let mut connections = Vec::new();
    let mut base_pax = vec![0u64; undirected.len()];
    for (u, &(o, d, dist)) in undirected.iter().enumerate() {
        let g = size[o] * size[d];
        let serve = (0.05 * g * (dist / 500.0).powf(-0.5)).min(0.9);
        if traffic.random::<f64>() >= serve {
            continue;
        }
        let start = if traffic.random::<f64>() < 0.75 { 0 } else { traffic.random_range(1..years.len()) };
        let mut carriers = vec![pick_carrier(&mut traffic, &[])];
        for extra in [0.4, 0.15] {
            if traffic.random::<f64>() < extra {
                let c = pick_carrier(&mut traffic, &carriers);
                carriers.push(c);
            }
        }
        let level = 4000.0 * g.sqrt();
        for (t, &year) in years.iter().enumerate().skip(start) {
            for &c in &carriers {
                for (a, b) in [(o, d), (d, o)] {
                    let pax = (level * 1.04f64.powi(t as i32) * (0.3 * normal(&mut traffic)).exp()).round() as u64 + 1;
                    if year == base {
                        base_pax[u] += pax;
                    }
                    flights.push(FlightRecord {
                        year,
                        origin: codes[a].clone(),
                        destination: codes[b].clone(),
                        carrier: c.to_string(),
                        passengers: pax,
                    });
                    connections.push(FlightRecord {
                        year,
                        origin: codes[a].clone(),
                        destination: codes[b].clone(),
                        carrier: c.to_string(),
                        passengers: (pax as f64 * (0.1 + 0.2 * traffic.random::<f64>())).round() as u64,
                    });
                }
            }
        }
    }

    // Subject entry, decided per undirected pair and flown both ways.
    let mut entry = stream(config.seed, STREAM_ENTRY);
    let e = &ENTRY;
    let mut active = vec![false; undirected.len()];
    let mut entered = vec![false; undirected.len()];
    let mut subject_entries = 0;
    for (t, &year) in years.iter().enumerate().skip(1) {
        let mut at_airport = vec![false; n];
        for (u, &(o, d, _)) in undirected.iter().enumerate() {
            if active[u] {
                at_airport[o] = true;
                at_airport[d] = true;
            }
        }
        for (u, &(o, d, dist)) in undirected.iter().enumerate() {
            let draw = entry.random::<f64>();
            if active[u] {
                active[u] = draw < e.retention;
            } else if !entered[u] {
                let eta = e.intercept
                    + e.hub * f64::from(u8::from(airports[o].subject_hub || airports[d].subject_hub))
                    + e.log_base_passengers * (1.0 + base_pax[u] as f64).ln()
                    + e.distance_thousands * dist / 1000.0
                    + e.network * f64::from(u8::from(at_airport[o] || at_airport[d]))
                    + e.log_size * (size[o] * size[d]).ln();
                if draw < norm_cdf(eta) {
                    active[u] = true;
                    entered[u] = true;
                    subject_entries += 2;
                }
            }
            if active[u] {
                let level = 2500.0 * (size[o] * size[d]).sqrt() * 1.05f64.powi(t as i32);
                for (a, b) in [(o, d), (d, o)] {
                    let pax = (level * (0.3 * normal(&mut entry)).exp()).round() as u64 + 1;
                    flights.push(FlightRecord {
                        year,
                        origin: codes[a].clone(),
                        destination: codes[b].clone(),
                        carrier: "AZU".into(),
                        passengers: pax,
                    });
                    connections.push(FlightRecord {
                        year,
                        origin: codes[a].clone(),
                        destination: codes[b].clone(),
                        carrier: "AZU".into(),
                        passengers: (pax as f64 * (0.15 + 0.3 * entry.random::<f64>())).round() as u64,
                    });
                }
            }
        }
    }
    flights.sort_by(|a, b| (a.year, &a.origin, &a.destination, &a.carrier).cmp(&(b.year, &b.origin, &b.destination, &b.carrier)));
    connections.sort_by(|a, b| (a.year, &a.origin, &a.destination, &a.carrier).cmp(&(b.year, &b.origin, &b.destination, &b.carrier)));

    let mut city = stream(config.seed, STREAM_CITIES);
    let mut cities = Vec::with_capacity(n * years.len());
    let mut regions = std::collections::BTreeMap::new();
    for a in 0..n {
        let region = format!("R{a:04}");
        regions.insert(codes[a].clone(), region.clone());
        let pop0 = 8.0e4 * size[a] * (0.3 * normal(&mut city)).exp();
        let inc0 = 1500.0 * (0.3 * normal(&mut city)).exp();
        let unempl0 = 0.04 + 0.06 * city.random::<f64>();
        let vac = 0.02 + 0.2 * city.random::<f64>();
        for (t, &year) in years.iter().enumerate() {
            let t = t as i32;
            cities.push(CityAttributeRecord {
                region: region.clone(),
                year,
                population: (pop0 * 1.01f64.powi(t)).round().max(1.0),
                income: inc0 * 1.02f64.powi(t),
                unemployment: unempl0 * (0.1 * normal(&mut city)).exp(),
                vacation: vac,
            });
        }
    }

    let retained = filtered.retained.len();
    let truth = FixtureTruth {
        config: config.clone(),
        subject: "AZU".into(),
        base_year: base,
        enumerated_pairs: filtered.enumerated(),
        retained_pairs: retained,
        observations: retained * config.years,
        close_groups: groups.iter().map(|g| g.iter().map(|&a| codes[a].clone()).collect()).collect(),
        subject_hubs: (0..n).filter(|&a| airports[a].subject_hub).map(|a| codes[a].clone()).collect(),
        entry_process: ENTRY,
        subject_entries,
    };
    Ok(PanelFixture {
        tables: InputTables {
            flights,
            airports,
            cities,
            regions: AirportRegionMap::new(regions),
            connections,
            flight_rejects: 0,
        },
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_group_decomposition() {
        assert_eq!(close_group_sizes(667), vec![37, 2]);
        assert!(close_group_sizes(0).is_empty());
        for m in 1..400 {
            let s = close_group_sizes(m);
            assert_eq!(s.iter().map(|c| c * (c - 1) / 2).sum::<usize>(), m);
        }
    }

    #[test]
    fn codes_are_distinct() {
        let codes: std::collections::BTreeSet<String> = (0..2000).map(airport_code).collect();
        assert_eq!(codes.len(), 2000);
        assert_eq!(airport_code(0), "AAA");
        assert_eq!(airport_code(27), "ABB");
    }

    #[test]
    fn projection_preserves_radial_distance() {
        let (lat, lon) = unproject(0.0, 1000.0);
        let d = crate::panel::great_circle_miles(CENTER, (lat, lon));
        assert!((d - 1000.0).abs() < 1e-6);
        assert!(lat > CENTER.0);
    }

    #[test]
    fn rare_logit_rate() {
        let mut c = SynthConfig::new(5000, vec![0.5, -0.5], SynthLink::Logit, 3);
        c.intercept = -3.0;
        let (d, t) = generate(&c).unwrap();
        assert_eq!(d.positives(), t.positives);
        assert!(t.positive_rate > 0.03 && t.positive_rate < 0.10);
    }

    #[test]
    fn degenerate_configs() {
        assert!(generate(&SynthConfig::new(3, vec![1.0, 2.0], SynthLink::Probit, 1)).is_err());
        let mut c = SynthConfig::new(100, vec![0.0], SynthLink::Probit, 1);
        c.intercept = -40.0;
        assert!(generate(&c).is_err());
        let mut c = SynthConfig::new(100, vec![0.0], SynthLink::Probit, 1);
        c.group_sd = 1.0;
        assert!(generate(&c).is_err());
    }
}
