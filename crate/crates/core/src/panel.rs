//! Directional airport-pair panel.
//!
//! Pairs are ordered `(origin, destination)`; `(A, B)` and `(B, A)` are
//! separate markets and never share statistics. The panel is balanced: every
//! retained pair appears once in every sample year, with zero traffic when no
//! carrier flew it. Observations are stored pair-major and sorted by
//! `(origin, destination, year)`, so observation `p * T + (year - first)`
//! belongs to pair `p`.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AirportRecord, FlightRecord, YearWindow};

/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MILES: f64 = 3958.7613;

pub const DEFAULT_MIN_MILES: f64 = 100.0;
pub const DEFAULT_MAX_MILES: f64 = 3000.0;

/// Haversine distance in statute miles between two `(lat, lon)` points in
/// degrees.
pub fn great_circle_miles(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirportPair {
    pub origin: String,
    pub destination: String,
    /// Great-circle statute miles.
    pub distance: f64,
}

/// All ordered pairs of distinct airports, sorted by `(origin, destination)`.
pub fn enumerate_pairs(airports: &[AirportRecord]) -> Result<Vec<AirportPair>> {
    if airports.len() < 2 {
        return Err(Error::invalid("at least two airports are required"));
    }
    let mut sorted: Vec<&AirportRecord> = airports.iter().collect();
    sorted.sort_by(|a, b| a.code.cmp(&b.code));
    if let Some(w) = sorted.windows(2).find(|w| w[0].code == w[1].code) {
        return Err(Error::invalid(format!("duplicate airport code {}", w[0].code)));
    }
    let mut pairs = Vec::with_capacity(sorted.len() * (sorted.len() - 1));
    for o in &sorted {
        for d in &sorted {
            if o.code == d.code {
                continue;
            }
            pairs.push(AirportPair {
                origin: o.code.clone(),
                destination: d.code.clone(),
                distance: great_circle_miles((o.latitude, o.longitude), (d.latitude, d.longitude)),
            });
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistanceFilterOutcome {
    pub retained: Vec<AirportPair>,
    pub discarded: Vec<AirportPair>,
}

impl DistanceFilterOutcome {
    pub fn enumerated(&self) -> usize {
        self.retained.len() + self.discarded.len()
    }
}

/// Keeps pairs whose distance lies in the closed interval `[lo, hi]`.
pub fn apply_distance_filter(pairs: Vec<AirportPair>, lo: f64, hi: f64) -> Result<DistanceFilterOutcome> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("distance bounds must satisfy lo < hi ({lo} >= {hi})")));
    }
    let (retained, discarded) = pairs
        .into_iter()
        .partition(|p| p.distance >= lo && p.distance <= hi);
    Ok(DistanceFilterOutcome { retained, discarded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelObservation {
    /// Index into [`Panel::pairs`].
    pub pair: u32,
    pub year: i32,
    /// Entry outcome of the subject carrier.
    pub entry: u8,
    /// Subject carrier carried passengers on the pair this year.
    pub subject_active: bool,
    /// Pair had traffic by any carrier in the base year.
    pub exist: bool,
}

impl PanelObservation {
    pub fn new_flag(&self) -> bool {
        !self.exist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub merger_year: i32,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub airports: usize,
    pub enumerated_pairs: usize,
    pub discarded_pairs: usize,
    pub retained_pairs: usize,
    pub years: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub observations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSizes>,
}

impl PanelMeta {
    /// The counting identities every build must satisfy.
    pub fn check_identities(&self) -> Result<()> {
        if self.retained_pairs + self.discarded_pairs != self.enumerated_pairs {
            return Err(Error::Numerical("retained + discarded != enumerated".into()));
        }
        if self.observations != self.retained_pairs * self.years {
            return Err(Error::Numerical("observations != retained pairs x years".into()));
        }
        if let Some(s) = self.split {
            if s.before + s.after != self.observations {
                return Err(Error::Numerical("split sizes do not sum to the panel".into()));
            }
        }
        Ok(())
    }
}

/// How entry events are read off the subject carrier's activity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRule {
    /// Count a return after at least one full inactive year as a new start.
    pub count_reentry: bool,
}

type Traffic = Vec<(String, u64)>;

#[derive(Debug, Clone)]
pub struct Panel {
    pub pairs: Vec<AirportPair>,
    pub window: YearWindow,
    pub base_year: Option<i32>,
    pub observations: Vec<PanelObservation>,
    pub meta: PanelMeta,
    /// Passengers by carrier for each `(pair, year)` with traffic, carriers
    /// sorted by code.
    traffic: HashMap<(u32, i32), Traffic>,
    base_traffic: HashMap<u32, Traffic>,
    index: HashMap<(String, String), u32>,
}

/// Builds the balanced panel over `filtered.retained` for the years in
/// `window`. Flights dated in `base_year` are kept as base-year traffic;
/// flights on discarded pairs are ignored. Entry and EXIST/NEW flags start
/// cleared; see [`derive_entry`] and [`classify_exist_new`].
pub fn build_balanced_panel(
    known_airports: &BTreeSet<String>,
    filtered: &DistanceFilterOutcome,
    flights: &[FlightRecord],
    window: YearWindow,
    base_year: Option<i32>,
) -> Result<Panel> {
    let mut pairs = filtered.retained.clone();
    pairs.sort_by(|a, b| (&a.origin, &a.destination).cmp(&(&b.origin, &b.destination)));
    let index: HashMap<(String, String), u32> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.origin.clone(), p.destination.clone()), i as u32))
        .collect();

    let unknown: BTreeSet<&str> = flights
        .iter()
        .flat_map(|f| [f.origin.as_str(), f.destination.as_str()])
        .filter(|c| !known_airports.contains(*c))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::invalid(format!(
            "flights reference unknown airports: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    let mut traffic: HashMap<(u32, i32), Traffic> = HashMap::new();
    let mut base_traffic: HashMap<u32, Traffic> = HashMap::new();
    for f in flights {
        let Some(&p) = index.get(&(f.origin.clone(), f.destination.clone())) else {
            continue;
        };
        if window.contains(f.year) {
            traffic.entry((p, f.year)).or_default().push((f.carrier.clone(), f.passengers));
        } else if Some(f.year) == base_year {
            base_traffic.entry(p).or_default().push((f.carrier.clone(), f.passengers));
        }
    }
    for v in traffic.values_mut().chain(base_traffic.values_mut()) {
        v.sort();
    }

    let years = window.len();
    let mut observations = Vec::with_capacity(pairs.len() * years);
    for p in 0..pairs.len() as u32 {
        for year in window.years() {
            observations.push(PanelObservation {
                pair: p,
                year,
                entry: 0,
                subject_active: false,
                exist: false,
            });
        }
    }
    let meta = PanelMeta {
        airports: known_airports.len(),
        enumerated_pairs: filtered.enumerated(),
        discarded_pairs: filtered.discarded.len(),
        retained_pairs: pairs.len(),
        years,
        first_year: window.first,
        last_year: window.last,
        observations: observations.len(),
        split: None,
    };
    meta.check_identities()?;
    Ok(Panel {
        pairs,
        window,
        base_year,
        observations,
        meta,
        traffic,
        base_traffic,
        index,
    })
}

impl Panel {
    pub fn years(&self) -> usize {
        self.window.len()
    }

    pub fn pair_index(&self, origin: &str, destination: &str) -> Option<u32> {
        self.index.get(&(origin.to_string(), destination.to_string())).copied()
    }

    pub fn observation_index(&self, pair: u32, year: i32) -> Option<usize> {
        self.window
            .contains(year)
            .then(|| pair as usize * self.years() + (year - self.window.first) as usize)
    }

    /// Passengers by carrier on `pair` in a sample year.
    pub fn traffic(&self, pair: u32, year: i32) -> &[(String, u64)] {
        self.traffic.get(&(pair, year)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn base_traffic(&self, pair: u32) -> &[(String, u64)] {
        self.base_traffic.get(&pair).map(Vec::as_slice).unwrap_or(&[])
    }

    fn carrier_passengers(list: &[(String, u64)], carrier: &str) -> u64 {
        list.iter().filter(|(c, _)| c == carrier).map(|(_, p)| p).sum()
    }

    pub fn observations_for_pair(&self, pair: u32) -> &[PanelObservation] {
        let t = self.years();
        &self.observations[pair as usize * t..(pair as usize + 1) * t]
    }

    pub fn entry_count(&self) -> usize {
        self.observations.iter().filter(|o| o.entry == 1).count()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["origin", "destination", "year", "distance", "az", "exist"])?;
        for o in &self.observations {
            let p = &self.pairs[o.pair as usize];
            wtr.write_record([
                p.origin.as_str(),
                p.destination.as_str(),
                &o.year.to_string(),
                &p.distance.to_string(),
                &o.entry.to_string(),
                if o.exist { "1" } else { "0" },
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<panel csv>", e))?;
        Ok(())
    }
}

/// Marks entry of `subject` on every pair. Under the default rule the
/// outcome is 1 only in the first sample year with positive passengers, and
/// never when the carrier already flew the pair in the base year.
pub fn derive_entry(panel: &mut Panel, subject: &str, rule: EntryRule) {
    let t = panel.years();
    for p in 0..panel.pairs.len() as u32 {
        let base_active = Panel::carrier_passengers(panel.base_traffic(p), subject) > 0;
        let active: Vec<bool> = panel
            .window
            .years()
            .map(|y| Panel::carrier_passengers(panel.traffic(p, y), subject) > 0)
            .collect();
        let start = p as usize * t;
        let mut entered = base_active;
        let mut prev = base_active;
        for (i, &on) in active.iter().enumerate() {
            let obs = &mut panel.observations[start + i];
            obs.subject_active = on;
            obs.entry = 0;
            if on && !prev && (!entered || rule.count_reentry) {
                obs.entry = 1;
                entered = true;
            }
            prev = on;
        }
    }
}

/// EXIST when any carrier carried passengers on the pair in the base year.
pub fn classify_exist_new(panel: &mut Panel) {
    let t = panel.years();
    for p in 0..panel.pairs.len() as u32 {
        let exist = panel.base_traffic(p).iter().any(|(_, pax)| *pax > 0);
        for obs in &mut panel.observations[p as usize * t..(p as usize + 1) * t] {
            obs.exist = exist;
        }
    }
}

/// Splits into years before `merger_year` and from `merger_year` on.
pub fn split_sample(panel: &Panel, merger_year: i32) -> Result<(Panel, Panel)> {
    let w = panel.window;
    if merger_year <= w.first || merger_year > w.last {
        return Err(Error::invalid(format!(
            "merger year {merger_year} must fall in ({}, {}]; an empty side is not a split",
            w.first, w.last
        )));
    }
    let before = restrict(panel, YearWindow::new(w.first, merger_year - 1)?);
    let after = restrict(panel, YearWindow::new(merger_year, w.last)?);
    Ok((before, after))
}

/// Records the split sizes in the panel's meta block.
pub fn record_split(panel: &mut Panel, merger_year: i32) -> Result<SplitSizes> {
    let (b, a) = split_sample(panel, merger_year)?;
    let sizes = SplitSizes {
        merger_year,
        before: b.observations.len(),
        after: a.observations.len(),
    };
    panel.meta.split = Some(sizes);
    panel.meta.check_identities()?;
    Ok(sizes)
}

/// Settings of a full panel build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelConfig {
    /// Sample years.
    pub window: YearWindow,
    pub base_year: Option<i32>,
    pub subject: String,
    pub min_miles: f64,
    pub max_miles: f64,
    /// Recorded in the meta block when it splits the window.
    pub merger_year: Option<i32>,
    pub entry: EntryRule,
}

impl PanelConfig {
    /// 2008–2018 sample, 2007 base year, split at 2012.
    pub fn new(window: YearWindow) -> Self {
        PanelConfig {
            window,
            base_year: Some(2007),
            subject: "AZU".into(),
            min_miles: DEFAULT_MIN_MILES,
            max_miles: DEFAULT_MAX_MILES,
            merger_year: Some(2012),
            entry: EntryRule::default(),
        }
    }
}

/// Enumerates and filters pairs, builds the balanced panel, derives entry and
/// EXIST/NEW, and records the split when the merger year falls inside the
/// window.
pub fn build_panel(airports: &[AirportRecord], flights: &[FlightRecord], config: &PanelConfig) -> Result<Panel> {
    let known: BTreeSet<String> = airports.iter().map(|a| a.code.clone()).collect();
    let filtered = apply_distance_filter(enumerate_pairs(airports)?, config.min_miles, config.max_miles)?;
    let mut panel = build_balanced_panel(&known, &filtered, flights, config.window, config.base_year)?;
    derive_entry(&mut panel, &config.subject, config.entry);
    classify_exist_new(&mut panel);
    if let Some(m) = config.merger_year {
        if m > config.window.first && m <= config.window.last {
            record_split(&mut panel, m)?;
        }
    }
    Ok(panel)
}

fn restrict(panel: &Panel, window: YearWindow) -> Panel {
    let observations: Vec<PanelObservation> = panel
        .observations
        .iter()
        .filter(|o| window.contains(o.year))
        .copied()
        .collect();
    let traffic = panel
        .traffic
        .iter()
        .filter(|((_, y), _)| window.contains(*y))
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    let meta = PanelMeta {
        years: window.len(),
        first_year: window.first,
        last_year: window.last,
        observations: observations.len(),
        split: None,
        ..panel.meta.clone()
    };
    Panel {
        pairs: panel.pairs.clone(),
        window,
        base_year: panel.base_year,
        observations,
        meta,
        traffic,
        base_traffic: panel.base_traffic.clone(),
        index: panel.index.clone(),
    }
}
