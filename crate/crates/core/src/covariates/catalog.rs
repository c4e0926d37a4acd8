use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{
    concentration_flags, distance_buckets, freeze_base_year, geometric_mean, hhi_of_counts, network_economies,
    CarrierRoles, CovariateOptions, EndpointTraffic, FrozenPairValues, HubOthMode, NetworkCounts, Variable,
};
use crate::error::{Error, Result};
use crate::ingest::InputTables;
use crate::panel::Panel;

/// Identity of one catalog row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowInfo {
    pub pair: u32,
    pub year: i32,
    pub entry: u8,
    pub exist: bool,
}

/// Anything that can serve regressor values row by row. Rows are pair-major
/// and sorted by year within a pair.
pub trait CovariateSource: Sync {
    fn rows(&self) -> usize;
    fn first_year(&self) -> i32;
    fn row(&self, i: usize) -> RowInfo;
    fn pair_label(&self, pair: u32) -> (&str, &str);
    fn has(&self, var: Variable) -> bool;
    fn value(&self, var: Variable, i: usize) -> f64;

    /// Values of `var` on the given rows, in order.
    fn column(&self, var: Variable, rows: &[usize]) -> Vec<f64> {
        rows.par_iter().map(|&i| self.value(var, i)).collect()
    }
}

#[derive(Debug, Clone)]
struct PairStatic {
    origin: usize,
    destination: usize,
    distance: f64,
    buckets: [bool; 5],
    frozen: FrozenPairValues,
    max_hhi: f64,
    min_hhi: f64,
    secnd: bool,
    slot: bool,
    hub: bool,
    huboth: f64,
    nonhub: bool,
    big: bool,
    medsma: bool,
    fee: f64,
    exist: bool,
}

#[derive(Debug, Clone, Copy)]
struct CityValues {
    population: f64,
    income: f64,
    unemployment: f64,
    vacation: f64,
}

const NO_CITY: CityValues = CityValues {
    population: f64::NAN,
    income: f64::NAN,
    unemployment: f64::NAN,
    vacation: f64::NAN,
};

/// Every regressor for every panel row, computed on demand from per-pair
/// and per-airport-year tables.
pub struct CovariateCatalog<'a> {
    panel: &'a Panel,
    options: CovariateOptions,
    pairs: Vec<PairStatic>,
    /// Indexed `airport * years + (year - first)`.
    cities: Vec<CityValues>,
    /// Subject network of the previous year, same indexing as `cities`.
    network: Vec<NetworkCounts>,
    azshcon: HashMap<(u32, i32), f64>,
    bankrupt: Vec<String>,
    bankruptcy_year: i32,
    notes: Vec<String>,
}

impl<'a> CovariateCatalog<'a> {
    /// `tables.flights` must include the base year. The panel must already
    /// carry entry and EXIST flags.
    pub fn build(
        panel: &'a Panel,
        tables: &InputTables,
        roles: &CarrierRoles,
        options: &CovariateOptions,
    ) -> Result<Self> {
        let roles = roles.normalized();
        let base_year = panel
            .base_year
            .ok_or_else(|| Error::invalid("covariates need a base year"))?;
        let years = panel.years();

        let mut codes: Vec<&str> = tables.airports.iter().map(|a| a.code.as_str()).collect();
        codes.sort_unstable();
        let index: HashMap<&str, usize> = codes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let records: Vec<_> = codes
            .iter()
            .map(|c| tables.airports.iter().find(|a| a.code == *c).expect("code from list"))
            .collect();
        let airport = |code: &str| -> Result<usize> {
            index
                .get(code)
                .copied()
                .ok_or_else(|| Error::invalid(format!("unknown airport {code}")))
        };

        // Base-year airport traffic.
        let mut airport_pax = vec![0u64; codes.len()];
        let mut by_carrier: BTreeMap<(usize, &str), u64> = BTreeMap::new();
        for f in tables.flights.iter().filter(|f| f.year == base_year) {
            for code in [&f.origin, &f.destination] {
                let a = airport(code)?;
                airport_pax[a] += f.passengers;
                *by_carrier.entry((a, f.carrier.as_str())).or_default() += f.passengers;
            }
        }
        let national: u64 = airport_pax.iter().sum();
        let mut carrier_counts: Vec<Vec<u64>> = vec![Vec::new(); codes.len()];
        for ((a, _), p) in by_carrier {
            carrier_counts[a].push(p);
        }
        let airport_hhi: Vec<f64> = carrier_counts.iter().map(|c| hhi_of_counts(c.iter().copied())).collect();
        let mut share = Vec::with_capacity(codes.len());
        for (a, rec) in records.iter().enumerate() {
            share.push(match rec.national_share {
                Some(s) => s,
                None if national == 0 => {
                    return Err(Error::invalid(format!(
                        "zero national passenger total in base year {base_year}; supply natl_pax_share"
                    )))
                }
                None => airport_pax[a] as f64 / national as f64,
            });
        }
        let endpoint = |a: usize| EndpointTraffic {
            passengers: airport_pax[a] as f64,
            national_share: share[a],
            hhi: airport_hhi[a],
        };
        let is_big = |a: usize| airport_pax[a] as f64 >= options.big_passengers;

        // City attributes for every airport on a retained pair.
        let used: BTreeSet<usize> = panel
            .pairs
            .iter()
            .flat_map(|p| [index[p.origin.as_str()], index[p.destination.as_str()]])
            .collect();
        let city_rows: HashMap<(&str, i32), _> =
            tables.cities.iter().map(|c| ((c.region.as_str(), c.year), c)).collect();
        let mut cities = vec![NO_CITY; codes.len() * years];
        let mut missing = Vec::new();
        for &a in &used {
            let Some(region) = tables.regions.region(codes[a]) else {
                missing.push(format!("airport {} has no region", codes[a]));
                continue;
            };
            for (t, year) in panel.window.years().enumerate() {
                match city_rows.get(&(region, year)) {
                    Some(c) => {
                        if c.unemployment <= 0.0 || c.vacation <= 0.0 {
                            return Err(Error::invalid(format!(
                                "region {region} year {year}: unemployment and vacation must be positive for geometric means"
                            )));
                        }
                        cities[a * years + t] = CityValues {
                            population: c.population,
                            income: c.income,
                            unemployment: c.unemployment,
                            vacation: c.vacation,
                        };
                    }
                    None => missing.push(format!("region {region} year {year} (airport {})", codes[a])),
                }
            }
        }
        if !missing.is_empty() {
            let shown = missing.iter().take(20).cloned().collect::<Vec<_>>().join("; ");
            return Err(Error::invalid(format!(
                "missing city attributes for {} region-years: {shown}",
                missing.len()
            )));
        }

        // Subject network, lagged one year.
        let mut routes_by_year: BTreeMap<i32, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for f in tables.flights.iter().filter(|f| f.carrier == roles.subject && f.passengers > 0) {
            routes_by_year
                .entry(f.year)
                .or_default()
                .insert((airport(&f.origin)?, airport(&f.destination)?));
        }
        let mut network = vec![NetworkCounts::default(); codes.len() * years];
        for (t, year) in panel.window.years().enumerate() {
            let Some(routes) = routes_by_year.get(&(year - 1)) else {
                continue;
            };
            let mut linked: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); codes.len()];
            let mut count = vec![0u32; codes.len()];
            for &(o, d) in routes {
                count[o] += 1;
                count[d] += 1;
                linked[o].insert(d);
                linked[d].insert(o);
            }
            for a in 0..codes.len() {
                network[a * years + t] = NetworkCounts {
                    routes: count[a],
                    served: linked[a].len() as u32,
                };
            }
        }

        // Subject share of connecting passengers.
        let mut conn: BTreeMap<(u32, i32), (u64, u64)> = BTreeMap::new();
        for c in &tables.connections {
            if !panel.window.contains(c.year) {
                continue;
            }
            if let Some(p) = panel.pair_index(&c.origin, &c.destination) {
                let e = conn.entry((p, c.year)).or_default();
                e.1 += c.passengers;
                if c.carrier == roles.subject {
                    e.0 += c.passengers;
                }
            }
        }
        let azshcon = conn
            .into_iter()
            .filter(|(_, (s, t))| *s > 0 && *t > 0)
            .map(|(k, (s, t))| (k, s as f64 / t as f64))
            .collect();

        let mut pairs = Vec::with_capacity(panel.pairs.len());
        for (p, pair) in panel.pairs.iter().enumerate() {
            let o = index[pair.origin.as_str()];
            let d = index[pair.destination.as_str()];
            let flags = concentration_flags(endpoint(o), endpoint(d), options)?;
            let fee = if is_big(o) || is_big(d) {
                match (records[o].landing_fee, records[d].landing_fee) {
                    (Some(a), Some(b)) => geometric_mean(a, b)
                        .map_err(|_| {
                            Error::invalid(format!(
                                "landing fees on {}-{} must be positive",
                                pair.origin, pair.destination
                            ))
                        })?
                        .ln(),
                    _ => {
                        return Err(Error::invalid(format!(
                            "pair {}-{} touches a major hub but a landing fee is missing",
                            pair.origin, pair.destination
                        )))
                    }
                }
            } else {
                0.0
            };
            let rival = records[o].rival_connecting_share.max(records[d].rival_connecting_share);
            pairs.push(PairStatic {
                origin: o,
                destination: d,
                distance: pair.distance,
                buckets: distance_buckets(pair.distance)?,
                frozen: freeze_base_year(panel.base_traffic(p as u32), &roles),
                max_hhi: airport_hhi[o].max(airport_hhi[d]),
                min_hhi: airport_hhi[o].min(airport_hhi[d]),
                secnd: records[o].secondary || records[d].secondary,
                slot: records[o].slot || records[d].slot,
                hub: records[o].subject_hub || records[d].subject_hub,
                huboth: match options.huboth {
                    HubOthMode::Continuous => rival,
                    HubOthMode::Dummy => f64::from(u8::from(rival > options.huboth_threshold)),
                },
                nonhub: flags.nonhub,
                big: flags.big,
                medsma: flags.medsma,
                fee,
                exist: panel.observations_for_pair(p as u32).first().is_some_and(|o| o.exist),
            });
        }

        let notes = vec![
            format!(
                "FEE is the log geometric-mean landing fee on routes with an endpoint of at least {} base-year passengers and 0 elsewhere",
                options.big_passengers
            ),
            match options.huboth {
                HubOthMode::Continuous => "HUBOTH is the maximum rival connecting-passenger share over the endpoints".into(),
                HubOthMode::Dummy => format!(
                    "HUBOTH is 1 when the maximum rival connecting-passenger share exceeds {}",
                    options.huboth_threshold
                ),
            },
            "NETWEC, MAXAZCIT, MINAZCIT and ZERAZCIT use the subject network of the previous year".into(),
            "PAX, HHI, MAXHHI, MINHHI, FSCMAJ, LCCMAJ, LCCCOMP and REGSMA are fixed at the base year".into(),
        ];

        Ok(CovariateCatalog {
            panel,
            options: options.clone(),
            pairs,
            cities,
            network,
            azshcon,
            bankrupt: roles.bankrupt.clone(),
            bankruptcy_year: roles.bankruptcy_year,
            notes,
        })
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn options(&self) -> &CovariateOptions {
        &self.options
    }

    pub fn panel(&self) -> &Panel {
        self.panel
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl CovariateSource for CovariateCatalog<'_> {
    fn rows(&self) -> usize {
        self.panel.observations.len()
    }

    fn first_year(&self) -> i32 {
        self.panel.window.first
    }

    fn row(&self, i: usize) -> RowInfo {
        let o = &self.panel.observations[i];
        RowInfo {
            pair: o.pair,
            year: o.year,
            entry: o.entry,
            exist: o.exist,
        }
    }

    fn pair_label(&self, pair: u32) -> (&str, &str) {
        let p = &self.panel.pairs[pair as usize];
        (&p.origin, &p.destination)
    }

    fn has(&self, _var: Variable) -> bool {
        true
    }

    fn value(&self, var: Variable, i: usize) -> f64 {
        use Variable::*;
        if let Some((a, b)) = var.factors() {
            return self.value(a, i) * self.value(b, i);
        }
        let obs = &self.panel.observations[i];
        let ps = &self.pairs[obs.pair as usize];
        let years = self.panel.years();
        let t = (obs.year - self.panel.window.first) as usize;
        let co = &self.cities[ps.origin * years + t];
        let cd = &self.cities[ps.destination * years + t];
        let net = || {
            network_economies(
                self.network[ps.origin * years + t],
                self.network[ps.destination * years + t],
            )
        };
        // City values were validated positive at build time.
        let gm = |a: f64, b: f64| geometric_mean(a, b).unwrap_or(f64::NAN);
        match var {
            Pax => ps.frozen.pax,
            Dist => ps.distance / 100.0,
            DistSq => (ps.distance / 100.0).powi(2),
            Dist300 => flag(ps.buckets[0]),
            Dist600 => flag(ps.buckets[1]),
            Dist900 => flag(ps.buckets[2]),
            Dist1200 => flag(ps.buckets[3]),
            Dist1500 => flag(ps.buckets[4]),
            Pop => gm(co.population / 1e4, cd.population / 1e4).ln(),
            Inc => gm(co.income, cd.income).ln(),
            Unempl => gm(co.unemployment, cd.unemployment),
            Vacation => gm(co.vacation, cd.vacation),
            MinInc => co.income.min(cd.income).ln(),
            MaxInc => co.income.max(cd.income).ln(),
            Secnd => flag(ps.secnd),
            Slot => flag(ps.slot),
            Fee => ps.fee,
            Netwec => net().netwec,
            MaxAzCit => net().max_az_cit,
            MinAzCit => net().min_az_cit,
            ZerAzCit => flag(net().zer_az_cit),
            AzShCon => self.azshcon.get(&(obs.pair, obs.year)).copied().unwrap_or(0.0),
            Hub => flag(ps.hub),
            HubOth => ps.huboth,
            NonHub => flag(ps.nonhub),
            Hhi => ps.frozen.hhi,
            MaxHhi => ps.max_hhi,
            MinHhi => ps.min_hhi,
            LccComp => flag(ps.frozen.lcccomp),
            FscMaj => flag(ps.frozen.fscmaj),
            LccMaj => flag(ps.frozen.lccmaj),
            RegSma => flag(ps.frozen.regsma),
            Bankr => flag(
                obs.year == self.bankruptcy_year
                    && self
                        .panel
                        .traffic(obs.pair, obs.year)
                        .iter()
                        .any(|(c, p)| *p > 0 && self.bankrupt.contains(c)),
            ),
            Exist => flag(ps.exist),
            New => flag(!ps.exist),
            Big => flag(ps.big),
            MedSma => flag(ps.medsma),
            Trend => f64::from(obs.year - self.panel.window.first + 1),
            MaxHhiXNonHub | MaxHhiXMedSma | MaxHhiXBig | TrendXDist | TrendXHub | TrendXSecnd | TrendXNew => {
                unreachable!("interactions handled above")
            }
        }
    }
}

const ID_COLUMNS: [&str; 5] = ["origin", "destination", "year", "az", "exist"];

/// Writes every available column of `source` as CSV for audit; values use
/// shortest round-trip formatting so a reload is bit-exact.
pub fn write_catalog<W: Write>(source: &dyn CovariateSource, w: W) -> Result<()> {
    let vars: Vec<Variable> = Variable::ALL.iter().copied().filter(|v| source.has(*v)).collect();
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ID_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(vars.iter().map(|v| v.column_name()));
    wtr.write_record(&header)?;
    const CHUNK: usize = 8192;
    let mut start = 0;
    while start < source.rows() {
        let end = (start + CHUNK).min(source.rows());
        let lines: Vec<Vec<String>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let r = source.row(i);
                let (o, d) = source.pair_label(r.pair);
                let mut rec = vec![
                    o.to_string(),
                    d.to_string(),
                    r.year.to_string(),
                    r.entry.to_string(),
                    u8::from(r.exist).to_string(),
                ];
                rec.extend(vars.iter().map(|v| format!("{}", source.value(*v, i))));
                rec
            })
            .collect();
        for l in lines {
            wtr.write_record(&l)?;
        }
        start = end;
    }
    wtr.flush().map_err(|e| Error::io("<catalog csv>", e))?;
    Ok(())
}

impl CovariateCatalog<'_> {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_catalog(self, w)
    }
}

/// A catalog reloaded from its CSV export.
#[derive(Debug, Clone)]
pub struct CatalogTable {
    pairs: Vec<(String, String)>,
    rows: Vec<RowInfo>,
    columns: BTreeMap<Variable, Vec<f64>>,
    first_year: i32,
}

impl CatalogTable {
    /// Loads the id columns plus `wanted` (all columns when `None`).
    pub fn load(path: impl AsRef<Path>, wanted: Option<&[Variable]>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(f, path, wanted)
    }

    pub fn read<R: Read>(reader: R, label: &Path, wanted: Option<&[Variable]>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.len() < ID_COLUMNS.len() || header[..ID_COLUMNS.len()] != ID_COLUMNS {
            return Err(Error::Schema {
                path: label.to_path_buf(),
                expected: ID_COLUMNS.join(","),
                found: header.join(","),
            });
        }
        let mut selected = Vec::new();
        for (j, name) in header.iter().enumerate().skip(ID_COLUMNS.len()) {
            let var = Variable::from_name(name).ok_or_else(|| Error::UnknownVariable(vec![name.clone()]))?;
            if wanted.is_none_or(|w| w.contains(&var)) {
                selected.push((j, var));
            }
        }
        let mut columns: BTreeMap<Variable, Vec<f64>> = selected.iter().map(|(_, v)| (*v, Vec::new())).collect();
        let mut pairs = Vec::new();
        let mut pair_index: HashMap<(String, String), u32> = HashMap::new();
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k as u64 + 2;
            let rec = rec?;
            let key = (rec[0].to_string(), rec[1].to_string());
            let pair = *pair_index.entry(key.clone()).or_insert_with(|| {
                pairs.push(key);
                (pairs.len() - 1) as u32
            });
            let year = rec[2].trim().parse::<i32>();
            let entry = rec[3].trim().parse::<u8>();
            let exist = rec[4].trim().parse::<u8>();
            match (year, entry, exist) {
                (Ok(year), Ok(entry @ 0..=1), Ok(exist @ 0..=1)) => rows.push(RowInfo {
                    pair,
                    year,
                    entry,
                    exist: exist == 1,
                }),
                _ => {
                    errors.push((line, "bad year/az/exist".to_string()));
                    continue;
                }
            }
            for (j, var) in &selected {
                match rec[*j].trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => columns.get_mut(var).expect("selected").push(x),
                    _ => {
                        errors.push((line, format!("non-numeric {}", var.label())));
                        columns.get_mut(var).expect("selected").push(f64::NAN);
                    }
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::Rows {
                path: label.to_path_buf(),
                errors,
            });
        }
        let first_year = rows.iter().map(|r| r.year).min().unwrap_or(0);
        Ok(CatalogTable {
            pairs,
            rows,
            columns,
            first_year,
        })
    }
}

impl CovariateSource for CatalogTable {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn first_year(&self) -> i32 {
        self.first_year
    }

    fn row(&self, i: usize) -> RowInfo {
        self.rows[i]
    }

    fn pair_label(&self, pair: u32) -> (&str, &str) {
        let (o, d) = &self.pairs[pair as usize];
        (o, d)
    }

    fn has(&self, var: Variable) -> bool {
        self.columns.contains_key(&var)
    }

    fn value(&self, var: Variable, i: usize) -> f64 {
        self.columns[&var][i]
    }
}
