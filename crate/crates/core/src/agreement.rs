//! Three-level coefficient raters and Cohen's kappa between them.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariates::{canonical_key, INTERCEPT};
use crate::error::{Error, Result};
use crate::estimators::normal::two_sided_p;
use crate::estimators::{stars, FitResult};

/// Default significance level for classification.
pub const DEFAULT_ALPHA: f64 = 0.10;

/// Share of undefined bootstrap replicates above which the SE is flagged.
pub const UNRELIABLE_DROP_SHARE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RatingClass {
    SignificantNegative,
    NotSignificant,
    SignificantPositive,
}

impl RatingClass {
    pub const ALL: [RatingClass; 3] = [
        RatingClass::SignificantNegative,
        RatingClass::NotSignificant,
        RatingClass::SignificantPositive,
    ];

    /// File token: NEG, NS or POS.
    pub fn token(self) -> &'static str {
        match self {
            RatingClass::SignificantNegative => "NEG",
            RatingClass::NotSignificant => "NS",
            RatingClass::SignificantPositive => "POS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_significant(self) -> bool {
        self != RatingClass::NotSignificant
    }

    /// Class of an estimate given whether it is significant.
    pub fn of(estimate: f64, significant: bool) -> Self {
        if significant && estimate > 0.0 {
            RatingClass::SignificantPositive
        } else if significant && estimate < 0.0 {
            RatingClass::SignificantNegative
        } else {
            RatingClass::NotSignificant
        }
    }
}

impl fmt::Display for RatingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RatingClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace([' ', '_', '-'], "").as_str() {
            "NEG" | "SIGNIFICANTNEGATIVE" => Ok(RatingClass::SignificantNegative),
            "NS" | "NOTSIGNIFICANT" => Ok(RatingClass::NotSignificant),
            "POS" | "SIGNIFICANTPOSITIVE" => Ok(RatingClass::SignificantPositive),
            _ => Err(Error::invalid(format!("unknown rating class '{s}'"))),
        }
    }
}

/// Ordered variable → class mapping. Names are matched by canonical key, so
/// `MAXHHI × NONHUB` and `MAXHHI_X_NONHUB` are the same variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Rater {
    provenance: String,
    items: Vec<(String, RatingClass)>,
    index: HashMap<String, usize>,
}

impl Rater {
    /// Rejects empty raters and duplicate names.
    pub fn new(provenance: impl Into<String>, items: Vec<(String, RatingClass)>) -> Result<Self> {
        let provenance = provenance.into();
        if items.is_empty() {
            return Err(Error::invalid(format!("rater '{provenance}' has no variables")));
        }
        let mut index = HashMap::with_capacity(items.len());
        for (i, (name, _)) in items.iter().enumerate() {
            if index.insert(canonical_key(name), i).is_some() {
                return Err(Error::invalid(format!("rater '{provenance}' lists {name} twice")));
            }
        }
        Ok(Rater {
            provenance,
            items,
            index,
        })
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn get(&self, name: &str) -> Option<RatingClass> {
        self.index.get(&canonical_key(name)).map(|&i| self.items[i].1)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, RatingClass)> {
        self.items.iter().map(|(n, c)| (n.as_str(), *c))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(n, _)| n.as_str())
    }

    /// Class counts in NEG, NS, POS order.
    pub fn marginals(&self) -> [usize; 3] {
        let mut m = [0; 3];
        for (_, c) in &self.items {
            m[c.index()] += 1;
        }
        m
    }
}

/// Classifies every estimated coefficient except the intercept: significant
/// iff `p < α` (strict). Dropped columns carry no estimate and are left out.
pub fn classify_coefficients(fit: &FitResult, alpha: f64) -> Result<Rater> {
    let items = fit
        .coefficients
        .iter()
        .filter(|c| c.name != INTERCEPT)
        .map(|c| (c.name.clone(), RatingClass::of(c.estimate, c.p_value < alpha)))
        .collect();
    Rater::new(format!("fit:{}", fit.name), items)
}

/// One cell of a published coefficient table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PublishedCell {
    /// Estimate with 0 to 3 stars.
    Estimate { value: f64, stars: u8 },
    /// Estimated model but column dropped (`–`).
    Dropped,
    /// Variable not in the model (empty cell).
    Absent,
}

impl PublishedCell {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() {
            return Ok(PublishedCell::Absent);
        }
        if matches!(t, "–" | "—" | "-" | ".") {
            return Ok(PublishedCell::Dropped);
        }
        let body = t.trim_end_matches('*');
        let stars = t.len() - body.len();
        if stars > 3 {
            return Err(Error::invalid(format!("cell '{t}' has more than three stars")));
        }
        let value: f64 = body
            .replace('−', "-")
            .parse()
            .map_err(|_| Error::invalid(format!("cell '{t}' is not a number with stars")))?;
        Ok(PublishedCell::Estimate {
            value,
            stars: stars as u8,
        })
    }

    /// Largest p-value the stars certify: 0.01, 0.05 or 0.10.
    pub fn star_bound(self) -> Option<f64> {
        match self {
            PublishedCell::Estimate { stars: 3, .. } => Some(0.01),
            PublishedCell::Estimate { stars: 2, .. } => Some(0.05),
            PublishedCell::Estimate { stars: 1, .. } => Some(0.10),
            _ => None,
        }
    }
}

/// Coefficient table as printed: variables by columns, cells `0.0474**`,
/// `–` (dropped) or empty (not in the model).
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedTable {
    pub label: String,
    pub columns: Vec<String>,
    pub variables: Vec<String>,
    /// `cells[variable][column]`.
    pub cells: Vec<Vec<PublishedCell>>,
}

impl PublishedTable {
    /// First header cell names the variable column; the rest are columns.
    pub fn read<R: Read>(reader: R, label: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().skip(1).map(|s| s.trim().to_string()).collect();
        if columns.is_empty() {
            return Err(Error::invalid(format!("{label}: table has no coefficient columns")));
        }
        let mut variables = Vec::new();
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let name = rec[0].trim().to_string();
            if name.is_empty() {
                return Err(Error::invalid(format!("{label}: line {line}: empty variable name")));
            }
            if variables.iter().any(|v: &String| canonical_key(v) == canonical_key(&name)) {
                return Err(Error::invalid(format!("{label}: line {line}: duplicate variable {name}")));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(PublishedCell::parse)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::invalid(format!("{label}: line {line}: {e}")))?;
            variables.push(name);
            cells.push(row);
        }
        Ok(PublishedTable {
            label: label.to_string(),
            columns,
            variables,
            cells,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(f, &path.display().to_string())
    }

    /// Column by exact header, by its `(n)` prefix, or by 1-based number.
    pub fn column_index(&self, key: &str) -> Result<usize> {
        let key = key.trim();
        if let Some(i) = self.columns.iter().position(|c| c == key) {
            return Ok(i);
        }
        let bare = key.trim_start_matches('(').trim_end_matches(')');
        if let Ok(n) = bare.parse::<usize>() {
            let tag = format!("({n})");
            if let Some(i) = self.columns.iter().position(|c| c.starts_with(&tag)) {
                return Ok(i);
            }
            if (1..=self.columns.len()).contains(&n) {
                return Ok(n - 1);
            }
        }
        Err(Error::invalid(format!("{}: no column '{key}'", self.label)))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = (&str, PublishedCell)> {
        self.variables.iter().zip(&self.cells).map(move |(v, row)| (v.as_str(), row[col]))
    }

    /// Classifies one column: significant iff the stars certify p < α, that
    /// is the star bound is at most α. Dropped and absent cells are left out.
    pub fn classify(&self, col: usize, alpha: f64) -> Result<Rater> {
        Rater::new(format!("{}:{}", self.label, self.columns[col]), self.rated(col, alpha).into_iter().map(|r| (r.name, r.class)).collect())
    }

    pub fn rated(&self, col: usize, alpha: f64) -> Vec<RatedEstimate> {
        self.column(col)
            .filter_map(|(name, cell)| match cell {
                PublishedCell::Estimate { value, .. } => Some(RatedEstimate {
                    name: name.to_string(),
                    estimate: value,
                    class: RatingClass::of(value, cell.star_bound().is_some_and(|b| b <= alpha)),
                }),
                _ => None,
            })
            .collect()
    }
}

/// Shorthand for [`PublishedTable::classify`].
pub fn classify_published(table: &PublishedTable, col: usize, alpha: f64) -> Result<Rater> {
    table.classify(col, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedPair {
    pub name: String,
    pub a: RatingClass,
    pub b: RatingClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Shared variables in the order of the first rater.
    pub pairs: Vec<RatedPair>,
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
}

pub fn align_raters(a: &Rater, b: &Rater) -> Result<Alignment> {
    let mut pairs = Vec::new();
    let mut only_a = Vec::new();
    for (name, ca) in a.iter() {
        match b.get(name) {
            Some(cb) => pairs.push(RatedPair {
                name: name.to_string(),
                a: ca,
                b: cb,
            }),
            None => only_a.push(name.to_string()),
        }
    }
    let only_b = b.names().filter(|n| a.get(n).is_none()).map(str::to_string).collect();
    if pairs.is_empty() {
        return Err(Error::invalid(format!(
            "raters '{}' and '{}' share no variables",
            a.provenance(),
            b.provenance()
        )));
    }
    Ok(Alignment { pairs, only_a, only_b })
}

/// Large-sample standard errors of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSe {
    /// Cohen (1960): √(Pₒ(1−Pₒ) / (N(1−Pₑ)²)).
    pub cohen: f64,
    /// Fleiss, Cohen and Everitt (1969) under κ = 0.
    pub fleiss_null: f64,
    /// Fleiss, Cohen and Everitt (1969) at the estimated κ.
    pub fleiss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub replications: usize,
    pub seed: u64,
    /// Replicates with Pₑ = 1, left out of the SE.
    pub undefined: usize,
    pub unreliable: bool,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub n: usize,
    pub po: f64,
    pub pe: f64,
    pub kappa: f64,
    /// Bootstrap SE once computed.
    pub se: Option<f64>,
    /// κ/SE; absent when SE is zero or not computed.
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub label: String,
    /// Counts by (class A, class B), NEG/NS/POS order.
    pub contingency: [[usize; 3]; 3],
    pub asymptotic: AsymptoticSe,
    pub bootstrap: Option<BootstrapSummary>,
}

impl KappaResult {
    pub fn stars(&self) -> &'static str {
        self.p.map(stars).unwrap_or("")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn contingency(pairs: &[RatedPair]) -> [[usize; 3]; 3] {
    let mut t = [[0; 3]; 3];
    for p in pairs {
        t[p.a.index()][p.b.index()] += 1;
    }
    t
}

/// (Pₒ, Pₑ, κ) of a contingency table; None when Pₑ = 1.
fn kappa_of(t: &[[usize; 3]; 3], n: usize) -> Option<(f64, f64, f64)> {
    let agree: usize = (0..3).map(|c| t[c][c]).sum();
    let chance: usize = (0..3).map(|c| t[c].iter().sum::<usize>() * (0..3).map(|r| t[r][c]).sum::<usize>()).sum();
    if chance == n * n {
        return None;
    }
    let nf = n as f64;
    let po = agree as f64 / nf;
    let pe = chance as f64 / (nf * nf);
    Some((po, pe, (po - pe) / (1.0 - pe)))
}

fn asymptotic(t: &[[usize; 3]; 3], n: usize, po: f64, pe: f64, kappa: f64) -> AsymptoticSe {
    let nf = n as f64;
    let p = |i: usize, j: usize| t[i][j] as f64 / nf;
    let row: Vec<f64> = (0..3).map(|i| (0..3).map(|j| p(i, j)).sum()).collect();
    let col: Vec<f64> = (0..3).map(|j| (0..3).map(|i| p(i, j)).sum()).collect();
    let q = 1.0 - pe;
    let cohen = (po * (1.0 - po) / (nf * q * q)).sqrt();
    let cross: f64 = (0..3).map(|i| row[i] * col[i] * (row[i] + col[i])).sum();
    let fleiss_null = ((pe + pe * pe - cross) / (nf * q * q)).max(0.0).sqrt();
    let mut v = 0.0;
    for i in 0..3 {
        v += p(i, i) * (1.0 - (row[i] + col[i]) * (1.0 - kappa)).powi(2);
        for j in 0..3 {
            if i != j {
                v += (1.0 - kappa).powi(2) * p(i, j) * (col[i] + row[j]).powi(2);
            }
        }
    }
    v -= (kappa - pe * (1.0 - kappa)).powi(2);
    let fleiss = (v / (nf * q * q)).max(0.0).sqrt();
    AsymptoticSe {
        cohen,
        fleiss_null,
        fleiss,
    }
}

/// Point estimates: Pₒ, Pₑ = Σ_c marginal_A(c)·marginal_B(c), κ, label and
/// asymptotic SEs. The bootstrap fields stay empty.
pub fn cohen_kappa(pairs: &[RatedPair]) -> Result<KappaResult> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid(format!("kappa needs at least two items, got {n}")));
    }
    let t = contingency(pairs);
    let (po, pe, kappa) = kappa_of(&t, n).ok_or(Error::KappaUndefined)?;
    Ok(KappaResult {
        n,
        po,
        pe,
        kappa,
        se: None,
        z: None,
        p: None,
        label: landis_koch_label(kappa).to_string(),
        contingency: t,
        asymptotic: asymptotic(&t, n, po, pe, kappa),
        bootstrap: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome {
    pub se: f64,
    pub replicates: Vec<f64>,
    pub undefined: usize,
    pub unreliable: bool,
}

/// Resamples the item pairs with replacement. Replicate `r` draws from the
/// ChaCha8 stream `r` of `seed`, so the result does not depend on thread
/// count. SE is the n−1 standard deviation of the defined replicates.
pub fn kappa_bootstrap(pairs: &[RatedPair], replications: usize, seed: u64) -> Result<BootstrapOutcome> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid(format!("kappa needs at least two items, got {n}")));
    }
    if replications < 2 {
        return Err(Error::invalid("bootstrap needs at least two replications"));
    }
    let cells: Vec<(usize, usize)> = pairs.iter().map(|p| (p.a.index(), p.b.index())).collect();
    let draws: Vec<Option<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut t = [[0usize; 3]; 3];
            for _ in 0..n {
                let (a, b) = cells[rng.random_range(0..n)];
                t[a][b] += 1;
            }
            kappa_of(&t, n).map(|(_, _, k)| k)
        })
        .collect();
    let replicates: Vec<f64> = draws.iter().flatten().copied().collect();
    let undefined = replications - replicates.len();
    if replicates.len() < 2 {
        return Err(Error::Numerical(format!(
            "{undefined} of {replications} bootstrap replicates have undefined kappa"
        )));
    }
    let m = replicates.len() as f64;
    let mean = replicates.iter().sum::<f64>() / m;
    let var = replicates.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(BootstrapOutcome {
        se: var.sqrt(),
        replicates,
        undefined,
        unreliable: undefined as f64 > UNRELIABLE_DROP_SHARE * replications as f64,
    })
}

/// κ with bootstrap SE, z = κ/SE and its two-sided normal p. A zero SE
/// leaves z empty and reports p = 0. Zero replications skip the bootstrap.
pub fn kappa_test(pairs: &[RatedPair], replications: usize, seed: u64) -> Result<KappaResult> {
    let mut k = cohen_kappa(pairs)?;
    if replications == 0 {
        return Ok(k);
    }
    let b = kappa_bootstrap(pairs, replications, seed)?;
    k.se = Some(b.se);
    if b.se > 0.0 {
        let z = k.kappa / b.se;
        k.z = Some(z);
        k.p = Some(two_sided_p(z));
    } else {
        k.p = Some(0.0);
    }
    let mean = b.replicates.iter().sum::<f64>() / b.replicates.len() as f64;
    k.bootstrap = Some(BootstrapSummary {
        replications,
        seed,
        undefined: b.undefined,
        unreliable: b.unreliable,
        mean,
    });
    Ok(k)
}

/// Landis–Koch band of κ rounded to two decimals.
pub fn landis_koch_label(kappa: f64) -> &'static str {
    if !kappa.is_finite() {
        return "undefined";
    }
    let k = (kappa * 100.0).round() / 100.0;
    if k < 0.0 {
        "poor"
    } else if k <= 0.20 {
        "slight"
    } else if k <= 0.40 {
        "fair"
    } else if k <= 0.60 {
        "moderate"
    } else if k <= 0.80 {
        "substantial"
    } else {
        "almost perfect"
    }
}

/// Variable names by (class A, class B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub a: String,
    pub b: String,
    pub cells: [[Vec<String>; 3]; 3],
}

pub fn agreement_matrix(a: &Rater, b: &Rater) -> Result<AgreementMatrix> {
    let al = align_raters(a, b)?;
    let mut cells: [[Vec<String>; 3]; 3] = Default::default();
    for p in al.pairs {
        cells[p.a.index()][p.b.index()].push(p.name);
    }
    Ok(AgreementMatrix {
        a: a.provenance().to_string(),
        b: b.provenance().to_string(),
        cells,
    })
}

impl AgreementMatrix {
    pub fn agreements(&self) -> Vec<&str> {
        (0..3).flat_map(|c| self.cells[c][c].iter().map(String::as_str)).collect()
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().map(Vec::len).sum()
    }

    /// Rows are classes of the first rater, columns of the second; diagonal
    /// cells are marked `=`.
    pub fn to_text(&self) -> String {
        let mut out = format!("rows: {}\ncolumns: {}\n", self.a, self.b);
        for ra in RatingClass::ALL {
            for rb in RatingClass::ALL {
                let names = &self.cells[ra.index()][rb.index()];
                let mark = if ra == rb { '=' } else { ' ' };
                out.push_str(&format!(
                    "{mark} {:<3} x {:<3} [{:>2}] {}\n",
                    ra.token(),
                    rb.token(),
                    names.len(),
                    names.join(", ")
                ));
            }
        }
        out
    }

    /// Long format: one line per cell.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["class_a", "class_b", "agreement", "count", "variables"])?;
        for ra in RatingClass::ALL {
            for rb in RatingClass::ALL {
                let names = &self.cells[ra.index()][rb.index()];
                wtr.write_record([
                    ra.token(),
                    rb.token(),
                    if ra == rb { "1" } else { "0" },
                    &names.len().to_string(),
                    &names.join("; "),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<agreement csv>", e))?;
        Ok(())
    }
}

/// κ for every (subject, benchmark) pair. Cells that cannot be computed
/// hold the reason instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaGrid {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<std::result::Result<KappaResult, String>>>,
}

pub fn kappa_grid(subjects: &[(String, Rater)], benchmarks: &[(String, Rater)], replications: usize, seed: u64) -> KappaGrid {
    let cells = subjects
        .iter()
        .map(|(_, s)| {
            benchmarks
                .iter()
                .map(|(_, b)| {
                    align_raters(s, b)
                        .and_then(|al| kappa_test(&al.pairs, replications, seed))
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    KappaGrid {
        rows: subjects.iter().map(|(n, _)| n.clone()).collect(),
        columns: benchmarks.iter().map(|(n, _)| n.clone()).collect(),
        cells,
    }
}

impl KappaGrid {
    pub fn get(&self, row: &str, column: &str) -> Option<&KappaResult> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.cells[r][c].as_ref().ok()
    }

    /// Cells `κ` to three decimals plus bootstrap stars; `n/a` when undefined.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["subject".to_string()];
        header.extend(self.columns.iter().cloned());
        wtr.write_record(&header)?;
        for (name, row) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|c| match c {
                Ok(k) => format!("{:.3}{}", k.kappa, k.stars()),
                Err(_) => "n/a".to_string(),
            }));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<kappa grid csv>", e))?;
        Ok(())
    }
}

/// An estimate with its class, the input to sign-flip counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedEstimate {
    pub name: String,
    pub estimate: f64,
    pub class: RatingClass,
}

pub fn rated_from_fit(fit: &FitResult, alpha: f64) -> Vec<RatedEstimate> {
    fit.coefficients
        .iter()
        .filter(|c| c.name != INTERCEPT)
        .map(|c| RatedEstimate {
            name: c.name.clone(),
            estimate: c.estimate,
            class: RatingClass::of(c.estimate, c.p_value < alpha),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignFlipReport {
    /// Shared estimates with opposite signs, significance ignored.
    pub raw_flips: Vec<String>,
    pub raw_total: usize,
    /// Estimates significant in both with opposite classes.
    pub classified_flips: Vec<String>,
    pub classified_total: usize,
}

impl SignFlipReport {
    pub fn raw_share(&self) -> f64 {
        self.raw_flips.len() as f64 / self.raw_total as f64
    }

    pub fn classified_share(&self) -> f64 {
        self.classified_flips.len() as f64 / self.classified_total as f64
    }
}

pub fn sign_flips(a: &[RatedEstimate], b: &[RatedEstimate]) -> Result<SignFlipReport> {
    let mut report = SignFlipReport {
        raw_flips: Vec::new(),
        raw_total: 0,
        classified_flips: Vec::new(),
        classified_total: 0,
    };
    for x in a {
        let key = canonical_key(&x.name);
        let Some(y) = b.iter().find(|y| canonical_key(&y.name) == key) else {
            continue;
        };
        report.raw_total += 1;
        if x.estimate * y.estimate < 0.0 {
            report.raw_flips.push(x.name.clone());
        }
        if x.class.is_significant() && y.class.is_significant() {
            report.classified_total += 1;
            if x.class != y.class {
                report.classified_flips.push(x.name.clone());
            }
        }
    }
    if report.raw_total == 0 {
        return Err(Error::invalid("no shared estimates to compare"));
    }
    if report.classified_total == 0 {
        return Err(Error::invalid("no estimate is significant in both columns"));
    }
    Ok(report)
}
