//! Regressor catalog and design-matrix assembly.
//!
//! Endogenous market-structure variables are frozen at the base year. The
//! subject carrier's network variables use the previous year's network.

mod catalog;
mod design;
mod variables;

pub use catalog::{write_catalog, CatalogTable, CovariateCatalog, CovariateSource, RowInfo};
pub use design::{assemble_design, rank_screen, DesignMatrix, DropReason, DroppedColumn, INTERCEPT, RANK_TOLERANCE};
pub use variables::{canonical_key, presets, Variable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Carrier codes by business-model role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarrierRoles {
    pub subject: String,
    pub fsc_major: Vec<String>,
    pub lcc_major: Vec<String>,
    pub lcc: Vec<String>,
    pub regional_small: Vec<String>,
    pub bankrupt: Vec<String>,
    pub bankruptcy_year: i32,
}

impl Default for CarrierRoles {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        CarrierRoles {
            subject: "AZU".into(),
            fsc_major: v(&["TAM"]),
            lcc_major: v(&["GLO"]),
            lcc: v(&["GLO", "WEB", "BRB"]),
            regional_small: v(&["PTB", "TTL", "MAP", "NHG", "SET"]),
            bankrupt: v(&["ONE"]),
            bankruptcy_year: 2018,
        }
    }
}

impl CarrierRoles {
    pub(crate) fn normalized(&self) -> CarrierRoles {
        let up = |xs: &[String]| xs.iter().map(|s| crate::ingest::normalize_code(s)).collect();
        CarrierRoles {
            subject: crate::ingest::normalize_code(&self.subject),
            fsc_major: up(&self.fsc_major),
            lcc_major: up(&self.lcc_major),
            lcc: up(&self.lcc),
            regional_small: up(&self.regional_small),
            bankrupt: up(&self.bankrupt),
            bankruptcy_year: self.bankruptcy_year,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HubOthMode {
    /// Maximum rival connecting-passenger share over the endpoints.
    #[default]
    Continuous,
    /// 1 when that maximum exceeds `huboth_threshold`.
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovariateOptions {
    pub huboth: HubOthMode,
    pub huboth_threshold: f64,
    /// Base-year passengers at or above which an airport is a major hub.
    pub big_passengers: f64,
    /// National passenger share below which an endpoint is not a hub.
    pub nonhub_share: f64,
}

impl Default for CovariateOptions {
    fn default() -> Self {
        CovariateOptions {
            huboth: HubOthMode::Continuous,
            huboth_threshold: 0.0,
            big_passengers: 1_000_000.0,
            nonhub_share: 0.0025,
        }
    }
}

/// Σ share². Shares must be nonnegative, sum to 1 within 1e-9 and include a
/// positive entry.
pub fn hhi(shares: &[f64]) -> Result<f64> {
    if shares.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::invalid("market shares must be finite and nonnegative"));
    }
    if !shares.iter().any(|s| *s > 0.0) {
        return Err(Error::invalid("at least one market share must be positive"));
    }
    let total: f64 = shares.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("market shares sum to {total}, not 1")));
    }
    Ok(shares.iter().map(|s| s * s).sum())
}

/// HHI of raw passenger counts; 0 when there is no traffic.
pub fn hhi_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts.iter().map(|&c| (c as f64 / total).powi(2)).sum()
}

/// √(a·b) for strictly positive inputs.
pub fn geometric_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!(
            "geometric mean needs positive finite inputs, got {a} and {b}"
        )));
    }
    if a == b {
        return Ok(a);
    }
    Ok(a.sqrt() * b.sqrt())
}

/// Interval dummies `[300,600)`, `[600,900)`, `[900,1200)`, `[1200,1500)`,
/// `[1500,3000]`. Distances in `[100,300)` set none.
pub fn distance_buckets(miles: f64) -> Result<[bool; 5]> {
    if !(100.0..=3000.0).contains(&miles) {
        return Err(Error::invalid(format!("distance {miles} outside [100, 3000]")));
    }
    let mut out = [false; 5];
    if miles >= 300.0 {
        let i = (((miles - 300.0) / 300.0).floor() as usize).min(4);
        out[i] = true;
    }
    Ok(out)
}

/// Subject-carrier network at one endpoint: routes touching the airport
/// (departures plus arrivals) and distinct airports linked to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NetworkCounts {
    pub routes: u32,
    pub served: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkEconomies {
    pub netwec: f64,
    pub max_az_cit: f64,
    pub min_az_cit: f64,
    pub zer_az_cit: bool,
}

pub fn network_economies(origin: NetworkCounts, destination: NetworkCounts) -> NetworkEconomies {
    NetworkEconomies {
        netwec: f64::from(origin.routes + destination.routes),
        max_az_cit: f64::from(origin.served.max(destination.served)),
        min_az_cit: f64::from(origin.served.min(destination.served)),
        zer_az_cit: origin.served == 0 && destination.served == 0,
    }
}

/// Base-year traffic summary of one endpoint airport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointTraffic {
    pub passengers: f64,
    pub national_share: f64,
    pub hhi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConcentrationFlags {
    pub nonhub: bool,
    pub big: bool,
    pub medsma: bool,
}

/// NONHUB from the smaller endpoint share; BIG from the more concentrated
/// endpoint and MEDSMA from the less concentrated one (ties: origin is the
/// more concentrated).
pub fn concentration_flags(
    origin: EndpointTraffic,
    destination: EndpointTraffic,
    options: &CovariateOptions,
) -> Result<ConcentrationFlags> {
    for e in [origin, destination] {
        if !e.national_share.is_finite() || e.national_share < 0.0 {
            return Err(Error::invalid("national passenger share must be finite and nonnegative"));
        }
    }
    let (more, less) = if origin.hhi >= destination.hhi {
        (origin, destination)
    } else {
        (destination, origin)
    };
    Ok(ConcentrationFlags {
        nonhub: origin.national_share.min(destination.national_share) < options.nonhub_share,
        big: more.passengers >= options.big_passengers,
        medsma: less.passengers < options.big_passengers,
    })
}

/// Pair variables fixed at the base year.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrozenPairValues {
    pub pax: f64,
    pub hhi: f64,
    pub fscmaj: bool,
    pub lccmaj: bool,
    pub lcccomp: bool,
    pub regsma: bool,
}

/// PAX = ln(1 + base-year passengers); HHI and presence dummies are 0 on a
/// pair nobody flew.
pub fn freeze_base_year(base_traffic: &[(String, u64)], roles: &CarrierRoles) -> FrozenPairValues {
    let total: u64 = base_traffic.iter().map(|(_, p)| p).sum();
    let present = |set: &[String]| {
        base_traffic
            .iter()
            .any(|(c, p)| *p > 0 && set.iter().any(|s| s == c))
    };
    FrozenPairValues {
        pax: (total as f64).ln_1p(),
        hhi: hhi_of_counts(base_traffic.iter().map(|(_, p)| *p)),
        fscmaj: present(&roles.fsc_major),
        lccmaj: present(&roles.lcc_major),
        lcccomp: present(&roles.lcc),
        regsma: present(&roles.regional_small),
    }
}
