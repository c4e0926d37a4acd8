use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Every regressor the catalog can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    Pax,
    Dist,
    DistSq,
    Dist300,
    Dist600,
    Dist900,
    Dist1200,
    Dist1500,
    Pop,
    Inc,
    Unempl,
    Vacation,
    Secnd,
    Slot,
    Fee,
    Netwec,
    MaxAzCit,
    MinAzCit,
    ZerAzCit,
    AzShCon,
    Hub,
    HubOth,
    NonHub,
    Hhi,
    MaxHhi,
    MinHhi,
    LccComp,
    Bankr,
    MinInc,
    MaxInc,
    Exist,
    New,
    FscMaj,
    LccMaj,
    RegSma,
    Big,
    MedSma,
    Trend,
    MaxHhiXNonHub,
    MaxHhiXMedSma,
    MaxHhiXBig,
    TrendXDist,
    TrendXHub,
    TrendXSecnd,
    TrendXNew,
}

use Variable::*;

impl Variable {
    pub const ALL: [Variable; 45] = [
        Pax, Dist, DistSq, Dist300, Dist600, Dist900, Dist1200, Dist1500, Pop, Inc, Unempl, Vacation, Secnd,
        Slot, Fee, Netwec, MaxAzCit, MinAzCit, ZerAzCit, AzShCon, Hub, HubOth, NonHub, Hhi, MaxHhi, MinHhi,
        LccComp, Bankr, MinInc, MaxInc, Exist, New, FscMaj, LccMaj, RegSma, Big, MedSma, Trend, MaxHhiXNonHub,
        MaxHhiXMedSma, MaxHhiXBig, TrendXDist, TrendXHub, TrendXSecnd, TrendXNew,
    ];

    /// Display label, as printed in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Pax => "PAX",
            Dist => "DIST",
            DistSq => "DIST SQ",
            Dist300 => "DIST 300",
            Dist600 => "DIST 600",
            Dist900 => "DIST 900",
            Dist1200 => "DIST 1200",
            Dist1500 => "DIST 1500",
            Pop => "POP",
            Inc => "INC",
            Unempl => "UNEMPL",
            Vacation => "VACATION",
            Secnd => "SECND",
            Slot => "SLOT",
            Fee => "FEE",
            Netwec => "NETWEC",
            MaxAzCit => "MAXAZCIT",
            MinAzCit => "MINAZCIT",
            ZerAzCit => "ZERAZCIT",
            AzShCon => "AZSHCON",
            Hub => "HUB",
            HubOth => "HUBOTH",
            NonHub => "NONHUB",
            Hhi => "HHI",
            MaxHhi => "MAXHHI",
            MinHhi => "MINHHI",
            LccComp => "LCCCOMP",
            Bankr => "BANKR",
            MinInc => "MININC",
            MaxInc => "MAXINC",
            Exist => "EXIST",
            New => "NEW",
            FscMaj => "FSCMAJ",
            LccMaj => "LCCMAJ",
            RegSma => "REGSMA",
            Big => "BIG",
            MedSma => "MEDSMA",
            Trend => "TREND",
            MaxHhiXNonHub => "MAXHHI × NONHUB",
            MaxHhiXMedSma => "MAXHHI × MEDSMA",
            MaxHhiXBig => "MAXHHI × BIG",
            TrendXDist => "TREND × DIST",
            TrendXHub => "TREND × HUB",
            TrendXSecnd => "TREND × SECND",
            TrendXNew => "TREND × NEW",
        }
    }

    /// Column name used in CSV exports (no spaces).
    pub fn column_name(self) -> String {
        self.label().replace(" × ", "_X_").replace(' ', "_")
    }

    pub fn is_dummy(self) -> bool {
        matches!(
            self,
            Dist300
                | Dist600
                | Dist900
                | Dist1200
                | Dist1500
                | Secnd
                | Slot
                | ZerAzCit
                | Hub
                | NonHub
                | LccComp
                | Bankr
                | Exist
                | New
                | FscMaj
                | LccMaj
                | RegSma
                | Big
                | MedSma
        )
    }

    /// Factors of an interaction column.
    pub fn factors(self) -> Option<(Variable, Variable)> {
        match self {
            MaxHhiXNonHub => Some((MaxHhi, NonHub)),
            MaxHhiXMedSma => Some((MaxHhi, MedSma)),
            MaxHhiXBig => Some((MaxHhi, Big)),
            TrendXDist => Some((Trend, Dist)),
            TrendXHub => Some((Trend, Hub)),
            TrendXSecnd => Some((Trend, Secnd)),
            TrendXNew => Some((Trend, New)),
            _ => None,
        }
    }

    /// Values fixed at the base year, constant within a pair.
    pub fn is_frozen(self) -> bool {
        matches!(self, Pax | Hhi | MaxHhi | MinHhi | FscMaj | LccMaj | LccComp | RegSma)
    }

    pub fn key(self) -> String {
        canonical_key(self.label())
    }

    /// Looks a name up by its canonical key, accepting a few spellings seen
    /// in published tables.
    pub fn from_name(name: &str) -> Option<Variable> {
        let key = canonical_key(name);
        let key = match key.as_str() {
            "DIST2" | "DISTSQUARED" => "DISTSQ".to_string(),
            "MINAZUCIT" => "MINAZCIT".to_string(),
            _ => key,
        };
        Variable::ALL.iter().copied().find(|v| v.key() == key)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::from_name(s).ok_or_else(|| Error::UnknownVariable(vec![s.to_string()]))
    }
}

/// Normalizes a variable name for matching: upper case, separators removed,
/// and interaction markers (`×`, `*`, or a standalone `x`) mapped to `*`.
/// `"MAXHHI × NONHUB"`, `"maxhhi_x_nonhub"` and `"MAXHHI*NONHUB"` share a key.
pub fn canonical_key(name: &str) -> String {
    let spaced = name.replace(['×', '*'], " * ");
    spaced
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let t = t.to_ascii_uppercase();
            if t == "X" {
                "*".to_string()
            } else {
                t
            }
        })
        .collect::<Vec<_>>()
        .concat()
}

/// The regressor lists of the three entry models.
pub mod presets {
    use super::Variable::{self, *};

    /// Trend controls appended to the benchmark specifications.
    pub const TREND_CONTROLS: [Variable; 5] = [Trend, TrendXDist, TrendXHub, TrendXSecnd, TrendXNew];

    /// Full entry model (32 regressors).
    pub const FULL_MODEL: [Variable; 32] = [
        Pax, Dist300, Dist600, Dist900, Dist1200, Dist1500, Pop, Inc, Unempl, Vacation, Secnd, Slot, Fee, Netwec,
        ZerAzCit, AzShCon, HubOth, NonHub, Hhi, MaxHhi, MaxHhiXNonHub, FscMaj, LccMaj, LccComp, Bankr, RegSma, New,
        Trend, TrendXDist, TrendXHub, TrendXSecnd, TrendXNew,
    ];

    /// JetBlue-benchmark specification (17 regressors before controls).
    pub const JETBLUE_LIKE: [Variable; 17] = [
        Dist, DistSq, Pax, Hhi, LccComp, Bankr, Netwec, Exist, Secnd, Slot, MaxHhi, NonHub, MaxHhiXNonHub, Fee, Pop,
        Inc, Unempl,
    ];

    /// Southwest-benchmark specification (20 regressors before controls).
    pub const SOUTHWEST_LIKE: [Variable; 20] = [
        Pax, Dist300, Dist600, Dist900, Dist1200, Dist1500, Pop, Vacation, MaxInc, MinInc, MaxAzCit, MinAzCit,
        ZerAzCit, AzShCon, HubOth, Hhi, MaxHhiXMedSma, MaxHhiXBig, MinHhi, LccComp,
    ];

    pub fn by_name(name: &str) -> Option<&'static [Variable]> {
        match name.to_ascii_lowercase().as_str() {
            "full" => Some(&FULL_MODEL),
            "jetblue" | "mhb" => Some(&JETBLUE_LIKE),
            "southwest" | "bil" => Some(&SOUTHWEST_LIKE),
            _ => None,
        }
    }
}
