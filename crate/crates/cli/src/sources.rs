//! Rater and estimate sources named on the command line.
//!
//! Accepted forms:
//! - `fit.json` : a saved fit, classified at the run's α
//! - `table.csv@COL` : one column of a coefficient table in printed form
//! - `ratings.csv` : a `variable,class` rater file
//! - `fixture:NAME` or `fixture:NAME@COL` : a bundled table or rater

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use routentry::agreement::{classify_coefficients, rated_from_fit, PublishedTable, RatedEstimate, Rater};
use routentry::estimators::FitResult;
use routentry::fixtures;
use routentry::ingest::load_rater_file;

pub const FIXTURE_TABLES: [&str; 4] = ["table2", "table6", "table7", "table3"];
pub const FIXTURE_RATERS: [&str; 2] = ["jb_ns", "sw_per2"];

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Fit(PathBuf),
    Table { table: TableRef, column: String },
    RaterFile(PathBuf),
    FixtureRater(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableRef {
    File(PathBuf),
    Fixture(String),
}

impl Source {
    pub fn parse(text: &str) -> Result<Source> {
        let (body, column) = match text.rsplit_once('@') {
            Some((b, c)) if !c.is_empty() => (b, Some(c.to_string())),
            _ => (text, None),
        };
        if let Some(name) = body.strip_prefix("fixture:") {
            let name = name.to_ascii_lowercase();
            return match column {
                Some(column) if FIXTURE_TABLES.contains(&name.as_str()) => Ok(Source::Table {
                    table: TableRef::Fixture(name),
                    column,
                }),
                None if FIXTURE_RATERS.contains(&name.as_str()) => Ok(Source::FixtureRater(name)),
                _ => bail!(
                    "unknown fixture source '{text}' (tables {} need @COLUMN; raters: {})",
                    FIXTURE_TABLES.join(", "),
                    FIXTURE_RATERS.join(", ")
                ),
            };
        }
        if let Some(column) = column {
            return Ok(Source::Table {
                table: TableRef::File(PathBuf::from(body)),
                column,
            });
        }
        let path = PathBuf::from(body);
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(Source::Fit(path)),
            _ => Ok(Source::RaterFile(path)),
        }
    }

    /// Files whose bytes determine this source.
    pub fn input_path(&self) -> Option<&Path> {
        match self {
            Source::Fit(p) | Source::RaterFile(p) => Some(p),
            Source::Table {
                table: TableRef::File(p),
                ..
            } => Some(p),
            _ => None,
        }
    }

    pub fn rater(&self, alpha: f64) -> Result<Rater> {
        match self {
            Source::Fit(p) => {
                let fit = FitResult::load(p)?;
                Ok(classify_coefficients(&fit, alpha)?)
            }
            Source::Table { table, column } => {
                let t = load_table(table)?;
                let col = t.column_index(column)?;
                Ok(t.classify(col, alpha)?)
            }
            Source::RaterFile(p) => Ok(load_rater_file(p)?),
            Source::FixtureRater(name) => Ok(match name.as_str() {
                "jb_ns" => fixtures::jetblue_rater(),
                _ => fixtures::southwest_rater(),
            }),
        }
    }

    /// Signed estimates with their class; raters carry no estimates.
    pub fn estimates(&self, alpha: f64) -> Result<Vec<RatedEstimate>> {
        match self {
            Source::Fit(p) => Ok(rated_from_fit(&FitResult::load(p)?, alpha)),
            Source::Table { table, column } => {
                let t = load_table(table)?;
                let col = t.column_index(column)?;
                Ok(t.rated(col, alpha))
            }
            _ => Err(anyhow!("a rater file carries no coefficient estimates")),
        }
    }
}

fn load_table(table: &TableRef) -> Result<PublishedTable> {
    match table {
        TableRef::File(p) => PublishedTable::load(p).with_context(|| format!("{}", p.display())),
        TableRef::Fixture(name) => Ok(match name.as_str() {
            "table2" => fixtures::full_model_table(),
            "table6" => fixtures::southwest_table(),
            "table7" => fixtures::jetblue_table(),
            _ => fixtures::kappa_table(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(Source::parse("a/fit.json").unwrap(), Source::Fit("a/fit.json".into()));
        assert_eq!(Source::parse("r.csv").unwrap(), Source::RaterFile("r.csv".into()));
        assert_eq!(
            Source::parse("t.csv@(4)").unwrap(),
            Source::Table {
                table: TableRef::File("t.csv".into()),
                column: "(4)".into()
            }
        );
        assert_eq!(Source::parse("fixture:jb_ns").unwrap(), Source::FixtureRater("jb_ns".into()));
        assert!(Source::parse("fixture:table2").is_err());
        assert!(Source::parse("fixture:nope@1").is_err());
    }

    #[test]
    fn fixture_columns_classify() {
        let r = Source::parse("fixture:table2@4").unwrap().rater(0.10).unwrap();
        assert_eq!(r.len(), 31);
    }
}
