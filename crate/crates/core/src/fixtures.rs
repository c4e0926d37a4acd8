//! Published coefficient tables and benchmark raters bundled with the crate.
//!
//! Cells keep the printed form: estimate plus stars, `–` for a dropped
//! column, empty when the variable is not in that model.

use crate::agreement::{PublishedTable, Rater};
use crate::ingest::read_rater;

const TABLE2: &str = include_str!("../fixtures/table2.csv");
const TABLE6: &str = include_str!("../fixtures/table6.csv");
const TABLE7: &str = include_str!("../fixtures/table7.csv");
const TABLE3: &str = include_str!("../fixtures/table3.csv");
const JB_NS: &str = include_str!("../fixtures/jb_ns.csv");
const SW_PER2: &str = include_str!("../fixtures/sw_per2.csv");

fn table(text: &str, label: &str) -> PublishedTable {
    PublishedTable::read(text.as_bytes(), label).expect("bundled table parses")
}

/// Full entry model: PROBIT, XTPROBIT, RELOGIT on the full sample, then
/// PROBIT before and after the merger.
pub fn full_model_table() -> PublishedTable {
    table(TABLE2, "table2")
}

/// Southwest-style benchmark specification over the eight sample splits.
pub fn southwest_table() -> PublishedTable {
    table(TABLE6, "table6")
}

/// JetBlue-style benchmark specification over the eight sample splits.
pub fn jetblue_table() -> PublishedTable {
    table(TABLE7, "table7")
}

/// Published κ grid, subjects by benchmark raters.
pub fn kappa_table() -> PublishedTable {
    table(TABLE3, "table3")
}

/// Benchmark rater of the JetBlue study, non-stop routes.
pub fn jetblue_rater() -> Rater {
    read_rater(JB_NS.as_bytes(), "jb_ns.csv".as_ref(), "JB(NS)").expect("bundled rater parses")
}

/// Benchmark rater of the Southwest study, second period.
pub fn southwest_rater() -> Rater {
    read_rater(SW_PER2.as_bytes(), "sw_per2.csv".as_ref(), "SW(PER2)").expect("bundled rater parses")
}

/// Subject labels of the kappa grid with their column in the split tables.
pub const SPLIT_COLUMNS: [(&str, usize); 7] = [
    ("AZ(BEF)", 2),
    ("AZ(BEF,EXIST)", 4),
    ("AZ(BEF,NEW)", 6),
    ("AZ(AFT,EXIST)", 5),
    ("AZ(AFT,NEW)", 7),
    ("AZ(AFT)", 3),
    ("AZ(FULL)", 1),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shapes() {
        let t2 = full_model_table();
        assert_eq!(t2.columns.len(), 5);
        assert_eq!(t2.variables.len(), 32);
        assert_eq!(southwest_table().variables.len(), 25);
        assert_eq!(jetblue_table().variables.len(), 22);
        assert_eq!(kappa_table().columns.len(), 5);
        assert_eq!(jetblue_rater().len(), 17);
        assert_eq!(southwest_rater().len(), 20);
        for (label, col) in SPLIT_COLUMNS {
            assert!(southwest_table().columns[col].ends_with(label));
        }
    }
}
