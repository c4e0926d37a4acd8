use routentry::agreement::{
    agreement_matrix, align_raters, cohen_kappa, kappa_grid, kappa_test, sign_flips, PublishedCell, RatingClass,
};
use routentry::fixtures::{
    full_model_table, jetblue_rater, jetblue_table, kappa_table, southwest_rater, southwest_table, SPLIT_COLUMNS,
};

const BEF: usize = 3;
const AFT: usize = 4;

#[test]
fn before_after_kappa_at_ten_percent() {
    let t = full_model_table();
    let a = t.classify(BEF, 0.10).unwrap();
    let b = t.classify(AFT, 0.10).unwrap();
    assert_eq!(a.len(), 31, "BANKR is dropped before the merger");
    assert_eq!(b.len(), 32);
    let al = align_raters(&a, &b).unwrap();
    assert_eq!(al.pairs.len(), 31);
    assert_eq!(al.only_b, vec!["BANKR"]);
    let k = cohen_kappa(&al.pairs).unwrap();
    assert_eq!(k.po, 12.0 / 31.0);
    assert!((k.pe - 322.0 / 961.0).abs() < 1e-15);
    assert!((0.075..=0.090).contains(&k.kappa), "kappa {}", k.kappa);
    assert_eq!(k.label, "slight");
    assert!((0.10..0.15).contains(&k.asymptotic.cohen));
}

#[test]
fn before_after_agreement_cells() {
    let t = full_model_table();
    let m = agreement_matrix(&t.classify(BEF, 0.10).unwrap(), &t.classify(AFT, 0.10).unwrap()).unwrap();
    let mut diag: Vec<&str> = m.agreements();
    diag.sort_unstable();
    assert_eq!(
        diag,
        vec!["AZSHCON", "HHI", "INC", "LCCCOMP", "LCCMAJ", "MAXHHI", "NETWEC", "NEW", "PAX", "REGSMA", "UNEMPL", "ZERAZCIT"]
    );
    assert_eq!(m.total(), 31);
}

#[test]
fn before_after_bootstrap() {
    let t = full_model_table();
    let al = align_raters(&t.classify(BEF, 0.10).unwrap(), &t.classify(AFT, 0.10).unwrap()).unwrap();
    let k = kappa_test(&al.pairs, 2000, 20180101).unwrap();
    let se = k.se.unwrap();
    assert!((0.08..=0.17).contains(&se), "se {se}");
    assert!(!k.bootstrap.as_ref().unwrap().unreliable);
    let again = kappa_test(&al.pairs, 2000, 20180101).unwrap();
    assert_eq!(k.to_json().unwrap(), again.to_json().unwrap());
}

#[test]
fn sign_flips_between_periods() {
    let t = full_model_table();
    let r = sign_flips(&t.rated(BEF, 0.10), &t.rated(AFT, 0.10)).unwrap();
    assert_eq!(r.raw_total, 31);
    assert_eq!(r.raw_flips.len(), 11);
    assert_eq!(r.classified_total, 15);
    assert_eq!(r.classified_flips.len(), 6);
    assert!((r.classified_share() * 100.0 - 42.0).abs() <= 2.0);
}

/// Published κ of the reconstructible benchmark columns, at α = 0.05.
#[test]
fn published_kappa_grid_reproduces() {
    let published = kappa_table();
    let subjects = |table: &routentry::agreement::PublishedTable| -> Vec<(String, routentry::agreement::Rater)> {
        SPLIT_COLUMNS
            .iter()
            .map(|(label, col)| (label.to_string(), table.classify(*col, 0.05).unwrap()))
            .collect()
    };
    let checks = [
        (jetblue_table(), jetblue_rater(), "JB(NS)"),
        (southwest_table(), southwest_rater(), "SW(PER2)"),
    ];
    for (table, bench, name) in checks {
        let grid = kappa_grid(&subjects(&table), &[(name.to_string(), bench)], 200, 1);
        let col = published.column_index(name).unwrap();
        for (row, (label, _)) in SPLIT_COLUMNS.iter().enumerate() {
            let PublishedCell::Estimate { value, .. } = published.cells[row][col] else {
                panic!("published cell missing");
            };
            assert_eq!(&published.variables[row], label);
            let k = grid.get(label, name).unwrap();
            assert!((k.kappa - value).abs() < 5e-4, "{label} vs {name}: {} vs {value}", k.kappa);
        }
    }
}

#[test]
fn subject_rows_cover_benchmark_variables() {
    let bench = southwest_rater();
    let bef = southwest_table().classify(2, 0.05).unwrap();
    let al = align_raters(&bef, &bench).unwrap();
    assert_eq!(al.pairs.len(), 20);
    assert!(al.only_b.is_empty());
    assert_eq!(bench.get("MAXHHI_X_BIG"), Some(RatingClass::SignificantNegative));
}
