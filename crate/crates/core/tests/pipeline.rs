use std::time::Instant;

use routentry::covariates::{
    assemble_design, presets, CarrierRoles, CovariateCatalog, CovariateOptions, CovariateSource, Variable,
};
use routentry::estimators::{fit, Estimator, ModelSpec};
use routentry::ingest::{InputPaths, YearWindow};
use routentry::panel::{build_panel, PanelConfig};
use routentry::synth::{make_panel_fixture, PanelFixtureConfig};

fn full_model() -> Vec<String> {
    presets::FULL_MODEL.iter().map(|v| v.label().to_string()).collect()
}

#[test]
fn default_fixture_panel_arithmetic() {
    let started = Instant::now();
    let fx = make_panel_fixture(&PanelFixtureConfig::new(7)).unwrap();
    let config = PanelConfig::new(YearWindow::new(2008, 2018).unwrap());
    let panel = build_panel(&fx.tables.airports, &fx.tables.flights, &config).unwrap();
    let m = &panel.meta;
    assert_eq!(m.enumerated_pairs, 97_032);
    assert_eq!(m.retained_pairs, 95_698);
    assert_eq!(m.observations, 1_052_678);
    let split = m.split.unwrap();
    assert_eq!((split.before, split.after), (382_792, 669_886));
    assert_eq!(panel.entry_count(), fx.truth.subject_entries);
    assert!(started.elapsed().as_secs() < 60);
    eprintln!(
        "entries {} flights {} connections {} exist {}",
        panel.entry_count(),
        fx.tables.flights.len(),
        fx.tables.connections.len(),
        panel.observations.iter().filter(|o| o.exist).count() / 11
    );
}

#[test]
fn four_year_fixture() {
    let mut c = PanelFixtureConfig::new(3);
    c.years = 4;
    let fx = make_panel_fixture(&c).unwrap();
    let mut config = PanelConfig::new(YearWindow::new(2008, 2011).unwrap());
    config.merger_year = None;
    let panel = build_panel(&fx.tables.airports, &fx.tables.flights, &config).unwrap();
    assert_eq!(panel.meta.observations, 382_792);
}

#[test]
fn no_close_pairs_keeps_everything() {
    let mut c = PanelFixtureConfig::new(5);
    c.airports = 40;
    c.out_of_range_pairs = 0;
    c.years = 3;
    let fx = make_panel_fixture(&c).unwrap();
    let config = PanelConfig::new(YearWindow::new(2008, 2010).unwrap());
    let panel = build_panel(&fx.tables.airports, &fx.tables.flights, &config).unwrap();
    assert_eq!(panel.meta.retained_pairs, panel.meta.enumerated_pairs);
    assert_eq!(panel.meta.enumerated_pairs, 40 * 39);
}

#[test]
fn infeasible_requests_fail() {
    let mut c = PanelFixtureConfig::new(5);
    c.airports = 10;
    c.out_of_range_pairs = 200;
    assert!(make_panel_fixture(&c).is_err());
    c.out_of_range_pairs = 3;
    assert!(make_panel_fixture(&c).is_err());
    let mut c = PanelFixtureConfig::new(5);
    c.airports = 2000;
    assert!(make_panel_fixture(&c).is_err());
}

#[test]
fn fixture_round_trips_through_files() {
    let mut c = PanelFixtureConfig::new(9);
    c.airports = 30;
    c.out_of_range_pairs = 6;
    c.years = 3;
    let fx = make_panel_fixture(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    fx.write(dir.path()).unwrap();
    assert!(dir.path().join("truth.json").exists());
    let tables = InputPaths::in_dir(dir.path()).load(YearWindow::new(2007, 2010).unwrap()).unwrap();
    assert_eq!(tables.flights, fx.tables.flights);
    assert_eq!(tables.airports.len(), 30);
}

#[test]
fn full_model_fits_on_small_fixture() {
    let mut c = PanelFixtureConfig::new(11);
    c.airports = 150;
    c.out_of_range_pairs = 30;
    let fx = make_panel_fixture(&c).unwrap();
    let config = PanelConfig::new(YearWindow::new(2008, 2018).unwrap());
    let panel = build_panel(&fx.tables.airports, &fx.tables.flights, &config).unwrap();
    let catalog =
        CovariateCatalog::build(&panel, &fx.tables, &CarrierRoles::default(), &CovariateOptions::default()).unwrap();
    assert!(Variable::ALL.iter().all(|v| catalog.has(*v)));
    for est in [Estimator::Probit, Estimator::Relogit, Estimator::Xtprobit] {
        let spec = ModelSpec::new(est.to_string(), est, full_model());
        let d = assemble_design(&catalog, &spec).unwrap();
        let f = fit(&d, &spec).unwrap();
        eprintln!(
            "{est}: n {} entries {} lnL {:.2} dropped {:?} iters {} rule {}",
            f.n,
            f.positives,
            f.log_likelihood,
            f.dropped.iter().map(|d| d.name.as_str()).collect::<Vec<_>>(),
            f.diagnostics.iterations,
            f.diagnostics.stopping_rule
        );
        assert_eq!(f.n, panel.meta.observations);
        assert!(f.log_likelihood > f.null_log_likelihood);
    }
}
