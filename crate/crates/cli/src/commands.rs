use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use routentry::agreement::{agreement_matrix, align_raters, kappa_grid, kappa_test, sign_flips, Rater, DEFAULT_ALPHA};
use routentry::covariates::{
    assemble_design, CarrierRoles, CatalogTable, CovariateCatalog, CovariateOptions, CovariateSource, DesignMatrix,
    Variable, INTERCEPT,
};
use routentry::estimators::{fit, write_comparison_csv, FitResult, SpecFile};
use routentry::ingest::{
    load_airports, load_cities, load_connections, load_flights, load_regions, save_rater, InputTables, YearWindow,
};
use routentry::panel::{build_panel, Panel, PanelConfig};
use routentry::synth::{generate, make_panel_fixture, PanelFixtureConfig, SynthConfig, SynthLink};

use crate::manifest::{ManifestBuilder, RunManifest};
use crate::sources::Source;

#[derive(Debug, Parser)]
#[command(name = "routentry", version, about = "Route-entry panels, binary-choice fits and rater agreement")]
pub struct Cli {
    /// Output directory; created when missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the balanced directional airport-pair panel.
    BuildPanel(BuildPanelArgs),
    /// Compute every regressor for every panel row.
    Covariates(CovariatesArgs),
    /// Fit the models of a spec file.
    Fit(FitArgs),
    /// Turn fits or coefficient-table columns into rater files.
    Classify(ClassifyArgs),
    /// Cohen's kappa between two raters, or a grid of them.
    Kappa(KappaArgs),
    /// Generate synthetic inputs with known truth.
    Synth(SynthArgs),
    /// Comparison tables and sign-flip counts.
    Report(ReportArgs),
    /// Re-run a recorded invocation.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Directory holding flights.csv, airports.csv, cities.csv,
    /// airport_regions.csv and optionally connections.csv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub flights: Option<PathBuf>,
    #[arg(long)]
    pub airports: Option<PathBuf>,
    #[arg(long)]
    pub cities: Option<PathBuf>,
    #[arg(long)]
    pub regions: Option<PathBuf>,
    #[arg(long)]
    pub connections: Option<PathBuf>,
    /// Sample years, `A:B`.
    #[arg(long, default_value = "2008:2018")]
    pub years: YearWindow,
    #[arg(long, default_value_t = 2007)]
    pub base_year: i32,
    /// Year the before/after split starts; ignored outside the window.
    #[arg(long, default_value_t = 2012)]
    pub merger_year: i32,
}

impl InputArgs {
    fn path(&self, explicit: &Option<PathBuf>, file: &str, flag: &str) -> Result<PathBuf> {
        match (explicit, &self.data) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(d)) => Ok(d.join(file)),
            (None, None) => bail!("--{flag} (or --data DIR) is required"),
        }
    }

    fn connections_path(&self) -> Option<PathBuf> {
        self.connections
            .clone()
            .or_else(|| self.data.as_ref().map(|d| d.join("connections.csv")).filter(|p| p.exists()))
    }

    fn load_window(&self) -> Result<YearWindow> {
        Ok(YearWindow::new(self.years.first.min(self.base_year), self.years.last)?)
    }

    fn panel_config(&self) -> PanelConfig {
        let mut c = PanelConfig::new(self.years);
        c.base_year = Some(self.base_year);
        c.merger_year = Some(self.merger_year);
        c
    }

    /// Flights and airports only.
    fn load_panel_inputs(&self, m: &mut ManifestBuilder) -> Result<InputTables> {
        let window = self.load_window()?;
        let flights = self.path(&self.flights, "flights.csv", "flights")?;
        let airports = self.path(&self.airports, "airports.csv", "airports")?;
        let loaded = load_flights(&flights, window)?;
        let airports_rows = load_airports(&airports)?;
        m.input(&flights)?;
        m.input(&airports)?;
        Ok(InputTables {
            flight_rejects: loaded.rejected.len(),
            flights: loaded.records,
            airports: airports_rows,
            cities: Vec::new(),
            regions: Default::default(),
            connections: Vec::new(),
        })
    }

    fn load_all(&self, m: &mut ManifestBuilder) -> Result<InputTables> {
        let window = self.load_window()?;
        let mut t = self.load_panel_inputs(m)?;
        let cities = self.path(&self.cities, "cities.csv", "cities")?;
        let regions = self.path(&self.regions, "airport_regions.csv", "regions")?;
        t.cities = load_cities(&cities)?;
        t.regions = load_regions(&regions)?;
        m.input(&cities)?;
        m.input(&regions)?;
        if let Some(c) = self.connections_path() {
            t.connections = load_connections(&c, window)?.records;
            m.input(&c)?;
        }
        Ok(t)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BuildPanelArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CovariatesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Spec file whose `[carriers]` and `[covariates]` tables apply.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub spec: PathBuf,
    /// A catalog written by `covariates`; replaces the raw inputs.
    #[arg(long, conflicts_with = "design")]
    pub catalog: Option<PathBuf>,
    /// A design written by `synth design`; models use its columns directly.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Overrides every model's α.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// `LABEL=SOURCE` or `SOURCE`; repeatable.
    #[arg(long = "source", required = true)]
    pub sources: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct KappaArgs {
    /// First rater source.
    #[arg(long, requires = "b", conflicts_with_all = ["rows", "columns"])]
    pub a: Option<String>,
    /// Second rater source.
    #[arg(long, requires = "a")]
    pub b: Option<String>,
    /// Grid rows: `LABEL=SOURCE` entries or one directory of sources.
    #[arg(long = "row", requires = "columns")]
    pub rows: Vec<String>,
    /// Grid columns: `LABEL=SOURCE` entries or one directory of sources.
    #[arg(long = "column", requires = "rows")]
    pub columns: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Bootstrap replications; 0 reports only asymptotic errors.
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SynthKind {
    /// An airport network and traffic tables with the panel's counting arithmetic.
    Panel {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 312)]
        airports: usize,
        #[arg(long, default_value_t = 1334)]
        out_of_range_pairs: usize,
        #[arg(long, default_value_t = 11)]
        years: usize,
        #[arg(long, default_value_t = 2008)]
        first_year: i32,
    },
    /// A design matrix drawn from a known binary-choice model.
    Design {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        /// Comma-separated slopes.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta: Vec<f64>,
        #[arg(long, value_enum, default_value_t = LinkArg::Probit)]
        link: LinkArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        intercept: f64,
        #[arg(long, default_value_t = 0)]
        groups: usize,
        #[arg(long, default_value_t = 0.0)]
        group_sd: f64,
        #[arg(long, default_value_t = 0)]
        dummies: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum LinkArg {
    Probit,
    Logit,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Fit JSONs or table columns, in column order; repeatable.
    #[arg(long = "source", required = true)]
    pub sources: Vec<String>,
    /// Count sign flips between the first two sources.
    #[arg(long)]
    pub flips: bool,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Run even when an input changed since the manifest was written.
    #[arg(long)]
    pub force: bool,
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    let started = Instant::now();
    let out = cli.out;
    if let Command::Replay(args) = &cli.command {
        return replay(args, &out);
    }
    fs::create_dir_all(&out).with_context(|| format!("{}: cannot create", out.display()))?;
    let m = match cli.command {
        Command::BuildPanel(a) => cmd_build_panel(&a, &out, argv)?,
        Command::Covariates(a) => cmd_covariates(&a, &out, argv)?,
        Command::Fit(a) => cmd_fit(&a, &out, argv)?,
        Command::Classify(a) => cmd_classify(&a, &out, argv)?,
        Command::Kappa(a) => cmd_kappa(&a, &out, argv)?,
        Command::Synth(a) => cmd_synth(&a, &out, argv)?,
        Command::Report(a) => cmd_report(&a, &out, argv)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    m.finish(started.elapsed().as_millis() as u64)?.write(&out)?;
    Ok(())
}

fn replay(args: &ReplayArgs, out: &Path) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    let changed = manifest.changed_inputs();
    if !changed.is_empty() && !args.force {
        bail!("inputs changed since the recorded run: {}", changed.join(", "));
    }
    // Recorded argv minus any --out, which the replay supplies.
    let mut argv = Vec::with_capacity(manifest.argv.len() + 2);
    let mut skip = false;
    for a in &manifest.argv {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        argv.push(a.clone());
    }
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(&argv).map_err(|e| anyhow!("recorded arguments no longer parse: {e}"))?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("a replay manifest cannot replay itself");
    }
    run(cli, argv)
}

fn config_of<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("{}: cannot create", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("{}: cannot write", path.display()))
}

fn write_panel(panel: &Panel, out: &Path) -> Result<()> {
    let mut w = create(&out.join("panel.csv"))?;
    panel.write_csv(&mut w)?;
    w.flush()?;
    write_json(&out.join("panel_meta.json"), &panel.meta)
}

fn cmd_build_panel(a: &BuildPanelArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new("build-panel", config_of(a)?, None, argv);
    let tables = a.input.load_panel_inputs(&mut m)?;
    let panel = build_panel(&tables.airports, &tables.flights, &a.input.panel_config())?;
    write_panel(&panel, out)?;
    let meta = &panel.meta;
    println!("airports            {}", meta.airports);
    println!("enumerated pairs    {}", meta.enumerated_pairs);
    println!("discarded pairs     {}", meta.discarded_pairs);
    println!("retained pairs      {}", meta.retained_pairs);
    println!("years               {} ({}-{})", meta.years, meta.first_year, meta.last_year);
    println!("observations        {}", meta.observations);
    if let Some(s) = meta.split {
        println!("before {}          {}", s.merger_year, s.before);
        println!("from {}            {}", s.merger_year, s.after);
    }
    println!("entries             {}", panel.entry_count());
    Ok(m)
}

fn spec_settings(spec: &Option<PathBuf>, m: &mut ManifestBuilder) -> Result<(CarrierRoles, CovariateOptions)> {
    match spec {
        Some(p) => {
            m.input(p)?;
            let text = fs::read_to_string(p).with_context(|| format!("{}: cannot read", p.display()))?;
            // Settings-only files have no [[model]]; accept them here.
            let s = match SpecFile::parse(&text) {
                Ok(s) => (s.carriers, s.covariates),
                Err(_) => {
                    let with_model = format!("{text}\n[[model]]\nestimator = \"PROBIT\"\n");
                    let s = SpecFile::parse(&with_model).with_context(|| format!("{}", p.display()))?;
                    (s.carriers, s.covariates)
                }
            };
            Ok(s)
        }
        None => Ok((CarrierRoles::default(), CovariateOptions::default())),
    }
}

fn cmd_covariates(a: &CovariatesArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new("covariates", config_of(a)?, None, argv);
    let (roles, options) = spec_settings(&a.spec, &mut m)?;
    let tables = a.input.load_all(&mut m)?;
    let panel = build_panel(&tables.airports, &tables.flights, &a.input.panel_config())?;
    let catalog = CovariateCatalog::build(&panel, &tables, &roles, &options)?;
    let mut w = create(&out.join("catalog.csv"))?;
    catalog.write_csv(&mut w)?;
    w.flush()?;
    write_json(&out.join("panel_meta.json"), &panel.meta)?;
    write_json(&out.join("catalog_notes.json"), &catalog.notes())?;
    println!("catalog rows {} written to {}", panel.meta.observations, out.join("catalog.csv").display());
    Ok(m)
}

fn fit_all(source: &dyn CovariateSource, spec: &SpecFile, alpha: Option<f64>) -> Result<Vec<FitResult>> {
    let mut fits = Vec::with_capacity(spec.models.len());
    for model in &spec.models {
        let mut model = model.clone();
        if let Some(a) = alpha {
            model.alpha = a;
            model.validate()?;
        }
        let design = assemble_design(source, &model).with_context(|| format!("model '{}'", model.name))?;
        let f = fit(&design, &model).with_context(|| format!("model '{}'", model.name))?;
        eprintln!(
            "{}: n {} entries {} lnL {:.3} ({} iterations, {})",
            f.name, f.n, f.positives, f.log_likelihood, f.diagnostics.iterations, f.diagnostics.stopping_rule
        );
        fits.push(f);
    }
    Ok(fits)
}

/// Reads `y,cluster,group,<regressors>` as written by `synth design`.
fn load_design(path: &Path) -> Result<DesignMatrix> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("{}: cannot open", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 4 || header[..3] != ["y", "cluster", "group"] {
        bail!("{}: expected header y,cluster,group,<regressors>", path.display());
    }
    let (mut x, mut y, mut clusters, mut groups) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = || anyhow!("{}: line {}: malformed row", path.display(), i + 2);
        y.push(rec[0].parse::<f64>().map_err(|_| bad())?);
        clusters.push(rec[1].parse::<u32>().map_err(|_| bad())?);
        groups.push(rec[2].parse::<u32>().map_err(|_| bad())?);
        for v in rec.iter().skip(3) {
            x.push(v.parse::<f64>().map_err(|_| bad())?);
        }
    }
    Ok(DesignMatrix::new(header[3..].to_vec(), x, y, clusters)?.with_groups(groups)?)
}

/// Fits each model on the columns it names (all when it names none).
fn fit_design(d: &DesignMatrix, spec: &SpecFile, alpha: Option<f64>) -> Result<Vec<FitResult>> {
    let mut fits = Vec::with_capacity(spec.models.len());
    for model in &spec.models {
        let mut model = model.clone();
        if let Some(a) = alpha {
            model.alpha = a;
            model.validate()?;
        }
        let design = if model.variables.is_empty() {
            d.clone()
        } else {
            let mut keep = Vec::new();
            let mut unknown = Vec::new();
            if model.intercept {
                keep.extend(d.column_index(INTERCEPT));
            }
            for v in &model.variables {
                match d.column_index(v) {
                    Some(j) => keep.push(j),
                    None => unknown.push(v.clone()),
                }
            }
            if !unknown.is_empty() {
                return Err(routentry::Error::UnknownVariable(unknown).into());
            }
            d.select_columns(&keep)
        };
        fits.push(fit(&design, &model).with_context(|| format!("model '{}'", model.name))?);
    }
    Ok(fits)
}

fn spec_variables(spec: &SpecFile) -> Result<Vec<Variable>> {
    let mut vars = Vec::new();
    let mut unknown = Vec::new();
    for name in spec.models.iter().flat_map(|m| &m.variables) {
        match Variable::from_name(name) {
            Some(v) if !vars.contains(&v) => vars.push(v),
            Some(_) => {}
            None if !unknown.contains(name) => unknown.push(name.clone()),
            None => {}
        }
    }
    if !unknown.is_empty() {
        return Err(routentry::Error::UnknownVariable(unknown).into());
    }
    Ok(vars)
}

fn cmd_fit(a: &FitArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new("fit", config_of(a)?, None, argv);
    m.input(&a.spec)?;
    let spec = SpecFile::load(&a.spec)?;
    let fits = match (&a.catalog, &a.design) {
        (_, Some(path)) => {
            m.input(path)?;
            fit_design(&load_design(path)?, &spec, a.alpha)?
        }
        (Some(path), None) => {
            let vars = spec_variables(&spec)?;
            m.input(path)?;
            let table = CatalogTable::load(path, Some(&vars))?;
            fit_all(&table, &spec, a.alpha)?
        }
        (None, None) => {
            spec_variables(&spec)?;
            let tables = a.input.load_all(&mut m)?;
            let panel = build_panel(&tables.airports, &tables.flights, &a.input.panel_config())?;
            let catalog = CovariateCatalog::build(&panel, &tables, &spec.carriers, &spec.covariates)?;
            fit_all(&catalog, &spec, a.alpha)?
        }
    };
    for (i, f) in fits.iter().enumerate() {
        let stem = format!("fit_{:02}", i + 1);
        fs::write(out.join(format!("{stem}.json")), f.to_json()? + "\n")?;
        let mut w = create(&out.join(format!("{stem}.csv")))?;
        f.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut w = create(&out.join("comparison.csv"))?;
    write_comparison_csv(&fits, &mut w)?;
    w.flush()?;
    Ok(m)
}

/// `LABEL=SOURCE` or bare `SOURCE`, whose label is then its text.
fn labelled(text: &str) -> Result<(String, Source)> {
    match text.split_once('=') {
        Some((label, src)) if !label.is_empty() => Ok((label.to_string(), Source::parse(src)?)),
        _ => Ok((text.to_string(), Source::parse(text)?)),
    }
}

/// Expands a lone directory argument into its `.json`/`.csv` files, sorted,
/// labelled by file stem.
fn expand(entries: &[String]) -> Result<Vec<(String, Source)>> {
    if let [one] = entries {
        let p = Path::new(one);
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("{}: cannot list", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| matches!(f.extension().and_then(|e| e.to_str()), Some("json" | "csv")))
                .filter(|f| f.file_name().is_some_and(|n| n != crate::manifest::FILE_NAME))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("{}: no rater sources", p.display());
            }
            return files
                .into_iter()
                .map(|f| {
                    let label = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    Ok((label, Source::parse(&f.to_string_lossy())?))
                })
                .collect();
        }
    }
    entries.iter().map(|e| labelled(e)).collect()
}

fn record_source(m: &mut ManifestBuilder, s: &Source) -> Result<()> {
    match s.input_path() {
        Some(p) => m.input(p),
        None => Ok(()),
    }
}

fn safe_file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

fn cmd_classify(a: &ClassifyArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new("classify", config_of(a)?, None, argv);
    for text in &a.sources {
        let (label, src) = labelled(text)?;
        record_source(&mut m, &src)?;
        let rater = src.rater(a.alpha)?;
        let path = out.join(format!("{}.csv", safe_file_stem(&label)));
        save_rater(&path, &rater)?;
        let [neg, ns, pos] = rater.marginals();
        println!("{label}: {} variables ({neg} NEG, {ns} NS, {pos} POS) -> {}", rater.len(), path.display());
    }
    Ok(m)
}

fn cmd_kappa(a: &KappaArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    if a.reps > 0 && a.seed.is_none() {
        bail!("--seed is required when --reps is positive");
    }
    let seed = a.seed.unwrap_or(0);
    let mut m = ManifestBuilder::new("kappa", config_of(a)?, a.seed, argv);
    if let (Some(sa), Some(sb)) = (&a.a, &a.b) {
        let (sa, sb) = (Source::parse(sa)?, Source::parse(sb)?);
        record_source(&mut m, &sa)?;
        record_source(&mut m, &sb)?;
        let (ra, rb) = (sa.rater(a.alpha)?, sb.rater(a.alpha)?);
        let al = align_raters(&ra, &rb)?;
        let k = kappa_test(&al.pairs, a.reps, seed)?;
        fs::write(out.join("kappa.json"), k.to_json()? + "\n")?;
        let matrix = agreement_matrix(&ra, &rb)?;
        let mut w = create(&out.join("agreement.csv"))?;
        matrix.write_csv(&mut w)?;
        w.flush()?;
        let text = matrix.to_text();
        fs::write(out.join("agreement.txt"), &text)?;
        write_json(
            &out.join("alignment.json"),
            &serde_json::json!({ "only_a": al.only_a, "only_b": al.only_b }),
        )?;
        println!("N {}  Po {:.4}  Pe {:.4}  kappa {:.4}{}  ({})", k.n, k.po, k.pe, k.kappa, k.stars(), k.label);
        if let (Some(se), Some(p)) = (k.se, k.p) {
            println!("bootstrap SE {se:.4}  p {p:.4}");
        }
        print!("{text}");
        return Ok(m);
    }
    if a.rows.is_empty() {
        bail!("give --a/--b or --row/--column");
    }
    let load = |entries: &[String], m: &mut ManifestBuilder| -> Result<Vec<(String, Rater)>> {
        expand(entries)?
            .into_iter()
            .map(|(label, src)| {
                record_source(m, &src)?;
                Ok((label, src.rater(a.alpha)?))
            })
            .collect()
    };
    let rows = load(&a.rows, &mut m)?;
    let columns = load(&a.columns, &mut m)?;
    let grid = kappa_grid(&rows, &columns, a.reps, seed);
    let mut w = create(&out.join("kappa_grid.csv"))?;
    grid.write_csv(&mut w)?;
    w.flush()?;
    write_json(&out.join("kappa_grid.json"), &grid)?;
    for (name, row) in grid.rows.iter().zip(&grid.cells) {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Ok(k) => format!("{:>9}", format!("{:.3}{}", k.kappa, k.stars())),
                Err(_) => format!("{:>9}", "n/a"),
            })
            .collect();
        println!("{name:<16}{}", cells.join(""));
    }
    Ok(m)
}

fn cmd_synth(a: &SynthArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    match &a.kind {
        SynthKind::Panel {
            seed,
            airports,
            out_of_range_pairs,
            years,
            first_year,
        } => {
            let m = ManifestBuilder::new("synth panel", config_of(a)?, Some(*seed), argv);
            let config = PanelFixtureConfig {
                airports: *airports,
                out_of_range_pairs: *out_of_range_pairs,
                years: *years,
                first_year: *first_year,
                seed: *seed,
            };
            let fx = make_panel_fixture(&config)?;
            fx.write(out)?;
            println!(
                "{} airports, {} retained pairs, {} observations, {} subject entries",
                airports, fx.truth.retained_pairs, fx.truth.observations, fx.truth.subject_entries
            );
            Ok(m)
        }
        SynthKind::Design {
            seed,
            n,
            beta,
            link,
            intercept,
            groups,
            group_sd,
            dummies,
        } => {
            let m = ManifestBuilder::new("synth design", config_of(a)?, Some(*seed), argv);
            let link = match link {
                LinkArg::Probit => SynthLink::Probit,
                LinkArg::Logit => SynthLink::Logit,
            };
            let mut config = SynthConfig::new(*n, beta.clone(), link, *seed);
            config.intercept = *intercept;
            config.groups = *groups;
            config.group_sd = *group_sd;
            config.dummies = *dummies;
            let (d, truth) = generate(&config)?;
            let mut w = create(&out.join("design.csv"))?;
            write!(w, "y,cluster,group")?;
            for name in &d.names {
                write!(w, ",{name}")?;
            }
            writeln!(w)?;
            for i in 0..d.n {
                write!(w, "{},{},{}", d.y[i], d.clusters[i], d.groups[i])?;
                for x in d.row(i) {
                    write!(w, ",{x}")?;
                }
                writeln!(w)?;
            }
            w.flush()?;
            fs::write(out.join("truth.json"), truth.to_json()? + "\n")?;
            println!("{} rows, {} positives ({:.4})", d.n, truth.positives, truth.positive_rate);
            Ok(m)
        }
    }
}

fn cmd_report(a: &ReportArgs, out: &Path, argv: Vec<String>) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new("report", config_of(a)?, None, argv);
    let sources: Vec<(String, Source)> = a.sources.iter().map(|s| labelled(s)).collect::<Result<_>>()?;
    for (_, s) in &sources {
        record_source(&mut m, s)?;
    }
    let fits: Vec<FitResult> = sources
        .iter()
        .filter_map(|(_, s)| match s {
            Source::Fit(p) => Some(FitResult::load(p)),
            _ => None,
        })
        .collect::<routentry::Result<_>>()?;
    if fits.len() == sources.len() {
        let mut w = create(&out.join("comparison.csv"))?;
        write_comparison_csv(&fits, &mut w)?;
        w.flush()?;
        println!("comparison of {} fits -> {}", fits.len(), out.join("comparison.csv").display());
    } else if !a.flips {
        bail!("a comparison table needs fit JSONs only; use --flips for table columns");
    }
    if a.flips {
        let [(la, sa), (lb, sb)] = &sources[..] else {
            bail!("--flips needs exactly two sources");
        };
        let r = sign_flips(&sa.estimates(a.alpha)?, &sb.estimates(a.alpha)?)?;
        write_json(
            &out.join("sign_flips.json"),
            &serde_json::json!({
                "a": la,
                "b": lb,
                "alpha": a.alpha,
                "raw_total": r.raw_total,
                "raw_flips": r.raw_flips,
                "raw_share": r.raw_share(),
                "classified_total": r.classified_total,
                "classified_flips": r.classified_flips,
                "classified_share": r.classified_share(),
            }),
        )?;
        println!(
            "sign flips: {}/{} coefficients ({:.1}%); {}/{} among those significant in both ({:.1}%)",
            r.raw_flips.len(),
            r.raw_total,
            100.0 * r.raw_share(),
            r.classified_flips.len(),
            r.classified_total,
            100.0 * r.classified_share()
        );
    }
    Ok(m)
}
