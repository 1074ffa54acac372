// SPDX-License-Identifier: Apache-2.0

//! `chipdse` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chipdse::costyield::package_cost;
use chipdse::model::{load_document, DesignSpec};
use chipdse::perf::{rank_configs, service_latency, throughput, ConfigMetrics};
use chipdse::phy::{
    bandwidth_curve, curve_crossing, linspace, max_trace_length, PhyTargets, TraceGeometry,
};
use chipdse::place::{
    bst_placement, calibrate_k, interposer_sweep, optimize, AnnealConfig, Floorplan,
};
use chipdse::power::system_power;
use chipdse::report::{self, fmt_num, Table};
use chipdse::thermal::{
    compare_soc_vs_chiplet, rasterize, soc_vs_chiplet_plans, solve_steady_state, ThermalStack,
};
use clap::{Args, Parser, Subcommand};

use manifest::{redirect_out, InputFile, RunManifest, MANIFEST_FILE};

#[derive(Parser, Debug)]
#[command(
    name = "chipdse",
    version,
    about = "Chiplet package design-space exploration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Design spec (JSON).
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Annealing seed; overrides `anneal.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Thermal grid cell size in mm.
    #[arg(long, value_name = "MM")]
    resolution: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Die and package cost report.
    Cost(CostArgs),
    /// Per-tile power breakdown.
    Power(PlainArgs),
    /// Golden-ratio ranking of configurations.
    Perf(PerfArgs),
    /// Interconnect bandwidth against trace length.
    Phy(PhyArgs),
    /// Steady-state temperature field of a floorplan.
    Thermal(ThermalArgs),
    /// Thermal-aware placement by simulated annealing.
    Place(PlaceArgs),
    /// Convergence of the annealer over several initial K values.
    #[command(name = "calibrate-k")]
    CalibrateK(CalibrateArgs),
    /// Optimized peak temperature over square interposer sizes.
    Sweep(SweepArgs),
    /// Repeat a recorded run after checking its inputs are unchanged.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
struct PlainArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CostArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    wafer_cost: Option<f64>,
    /// mm
    #[arg(long)]
    wafer_diameter: Option<f64>,
    /// Defects per mm².
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    alpha_yield: Option<f64>,
    #[arg(long)]
    n_connections: Option<u64>,
    /// Monolithic die area in mm² to compare against.
    #[arg(long)]
    soc_area: Option<f64>,
}

#[derive(Args, Debug)]
struct PerfArgs {
    #[command(flatten)]
    common: Common,
    /// CSV with columns name,cost,throughput,latency; replaces the design's configs.
    #[arg(long, value_name = "PATH")]
    configs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhyArgs {
    #[command(flatten)]
    common: Common,
    /// Clock frequency in Hz.
    #[arg(long)]
    clock: Option<f64>,
    /// Bandwidth safety factor.
    #[arg(long)]
    sf: Option<f64>,
    /// mm
    #[arg(long)]
    trace_width: Option<f64>,
    /// mm
    #[arg(long)]
    trace_thickness: Option<f64>,
    /// mm
    #[arg(long)]
    ground_thickness: Option<f64>,
    /// Dielectric height in mm.
    #[arg(long)]
    interposer_height: Option<f64>,
    #[arg(long)]
    permittivity: Option<f64>,
    /// S/m
    #[arg(long)]
    conductivity: Option<f64>,
    /// Curve start, mm.
    #[arg(long, default_value_t = 1.0)]
    min_length: f64,
    /// Curve end, mm.
    #[arg(long, default_value_t = 100.0)]
    max_length: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Args, Debug)]
struct ThermalArgs {
    #[command(flatten)]
    common: Common,
    /// Floorplan document to solve; defaults to the initial packing.
    #[arg(long, value_name = "PATH", conflicts_with = "compare_soc")]
    floorplan: Option<PathBuf>,
    /// Compare one monolithic die against four spaced chiplets at equal power.
    #[arg(long)]
    compare_soc: bool,
    /// Interposer side for the comparison, mm.
    #[arg(long, default_value_t = 45.0)]
    interposer: f64,
    /// W
    #[arg(long, default_value_t = 120.0)]
    total_power: f64,
    /// mm²; defaults to `process.soc_area`, else 858.
    #[arg(long)]
    soc_area: Option<f64>,
    /// mm²
    #[arg(long, default_value_t = 170.0)]
    chiplet_area: f64,
    /// mm
    #[arg(long, default_value_t = 4.0)]
    gap: f64,
}

#[derive(Args, Debug)]
struct AnnealOverrides {
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    moves_per_iteration: Option<usize>,
    /// Cell size in mm used while annealing.
    #[arg(long)]
    coarse_resolution: Option<f64>,
}

#[derive(Args, Debug)]
struct PlaceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    anneal: AnnealOverrides,
    /// Square interposer side in mm, replacing the package's.
    #[arg(long)]
    interposer: Option<f64>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    anneal: AnnealOverrides,
    /// Initial K values to try.
    #[arg(
        long = "k0-values",
        value_delimiter = ',',
        default_value = "0.01,0.03,0.1,0.3,1"
    )]
    k0_values: Vec<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    anneal: AnnealOverrides,
    /// Square interposer sides in mm.
    #[arg(long, value_delimiter = ',', default_value = "30,35,40,45,50")]
    sides: Vec<f64>,
}

#[derive(Args, Debug)]
struct RerunArgs {
    #[arg(long, value_name = "PATH")]
    manifest: PathBuf,
    /// Output directory for the repeated run.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// Collects outputs and provenance for one run.
struct Run {
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn new(subcommand: &str, common: &Common, args: Vec<String>) -> Result<Self> {
        std::fs::create_dir_all(&common.out)
            .with_context(|| format!("creating output directory `{}`", common.out.display()))?;
        Ok(Run {
            out: common.out.clone(),
            manifest: RunManifest::new(subcommand, args),
        })
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading `{}`", path.display()))?;
        self.manifest.inputs.push(InputFile::new(path, &bytes));
        String::from_utf8(bytes).with_context(|| format!("`{}` is not UTF-8", path.display()))
    }

    fn spec(&mut self, path: Option<&Path>) -> Result<DesignSpec> {
        let Some(path) = path else {
            bail!("--spec PATH is required");
        };
        let text = self.read(path)?;
        load_document(&text).with_context(|| format!("invalid spec `{}`", path.display()))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing `{}`", path.display()))?;
        self.manifest.outputs.push(name.into());
        Ok(())
    }

    fn finish(self) -> Result<()> {
        let path = self.out.join(MANIFEST_FILE);
        std::fs::write(&path, self.manifest.to_json())
            .with_context(|| format!("writing `{}`", path.display()))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(argv: Vec<String>) -> Result<()> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let args = argv[1..].to_vec();
    match cli.command {
        Command::Cost(a) => cost(a, args),
        Command::Power(a) => power(a, args),
        Command::Perf(a) => perf(a, args),
        Command::Phy(a) => phy(a, args),
        Command::Thermal(a) => thermal(a, args),
        Command::Place(a) => place(a, args),
        Command::CalibrateK(a) => calibrate(a, args),
        Command::Sweep(a) => sweep(a, args),
        Command::Rerun(a) => rerun(a),
    }
}

fn rerun(a: RerunArgs) -> Result<()> {
    let m = RunManifest::load(&a.manifest)?;
    if m.subcommand == "rerun" {
        bail!("manifest `{}` records a rerun", a.manifest.display());
    }
    for input in &m.inputs {
        input.verify()?;
    }
    let out = a
        .out
        .to_str()
        .context("output directory is not valid UTF-8")?;
    let mut argv = vec!["chipdse".to_string()];
    argv.extend(redirect_out(&m.args, out));
    run(argv)
}

fn csv(t: &Table) -> String {
    t.to_csv()
}

fn cost(a: CostArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("cost", &a.common, args)?;
    let doc = run.spec(a.common.spec.as_deref())?;
    let mut p = doc.cost.params;
    if let Some(v) = a.wafer_cost {
        p.wafer_cost = v;
    }
    if let Some(v) = a.wafer_diameter {
        p.wafer_diameter = v;
    }
    if let Some(v) = a.d0 {
        p.d0 = v;
    }
    if let Some(v) = a.alpha_yield {
        p.alpha_yield = v;
    }
    p.validate()?;
    let n_conn = a.n_connections.unwrap_or(doc.cost.n_connections);
    let names: Vec<String> = doc
        .package
        .chiplets
        .iter()
        .map(|c| c.name.clone())
        .collect();
    let dies: Vec<(f64, u64)> = doc.package.chiplets.iter().map(|c| (c.area(), 1)).collect();
    let split = package_cost(&dies, n_conn, &p)?;
    run.write("cost.csv", &csv(&report::cost_table(&names, &split)))?;
    println!("package_cost = {}", fmt_num(split.package_cost));
    if let Some(soc_area) = a.soc_area.or(doc.cost.soc_area) {
        let soc = package_cost(&[(soc_area, 1)], 0, &p)?;
        run.write(
            "soc_cost.csv",
            &csv(&report::cost_table(&["soc".into()], &soc)),
        )?;
        println!("soc_cost = {}", fmt_num(soc.package_cost));
        println!(
            "cost_ratio = {}",
            fmt_num(soc.package_cost / split.package_cost)
        );
    }
    run.finish()
}

fn power(a: PlainArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("power", &a.common, args)?;
    let doc = run.spec(a.common.spec.as_deref())?;
    if doc.tiles.is_empty() {
        bail!("spec has no `tiles`");
    }
    let sp = system_power(&doc.tiles)?;
    run.write("power.csv", &csv(&report::power_table(&sp)))?;
    println!("total_power_w = {}", fmt_num(sp.total));
    run.finish()
}

fn read_configs(run: &mut Run, path: &Path) -> Result<Vec<ConfigMetrics>> {
    let text = run.read(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("`{}` row {}", path.display(), i + 1)))
        .collect()
}

fn perf(a: PerfArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("perf", &a.common, args)?;
    let doc = match &a.common.spec {
        Some(p) => Some(run.spec(Some(p))?),
        None => None,
    };
    let configs = match &a.configs {
        Some(path) => read_configs(&mut run, path)?,
        None => doc.as_ref().map(|d| d.configs.clone()).unwrap_or_default(),
    };
    if configs.is_empty() {
        bail!("no configurations: give --configs PATH or a spec with `configs`");
    }
    let ranked = rank_configs(&configs)?;
    run.write("perf.csv", &csv(&report::perf_table(&ranked)))?;
    println!("best = {}", ranked[0].name);
    let services = doc.map(|d| d.services).unwrap_or_default();
    if !services.is_empty() {
        let mut t = Table::new(&["service", "latency_s", "throughput_bps"]);
        for s in &services {
            t.push(vec![
                s.name.clone(),
                fmt_num(service_latency(s)?),
                fmt_num(throughput(s)),
            ]);
        }
        run.write("services.csv", &csv(&t))?;
    }
    run.finish()
}

fn phy(a: PhyArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("phy", &a.common, args)?;
    let (mut g, mut t) = match &a.common.spec {
        Some(p) => {
            let doc = run.spec(Some(p))?;
            (doc.geometry, doc.targets)
        }
        None => (TraceGeometry::default(), PhyTargets::default()),
    };
    let mm = |v: Option<f64>, field: &mut f64| {
        if let Some(v) = v {
            *field = v * 1e-3;
        }
    };
    mm(a.trace_width, &mut g.trace_width);
    mm(a.trace_thickness, &mut g.trace_thickness);
    mm(a.ground_thickness, &mut g.ground_thickness);
    mm(a.interposer_height, &mut g.interposer_height);
    if let Some(v) = a.permittivity {
        g.relative_permittivity = v;
    }
    if let Some(v) = a.conductivity {
        g.conductivity = v;
    }
    if let Some(v) = a.clock {
        t.clock_frequency = v;
    }
    if let Some(v) = a.sf {
        t.safety_factor = v;
    }
    g.validate()?;
    t.validate()?;
    if !(a.min_length > 0.0 && a.max_length > a.min_length && a.points >= 2) {
        bail!("curve range needs 0 < --min-length < --max-length and --points >= 2");
    }
    let lmax = max_trace_length(&t, &g)?;
    let lengths = linspace(a.min_length * 1e-3, a.max_length * 1e-3, a.points);
    let curve = bandwidth_curve(&lengths, &t, &g)?;
    run.write("phy_curve.csv", &csv(&report::phy_table(&curve)))?;
    println!("max_trace_length_mm = {}", fmt_num(lmax * 1e3));
    if let Some((lo, hi)) = curve_crossing(&curve) {
        println!(
            "curve crossing between {} and {} mm",
            fmt_num(lo * 1e3),
            fmt_num(hi * 1e3)
        );
    }
    run.finish()
}

fn thermal(a: ThermalArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("thermal", &a.common, args)?;
    let res = a.common.resolution.unwrap_or(1.0);
    if a.compare_soc {
        let doc = match &a.common.spec {
            Some(p) => Some(run.spec(Some(p))?),
            None => None,
        };
        let stack = doc
            .as_ref()
            .map(|d| d.package.stack.clone())
            .unwrap_or_else(|| ThermalStack::default_2p5d(45.0));
        let soc_area = a
            .soc_area
            .or_else(|| doc.as_ref().and_then(|d| d.cost.soc_area))
            .unwrap_or(858.0);
        let (soc, split) =
            soc_vs_chiplet_plans(a.interposer, a.total_power, soc_area, a.chiplet_area, a.gap)?;
        let c = compare_soc_vs_chiplet(&soc, &split, &stack, res)?;
        let mut t = Table::new(&["peak_soc_c", "peak_split_c", "delta_k"]);
        t.push(vec![
            fmt_num(c.peak_soc),
            fmt_num(c.peak_split),
            fmt_num(c.delta),
        ]);
        run.write("soc_comparison.csv", &csv(&t))?;
        run.write("soc.svg", &report::floorplan_svg(&soc))?;
        run.write("split.svg", &report::floorplan_svg(&split))?;
        println!(
            "peak soc = {} C, peak split = {} C, delta = {} K",
            fmt_num(c.peak_soc),
            fmt_num(c.peak_split),
            fmt_num(c.delta)
        );
        return run.finish();
    }
    let doc = run.spec(a.common.spec.as_deref())?;
    let fp = match &a.floorplan {
        Some(path) => {
            let text = run.read(path)?;
            Floorplan::from_json(&text, &doc.package)
                .with_context(|| format!("invalid floorplan `{}`", path.display()))?
        }
        None => bst_placement(&doc.package)?,
    };
    let tf = solve_steady_state(&rasterize(&fp, res)?, &doc.package.stack)?;
    run.write("temperature.csv", &csv(&report::temperature_table(&tf)))?;
    run.write("layer_peaks.csv", &csv(&report::layer_peaks_table(&tf)))?;
    run.write("floorplan.svg", &report::floorplan_svg(&fp))?;
    let peaks: Vec<String> = tf
        .layer_names
        .iter()
        .enumerate()
        .map(|(l, n)| format!("{n}={}", fmt_num(tf.hottest_cell(l).2)))
        .collect();
    println!("peak_c {}", peaks.join(" "));
    run.finish()
}

fn anneal_config(doc: &DesignSpec, common: &Common, o: &AnnealOverrides) -> AnnealConfig {
    let mut cfg = doc.anneal.clone();
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.resolution {
        cfg.fine_resolution = v;
    }
    if let Some(v) = o.k0 {
        cfg.k0 = v;
    }
    if let Some(v) = o.decay {
        cfg.decay = v;
    }
    if let Some(v) = o.tol {
        cfg.tol = v;
    }
    if let Some(v) = o.max_iterations {
        cfg.max_iterations = v;
    }
    if let Some(v) = o.moves_per_iteration {
        cfg.moves_per_iteration = v;
    }
    if let Some(v) = o.coarse_resolution {
        cfg.coarse_resolution = v;
    }
    cfg
}

fn place(a: PlaceArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("place", &a.common, args)?;
    let doc = run.spec(a.common.spec.as_deref())?;
    let cfg = anneal_config(&doc, &a.common, &a.anneal);
    cfg.validate()?;
    run.manifest.seed = Some(cfg.seed);
    let spec = match a.interposer {
        Some(s) => doc.package.with_interposer(s, s),
        None => doc.package.clone(),
    };
    let r = optimize(&spec, &cfg)?;
    run.write("initial_floorplan.svg", &report::floorplan_svg(&r.initial))?;
    run.write("floorplan.svg", &report::floorplan_svg(&r.best))?;
    run.write("floorplan.json", &r.best.to_json())?;
    run.write("history.csv", &csv(&report::history_table(&r.history)))?;
    println!(
        "peak {} -> {} C, wirelength {} -> {} mm, {} iterations, converged {}",
        fmt_num(r.initial_peak),
        fmt_num(r.final_peak),
        fmt_num(r.initial_wirelength),
        fmt_num(r.final_wirelength),
        r.iterations,
        r.converged
    );
    run.finish()
}

fn calibrate(a: CalibrateArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("calibrate-k", &a.common, args)?;
    let doc = run.spec(a.common.spec.as_deref())?;
    let cfg = anneal_config(&doc, &a.common, &a.anneal);
    run.manifest.seed = Some(cfg.seed);
    let rows = calibrate_k(&doc.package, &a.k0_values, &cfg)?;
    run.write("calibration.csv", &csv(&report::calibration_table(&rows)))?;
    for r in &rows {
        println!(
            "k0 {}: {} iterations, converged {}, peak {} C",
            fmt_num(r.k0),
            r.iterations,
            r.converged,
            fmt_num(r.final_peak)
        );
    }
    run.finish()
}

fn sweep(a: SweepArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new("sweep", &a.common, args)?;
    let doc = run.spec(a.common.spec.as_deref())?;
    let cfg = anneal_config(&doc, &a.common, &a.anneal);
    run.manifest.seed = Some(cfg.seed);
    let rows = interposer_sweep(&doc.package, &a.sides, &cfg)?;
    run.write("sweep.csv", &csv(&report::sweep_table(&rows)))?;
    for r in &rows {
        match r.peak {
            Some(p) => println!("side {} mm: peak {} C", fmt_num(r.side), fmt_num(p)),
            None => println!("side {} mm: infeasible", fmt_num(r.side)),
        }
    }
    run.finish()
}
