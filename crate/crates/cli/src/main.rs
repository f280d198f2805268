mod config;
mod error;
mod material;
mod units;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use casimir_core::analysis::{self, fit_hamaker, vdw_grid, CombinedHamaker, HamakerFit, ScanResult};
use casimir_core::lifshitz::{self, Geometry, GeometryKind, LifshitzError, LifshitzOptions, MaterialStack};
use casimir_core::optical_data::DEFAULT_HIGH_TAIL;
use casimir_core::permittivity::{Epsilon, PermittivityFunction, CACHE_RANGE_EV};
use casimir_core::perturbation::{perturbative_factor_sl, perturbative_factor_ss};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::CliError;
use crate::material::{parse_material, TableOptions};
use crate::units::{parse_energy_ev, parse_length_nm, parse_length_um};

#[derive(Parser, Debug)]
#[command(name = "casimir", version, about = "Casimir and van der Waals forces between real metals")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads for scans (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Power-law exponent of Im eps above the last table point.
    #[arg(long, default_value_t = DEFAULT_HIGH_TAIL)]
    high_tail: f64,
    /// Allowed relative jump of Im eps where Drude extrapolation meets the table.
    #[arg(long, default_value_t = casimir_core::optical_data::DEFAULT_CONTINUITY_TOLERANCE)]
    continuity_tol: f64,
    /// JSON file whose keys are flag names (expanded before parsing).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate eps(i xi).
    Eps {
        #[arg(long)]
        material: String,
        /// Imaginary frequency, e.g. 12.5eV (repeatable). Default: log grid over 1e-6..1e4 eV.
        #[arg(long)]
        xi: Vec<String>,
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Force at one separation.
    Force {
        #[command(flatten)]
        stack: StackArgs,
        #[command(flatten)]
        geom: GeomArgs,
        /// Separation, e.g. 500nm.
        #[arg(long)]
        a: String,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Force over a grid of separations.
    Scan {
        #[command(flatten)]
        stack: StackArgs,
        #[command(flatten)]
        geom: GeomArgs,
        /// `vdw`, `log:<lo>:<hi>:<count>` or a comma list such as `100nm,200nm`.
        #[arg(long, default_value = "vdw")]
        grid: String,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hamaker constants from plate-plate and sphere-plate scans, or from a saved scan.
    Hamaker {
        #[arg(long, required_unless_present = "from_csv")]
        material: Option<String>,
        #[arg(long)]
        coating: Option<String>,
        #[arg(long, requires = "coating")]
        thickness: Option<String>,
        /// Scan CSV written by `casimir scan`.
        #[arg(long, requires = "geom")]
        from_csv: Option<PathBuf>,
        /// Geometry of the saved scan.
        #[arg(long, value_enum)]
        geom: Option<GeomKind>,
        #[arg(long = "R", default_value = "100um")]
        radius: String,
        #[arg(long, default_value = "vdw")]
        grid: String,
        /// Fit window `<lo>:<hi>`.
        #[arg(long, default_value = "0.5nm:2nm")]
        window: String,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Correction factors at the reference separations, with perturbation values.
    Table1 {
        #[arg(long, default_value = "drude:al")]
        al: String,
        #[arg(long, default_value = "drude:au")]
        au: String,
        #[command(flatten)]
        numerics: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct StackArgs {
    /// Substrate material spec.
    #[arg(long)]
    material: String,
    /// Coating material spec.
    #[arg(long, requires = "thickness")]
    coating: Option<String>,
    /// Coating thickness, e.g. 20nm.
    #[arg(long, requires = "coating")]
    thickness: Option<String>,
}

#[derive(Args, Debug)]
struct GeomArgs {
    #[arg(long, value_enum)]
    geom: GeomKind,
    /// Sphere radius, e.g. 100um.
    #[arg(long = "R", default_value = "100um")]
    radius: String,
}

#[derive(Args, Debug)]
struct NumericArgs {
    #[arg(long, default_value_t = lifshitz::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Skip the frequency-window sensitivity estimate.
    #[arg(long)]
    no_window_check: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GeomKind {
    /// Two plates.
    Ss,
    /// Sphere above a plate.
    Sl,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl NumericArgs {
    fn options(&self) -> LifshitzOptions {
        LifshitzOptions {
            tol: self.tol,
            check_window: !self.no_window_check,
            ..Default::default()
        }
    }
}

impl OutputArgs {
    fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn geometry_kind(kind: GeomKind, radius: &str) -> Result<GeometryKind, CliError> {
    Ok(match kind {
        GeomKind::Ss => GeometryKind::PlatePlate,
        GeomKind::Sl => {
            let radius_um = parse_length_um(radius)?;
            Geometry::sphere_plate(radius_um, 1.0).map_err(config_err)?;
            GeometryKind::SpherePlate { radius_um }
        }
    })
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn build_stack(
    material: &str,
    coating: Option<&str>,
    thickness: Option<&str>,
    table_opts: &TableOptions,
) -> Result<MaterialStack, CliError> {
    let substrate = parse_material(material, table_opts)?;
    match (coating, thickness) {
        (Some(c), Some(d)) => {
            let film = parse_material(c, table_opts)?;
            MaterialStack::coated(substrate, film, parse_length_nm(d)?).map_err(config_err)
        }
        (None, None) => Ok(MaterialStack::bulk(substrate)),
        _ => Err(CliError::Config("--coating and --thickness go together".into())),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    if spec == "vdw" {
        return Ok(vdw_grid());
    }
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("grid `{spec}` should be log:<lo>:<hi>:<count>")));
        }
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Config(format!("bad point count in `{spec}`")))?;
        return Ok(analysis::log_grid(parse_length_nm(parts[0])?, parse_length_nm(parts[1])?, count));
    }
    spec.split(',').map(parse_length_nm).collect()
}

fn warn(context: &str, message: impl std::fmt::Display) {
    if context.is_empty() {
        eprintln!("warning: {message}");
    } else {
        eprintln!("warning: {context}: {message}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let table_opts = TableOptions {
        high_tail: cli.high_tail,
        continuity_tol: cli.continuity_tol,
    };
    match cli.command {
        Command::Eps {
            material,
            xi,
            per_decade,
            output,
        } => run_eps(&material, &xi, per_decade, &output, &table_opts),
        Command::Force {
            stack,
            geom,
            a,
            numerics,
            output,
        } => {
            let stack = build_stack(&stack.material, stack.coating.as_deref(), stack.thickness.as_deref(), &table_opts)?;
            let kind = geometry_kind(geom.geom, &geom.radius)?;
            let a_nm = parse_length_nm(&a)?;
            run_force(&stack, kind, a_nm, &numerics, &output)
        }
        Command::Scan {
            stack,
            geom,
            grid,
            numerics,
            output,
        } => {
            let stack = build_stack(&stack.material, stack.coating.as_deref(), stack.thickness.as_deref(), &table_opts)?;
            let kind = geometry_kind(geom.geom, &geom.radius)?;
            let grid = parse_grid(&grid)?;
            let result = run_scan(&stack, kind, &grid, &numerics)?;
            let mut out = output.writer()?;
            match output.format {
                Format::Csv => result.write_csv(&mut out),
                Format::Json => result.write_json(&mut out),
            }
            .map_err(|e| CliError::Data(e.to_string()))?;
            out.flush()?;
            Ok(())
        }
        Command::Hamaker {
            material,
            coating,
            thickness,
            from_csv,
            geom,
            radius,
            grid,
            window,
            numerics,
            output,
        } => {
            let window = parse_window(&window)?;
            let fits = match (from_csv, geom) {
                (Some(path), Some(g)) => {
                    let kind = geometry_kind(g, &radius)?;
                    let file = File::open(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    let scan = ScanResult::read_csv(file, kind, &path.display().to_string())
                        .map_err(|e| CliError::Data(e.to_string()))?;
                    vec![(kind, fit_hamaker(&scan, window).map_err(|e| CliError::Data(e.to_string()))?)]
                }
                _ => {
                    let material = material.expect("clap enforces --material without --from-csv");
                    let stack = build_stack(&material, coating.as_deref(), thickness.as_deref(), &table_opts)?;
                    let grid = parse_grid(&grid)?;
                    let mut fits = Vec::new();
                    for g in [GeomKind::Ss, GeomKind::Sl] {
                        let kind = geometry_kind(g, &radius)?;
                        let scan = run_scan(&stack, kind, &grid, &numerics)?;
                        fits.push((kind, fit_hamaker(&scan, window).map_err(|e| CliError::Numerical(e.to_string()))?));
                    }
                    fits
                }
            };
            let combined = if fits.len() >= 2 {
                let only: Vec<HamakerFit> = fits.iter().map(|(_, f)| f.clone()).collect();
                let c = analysis::combine_hamaker(&only).map_err(|e| CliError::Numerical(e.to_string()))?;
                for w in &c.warnings {
                    warn("", w);
                }
                Some(c)
            } else {
                None
            };
            write_hamaker(&fits, combined.as_ref(), &output)
        }
        Command::Table1 { al, au, numerics, output } => {
            let al = parse_material(&al, &table_opts)?;
            let au = parse_material(&au, &table_opts)?;
            run_table1(&al, &au, &numerics, &output)
        }
    }
}

fn run_eps(
    material: &str,
    xi: &[String],
    per_decade: usize,
    output: &OutputArgs,
    table_opts: &TableOptions,
) -> Result<(), CliError> {
    let f = parse_material(material, table_opts)?;
    let xis: Vec<f64> = if xi.is_empty() {
        let (lo, hi) = CACHE_RANGE_EV;
        let count = ((hi / lo).log10().round() as usize) * per_decade.max(1) + 1;
        analysis::log_grid(lo, hi, count)
    } else {
        xi.iter().map(|s| parse_energy_ev(s)).collect::<Result<_, _>>()?
    };
    let mut rows = Vec::with_capacity(xis.len());
    for &x in &xis {
        let eps = f.evaluate(x).map_err(config_err)?;
        rows.push((x, eps));
    }
    let mut out = output.writer()?;
    match output.format {
        Format::Csv => {
            writeln!(out, "xi_eV,eps")?;
            for (x, eps) in &rows {
                writeln!(out, "{x},{}", eps_text(*eps))?;
            }
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(x, eps)| json!({ "xi_eV": x, "eps": eps.finite() }))
                .collect();
            serde_json::to_writer_pretty(&mut out, &items).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn eps_text(eps: Epsilon) -> String {
    match eps {
        Epsilon::Finite(v) => v.to_string(),
        Epsilon::Infinite => "inf".into(),
    }
}

fn run_force(
    stack: &MaterialStack,
    kind: GeometryKind,
    a_nm: f64,
    numerics: &NumericArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let geom = Geometry {
        kind,
        separation_nm: 1.0,
    }
    .with_separation(a_nm)
    .map_err(config_err)?;
    let (result, failed) = match lifshitz::force(stack, &geom, &numerics.options()) {
        Ok(r) => (r, false),
        Err(LifshitzError::NonConvergence { partial, .. }) => (*partial, true),
        Err(LifshitzError::Permittivity(e)) => return Err(CliError::Data(e.to_string())),
        Err(e) => return Err(config_err(e)),
    };
    for w in &result.warnings {
        warn("", w);
    }
    let mut out = output.writer()?;
    match output.format {
        Format::Csv => {
            writeln!(out, "a_nm,force,ideal_force,correction_factor,quad_error")?;
            writeln!(
                out,
                "{a_nm},{},{},{},{}",
                result.value, result.ideal_value, result.correction_factor, result.quad_error
            )?;
        }
        Format::Json => {
            let v = json!({ "a_nm": a_nm, "geometry": kind, "stack": stack.describe(), "result": result });
            serde_json::to_writer_pretty(&mut out, &v).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if failed {
        return Err(CliError::Numerical(format!(
            "quadrature did not converge (relative error {:.3e})",
            result.quad_error
        )));
    }
    Ok(())
}

fn run_scan(
    stack: &MaterialStack,
    kind: GeometryKind,
    grid: &[f64],
    numerics: &NumericArgs,
) -> Result<ScanResult, CliError> {
    let result = analysis::scan(stack, kind, grid, &numerics.options()).map_err(|e| match e {
        analysis::AnalysisError::Lifshitz(LifshitzError::Permittivity(p)) => CliError::Data(p.to_string()),
        other => config_err(other),
    })?;
    for p in &result.points {
        for w in &p.warnings {
            warn(&format!("a = {} nm", p.a_nm), w);
        }
    }
    if result.all_failed() {
        return Err(CliError::Numerical("every scan point failed to converge".into()));
    }
    Ok(result)
}

fn parse_window(spec: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("window `{spec}` should be <lo>:<hi>")))?;
    Ok((parse_length_nm(lo)?, parse_length_nm(hi)?))
}

fn geometry_label(kind: GeometryKind) -> &'static str {
    match kind {
        GeometryKind::PlatePlate => "ss",
        GeometryKind::SpherePlate { .. } => "sl",
    }
}

fn write_hamaker(
    fits: &[(GeometryKind, HamakerFit)],
    combined: Option<&CombinedHamaker>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let mut out = output.writer()?;
    match output.format {
        Format::Csv => {
            writeln!(out, "geometry,h_J,h_sigma_J,n,n_sigma,a_min_nm,a_max_nm")?;
            for (kind, f) in fits {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    geometry_label(*kind),
                    f.h,
                    f.h_sigma,
                    f.n,
                    f.n_sigma,
                    f.fit_window.0,
                    f.fit_window.1
                )?;
            }
            if let Some(c) = combined {
                writeln!(out, "combined,{},{},,,,", c.rounded_h, c.rounded_half_width)?;
            }
        }
        Format::Json => {
            let items: Vec<_> = fits
                .iter()
                .map(|(kind, f)| json!({ "geometry": geometry_label(*kind), "fit": f }))
                .collect();
            let v = json!({ "fits": items, "combined": combined });
            serde_json::to_writer_pretty(&mut out, &v).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// (bodies, metal, a in µm, published correction factor)
const TABLE1_CELLS: [(GeomKind, &str, f64, f64); 13] = [
    (GeomKind::Ss, "al", 0.1, 0.55),
    (GeomKind::Sl, "al", 0.1, 0.62),
    (GeomKind::Ss, "au", 0.1, 0.49),
    (GeomKind::Sl, "au", 0.1, 0.56),
    (GeomKind::Ss, "al", 0.5, 0.84),
    (GeomKind::Sl, "al", 0.5, 0.87),
    (GeomKind::Ss, "au", 0.5, 0.81),
    (GeomKind::Sl, "au", 0.5, 0.85),
    (GeomKind::Sl, "au", 0.6, 0.87),
    (GeomKind::Ss, "al", 3.0, 0.96),
    (GeomKind::Sl, "al", 3.0, 0.97),
    (GeomKind::Ss, "au", 3.0, 0.95),
    (GeomKind::Sl, "au", 3.0, 0.96),
];

fn run_table1(
    al: &PermittivityFunction,
    au: &PermittivityFunction,
    numerics: &NumericArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let opts = numerics.options();
    let mut rows = Vec::new();
    for (g, metal, a_um, reference) in TABLE1_CELLS {
        let material = if metal == "al" { al } else { au };
        let stack = MaterialStack::bulk(material.clone());
        let a_nm = a_um * 1e3;
        let kind = geometry_kind(g, "100um")?;
        let geom = Geometry {
            kind,
            separation_nm: a_nm,
        };
        let computed = match lifshitz::force(&stack, &geom, &opts) {
            Ok(r) => r.correction_factor,
            Err(LifshitzError::NonConvergence { partial, .. }) => {
                warn(&format!("{} {metal} {a_um} um", geometry_label(kind)), "did not converge");
                partial.correction_factor
            }
            Err(e) => return Err(CliError::Data(e.to_string())),
        };
        let perturbation = material.drude_params().map(|p| {
            let delta0 = p.penetration_depth_nm();
            match g {
                GeomKind::Ss => perturbative_factor_ss(delta0, a_nm).value,
                GeomKind::Sl => perturbative_factor_sl(delta0, a_nm).value,
            }
        });
        rows.push((geometry_label(kind), metal, a_um, computed, reference, perturbation));
    }
    let mut out = output.writer()?;
    match output.format {
        Format::Csv => {
            writeln!(out, "bodies,metal,a_um,computed,reference,perturbation")?;
            for (g, m, a, c, r, p) in &rows {
                let p = p.map_or(String::new(), |v| format!("{v:.4}"));
                writeln!(out, "{g},{m},{a},{c:.4},{r},{p}")?;
            }
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(g, m, a, c, r, p)| {
                    json!({ "bodies": g, "metal": m, "a_um": a, "computed": c, "reference": r, "perturbation": p })
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &items).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse_from(args);
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Config(format!("thread pool: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
