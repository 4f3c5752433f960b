//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage or other error, 2 decode or verification
//! failure, 3 correction did not converge.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::corpus_image;
use crate::correction::{evaluate, IdealBitField, RobustnessParams};
use crate::decoder::{binarize_field, decode_check};
use crate::error::{Error, Result};
use crate::grid::{GaussianModuleKernel, ModuleGrid};
use crate::metrics::{decode_rate_trial, error_module_count, ssim, DistortionSpec};
use crate::pipeline::{generate, stage_c, GenerateOptions, QUIET_ZONE_MODULES};
use crate::qr::{render_plain, EcLevel, Version};
use crate::raster::{add_quiet_zone, crop, to_gray, ColorImage};
use crate::sidecar::{SidecarMeta, StageParams};
use crate::stylize::{apply_stylizer, Builtin, Stylizer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DECODE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

pub const CSV_FORMAT_VERSION: u32 = 1;

const TOOL: &str = concat!("artqr ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "artqr", version, about = "Robust stylized aesthetic QR codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a message and blend it into an image.
    Generate(GenerateArgs),
    /// Apply a stylizer to a generated code.
    Stylize(StylizeArgs),
    /// Repair non-robust modules of a stylized code.
    Correct(CorrectArgs),
    /// Decode an image using its sidecar geometry.
    Verify(VerifyArgs),
    /// Batch evaluation over a corpus, written as CSV.
    Eval(EvalArgs),
    /// Write the synthetic test corpus as PNG files.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Text to encode.
    #[arg(short, long)]
    pub message: String,
    /// Background image (PNG).
    #[arg(short, long)]
    pub image: PathBuf,
    /// Output PNG.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Sidecar path; defaults to the output with a .meta extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub version: u8,
    #[arg(long, default_value = "L")]
    pub ec: EcLevel,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..8))]
    pub mask: u8,
    /// Pixels per module (odd).
    #[arg(long, default_value_t = 13)]
    pub module_px: u32,
    /// Spot radius in pixels; defaults to module_px / 4.
    #[arg(long)]
    pub radius: Option<u32>,
}

#[derive(Debug, Args)]
pub struct StylizeArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Built-in stylizer, e.g. identity, posterize:4, soften:2, hue:120, dither:4.
    #[arg(long, conflicts_with = "external", required_unless_present = "external")]
    pub stylizer: Option<String>,
    /// External command; input and output PNG paths are appended.
    #[arg(long)]
    pub external: Option<String>,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub max_iterations: usize,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_meta: Option<PathBuf>,
    /// Robustness report; defaults to the output with a .report.toml extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of PNG images; the synthetic corpus is used when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Number of synthetic images when no corpus directory is given.
    #[arg(long, default_value_t = 20)]
    pub synthetic: usize,
    #[arg(long, default_value = "https://example.org/artqr/eval")]
    pub message: String,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..8))]
    pub mask: u8,
    #[arg(long, default_value = "posterize:4")]
    pub stylizer: String,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Distortion for decode-rate trials, e.g. brightness=40,noise=2. Repeatable.
    #[arg(long)]
    pub distortion: Vec<DistortionSpec>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add SSIM of a plain rendering of the same symbol and the difference.
    #[arg(long)]
    pub compare_standard: bool,
    /// CSV output; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_decode_failure() => EXIT_DECODE,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Stylize(a) => cmd_stylize(&a, out),
        Command::Correct(a) => cmd_correct(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Corpus(a) => cmd_corpus(&a, out),
    }
}

fn meta_path(explicit: &Option<PathBuf>, image: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| image.with_extension("meta"))
}

fn open_rgb(path: &Path) -> Result<ColorImage> {
    Ok(image::open(path)?.to_rgb8())
}

/// Reads an exported image and strips its quiet zone.
pub fn load_core(path: &Path, meta: &SidecarMeta) -> Result<ColorImage> {
    let img = open_rgb(path)?;
    let side = meta.image_side();
    if img.dimensions() != (side, side) {
        return Err(Error::DimensionMismatch {
            expected: (side, side),
            found: img.dimensions(),
        });
    }
    let core = meta.m as u32 * meta.a;
    crop(&img, meta.origin[0], meta.origin[1], core, core)
}

fn save_with_quiet_zone(core: &ColorImage, meta: &SidecarMeta, path: &Path) -> Result<()> {
    add_quiet_zone(core, meta.quiet_zone * meta.a).save(path)?;
    Ok(())
}

fn core_grid(meta: &SidecarMeta) -> Result<ModuleGrid> {
    Ok(meta.grid()?.at_origin())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let img = open_rgb(&a.image)?;
    let opts = GenerateOptions {
        version: Version::new(a.version)?,
        ec_level: a.ec,
        mask: a.mask,
        module_px: a.module_px,
        spot_radius: a.radius,
    };
    let g = generate(a.message.as_bytes(), &img, &opts)?;
    let defaults = RobustnessParams::default();
    let params = StageParams {
        delta: defaults.delta,
        eta: defaults.eta,
        spot_radius: g.spot_radius,
    };
    let mut meta = SidecarMeta::new(
        &g.scheduled.matrix,
        a.module_px,
        QUIET_ZONE_MODULES,
        a.message.as_bytes(),
        params,
    );
    meta.push_provenance("generate", TOOL);
    save_with_quiet_zone(&g.qa, &meta, &a.out)?;
    meta.write(&meta_path(&a.meta, &a.out))?;
    writeln!(
        out,
        "wrote {} ({}x{} pixels, version {}-{}, mask {}); {} pivots, {} of {} targets matched",
        a.out.display(),
        meta.image_side(),
        meta.image_side(),
        a.version,
        a.ec,
        a.mask,
        g.scheduled.basis.consumed(),
        g.plan.match_count(&g.scheduled.matrix),
        g.scheduled.matrix.layout.bit_map.iter().flatten().count(),
    )
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_stylize(a: &StylizeArgs, out: &mut dyn Write) -> Result<i32> {
    let mut meta = SidecarMeta::read(&meta_path(&a.meta, &a.input))?;
    let core = load_core(&a.input, &meta)?;
    let stylizer = match (&a.stylizer, &a.external) {
        (Some(name), None) => Stylizer::Builtin(name.parse::<Builtin>()?),
        (None, Some(cmd)) => Stylizer::external(cmd)?,
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --stylizer or --external".into(),
            ))
        }
    };
    let styled = apply_stylizer(&core, &stylizer)?;
    meta.push_provenance("stylize", &stylizer.id());
    save_with_quiet_zone(&styled, &meta, &a.out)?;
    meta.write(&meta_path(&a.out_meta, &a.out))?;
    writeln!(out, "wrote {} using {}", a.out.display(), stylizer.id()).map_err(io_err)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CorrectionReportDoc {
    format_version: u32,
    delta: f64,
    eta: f64,
    spot_radius: u32,
    iterations: usize,
    registry_size: usize,
    omega_sizes: Vec<usize>,
    final_non_robust: usize,
    error_modules_before: usize,
    error_modules_after: usize,
    registry: Vec<usize>,
}

fn cmd_correct(a: &CorrectArgs, out: &mut dyn Write) -> Result<i32> {
    let mut meta = SidecarMeta::read(&meta_path(&a.meta, &a.input))?;
    let core = load_core(&a.input, &meta)?;
    let scheduled = meta.scheduled_matrix()?;
    let grid = core_grid(&meta)?;
    let params = RobustnessParams {
        delta: a.delta.unwrap_or(meta.params.delta),
        eta: a.eta.unwrap_or(meta.params.eta),
        spot_radius: a.radius.unwrap_or(meta.params.spot_radius),
        max_iterations: a.max_iterations,
        ..RobustnessParams::default()
    };
    let before = error_module_count(&core, &scheduled, &grid)?;
    let result = stage_c(&core, &scheduled, &grid, &params)?;
    let after = error_module_count(&result.qc, &scheduled, &grid)?;
    let report = &result.correction.report;

    meta.params = StageParams {
        delta: params.delta,
        eta: params.eta,
        spot_radius: params.spot_radius,
    };
    meta.push_provenance("correct", TOOL);
    save_with_quiet_zone(&result.qc, &meta, &a.out)?;
    meta.write(&meta_path(&a.out_meta, &a.out))?;

    let doc = CorrectionReportDoc {
        format_version: CSV_FORMAT_VERSION,
        delta: params.delta,
        eta: params.eta,
        spot_radius: params.spot_radius,
        iterations: report.iterations_used,
        registry_size: report.corrected_registry.len(),
        omega_sizes: report.omega_sizes.clone(),
        final_non_robust: report.non_robust.len(),
        error_modules_before: before,
        error_modules_after: after,
        registry: report.corrected_registry.iter().copied().collect(),
    };
    let report_path = a.report.clone().unwrap_or_else(|| a.out.with_extension("report.toml"));
    let text = toml::to_string(&doc).map_err(|e| Error::Sidecar(e.to_string()))?;
    std::fs::write(&report_path, text)?;
    writeln!(
        out,
        "wrote {}: {} iterations, {} modules corrected, omega sizes {:?}",
        a.out.display(),
        report.iterations_used,
        report.corrected_registry.len(),
        report.omega_sizes
    )
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let meta = SidecarMeta::read(&meta_path(&a.meta, &a.input))?;
    let core = load_core(&a.input, &meta)?;
    let grid = core_grid(&meta)?;
    let scheduled = meta.scheduled_matrix()?;

    let params = RobustnessParams {
        delta: meta.params.delta,
        eta: meta.params.eta,
        spot_radius: meta.params.spot_radius,
        ..RobustnessParams::default()
    };
    let gray = to_gray(&core);
    let field = binarize_field(&gray);
    let ideal = IdealBitField::new(&scheduled, &grid, params.spot_radius, gray.dimensions())?;
    let kernel = GaussianModuleKernel::new(meta.a)?;
    let report = evaluate(&gray, &field, &ideal, &kernel, &grid, &params)?;
    writeln!(
        out,
        "robustness at delta {}: {} non-robust modules; score histogram {:?}",
        params.delta,
        report.non_robust.len(),
        report.histogram()
    )
    .map_err(io_err)?;

    match decode_check(&core, &grid, meta.mask_index) {
        Ok(d) => {
            let matches = meta.digest_matches(&d.payload);
            writeln!(out, "payload: {}", String::from_utf8_lossy(&d.payload)).map_err(io_err)?;
            writeln!(out, "corrections: {}", d.corrections).map_err(io_err)?;
            writeln!(out, "digest: {}", if matches { "match" } else { "MISMATCH" }).map_err(io_err)?;
            Ok(if matches { EXIT_OK } else { EXIT_DECODE })
        }
        Err(e) if e.is_decode_failure() => {
            writeln!(out, "decode failed: {e}").map_err(io_err)?;
            Ok(EXIT_DECODE)
        }
        Err(e) => Err(e),
    }
}

struct EvalRow {
    image: String,
    ssim_qa: f64,
    ssim_plain: Option<f64>,
    errors_qa: usize,
    errors_qb: usize,
    errors_qc: usize,
    iterations: usize,
    registry: usize,
    rates: Vec<f64>,
}

fn eval_one(a: &EvalArgs, name: &str, img: &ColorImage, stylizer: &Stylizer) -> Result<EvalRow> {
    let opts = GenerateOptions {
        mask: a.mask,
        ..GenerateOptions::default()
    };
    let g = generate(a.message.as_bytes(), img, &opts)?;
    let blended_gray = to_gray(&g.blended);
    let ssim_qa = ssim(&to_gray(&g.qa), &blended_gray)?;
    let ssim_plain = if a.compare_standard {
        let plain = render_plain(&g.unscheduled, g.grid.a);
        Some(ssim(&to_gray(&plain), &blended_gray)?)
    } else {
        None
    };
    let matrix = &g.scheduled.matrix;
    let qb = apply_stylizer(&g.qa, stylizer)?;
    let params = RobustnessParams {
        delta: a.delta,
        spot_radius: g.spot_radius,
        ..RobustnessParams::default()
    };
    let c = stage_c(&qb, matrix, &g.grid, &params)?;
    let mut rates = Vec::with_capacity(a.distortion.len());
    for spec in &a.distortion {
        let r = decode_rate_trial(&c.qc, &g.grid, a.mask, a.message.as_bytes(), spec, a.trials, a.seed)?;
        rates.push(r.rate());
    }
    Ok(EvalRow {
        image: name.to_owned(),
        ssim_qa,
        ssim_plain,
        errors_qa: error_module_count(&g.qa, matrix, &g.grid)?,
        errors_qb: error_module_count(&qb, matrix, &g.grid)?,
        errors_qc: error_module_count(&c.qc, matrix, &g.grid)?,
        iterations: c.correction.report.iterations_used,
        registry: c.correction.report.corrected_registry.len(),
        rates,
    })
}

fn spec_label(s: &DistortionSpec) -> String {
    format!(
        "rate[brightness={} gamma={} scale={} tilt={} noise={}]",
        s.brightness_shift, s.gamma, s.scale_factor, s.tilt_degrees, s.noise_sigma
    )
}

type Loader = Box<dyn Fn() -> Result<ColorImage>>;

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let stylizer = Stylizer::Builtin(a.stylizer.parse::<Builtin>()?);
    let items: Vec<(String, Loader)> = match &a.corpus {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
                .collect();
            paths.sort();
            paths
                .into_iter()
                .map(|p| {
                    let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                    let load: Loader = Box::new(move || open_rgb(&p));
                    (name, load)
                })
                .collect()
        }
        None => (0..a.synthetic)
            .map(|i| {
                let load: Loader = Box::new(move || Ok(corpus_image(i)));
                (format!("synthetic_{i:02}"), load)
            })
            .collect(),
    };

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    let mut header = vec![
        "format_version".to_owned(),
        "image".into(),
        "ssim_qa".into(),
        "ssim_plain".into(),
        "delta_ssim".into(),
        "error_modules_qa".into(),
        "error_modules_qb".into(),
        "error_modules_qc".into(),
        "iterations".into(),
        "registry".into(),
    ];
    header.extend(a.distortion.iter().map(spec_label));
    csv.write_record(&header).map_err(|e| Error::Io(e.into()))?;

    let mut rows = Vec::new();
    let mut failures = 0;
    for (name, load) in &items {
        match load().and_then(|img| eval_one(a, name, &img, &stylizer)) {
            Ok(row) => {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
                let mut rec = vec![
                    CSV_FORMAT_VERSION.to_string(),
                    row.image.clone(),
                    format!("{:.6}", row.ssim_qa),
                    opt(row.ssim_plain),
                    opt(row.ssim_plain.map(|p| row.ssim_qa - p)),
                    row.errors_qa.to_string(),
                    row.errors_qb.to_string(),
                    row.errors_qc.to_string(),
                    row.iterations.to_string(),
                    row.registry.to_string(),
                ];
                rec.extend(row.rates.iter().map(|r| format!("{r:.4}")));
                csv.write_record(&rec).map_err(|e| Error::Io(e.into()))?;
                rows.push(row);
            }
            Err(e) => {
                failures += 1;
                log::error!("{name}: {e}");
            }
        }
    }
    csv.flush()?;

    if !rows.is_empty() {
        let n = rows.len() as f64;
        let mean_ssim = rows.iter().map(|r| r.ssim_qa).sum::<f64>() / n;
        write!(
            out,
            "summary: {} images, {} failed, mean SSIM {:.4}",
            rows.len(),
            failures,
            mean_ssim
        )
        .map_err(io_err)?;
        if a.compare_standard {
            let better = rows
                .iter()
                .filter(|r| r.ssim_plain.is_some_and(|p| r.ssim_qa > p))
                .count();
            write!(out, ", SSIM above plain QR for {better}/{}", rows.len()).map_err(io_err)?;
        }
        for (i, spec) in a.distortion.iter().enumerate() {
            let mean = rows.iter().map(|r| r.rates[i]).sum::<f64>() / n;
            write!(out, ", mean {} {:.4}", spec_label(spec), mean).map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_corpus(a: &CorpusArgs, out: &mut dyn Write) -> Result<i32> {
    std::fs::create_dir_all(&a.out)?;
    for i in 0..a.count {
        let path = a.out.join(format!("synthetic_{i:02}.png"));
        corpus_image(i).save(&path)?;
    }
    writeln!(out, "wrote {} images to {}", a.count, a.out.display()).map_err(io_err)?;
    Ok(EXIT_OK)
}
