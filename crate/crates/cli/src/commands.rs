use std::path::Path;

use serde_json::{json, Value};

use selfaffine::attractor::{
    chaos_game, cylinder_cloud, exact_limit, interior_search, minkowski_decomposition_check, project_address,
    render_image, tail_bound, write_points_csv, Address, InteriorOptions, InteriorStatus, PixelMode, Viewport,
    DEFAULT_SEARCH_DEPTHS,
};
use selfaffine::classifier::{classify_uniqueness, connectivity_verdict, interior_verdict, Connectivity, InteriorKind};
use selfaffine::constants::{golden_ratio, komornik_loreti, komornik_loreti_exact, thue_morse, KL_FLOAT_FLOOR};
use selfaffine::scalar::{f64_to_rational, parse_rational, rational_decimal, rational_text};
use selfaffine::spectral::{
    eigenstructure, parse_spec, RawSystem, SpectralBlock, SpectralSpec, SystemInput, DEFAULT_ANGLE_DENOMINATOR_CAP,
    DEFAULT_TOLERANCE,
};
use selfaffine::uniqueness::{
    certify_address, entropy_estimate, enumerate_unique_periodic, unique_counts, CertificationStatus, CertifyOptions,
};
use selfaffine::{ArithmeticMode, Rational};

use crate::args::{Cli, Command, Format, Global, PixelStyle, RenderMethod};
use crate::report::RunReport;
use crate::{CliError, CliResult, Outcome};

const DEFAULT_PRECISION: f64 = 1e-8;
const DEFAULT_CYLINDER_DEPTH: usize = 12;
const DEFAULT_PROJECTION_LENGTH: usize = 64;
const THUE_MORSE_PREFIX: u64 = 32;

struct Input {
    input: SystemInput,
    config_text: String,
    warnings: Vec<String>,
}

impl Input {
    fn system(&self, global: &Global) -> RawSystem {
        let sys = self.input.system();
        match (global.exact, global.float) {
            (true, _) => sys.with_mode(ArithmeticMode::Exact),
            (_, true) => sys.with_mode(ArithmeticMode::Float),
            _ => sys,
        }
    }
}

fn load(global: &Global) -> CliResult<Input> {
    match (&global.config, &global.lambda) {
        (Some(_), Some(_)) => Err(CliError::Usage("--config and --lambda are mutually exclusive".into())),
        (None, None) => Err(CliError::Usage("a system is required: pass --config FILE or --lambda λ".into())),
        (Some(path), None) => load_config(path),
        (None, Some(text)) => {
            let lambda = parse_rational(text)?;
            let spec = SpectralSpec::exact(vec![SpectralBlock::real(lambda)?])?;
            let input = SystemInput::Spec(spec);
            Ok(Input {
                config_text: input.to_config_text(),
                input,
                warnings: Vec::new(),
            })
        }
    }
}

fn load_config(path: &Path) -> CliResult<Input> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = parse_spec(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Input {
        config_text: parsed.input.to_config_text(),
        input: parsed.input,
        warnings: parsed.warnings,
    })
}

fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Render { .. } => Format::Pgm,
        Command::Unique { address: None, .. } => Format::Csv,
        _ => Format::Json,
    }
}

fn check_format(cmd: &Command, format: Format, output: Option<&Path>) -> CliResult<()> {
    let allowed: &[Format] = match cmd {
        Command::Render { .. } => &[Format::Json, Format::Csv, Format::Pgm],
        Command::Unique { address: None, .. } | Command::Enumerate { .. } => &[Format::Json, Format::Csv],
        _ => &[Format::Json],
    };
    if !allowed.contains(&format) {
        return Err(CliError::Usage(format!(
            "{} does not produce {format:?} output",
            cmd.name()
        )));
    }
    if format == Format::Pgm && output.is_none() {
        return Err(CliError::Usage("pgm output is binary and needs --output".into()));
    }
    Ok(())
}

fn mode_name(mode: ArithmeticMode) -> String {
    match mode {
        ArithmeticMode::Exact => "exact".into(),
        ArithmeticMode::Float => "float".into(),
    }
}

fn certify_options(global: &Global) -> CertifyOptions {
    CertifyOptions {
        depth_cap: global.depth_cap,
        node_budget: global.node_budget,
        ..CertifyOptions::default()
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let global = &cli.global;
    let cmd = &cli.command;
    let format = global.format.unwrap_or_else(|| default_format(cmd));
    check_format(cmd, format, global.output.as_deref())?;
    let mut report = RunReport::new(cmd, global);
    let data = if let Command::Constants = cmd {
        constants(global, &mut report)?;
        None
    } else {
        let input = load(global)?;
        report.echo.config = Some(input.config_text.clone());
        report.warnings.extend(input.warnings.iter().cloned());
        match cmd {
            Command::Classify => classify(&input, global, &mut report)?,
            Command::Interior {
                halvings,
                no_certificate,
            } => interior(&input, global, *halvings, *no_certificate, &mut report)?,
            Command::Connectivity => connectivity(&input, &mut report),
            Command::Render {
                method,
                points,
                width,
                height,
                pixels,
                extent,
            } => {
                let opts = RenderOpts {
                    method: *method,
                    points: *points,
                    width: *width,
                    height: *height,
                    pixels: *pixels,
                    extent: *extent,
                };
                return render(&input, global, &opts, format, report);
            }
            Command::Unique { address, length } => {
                unique(&input, global, address.as_deref(), *length, format, &mut report)?
            }
            Command::Enumerate { length } => enumerate(&input, global, *length, format, &mut report)?,
            Command::DecomposeCheck { groups } => decompose_check(&input, global, *groups, &mut report)?,
            Command::Project { address } => project(&input, global, address, &mut report)?,
            Command::Constants => unreachable!("handled above"),
        }
    };
    Ok(Outcome { report, data, format })
}

/// The spectrum of the input: given directly, or extracted from the matrix.
fn spectrum(input: &Input, global: &Global, report: &mut RunReport) -> CliResult<SpectralSpec> {
    match &input.input {
        SystemInput::Spec(s) => Ok(s.clone()),
        SystemInput::Matrix(_) => {
            let spec = eigenstructure(&input.system(global), DEFAULT_ANGLE_DENOMINATOR_CAP, DEFAULT_TOLERANCE)?;
            report.warnings.push("spectrum extracted numerically from the matrix".into());
            report.result("spectrum", spec.to_config_text());
            Ok(spec)
        }
    }
}

fn classify(input: &Input, global: &Global, report: &mut RunReport) -> CliResult<Option<Vec<u8>>> {
    let spec = spectrum(input, global, report)?;
    report.mode = Some(if spec.is_heuristic() { "heuristic" } else { "exact" }.into());
    let class = classify_uniqueness(&spec)?;
    report.verdict("uniqueness", class.verdict);
    report.result("rule", class.rule);
    report.result("confidence", class.confidence);
    if let Some(beta) = &class.beta {
        report.result(
            "beta",
            json!({ "exact": beta.exact_text(), "decimal": beta.to_f64() }),
        );
    }
    if let Some(q) = class.q {
        report.result("q", q);
        report.result("signs", &class.signs);
        report.result("sign_conflict", class.sign_conflict);
    }
    if let Some(e) = class.beta_star {
        report.constant("beta_star", e);
    }
    report.result("trace", &class.trace);
    Ok(None)
}

fn det_abs(input: &Input, global: &Global) -> selfaffine::spectral::Modulus {
    match &input.input {
        SystemInput::Spec(s) => s.det_abs(),
        SystemInput::Matrix(_) => input.system(global).det_abs(),
    }
}

fn interior(
    input: &Input,
    global: &Global,
    halvings: usize,
    no_certificate: bool,
    report: &mut RunReport,
) -> CliResult<Option<Vec<u8>>> {
    let verdict = interior_verdict(&det_abs(input, global), input.input.dimension());
    report.verdict("interior", verdict.verdict);
    report.result("determinant", &verdict);
    let mut certified = false;
    if verdict.verdict != InteriorKind::EmptyNullSet && !no_certificate {
        let sys = input.system(global);
        let cap = global.depth.unwrap_or(usize::MAX);
        let depths: Vec<usize> = DEFAULT_SEARCH_DEPTHS.iter().copied().filter(|&n| n <= cap).collect();
        if !depths.is_empty() {
            let x0 = vec![0.0; sys.dimension()];
            let cert = interior_search(&sys, &x0, &depths, halvings, &InteriorOptions::default())?;
            certified = cert.verdict == InteriorStatus::Certified;
            report.verdict("interior_certificate", cert.verdict);
            report.result("certificate", &cert);
        }
    }
    if verdict.verdict == InteriorKind::Unknown && !certified {
        report.undecided("interior");
    }
    Ok(None)
}

fn connectivity(input: &Input, report: &mut RunReport) -> Option<Vec<u8>> {
    let det = match &input.input {
        SystemInput::Spec(s) => s.det_abs(),
        SystemInput::Matrix(m) => m.det_abs(),
    };
    let verdict = connectivity_verdict(&det);
    report.verdict("connectivity", verdict);
    report.result("det_abs", json!({ "exact": det.as_exact().map(rational_text), "decimal": det.to_f64() }));
    if verdict == Connectivity::Unknown {
        report.undecided("connectivity");
    }
    None
}

struct RenderOpts {
    method: RenderMethod,
    points: usize,
    width: usize,
    height: usize,
    pixels: PixelStyle,
    extent: Option<f64>,
}

fn render(input: &Input, global: &Global, opts: &RenderOpts, format: Format, mut report: RunReport) -> CliResult<Outcome> {
    let sys = input.system(global);
    report.mode = Some(mode_name(sys.mode()));
    let points: Vec<Vec<f64>> = match opts.method {
        RenderMethod::Chaos => chaos_game(&sys, opts.points, global.seed),
        RenderMethod::Cylinders => {
            let depth = global.depth.unwrap_or(DEFAULT_CYLINDER_DEPTH);
            report.result("depth", depth);
            cylinder_cloud::<f64>(&sys, depth)?.centers().map(<[f64]>::to_vec).collect()
        }
    };
    report.result("points", points.len());
    let data = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_points_csv(&mut buf, points.iter().cloned()).expect("writing to memory");
            Some(buf)
        }
        Format::Pgm | Format::Json => {
            let viewport = match opts.extent {
                Some(a) => Viewport::centered(a)?,
                None => Viewport::bounding(&points, 0.02 * tail_bound::<f64>(&sys, 0)?)?,
            };
            let raster = render_image(&points, &viewport, opts.width, opts.height)?;
            report.result("viewport", viewport);
            report.result("lit_pixels", raster.lit_count());
            let mode = match opts.pixels {
                PixelStyle::Binary => PixelMode::Binary,
                PixelStyle::Hits => PixelMode::HitCount,
            };
            (format == Format::Pgm).then(|| raster.to_pgm(mode))
        }
    };
    Ok(Outcome { report, data, format })
}

fn word_text(w: &[i8]) -> String {
    w.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

fn unique(
    input: &Input,
    global: &Global,
    address: Option<&str>,
    length: Option<usize>,
    format: Format,
    report: &mut RunReport,
) -> CliResult<Option<Vec<u8>>> {
    let sys = input.system(global);
    report.mode = Some(mode_name(sys.mode()));
    let opts = certify_options(global);
    match (address, length) {
        (Some(text), None) => {
            let a: Address = text.parse()?;
            let cert = certify_address(&sys, &a, &opts)?;
            report.verdict("certification", cert.status);
            report.result("address", a.to_string());
            report.result("nodes", cert.nodes());
            if let Some(w) = &cert.witness {
                report.result("witness", json!({
                    "address": w.address.to_string(),
                    "shift": w.shift,
                    "kind": w.kind,
                    "approximate": w.approximate,
                }));
            }
            report.result("shifts", &cert.shifts);
            if cert.status == CertificationStatus::Undetermined {
                report.undecided(format!("certification of {a}"));
            }
            Ok(None)
        }
        (None, Some(n)) => {
            let counts = unique_counts(&sys, n, &opts)?;
            let undetermined: u64 = counts.iter().map(|e| e.undetermined).sum();
            let table: Vec<Value> = counts
                .iter()
                .map(|e| json!({ "n": e.length, "count": e.count, "undetermined": e.undetermined }))
                .collect();
            report.result("counts", table);
            let pairs: Vec<(usize, u64)> = counts.iter().map(|e| (e.length, e.count)).collect();
            if let Ok(est) = entropy_estimate(&pairs) {
                report.result("entropy", est);
            }
            if undetermined > 0 {
                report.undecided(format!("{undetermined} periodic words undetermined"));
            }
            Ok((format == Format::Csv).then(|| {
                let mut text = String::from("n,N_n,undetermined\n");
                for e in &counts {
                    text.push_str(&format!("{},{},{}\n", e.length, e.count, e.undetermined));
                }
                text.into_bytes()
            }))
        }
        _ => Err(CliError::Usage("unique needs exactly one of --address or --length".into())),
    }
}

fn enumerate(
    input: &Input,
    global: &Global,
    n: usize,
    format: Format,
    report: &mut RunReport,
) -> CliResult<Option<Vec<u8>>> {
    let sys = input.system(global);
    report.mode = Some(mode_name(sys.mode()));
    let e = enumerate_unique_periodic(&sys, n, &certify_options(global))?;
    let words: Vec<String> = e.words.iter().map(|w| word_text(w)).collect();
    report.result("length", n);
    report.result("count", e.count);
    report.result("undetermined", e.undetermined);
    if e.undetermined > 0 {
        report.undecided(format!("{} periodic words undetermined", e.undetermined));
    }
    if format == Format::Csv {
        let mut text = String::from("word\n");
        for w in &words {
            text.push_str(w);
            text.push('\n');
        }
        return Ok(Some(text.into_bytes()));
    }
    report.result("words", words);
    Ok(None)
}

fn constants(global: &Global, report: &mut RunReport) -> CliResult<()> {
    let precision = global.precision.unwrap_or(DEFAULT_PRECISION);
    if !(precision > 0.0) {
        return Err(CliError::Usage("--precision must be positive".into()));
    }
    if precision >= KL_FLOAT_FLOOR {
        report.mode = Some("float".into());
        let e = komornik_loreti(precision)?;
        report.constant("beta_star", e);
        report.constant("beta_star_width", e.width());
        report.constant(
            "inverse_beta_star",
            json!({ "lo": next_down(1.0 / e.hi), "hi": next_up(1.0 / e.lo) }),
        );
    } else {
        report.mode = Some("exact".into());
        let width = f64_to_rational(precision)?;
        let (lo, hi) = komornik_loreti_exact(&width)?;
        let digits = (-precision.log10()).ceil() as usize + 2;
        let one = Rational::from_integer(1.into());
        report.constant(
            "beta_star",
            json!({
                "lo": rational_decimal(&lo, digits, false),
                "hi": rational_decimal(&hi, digits, true),
                "lo_exact": rational_text(&lo),
                "hi_exact": rational_text(&hi),
            }),
        );
        report.constant("beta_star_width", rational_text(&(&hi - &lo)));
        report.constant(
            "inverse_beta_star",
            json!({
                "lo": rational_decimal(&(&one / &hi), digits, false),
                "hi": rational_decimal(&(&one / &lo), digits, true),
            }),
        );
    }
    report.constant("golden_ratio", golden_ratio(precision.max(KL_FLOAT_FLOOR))?);
    let prefix: String = (1..=THUE_MORSE_PREFIX)
        .map(|n| thue_morse(n).map(|b| char::from(b'0' + b)))
        .collect::<Result<_, _>>()?;
    report.constant("thue_morse_prefix", prefix);
    report.constant("defining_equation", "sum over n >= 1 of m_n x^(1-n) = 1, m = 0110 1001 ... (Thue-Morse)");
    Ok(())
}

fn next_up(x: f64) -> f64 {
    if x.is_finite() {
        f64::from_bits(if x >= 0.0 { x.to_bits() + 1 } else { x.to_bits() - 1 })
    } else {
        x
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

fn decompose_check(input: &Input, global: &Global, groups: Option<usize>, report: &mut RunReport) -> CliResult<Option<Vec<u8>>> {
    let sys = input.system(global);
    report.mode = Some(mode_name(sys.mode()));
    let groups = groups.unwrap_or(sys.dimension());
    let depth = global.depth.unwrap_or(2 * groups);
    let r = match sys.mode() {
        ArithmeticMode::Exact => minkowski_decomposition_check::<Rational>(&sys, groups, depth)?,
        ArithmeticMode::Float => minkowski_decomposition_check::<f64>(&sys, groups, depth)?,
    };
    report.verdict("decomposition", if r.equal { "Equal" } else { "Mismatch" });
    report.result("check", r);
    Ok(None)
}

fn project(input: &Input, global: &Global, address: &str, report: &mut RunReport) -> CliResult<Option<Vec<u8>>> {
    let sys = input.system(global);
    report.mode = Some(mode_name(sys.mode()));
    let a: Address = address.parse()?;
    let n = global.depth.unwrap_or(DEFAULT_PROJECTION_LENGTH);
    report.result("address", a.to_string());
    report.result("length", n);
    match sys.mode() {
        ArithmeticMode::Exact => {
            let (point, radius) = project_address::<Rational>(&sys, &a, n)?;
            report.result("point", exact_vector(&point));
            report.result("radius", json!({ "exact": rational_text(&radius), "decimal": rational_f64(&radius) }));
            if a.is_periodic() {
                report.result("limit", exact_vector(&exact_limit::<Rational>(&sys, &a)?));
            }
        }
        ArithmeticMode::Float => {
            let (point, radius) = project_address::<f64>(&sys, &a, n)?;
            report.result("point", json!({ "decimal": point }));
            report.result("radius", json!({ "decimal": radius }));
            if a.is_periodic() {
                report.result("limit", json!({ "decimal": exact_limit::<f64>(&sys, &a)? }));
            }
        }
    }
    Ok(None)
}

fn rational_f64(r: &Rational) -> f64 {
    selfaffine::scalar::rational_to_f64(r)
}

fn exact_vector(v: &[Rational]) -> Value {
    json!({
        "exact": v.iter().map(rational_text).collect::<Vec<_>>(),
        "decimal": v.iter().map(rational_f64).collect::<Vec<_>>(),
    })
}
