mod render;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ellipse_spectra::model::group_labels;
use ellipse_spectra::perturbation::rational_to_f64;
use ellipse_spectra::solver::{class_spectra, merge, IMAG_TOLERANCE, PAIRING_TOLERANCE};
use ellipse_spectra::{
    convergence_scan, eigenvalue_series, scan, solve, Error, Execution, ModelKind, RitzSystem,
    SymmetryClass,
};
use serde_json::{json, Map, Value};

use render::{exact, sig10, table, OutputFormat};

#[derive(Parser)]
#[command(
    name = "ellipse-spectra",
    version,
    about = "Spectra of a particle on an elliptical path"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues of one class, or of all four with the merged list.
    Spectrum(SpectrumArgs),
    /// Eigenvalues for each basis size in a range.
    Converge(ConvergeArgs),
    /// Exact perturbation series of one level.
    Pt(PtArgs),
    /// Eigenvalues and perturbative references over a deformation grid (CSV).
    Scan(ScanArgs),
    /// Consistency checks with pass/fail report.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    M1,
    M2,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::M1 => ModelKind::PathNonHermitian,
            ModelArg::M2 => ModelKind::PathHermitian,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Pp,
    Pm,
    Mp,
    Mm,
    All,
}

impl ClassArg {
    fn single(self) -> Option<SymmetryClass> {
        match self {
            ClassArg::Pp => Some(SymmetryClass::PP),
            ClassArg::Pm => Some(SymmetryClass::PM),
            ClassArg::Mp => Some(SymmetryClass::MP),
            ClassArg::Mm => Some(SymmetryClass::MM),
            ClassArg::All => None,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, allow_negative_numbers = true)]
    xi: f64,
    #[arg(long, value_enum, default_value_t = ClassArg::All)]
    class: ClassArg,
    #[arg(long, default_value_t = 12)]
    size: usize,
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, allow_negative_numbers = true)]
    xi: f64,
    #[arg(long, value_enum)]
    class: ClassArg,
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

#[derive(Args)]
struct PtArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    level: u32,
    /// Required for model 2 levels n >= 1, which two classes share.
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    #[arg(long, default_value_t = 4)]
    order: usize,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, allow_negative_numbers = true)]
    xi_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    xi_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 12)]
    size: usize,
    #[arg(long, default_value_t = 4)]
    levels: u32,
    /// Destination file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum, default_value_t = suites::Suite::All)]
    suite: suites::Suite,
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    #[arg(long)]
    size: Option<usize>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. }
            | Error::InvalidArgument(_)
            | Error::LevelNotInClass { .. }
            | Error::SizeTooLarge { .. } => 1,
            Error::CholeskyFailure { .. }
            | Error::RealityViolation { .. }
            | Error::NonConvergence { .. }
            | Error::BiorthogonalityFailure { .. }
            | Error::RefinementStalled { .. } => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<String, Failure>;

/// Report text and whether every assertion held.
type Report = Result<(String, bool), Failure>;

fn meta(model: Option<ModelKind>, xi: Option<f64>, size: Option<usize>) -> Map<String, Value> {
    let Value::Object(map) = json!({
        "model": model.map(ModelKind::short_name),
        "xi": xi,
        "N": size,
        "tolerances": {
            "imaginary_part": IMAG_TOLERANCE,
            "degeneracy": PAIRING_TOLERANCE,
        },
        "version": env!("CARGO_PKG_VERSION"),
    }) else {
        unreachable!("object literal")
    };
    map
}

fn json_document(meta: Map<String, Value>, data: Value) -> String {
    let doc = json!({ "meta": meta, "data": data });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn class_banner(class: SymmetryClass) -> String {
    let (d2, c2v) = group_labels(class);
    format!("{class} {d2}/{c2v}")
}

fn cmd_spectrum(args: &SpectrumArgs, format: OutputFormat) -> Outcome {
    let model = ModelKind::from(args.model);
    let meta = meta(Some(model), Some(args.xi), Some(args.size));
    if let Some(class) = args.class.single() {
        let system = RitzSystem::build(model, class, args.xi, args.size)?;
        let spectrum = solve(&system, args.levels)?;
        let (d2, c2v) = group_labels(class);
        return Ok(match format {
            OutputFormat::Text => {
                let rows: Vec<Vec<String>> = spectrum
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(k, &e)| vec![k.to_string(), sig10(e)])
                    .collect();
                table(&["k".into(), class_banner(class)], &rows)
            }
            OutputFormat::Csv => {
                csv(
                    "k,class,d2_label,c2v_label,energy",
                    spectrum.eigenvalues.iter().enumerate().map(|(k, &e)| {
                        format!("{k},{},{d2},{c2v},{}", class.short_name(), exact(e))
                    }),
                )
            }
            OutputFormat::Json => json_document(
                meta,
                spectrum
                    .eigenvalues
                    .iter()
                    .zip(&spectrum.imag_residuals)
                    .enumerate()
                    .map(|(k, (&e, &im))| {
                        json!({
                            "k": k, "class": class.short_name(), "d2_label": d2,
                            "c2v_label": c2v, "energy": e, "imag_residual": im,
                        })
                    })
                    .collect(),
            ),
        });
    }

    // the zero mode of (+,+) gets its own row, so that block reports one extra level
    let per_class = args.levels + 1;
    let spectra = class_spectra(model, args.xi, args.size, per_class, Execution::default())?;
    let column = |class: SymmetryClass| {
        let s = spectra
            .iter()
            .find(|s| s.class == class)
            .expect("all classes solved");
        let skip = usize::from(class != SymmetryClass::PP);
        let mut values: Vec<Option<f64>> = vec![None; skip];
        values.extend(
            s.eigenvalues
                .iter()
                .take(args.levels + 1 - skip)
                .map(|&e| Some(e)),
        );
        values
    };
    let layout = [
        SymmetryClass::PP,
        SymmetryClass::MP,
        SymmetryClass::PM,
        SymmetryClass::MM,
    ];
    let columns: Vec<Vec<Option<f64>>> = layout.iter().map(|&c| column(c)).collect();
    let merged = merge(model, args.xi, args.size, 4 * per_class, &spectra);
    let listed: Vec<_> = merged.levels.iter().take(2 * args.levels + 1).collect();

    Ok(match format {
        OutputFormat::Text => {
            let header: Vec<String> = layout.iter().map(|c| c.to_string()).collect();
            let rows: Vec<Vec<String>> = (0..=args.levels)
                .map(|r| {
                    columns
                        .iter()
                        .map(|col| col.get(r).copied().flatten().map(sig10).unwrap_or_default())
                        .collect()
                })
                .collect();
            let mut out = table(&header, &rows);
            out.push('\n');
            let merged_rows: Vec<Vec<String>> = listed
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    vec![
                        i.to_string(),
                        sig10(l.energy),
                        l.class.to_string(),
                        l.d2_label.to_string(),
                        l.c2v_label.to_string(),
                        l.unperturbed_index.to_string(),
                    ]
                })
                .collect();
            let header = ["#", "energy", "class", "D2", "C2v", "n"].map(String::from);
            out.push_str(&table(&header, &merged_rows));
            out
        }
        OutputFormat::Csv => csv(
            "rank,energy,class,d2_label,c2v_label,level_index",
            listed.iter().enumerate().map(|(i, l)| {
                format!(
                    "{i},{},{},{},{},{}",
                    exact(l.energy),
                    l.class.short_name(),
                    l.d2_label,
                    l.c2v_label,
                    l.unperturbed_index
                )
            }),
        ),
        OutputFormat::Json => json_document(
            meta,
            json!({
                "classes": layout.iter().zip(&columns).map(|(c, col)| json!({
                    "class": c.short_name(),
                    "energies": col.iter().flatten().collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "merged": listed.iter().map(|l| json!({
                    "energy": l.energy,
                    "class": l.class.short_name(),
                    "d2_label": l.d2_label,
                    "c2v_label": l.c2v_label,
                    "level_index": l.unperturbed_index,
                    "imag_residual": l.imag_residual,
                })).collect::<Vec<_>>(),
            }),
        ),
    })
}

fn cmd_converge(args: &ConvergeArgs, format: OutputFormat) -> Outcome {
    let model = ModelKind::from(args.model);
    let class = args
        .class
        .single()
        .ok_or_else(|| Failure::usage("converge needs a single class: pp, pm, mp or mm"))?;
    let t = convergence_scan(model, class, args.xi, args.n_min, args.n_max, args.levels)?;
    let level_names: Vec<String> = (0..args.levels).map(|k| format!("E{k}")).collect();
    Ok(match format {
        OutputFormat::Text => {
            let mut header = vec!["N".to_string()];
            header.extend(level_names);
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.size.to_string()];
                    row.extend(r.eigenvalues.iter().map(|&e| sig10(e)));
                    row
                })
                .collect();
            table(&header, &rows)
        }
        OutputFormat::Csv => csv(
            &format!("N,{}", level_names.join(",")),
            t.rows.iter().map(|r| {
                let values: Vec<String> = r.eigenvalues.iter().map(|&e| exact(e)).collect();
                format!("{},{}", r.size, values.join(","))
            }),
        ),
        OutputFormat::Json => json_document(
            {
                let mut m = meta(Some(model), Some(args.xi), None);
                m.insert("class".into(), class.short_name().into());
                m.insert("N_range".into(), json!([args.n_min, args.n_max]));
                m
            },
            t.rows
                .iter()
                .map(|r| json!({ "N": r.size, "energies": r.eigenvalues }))
                .collect(),
        ),
    })
}

fn cmd_pt(args: &PtArgs, format: OutputFormat) -> Outcome {
    let model = ModelKind::from(args.model);
    let class = match args.class {
        Some(c) => c
            .single()
            .ok_or_else(|| Failure::usage("pt needs a single class: pp, pm, mp or mm"))?,
        None => match SymmetryClass::partners_of_level(args.level) {
            None => SymmetryClass::PP,
            // both classes carry the same series in model 1
            Some((first, _)) if model == ModelKind::PathNonHermitian => first,
            Some((a, b)) => {
                return Err(Failure::usage(format!(
                    "level {} of model m2 is shared by {} and {}; pass --class {} or --class {}",
                    args.level,
                    a,
                    b,
                    a.short_name(),
                    b.short_name()
                )))
            }
        },
    };
    if class.position_of_level(args.level).is_none() {
        return Err(Error::LevelNotInClass {
            level: args.level,
            class,
        }
        .into());
    }
    let series = eigenvalue_series(model, class, args.level, args.order)?;
    let fractions = series.coefficient_strings();
    let values: Vec<f64> = series.coefficients.iter().map(rational_to_f64).collect();
    Ok(match format {
        OutputFormat::Text => {
            let rows: Vec<Vec<String>> = fractions
                .iter()
                .zip(&values)
                .enumerate()
                .map(|(j, (f, &v))| vec![j.to_string(), f.clone(), sig10(v)])
                .collect();
            let header = [
                "j".to_string(),
                format!("E_{}^(j) {}", args.level, class),
                "value".into(),
            ];
            table(&header, &rows)
        }
        OutputFormat::Csv => csv(
            "order,fraction,value",
            fractions
                .iter()
                .zip(&values)
                .enumerate()
                .map(|(j, (f, &v))| format!("{j},{f},{}", exact(v))),
        ),
        OutputFormat::Json => json_document(
            {
                let mut m = meta(Some(model), None, None);
                m.insert("class".into(), class.short_name().into());
                m.insert("level".into(), args.level.into());
                m
            },
            fractions
                .iter()
                .zip(&values)
                .enumerate()
                .map(|(j, (f, &v))| json!({ "order": j, "fraction": f, "value": v }))
                .collect(),
        ),
    })
}

fn cmd_scan(args: &ScanArgs, format: OutputFormat) -> Outcome {
    let model = ModelKind::from(args.model);
    let grid = scan(
        model,
        args.xi_min,
        args.xi_max,
        args.steps,
        args.size,
        args.levels,
    )?;
    let body = match format {
        OutputFormat::Json => json_document(
            meta(Some(model), None, Some(args.size)),
            grid.rows
                .iter()
                .map(|r| {
                    json!({
                        "xi": r.xi, "level_index": r.level_index, "class": r.class.short_name(),
                        "d2_label": r.d2_label, "energy": r.energy,
                        "pt_first_order": r.pt_first_order, "pt_improved": r.pt_improved,
                        "pt_series4": r.pt_series4,
                    })
                })
                .collect(),
        ),
        OutputFormat::Text | OutputFormat::Csv => grid.to_csv(),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, body)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

fn run(cli: &Cli) -> Report {
    let text = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, cli.format)?,
        Command::Converge(a) => cmd_converge(a, cli.format)?,
        Command::Pt(a) => cmd_pt(a, cli.format)?,
        Command::Scan(a) => cmd_scan(a, cli.format)?,
        Command::Check(a) => return suites::cmd_check(a, cli.format),
    };
    Ok((text, true))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok((text, passed)) => {
            print!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
