use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affine_osserman::classifier::{
    adams_admissible, classify_structure, is_projective_affine_osserman, AdamsVerdict, Bundle, BundleKind,
    BundlePartition, OssermanStatus, SampleConfig,
};
use affine_osserman::extension::{ExtensionKind, ExtensionModel};
use affine_osserman::geometry::{
    curvature, deformed_constant_curvature, geodesic_integrate, nabla_r, plane_wave_base, ricci_from_curvature,
    surface_projective_osserman, PolyConnection,
};
use affine_osserman::poly::{parse_polynomial, Polynomial};
use affine_osserman::spectral::{jordan_profile, spectrum};
use affine_osserman::structure::{realize, CaseLabel, StructureSpec};
use affine_osserman::tensor::{check_affine_symmetries, default_symmetry_tol, jacobi};
use affine_osserman::{Error, Rational, RealTensor};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "osserman", version, about = "Build, classify and probe affine Osserman curvature models")]
#[command(allow_negative_numbers = true)]
struct Cli {
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of random unit vectors sampled by the classifier.
    #[arg(long, global = true, default_value_t = 64)]
    samples: usize,
    /// Spectral clustering and matching tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Print a human-readable summary on stderr.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a model with a prescribed eigenvalue structure.
    Realize(RealizeArgs),
    /// Classify a model file.
    Classify(FileArgs),
    /// Check an eigenbundle partition against the sphere-splitting bound.
    Adams(AdamsArgs),
    /// Curvature, covariant derivative, Ricci, Jordan and geodesic computations.
    Geometry(GeometryArgs),
    /// Check spectral properties of a Riemannian extension.
    Extend(ExtendArgs),
    /// Check the curvature symmetries of a model file.
    Symm(FileArgs),
}

#[derive(Args, Debug)]
struct RealizeArgs {
    /// Case label, for example 2-c or 3-b-ii.
    #[arg(long)]
    case: String,
    #[arg(long)]
    m: usize,
    /// Real eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Complex eigenvalues `a+bi` with `b > 0`, comma separated.
    #[arg(long, value_delimiter = ',')]
    nu: Vec<String>,
    /// Write the model JSON here; otherwise it is embedded in the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FileArgs {
    /// Model JSON file.
    file: PathBuf,
}

#[derive(Args, Debug)]
struct AdamsArgs {
    #[arg(long)]
    m: usize,
    /// Dimensions of real eigenbundles.
    #[arg(long, value_delimiter = ',')]
    real: Vec<usize>,
    /// Dimensions of complex-pair eigenbundles (even).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Builtin {
    DeformedCc,
    Planewave,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Built-in connection.
    #[arg(long, conflicts_with_all = ["file", "flat"])]
    builtin: Option<Builtin>,
    /// Connection JSON file.
    #[arg(long, conflicts_with = "flat")]
    file: Option<PathBuf>,
    /// Flat connection on R^m.
    #[arg(long)]
    flat: bool,
    /// Dimension for the example family and the flat connection.
    #[arg(long)]
    m: Option<usize>,
    /// Parameter of the example family (rational, e.g. 1/2 or 0.25).
    #[arg(long, default_value = "1")]
    eps: String,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Exact curvature table.
    #[arg(long)]
    curvature: bool,
    /// Exact covariant derivative of curvature.
    #[arg(long)]
    nabla_r: bool,
    /// Ricci tensor and, for surfaces with --at, the definiteness criterion.
    #[arg(long)]
    ricci: bool,
    /// Base point for pointwise computations (default: origin).
    #[arg(long, value_delimiter = ',')]
    at: Option<Vec<f64>>,
    /// Jacobi spectrum and Jordan blocks at this direction.
    #[arg(long, value_delimiter = ',')]
    jordan_at: Option<Vec<f64>>,
    /// Sampled Osserman verdict at the base point.
    #[arg(long)]
    classify: bool,
    /// Integrate a geodesic from X0 with velocity V0.
    #[arg(long, num_args = 2, value_names = ["X0", "V0"])]
    geodesic: Option<Vec<String>>,
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Deformed,
    Modified,
}

#[derive(Args, Debug)]
struct ExtendArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Point (x, y) on the cotangent bundle, 2m values (default: fixed nonzero point).
    #[arg(long, value_delimiter = ',')]
    at: Option<Vec<f64>>,
    /// Spacelike and timelike vectors sampled, each.
    #[arg(long, default_value_t = 20)]
    vectors: usize,
    /// Constant symmetric Phi for the deformed extension, row-major m*m entries.
    #[arg(long, value_delimiter = ',')]
    phi: Option<Vec<String>>,
}

struct Outcome {
    report: Value,
    summary: String,
    code: u8,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::Inconsistency(_) => 4,
        _ => 3,
    }
}

fn status_code(s: OssermanStatus) -> u8 {
    match s {
        OssermanStatus::ProjectiveAffineOsserman => 0,
        OssermanStatus::AffineOsserman => 1,
        OssermanStatus::Neither => 2,
    }
}

fn config(cli: &Cli) -> SampleConfig {
    SampleConfig { n_samples: cli.samples, seed: cli.seed, tol: cli.tol }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_complex(s: &str) -> Result<Complex64, Error> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let body = t.strip_suffix('i').ok_or_else(|| invalid(format!("complex value '{s}' must end in i")))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| invalid(format!("bad real part in '{s}'")))?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| invalid(format!("bad imaginary part in '{s}'")))?;
    if !(im > 0.0) {
        return Err(invalid(format!("complex value '{s}' needs a positive imaginary part")));
    }
    Ok(Complex64::new(re, im))
}

fn parse_rational(s: &str) -> Result<Rational, Error> {
    parse_polynomial(s, None)?
        .as_constant()
        .ok_or_else(|| invalid(format!("'{s}' is not a constant")))
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("bad coordinate '{t}' in '{s}'"))))
        .collect::<Result<_, _>>()?;
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    Ok(v)
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(std::fs::read_to_string(path)?)
}

fn load_tensor(path: &Path) -> Result<RealTensor, Error> {
    RealTensor::from_json(&read(path)?)
}

fn load_connection(src: &SourceArgs) -> Result<PolyConnection, Error> {
    if let Some(path) = &src.file {
        return PolyConnection::from_json(&read(path)?);
    }
    if src.flat {
        let m = src.m.ok_or_else(|| invalid("--flat needs --m"))?;
        if m == 0 {
            return Err(invalid("--m must be positive"));
        }
        return Ok(PolyConnection::flat(m));
    }
    match src.builtin {
        Some(Builtin::DeformedCc) => {
            let m = src.m.ok_or_else(|| invalid("--builtin deformed-cc needs --m"))?;
            deformed_constant_curvature(m, &parse_rational(&src.eps)?)
        }
        Some(Builtin::Planewave) => {
            if src.m.is_some_and(|m| m != 3) {
                return Err(invalid("the plane wave lives on R^3"));
            }
            Ok(plane_wave_base())
        }
        None => Err(invalid("give one of --builtin, --file or --flat")),
    }
}

fn poly_table(entries: impl Iterator<Item = (Vec<usize>, String)>) -> Vec<Value> {
    entries.map(|(idx, p)| json!({"index": idx, "value": p})).collect()
}

fn display(p: &Polynomial, base: Option<usize>) -> String {
    p.display_with(base)
}

fn cmd_realize(cli: &Cli, a: &RealizeArgs) -> Result<Outcome, Error> {
    let case: CaseLabel = a.case.parse()?;
    let nu = a.nu.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
    let spec = StructureSpec::new(case, a.m, a.lambda.clone(), nu);
    spec.validate()?;
    let model = realize(&spec)?;
    let mu = spec.mu_vector()?;
    let cls = classify_structure(&model, &config(cli))?;
    let mut report = json!({
        "spec": spec.to_file(),
        "mu": spec.slot_mu(),
        "mu_canonical": mu.entries(),
        "classification": cls.report(),
    });
    match &a.out {
        Some(path) => {
            std::fs::write(path, model.to_json())?;
            report["model_path"] = json!(path.display().to_string());
        }
        None => report["model"] = serde_json::to_value(model.to_file()).expect("serializable"),
    }
    let summary = format!(
        "case {} m={} mu={:?} adams={} matched={}",
        case,
        a.m,
        spec.slot_mu(),
        adams_str(&cls.adams),
        cls.case().map(|c| c.to_string()).unwrap_or_else(|| "unlisted".into())
    );
    Ok(Outcome { report, summary, code: 0 })
}

fn adams_str(v: &AdamsVerdict) -> String {
    match v {
        AdamsVerdict::Admissible => "admissible".into(),
        AdamsVerdict::Unconstrained => "unconstrained".into(),
        AdamsVerdict::Inadmissible(r) => format!("inadmissible ({r})"),
    }
}

fn cmd_classify(cli: &Cli, a: &FileArgs) -> Result<Outcome, Error> {
    let model = load_tensor(&a.file)?;
    let verdict = is_projective_affine_osserman(&model, &config(cli))?;
    let status = verdict.status;
    let (report, label) = if status == OssermanStatus::ProjectiveAffineOsserman {
        let cls = classify_structure(&model, &config(cli))?;
        let label = cls.case().map(|c| c.to_string()).unwrap_or_else(|| "unlisted".into());
        let mut r = cls.report();
        r["case"] = json!(label);
        (r, label)
    } else {
        let mut r = verdict.report();
        r["case"] = Value::Null;
        (r, "-".into())
    };
    let summary = format!(
        "status {} case {} mu {} worst residual {:e}",
        status.as_str(),
        label,
        verdict.mu.as_ref().map_or("-".into(), |m| format!("{:?}", m.entries())),
        verdict.worst_residual
    );
    Ok(Outcome { report, summary, code: status_code(status) })
}

fn cmd_adams(a: &AdamsArgs) -> Result<Outcome, Error> {
    let mut bundles: Vec<Bundle> = a.real.iter().map(|&dim| Bundle { dim, kind: BundleKind::Real }).collect();
    bundles.extend(a.pairs.iter().map(|&dim| Bundle { dim, kind: BundleKind::ComplexPair }));
    let partition = BundlePartition { m: a.m, bundles };
    let verdict = adams_admissible(a.m, &partition)?;
    let code = if matches!(verdict, AdamsVerdict::Inadmissible(_)) { 2 } else { 0 };
    let summary = format!("m={} {}", a.m, adams_str(&verdict));
    Ok(Outcome { report: json!({"partition": partition, "adams": verdict}), summary, code })
}

fn cmd_geometry(cli: &Cli, a: &GeometryArgs) -> Result<Outcome, Error> {
    let conn = load_connection(&a.source)?;
    let m = conn.dim();
    let base = conn.base_dim();
    let point = match &a.at {
        Some(p) if p.len() != m => return Err(Error::DimensionMismatch { expected: m, got: p.len() }),
        Some(p) => p.clone(),
        None => vec![0.0; m],
    };
    let any = a.curvature || a.nabla_r || a.ricci || a.jordan_at.is_some() || a.classify || a.geodesic.is_some();
    let r = curvature(&conn)?;
    let mut report = json!({"dim": m, "point": point});
    let mut lines = Vec::new();

    if a.curvature || !any {
        let table = poly_table(
            r.nonzero_entries()
                .map(|(i, j, k, l, p)| (vec![i + 1, j + 1, k + 1, l + 1], display(p, base))),
        );
        lines.push(format!("{} nonzero curvature components", table.len()));
        report["curvature"] = json!(table);
    }
    if a.nabla_r {
        let nr = nabla_r(&conn, &r)?;
        let mut table = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for n in 0..m {
                        for l in 0..m {
                            let p = nr.get(i, j, k, n, l);
                            if !p.is_zero() {
                                table.push((vec![i + 1, j + 1, k + 1, n + 1, l + 1], display(p, base)));
                            }
                        }
                    }
                }
            }
        }
        lines.push(format!("{} nonzero covariant-derivative components", table.len()));
        report["nabla_r"] = json!(poly_table(table.into_iter()));
        report["nabla_r_zero"] = json!(nr.is_zero());
    }
    if a.ricci {
        let ric = ricci_from_curvature(&r);
        let mat = |v: &[Polynomial]| -> Vec<Vec<String>> {
            (0..m).map(|j| (0..m).map(|k| display(&v[j * m + k], base)).collect()).collect()
        };
        report["ricci"] = json!({
            "rho": mat(&ric.rho),
            "symmetric": mat(&ric.symmetric),
            "antisymmetric": mat(&ric.antisymmetric),
            "symmetric_at": ric.symmetric_at(&point)?,
        });
        if m == 2 {
            let v = surface_projective_osserman(&conn, &point, &config(cli))?;
            lines.push(format!(
                "rho_s = {:?}: {} (sampled verdict {})",
                v.rho_s,
                if v.definite { "definite" } else { "not definite" },
                v.sampled.as_str()
            ));
            report["surface"] = serde_json::to_value(&v).expect("serializable");
        }
    }
    if a.classify {
        let t = r.at_f64(&point)?;
        let v = is_projective_affine_osserman(&t, &config(cli))?;
        lines.push(format!("verdict at point: {}", v.status.as_str()));
        report["verdict"] = v.report();
    }
    if let Some(x) = &a.jordan_at {
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(invalid("--jordan-at needs a nonzero direction"));
        }
        let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let t = r.at_f64(&point)?;
        let j = jacobi(&t, &x)?;
        let spec = spectrum(&j, cli.tol)?;
        let mut blocks = Vec::new();
        for e in spec.items() {
            let p = jordan_profile(&j, e.value, cli.tol)?;
            lines.push(format!("eigenvalue {} blocks {:?}", e.value, p.block_sizes));
            blocks.push(json!({
                "eigenvalue": [e.value.re, e.value.im],
                "multiplicity": e.mult,
                "block_sizes": p.block_sizes,
                "rank_sequence": p.rank_sequence,
            }));
        }
        report["jordan"] = json!({"direction": x, "spectrum": spec.to_file(), "blocks": blocks});
    }
    if let Some(g) = &a.geodesic {
        let x0 = parse_point(&g[0], m)?;
        let v0 = parse_point(&g[1], m)?;
        let res = geodesic_integrate(&conn, &x0, &v0, a.t_max, a.step)?;
        let last = res.times.len() - 1;
        lines.push(match res.blow_up {
            Some(t) => format!("geodesic blows up at t = {t:.6}"),
            None => format!("geodesic reached t = {}", res.times[last]),
        });
        report["geodesic"] = json!({
            "x0": x0,
            "v0": v0,
            "t_max": a.t_max,
            "steps": last,
            "blow_up": res.blow_up,
            "final_time": res.times[last],
            "final_position": res.positions[last],
            "final_velocity": res.velocities[last],
        });
    }
    Ok(Outcome { report, summary: lines.join("\n"), code: 0 })
}

fn default_extension_point(m: usize) -> Vec<f64> {
    (0..2 * m).map(|i| 0.1 * (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

fn cmd_extend(cli: &Cli, a: &ExtendArgs) -> Result<Outcome, Error> {
    let conn = load_connection(&a.source)?;
    let m = conn.dim();
    let kind = match a.kind {
        Kind::Deformed => ExtensionKind::Deformed,
        Kind::Modified => ExtensionKind::Modified,
    };
    let phi = match &a.phi {
        Some(entries) => Some(
            entries
                .iter()
                .map(|s| parse_polynomial(s, Some(m)))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let point = match &a.at {
        Some(p) if p.len() != 2 * m => return Err(Error::DimensionMismatch { expected: 2 * m, got: p.len() }),
        Some(p) => p.clone(),
        None => default_extension_point(m),
    };
    let model = ExtensionModel::new(kind, &conn, phi.as_deref())?;
    let r = model.check_at(&point, a.vectors, cli.seed, cli.tol)?;
    let summary = r
        .clauses
        .iter()
        .map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { report: r.report(), summary, code: if r.pass { 0 } else { 2 } })
}

fn cmd_symm(a: &FileArgs) -> Result<Outcome, Error> {
    let model = load_tensor(&a.file)?;
    let rep = check_affine_symmetries(&model, default_symmetry_tol(&model));
    let summary = format!(
        "antisymmetry defect {:e}, Bianchi defect {:e}: {}",
        rep.antisymmetry_defect,
        rep.bianchi_defect,
        if rep.pass { "pass" } else { "fail" }
    );
    Ok(Outcome { report: serde_json::to_value(rep).expect("serializable"), summary, code: if rep.pass { 0 } else { 2 } })
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    if !(cli.tol > 0.0) {
        return Err(invalid("--tol must be positive"));
    }
    match &cli.command {
        Command::Realize(a) => cmd_realize(cli, a),
        Command::Classify(a) => cmd_classify(cli, a),
        Command::Adams(a) => cmd_adams(a),
        Command::Geometry(a) => cmd_geometry(cli, a),
        Command::Extend(a) => cmd_extend(cli, a),
        Command::Symm(a) => cmd_symm(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.report).expect("serializable") + "\n";
            match &cli.json_out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(3);
                    }
                }
                None => {
                    use std::io::Write;
                    let mut out = std::io::stdout().lock();
                    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                        return ExitCode::from(3);
                    }
                }
            }
            if cli.pretty {
                eprintln!("{}", out.summary);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
