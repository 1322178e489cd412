//! `hd`: curve generation, mapping export, loss evaluation, training and benchmarks.
//!
//! Exit codes: 0 success, 1 runtime or domain error, 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use hd_core::tensor_file::read_tensor;
use hd_core::{
    activation_mask, build_mapping, distill_channels, render_svg, vh_mapping, ActivationMask, CurveSpec, FeatureStack,
    Layout, LossOptions, MappingTable, Region, Sampling, Tensor,
};
use hd_core::curve::MappingFile;
use hd_harness::{bench_curve, format_rows, run_arms, HarnessConfig, HarnessError, LossKind, RunReport};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hd", version, about = "Hilbert-curve mappings and cross-dimensional distillation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a mapping table for a full hypercube or a sub-region.
    GenCurve(GenCurve),
    /// Build a variable-length mapping table from an activation mask.
    GenVh(GenVh),
    /// Evaluate the distillation loss between a teacher and a student feature tensor.
    Loss(LossCmd),
    /// Train a teacher and one student per configured loss kind.
    Train(Train),
    /// Time full-hypercube mapping construction.
    Bench(Bench),
}

#[derive(Args)]
struct GenCurve {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u32,
    /// Comma-separated extents, one per axis; defaults to the full hypercube.
    #[arg(long, value_delimiter = ',')]
    region: Option<Vec<usize>>,
    #[arg(long, default_value = "padded")]
    layout: Layout,
    /// `.json` or `.hdmt`; JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG drawing of the curve (n = 2 only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GenVh {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u32,
    /// HDTN tensor of 0/1 values; its shape is the region.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Kind {
    Hd,
    Vhd,
}

#[derive(Args)]
struct LossCmd {
    /// HDTN tensor, `D×H×W` or channel-stacked `C×D×H×W`.
    #[arg(long)]
    teacher: PathBuf,
    /// HDTN tensor, `H×W` or channel-stacked `C×H×W`.
    #[arg(long)]
    student: PathBuf,
    #[arg(long, value_enum, default_value = "hd")]
    kind: Kind,
    /// Activation maps for `vhd`; the channel sum of the features when omitted.
    #[arg(long)]
    teacher_am: Option<PathBuf>,
    #[arg(long)]
    student_am: Option<PathBuf>,
    /// Replace each activation map by its 0/1 mask `sigmoid(AM) > θ`.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value = "left")]
    sampling: Sampling,
    #[arg(long, default_value = "compacted")]
    layout: Layout,
    /// Also report gradient norms.
    #[arg(long)]
    grads: bool,
}

#[derive(Args)]
struct Train {
    /// JSON or TOML harness config; `loss_kind` may be a list of arms.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated arms, overriding the config.
    #[arg(long, value_delimiter = ',')]
    loss_kind: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct Bench {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256")]
    sides: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long)]
    pretty: bool,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        match e.downcast_ref::<HarnessError>() {
            Some(HarnessError::Config { .. }) => Failure::Usage(e),
            _ => Failure::Domain(e),
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenCurve(a) => gen_curve(a),
        Command::GenVh(a) => gen_vh(a),
        Command::Loss(a) => loss(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_mapping(file: &MappingFile, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        None => println!("{}", file.to_json()?),
        Some(path) => {
            let bytes = match path.extension().and_then(|e| e.to_str()) {
                Some("hdmt") => file.to_hdmt()?,
                Some("json") => file.to_json()?.into_bytes(),
                _ => bail!("output {} must end in .json or .hdmt", path.display()),
            };
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn gen_curve(a: GenCurve) -> Result<(), Failure> {
    let spec = CurveSpec::new(a.n, a.p)?;
    if a.svg.is_some() && a.n != 2 {
        return Err(usage(format!("--svg requires n = 2, got n = {}", a.n)));
    }
    let region = match &a.region {
        Some(ext) => Region::new(ext)?,
        None => spec.full_region(),
    };
    let table = build_mapping(spec, &region, a.layout)?;
    write_mapping(&MappingFile::from_table(&table), a.out.as_deref())?;
    if let Some(path) = &a.svg {
        std::fs::write(path, render_svg(&table)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn gen_vh(a: GenVh) -> Result<(), Failure> {
    let spec = CurveSpec::new(a.n, a.p)?;
    let mask = ActivationMask::from_tensor(&read_tensor(&a.mask).with_context(|| format!("reading {}", a.mask.display()))?)?;
    let table = vh_mapping(spec, &mask.region().clone(), &mask)?;
    write_mapping(&MappingFile::from_vh(&table), a.out.as_deref())?;
    Ok(())
}

/// Smallest order whose side covers every extent.
fn order_for(extents: &[usize]) -> u32 {
    let m = extents.iter().copied().max().unwrap_or(1).max(2);
    m.next_power_of_two().trailing_zeros()
}

/// Promotes a single map to a one-channel stack.
fn stack(t: Tensor<f32>, spatial: usize, what: &str) -> Result<FeatureStack<f64>, Failure> {
    let t = t.cast::<f64>();
    let t = match t.ndim() {
        r if r == spatial => {
            let shape = [&[1], t.shape()].concat();
            t.reshape(&shape)?
        }
        r if r == spatial + 1 => t,
        r => {
            return Err(usage(format!("{what} tensor has rank {r}; expected {spatial} or {}", spatial + 1)));
        }
    };
    Ok(FeatureStack::new(t)?)
}

fn table_for(fs: &FeatureStack<f64>, layout: Layout) -> Result<MappingTable, Failure> {
    let ext = fs.spatial_shape().to_vec();
    let spec = CurveSpec::new(ext.len(), order_for(&ext))?;
    Ok(build_mapping(spec, &Region::new(&ext)?, layout)?)
}

fn activation(fs: &FeatureStack<f64>, file: Option<&PathBuf>, theta: Option<f64>) -> Result<Tensor<f64>, Failure> {
    let am = match file {
        Some(p) => read_tensor(p).with_context(|| format!("reading {}", p.display()))?.cast::<f64>(),
        None => hd_core::activation_map(fs, &vec![1.0; fs.channels()])?,
    };
    if am.shape() != fs.spatial_shape() {
        return Err(usage(format!(
            "activation map shape {:?} does not match feature extents {:?}",
            am.shape(),
            fs.spatial_shape()
        )));
    }
    Ok(match theta {
        Some(t) => {
            let mask = activation_mask(&am, t)?;
            Tensor::from_vec(am.shape(), mask.as_slice().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())?
        }
        None => am,
    })
}

fn loss(a: LossCmd) -> Result<(), Failure> {
    let read = |p: &PathBuf| read_tensor(p).with_context(|| format!("reading {}", p.display()));
    let teacher = stack(read(&a.teacher)?, 3, "teacher")?;
    // A depth-1 volume is a plain map; walk it with the 2D curve like the student.
    let teacher = match teacher.spatial_shape() {
        [1, h, w] => FeatureStack::new(teacher.as_tensor().clone().reshape(&[teacher.channels(), *h, *w])?)?,
        _ => teacher,
    };
    let student = stack(read(&a.student)?, 2, "student")?;
    let (tt, ts) = (table_for(&teacher, a.layout)?, table_for(&student, a.layout)?);
    let opts = LossOptions {
        sampling: a.sampling,
        layout: a.layout,
    };
    let ams = match a.kind {
        Kind::Hd => None,
        Kind::Vhd => Some((
            activation(&teacher, a.teacher_am.as_ref(), a.theta)?,
            activation(&student, a.student_am.as_ref(), a.theta)?,
        )),
    };
    let report = distill_channels(&teacher, &tt, &student, &ts, ams.as_ref().map(|(t, s)| (t, s)), &opts)?;
    let mut out = json!({
        "kind": match a.kind { Kind::Hd => "hd", Kind::Vhd => "vhd" },
        "channels": teacher.channels(),
        "value": report.value,
    });
    if a.grads {
        out["grad_student_norm"] = json!(report.grad_student.norm2().sqrt());
        out["grad_teacher_norm"] = json!(report.grad_teacher.as_ref().map(|g| g.norm2().sqrt()));
    }
    println!("{}", serde_json::to_string(&out).map_err(anyhow::Error::from)?);
    Ok(())
}

fn train(a: Train) -> Result<(), Failure> {
    let (mut cfg, mut kinds) = match &a.config {
        Some(p) => HarnessConfig::arms_from_file(p)?,
        None => (HarnessConfig::default(), vec![LossKind::None, LossKind::Hd]),
    };
    if let Some(list) = &a.loss_kind {
        kinds = list.iter().map(|k| k.parse()).collect::<Result<_, HarnessError>>()?;
    }
    if let Ok(s) = std::env::var("HD_SEED") {
        cfg.seed = s.trim().parse().map_err(|_| usage(format!("HD_SEED must be an unsigned integer, got {s:?}")))?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let (teacher, students) = run_arms(&cfg, &kinds)?;
    if a.pretty {
        print!("{}", report_table(teacher.as_ref(), &students));
    } else {
        let out = json!({ "teacher": teacher, "students": students });
        println!("{}", serde_json::to_string(&out).map_err(anyhow::Error::from)?);
    }
    Ok(())
}

fn report_table(teacher: Option<&RunReport>, students: &[RunReport]) -> String {
    let mut s = format!("{:<8} {:<5} {:>6} {:>9} {:>9} {:>11}\n", "role", "kind", "seed", "train_%", "test_%", "final_loss");
    for r in teacher.into_iter().chain(students) {
        s.push_str(&format!(
            "{:<8} {:<5} {:>6} {:>9.2} {:>9.2} {:>11.4}\n",
            r.role,
            r.loss_kind.name(),
            r.seed,
            r.train_accuracy,
            r.test_accuracy,
            r.epoch_losses.last().copied().unwrap_or(f64::NAN)
        ));
    }
    s
}

fn bench(a: Bench) -> Result<(), Failure> {
    let specs = a
        .sides
        .iter()
        .map(|&side| {
            if !side.is_power_of_two() || side < 2 {
                return Err(usage(format!("side {side} is not a power of two ≥ 2")));
            }
            Ok(CurveSpec::new(a.n, side.trailing_zeros())?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let rows = bench_curve(&specs, a.runs)?;
    if a.pretty {
        print!("{}", format_rows(&rows));
    } else {
        println!("{}", serde_json::to_string(&rows).map_err(anyhow::Error::from)?);
    }
    Ok(())
}
