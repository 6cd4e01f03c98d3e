use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use suborbifold::corpus::{run_corpus, CorpusError};
use suborbifold::linalg::parse_rational;
use suborbifold::scene::{parse_raw, run_scene, RawQuery, Report, RunOptions, Scalar, Scene, SceneOptions};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "suborb", version, about = "Classify suborbifolds of finite linear quotients")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the machine-readable report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Run independent queries concurrently; report order is unchanged.
    #[arg(long, global = true)]
    parallel: bool,

    /// Upper bound on enumerated group orders.
    #[arg(long, global = true)]
    max_order: Option<usize>,

    /// Partition depth for metric checks.
    #[arg(long, global = true)]
    depth: Option<u32>,

    /// Tolerance for metric checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Saturation, fullness and embeddedness of a candidate.
    Classify {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        candidate: String,
        /// Also try every subgroup of the chart group when the given one does not split.
        #[arg(long)]
        search_all: bool,
        /// Points (comma-separated rationals) at which to report isotropy.
        #[arg(long = "point")]
        points: Vec<String>,
    },
    /// Isotropy of a candidate at a point, computed two ways.
    Isotropy {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        candidate: String,
        #[arg(long)]
        point: String,
    },
    /// Intersection of two transverse full candidates.
    Intersect {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Preimage of a full candidate under a transverse map.
    Preimage {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        candidate: String,
    },
    /// Graph of a map in the product chart.
    Graph {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// Image of a saturated candidate under an immersion.
    Image {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        candidate: String,
    },
    /// Compare the quotient and intrinsic metrics on a probe.
    MetricCheck {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        probe: String,
    },
    /// Run the built-in examples against their expected verdicts.
    Corpus {
        /// Only cases whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Run every query listed in a scene.
    Run {
        #[arg(long)]
        scene: PathBuf,
    },
}

fn parse_point(text: &str) -> Result<Vec<Scalar>, String> {
    text.split(',')
        .map(|s| parse_rational(s).map(Scalar).map_err(|_| format!("`{s}` is not a rational")))
        .collect()
}

/// The query a single-purpose subcommand stands for; `None` for `run`.
fn query_for(command: &Command) -> Result<Option<RawQuery>, String> {
    let expect = BTreeMap::new;
    let q = match command {
        Command::Classify {
            candidate,
            search_all,
            points,
            ..
        } => RawQuery::Classify {
            candidate: candidate.clone(),
            search_all: *search_all,
            points: points.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?,
            expect: expect(),
        },
        Command::Isotropy { candidate, point, .. } => RawQuery::Isotropy {
            candidate: candidate.clone(),
            point: parse_point(point)?,
            expect: expect(),
        },
        Command::Intersect { first, second, .. } => RawQuery::Intersect {
            first: first.clone(),
            second: second.clone(),
            expect: expect(),
        },
        Command::Preimage { map, candidate, .. } => RawQuery::Preimage {
            map: map.clone(),
            candidate: candidate.clone(),
            expect: expect(),
        },
        Command::Graph { map, .. } => RawQuery::Graph {
            map: map.clone(),
            expect: expect(),
        },
        Command::Image { map, candidate, .. } => RawQuery::Image {
            map: map.clone(),
            candidate: candidate.clone(),
            expect: expect(),
        },
        Command::MetricCheck { probe, .. } => RawQuery::MetricCheck {
            probe: probe.clone(),
            expect: expect(),
        },
        Command::Run { .. } | Command::Corpus { .. } => return Ok(None),
    };
    Ok(Some(q))
}

fn scene_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Classify { scene, .. }
        | Command::Isotropy { scene, .. }
        | Command::Intersect { scene, .. }
        | Command::Preimage { scene, .. }
        | Command::Graph { scene, .. }
        | Command::Image { scene, .. }
        | Command::MetricCheck { scene, .. }
        | Command::Run { scene } => Some(scene),
        Command::Corpus { .. } => None,
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), u8> {
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, report.to_machine()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return Err(EXIT_INPUT);
        }
    }
    match cli.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Machine => print!("{}", report.to_machine()),
    }
    Ok(())
}

fn exit_code(report: &Report) -> u8 {
    let failures: Vec<_> = report.queries.iter().filter_map(|q| q.unexpected_failure()).collect();
    if failures.iter().any(|f| f.internal) {
        EXIT_INTERNAL
    } else if report.has_mismatch() {
        EXIT_MISMATCH
    } else if !failures.is_empty() {
        EXIT_INPUT
    } else {
        0
    }
}

fn run(cli: &Cli) -> u8 {
    let options = RunOptions {
        parallel: cli.parallel,
        depth: cli.depth,
        tolerance: cli.tol,
    };

    if let Command::Corpus { filter } = &cli.command {
        return match run_corpus(filter.as_deref(), &options) {
            Ok(report) => emit(cli, &report).map_or_else(|c| c, |_| 0),
            Err(CorpusError::CorpusMismatch { differences, report }) => {
                if let Err(code) = emit(cli, &report) {
                    return code;
                }
                for d in differences {
                    eprintln!("mismatch: {d}");
                }
                if report.queries.iter().filter_map(|q| q.unexpected_failure()).any(|f| f.internal) {
                    EXIT_INTERNAL
                } else {
                    EXIT_MISMATCH
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INTERNAL
            }
        };
    }

    let path = scene_path(&cli.command).expect("every other command reads a scene");
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    let mut raw = match parse_raw(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    match query_for(&cli.command) {
        Ok(Some(q)) => raw.queries = vec![q],
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    let scene = match Scene::resolve(raw, &SceneOptions { max_order: cli.max_order }) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return if e.is_invariant_violation() { EXIT_INTERNAL } else { EXIT_INPUT };
        }
    };
    let label = path.file_stem().map_or_else(|| "scene".to_string(), |s| s.to_string_lossy().into_owned());
    let report = run_scene(&scene, &label, &options);
    if let Err(code) = emit(cli, &report) {
        return code;
    }
    exit_code(&report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}
