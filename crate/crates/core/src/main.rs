use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use ultratree::analysis::{
    check_bounded_subset_criterion, check_subsequence_criterion, conjecture_experiment, ConjectureKind, Status,
    SubsetRule,
};
use ultratree::config::{default_suite, ConstructCase, RunConfig};
use ultratree::generators::{
    construct_branch_labeling, construct_hub_labeling, construct_ray_labeling, doubling_ladder, truncate,
    LabelingScheme, SequenceSpec, TreeGenerator,
};
use ultratree::io::{tree_from_json, tree_to_dot, tree_to_json};
use ultratree::{index::covers_to_csv, LabeledTree, Radius, UltrametricIndex, VertexId};

/// Ultrametrics generated by vertex-labeled trees.
#[derive(Parser)]
#[command(name = "ultratree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a tree file defines an ultrametric.
    Validate { tree: PathBuf },
    /// Distance between two vertices.
    Dist { tree: PathBuf, u: VertexId, v: VertexId },
    /// Convex hull of a vertex set, as DOT.
    Hull {
        tree: PathBuf,
        /// comma-separated vertex ids
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<VertexId>,
    },
    /// Partition into open balls of radius r, as CSV.
    Cover {
        tree: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        radius: Vec<Radius>,
    },
    /// Materialize and label a finite part of a generated tree.
    Truncate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        budget: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Decide whether a generated tree is almost a ray.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Out,
    },
    /// Build the labeling that defeats a sequence whose hull is not almost a ray.
    Construct {
        #[arg(value_enum)]
        case: CaseArg,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        sequence: String,
        #[command(flatten)]
        grids: Grids,
        #[command(flatten)]
        out: Out,
    },
    /// Check a criterion along a budget ladder.
    Check {
        #[command(subcommand)]
        which: CheckCommand,
    },
    /// Cluster-count experiments (exploratory).
    Conjecture {
        #[arg(value_enum)]
        kind: KindArg,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        grids: Grids,
        #[command(flatten)]
        out: Out,
    },
    /// Run every experiment of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in suite of canonical instances.
    Suite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// A Cauchy subsequence forces a Cauchy sequence exactly on almost rays.
    Subsequence {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        sequence: String,
        #[command(flatten)]
        grids: Grids,
        #[command(flatten)]
        out: Out,
    },
    /// An infinite bounded subset forces a bounded space exactly on almost rays.
    Bounded {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        scheme: String,
        /// extra subset rules, as a JSON array
        #[arg(long)]
        subsets: Option<String>,
        #[command(flatten)]
        grids: Grids,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct Source {
    /// generator JSON, inline or a file path
    #[arg(long)]
    generator: String,
}

#[derive(Args)]
struct Grids {
    #[arg(long, value_delimiter = ',')]
    budget_ladder: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    radius_grid: Option<Vec<Radius>>,
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<Radius>>,
    #[arg(long, default_value_t = 8)]
    mass: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Grids {
    fn ladder(&self) -> Vec<usize> {
        self.budget_ladder.clone().unwrap_or_else(|| doubling_ladder(200, 4))
    }

    fn radii(&self) -> Vec<Radius> {
        self.radius_grid.clone().unwrap_or_else(halves)
    }

    fn epsilons(&self) -> Vec<Radius> {
        self.epsilon_grid.clone().unwrap_or_else(halves)
    }
}

fn halves() -> Vec<Radius> {
    (1..=6).map(|k| Radius::reciprocal(1 << k)).collect()
}

#[derive(Args)]
struct Out {
    /// write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write the per-scale rows as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CaseArg {
    Hub,
    Ray,
    Branch,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    OneRay,
    Rayless,
}

/// Exit status and message of a failed command.
enum Failure {
    Input(String),
    Domain { kind: &'static str, message: String },
}

impl Failure {
    fn domain(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Failure::Domain {
            kind,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn read_text(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Inline JSON if it looks like JSON, otherwise a file to read.
fn json_arg<T: DeserializeOwned>(arg: &str) -> Result<T, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.starts_with('"') {
        arg.to_string()
    } else {
        read_text(std::path::Path::new(arg))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("malformed JSON: {e}")))
}

fn load_tree(path: &std::path::Path) -> Result<LabeledTree, Failure> {
    let text = read_text(path)?;
    tree_from_json(&text).map_err(|e| match e {
        ultratree::io::ReadError::Json(e) => Failure::Input(format!("malformed tree JSON: {e}")),
        ultratree::io::ReadError::Tree(e) => Failure::domain("invalid-tree", e),
    })
}

fn index_of(tree: LabeledTree) -> Result<UltrametricIndex, Failure> {
    UltrametricIndex::build(tree).map_err(|e| Failure::domain("degenerate-labeling", e))
}

fn emit<T: Serialize>(
    report: &T,
    out: &Out,
    rows: &[ultratree::analysis::CheckRow],
    instance: &str,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("serializable") + "\n";
    let write =
        |p: &PathBuf, s: &str| std::fs::write(p, s).map_err(|e| Failure::Input(format!("{}: {e}", p.display())));
    match &out.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &out.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["instance", "budget", "scale", "value", "verdict"])
            .expect("in-memory write");
        for r in rows {
            w.write_record([
                instance,
                &r.budget.to_string(),
                &r.scale.to_string(),
                &r.value,
                &r.verdict,
            ])
            .expect("in-memory write");
        }
        write(p, &String::from_utf8(w.into_inner().expect("flush")).expect("utf8"))?;
    }
    Ok(())
}

fn status_code(status: Status) -> ExitCode {
    match status {
        Status::Violated => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate { tree } => {
            let tree = load_tree(&tree)?;
            match tree.check_nondegenerate() {
                Ok(()) => {
                    println!("ok: {} vertices, ultrametric", tree.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(edge) => Err(Failure::domain(
                    "degenerate-labeling",
                    format!("edge {edge} has both endpoints labeled 0"),
                )),
            }
        }
        Command::Dist { tree, u, v } => {
            let ix = index_of(load_tree(&tree)?)?;
            let d = ix.distance(&u, &v).map_err(|e| Failure::domain("unknown-vertex", e))?;
            println!("{d}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Hull { tree, set } => {
            let tree = load_tree(&tree)?;
            let hull = tree.convex_hull(&set).map_err(|e| Failure::domain("hull", e))?;
            print!("{}", tree_to_dot(&hull, "hull"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Cover { tree, radius } => {
            let ix = index_of(load_tree(&tree)?)?;
            let covers: Vec<_> = radius.iter().map(|r| ix.partition_at_scale(r)).collect();
            print!("{}", covers_to_csv(&covers));
            Ok(ExitCode::SUCCESS)
        }
        Command::Truncate {
            source,
            scheme,
            budget,
            format,
            out,
        } => {
            let gen: TreeGenerator = json_arg(&source.generator)?;
            let scheme: LabelingScheme = json_arg(&scheme)?;
            let tree = truncate(&gen, &scheme, budget).map_err(|e| Failure::domain("generator", e))?;
            let text = match format {
                Format::Json => tree_to_json(&tree) + "\n",
                Format::Dot => tree_to_dot(&tree, "truncation"),
            };
            match &out.out {
                Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { source, out } => {
            let gen: TreeGenerator = json_arg(&source.generator)?;
            gen.validate().map_err(|e| Failure::domain("generator", e))?;
            emit(&gen.classify_almost_ray(), &out, &[], "classify")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct {
            case,
            source,
            sequence,
            grids,
            out,
        } => {
            let gen: TreeGenerator = json_arg(&source.generator)?;
            let seq: SequenceSpec = json_arg(&sequence)?;
            let ladder = grids.ladder();
            let built = match case {
                CaseArg::Hub => construct_hub_labeling(&gen, &seq, &ladder),
                CaseArg::Ray => construct_ray_labeling(&gen, &seq, &ladder),
                CaseArg::Branch => construct_branch_labeling(&gen, &seq, &ladder),
            };
            let (scheme, witness) = built.map_err(|e| Failure::domain("construction", e))?;
            let case = match case {
                CaseArg::Hub => ConstructCase::Hub,
                CaseArg::Ray => ConstructCase::Ray,
                CaseArg::Branch => ConstructCase::Branch,
            };
            emit(
                &serde_json::json!({ "case": case, "scheme": scheme, "witness": witness }),
                &out,
                &[],
                "construct",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { which } => match which {
            CheckCommand::Subsequence {
                source,
                scheme,
                sequence,
                grids,
                out,
            } => {
                let gen: TreeGenerator = json_arg(&source.generator)?;
                let scheme: LabelingScheme = json_arg(&scheme)?;
                let seq: SequenceSpec = json_arg(&sequence)?;
                let r = check_subsequence_criterion(&gen, &scheme, &seq, &grids.ladder(), &grids.epsilons())
                    .map_err(|e| Failure::domain("analysis", e))?;
                emit(&r, &out, &r.rows, "subsequence")?;
                Ok(status_code(r.status))
            }
            CheckCommand::Bounded {
                source,
                scheme,
                subsets,
                grids,
                out,
            } => {
                let gen: TreeGenerator = json_arg(&source.generator)?;
                let scheme: LabelingScheme = json_arg(&scheme)?;
                let extra: Vec<SubsetRule> = match subsets {
                    Some(s) => json_arg(&s)?,
                    None => vec![],
                };
                let r =
                    check_bounded_subset_criterion(&gen, &scheme, &grids.ladder(), &grids.radii(), grids.seed, &extra)
                        .map_err(|e| Failure::domain("analysis", e))?;
                emit(&r, &out, &r.rows, "bounded")?;
                Ok(status_code(r.status))
            }
        },
        Command::Conjecture {
            kind,
            source,
            scheme,
            grids,
            out,
        } => {
            let gen: TreeGenerator = json_arg(&source.generator)?;
            let scheme: LabelingScheme = json_arg(&scheme)?;
            let kind = match kind {
                KindArg::OneRay => ConjectureKind::OneRay,
                KindArg::Rayless => ConjectureKind::Rayless,
            };
            let r = conjecture_experiment(kind, &gen, &scheme, &grids.epsilons(), grids.mass, &grids.ladder())
                .map_err(|e| Failure::domain("analysis", e))?;
            eprintln!("{}", r.summary);
            emit(&r, &out, &r.rows, "conjecture")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, out } => {
            let cfg: RunConfig = json_arg(&read_text(&config)?)?;
            cfg.run()
                .map_err(|e| Failure::domain("run", e))?
                .write_to(&out)
                .map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite { out, seed } => {
            let cfg = default_suite(seed);
            let output = cfg.run().map_err(|e| Failure::domain("run", e))?;
            output
                .write_to(&out)
                .and_then(|_| {
                    std::fs::write(
                        out.join("config.json"),
                        serde_json::to_string_pretty(&cfg).expect("serializable") + "\n",
                    )
                })
                .map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            Ok(ExitCode::SUCCESS)
        }
    }
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
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(message)) => {
            eprintln!("{}", serde_json::json!({ "error": "input", "message": message }));
            ExitCode::from(1)
        }
        Err(Failure::Domain { kind, message }) => {
            eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
            ExitCode::from(2)
        }
    }
}
