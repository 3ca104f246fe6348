use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use walign::corpus::Task;
use walign::embed::Aggregation;
use walign::ibm::ModelKind;
use walign::symmetrize::Heuristic;

#[derive(Parser, Debug)]
#[command(name = "walign", version, about = "Word alignment, alignment evaluation and annotation projection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train alignment models on a `src ||| tgt` bitext
    Train(TrainArgs),
    /// Viterbi-align a bitext with trained models
    Align(AlignArgs),
    /// Combine forward and reverse alignments
    Symmetrize(SymmetrizeArgs),
    /// Extract alignments from exported subword embeddings (EMB1)
    EmbedAlign(EmbedAlignArgs),
    /// Score predicted alignments against gold alignments
    Evaluate(EvaluateArgs),
    /// Project POS or NER tags across alignments
    Project(ProjectArgs),
    /// Subset, length and bootstrap experiments
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// AER as a function of the amount of training data
    Subset(SubsetArgs),
    /// AER per group of examples sorted by length
    Length(LengthArgs),
    /// AER distribution over random test subsets
    Bootstrap(BootstrapArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// File of `key=value` lines; command-line flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core); never changes results
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Fwd,
    Rev,
    Both,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Model: ibm1 or diag
    #[arg(long, default_value = "diag")]
    pub model: ModelKind,
    /// EM iterations
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    /// Add-alpha smoothing of the translation table (0 = none)
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// NULL link probability
    #[arg(long, default_value_t = 0.08)]
    pub p0: f64,
    /// Initial diagonal tension
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    /// Keep the tension fixed instead of re-fitting it after each iteration
    #[arg(long)]
    pub no_lambda_search: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Bitext, one `src ||| tgt` pair per line
    pub bitext: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Direction; `both` writes OUT.fwd and OUT.rev
    #[arg(long, value_enum, default_value = "both")]
    pub direction: DirectionArg,
    /// Model output path
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    pub bitext: PathBuf,
    /// Model file; with `--direction both`, the prefix of MODEL.fwd and MODEL.rev
    #[arg(long)]
    pub model: PathBuf,
    /// Direction; `both` reads and writes `.fwd`/`.rev` files
    #[arg(long, value_enum, default_value = "fwd")]
    pub direction: DirectionArg,
    /// Output path (standard output if omitted; required for `both`)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SymmetrizeArgs {
    /// Forward alignment (Pharaoh)
    pub forward: PathBuf,
    /// Reverse alignment (Pharaoh, source-target orientation)
    pub reverse: PathBuf,
    /// forward, reverse, union, intersection, grow-diag or grow-diag-final
    #[arg(long, default_value = "grow-diag-final")]
    pub heuristic: Heuristic,
    /// Bitext giving sentence lengths; inferred from the links if omitted
    #[arg(long)]
    pub bitext: Option<PathBuf>,
    /// Inputs use 1-based indices
    #[arg(long)]
    pub one_based: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EmbedAlignArgs {
    /// EMB1 embeddings file
    pub embeddings: PathBuf,
    /// Probability threshold c
    #[arg(long, default_value_t = 0.001)]
    pub threshold: f64,
    /// Softmax temperature
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Expected encoder layer (checked against the file header)
    #[arg(long)]
    pub layer: Option<usize>,
    /// Subword to word rule: any or all
    #[arg(long, default_value = "any")]
    pub aggregation: Aggregation,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Gold alignment (Pharaoh, `?` marks possible links)
    #[arg(long)]
    pub gold: PathBuf,
    /// Predicted alignment (Pharaoh)
    #[arg(long)]
    pub pred: PathBuf,
    /// Inputs use 1-based indices
    #[arg(long)]
    pub one_based: bool,
    /// Print the report and raw counts as JSON
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Tagged source side (CoNLL, token TAB tag)
    #[arg(long)]
    pub tags: PathBuf,
    /// Source-target alignment (Pharaoh)
    #[arg(long)]
    pub alignment: PathBuf,
    /// Bitext whose target side receives the tags
    #[arg(long)]
    pub bitext: PathBuf,
    /// pos or ner
    #[arg(long, default_value = "pos")]
    pub task: Task,
    /// Type threshold beta
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    /// Minimum aligned-token fraction rho
    #[arg(long, default_value_t = 0.8)]
    pub rho: f64,
    /// Tag for unaligned tokens [default: NOUN for pos, O for ner]
    #[arg(long)]
    pub fallback: Option<String>,
    /// Comma-separated tie-breaking order [default: source frequency, then lexicographic]
    #[arg(long, value_delimiter = ',')]
    pub tag_priority: Option<Vec<String>>,
    /// Alignment uses 1-based indices
    #[arg(long)]
    pub one_based: bool,
    /// Projected CoNLL output (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Unlabelled training bitext
    #[arg(long)]
    pub corpus: PathBuf,
    /// Test bitext
    #[arg(long)]
    pub test: PathBuf,
    /// Gold alignment of the test bitext
    #[arg(long)]
    pub gold: PathBuf,
    /// Comma-separated models to compare
    #[arg(long, value_delimiter = ',', default_value = "diag")]
    pub models: Vec<ModelKind>,
    /// Symmetrization heuristic
    #[arg(long, default_value = "grow-diag-final")]
    pub heuristic: Heuristic,
    /// EM iterations
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.08)]
    pub p0: f64,
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    /// Gold uses 1-based indices
    #[arg(long)]
    pub one_based: bool,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct SubsetArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Strictly ascending subset sizes
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800,1600,3200,6400,12800,25600")]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct LengthArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Examples per length group
    #[arg(long, default_value_t = 7508, value_parser = clap::value_parser!(u64).range(1..))]
    pub group_size: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    /// Gold alignment
    #[arg(long)]
    pub gold: PathBuf,
    /// Predicted alignment; repeat to compare several, labelled by file stem
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    /// Number of subsamples
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Sentence pairs per subsample
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    /// Inputs use 1-based indices
    #[arg(long)]
    pub one_based: bool,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Train(a) => &a.common,
            Command::Align(a) => &a.common,
            Command::Symmetrize(a) => &a.common,
            Command::EmbedAlign(a) => &a.common,
            Command::Evaluate(a) => &a.common,
            Command::Project(a) => &a.common,
            Command::Analyze(AnalyzeCommand::Subset(a)) => &a.common,
            Command::Analyze(AnalyzeCommand::Length(a)) => &a.common,
            Command::Analyze(AnalyzeCommand::Bootstrap(a)) => &a.common,
        }
    }
}
