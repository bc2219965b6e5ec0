use clap::{Args, Parser, Subcommand, ValueEnum};

use mnc::cli::{self, InstanceSource, ProgramKind, RunConfig};

#[derive(Parser)]
#[command(name = "mnc", about = "Run, inspect, and verify exact neural algorithm programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Min,
    Sort,
    Astar,
}

impl From<Selector> for ProgramKind {
    fn from(s: Selector) -> ProgramKind {
        match s {
            Selector::Min => ProgramKind::Min,
            Selector::Sort => ProgramKind::Sort,
            Selector::Astar => ProgramKind::Astar,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a program, load its input, and run it to completion
    Run(RunArgs),
    /// Print compiled-network statistics and the memory layout
    Inspect(InspectArgs),
    /// Differential verification against the symbolic oracles
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_enum)]
    program: Selector,
    /// Comma-separated array literal (min and sort)
    #[arg(long)]
    array: Option<String>,
    /// Instance file path, or "canonical" (astar)
    #[arg(long)]
    instance: Option<String>,
    /// Softmax temperature override
    #[arg(long)]
    tau: Option<f64>,
    /// Write strength override
    #[arg(long)]
    alpha: Option<f64>,
    /// Memory capacity override
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    /// Write the execution trace to this file
    #[arg(long)]
    trace: Option<std::path::PathBuf>,
    /// Include a memory snapshot per step in the trace
    #[arg(long)]
    snapshots: bool,
    /// Validate gate, inhibition and frame contracts at every step
    #[arg(long)]
    check: bool,
    /// Fail on non-integral controller addresses
    #[arg(long)]
    strict_addresses: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(value_enum)]
    program: Selector,
    #[arg(long)]
    capacity: Option<usize>,
    /// Serialize every network in full
    #[arg(long)]
    networks: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    program: Selector,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: usize,
}

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let result = match cli.command {
        Command::Run(args) => {
            let mut config = RunConfig::new(args.program.into());
            config.array = match args.array {
                Some(text) => match cli::parse_array(&text) {
                    Ok(values) => Some(values),
                    Err(err) => fail(&err),
                },
                None => None,
            };
            config.instance = args.instance.as_deref().map(InstanceSource::from_arg);
            config.tau = args.tau;
            config.alpha = args.alpha;
            config.capacity = args.capacity;
            config.max_steps = args.max_steps;
            config.trace_path = args.trace;
            config.snapshots = args.snapshots;
            config.check = args.check;
            config.strict_addresses = args.strict_addresses;
            cli::cmd_run(&config, &mut stdout)
        }
        Command::Inspect(args) => {
            cli::cmd_inspect(args.program.into(), args.capacity, args.networks, &mut stdout)
        }
        Command::Verify(args) => {
            cli::cmd_verify(args.program.into(), args.seed, args.count, &mut stdout)
        }
    };
    if let Err(err) = result {
        fail(&err)
    }
}

fn fail(err: &mnc::Error) -> ! {
    eprintln!("error: {err}");
    std::process::exit(cli::exit_code(err));
}
