mod commands;
mod doc;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::doc::{Bundle, InputError};
use crate::report::InputHash;

const DEFAULT_BUDGET: usize = 1 << 22;

#[derive(Parser)]
#[command(name = "toposforge", version, about = "Finite checks for sites, sheaves, W-types and classes of small maps")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Leave timing out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Inputs {
    /// JSON documents; corpus documents may bundle several.
    files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate documents.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        /// Print each input in canonical form instead of a report.
        #[arg(long)]
        canonical: bool,
    },
    /// Generate the Grothendieck site of a site.
    GenSite {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        site: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Check the sheaf condition.
    CheckSheaf {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        presheaf: Option<String>,
        #[arg(long)]
        site: Option<String>,
    },
    /// Sheafify a presheaf and check the unit against small sheaves.
    Sheafify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        presheaf: Option<String>,
        #[arg(long)]
        site: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
    },
    /// Compare the sheaves of two sites over one category.
    SameSheaves {
        #[command(flatten)]
        inputs: Inputs,
        /// Give twice; defaults to the two sites of the inputs.
        #[arg(long)]
        site: Vec<String>,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
    },
    /// Enumerate the W-type of a function `B → A`.
    Wtype {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Enumerate the W-type of a presheaf morphism.
    WtypePresheaf {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        morphism: Option<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Check the small-map axioms of a class over a probe universe.
    CheckClass {
        #[command(flatten)]
        inputs: Inputs,
        /// A map_class name, `all`, or `fiber_bound:K`.
        #[arg(long)]
        class: Option<String>,
        /// Carrier size of the probe universe.
        #[arg(long, default_value_t = 3)]
        probe: usize,
        /// Add a set of this size to the probe; may repeat.
        #[arg(long)]
        extra_set: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        w_depth: usize,
    },
    /// Build collection spans for small maps.
    Collsp {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value_t = 3)]
        probe: usize,
        /// Only this function; otherwise every small map of the probe.
        #[arg(long)]
        function: Option<String>,
    },
    /// Build an equivalent collection site with small covers.
    EquivCollSite {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        site: Option<String>,
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value_t = 2)]
        probe: usize,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
    },
}

impl Command {
    fn inputs(&self) -> &Inputs {
        match self {
            Command::Validate { inputs, .. }
            | Command::GenSite { inputs, .. }
            | Command::CheckSheaf { inputs, .. }
            | Command::Sheafify { inputs, .. }
            | Command::SameSheaves { inputs, .. }
            | Command::Wtype { inputs, .. }
            | Command::WtypePresheaf { inputs, .. }
            | Command::CheckClass { inputs, .. }
            | Command::Collsp { inputs, .. }
            | Command::EquivCollSite { inputs, .. } => inputs,
        }
    }
}

fn budget() -> anyhow::Result<usize> {
    match std::env::var("TOPOSFORGE_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| InputError(format!("TOPOSFORGE_BUDGET: `{v}` is not a count")).into()),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

struct Loaded {
    documents: Vec<doc::Document>,
    hashes: Vec<InputHash>,
}

fn load(inputs: &Inputs) -> anyhow::Result<Loaded> {
    let mut documents = Vec::new();
    let mut hashes = Vec::new();
    for path in &inputs.files {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| InputError(format!("{shown}: {e}")))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| InputError(format!("{shown}: not UTF-8")))?;
        documents.push(doc::parse(&text, &shown)?);
        hashes.push(InputHash::of(&shown, &bytes));
    }
    Ok(Loaded { documents, hashes })
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let start = Instant::now();
    let loaded = load(cli.command.inputs())?;
    let bundle = Bundle::from_documents(loaded.documents.clone())?;
    if let Command::Validate { canonical: true, .. } = cli.command {
        for d in &loaded.documents {
            print!("{}", doc::to_canonical_json(&doc::canonical_in(d, &bundle)?));
        }
        return Ok(true);
    }
    let ctx = commands::Context { bundle: &bundle, budget: budget()? };
    let report = commands::dispatch(&cli.command, &ctx, loaded.hashes)?;
    let elapsed = (!cli.no_timing).then(|| start.elapsed().as_secs_f64() * 1000.0);
    match cli.format {
        Format::Json => print!("{}", report::render_json(&report, elapsed)),
        Format::Text => print!("{}", report::render_text(&report, elapsed)),
    }
    Ok(report.holds)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
