use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kei_cli::cache::Cache;
use kei_cli::compare::compare;
use kei_cli::report::{compute_report, render_machine, render_text, Options};
use kei_cli::{corpus, exit_code};
use kei_core::linkdiag::{parse_diagram, LinkDiagram};

#[derive(Parser)]
#[command(
    name = "kei",
    version,
    about = "Involutory medial quandle invariants of link diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Args)]
struct Common {
    /// Skip computing IMQ.
    #[arg(long)]
    no_imq: bool,
    /// Element cap for IMQ saturation.
    #[arg(long, value_name = "N")]
    imq_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            no_imq: self.no_imq,
            imq_cap: self.imq_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Invariants of one diagram.
    Report {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the IMQ table (or Q_A when IMQ is not computed) to PATH.
        #[arg(long, value_name = "PATH")]
        dump_quandle: Option<PathBuf>,
    },
    /// Compare two diagrams along the isomorphism chain.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Reports for every top-level *.json file in a directory.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            env = "QUANDLE_CACHE",
            default_value = ".quandle-cache",
            value_name = "PATH"
        )]
        cache: PathBuf,
        #[arg(long, default_value_t = 1, value_name = "N")]
        jobs: usize,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("kei: {msg}");
    ExitCode::from(code as u8)
}

fn load(path: &Path) -> Result<LinkDiagram, ExitCode> {
    let text =
        std::fs::read_to_string(path).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    parse_diagram(&text).map_err(|e| fail(exit_code(&e), format!("{}: {e}", path.display())))
}

fn name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Report {
            path,
            common,
            dump_quandle,
        } => {
            let d = load(&path)?;
            let c = compute_report(&d, &common.options()).map_err(|e| fail(exit_code(&e), e))?;
            let out = match common.format {
                Format::Text => render_text(&name(&path), &c.report),
                Format::Machine => render_machine(&name(&path), &c.report) + "\n",
            };
            print!("{out}");
            if let Some(dest) = dump_quandle {
                let q = c
                    .dump
                    .as_ref()
                    .ok_or_else(|| fail(1, "no finite quandle to dump"))?;
                std::fs::write(&dest, q.to_text())
                    .map_err(|e| fail(1, format!("{}: {e}", dest.display())))?;
            }
            let failed = c.report.failed_checks();
            if !failed.is_empty() {
                return Err(fail(
                    4,
                    format!("consistency checks failed: {}", failed.join(", ")),
                ));
            }
            if c.report.capped() {
                return Err(fail(3, "a computation reached its cap"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            first,
            second,
            common,
        } => {
            let (d1, d2) = (load(&first)?, load(&second)?);
            let c = compare(&d1, &d2, &common.options()).map_err(|e| fail(exit_code(&e), e))?;
            let (a, b) = (name(&first), name(&second));
            match common.format {
                Format::Text => print!("{}", c.render_text(&a, &b)),
                Format::Machine => println!("{}", c.render_machine(&a, &b)),
            }
            if c.phi_equivalent == "unknown" {
                return Err(fail(3, "phi-equivalence search reached its cap"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Corpus {
            dir,
            common,
            cache,
            jobs,
        } => {
            let files = corpus::diagram_files(&dir)
                .map_err(|e| fail(1, format!("{}: {e}", dir.display())))?;
            let mut store = Cache::open(&cache);
            let rows = corpus::run(&files, &common.options(), Some(&mut store), jobs);
            if let Err(e) = store.flush() {
                eprintln!("kei: cache {}: {e}", cache.display());
            }
            let hits = rows.iter().filter(|r| r.cached).count();
            eprintln!("kei: cache {hits} hits, {} misses", rows.len() - hits);
            match common.format {
                Format::Text => print!("{}", corpus::render_text(&rows)),
                Format::Machine => print!("{}", corpus::render_machine(&rows)),
            }
            match corpus::exit_status(&rows) {
                0 => Ok(ExitCode::SUCCESS),
                code => Err(ExitCode::from(code as u8)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(cli).unwrap_or_else(|code| code)
}
