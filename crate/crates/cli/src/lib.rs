//! Command-line frontend: graph builders, analyzers, the chain counter,
//! correspondence tables, prime scans, and the SIDH demo and attack. All
//! commands are deterministic for identical flags; outputs are JSON (plus
//! DOT for graph builds).

pub mod formats;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramanujan_core::ec::find_supersingular_curve;
use ramanujan_core::ff::{is_prime, Field};
use ramanujan_core::graph::{ExportFormat, LabeledMultigraph};
use ramanujan_core::isogeny::enumerate_chain_counts;
use ramanujan_core::lps::{build_lps_graph, generator_matrix_correspondence, EpsBranch};
use ramanujan_core::pizer::{
    admissible_class_count, eichler_class_number, is_admissible_6regular, scan_primes,
};
use ramanujan_core::sidh::{attack, derive_shared, keygen, AttackResult, Side, SidhParams};
use ramanujan_core::ssig::{self, BuildMethod, SsigParams};
use ramanujan_core::{splitmix64, Error};

#[derive(Parser)]
#[command(
    name = "ramanujan",
    version,
    about = "Isogeny and LPS expander graph toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Supersingular isogeny graphs.
    Ssig {
        #[command(subcommand)]
        cmd: SsigCmd,
    },
    /// LPS Cayley graphs on PSL2(F_p).
    Lps {
        #[command(subcommand)]
        cmd: LpsCmd,
    },
    /// Structure and spectra of graph files.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// Isogeny chain counting.
    Chains {
        #[command(subcommand)]
        cmd: ChainsCmd,
    },
    /// Generator-to-tree-direction correspondence tables.
    Correspondence(CorrespondenceArgs),
    /// Class numbers and admissible prime scans.
    Pizer {
        #[command(subcommand)]
        cmd: PizerCmd,
    },
    /// Toy key exchange and the path-finding attack.
    Sidh {
        #[command(subcommand)]
        cmd: SidhCmd,
    },
}

#[derive(Subcommand)]
enum SsigCmd {
    /// Build the supersingular ell-isogeny graph over F_{p^2}.
    Build {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        /// Keep one arc per isogeny instead of merging dual pairs.
        #[arg(long)]
        directed: bool,
        /// Edge computation: velu steps or modular polynomial roots.
        #[arg(long, value_enum, default_value_t = MethodArg::Velu)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Velu,
    Modpoly,
}

#[derive(Subcommand)]
enum LpsCmd {
    /// Build the LPS Cayley graph for (l, p).
    Build {
        #[arg(long)]
        l: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Structural metrics of a graph file.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues (dense) or the second eigenvalue (sparse).
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        /// Power iteration with deflation instead of the dense solver.
        #[arg(long)]
        sparse: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// When given, also report the Ramanujan bound check for an
        /// (l+1)-regular graph.
        #[arg(long)]
        l: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChainsCmd {
    /// Exhaustive chain counts without/with backtracking.
    Count {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Args)]
struct CorrespondenceArgs {
    #[arg(long)]
    l: u64,
    #[arg(long, value_enum)]
    branch: BranchArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Subcommand)]
enum PizerCmd {
    /// Scan the first `count` primes for 6-regular admissibility.
    Scan {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissibility and class number of one prime.
    Check {
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand)]
enum SidhCmd {
    /// Run an exchange on a named parameter preset and write a transcript.
    Demo {
        #[arg(long, value_enum, default_value_t = PresetArg::P431)]
        preset: PresetArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the shared secret of a transcript via path-finding.
    Attack {
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    P431,
}

struct CliError {
    code: i32,
    msg: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) | Error::NoConvergence { .. } => 2,
            _ => 1,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 1,
        msg: format!("{}: {e}", path.display()),
    }
}

/// Parses and runs an argv; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap help/version go to stdout with success
            let is_help = e.use_stderr();
            e.print().ok();
            return if is_help { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Ssig { cmd } => match cmd {
            SsigCmd::Build {
                p,
                ell,
                directed,
                method,
                out,
            } => ssig_build(p, ell, directed, method, &out),
        },
        Command::Lps { cmd } => match cmd {
            LpsCmd::Build { l, p, out } => lps_build(l, p, &out),
        },
        Command::Graph { cmd } => match cmd {
            GraphCmd::Analyze { input, out } => graph_analyze(&input, out.as_deref()),
            GraphCmd::Spectrum {
                input,
                sparse,
                tol,
                l,
                out,
            } => graph_spectrum(&input, sparse, tol, l, out.as_deref()),
        },
        Command::Chains { cmd } => match cmd {
            ChainsCmd::Count { ell, m, p } => chains_count(ell, m, p),
        },
        Command::Correspondence(args) => correspondence(&args),
        Command::Pizer { cmd } => match cmd {
            PizerCmd::Scan { count, out } => pizer_scan(count, out.as_deref()),
            PizerCmd::Check { p } => pizer_check(p),
        },
        Command::Sidh { cmd } => match cmd {
            SidhCmd::Demo { preset, seed, out } => sidh_demo(preset, seed, out.as_deref()),
            SidhCmd::Attack { transcript } => sidh_attack(&transcript),
        },
    }
}

fn write_graph_files(g: &LabeledMultigraph, out: &Path) -> Result<(), CliError> {
    fs::write(out, g.export(ExportFormat::Json)).map_err(|e| io_err(out, e))?;
    let dot_path = out.with_extension("dot");
    fs::write(&dot_path, g.export(ExportFormat::Dot)).map_err(|e| io_err(&dot_path, e))?;
    Ok(())
}

fn summarize(g: &LabeledMultigraph) -> Result<String, CliError> {
    let r = g.analyze()?;
    Ok(format!(
        "vertices={} edges={} degree={} connected={} bipartite={} girth={} loops={} multi_edges={}",
        g.vertex_count(),
        g.edge_count(),
        r.regular_degree
            .map_or_else(|| "irregular".into(), |d| d.to_string()),
        r.connected,
        r.bipartite,
        r.girth.map_or_else(|| "none".into(), |g| g.to_string()),
        r.loop_count,
        r.multi_edge_count,
    ))
}

fn ssig_build(
    p: u64,
    ell: u64,
    directed: bool,
    method: MethodArg,
    out: &Path,
) -> Result<(), CliError> {
    let method = match method {
        MethodArg::Velu => BuildMethod::Velu,
        MethodArg::Modpoly => BuildMethod::ModularPolynomial,
    };
    let params = SsigParams::new(p, ell, directed, method)?;
    let g = ssig::build(&params)?;
    write_graph_files(&g, out)?;
    println!(
        "ssig build p={p} ell={ell} directed={directed} {}",
        summarize(&g)?
    );
    Ok(())
}

fn lps_build(l: u64, p: u64, out: &Path) -> Result<(), CliError> {
    let g = build_lps_graph(l, p)?;
    write_graph_files(&g, out)?;
    println!("lps build l={l} p={p} {}", summarize(&g)?);
    Ok(())
}

fn read_graph(path: &Path) -> Result<LabeledMultigraph, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    formats::parse_graph(&text).map_err(|msg| CliError { code: 1, msg })
}

fn graph_analyze(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let g = read_graph(input)?;
    let r = g.analyze()?;
    if let Some(out) = out {
        let json = serde_json::to_string_pretty(&formats::ReportJson::new(&g, &r))
            .expect("report serializes");
        fs::write(out, json).map_err(|e| io_err(out, e))?;
    }
    println!("graph analyze {}", summarize(&g)?);
    Ok(())
}

fn graph_spectrum(
    input: &Path,
    sparse: bool,
    tol: f64,
    l: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let g = read_graph(input)?;
    if sparse {
        let second = g.second_eigenvalue_sparse(tol)?;
        if let Some(out) = out {
            let json = serde_json::to_string_pretty(&formats::SparseSpectrumJson {
                vertices: g.vertex_count(),
                second_eigenvalue: second,
                tolerance: tol,
            })
            .expect("serializes");
            fs::write(out, json).map_err(|e| io_err(out, e))?;
        }
        let bound_note = ramanujan_note(second, l);
        println!(
            "graph spectrum sparse vertices={} second_eigenvalue={second:.9}{bound_note}",
            g.vertex_count()
        );
    } else {
        let eigs = g.full_spectrum()?;
        if let Some(out) = out {
            let json = serde_json::to_string_pretty(&formats::SpectrumJson {
                vertices: g.vertex_count(),
                eigenvalues: eigs.clone(),
            })
            .expect("serializes");
            fs::write(out, json).map_err(|e| io_err(out, e))?;
        }
        let ram = match l {
            Some(l) => format!(" ramanujan={}", g.is_ramanujan(l, 1e-9)?),
            None => String::new(),
        };
        println!(
            "graph spectrum dense vertices={} min={:.9} max={:.9}{ram}",
            g.vertex_count(),
            eigs.first().copied().unwrap_or(f64::NAN),
            eigs.last().copied().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

fn ramanujan_note(second: f64, l: Option<u64>) -> String {
    match l {
        Some(l) => {
            let bound = 2.0 * (l as f64).sqrt();
            format!(
                " bound_2sqrt_l={bound:.9} within_bound={}",
                second <= bound + 1e-6
            )
        }
        None => String::new(),
    }
}

fn chains_count(ell: u64, m: u32, p: u64) -> Result<(), CliError> {
    let start = find_supersingular_curve(p)?;
    let (without, with) = enumerate_chain_counts(&start, ell, m)?;
    let (total, cyclic) = ramanujan_core::isogeny::count_subgroups_formulas(ell, m);
    println!(
        "chains count ell={ell} m={m} p={p} without_backtracking={without} with_backtracking={with} closed_forms={cyclic}/{total}"
    );
    Ok(())
}

fn correspondence(args: &CorrespondenceArgs) -> Result<(), CliError> {
    let branch = match args.branch {
        BranchArg::Plus => EpsBranch::PlusE,
        BranchArg::Minus => EpsBranch::MinusE,
    };
    let table = generator_matrix_correspondence(args.l, branch)?;
    let verified = table.entries.iter().enumerate().all(|(h, alpha)| {
        ramanujan_core::lps::correspondence_is_l_integral(
            alpha,
            h as u64,
            table.l,
            table.eps_residue,
        )
    });
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&formats::CorrespondenceJson::new(&table))
            .expect("serializes");
        fs::write(out, json).map_err(|e| io_err(out, e))?;
    }
    println!(
        "correspondence l={} branch={} a={} b={} e={} eps={} generators={} l_integrality_verified={verified}",
        table.l,
        match branch {
            EpsBranch::PlusE => "plus",
            EpsBranch::MinusE => "minus",
        },
        table.a,
        table.b,
        table.e,
        table.eps_residue,
        table.entries.len(),
    );
    Ok(())
}

fn pizer_scan(count: usize, out: Option<&Path>) -> Result<(), CliError> {
    let found = scan_primes(count)?;
    if let Some(out) = out {
        let json = serde_json::to_string_pretty(&formats::ScanJson {
            scanned_primes: count,
            admissible: found.clone(),
        })
        .expect("serializes");
        fs::write(out, json).map_err(|e| io_err(out, e))?;
    }
    println!(
        "pizer scan count={count} admissible={} first={}",
        found.len(),
        found
            .first()
            .map_or_else(|| "none".into(), |p| p.to_string()),
    );
    Ok(())
}

fn pizer_check(p: u64) -> Result<(), CliError> {
    if !is_prime(p) || p < 5 {
        return Err(CliError {
            code: 1,
            msg: format!("{p} is not a prime at least 5"),
        });
    }
    let admissible = is_admissible_6regular(p);
    let h = eichler_class_number(p)?;
    let (classes, modulus) = admissible_class_count();
    println!(
        "pizer check p={p} admissible={admissible} class_number={h} admissible_classes={classes} modulus={modulus}"
    );
    Ok(())
}

fn sidh_demo(preset: PresetArg, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let params = match preset {
        PresetArg::P431 => SidhParams::setup(2, 4, 3, 3, 1, -1)?,
    };
    let mut st = seed;
    let sa = sample_secret(params.ell_a, params.n, &mut st);
    let sb = sample_secret(params.ell_b, params.m, &mut st);
    let ka = keygen(&params, Side::A, sa)?;
    let kb = keygen(&params, Side::B, sb)?;
    let ja = derive_shared(&params, Side::A, sa, &kb.public)?;
    let jb = derive_shared(&params, Side::B, sb, &ka.public)?;
    if ja != jb {
        return Err(CliError {
            code: 2,
            msg: "exchange sides disagree".into(),
        });
    }
    if let Some(out) = out {
        let t = formats::TranscriptJson {
            params: formats::params_to_json(&params),
            public_a: formats::public_to_json(&ka.public),
            public_b: formats::public_to_json(&kb.public),
            shared_j: Some((ja.c0(), ja.c1())),
        };
        let json = serde_json::to_string_pretty(&t).expect("serializes");
        fs::write(out, json).map_err(|e| io_err(out, e))?;
    }
    println!(
        "sidh demo p={} seed={seed} shared_j={},{}",
        params.p,
        ja.c0(),
        ja.c1()
    );
    Ok(())
}

fn sample_secret(ell: u64, e: u32, st: &mut u64) -> (u128, u128) {
    let full = ramanujan_core::ec::pow_u128(ell, e);
    loop {
        let m = splitmix64(st) as u128 % full;
        let n = splitmix64(st) as u128 % full;
        if m % ell as u128 != 0 || n % ell as u128 != 0 {
            return (m, n);
        }
    }
}

fn sidh_attack(path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let t: formats::TranscriptJson = serde_json::from_str(&text).map_err(|e| CliError {
        code: 1,
        msg: format!("bad transcript: {e}"),
    })?;
    let params = formats::params_from_json(&t.params)?;
    let field = Field::new(params.p)?;
    let pub_a = formats::public_from_json(field, &t.public_a)?;
    let pub_b = formats::public_from_json(field, &t.public_b)?;
    match attack(&params, &pub_a, &pub_b)? {
        AttackResult::Recovered {
            shared_j,
            secret,
            paths_tried,
        } => {
            let matches = match t.shared_j {
                Some(expect) => {
                    if (shared_j.c0(), shared_j.c1()) != expect {
                        return Err(CliError {
                            code: 2,
                            msg: "recovered shared secret disagrees with the transcript".into(),
                        });
                    }
                    " matches_transcript=true"
                }
                None => "",
            };
            println!(
                "sidh attack recovered_j={},{} secret=({},{}) paths_tried={paths_tried}{matches}",
                shared_j.c0(),
                shared_j.c1(),
                secret.0,
                secret.1,
            );
            Ok(())
        }
        AttackResult::Failed { paths_tried } => Err(CliError {
            code: 2,
            msg: format!("attack failed after {paths_tried} candidate paths"),
        }),
    }
}
