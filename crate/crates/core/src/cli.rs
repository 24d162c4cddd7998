use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dieudonne::DieudonneModule;
use crate::display::{DisplayFile, TruncatedDisplay};
use crate::error::{Error, Result};
use crate::expr::Evaluator;
use crate::moduli::{
    automorphism_order, dual_display, link_duals, reverify, write_atomic, ClassTable, Classification, ModuliInstance,
    DEFAULT_BUDGET, DEFAULT_SEED,
};
use crate::ring::FiniteRing;
use crate::selftest::{self, Profile};
use crate::witt::WittRing;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_GUARD: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "truncdisp", version, about = "Truncated Witt vectors, displays and Dieudonne modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a Witt vector expression and print canonical coordinates.
    Witt {
        expr: String,
        #[arg(long, default_value = "GF(2)")]
        ring: String,
        /// Level used by teich() and bare integers.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Enumerate isomorphism classes of truncated displays over a finite field.
    Classify(ClassifyArgs),
    /// Report invariants of a display stored as JSON.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
    },
    /// Run the acceptance grid and print a pass/fail matrix.
    Selftest {
        #[arg(value_enum, default_value_t = Profile::Quick)]
        profile: Profile,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct ClassifyArgs {
    /// Prime field F_p; ignored when --ring is given.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Base field spec such as GF(2^2).
    #[arg(long)]
    pub ring: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: usize,
    /// Type; every d in 0..=h when omitted.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
}

impl ClassifyArgs {
    pub fn new(ring: &str, n: usize, h: usize, d: Option<usize>, out: &Path) -> Self {
        ClassifyArgs {
            p: 2,
            ring: Some(ring.into()),
            n,
            h,
            d,
            format: Format::Json,
            out: out.to_path_buf(),
            seed: DEFAULT_SEED,
            workers: 1,
            budget: DEFAULT_BUDGET,
        }
    }
}

pub struct ClassifyReport {
    pub tables: Vec<ClassTable>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn slug(spec: &str) -> String {
    spec.chars()
        .filter_map(|c| match c {
            c if c.is_ascii_alphanumeric() => Some(c.to_ascii_lowercase()),
            '^' | '*' | '/' => Some('_'),
            _ => None,
        })
        .collect()
}

pub fn render_table(table: &ClassTable, format: Format) -> String {
    match format {
        Format::Json => table.to_json(),
        Format::Csv => table.to_csv(),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} n={} h={} d={}: {} classes",
                table.ring,
                table.n,
                table.h,
                table.d,
                table.classes.len()
            );
            let _ = writeln!(s, "|X| = {}, |G| = {}, mass = {}", table.x_count, table.g_count, table.mass);
            for (i, c) in table.classes.iter().enumerate() {
                let rep = c.rep_matrix.iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("; ");
                let slopes = match &c.slopes {
                    Some(s) => {
                        s.iter().map(|r| format!("{}^{}", r.slope, r.multiplicity)).collect::<Vec<_>>().join(" ")
                    }
                    None => "refused".into(),
                };
                let dual = c.dual_class.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "{i:>4}  [{rep}]  orbit={} aut={} nilpotent={} slopes={slopes} dual={dual}",
                    c.orbit_size, c.aut_order, c.nilpotent
                );
            }
            s
        }
    }
}

/// Enumerates, checks and writes the requested tables. Nothing is written
/// unless every table passes its checks.
pub fn classify(args: &ClassifyArgs) -> Result<ClassifyReport> {
    let spec = args.ring.clone().unwrap_or_else(|| format!("GF({})", args.p));
    let field = FiniteRing::parse(&spec)?;
    let w = WittRing::new(&field, args.n)?;
    let wanted: Vec<usize> = match args.d {
        Some(d) if d > args.h => return Err(Error::ShapeMismatch(format!("type {d} exceeds rank {}", args.h))),
        Some(d) => vec![d],
        None => (0..=args.h).collect(),
    };
    let mut types = wanted.clone();
    for &d in &wanted {
        if !types.contains(&(args.h - d)) {
            types.push(args.h - d);
        }
    }
    types.sort();
    let mut runs: Vec<Classification> = types
        .iter()
        .map(|&d| ModuliInstance::new(&w, args.h, d)?.enumerate_orbits(args.budget, args.workers as usize, args.seed))
        .collect::<Result<_>>()?;
    link_duals(&mut runs)?;

    let mut summary = String::new();
    let mut tables = Vec::new();
    for run in runs.iter().filter(|r| wanted.contains(&r.instance.dim_t())) {
        let mc = run.mass_check();
        if !mc.equal {
            return Err(Error::Discrepancy(format!("mass check failed: {} != {}", mc.lhs, mc.rhs)));
        }
        if run.enumerated_points().to_string() != run.table.x_count {
            return Err(Error::Discrepancy("enumerated |X| differs from the closed form".into()));
        }
        let (nil_classes, nil_points) = run.count_nilpotent_locus();
        let t = &run.table;
        let _ = writeln!(
            summary,
            "{} n={} h={} d={}: {} classes, mass {} = {} ok, nilpotent locus {} classes / {} points",
            t.ring,
            t.n,
            t.h,
            t.d,
            t.classes.len(),
            mc.lhs,
            mc.rhs,
            nil_classes,
            nil_points
        );
        tables.push(run.table.clone());
    }

    let rendered: Vec<(PathBuf, String)> = tables
        .iter()
        .map(|t| {
            let name = format!("classes_{}_n{}_h{}_d{}.{}", slug(&t.ring), t.n, t.h, t.d, args.format.extension());
            (args.out.join(name), render_table(t, args.format))
        })
        .collect();
    std::fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    for (path, body) in rendered {
        write_atomic(&path, &body)?;
        files.push(path);
    }
    if args.format == Format::Json {
        for path in &files {
            let table: ClassTable = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            reverify(&table, args.budget)?;
        }
    }
    Ok(ClassifyReport { tables, files, summary })
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub ring: String,
    pub n: usize,
    pub h: usize,
    pub d: usize,
    pub nilpotent: bool,
    pub aut_order: Option<u64>,
    pub slopes: Option<Vec<String>>,
    pub dual: Option<DisplayFile>,
    pub notices: Vec<String>,
}

pub fn analyze(file: &Path, budget: u64) -> Result<AnalyzeReport> {
    let parsed: DisplayFile = serde_json::from_str(&std::fs::read_to_string(file)?)?;
    let disp = TruncatedDisplay::from_file(&parsed)?;
    disp.check_axioms()?;
    let mut notices = Vec::new();
    let aut_order = match automorphism_order(&disp, budget) {
        Ok(k) => Some(k),
        Err(Error::GuardExceeded(msg)) => {
            notices.push(format!("automorphism order omitted: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    let (mut slopes, mut dual) = (None, None);
    match DieudonneModule::from_display(&disp) {
        Ok(module) => {
            match module.newton_polygon() {
                Ok(np) => slopes = Some(np.slopes().iter().map(|s| s.to_string()).collect()),
                Err(Error::InsufficientLevel { n }) => {
                    notices.push(format!("Newton polygon refused: level {n} is too small to resolve the slopes"))
                }
                Err(e) => return Err(e),
            }
            dual = Some(dual_display(&disp)?.to_file());
        }
        Err(Error::NotPerfect | Error::NotAField) => {
            notices.push("Newton polygon and dual omitted: the base ring is not a perfect field".into())
        }
        Err(e) => return Err(e),
    }
    Ok(AnalyzeReport {
        ring: disp.ring().spec().to_string(),
        n: disp.level(),
        h: disp.rank(),
        d: disp.dim_t(),
        nilpotent: disp.is_nilpotent(),
        aut_order,
        slopes,
        dual,
        notices,
    })
}

fn render_analysis(r: &AnalyzeReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text | Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "ring={} n={} h={} d={}", r.ring, r.n, r.h, r.d);
            let _ = writeln!(s, "nilpotent={}", r.nilpotent);
            if let Some(a) = r.aut_order {
                let _ = writeln!(s, "aut_order={a}");
            }
            if let Some(sl) = &r.slopes {
                let _ = writeln!(s, "slopes=[{}]", sl.join(", "));
            }
            if let Some(dual) = &r.dual {
                let rows = dual.matrix.iter().map(|row| row.join(" ")).collect::<Vec<_>>().join("; ");
                let _ = writeln!(s, "dual d={} matrix=[{rows}]", dual.d);
            }
            for n in &r.notices {
                let _ = writeln!(s, "note: {n}");
            }
            s
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GuardExceeded(_) | Error::WittGuard { .. } => EXIT_GUARD,
        _ => EXIT_FAILURE,
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Witt { expr, ring, n } => {
            let field = FiniteRing::parse(&ring)?;
            println!("{}", Evaluator::new(&field, n).eval(&expr)?);
            Ok(0)
        }
        Command::Classify(args) => {
            let report = classify(&args)?;
            print!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Analyze { file, format, budget } => {
            print!("{}", render_analysis(&analyze(&file, budget)?, format));
            Ok(0)
        }
        Command::Selftest { profile, seed } => {
            let outcomes = selftest::run_all(profile, seed);
            print!("{}", selftest::render(&outcomes));
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { EXIT_FAILURE })
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("GF(2)"), "gf2");
        assert_eq!(slug("GF(2^2)"), "gf2_2");
    }

    #[test]
    fn classify_writes_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let report = classify(&ClassifyArgs::new("GF(2)", 1, 1, None, dir.path())).unwrap();
        assert_eq!(report.files.len(), 2);
        assert!(report.tables.iter().all(|t| t.classes.len() == 1));
        let args = ClassifyArgs::new("GF(2)", 1, 2, Some(1), dir.path());
        let report = classify(&args).unwrap();
        assert_eq!(report.tables[0].mass, "3/2");
        assert!(report.summary.contains("mass 3/2 = 3/2 ok"));
    }

    #[test]
    fn guard_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(["truncdisp", "classify", "--p", "2", "--n", "3", "--h", "6", "--out", out]), EXIT_GUARD);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn analyze_units_and_non_perfect() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [("GF(2)", false), ("GF(2)[x]/x^3", true)];
        for (spec, non_perfect) in cases {
            let w = WittRing::new(&FiniteRing::parse(spec).unwrap(), 1).unwrap();
            for (disp, nil, slope) in
                [(TruncatedDisplay::mult_unit(&w), true, "1"), (TruncatedDisplay::etale_unit(&w), false, "0")]
            {
                let path = dir.path().join("d.json");
                std::fs::write(&path, serde_json::to_string(&disp.to_file()).unwrap()).unwrap();
                let r = analyze(&path, DEFAULT_BUDGET).unwrap();
                assert_eq!(r.nilpotent, nil);
                if non_perfect {
                    assert!(r.slopes.is_none() && r.dual.is_none());
                    assert_eq!(r.notices.len(), 1);
                } else {
                    assert_eq!(r.slopes, Some(vec![slope.to_string()]));
                    assert_eq!(r.dual.unwrap().d, 1 - disp.dim_t());
                }
            }
        }
    }
}
