use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opnerve::bv::{check_d_squared, hc_colorings, nerve_bv_roundtrip, BVOperad, Comp};
use opnerve::doldkan::{
    check_a_and_b, check_alpha, ez_and_aw, gamma, gamma_n_iso, n_gamma_identity,
    random_base_change, random_complex, Comparison, Shape,
};
use opnerve::fixtures;
use opnerve::hops::{check_su_morphism, check_su_structure, SuHomotopyOperad};
use opnerve::linalg::ChainComplex;
use opnerve::nerve::{
    check_dendrex, check_horn, component_differential, fill_inner_horn, is_fibration,
    is_weak_equivalence, mapping_space, normalized_vs_tr, pullback, random_dendrex,
    restrict_to_horn,
};
use opnerve::operads::check_operad_axioms;
use opnerve::trees::{parse_tree, trees_up_to, Tree};
use opnerve::Report;

use crate::format::{self, Document, Object, Operad, OperadRef, Overrides};
use crate::CliError;

type Res<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "opnerve",
    version,
    about = "Checks for dg and homotopy colored operads and their nerves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Largest number of tree vertices to enumerate or evaluate.
    #[arg(long, global = true)]
    pub bound_vertices: Option<usize>,
    /// Degree window `a..b` for parsed graded spaces.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub degree_window: Option<(i32, i32)>,
    /// Simplicial level.
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a document and run the structure checks for its kind.
    Validate { file: PathBuf },
    /// Check the dendrex equations of a dendrex document.
    CheckDendrex { file: PathBuf },
    /// Fill an inner horn and check the result.
    FillHorn {
        file: PathBuf,
        /// Where to write the filled dendrex; standard output otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every face and degeneracy of a dendrex.
    Faces { file: PathBuf },
    /// Build the Boardman–Vogt complex of a tree and check d² = 0.
    Bv {
        #[arg(long)]
        tree: String,
        /// Where to write the top component as a complex document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the dendrex and BV-morphism predicates on random and composite data.
    CompareNerves {
        file: PathBuf,
        #[arg(long)]
        tree: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mapping space levels and their normalized chains against the truncation.
    Mapspace {
        file: PathBuf,
        #[arg(long)]
        profile: String,
    },
    /// Homology of a complex, or of one operad component.
    Homology {
        file: PathBuf,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Decide whether a morphism is a weak equivalence.
    CheckWe { file: PathBuf },
    /// Decide whether a morphism is a fibration.
    CheckFib { file: PathBuf },
    /// b∘a, α, EZ/AW, Γ/N and the mapping-space comparison.
    DoldkanSuite {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the shipped fixture documents into a directory.
    ExportFixtures { dir: PathBuf },
}

fn parse_window(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a: i32 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound '{a}'"))?;
    let b: i32 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound '{b}'"))?;
    if a > b {
        return Err(format!("empty window {a}..{b}"));
    }
    Ok((a, b))
}

/// A report plus an optional document produced by the command.
pub struct Outcome {
    pub report: Report,
    pub artifact: Option<(Option<PathBuf>, String)>,
}

impl Outcome {
    fn report(report: Report) -> Self {
        Outcome {
            report,
            artifact: None,
        }
    }
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides {
        window: cli.degree_window,
        vertex_bound: cli.bound_vertices,
    }
}

fn load(cli: &Cli, file: &Path) -> Res<Object> {
    format::load(file, &overrides(cli))
}

fn load_doc(file: &Path) -> Res<Document> {
    let src = std::fs::read_to_string(file)
        .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
    Document::from_toml(&src)
}

fn wrong_kind(file: &Path, want: &str) -> CliError {
    CliError::Usage(format!("{} is not {want}", file.display()))
}

fn operad_of(cli: &Cli, file: &Path) -> Res<Operad> {
    match load(cli, file)? {
        Object::Operad(op) => Ok(op),
        _ => Err(wrong_kind(file, "an operad")),
    }
}

pub fn run(cli: &Cli) -> Res<Outcome> {
    match &cli.command {
        Command::Validate { file } => validate(cli, file).map(Outcome::report),
        Command::CheckDendrex { file } => match load(cli, file)? {
            Object::Dendrex(op, x) => Ok(Outcome::report(check_dendrex(&op.su, &x)?)),
            _ => Err(wrong_kind(file, "a dendrex")),
        },
        Command::FillHorn { file, out } => fill_horn(cli, file, out.clone()),
        Command::Faces { file } => faces(cli, file).map(Outcome::report),
        Command::Bv { tree, out } => bv(cli, tree, out.clone()),
        Command::CompareNerves {
            file,
            tree,
            samples,
            seed,
        } => compare_nerves(cli, file, tree.as_deref(), *samples, *seed).map(Outcome::report),
        Command::Mapspace { file, profile } => mapspace(cli, file, profile).map(Outcome::report),
        Command::Homology { file, profile } => {
            homology(cli, file, profile.as_deref()).map(Outcome::report)
        }
        Command::CheckWe { file } | Command::CheckFib { file } => {
            let Object::Morphism(f) = load(cli, file)? else {
                return Err(wrong_kind(file, "a morphism"));
            };
            let v = if matches!(cli.command, Command::CheckWe { .. }) {
                is_weak_equivalence(&f)?
            } else {
                is_fibration(&f)?
            };
            let mut r = v.report;
            r.set_bound("holds", v.holds);
            Ok(Outcome::report(r))
        }
        Command::DoldkanSuite { samples, seed } => {
            doldkan_suite(cli, *samples, *seed).map(Outcome::report)
        }
        Command::ExportFixtures { dir } => export_fixtures(dir).map(Outcome::report),
    }
}

fn validate(cli: &Cli, file: &Path) -> Res<Report> {
    Ok(match load(cli, file)? {
        Object::Operad(op) => match &op.dg {
            Some(dg) => check_operad_axioms(dg),
            None => check_su_structure(&op.su),
        },
        Object::Complex(c) => {
            let mut r = Report::new().bound("dim", c.dim());
            r.pass("d² = 0");
            r
        }
        Object::Dendrex(op, x) => check_dendrex(&op.su, &x)?,
        Object::Horn(op, h) => check_horn(&op.su, &h)?,
        Object::Morphism(f) => check_su_morphism(&f),
    })
}

fn fill_horn(cli: &Cli, file: &Path, out: Option<PathBuf>) -> Res<Outcome> {
    let Object::Horn(op, h) = load(cli, file)? else {
        return Err(wrong_kind(file, "an inner horn"));
    };
    let mut r = Report::new()
        .bound("edge", h.edge)
        .bound("tree", h.tree.planar_encoding());
    let hr = check_horn(&op.su, &h)?;
    let ok = hr.passed();
    r.absorb("horn", hr);
    if !ok {
        return Ok(Outcome::report(r));
    }
    let x = fill_inner_horn(&op.su, &h)?;
    r.absorb("filler", check_dendrex(&op.su, &x)?);
    // keep a path reference when the filler lands next to the horn
    let doc = load_doc(file)?;
    let same_dir = out
        .as_ref()
        .map(|o| o.parent() == file.parent())
        .unwrap_or(false);
    let op_ref = match doc.operad {
        Some(OperadRef::Path(p)) if same_dir => OperadRef::Path(p),
        _ => OperadRef::Inline(Box::new(format::operad_doc(&op)?)),
    };
    let text = format::dendrex_doc(op_ref, &op.su, &x).to_toml()?;
    Ok(Outcome {
        report: r,
        artifact: Some((out, text)),
    })
}

fn faces(cli: &Cli, file: &Path) -> Res<Report> {
    let Object::Dendrex(op, x) = load(cli, file)? else {
        return Err(wrong_kind(file, "a dendrex"));
    };
    let mut r = Report::new().bound("tree", x.tree.planar_encoding());
    for (k, m) in x.tree.cofaces_and_codegeneracies().iter().enumerate() {
        let y = pullback(&op.su, &x, m)?;
        let c = check_dendrex(&op.su, &y)?;
        r.record(
            format!(
                "{k}: {:?} gives a dendrex on {}",
                m.kind,
                m.source.planar_encoding()
            ),
            if c.passed() {
                Ok(())
            } else {
                Err(c
                    .first_failure()
                    .map(|f| f.name.clone())
                    .unwrap_or_default())
            },
        );
    }
    Ok(r)
}

fn bv(cli: &Cli, tree: &str, out: Option<PathBuf>) -> Res<Outcome> {
    let (t, _) = parse_tree(tree)?;
    let bound = cli.bound_vertices.unwrap_or(5);
    if t.n_vertices() > bound {
        return Err(CliError::Usage(format!(
            "{} vertices exceed the bound {bound}",
            t.n_vertices()
        )));
    }
    let w = BVOperad::build(&t);
    let mut r = check_d_squared(&w);
    r.set_bound("tree", t.planar_encoding());
    let top = w.chain_complex(Comp::Sub(t.all_vertices()))?;
    r.set_bound("dim", top.dim());
    let text = format::complex_doc(&top).to_toml()?;
    Ok(Outcome {
        report: r,
        artifact: Some((out, text)),
    })
}

fn compare_nerves(
    cli: &Cli,
    file: &Path,
    tree: Option<&str>,
    samples: usize,
    seed: u64,
) -> Res<Report> {
    let op = operad_of(cli, file)?;
    let dg = op
        .dg
        .ok_or_else(|| CliError::Usage("compare-nerves needs a dg operad".into()))?;
    let bound = cli.bound_vertices.unwrap_or(3);
    let trees: Vec<Tree> = match tree {
        Some(s) => vec![parse_tree(s)?.0],
        None => trees_up_to(bound, dg.arity_bound()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new().bound("samples", samples).bound("seed", seed);
    let (mut tested, mut accepted) = (0, 0);
    for t in &trees {
        for colors in hc_colorings(&dg, t) {
            let rt = nerve_bv_roundtrip(&dg, t, &colors, samples, &mut rng)?;
            tested += rt.tested;
            accepted += rt.accepted;
            r.absorb(&format!("{} {colors:?}", t.planar_encoding()), rt.report);
        }
    }
    r.set_bound("tested", tested);
    r.set_bound("accepted", accepted);
    Ok(r)
}

fn mapspace(cli: &Cli, file: &Path, profile: &str) -> Res<Report> {
    let op = operad_of(cli, file)?;
    let prof = format::parse_profile(profile, op.su.color_names(), "--profile")?;
    let level = cli.level.unwrap_or(3);
    let ms = mapping_space(&op.su, &prof, level)?;
    let mut r = normalized_vs_tr(&op.su, &prof, level)?;
    for (n, l) in ms.levels.iter().enumerate() {
        r.set_bound(&format!("dim level {n}"), l.dim());
    }
    Ok(r)
}

fn homology(cli: &Cli, file: &Path, profile: Option<&str>) -> Res<Report> {
    let c = match (load(cli, file)?, profile) {
        (Object::Complex(c), None) => c,
        (Object::Operad(op), Some(p)) => {
            let prof = format::parse_profile(p, op.su.color_names(), "--profile")?;
            let space = op
                .su
                .component(&prof)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("empty component {p}")))?;
            let d = component_differential(&op.su, &prof)?;
            ChainComplex::new(space, d)?
        }
        (Object::Operad(_), None) => {
            return Err(CliError::Usage("an operad needs --profile".into()))
        }
        _ => return Err(wrong_kind(file, "a complex or an operad")),
    };
    let (lo, hi) = c.space().window();
    let mut r = Report::new().bound("window", format!("{}..{}", lo + 1, hi - 1));
    for n in lo + 1..hi {
        let h = c.homology(n)?;
        r.set_bound(&format!("H{n}"), h.dim);
    }
    r.pass("d² = 0");
    Ok(r)
}

fn doldkan_suite(cli: &Cli, samples: usize, seed: u64) -> Res<Report> {
    let level = cli.level.unwrap_or(4);
    let (lo, hi) = cli.degree_window.unwrap_or((0, 3));
    let (lo, hi) = (lo.max(0), hi.min(level as i32 - 1).max(lo.max(0)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new()
        .bound("level", level)
        .bound("samples", samples)
        .bound("degrees", format!("{lo}..{hi}"));
    r.absorb("a, b", check_a_and_b(level, level.min(3))?);
    r.absorb("α", check_alpha(level.min(4)));
    r.absorb(
        "EZ/AW Δ[2]×Δ[2]",
        ez_and_aw(&Shape::Simplex(2), &Shape::Simplex(2), level),
    );
    r.absorb(
        "EZ/AW Δ[1]×Δ[1]²",
        ez_and_aw(&Shape::Cube(1), &Shape::Cube(2), level),
    );
    let mut ng = Ok(());
    let mut gn = Ok(());
    for i in 0..samples {
        let v = random_complex(&mut rng, lo, hi, 4)?;
        if !n_gamma_identity(&v, level)?.passed() {
            ng = Err(format!("instance {i}"));
        }
        let x = gamma(&v, level)?.module;
        let x = x.conjugate(&random_base_change(&mut rng, &x.dims))?;
        if !gamma_n_iso(&x)?.passed() {
            gn = Err(format!("instance {i}"));
        }
    }
    r.record(format!("N∘Γ = id on {samples} complexes"), ng);
    r.record(format!("Γ∘N ≅ id on {samples} modules"), gn);
    let cmp = Comparison::new(level)?;
    let mut iso = Ok(());
    for i in 0..samples.min(20) {
        let v = random_complex(&mut rng, lo, hi, 4)?;
        let c = cmp.run(&v)?;
        if let Some(f) = c.first_failure() {
            iso = Err(format!("instance {i}: {}", f.name));
        }
    }
    r.record(
        format!(
            "a* is a homology isomorphism on {} complexes",
            samples.min(20)
        ),
        iso,
    );
    Ok(r)
}

fn write(dir: &Path, name: &str, doc: &Document, r: &mut Report) -> Res<()> {
    let path = dir.join(name);
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    std::fs::write(&path, doc.to_toml()?)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    r.pass(name);
    Ok(())
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

pub fn export_fixtures(dir: &Path) -> Res<Report> {
    let mut r = Report::new();
    for n in 1..=4 {
        let ts: Vec<Tree> = trees_up_to(n, 3)
            .into_iter()
            .filter(|t| t.n_vertices() == n)
            .collect();
        for (k, t) in ts.iter().enumerate() {
            let doc = format::dg_doc(&opnerve::DgColoredOperad::tree_operad(t), None);
            write(dir, &format!("tree-operads/v{n}-{k}.toml"), &doc, &mut r)?;
        }
    }
    write(
        dir,
        "complex.toml",
        &format::complex_doc(&fixtures::end_complex()),
        &mut r,
    )?;
    write(
        dir,
        "endomorphism.toml",
        &format::endomorphism_doc(&fixtures::end_complex(), 2),
        &mut r,
    )?;
    let ainf = Operad {
        dg: None,
        su: fixtures::a_infinity(),
    };
    write(dir, "a-infinity.toml", &format::operad_doc(&ainf)?, &mut r)?;
    write(
        dir,
        "two-colored.toml",
        &format::dg_doc(&fixtures::two_colored(), None),
        &mut r,
    )?;
    write(
        dir,
        "padded.toml",
        &format::dg_doc(&fixtures::padded(), None),
        &mut r,
    )?;
    let sets = [
        ("we-positive", fixtures::we_positive()),
        ("we-negative", fixtures::we_negative()),
        ("fib-positive", fixtures::fib_positive()),
        ("fib-negative", fixtures::fib_negative()),
    ];
    for (prefix, list) in sets {
        for (name, f) in list {
            let side = |p: &SuHomotopyOperad| {
                format::operad_doc(&Operad {
                    dg: p.dg().cloned(),
                    su: p.clone(),
                })
            };
            let doc = format::morphism_doc(&f, side(&f.source)?, side(&f.target)?)?;
            write(
                dir,
                &format!("morphisms/{prefix}-{}.toml", slug(&name)),
                &doc,
                &mut r,
            )?;
        }
    }
    // a dendrex over End(V) on the two-vertex linear tree and its inner horn
    let end = SuHomotopyOperad::from_dg(&fixtures::endomorphism());
    let t = Tree::linear(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_dendrex(&end, &t, &[0, 0, 0], &mut rng)?;
    let op = || OperadRef::Path("endomorphism.toml".into());
    write(
        dir,
        "dendrex.toml",
        &format::dendrex_doc(op(), &end, &x),
        &mut r,
    )?;
    let e = t.inner_edges()[0];
    let h = restrict_to_horn(&x, e)?;
    write(dir, "horn.toml", &format::horn_doc(op(), &end, &h), &mut r)?;
    Ok(r)
}
