//! Command-line surface for the exact Hall-algebra toolkit.
//!
//! Quivers come in as JSON files (`{"vertices": ["i","j"], "arrows":
//! [["i","j"],["j","j"]]}`); generator words are comma-separated
//! `vertex:level` tokens (`i:1,j:2`, level defaulting to 1). Every number in
//! every report is exact — integers, fractions, or Laurent polynomials in
//! `v` — and identical inputs always produce byte-identical reports.
//!
//! Exit codes: 0 success, 1 budget/interpolation/verification failure,
//! 2 bad input.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hallforge::comp;
use hallforge::exactnum::{vanishing_sum, QuadScalar, RationalFn};
use hallforge::generic::{verify_phi, GenericCtx};
use hallforge::hall::{HallCtx, HallElt, TensorElt};
use hallforge::quiver::Quiver;
use hallforge::uq::{self, Letter, SymCtx, Word};
use hallforge::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hallforge",
    version,
    about = "Exact Hall algebras over finite fields, generic composition algebras \
             by interpolation, and degreewise verification that the two agree"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    output: Format,
    /// Directory for the persistent Hall-number cache; defaults to
    /// $HALLFORGE_CACHE_DIR when that is set.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Largest brute-force enumeration allowed per sweep.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u128,
}

#[derive(Args, Clone)]
struct GenericArgs {
    /// Solving primes for interpolation (distinct primes).
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 5, 7])]
    primes: Vec<u32>,
    /// Held-out verification prime (must not be a solving prime).
    #[arg(long, default_value_t = 11)]
    held_out: u32,
    /// Extension primes drawn, smallest first, when a support needs more
    /// equations than the solving primes provide.
    #[arg(long, value_delimiter = ',', default_values_t = [13u32, 17, 19, 23, 29, 31])]
    pool: Vec<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the Borcherds-Cartan matrix, vertex classification, and
    /// generator index set of a quiver.
    Cartan {
        quiver: PathBuf,
        /// Level cap for the printed generator index set.
        #[arg(long, default_value_t = 3)]
        l_max: u32,
        #[command(flatten)]
        common: Common,
    },
    /// List the isomorphism classes at a dimension vector by brute
    /// enumeration.
    Classify {
        quiver: PathBuf,
        /// Dimension vector, one entry per vertex.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<u32>,
        /// Field size (a prime).
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Restrict to nilpotent representations.
        #[arg(long)]
        nilpotent: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Hall-multiply the level generators along a word at one prime.
    Mult {
        quiver: PathBuf,
        /// Generator word, e.g. `i:1,j:2`.
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Comultiply the product of a generator word at one prime.
    Delta {
        quiver: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Green pairing of two generator-word products at one prime.
    Pair {
        quiver: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Check every applicable alternating-sum relation at one prime.
    Serre {
        quiver: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Highest target level to test.
        #[arg(long, default_value_t = 3)]
        l_max: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Check every applicable level-generator commutation at one prime.
    Commute {
        quiver: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 3)]
        l_max: u32,
        /// Cap on the summed levels of a tested pair.
        #[arg(long = "ht", default_value_t = 4)]
        height: u32,
        #[command(flatten)]
        common: Common,
    },
    /// The orthogonalized primitive generator at one vertex and level, at
    /// one prime.
    SGen {
        quiver: PathBuf,
        /// Vertex name as it appears in the quiver file.
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Interpolated pairing polynomial of two s-monomials.
    PPoly {
        quiver: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        generic: GenericArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether an element lies in the radical of the generic form.
    Radical {
        quiver: PathBuf,
        /// Alternating-sum relation `i,j,level` (vertex names).
        #[arg(long)]
        serre: Option<String>,
        /// Commutator `i,level,j,level` of two generators pairing to zero.
        #[arg(long)]
        commutator: Option<String>,
        /// A single s-monomial word.
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        generic: GenericArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Symbolic Gram block of one refined weight.
    Gram {
        quiver: PathBuf,
        /// Refined weight as a multiset of letters, e.g. `i:1,i:2`.
        #[arg(long)]
        beta: String,
        #[command(flatten)]
        common: Common,
    },
    /// Interpolated Hall-side Gram block of one refined weight.
    GramGeneric {
        quiver: PathBuf,
        #[arg(long)]
        beta: String,
        #[command(flatten)]
        generic: GenericArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Compare symbolic and interpolated Gram blocks on every refined
    /// weight up to a height bound; exit 1 on any mismatch.
    VerifyPhi {
        quiver: PathBuf,
        /// Largest refined height (number of letters) to verify.
        #[arg(long = "ht", default_value_t = 4)]
        height: u32,
        #[arg(long, default_value_t = 3)]
        l_max: u32,
        #[command(flatten)]
        generic: GenericArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in verification suite on the four reference quivers.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn load_quiver(path: &Path) -> Result<Quiver> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("cannot read {}: {e}", path.display())))?;
    Quiver::from_json_str(&text)
}

fn cache_dir(common: &Common) -> Option<PathBuf> {
    common
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("HALLFORGE_CACHE_DIR").map(PathBuf::from))
}

fn hall_ctx(quiver: Quiver, q: u32, common: &Common) -> Result<HallCtx> {
    if !is_prime(q) {
        return Err(Error::BadInput(format!("{q} is not prime")));
    }
    if common.budget == 0 {
        return Err(Error::BadInput("budget must be positive".into()));
    }
    let mut ctx = HallCtx::new(quiver, q).with_budget(common.budget);
    if let Some(dir) = cache_dir(common) {
        ctx = ctx.with_disk_cache(&dir)?;
    }
    Ok(ctx)
}

fn generic_ctx(quiver: Quiver, args: &GenericArgs, common: &Common) -> Result<GenericCtx> {
    let mut gen = GenericCtx::with_primes(
        quiver,
        &args.primes,
        args.held_out,
        &args.pool,
        common.budget,
    )?;
    if let Some(dir) = cache_dir(common) {
        gen = gen.with_cache_dir(&dir)?;
    }
    Ok(gen)
}

/// Parse `i:1,j:2` into a validated generator word; a bare vertex name
/// means level 1.
fn parse_word(quiver: &Quiver, text: &str) -> Result<Word> {
    let mut out = Word::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (name, level) = match token.split_once(':') {
            Some((n, l)) => {
                let level: u32 = l.trim().parse().map_err(|_| {
                    Error::BadInput(format!("bad level in token {token:?}"))
                })?;
                (n.trim(), level)
            }
            None => (token, 1),
        };
        out.push((quiver.vertex(name)?, level));
    }
    if out.is_empty() {
        return Err(Error::BadInput("empty generator word".into()));
    }
    uq::validate_word(quiver, &out)?;
    Ok(out)
}

fn letter_label(quiver: &Quiver, kind: &str, (i, l): Letter) -> String {
    format!("{kind}({},{})", quiver.name(i), l)
}

fn word_label(quiver: &Quiver, kind: &str, word: &[Letter]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|&letter| letter_label(quiver, kind, letter))
        .collect::<Vec<_>>()
        .join("·")
}

/// Sort key that depends only on the class itself, not on the order the
/// registry happened to discover it in (which a warm cache changes).
fn class_key(ctx: &HallCtx, c: usize) -> (u32, Vec<u32>, String) {
    let dims = ctx.registry().class(c).dims.clone();
    (dims.iter().sum(), dims, ctx.registry().describe(c))
}

/// Rows `(class description, exact coefficient)` of a Hall element, graded
/// by dimension vector.
fn hall_elt_rows(ctx: &HallCtx, elt: &HallElt) -> Vec<(String, String)> {
    let mut rows: Vec<_> = elt
        .iter()
        .map(|(c, coeff)| (class_key(ctx, c), coeff.to_string()))
        .collect();
    rows.sort();
    rows.into_iter().map(|(key, coeff)| (key.2, coeff)).collect()
}

fn tensor_elt_rows(ctx: &HallCtx, elt: &TensorElt) -> Vec<(String, String)> {
    let mut rows: Vec<_> = elt
        .iter()
        .map(|((a, b), coeff)| {
            ((class_key(ctx, a), class_key(ctx, b)), coeff.to_string())
        })
        .collect();
    rows.sort();
    rows.into_iter()
        .map(|((a, b), coeff)| (format!("{} ⊗ {}", a.2, b.2), coeff))
        .collect()
}

fn rows_to_json(rows: &[(String, String)]) -> Value {
    Value::Array(
        rows.iter()
            .map(|(k, v)| json!({ "term": k, "coefficient": v }))
            .collect(),
    )
}

fn print_rows(rows: &[(String, String)]) {
    if rows.is_empty() {
        println!("0");
        return;
    }
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:width$}  {v}");
    }
}

fn emit(format: Format, report: Value, table: impl FnOnce()) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        ),
        Format::Table => table(),
    }
}

fn drain_hall_warnings(ctx: &mut HallCtx) {
    for w in ctx.take_warnings() {
        eprintln!("warning: {w}");
    }
}

fn drain_generic_warnings(gen: &mut GenericCtx) {
    for w in gen.take_warnings() {
        eprintln!("warning: {w}");
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Cartan { quiver, l_max, common } => {
            let q = load_quiver(&quiver)?;
            let matrix = q.cartan_matrix();
            let vertices: Vec<Value> = (0..q.vertex_count())
                .map(|i| {
                    json!({
                        "name": q.name(i),
                        "loops": q.loop_count(i),
                        "kind": q.kind(i).to_string(),
                    })
                })
                .collect();
            let index: Vec<String> = q
                .index_levels(l_max)
                .into_iter()
                .map(|letter| letter_label(&q, "e", letter))
                .collect();
            let report = json!({
                "cartan_matrix": matrix,
                "vertices": vertices,
                "generators": index,
            });
            emit(common.output, report, || {
                println!("vertices:");
                for i in 0..q.vertex_count() {
                    println!("  {}  loops {}  {}", q.name(i), q.loop_count(i), q.kind(i));
                }
                println!("cartan matrix:");
                for row in &matrix {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:>4}")).collect();
                    println!("  [{}]", cells.join(" "));
                }
                println!("generators (levels ≤ {l_max}): {}", index.join(", "));
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Classify { quiver, dims, q, nilpotent, common } => {
            let qv = load_quiver(&quiver)?;
            if dims.len() != qv.vertex_count() {
                return Err(Error::BadInput(format!(
                    "dimension vector has {} entries for {} vertices",
                    dims.len(),
                    qv.vertex_count()
                )));
            }
            let mut ctx = hall_ctx(qv, q, &common)?;
            let mut classes = ctx.registry_mut().classify(&dims, nilpotent, common.budget)?;
            classes.sort_by_cached_key(|&(c, _)| class_key(&ctx, c));
            let rows: Vec<Value> = classes
                .iter()
                .map(|&(c, points)| {
                    json!({
                        "class": ctx.registry().describe(c),
                        "orbit_points": points.to_string(),
                        "automorphisms": ctx.aut(c).to_string(),
                    })
                })
                .collect();
            drain_hall_warnings(&mut ctx);
            let report = json!({
                "dims": dims,
                "q": q,
                "nilpotent_only": nilpotent,
                "classes": rows,
            });
            emit(common.output, report, || {
                println!("{} classes at dims {dims:?}, q = {q}:", classes.len());
                for &(c, points) in &classes {
                    println!(
                        "  {}  orbit {points}  aut {}",
                        ctx.registry().describe(c),
                        ctx.aut(c)
                    );
                }
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Mult { quiver, word, q, common } => {
            let qv = load_quiver(&quiver)?;
            let w = parse_word(&qv, &word)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let mut acc = ctx.unit();
            for &(i, l) in &w {
                let e = comp::e_generator(&mut ctx, i, l)?.elt;
                acc = ctx.multiply(&acc, &e)?;
            }
            let rows = hall_elt_rows(&ctx, &acc);
            drain_hall_warnings(&mut ctx);
            let report = json!({
                "word": word_label(&qv, "e", &w),
                "q": q,
                "product": rows_to_json(&rows),
            });
            emit(common.output, report, || {
                println!("{} at q = {q}:", word_label(&qv, "e", &w));
                print_rows(&rows);
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Delta { quiver, word, q, common } => {
            let qv = load_quiver(&quiver)?;
            let w = parse_word(&qv, &word)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let mut acc = ctx.unit();
            for &(i, l) in &w {
                let e = comp::e_generator(&mut ctx, i, l)?.elt;
                acc = ctx.multiply(&acc, &e)?;
            }
            let delta = ctx.comultiply(&acc)?;
            let rows = tensor_elt_rows(&ctx, &delta);
            drain_hall_warnings(&mut ctx);
            let report = json!({
                "word": word_label(&qv, "e", &w),
                "q": q,
                "coproduct": rows_to_json(&rows),
            });
            emit(common.output, report, || {
                println!("δ({}) at q = {q}:", word_label(&qv, "e", &w));
                print_rows(&rows);
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Pair { quiver, left, right, q, common } => {
            let qv = load_quiver(&quiver)?;
            let lw = parse_word(&qv, &left)?;
            let rw = parse_word(&qv, &right)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let mut prods = Vec::new();
            for w in [&lw, &rw] {
                let mut acc = ctx.unit();
                for &(i, l) in w.iter() {
                    let e = comp::e_generator(&mut ctx, i, l)?.elt;
                    acc = ctx.multiply(&acc, &e)?;
                }
                prods.push(acc);
            }
            let value = ctx.green_pair(&prods[0], &prods[1]);
            drain_hall_warnings(&mut ctx);
            let report = json!({
                "left": word_label(&qv, "e", &lw),
                "right": word_label(&qv, "e", &rw),
                "q": q,
                "value": value.to_string(),
            });
            emit(common.output, report, || {
                println!(
                    "({}, {}) at q = {q}: {value}",
                    word_label(&qv, "e", &lw),
                    word_label(&qv, "e", &rw)
                );
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Serre { quiver, q, l_max, common } => {
            let qv = load_quiver(&quiver)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let mut rows: Vec<(String, bool)> = Vec::new();
            for i in 0..qv.vertex_count() {
                if qv.loop_count(i) != 0 {
                    continue;
                }
                for j in 0..qv.vertex_count() {
                    if i == j {
                        continue;
                    }
                    let top = if qv.kind(j).is_imaginary() { l_max } else { 1 };
                    for l in 1..=top {
                        let (ok, _) = comp::serre_check(&mut ctx, i, j, l)?;
                        let label = format!(
                            "vertex {} against {}, level {l}",
                            qv.name(i),
                            qv.name(j)
                        );
                        rows.push((label, ok));
                    }
                }
            }
            drain_hall_warnings(&mut ctx);
            let all_ok = rows.iter().all(|(_, ok)| *ok);
            let report = json!({
                "q": q,
                "instances": rows
                    .iter()
                    .map(|(label, ok)| json!({ "relation": label, "sum": if *ok { "0" } else { "nonzero" } }))
                    .collect::<Vec<_>>(),
                "all_zero": all_ok,
            });
            emit(common.output, report, || {
                if rows.is_empty() {
                    println!("no loopless vertices: no alternating-sum relations apply");
                }
                for (label, ok) in &rows {
                    println!("{label}: {}", if *ok { "0" } else { "NONZERO" });
                }
            });
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }

        Cmd::Commute { quiver, q, l_max, height, common } => {
            let qv = load_quiver(&quiver)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let nv = qv.vertex_count();
            let mut rows: Vec<(String, bool)> = Vec::new();
            for i in 0..nv {
                for j in i..nv {
                    let mut a = vec![0u32; nv];
                    let mut b = vec![0u32; nv];
                    a[i] = 1;
                    b[j] = 1;
                    if qv.sym_form(&a, &b) != 0 {
                        continue;
                    }
                    let ktop = if qv.kind(i).is_imaginary() { l_max } else { 1 };
                    let ltop = if qv.kind(j).is_imaginary() { l_max } else { 1 };
                    for k in 1..=ktop {
                        for l in 1..=ltop {
                            if k + l > height || (i == j && l < k) {
                                continue;
                            }
                            let ok = comp::commute_check(&mut ctx, i, k, j, l)?;
                            rows.push((
                                format!(
                                    "[{}, {}]",
                                    letter_label(&qv, "e", (i, k)),
                                    letter_label(&qv, "e", (j, l))
                                ),
                                ok,
                            ));
                        }
                    }
                }
            }
            drain_hall_warnings(&mut ctx);
            let all_ok = rows.iter().all(|(_, ok)| *ok);
            let report = json!({
                "q": q,
                "instances": rows
                    .iter()
                    .map(|(label, ok)| json!({ "commutator": label, "value": if *ok { "0" } else { "nonzero" } }))
                    .collect::<Vec<_>>(),
                "all_zero": all_ok,
            });
            emit(common.output, report, || {
                if rows.is_empty() {
                    println!("no zero-pairing vertex pairs: nothing to commute");
                }
                for (label, ok) in &rows {
                    println!("{label} = {}", if *ok { "0" } else { "NONZERO" });
                }
            });
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }

        Cmd::SGen { quiver, vertex, level, q, common } => {
            let qv = load_quiver(&quiver)?;
            let i = qv.vertex(&vertex)?;
            let mut ctx = hall_ctx(qv.clone(), q, &common)?;
            let gen = comp::orthogonalize_s(&mut ctx, i, level)?;
            let norm = ctx.green_pair(&gen.elt, &gen.elt);
            let rows = hall_elt_rows(&ctx, &gen.elt);
            let lower: Vec<(String, String)> = gen
                .lower
                .iter()
                .map(|(word, c)| {
                    let label = word
                        .iter()
                        .map(|&l| letter_label(&qv, "e", (i, l)))
                        .collect::<Vec<_>>()
                        .join("·");
                    (label, c.to_string())
                })
                .collect();
            drain_hall_warnings(&mut ctx);
            let report = json!({
                "generator": letter_label(&qv, "s", (i, level)),
                "q": q,
                "norm": norm.to_string(),
                "lower_term_coefficients": rows_to_json(&lower),
                "expansion": rows_to_json(&rows),
            });
            emit(common.output, report, || {
                println!("{} at q = {q}:", letter_label(&qv, "s", (i, level)));
                print_rows(&rows);
                if !lower.is_empty() {
                    println!("subtracted lower monomials:");
                    print_rows(&lower);
                }
                println!("norm: {norm}");
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::PPoly { quiver, left, right, generic, common } => {
            let qv = load_quiver(&quiver)?;
            let lw = parse_word(&qv, &left)?;
            let rw = parse_word(&qv, &right)?;
            let mut gen = generic_ctx(qv.clone(), &generic, &common)?;
            let support: Vec<i64> = gen.p_support(&lw, &rw).into_iter().collect();
            let p = gen.p_polynomial(&lw, &rw)?;
            drain_generic_warnings(&mut gen);
            let report = json!({
                "left": word_label(&qv, "s", &lw),
                "right": word_label(&qv, "s", &rw),
                "support_bound": support,
                "solving_primes": gen.solving_primes(),
                "held_out_prime": gen.held_out_prime(),
                "polynomial": p.to_string(),
            });
            emit(common.output, report, || {
                println!(
                    "P[{}, {}] = {p}",
                    word_label(&qv, "s", &lw),
                    word_label(&qv, "s", &rw)
                );
                println!(
                    "interpolated from primes {:?}, verified at {}",
                    gen.solving_primes(),
                    gen.held_out_prime()
                );
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Radical { quiver, serre, commutator, word, generic, common } => {
            let qv = load_quiver(&quiver)?;
            let picked =
                [serre.is_some(), commutator.is_some(), word.is_some()].iter().filter(|b| **b).count();
            if picked != 1 {
                return Err(Error::BadInput(
                    "pass exactly one of --serre, --commutator, --word".into(),
                ));
            }
            let mut sym = SymCtx::new(qv.clone());
            let (label, coeffs): (String, BTreeMap<Word, RationalFn>) = if let Some(spec) = serre {
                let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::BadInput("--serre takes i,j,level".into()));
                }
                let i = qv.vertex(parts[0])?;
                let j = qv.vertex(parts[1])?;
                let l: u32 = parts[2]
                    .parse()
                    .map_err(|_| Error::BadInput(format!("bad level {:?}", parts[2])))?;
                let elt = uq::serre_element(&qv, i, j, l)?;
                (format!("alternating sum ({},{},{l})", qv.name(i), qv.name(j)), sym.to_s_basis(&elt)?)
            } else if let Some(spec) = commutator {
                let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(Error::BadInput("--commutator takes i,level,j,level".into()));
                }
                let i = qv.vertex(parts[0])?;
                let k: u32 = parts[1]
                    .parse()
                    .map_err(|_| Error::BadInput(format!("bad level {:?}", parts[1])))?;
                let j = qv.vertex(parts[2])?;
                let l: u32 = parts[3]
                    .parse()
                    .map_err(|_| Error::BadInput(format!("bad level {:?}", parts[3])))?;
                let elt = uq::commutator_element(&qv, i, k, j, l)?;
                (
                    format!(
                        "[{}, {}]",
                        letter_label(&qv, "e", (i, k)),
                        letter_label(&qv, "e", (j, l))
                    ),
                    sym.to_s_basis(&elt)?,
                )
            } else {
                let w = parse_word(&qv, &word.unwrap())?;
                let label = word_label(&qv, "s", &w);
                (label, [(w, RationalFn::one())].into_iter().collect())
            };
            let mut gen = generic_ctx(qv.clone(), &generic, &common)?;
            let in_radical = gen.radical_test(&coeffs)?;
            drain_generic_warnings(&mut gen);
            let coeff_rows: Vec<(String, String)> = coeffs
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(w, c)| (word_label(&qv, "s", w), c.to_string()))
                .collect();
            let report = json!({
                "element": label,
                "s_basis": rows_to_json(&coeff_rows),
                "in_radical": in_radical,
            });
            emit(common.output, report, || {
                println!("{label} in the s-basis:");
                print_rows(&coeff_rows);
                println!("in radical: {}", if in_radical { "yes" } else { "no" });
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Gram { quiver, beta, common } => {
            let qv = load_quiver(&quiver)?;
            let letters = uq::refined_weight(&parse_word(&qv, &beta)?);
            let mut sym = SymCtx::new(qv.clone());
            let (words, entries) = sym.gram_block(&letters)?;
            let (_, normalized) = sym.normalized_gram_block(&letters)?;
            let labels: Vec<String> =
                words.iter().map(|w| word_label(&qv, "s", w)).collect();
            let report = json!({
                "beta": word_label(&qv, "s", &letters),
                "words": labels,
                "entries": matrix_strings(&entries),
                "normalized": matrix_strings(&normalized),
            });
            emit(common.output, report, || {
                println!("symbolic Gram block at {}:", word_label(&qv, "s", &letters));
                print_matrix(&labels, &matrix_strings(&entries));
                println!("normalized by the letter norms:");
                print_matrix(&labels, &matrix_strings(&normalized));
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::GramGeneric { quiver, beta, generic, common } => {
            let qv = load_quiver(&quiver)?;
            let letters = uq::refined_weight(&parse_word(&qv, &beta)?);
            let mut gen = generic_ctx(qv.clone(), &generic, &common)?;
            let gg = gen.generic_gram(&letters)?;
            drain_generic_warnings(&mut gen);
            let labels: Vec<String> =
                gg.words.iter().map(|w| word_label(&qv, "s", w)).collect();
            let p_strings: Vec<Vec<String>> = gg
                .p_matrix
                .iter()
                .map(|row| row.iter().map(|p| p.to_string()).collect())
                .collect();
            let norm_rows: Vec<(String, String)> = gg
                .norms
                .iter()
                .map(|(letter, n)| (letter_label(&qv, "s", *letter), n.to_string()))
                .collect();
            let report = json!({
                "beta": word_label(&qv, "s", &letters),
                "words": labels,
                "pairing_polynomials": p_strings,
                "norms": rows_to_json(&norm_rows),
                "entries": matrix_strings(&gg.entries),
            });
            emit(common.output, report, || {
                println!(
                    "interpolated Gram block at {}:",
                    word_label(&qv, "s", &letters)
                );
                println!("pairing polynomials:");
                print_matrix(&labels, &p_strings);
                println!("letter norms:");
                print_rows(&norm_rows);
            });
            Ok(ExitCode::SUCCESS)
        }

        Cmd::VerifyPhi { quiver, height, l_max, generic, common } => {
            let qv = load_quiver(&quiver)?;
            let mut gen = generic_ctx(qv.clone(), &generic, &common)?;
            let mut sym = SymCtx::new(qv.clone());
            let mut rows: Vec<Value> = Vec::new();
            let mut all_ok = true;
            let mut table_lines: Vec<String> = Vec::new();
            for h in 1..=height {
                for beta in uq::refined_weights_of_height(&qv, h, l_max) {
                    let report = verify_phi(&mut gen, &mut sym, &beta)?;
                    all_ok &= report.matched;
                    let label = word_label(&qv, "s", &beta);
                    rows.push(json!({
                        "weight": label,
                        "block_size": report.words.len(),
                        "rank": report.rank,
                        "matched": report.matched,
                        "entries": matrix_strings(&report.sym_entries),
                    }));
                    table_lines.push(format!(
                        "{label}: block {}x{}, rank {}, {}",
                        report.words.len(),
                        report.words.len(),
                        report.rank,
                        if report.matched { "match" } else { "MISMATCH" }
                    ));
                }
            }
            drain_generic_warnings(&mut gen);
            let report = json!({
                "height": height,
                "l_max": l_max,
                "weights": rows,
                "verified": all_ok,
            });
            emit(common.output, report, || {
                for line in &table_lines {
                    println!("{line}");
                }
                println!(
                    "overall: {}",
                    if all_ok { "verified" } else { "FAILED" }
                );
            });
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }

        Cmd::Selftest { common } => selftest(&common),
    }
}

fn matrix_strings(m: &[Vec<RationalFn>]) -> Vec<Vec<String>> {
    m.iter()
        .map(|row| row.iter().map(|e| e.to_string()).collect())
        .collect()
}

fn print_matrix(labels: &[String], rows: &[Vec<String>]) {
    for (label, row) in labels.iter().zip(rows) {
        println!("  {label}: [{}]", row.join(", "));
    }
}

/// A fast end-to-end pass over every layer of the library on the four
/// reference quivers; scopes are trimmed relative to the full acceptance
/// suite so the whole run stays in seconds.
fn selftest(common: &Common) -> Result<ExitCode> {
    let mut failures = 0;
    let mut step = |name: &str, result: std::result::Result<String, String>| match result {
        Ok(detail) => println!("{name}: ok ({detail})"),
        Err(msg) => {
            failures += 1;
            println!("{name}: FAILED — {msg}");
        }
    };
    let budget = common.budget;

    step("cartan classification", check_cartan());
    step("counting formulas", check_counts(budget));
    step("level-generator coproducts", check_coproducts(budget));
    step("bialgebra axioms", check_bialgebra(budget));
    step("relation checks", check_relations(budget));
    step("stable-subspace counts", check_stable_subspaces(budget));
    step("interpolated pairings", check_interpolation(budget));
    step("radical membership", check_radical(budget));
    step("generator norms", check_norms(budget));
    step("gram-block comparison", check_phi(budget));
    step("graded dimensions", check_graded_dims());
    step("alternating binomial sums", check_vanishing());

    if failures == 0 {
        println!("selftest: all 12 checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: {failures} of 12 checks failed");
        Ok(ExitCode::FAILURE)
    }
}

type Check = std::result::Result<String, String>;

fn reference_quivers() -> Vec<(&'static str, Quiver)> {
    vec![
        ("jordan", Quiver::jordan()),
        ("two-loop", Quiver::loops(2)),
        ("a2", Quiver::a2()),
        ("b", Quiver::arrow_to_loop()),
    ]
}

fn check_cartan() -> Check {
    let expected: Vec<Vec<Vec<i64>>> = vec![
        vec![vec![0]],
        vec![vec![-2]],
        vec![vec![2, -1], vec![-1, 2]],
        vec![vec![2, -1], vec![-1, 0]],
    ];
    for ((name, q), want) in reference_quivers().into_iter().zip(expected) {
        if q.cartan_matrix() != want {
            return Err(format!("{name}: wrong Cartan matrix"));
        }
    }
    Ok("4 quivers".into())
}

fn check_counts(budget: u128) -> Check {
    let mut n = 0;
    for q in [2u32, 3, 5] {
        let mut ctx = HallCtx::new(Quiver::jordan(), q).with_budget(budget);
        for l in 1..=3u32 {
            let class = ctx.level_class(0, l);
            if ctx.aut(class) != comp::aut_closed_form(q, l) {
                return Err(format!("aut mismatch at q={q}, level {l}"));
            }
            n += 1;
        }
    }
    for q in [2u32, 3] {
        let mut ctx = HallCtx::new(Quiver::jordan(), q).with_budget(budget);
        for m in 1..=2u32 {
            for k in 1..=2u32 {
                let cm = ctx.level_class(0, m);
                let cn = ctx.level_class(0, k);
                let cl = ctx.level_class(0, m + k);
                let got = ctx.hall_number(cm, cn, cl).map_err(|e| e.to_string())?;
                let want = hallforge::hall::grassmann_count(q, m + k, k)
                    .ok_or("overflow in subspace count")?;
                if got != num_bigint::BigInt::from(want) {
                    return Err(format!("subspace count mismatch at q={q}, ({m},{k})"));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} counts"))
}

fn check_coproducts(budget: u128) -> Check {
    let mut n = 0;
    for quiver in [Quiver::jordan(), Quiver::loops(2)] {
        for q in [2u32, 3] {
            let mut ctx = HallCtx::new(quiver.clone(), q).with_budget(budget);
            for l in 1..=3u32 {
                if !comp::coproduct_check(&mut ctx, 0, l).map_err(|e| e.to_string())? {
                    return Err(format!("coproduct formula fails at q={q}, level {l}"));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} coproducts"))
}

fn check_bialgebra(budget: u128) -> Check {
    let mut n = 0;
    for quiver in [Quiver::a2(), Quiver::jordan()] {
        let mut ctx = HallCtx::new(quiver.clone(), 2).with_budget(budget);
        let nv = quiver.vertex_count();
        let mut classes = Vec::new();
        for total in 1..=2u32 {
            for dims in dim_vectors(nv, total) {
                for (c, _) in ctx
                    .registry_mut()
                    .classify(&dims, false, budget)
                    .map_err(|e| e.to_string())?
                {
                    classes.push(c);
                }
            }
        }
        for &x in &classes {
            for &y in &classes {
                let ex = ctx.class_elt(x);
                let ey = ctx.class_elt(y);
                let prod = ctx.multiply(&ex, &ey).map_err(|e| e.to_string())?;
                let lhs = ctx.comultiply(&prod).map_err(|e| e.to_string())?;
                let dx = ctx.comultiply(&ex).map_err(|e| e.to_string())?;
                let dy = ctx.comultiply(&ey).map_err(|e| e.to_string())?;
                let rhs = ctx.tensor_multiply(&dx, &dy).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!("comultiplicativity fails on ({x},{y})"));
                }
                for &z in &classes {
                    let ez = ctx.class_elt(z);
                    let yz = ctx.multiply(&ey, &ez).map_err(|e| e.to_string())?;
                    let lhs = ctx.green_pair(&ex, &yz);
                    let ten = TensorElt::pure(&ey, &ez);
                    let rhs = ctx.tensor_pair(&dx, &ten);
                    if lhs != rhs {
                        return Err(format!("adjunction fails on ({x},{y},{z})"));
                    }
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} triples"))
}

fn dim_vectors(nv: usize, total: u32) -> Vec<Vec<u32>> {
    if nv == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in dim_vectors(nv - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn check_relations(budget: u128) -> Check {
    let mut n = 0;
    for q in [2u32, 3] {
        let mut a2 = HallCtx::new(Quiver::a2(), q).with_budget(budget);
        for (i, j) in [(0, 1), (1, 0)] {
            let (ok, _) = comp::serre_check(&mut a2, i, j, 1).map_err(|e| e.to_string())?;
            if !ok {
                return Err(format!("alternating sum fails on a2 ({i},{j}) at q={q}"));
            }
            n += 1;
        }
        let mut b = HallCtx::new(Quiver::arrow_to_loop(), q).with_budget(budget);
        for l in 1..=2u32 {
            let (ok, _) = comp::serre_check(&mut b, 0, 1, l).map_err(|e| e.to_string())?;
            if !ok {
                return Err(format!("alternating sum fails on b (l={l}) at q={q}"));
            }
            n += 1;
        }
        let mut jordan = HallCtx::new(Quiver::jordan(), q).with_budget(budget);
        for k in 1..=2u32 {
            for l in k..=2u32 {
                if !comp::commute_check(&mut jordan, 0, k, 0, l).map_err(|e| e.to_string())? {
                    return Err(format!("commutation fails on ({k},{l}) at q={q}"));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} relations"))
}

fn check_stable_subspaces(budget: u128) -> Check {
    let mut n = 0;
    let mut ctx = HallCtx::new(Quiver::a2(), 2).with_budget(budget);
    let target = ctx.level_class(1, 1);
    let target_elt = ctx.class_elt(target);
    let mut classes = std::collections::BTreeSet::new();
    for k in 0..=2u32 {
        let left = comp::divided_power(&mut ctx, 0, k).map_err(|e| e.to_string())?;
        let right = comp::divided_power(&mut ctx, 0, 2 - k).map_err(|e| e.to_string())?;
        let term = ctx
            .multiply_all(&[left, target_elt.clone(), right])
            .map_err(|e| e.to_string())?;
        classes.extend(term.iter().map(|(c, _)| c));
    }
    for class in classes {
        let (_, m_p, _) = comp::stable_subspace_count(&ctx, class, 0, 0, 1);
        for nn in 0..=(m_p + 1) {
            let (count, m_p, n_p) = comp::stable_subspace_count(&ctx, class, nn, 0, 1);
            let got = QuadScalar::from_rational(
                2,
                num_rational::BigRational::from_integer(count),
            );
            if got != comp::stable_subspace_closed_form(2, m_p, n_p, nn) {
                return Err(format!("count mismatch at class {class}, n={nn}"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} counts"))
}

fn check_interpolation(budget: u128) -> Check {
    let mut n = 0;
    for quiver in [Quiver::jordan(), Quiver::a2()] {
        let mut gen = GenericCtx::with_primes(
            quiver.clone(),
            &[2, 3, 5, 7],
            11,
            &[13, 17, 19, 23, 29, 31],
            budget,
        )
        .map_err(|e| e.to_string())?;
        let mut words = Vec::new();
        for h in 1..=2u32 {
            for beta in uq::refined_weights_of_height(&quiver, h, 2) {
                words.extend(uq::words_of_refined(&beta));
            }
        }
        for a in 0..words.len() {
            for b in a..words.len() {
                gen.p_polynomial(&words[a], &words[b]).map_err(|e| e.to_string())?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} pairs"))
}

fn check_radical(budget: u128) -> Check {
    let a2 = Quiver::a2();
    let mut sym = SymCtx::new(a2.clone());
    let rel = uq::serre_element(&a2, 0, 1, 1).map_err(|e| e.to_string())?;
    let coeffs = sym.to_s_basis(&rel).map_err(|e| e.to_string())?;
    let mut gen =
        GenericCtx::with_primes(a2, &[2, 3, 5, 7], 11, &[13, 17, 19], budget)
            .map_err(|e| e.to_string())?;
    if !gen.radical_test(&coeffs).map_err(|e| e.to_string())? {
        return Err("alternating sum not detected in radical".into());
    }

    let jordan = Quiver::jordan();
    let mut jsym = SymCtx::new(jordan.clone());
    let comm = uq::commutator_element(&jordan, 0, 1, 0, 2).map_err(|e| e.to_string())?;
    let coeffs = jsym.to_s_basis(&comm).map_err(|e| e.to_string())?;
    let mut jgen =
        GenericCtx::with_primes(jordan, &[2, 3, 5, 7], 11, &[13, 17, 19], budget)
            .map_err(|e| e.to_string())?;
    if !jgen.radical_test(&coeffs).map_err(|e| e.to_string())? {
        return Err("commutator not detected in radical".into());
    }
    let single: BTreeMap<Word, RationalFn> =
        [(vec![(0usize, 1u32), (0, 1)], RationalFn::one())].into_iter().collect();
    if jgen.radical_test(&single).map_err(|e| e.to_string())? {
        return Err("nonzero-norm word wrongly placed in radical".into());
    }
    Ok("3 elements".into())
}

fn check_norms(budget: u128) -> Check {
    let mut gen = GenericCtx::with_primes(
        Quiver::jordan(),
        &[2, 3, 5, 7],
        11,
        &[13, 17, 19, 23, 29, 31],
        budget,
    )
    .map_err(|e| e.to_string())?;
    for l in 1..=3u32 {
        let norm = gen.e_norm_generic(0, l).map_err(|e| e.to_string())?;
        if norm != uq::nu_closed_form(l) {
            return Err(format!("interpolated norm differs from closed form at level {l}"));
        }
        let coeffs = norm
            .expand_at_infinity(10)
            .ok_or("norm has a pole at v = infinity")?;
        if !num_traits::One::is_one(&coeffs[0]) {
            return Err(format!("norm expansion at level {l} does not start at 1"));
        }
    }
    Ok("levels 1-3".into())
}

fn check_phi(budget: u128) -> Check {
    let mut blocks = 0;
    for (name, quiver) in reference_quivers() {
        let l_max = if name == "two-loop" { 2 } else { 3 };
        let mut gen = GenericCtx::with_primes(
            quiver.clone(),
            &[2, 3, 5, 7],
            11,
            &[13, 17, 19, 23, 29, 31],
            budget,
        )
        .map_err(|e| e.to_string())?;
        let mut sym = SymCtx::new(quiver.clone());
        for h in 1..=2u32 {
            for beta in uq::refined_weights_of_height(&quiver, h, l_max) {
                let report =
                    verify_phi(&mut gen, &mut sym, &beta).map_err(|e| e.to_string())?;
                if !report.matched {
                    return Err(format!("{name}: Gram blocks differ at {beta:?}"));
                }
                blocks += 1;
            }
        }
    }
    // A deliberately wrong norm must be caught.
    let jordan = Quiver::jordan();
    let mut gen = GenericCtx::with_primes(jordan.clone(), &[2, 3, 5, 7], 11, &[], budget)
        .map_err(|e| e.to_string())?;
    let doubled =
        uq::nu_closed_form(2).scaled(&num_rational::BigRational::from_integer(2.into()));
    let mut sym = SymCtx::new(jordan).with_nu(0, 2, doubled);
    let report = verify_phi(&mut gen, &mut sym, &[(0, 2)]).map_err(|e| e.to_string())?;
    if report.matched {
        return Err("perturbed norm went undetected".into());
    }
    Ok(format!("{blocks} blocks + negative control"))
}

fn check_graded_dims() -> Check {
    fn partition_count(n: u32, max_part: u32) -> usize {
        if n == 0 {
            return 1;
        }
        (1..=max_part.min(n)).map(|k| partition_count(n - k, k)).sum()
    }
    let mut sym = SymCtx::new(Quiver::jordan());
    for n in 1..=3u32 {
        let dim = sym.graded_dim(&[n], 3).map_err(|e| e.to_string())?;
        if dim != partition_count(n, n) {
            return Err(format!("graded dimension at weight {n} is {dim}"));
        }
    }
    Ok("weights 1-3".into())
}

fn check_vanishing() -> Check {
    let mut n = 0;
    for m in 1..=6u32 {
        let mut d = -(m as i64) + 1;
        while d <= m as i64 - 1 {
            if !vanishing_sum(m, d).is_zero() {
                return Err(format!("sum (m={m}, d={d}) does not vanish"));
            }
            n += 1;
            d += 2;
        }
        if vanishing_sum(m, m as i64 + 1).is_zero() {
            return Err(format!("sum (m={m}, d={}) vanished unexpectedly", m + 1));
        }
    }
    Ok(format!("{n} sums"))
}
