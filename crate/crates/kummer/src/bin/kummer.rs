//! Command-line driver: reproducible batch runs over the library, with
//! deterministic, re-parseable outputs.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use kummer::ellcurve::{self, CurveAB};
use kummer::evaluation;
use kummer::localfields::{Field, HalfInt, Place};
use kummer::pointsearch::{self, BinaryQuartic, SearchMode, SearchTask};
use kummer::surface::{self, classify, KummerSurface};
use kummer::survey;

#[derive(Parser)]
#[command(
    name = "kummer",
    about = "2-torsion transcendental Brauer classes on split Kummer surfaces",
    version
)]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the primary output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Smooth,
}

#[derive(Subcommand)]
enum Cmd {
    /// Square-class matrix, kernels per field, class types, normal form
    Analyze {
        #[arg(long, value_parser = parse_surface)]
        surface: KummerSurface,
    },
    /// p-adic colouring record of one class at one prime
    Colour {
        #[arg(long, value_parser = parse_surface)]
        surface: KummerSurface,
        /// Class bitmask (e1 = 1, ..., e4 = 8); default: first kernel vector
        #[arg(long)]
        class: Option<u8>,
        #[arg(long)]
        prime: i64,
    },
    /// Primes where a class evaluates non-constantly
    RelevantPrimes {
        #[arg(long, value_parser = parse_surface)]
        surface: KummerSurface,
        #[arg(long)]
        class: Option<u8>,
    },
    /// Rational point search on the two quartics of a surface
    Search {
        #[arg(long, value_parser = parse_surface)]
        surface: KummerSurface,
        #[arg(long, default_value_t = 100)]
        bound: i64,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        /// Override for the bad-prime bound C
        #[arg(long)]
        smooth_bound: Option<i64>,
    },
    /// Local evaluation vectors realized by found rational points
    Coverage {
        #[arg(long, value_parser = parse_surface)]
        surface: KummerSurface,
        #[arg(long)]
        class: Option<u8>,
        #[arg(long, default_value_t = 100)]
        bound: i64,
    },
    /// Enumerate all small-coefficient surfaces with a 2-torsion class
    Survey {
        #[arg(long, default_value_t = 50)]
        survey_bound: i64,
        /// Also compute the relevant-prime histogram (slower)
        #[arg(long)]
        histogram: bool,
    },
    /// Built-in checks on the surface (1, 25, -25, -36)
    VerifyExample,
}

fn parse_surface(s: &str) -> Result<KummerSurface, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected a,b,a2,b2 — got `{s}`"));
    }
    let mut c = [0i64; 4];
    for (slot, part) in c.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<i64>().map_err(|e| format!("`{part}`: {e}"))?;
    }
    KummerSurface::new(c[0], c[1], c[2], c[3]).map_err(|e| e.to_string())
}

fn default_class(s: &KummerSurface, class: Option<u8>) -> anyhow::Result<u8> {
    match class {
        Some(v) => Ok(v),
        None => surface::kernel(s, Field::Rational)
            .nonzero_vectors()
            .first()
            .copied()
            .context("surface has no 2-torsion Brauer class; pass --class"),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path:?}"))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn halfint_str(h: HalfInt) -> &'static str {
    if h.bit() == 0 {
        "0"
    } else {
        "1/2"
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring thread pool")?;
    }
    let text = match &cli.cmd {
        Cmd::Analyze { surface: s } => analyze(s)?,
        Cmd::Colour { surface: s, class, prime } => {
            let v = default_class(s, *class)?;
            let alpha = s.brauer_class(v)?;
            let colouring = evaluation::colouring(s, &alpha, *prime)?;
            colouring.serialize()
        }
        Cmd::RelevantPrimes { surface: s, class } => {
            let vectors = match class {
                Some(v) => vec![*v],
                None => surface::kernel(s, Field::Rational).nonzero_vectors(),
            };
            if vectors.is_empty() {
                bail!("surface has no 2-torsion Brauer class");
            }
            let mut text = String::new();
            for v in vectors {
                let alpha = s.brauer_class(v)?;
                let primes = evaluation::relevant_primes(s, &alpha)?;
                let primes =
                    primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
                text.push_str(&format!("class {v}: {primes}\n"));
            }
            text
        }
        Cmd::Search { surface: s, bound, mode, smooth_bound } => {
            let mut task = SearchTask::new(
                vec![BinaryQuartic::new(s.a, s.b)?, BinaryQuartic::new(s.ap, s.bp)?],
                *bound,
                match mode {
                    ModeArg::Full => SearchMode::Full,
                    ModeArg::Smooth => SearchMode::SmoothOnly,
                },
            )?;
            task.smooth_bound = *smooth_bound;
            let mut text = String::from("i\tj\tx\ty\tu\tv\tclass_rep\n");
            for sol in pointsearch::paged_search(&task)? {
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    sol.i, sol.j, sol.x, sol.y, sol.u, sol.v, sol.class_rep
                ));
            }
            text
        }
        Cmd::Coverage { surface: s, class, bound } => {
            let v = default_class(s, *class)?;
            let alpha = s.brauer_class(v)?;
            let primes: Vec<i64> =
                evaluation::relevant_primes(s, &alpha)?.into_iter().collect();
            let vectors = pointsearch::vector_coverage(s, &alpha, *bound)?;
            let admissible = evaluation::admissible_vectors(primes.len());
            let admissible: BTreeSet<Vec<HalfInt>> = admissible.into_iter().collect();
            let mut text = format!(
                "surface {s}\nclass {v}\nbound {bound}\nprimes {}\n",
                primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
            );
            text.push_str(&format!(
                "realized {} of {} admissible vectors\n",
                vectors.len(),
                admissible.len()
            ));
            for vec in &vectors {
                assert!(admissible.contains(vec), "realized vector must be admissible");
                let row =
                    vec.iter().map(|&h| halfint_str(h)).collect::<Vec<_>>().join("\t");
                text.push_str(&row);
                text.push('\n');
            }
            text
        }
        Cmd::Survey { survey_bound, histogram } => {
            let mut sample = survey::enumerate_sample(*survey_bound)?;
            let counts = survey::table_counts(&sample);
            let hist = if *histogram {
                Some(survey::relevant_prime_histogram(&mut sample)?)
            } else {
                None
            };
            let summary = survey::summary_json(*survey_bound, &counts, hist.as_ref());
            // the TSV is the primary artifact; the summary always goes
            // to stdout so batch runs can both archive and inspect
            if cli.out.is_some() {
                emit(&cli.out, &survey::sample_tsv(&sample))?;
            }
            println!("{summary}");
            return Ok(());
        }
        Cmd::VerifyExample => verify_example()?,
    };
    emit(&cli.out, &text)
}

fn analyze(s: &KummerSurface) -> anyhow::Result<String> {
    let m = surface::sz_matrix(s);
    let rational = surface::kernel(s, Field::Rational);
    let mut kernels = serde_json::Map::new();
    kernels.insert("Q".into(), serde_json::json!(rational.nonzero_vectors()));
    kernels.insert(
        "R".into(),
        serde_json::json!(surface::kernel(s, Field::Real).nonzero_vectors()),
    );
    let mut bad: BTreeSet<i64> = ellcurve::bad_primes(&CurveAB::new(s.a, s.b)?);
    bad.extend(ellcurve::bad_primes(&CurveAB::new(s.ap, s.bp)?));
    for p in bad {
        kernels.insert(
            format!("Q_{p}"),
            serde_json::json!(surface::kernel(s, Field::Padic(p)).nonzero_vectors()),
        );
    }
    let types: Vec<serde_json::Value> = rational
        .nonzero_vectors()
        .iter()
        .map(|&v| serde_json::json!({ "class": v, "type": format!("{:?}", classify(v).unwrap()) }))
        .collect();
    let (normal, transform) = surface::canonical_form(s)?;
    let doc = serde_json::json!({
        "surface": s,
        "matrix": m.entries,
        "matrix_reduced": m.reduced,
        "kernel": kernels,
        "class_types": types,
        "normal_form": normal,
        "normal_form_vector_map": transform.vector_map,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&doc)?))
}

fn verify_example() -> anyhow::Result<String> {
    let s = KummerSurface::new(1, 25, -25, -36)?;
    let mut text = String::new();
    let mut ok = true;
    let mut check = |label: &str, pass: bool, text: &mut String| {
        text.push_str(&format!("{label}: {}\n", if pass { "pass" } else { "FAIL" }));
        ok &= pass;
    };

    let ker = surface::kernel(&s, Field::Rational).nonzero_vectors();
    check("kernel over Q is {e1}", ker == vec![0b0001], &mut text);

    let alpha = s.brauer_class(0b0001)?;
    for p in [2i64, 3, 11] {
        let c = evaluation::constancy(&s, &alpha, p)?;
        check(
            &format!("constant with value 0 at {p}"),
            c == evaluation::Constancy::ConstantZero,
            &mut text,
        );
    }
    let c5 = evaluation::constancy(&s, &alpha, 5)?;
    check("non-constant at 5", c5 == evaluation::Constancy::NonConstant, &mut text);

    let v = evaluation::evaluate_point(&s, &alpha, Place::Finite(5), (17, 1), (5, 1))?;
    check("evaluation at (17, 5) over Q_5 is 1/2", v == HalfInt::HALF, &mut text);

    if !ok {
        print!("{text}");
        bail!("verify-example failed");
    }
    Ok(text)
}
