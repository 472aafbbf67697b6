use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use ultrahaar::diversity::{mds_embed, pairwise, parse_abundance, split_importance, LoadOptions, Orientation, UnknownLabels};
use ultrahaar::fmt::g17;
use ultrahaar::haar::{observed_sparsity, sparsify, Method, ReferenceMode, SparseSymMatrix, SparsifyOptions};
use ultrahaar::io;
use ultrahaar::spectrum::{eigen_estimates, exact_spectrum, lanczos, LanczosOptions, DEFAULT_BALANCE_TOL};
use ultrahaar::tree::{parse_newick, random_orb_tree, tree_stats, write_newick, LengthLaw, NewickOptions};
use ultrahaar::ultrametric::{
    covariance_from_tree, inverse_sign_check, is_strictly_ultrametric, tree_from_matrix, StrictUltrametricMatrix,
    DENSE_LIMIT, INVERSE_LIMIT,
};
use ultrahaar::{Error, ErrorKind, OrbTree};

use crate::run::Run;
use crate::{Cli, Command, SpectrumArgs, TableArgs};

pub enum FailureKind {
    Input,
    Numerical,
}

pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl From<&anyhow::Error> for Failure {
    fn from(e: &anyhow::Error) -> Self {
        let numerical = e
            .chain()
            .filter_map(|c| c.downcast_ref::<Error>())
            .any(|c| c.kind() == ErrorKind::Numerical);
        Failure {
            kind: if numerical { FailureKind::Numerical } else { FailureKind::Input },
            message: format!("{e:#}"),
        }
    }
}

pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    match threads {
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool"),
        _ => Ok(()),
    }
}

fn config(cli: &Cli) -> (&'static str, Value) {
    let common = json!({
        "out_dir": cli.out_dir.display().to_string(),
        "threads": cli.threads,
        "binarize": cli.binarize,
    });
    let (name, specific) = match &cli.command {
        Command::Stats { tree } => ("stats", json!({ "tree": tree })),
        Command::Sparsify { tree, drop_tol, slow_reference, general } => (
            "sparsify",
            json!({ "tree": tree, "drop_tol": drop_tol, "slow_reference": slow_reference, "general": general }),
        ),
        Command::Check { matrix, tol, split_tol } => ("check", json!({ "matrix": matrix, "tol": tol, "split_tol": split_tol })),
        Command::Spectrum(a) => (
            "spectrum",
            json!({
                "tree": a.source.tree, "matrix": a.source.matrix, "k": a.k, "tol": a.tol,
                "max_matvecs": a.max_matvecs, "seed": a.seed,
            }),
        ),
        Command::Dist { tree, abundance, metric, table } => (
            "dist",
            json!({
                "tree": tree, "abundance": abundance, "metric": format!("{metric:?}").to_lowercase(),
                "otus_as_rows": table.otus_as_rows, "strict_labels": table.strict_labels,
            }),
        ),
        Command::Embed { distances, dims } => ("embed", json!({ "distances": distances, "dims": dims })),
        Command::Splits { tree, abundance, sample_a, sample_b, table } => (
            "splits",
            json!({
                "tree": tree, "abundance": abundance, "sample_a": sample_a, "sample_b": sample_b,
                "otus_as_rows": table.otus_as_rows, "strict_labels": table.strict_labels,
            }),
        ),
        Command::Gen { internal, seed, lengths, output } => (
            "gen",
            json!({ "internal": internal, "seed": seed, "lengths": lengths, "output": output }),
        ),
    };
    (name, json!({ "common": common, "command": specific }))
}

/// Run the selected subcommand and record the manifest whatever the outcome.
pub fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    let (name, cfg) = config(cli);
    let mut run = Run::new(&cli.out_dir, name, cfg);
    let result = execute(cli, &mut run);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => match Failure::from(e).kind {
            FailureKind::Input => "input-error".to_string(),
            FailureKind::Numerical => "numerical-error".to_string(),
        },
    };
    let manifest = run.finish(&status);
    match (result, manifest) {
        (Err(e), _) => Err(Failure::from(&e)),
        (Ok(()), Err(e)) => Err(Failure::from(&e.context("writing the manifest"))),
        (Ok(()), Ok(())) => Ok(()),
    }
}

fn execute(cli: &Cli, run: &mut Run) -> Result<()> {
    let newick = NewickOptions { binarize: cli.binarize };
    match &cli.command {
        Command::Stats { tree } => {
            let t = load_tree(run, tree, &newick)?;
            stats(run, &t)
        }
        Command::Sparsify { tree, drop_tol, slow_reference, general } => {
            let t = load_tree(run, tree, &newick)?;
            let method = if *slow_reference { Method::Reference(ReferenceMode::Literal) } else { Method::Fast };
            cmd_sparsify(run, &t, SparsifyOptions { drop_tol: *drop_tol, method }, *general)
        }
        Command::Check { matrix, tol, split_tol } => check(run, matrix, *tol, *split_tol),
        Command::Spectrum(args) => spectrum(run, args, &newick),
        Command::Dist { tree, abundance, metric, table } => {
            let t = load_tree(run, tree, &newick)?;
            let tab = load_table(run, abundance, &t, table)?;
            let d = pairwise(&tab, &t, (*metric).into())?;
            run.write_output("distances.tsv", &io::write_distance_tsv(&d))?;
            println!("samples={}\nmetric={}", d.len(), d.metric);
            Ok(())
        }
        Command::Embed { distances, dims } => {
            let text = run.read_input(distances)?;
            let d = io::read_distance_tsv(&text, "input")?;
            let e = mds_embed(&d, *dims)?;
            run.write_output("embedding.tsv", &io::write_embedding_tsv(&e))?;
            let eig: Vec<String> = e.eigenvalues.iter().map(|x| g17(*x)).collect();
            println!(
                "samples={}\ndims={dims}\npositive_axes={}\neigenvalues={}\ndistortion={}",
                d.len(),
                e.positive_axes,
                eig.join(","),
                g17(e.distortion)
            );
            Ok(())
        }
        Command::Splits { tree, abundance, sample_a, sample_b, table } => {
            let t = load_tree(run, tree, &newick)?;
            let tab = load_table(run, abundance, &t, table)?;
            let index = |id: &str| {
                tab.sample_index(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("sample {id:?} is not in the table")))
            };
            let (a, b) = (index(sample_a)?, index(sample_b)?);
            let lambda = sparsify(&t, &SparsifyOptions::default())?.lambda;
            let s = split_importance(tab.row(a), tab.row(b), &t, &lambda)?;
            run.write_output("splits.tsv", &io::write_splits_tsv(&s))?;
            println!("haar_distance={}\nnonzero_splits={}", g17(s.total().sqrt()), s.scores.iter().filter(|x| **x > 0.0).count());
            Ok(())
        }
        Command::Gen { internal, seed, lengths, output } => {
            let law: LengthLaw = lengths.parse()?;
            let t = random_orb_tree(*internal, *seed, &law)?;
            let text = write_newick(&t) + "\n";
            run.write_output(output, &text)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn load_tree(run: &mut Run, path: &Path, options: &NewickOptions) -> Result<OrbTree> {
    let text = run.read_input(path)?;
    parse_newick(&text, options).with_context(|| format!("parsing {}", path.display()))
}

fn load_table(run: &mut Run, path: &Path, tree: &OrbTree, args: &TableArgs) -> Result<ultrahaar::diversity::AbundanceTable> {
    let text = run.read_input(path)?;
    let options = LoadOptions {
        orientation: if args.otus_as_rows { Orientation::OtusAsRows } else { Orientation::SamplesAsRows },
        unknown: if args.strict_labels { UnknownLabels::Error } else { UnknownLabels::Drop },
    };
    let table = parse_abundance(&text, tree, &options).with_context(|| format!("reading {}", path.display()))?;
    let dropped = table.dropped_labels();
    let mut listing = String::new();
    for l in dropped {
        listing.push_str(l);
        listing.push('\n');
    }
    run.write_output("dropped_labels.txt", &listing)?;
    run.note("dropped_labels", json!(dropped));
    if !dropped.is_empty() {
        eprintln!("warning: dropped {} OTU labels not found in the tree", dropped.len());
    }
    Ok(table)
}

fn stats(run: &mut Run, tree: &OrbTree) -> Result<()> {
    let s = tree_stats(tree);
    run.write_output("stats.tsv", &s.to_tsv())?;
    print!("{}", s.to_key_value());
    Ok(())
}

fn cmd_sparsify(run: &mut Run, tree: &OrbTree, options: SparsifyOptions, general: bool) -> Result<()> {
    let sp = sparsify(tree, &options)?;
    run.write_output("matrix.mtx", &io::write_matrix_market(&sp.matrix, general))?;
    run.write_output("lambda.tsv", &io::write_lambda_tsv(&sp.lambda))?;
    println!(
        "dim={}\nstored={}\nnonzeros={}\nobserved_zeta={}\nzeta_lower_bound={}",
        sp.matrix.dim(),
        sp.matrix.stored(),
        sp.matrix.nnz_symmetric(),
        g17(observed_sparsity(&sp.matrix)),
        g17(tree_stats(tree).zeta_lower_bound)
    );
    Ok(())
}

fn read_matrix(run: &mut Run, path: &Path) -> Result<(Vec<String>, nalgebra::DMatrix<f64>)> {
    let text = run.read_input(path)?;
    if text.starts_with("%%MatrixMarket") {
        let m = io::read_matrix_market_dense(&text)?;
        let labels = (1..=m.nrows()).map(|i| i.to_string()).collect();
        Ok((labels, m))
    } else {
        Ok(io::read_labeled_tsv(&text)?)
    }
}

fn check(run: &mut Run, path: &Path, tol: f64, split_tol: f64) -> Result<()> {
    let (labels, m) = read_matrix(run, path)?;
    let n = m.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n, limit: DENSE_LIMIT }.into());
    }
    let mut report = String::from("check\tresult\n");
    let report_ok = is_strictly_ultrametric(&m, tol);
    let _ = writeln!(report, "dim\t{n}");
    let _ = writeln!(report, "strictly_ultrametric\t{}", report_ok.is_ok());
    if !report_ok.is_ok() {
        let _ = writeln!(report, "violation\t{report_ok}");
        run.write_output("check.tsv", &report)?;
        print!("{}", tsv_to_key_value(&report));
        return Err(Error::NotUltrametric(report_ok.to_string()).into());
    }
    if n <= INVERSE_LIMIT {
        let inv = inverse_sign_check(&m, tol.max(1e-12))?;
        let _ = writeln!(report, "inverse_m_matrix\t{}", inv.is_ok());
        let _ = writeln!(report, "inverse_condition\t{}", g17(inv.condition));
        if !inv.is_ok() {
            let _ = writeln!(report, "inverse_violation\t{inv}");
        }
    } else {
        let _ = writeln!(report, "inverse_m_matrix\tskipped (dimension above {INVERSE_LIMIT})");
    }
    let s = StrictUltrametricMatrix::new(labels, m, tol)?;
    let tree = tree_from_matrix(&s, split_tol)?;
    let back = covariance_from_tree(&tree)?;
    let dev = (back.entries() - s.entries()).amax() / s.entries().amax().max(f64::MIN_POSITIVE);
    let _ = writeln!(report, "round_trip_max_relative_error\t{}", g17(dev));
    run.write_output("recovered.nwk", &(write_newick(&tree) + "\n"))?;
    run.write_output("check.tsv", &report)?;
    print!("{}", tsv_to_key_value(&report));
    Ok(())
}

fn tsv_to_key_value(tsv: &str) -> String {
    tsv.lines().skip(1).map(|l| l.replacen('\t', "=", 1) + "\n").collect()
}

fn spectrum(run: &mut Run, args: &SpectrumArgs, newick: &NewickOptions) -> Result<()> {
    let (matrix, lambda): (SparseSymMatrix, Vec<f64>) = match (&args.source.tree, &args.source.matrix) {
        (Some(path), _) => {
            let tree = load_tree(run, path, newick)?;
            let sp = sparsify(&tree, &SparsifyOptions::default())?;
            run.write_output("estimates.tsv", &io::write_estimates_tsv(&eigen_estimates(&tree)))?;
            if let Ok(exact) = exact_spectrum(&tree, DEFAULT_BALANCE_TOL) {
                run.write_output("exact_spectrum.tsv", &io::write_spectrum_tsv(&exact))?;
            }
            (sp.matrix, sp.lambda)
        }
        (None, Some(path)) => {
            let text = run.read_input(path)?;
            let m = io::read_matrix_market(&text)?;
            let diag = m.diagonal();
            (m, diag)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let k = args.k.min(matrix.dim());
    let options = LanczosOptions {
        tol: args.tol,
        max_matvecs: args.max_matvecs,
        seed: args.seed,
        ..Default::default()
    };
    let result = match lanczos(&matrix, k, &options) {
        Ok(r) => r,
        Err(Error::NotConverged { iterations, converged, requested, partial }) => {
            let mut text = String::from("index\teigenvalue\n");
            for (i, v) in partial.iter().enumerate() {
                let _ = writeln!(text, "{}\t{}", i + 1, g17(*v));
            }
            run.write_output("eigen_partial.tsv", &text)?;
            return Err(Error::NotConverged { iterations, converged, requested, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let mut text = String::from("index\teigenvalue\tresidual\n");
    for (i, (v, r)) in result.values.iter().zip(&result.residuals).enumerate() {
        let _ = writeln!(text, "{}\t{}\t{}", i + 1, g17(*v), g17(*r));
    }
    run.write_output("eigen.tsv", &text)?;

    let top = result.values[0];
    let max_lambda = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = format!(
        "key\tvalue\ndim\t{}\nk\t{k}\nlambda_max\t{}\nmax_node_lambda\t{}\nrelative_gap\t{}\ntrace\t{}\nmatvecs\t{}\n",
        matrix.dim(),
        g17(top),
        g17(max_lambda),
        g17((top - max_lambda) / top),
        g17(matrix.trace()),
        result.matvecs
    );
    run.write_output("spectrum_summary.tsv", &summary)?;
    print!("{}", tsv_to_key_value(&summary));
    Ok(())
}
