mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use args::{Cli, Command, Experiment, Format, LModeArg, Mode, VariantArg};
use thinlab::arith::{self, KVariant};
use thinlab::counting::{self, CountOptions, CountSeries, CountSpec, RestrictedCount, Solvability};
use thinlab::experiments::{self, ExperimentOptions};
use thinlab::parse::parse_poly;
use thinlab::poly::MPoly;
use thinlab::report::{self, json_bigint, json_f64, json_int, json_rational};
use thinlab::sieve::{self, LMode, SieveParams};
use thinlab::upoly::{self, UPoly, UPolyError};

enum CliError {
    /// Bad flag value; exit code 2.
    Usage(String),
    /// The computation itself failed; exit code 1.
    Compute { kind: String, message: String },
}

type CliResult<T> = Result<T, CliError>;

fn compute<E: std::fmt::Debug + std::fmt::Display>(e: E) -> CliError {
    CliError::Compute {
        kind: error_kind(&format!("{e:?}")),
        message: e.to_string(),
    }
}

/// Innermost variant name of a `Debug` rendering such as `Count(BadPrime(4))`.
fn error_kind(debug: &str) -> String {
    const WRAPPERS: [&str; 5] = ["Count", "Sieve", "Arith", "Poly", "UPoly"];
    let mut s = debug;
    loop {
        let end = s.find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(s.len());
        let name = &s[..end];
        if WRAPPERS.contains(&name) && s[end..].starts_with('(') {
            s = &s[end + 1..];
        } else {
            return name.to_string();
        }
    }
}

fn usage(flag: &str, value: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value '{value}' for '{flag}': {reason}"))
}

fn parse_power(term: &str) -> Option<(u64, Option<u32>)> {
    let term = term.trim();
    match term.split_once('^') {
        Some((base, e)) => Some((base.trim().parse().ok()?, Some(e.trim().parse().ok()?))),
        None => Some((term.parse().ok()?, None)),
    }
}

fn power_value(base: u64, e: Option<u32>) -> Option<u64> {
    match e {
        Some(e) => base.checked_pow(e),
        None => Some(base),
    }
}

/// `"100"`, `"16,32,64"`, `"2^4,2^5"` or `"2^4..2^10"` (powers of one base).
fn parse_heights(flag: &str, text: &str) -> CliResult<Vec<u64>> {
    let bad = |reason: &str| usage(flag, text, reason);
    if let Some((lo, hi)) = text.split_once("..") {
        let (Some((b1, Some(e1))), Some((b2, Some(e2)))) = (parse_power(lo), parse_power(hi)) else {
            return Err(bad("a range must look like 2^4..2^10"));
        };
        if b1 != b2 || b1 < 2 || e1 > e2 {
            return Err(bad("a range needs one base >= 2 and increasing exponents"));
        }
        return (e1..=e2)
            .map(|e| b1.checked_pow(e).ok_or_else(|| bad("height overflows")))
            .collect();
    }
    let heights: Vec<u64> = text
        .split(',')
        .map(|t| parse_power(t).and_then(|(b, e)| power_value(b, e)))
        .collect::<Option<_>>()
        .ok_or_else(|| bad("expected comma-separated integers or powers such as 2^4"))?;
    if heights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("heights must be strictly increasing"));
    }
    Ok(heights)
}

fn poly_arg(text: &str, n: usize) -> CliResult<MPoly> {
    parse_poly(text, n).map_err(|e| usage("--poly", text, e))
}

fn univariate_arg(text: &str) -> CliResult<UPoly> {
    let f = poly_arg(text, 0)?;
    Ok(UPoly::from_mpoly(&f).expect("no X variables"))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn json_only(cli: &Cli, name: &str) -> CliResult<()> {
    if cli.format == Format::Csv {
        return Err(usage("--format", "csv", format!("{name} only produces JSON")));
    }
    Ok(())
}

fn emit(cli: &Cli, json_value: Value, csv_text: impl FnOnce() -> String) -> CliResult<String> {
    Ok(match cli.format {
        Format::Json => pretty(&json_value),
        Format::Csv => csv_text(),
    })
}

fn count_opts(cli: &Cli) -> CountOptions {
    CountOptions {
        workers: cli.workers as usize,
    }
}

fn upoly_json(g: &UPoly) -> Value {
    json!(g.to_mpoly(0).to_string())
}

fn run_count_cmd(cli: &Cli, a: &args::CountArgs) -> CliResult<String> {
    let f = poly_arg(&a.poly.poly, a.poly.n)?;
    let heights = parse_heights("--B", &a.b)?;
    let spec = match a.mode {
        Mode::Cov => CountSpec::Cov {
            poly: f,
            solvability: if a.rational { Solvability::Rational } else { Solvability::Integral },
        },
        Mode::CovRestricted => CountSpec::CovRestricted {
            poly: f,
            y_bound: a.y_bound.unwrap_or(*heights.last().expect("nonempty")),
            variant: if a.projection { RestrictedCount::Projection } else { RestrictedCount::Pairs },
        },
        Mode::Aff => CountSpec::Aff { poly: f },
        Mode::Proj => CountSpec::Proj { poly: f },
        Mode::ReducibleFibers => CountSpec::ReducibleFibers { poly: f },
    };
    let opts = count_opts(cli);
    if let [b] = heights[..] {
        let r = counting::run_count(&spec, b, opts).map_err(compute)?;
        let series = CountSeries {
            mode: r.mode,
            entries: vec![r.clone()],
        };
        emit(cli, report::count_result_json(&r, cli.timings), || report::series_csv(&series, cli.timings))
    } else {
        let s = counting::count_series(&spec, &heights, opts).map_err(compute)?;
        emit(cli, report::series_json(&s, cli.timings), || report::series_csv(&s, cli.timings))
    }
}

fn run_sieve(cli: &Cli, a: &args::SieveArgs) -> CliResult<String> {
    let f = poly_arg(&a.poly.poly, a.poly.n)?;
    let residue_filter = match &a.prime_class {
        None => None,
        Some(text) => {
            let parsed = text
                .split_once(':')
                .and_then(|(x, m)| Some((x.trim().parse::<u64>().ok()?, m.trim().parse::<u64>().ok()?)));
            match parsed {
                Some((x, m)) if m > 0 => Some((x, m)),
                _ => return Err(usage("--prime-class", text, "expected A:M with M >= 1")),
            }
        }
    };
    let params = SieveParams {
        q: a.q,
        mode: a.l_mode.map(|m| match m {
            LModeArg::Full => LMode::Full,
            LModeArg::PrimesOnly => LMode::PrimesOnly,
        }),
        residue_filter,
    };
    let opts = count_opts(cli);
    let r = sieve::large_sieve_bound(&f, a.b, &params, opts).map_err(compute)?;
    let mut out = report::sieve_report_json(&r);
    let mut row = Map::new();
    for key in ["B", "Q", "L_mode", "L", "bound", "exact_zero_certificate"] {
        row.insert(key.into(), out[key].clone());
    }
    if a.exact {
        let exact = counting::count_cov(&f, a.b, Solvability::Integral, opts).map_err(compute)?.count;
        let sound = r.bound >= BigRational::from_integer(BigInt::from(exact));
        let obj = out.as_object_mut().expect("object");
        obj.insert("exact".into(), json_int(exact));
        obj.insert("sound".into(), json!(sound));
        row.insert("exact".into(), json_int(exact));
        row.insert("sound".into(), json!(sound));
    }
    emit(cli, out, || report::rows_csv(&[row]))
}

fn run_modp(cli: &Cli, a: &args::ModpArgs) -> CliResult<String> {
    json_only(cli, "modp")?;
    let f = poly_arg(&a.poly.poly, a.poly.n)?;
    let opts = count_opts(cli);
    let out = if f.depends_on_y() {
        let c = counting::np_mp(&f, a.p, opts).map_err(compute)?;
        let mut out = json!({
            "p": json_int(c.p),
            "np": json_int(c.np),
            "mp": json_int(c.mp),
            "np_nonvanishing": json_int(c.np_nonvanishing),
            "identically_zero_fibers": json_int(c.identically_zero_fibers),
        });
        if let Some(m) = a.m {
            let mc = counting::multiplicity_check(&f, a.p, m, opts).map_err(compute)?;
            out["multiplicity"] = json!({
                "m": json_int(mc.m),
                "applicable": mc.applicable,
                "holds": mc.holds,
            });
        }
        out
    } else {
        if a.m.is_some() {
            return Err(usage("--m", &a.poly.poly, "the multiplicity check needs a polynomial in Y"));
        }
        let s = counting::schwartz_zippel_check(&f, a.p, opts).map_err(compute)?;
        json!({
            "p": json_int(s.p),
            "zeros": json_int(s.zeros),
            "degree": json_int(s.degree),
            "bound": json_int(s.bound),
            "holds": s.holds,
        })
    };
    Ok(pretty(&out))
}

fn run_langweil(cli: &Cli, a: &args::LangweilArgs) -> CliResult<String> {
    let f = poly_arg(&a.poly.poly, a.poly.n)?;
    let scan = counting::lang_weil_scan(&f, a.p_max, count_opts(cli)).map_err(compute)?;
    let rows: Vec<Map<String, Value>> = scan
        .rows
        .iter()
        .map(|r| {
            let v = json!({
                "p": json_int(r.p),
                "mp": json_int(r.mp),
                "error": json_int(r.error),
                "normalized_error": json_f64(r.normalized_error),
            });
            v.as_object().expect("object").clone()
        })
        .collect();
    let out = json!({
        "n_vars": scan.n_vars,
        "rows": rows,
        "skipped": scan.skipped.iter().map(|(p, why)| json!({"p": json_int(*p), "reason": why})).collect::<Vec<_>>(),
    });
    emit(cli, out, || report::rows_csv(&rows))
}

fn run_factor(cli: &Cli, a: &args::UnivariateArgs) -> CliResult<String> {
    json_only(cli, "factor")?;
    let g = univariate_arg(&a.poly)?;
    let fl = upoly::factor_over_z(&g).map_err(compute)?;
    let reducible = match upoly::is_reducible_over_q(&g) {
        Ok(r) => json!(r),
        Err(UPolyError::NotApplicable(_)) => Value::Null,
        Err(e) => return Err(compute(e)),
    };
    let out = json!({
        "poly": upoly_json(&g),
        "content": json_bigint(&fl.content),
        "factors": fl.factors.iter().map(|(f, m)| json!({"factor": upoly_json(f), "multiplicity": m})).collect::<Vec<_>>(),
        "reducible_over_q": reducible,
    });
    Ok(pretty(&out))
}

fn run_roots(cli: &Cli, a: &args::RootsArgs) -> CliResult<String> {
    json_only(cli, "roots")?;
    let g = univariate_arg(&a.poly)?;
    let ints = upoly::integer_roots(&g).map_err(compute)?;
    let rats = upoly::rational_roots(&g).map_err(compute)?;
    let real = upoly::real_root_isolation(&g).map_err(compute)?;
    let mut out = json!({
        "poly": upoly_json(&g),
        "integer_roots": ints.iter().map(json_bigint).collect::<Vec<_>>(),
        "rational_roots": rats.iter().map(json_rational).collect::<Vec<_>>(),
        "real_roots": real.iter().map(|iv| json!({
            "lo": json_rational(&iv.lo.to_rational()),
            "hi": json_rational(&iv.hi.to_rational()),
            "exact": iv.is_exact(),
        })).collect::<Vec<_>>(),
    });
    if let Some(p) = a.p {
        let r = upoly::roots_mod_p(&g, p).map_err(compute)?;
        out["mod_p"] = json!({"p": json_int(p), "count": json_int(r.count), "identically_zero": r.identically_zero});
    }
    Ok(pretty(&out))
}

fn run_rk(cli: &Cli, a: &args::RkArgs) -> CliResult<String> {
    json_only(cli, "rk")?;
    let omega = arith::omega(a.k).map_err(compute)?;
    Ok(pretty(&json!({"r": json_int(arith::r2(a.k)), "omega": omega})))
}

fn run_construct_k(cli: &Cli, a: &args::ConstructKArgs) -> CliResult<String> {
    json_only(cli, "construct-k")?;
    let variant = match a.variant {
        VariantArg::Full => KVariant::FullRange,
        VariantArg::Dyadic => KVariant::Dyadic,
    };
    let c = arith::construct_k(a.b, variant).map_err(compute)?;
    Ok(pretty(&json!({
        "B": json_int(a.b),
        "threshold": json_int(c.threshold),
        "variant": match a.variant { VariantArg::Full => "full", VariantArg::Dyadic => "dyadic" },
        "primes": c.primes.iter().map(|&p| json_int(p)).collect::<Vec<_>>(),
        "k": json_int(c.k),
        "range_empty": c.range_empty,
    })))
}

fn run_experiment(cli: &Cli, a: &args::ExperimentArgs) -> CliResult<String> {
    let opts = ExperimentOptions {
        count: count_opts(cli),
        timings: cli.timings,
    };
    let report = match &a.which {
        Experiment::CovLower { d, n, b } => experiments::exp_cov_lower(*d, *n, &parse_heights("--B", b)?, &opts),
        Experiment::AffineLower { d, n, b } => experiments::exp_affine_lower(*d, *n, &parse_heights("--B", b)?, &opts),
        Experiment::Quadric { b } => experiments::exp_quadric(&parse_heights("--B", b)?, &opts),
        Experiment::TwoSquares { k, b } => experiments::exp_two_squares(*k, *b, &opts),
        Experiment::Multidim { k, n, b } => experiments::exp_multidim(*k, *n, &parse_heights("--B", b)?, &opts),
        Experiment::UniformitySweep { n, b, k } => experiments::exp_uniformity_sweep(*n, *b, k, &opts),
        Experiment::ReducibleFibers { poly, b } => {
            let f = poly_arg(&poly.poly, poly.n)?;
            experiments::exp_reducible_fibers(&f, &parse_heights("--B", b)?, &opts)
        }
        Experiment::SieveGrowth {
            poly,
            b,
            cap,
            exact_limit,
        } => {
            let f = poly_arg(&poly.poly, poly.n)?;
            experiments::exp_sieve_growth(&f, &parse_heights("--B", b)?, *cap, *exact_limit, &opts)
        }
    }
    .map_err(compute)?;
    if let Some(dir) = &a.out_dir {
        let stem = report.file_stem();
        let json_path = dir.join(format!("{stem}.json"));
        let csv_path = dir.join(format!("{stem}.csv"));
        write_file(dir, None)?;
        write_file(&json_path, Some(&pretty(&report.to_json())))?;
        write_file(&csv_path, Some(&report.to_csv()))?;
        return Ok(format!("{}\n{}\n", json_path.display(), csv_path.display()));
    }
    emit(cli, report.to_json(), || report.to_csv())
}

/// Writes `text` to `path`; with `None`, creates `path` as a directory.
fn write_file(path: &Path, text: Option<&str>) -> CliResult<()> {
    let result = match text {
        Some(t) => std::fs::write(path, t),
        None => std::fs::create_dir_all(path),
    };
    result.map_err(|e| CliError::Compute {
        kind: "Io".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn read_points(a: &args::FitArgs) -> CliResult<Vec<(u64, u64)>> {
    if let Some(text) = &a.points {
        return text
            .split(',')
            .map(|pair| {
                let (b, c) = pair.split_once(':')?;
                Some((b.trim().parse().ok()?, c.trim().parse().ok()?))
            })
            .collect::<Option<_>>()
            .ok_or_else(|| usage("--points", text, "expected B:count pairs separated by commas"));
    }
    let path = a.input.as_ref().expect("clap requires --points or --input");
    let shown = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage("--input", &shown, e))?;
    let headers = reader.headers().map_err(|e| usage("--input", &shown, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(bi), Some(ci)) = (col("B"), col("count")) else {
        return Err(usage("--input", &shown, "CSV needs columns B and count"));
    };
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| usage("--input", &shown, e))?;
        let parse = |i: usize| rec.get(i).and_then(|v| v.parse::<u64>().ok());
        match (parse(bi), parse(ci)) {
            (Some(b), Some(c)) => points.push((b, c)),
            _ => return Err(usage("--input", &shown, "non-integer B or count")),
        }
    }
    Ok(points)
}

fn run_fit(cli: &Cli, a: &args::FitArgs) -> CliResult<String> {
    let points = read_points(a)?;
    let f = experiments::fit_points(&points).map_err(compute)?;
    let out = json!({
        "slope": json_f64(f.slope),
        "intercept": json_f64(f.intercept),
        "max_residual": json_f64(f.max_residual),
        "grid": f.grid.iter().map(|&b| json_int(b)).collect::<Vec<_>>(),
    });
    let row = json!({
        "slope": json_f64(f.slope),
        "intercept": json_f64(f.intercept),
        "max_residual": json_f64(f.max_residual),
    });
    emit(cli, out, || report::rows_csv(&[row.as_object().expect("object").clone()]))
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Count(a) => run_count_cmd(cli, a),
        Command::Sieve(a) => run_sieve(cli, a),
        Command::Modp(a) => run_modp(cli, a),
        Command::Langweil(a) => run_langweil(cli, a),
        Command::Factor(a) => run_factor(cli, a),
        Command::Roots(a) => run_roots(cli, a),
        Command::Rk(a) => run_rk(cli, a),
        Command::ConstructK(a) => run_construct_k(cli, a),
        Command::Experiment(a) => run_experiment(cli, a),
        Command::Fit(a) => run_fit(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => write_file(path, Some(&text)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Compute {
                kind: "Io".into(),
                message: e.to_string(),
            })
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute { kind, message }) => {
            eprintln!("{}", json!({"error": {"kind": kind, "message": message}}));
            ExitCode::from(1)
        }
    }
}
