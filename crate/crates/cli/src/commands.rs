use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use serde_json::{json, Value};

use quadmoments::analysis::integral_i;
use quadmoments::arith::cache::{read_cache, write_cache};
use quadmoments::arith::{is_fundamental, kronecker as kronecker_symbol, Discriminant, FundamentalSieve, DEFAULT_SEGMENT_SIZE};
use quadmoments::charsum::{char_sum, char_sum_profile, smoothed_sum};
use quadmoments::constants::{euler_ck, predicted_constant, PredictConfig};
use quadmoments::moments::{moment_smoothed, ratio_scan, MomentConfig, DEFAULT_BUDGET};
use quadmoments::polytope::{volume_mc, PairFormSystem};
use quadmoments::squarecount::{count_fast_f64_with, count_fast_with, count_oracle, fit_leading, log_grid, CountConfig};
use quadmoments::theta::{census_floor, nonvanishing_census, theta as theta_value, theta_moment, ThetaConfig};
use quadmoments::verify::{run_suite, CriterionReport, Suite, VerifyParams};

use crate::error::CliError;
use crate::output::{fnum, opt, Format, Report};
use crate::{
    CharsumArgs, CkArgs, CountMethod, DiscriminantsArgs, GammaArgs, Global, IntrealArgs, KroneckerArgs, MomentsArgs,
    PredictArgs, SquarecountArgs, ThetaArgs, VerifyArgs,
};

const DEFAULT_SEED: u64 = 0x5eed;
/// Largest Y for which a full prefix profile is emitted.
const PROFILE_MAX: f64 = 1e8;

pub enum Outcome {
    Report(Report),
    Verify { params: Value, reports: Vec<CriterionReport> },
}

impl Outcome {
    pub fn succeeded(&self) -> bool {
        match self {
            Outcome::Report(_) => true,
            Outcome::Verify { reports, .. } => reports.iter().all(|r| r.passed),
        }
    }

    /// Verify prints one human-readable line per criterion unless a format
    /// is requested.
    pub fn write(&self, format: Option<Format>, out: &mut dyn Write) -> Result<(), CliError> {
        match self {
            Outcome::Report(r) => r.write(format, out),
            Outcome::Verify { params, reports } => {
                let Some(format) = format else {
                    for r in reports {
                        writeln!(out, "{r}")?;
                    }
                    let passed = reports.iter().filter(|r| r.passed).count();
                    writeln!(out, "{passed}/{} criteria passed", reports.len())?;
                    return Ok(());
                };
                let mut table = Report::new(
                    "verify",
                    format,
                    params.clone(),
                    &["id", "name", "measured", "tolerance", "passed", "runtime_seconds"],
                );
                for r in reports {
                    table.push(
                        vec![
                            r.id.to_string(),
                            r.name.clone(),
                            r.measured.clone(),
                            r.tolerance.clone(),
                            r.passed.to_string(),
                            fnum(r.runtime_seconds),
                        ],
                        r,
                    )?;
                }
                table.write(Some(format), out)
            }
        }
    }
}

fn params(args: &impl serde::Serialize, g: &Global) -> Value {
    json!({ "command": args, "global": g })
}

fn segment_size(g: &Global) -> u64 {
    g.segment_size.unwrap_or(DEFAULT_SEGMENT_SIZE)
}

fn seed(g: &Global) -> u64 {
    g.seed.unwrap_or(DEFAULT_SEED)
}

/// Longest stretch past the last cached value checked directly before
/// falling back to a fresh sieve.
const CACHE_GAP_SCAN: u64 = 1 << 12;

/// The cache format does not record its bound. Since files are always
/// written as complete enumerations, a file covers `max` when no integer
/// between its last entry and `max` is a fundamental discriminant.
fn covers(cached: &[u64], max: u64) -> bool {
    match cached.last() {
        Some(&last) if last >= max => true,
        Some(&last) => max - last <= CACHE_GAP_SCAN && !(last + 1..=max).any(is_fundamental),
        None => false,
    }
}

fn load_or_enumerate(a: &DiscriminantsArgs, seg: u64) -> Result<(Vec<u64>, &'static str), CliError> {
    if let Some(path) = a.cache.as_ref().filter(|p| p.exists()) {
        let cached = read_cache(BufReader::new(File::open(path)?))?;
        if covers(&cached, a.max) {
            let upto = cached.partition_point(|&d| d <= a.max);
            return Ok((cached[..upto].to_vec(), "cache"));
        }
    }
    let values = FundamentalSieve::new(a.max, seg)?.collect();
    if let Some(path) = &a.cache {
        let mut w = BufWriter::new(File::create(path)?);
        write_cache(&mut w, &values)?;
        w.flush()?;
    }
    Ok((values, "sieve"))
}

pub fn discriminants(a: &DiscriminantsArgs, g: &Global) -> Result<Outcome, CliError> {
    let (values, source) = load_or_enumerate(a, segment_size(g))?;
    let mut p = params(a, g);
    p["source"] = json!(source);
    let mut r = Report::new("discriminants", Format::Csv, p, &["d"]);
    for d in values {
        r.push(vec![d.to_string()], &d)?;
    }
    Ok(Outcome::Report(r))
}

pub fn kronecker(a: &KroneckerArgs) -> Result<Outcome, CliError> {
    let ns: Vec<u64> = match (a.n, a.n_max) {
        (Some(n), _) => vec![n],
        (None, Some(m)) => (1..=m).collect(),
        (None, None) => unreachable!("clap requires one of --n, --n-max"),
    };
    let mut r = Report::new("kronecker", Format::Csv, json!({ "command": a }), &["d", "n", "chi"]);
    for n in ns {
        let chi = kronecker_symbol(a.d, n);
        r.push(
            vec![a.d.to_string(), n.to_string(), chi.to_string()],
            &json!({ "d": a.d, "n": n, "chi": chi }),
        )?;
    }
    Ok(Outcome::Report(r))
}

pub fn charsum(a: &CharsumArgs) -> Result<Outcome, CliError> {
    let d = Discriminant::new(a.d)?;
    let p = json!({ "command": a });
    let r = if a.profile {
        if !(a.y >= 1.0 && a.y <= PROFILE_MAX) {
            return Err(CliError::usage(format!("--profile needs 1 <= Y <= {PROFILE_MAX:e}")));
        }
        let mut r = Report::new("charsum_profile", Format::Csv, p, &["n", "partial_sum"]);
        for (i, s) in char_sum_profile(&d, a.y as usize).into_iter().enumerate() {
            r.push(vec![(i + 1).to_string(), s.to_string()], &json!({ "n": i + 1, "partial_sum": s }))?;
        }
        r
    } else if a.smoothed {
        let v = smoothed_sum(&d, a.y);
        let mut r = Report::new("charsum_smoothed", Format::Csv, p, &["d", "Y", "smoothed_sum"]);
        r.push(
            vec![a.d.to_string(), fnum(a.y), fnum(v)],
            &json!({ "d": a.d, "Y": a.y, "smoothed_sum": v }),
        )?;
        r
    } else {
        let s = char_sum(&d, a.y);
        let mut r = Report::new("charsum", Format::Csv, p, &["d", "Y", "sum"]);
        r.push(
            vec![a.d.to_string(), fnum(a.y), s.to_string()],
            &json!({ "d": a.d, "Y": a.y, "sum": s }),
        )?;
        r
    };
    Ok(Outcome::Report(r))
}

pub fn moments(a: &MomentsArgs, g: &Global) -> Result<Outcome, CliError> {
    let config = MomentConfig {
        budget: g.budget.unwrap_or(DEFAULT_BUDGET),
        segment_size: segment_size(g),
        predict: (!a.no_predict).then(|| PredictConfig {
            prime_cutoff: a.prime_cutoff,
            samples: a.samples,
            seed: seed(g),
        }),
    };
    let pairs: Vec<(u64, u64)> = a.x.iter().flat_map(|&x| a.y.iter().map(move |&y| (x, y))).collect();
    let p = params(a, g);
    if a.smoothed {
        let mut r = Report::new(
            "moments_smoothed",
            Format::Csv,
            p,
            &["X", "Y", "k", "value", "error_bound", "runtime_seconds"],
        );
        for &(x, y) in &pairs {
            let m = moment_smoothed(x, y, a.k, &config)?;
            r.push(
                vec![
                    x.to_string(),
                    y.to_string(),
                    a.k.to_string(),
                    fnum(m.value),
                    fnum(m.error_bound),
                    fnum(m.runtime_seconds),
                ],
                &m,
            )?;
        }
        return Ok(Outcome::Report(r));
    }
    let mut r = Report::new(
        "moments",
        Format::Csv,
        p,
        &["X", "Y", "k", "signed_sum", "abs_sum", "normalized_ratio", "predicted", "runtime_seconds"],
    );
    for m in ratio_scan(a.k, &pairs, &config)? {
        r.push(
            vec![
                m.x.to_string(),
                m.y.to_string(),
                m.k.to_string(),
                m.signed_sum.to_string(),
                m.abs_sum.to_string(),
                opt(m.normalized_ratio),
                fnum(m.predicted),
                fnum(m.runtime_seconds),
            ],
            &m,
        )?;
    }
    Ok(Outcome::Report(r))
}

pub fn theta(a: &ThetaArgs, g: &Global) -> Result<Outcome, CliError> {
    let p = params(a, g);
    let config = ThetaConfig {
        segment_size: segment_size(g),
        budget: g.budget.unwrap_or(DEFAULT_BUDGET),
    };
    if let Some(d) = a.d {
        let disc = Discriminant::new(d)?;
        let mut r = Report::new("theta", Format::Csv, p, &["d", "t", "N", "value", "tail_bound"]);
        for &t in &a.t {
            let s = theta_value(&disc, t)?;
            r.push(
                vec![
                    s.d.to_string(),
                    fnum(s.t),
                    s.truncation.to_string(),
                    fnum(s.value),
                    fnum(s.tail_bound),
                ],
                &s,
            )?;
        }
        return Ok(Outcome::Report(r));
    }
    let x = a.x.expect("clap requires --d or --x");
    if a.census {
        let threshold = a.threshold.unwrap_or_else(|| census_floor(x));
        let c = nonvanishing_census(x, threshold, &config)?;
        let mut r = Report::new(
            "theta_census",
            Format::Csv,
            p,
            &["X", "threshold", "count", "total", "fraction", "min_abs"],
        );
        r.push(
            vec![
                c.x.to_string(),
                fnum(c.threshold),
                c.count.to_string(),
                c.total.to_string(),
                fnum(c.fraction),
                fnum(c.min_abs),
            ],
            &c,
        )?;
        return Ok(Outcome::Report(r));
    }
    let k = a
        .k
        .ok_or_else(|| CliError::usage("theta over a range of discriminants needs --k or --census"))?;
    let mut r = Report::new("theta_moments", Format::Csv, p, &["X", "k", "t", "moment", "ratio"]);
    for &t in &a.t {
        let m = theta_moment(x, k, t, &config)?;
        r.push(
            vec![
                m.x.to_string(),
                m.k.to_string(),
                fnum(m.t),
                fnum(m.moment),
                fnum(m.ratio),
            ],
            &m,
        )?;
    }
    Ok(Outcome::Report(r))
}

fn join_bounds(b: &[u64]) -> String {
    b.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn squarecount(a: &SquarecountArgs, g: &Global) -> Result<Outcome, CliError> {
    let k = a.k as usize;
    let config = CountConfig {
        work_budget: g.budget.unwrap_or(CountConfig::default().work_budget),
        ..CountConfig::default()
    };
    let p = params(a, g);
    if a.fit {
        if !(a.grid_lo < a.grid_hi && a.per_decade > 0) {
            return Err(CliError::usage("fit grid needs grid_lo < grid_hi and per_decade >= 1"));
        }
        let fit = fit_leading(k, &log_grid(a.grid_lo, a.grid_hi, a.per_decade))?;
        let mut r = Report::new("squarecount_fit", Format::Json, p, &["Y", "value"]);
        for (y, v) in fit.grid.iter().zip(&fit.values) {
            r.push_row(vec![y.to_string(), fnum(*v)]);
        }
        r.push_record(&fit)?;
        return Ok(Outcome::Report(r));
    }
    let bounds = join_bounds(&a.bounds);
    let r = match a.method {
        CountMethod::Exact | CountMethod::Oracle => {
            let c = match a.method {
                CountMethod::Oracle => count_oracle(k, &a.bounds)?,
                _ => count_fast_with(k, &a.bounds, &config)?,
            };
            let mut r = Report::new("squarecount", Format::Csv, p, &["k", "bounds", "value", "tuple_count"]);
            r.push(
                vec![k.to_string(), bounds, c.value.to_string(), c.tuple_count.to_string()],
                &c,
            )?;
            r
        }
        CountMethod::Float => {
            let c = count_fast_f64_with(k, &a.bounds, &config)?;
            let mut r = Report::new(
                "squarecount_float",
                Format::Csv,
                p,
                &["k", "bounds", "value", "error_bound", "tuple_count"],
            );
            r.push(
                vec![
                    k.to_string(),
                    bounds,
                    fnum(c.value),
                    fnum(c.error_bound),
                    c.tuple_count.to_string(),
                ],
                &c,
            )?;
            r
        }
    };
    Ok(Outcome::Report(r))
}

pub fn gamma(a: &GammaArgs, g: &Global) -> Result<Outcome, CliError> {
    let k = a.k as usize;
    let system = match &a.beta {
        Some(beta) => PairFormSystem::new(k, beta.clone())?,
        None => PairFormSystem::all_ones(k)?,
    };
    let v = volume_mc(&system, a.samples, seed(g))?;
    let mut r = Report::new(
        "gamma",
        Format::Json,
        params(a, g),
        &["k", "r", "samples", "seed", "estimate", "stderr", "exact"],
    );
    r.push(
        vec![
            v.k.to_string(),
            v.r.to_string(),
            v.samples.to_string(),
            v.seed.to_string(),
            fnum(v.estimate),
            fnum(v.stderr),
            v.exact.as_ref().map(|e| e.to_string()).unwrap_or_default(),
        ],
        &v,
    )?;
    Ok(Outcome::Report(r))
}

pub fn ck(a: &CkArgs) -> Result<Outcome, CliError> {
    let e = euler_ck(a.k, a.prime_cutoff)?;
    let mut r = Report::new(
        "ck",
        Format::Json,
        json!({ "command": a }),
        &["k", "prime_cutoff", "partial", "tail_gap"],
    );
    r.push(
        vec![
            e.k.to_string(),
            e.prime_cutoff.to_string(),
            fnum(e.partial),
            fnum(e.tail_gap),
        ],
        &e,
    )?;
    Ok(Outcome::Report(r))
}

pub fn predict(a: &PredictArgs, g: &Global) -> Result<Outcome, CliError> {
    let config = PredictConfig {
        prime_cutoff: a.prime_cutoff,
        samples: a.samples,
        seed: seed(g),
    };
    let pr = predicted_constant(a.k, &config)?;
    let mut r = Report::new(
        "predict",
        Format::Json,
        params(a, g),
        &[
            "k",
            "cutoff",
            "c_k",
            "tail_gap",
            "zeta2",
            "gamma_k",
            "gamma_k_stderr",
            "predicted",
            "predicted_stderr",
        ],
    );
    r.push(
        [
            pr.k as f64,
            pr.cutoff as f64,
            pr.c_k,
            pr.tail_gap,
            pr.zeta2,
            pr.gamma_k,
            pr.gamma_k_stderr,
            pr.predicted,
            pr.predicted_stderr,
        ]
        .iter()
        .map(|&v| fnum(v))
        .collect(),
        &pr,
    )?;
    Ok(Outcome::Report(r))
}

pub fn intreal(a: &IntrealArgs) -> Result<Outcome, CliError> {
    let mut r = Report::new(
        "intreal",
        Format::Csv,
        json!({ "command": a }),
        &["logX", "I", "I_over_sqrtlog", "error_estimate"],
    );
    for &l in &a.logx {
        let i = integral_i(l, a.tol)?;
        r.push(
            vec![
                fnum(i.log_x),
                fnum(i.value),
                fnum(i.over_sqrt_log),
                fnum(i.error_estimate),
            ],
            &i,
        )?;
    }
    Ok(Outcome::Report(r))
}

pub fn verify(a: &VerifyArgs, g: &Global) -> Result<Outcome, CliError> {
    let suite: Suite = a.suite.parse()?;
    let vp = VerifyParams {
        x: a.x,
        seed: g.seed.unwrap_or(VerifyParams::default().seed),
    };
    let reports = run_suite(suite, &vp);
    Ok(Outcome::Verify {
        params: json!({ "suite": suite, "verify": vp, "global": g }),
        reports,
    })
}
