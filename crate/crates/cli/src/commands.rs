use num::rational::Ratio;
use num::{BigInt, BigRational, One};
use serde::Serialize;

use ergodic_align::analysis::{
    exact_round_probability, exact_round_probability_by_rows, fit_exponent, japb_exponent, jap_exponent,
    lemma3_failure, lemma3_failure_printed, monte_carlo, optimize_with, predicted_exponent, regime_child,
    regime_parent, span_first_order, span_fullness, Budget, McOptions, ParentPrediction, RegimeParams,
    ENUMERATION_LIMIT,
};
use ergodic_align::channel::{draw_matrix, split_rng};
use ergodic_align::gfq::rank;
use ergodic_align::schemes::{jap_run, japb_run, ParentScheme, SchemeSpec, SlotUse};
use ergodic_align::{Composition, FieldVector, PrimeField, RandomStream};

use crate::args::{Cli, Command, ExactCommand, Method, SchemeArgs, SchemeName};
use crate::output::{exact, float, join, render};
use crate::{CliError, Result};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn field(q: u64) -> Result<PrimeField> {
    Ok(PrimeField::new(q)?)
}

fn big(r: Ratio<u64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `p/q`, an integer, or a finite decimal such as `1.5`.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let bad = || usage(format!("cannot parse {s:?} as a non-negative rational"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        return Ok(Ratio::new(whole * den + frac, den));
    }
    Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?))
}

fn composition(a: Option<&str>, what: &str) -> Result<Composition> {
    let a = a.ok_or_else(|| usage(format!("{what} needs --a")))?;
    Ok(a.parse()?)
}

/// Builds and validates the scheme named by the flags.
pub fn scheme_spec(args: &SchemeArgs) -> Result<SchemeSpec> {
    let a = args.a.as_deref();
    let spec = match args.scheme {
        SchemeName::Ngjv => SchemeSpec::Ngjv,
        SchemeName::Tdma => SchemeSpec::Tdma,
        SchemeName::Jap => SchemeSpec::Jap(composition(a, "jap")?),
        SchemeName::Japb => SchemeSpec::JapB(composition(a, "japb")?),
        SchemeName::Child => {
            let parent_name = args
                .parent
                .ok_or_else(|| usage("child needs --parent {ngjv|tdma|jap|japb}"))?;
            let parent = match parent_name {
                SchemeName::Ngjv => ParentScheme::Ngjv,
                SchemeName::Tdma => ParentScheme::Tdma,
                SchemeName::Jap => ParentScheme::Jap(composition(a, "a jap parent")?),
                SchemeName::Japb => ParentScheme::JapB(composition(a, "a japb parent")?),
                SchemeName::Child => return Err(usage("a child scheme cannot be a parent")),
            };
            let m = match (&parent, args.parent_m) {
                (_, Some(m)) => m,
                (ParentScheme::Jap(a) | ParentScheme::JapB(a), None) => a.n(),
                _ => return Err(usage("child needs --parent-m")),
            };
            SchemeSpec::Child { parent, m }
        }
    };
    spec.validate(args.n)?;
    Ok(spec)
}

fn budget(cli: &Cli) -> Result<Budget> {
    match cli.budget_seconds {
        Some(s) if !(s > 0.0 && s.is_finite()) => Err(usage("--budget-seconds must be positive")),
        Some(s) => Ok(Budget::seconds(s)),
        None => Ok(Budget::unlimited()),
    }
}

/// Runs the selected subcommand and returns its rendered output.
pub fn execute(cli: &Cli) -> Result<String> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // only the first configuration in a process takes effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let budget = budget(cli)?;
    let out = match &cli.command {
        Command::Simulate(args) => {
            let spec = scheme_spec(&args.scheme)?;
            let rows = simulate_rows(&spec, &args.scheme, args.trials, cli.seed, args.max_wait, budget)?;
            render(&rows, cli.format)?
        }
        Command::Exact(cmd) => render(&exact_rows(cmd, cli.seed)?, cli.format)?,
        Command::Optimize(args) => {
            let mut rows = Vec::new();
            for &n in &args.n {
                let ks: Vec<usize> = if args.k.is_empty() {
                    (1..n).collect()
                } else {
                    args.k.clone()
                };
                for k in ks {
                    let o = optimize_with(n, k, args.argmin_limit, &budget)?;
                    rows.push(OptimizeRow {
                        n,
                        k,
                        t: o.t,
                        representative: o.representative().to_string(),
                        argmins: join(&o.argmins),
                        argmin_count: o.argmin_count.to_string(),
                        unique: o.unique,
                    });
                }
            }
            render(&rows, cli.format)?
        }
        Command::Table(args) => render(&table_rows(args.n_min, args.n_max)?, cli.format)?,
        Command::Figure(args) => {
            let ns = if args.n.is_empty() {
                (3..=7).collect()
            } else {
                args.n.clone()
            };
            let mut rows = Vec::new();
            for n in ns {
                rows.extend(figure_rows(n)?);
            }
            render(&rows, cli.format)?
        }
        Command::Regimes(args) => {
            let params = match (&args.alpha, &args.beta) {
                (Some(a), None) => RegimeParams::regime_i(parse_ratio(a)?)?,
                (None, Some(b)) => RegimeParams::regime_ii(parse_ratio(b)?)?,
                _ => return Err(usage("give exactly one of --alpha, --beta")),
            };
            let ns = if args.n.is_empty() {
                (1..=5).map(|i| 12 * i).collect()
            } else {
                args.n.clone()
            };
            render(&regime_rows(params, &ns)?, cli.format)?
        }
        Command::Fit(args) => {
            let spec = scheme_spec(&args.scheme)?;
            let row = fit_row(&spec, args, cli.seed, budget)?;
            render(&[row], cli.format)?
        }
    };
    budget.check()?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateRow {
    pub scheme: String,
    pub n: usize,
    pub q: u32,
    pub trials: u64,
    pub seed: u64,
    pub mean_delay: f64,
    pub std_error: f64,
    pub round_means: String,
    pub round_std_errors: String,
    pub dof: String,
    pub dof_float: f64,
    pub predicted_exponent: u64,
    pub resamples: u64,
}

fn simulate_rows(
    spec: &SchemeSpec,
    args: &SchemeArgs,
    trials: u64,
    seed: u64,
    max_wait: Option<u64>,
    budget: Budget,
) -> Result<Vec<SimulateRow>> {
    let opts = McOptions { max_wait, budget };
    args.q
        .iter()
        .map(|&q| {
            let s = monte_carlo(spec, args.n, field(q)?, trials, seed, &opts)?;
            Ok(SimulateRow {
                scheme: s.scheme,
                n: s.n,
                q: s.q,
                trials: s.trials,
                seed,
                mean_delay: s.mean_delay,
                std_error: s.std_error,
                round_means: join(&s.round_means),
                round_std_errors: join(&s.round_std_errors),
                dof: exact(&big(s.dof)),
                dof_float: float(&big(s.dof)),
                predicted_exponent: predicted_exponent(spec, args.n),
                resamples: s.resamples,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactRow {
    pub quantity: String,
    pub q: u32,
    pub params: String,
    pub value: String,
    pub value_float: f64,
    /// What `reference` is: a printed closed form, an asymptotic prediction, ..
    pub reference_kind: String,
    pub reference: String,
    pub reference_float: f64,
}

fn exact_rows(cmd: &ExactCommand, seed: u64) -> Result<Vec<ExactRow>> {
    let mut rows = Vec::new();
    match cmd {
        ExactCommand::Lemma3 { q, l } => {
            for &q in q {
                let f = field(q)?;
                for &l in l {
                    if l == 0 {
                        return Err(usage("--L must be at least 1"));
                    }
                    let v = lemma3_failure(f, l);
                    let printed = lemma3_failure_printed(f, l)?;
                    rows.push(ExactRow {
                        quantity: "lemma3".into(),
                        q: f.q(),
                        params: format!("L={l}"),
                        value: exact(&v),
                        value_float: float(&v),
                        reference_kind: "unsigned printed form".into(),
                        reference: exact(&printed),
                        reference_float: float(&printed),
                    });
                }
            }
        }
        ExactCommand::Round {
            n,
            a,
            k,
            q,
            scheme,
            method,
        } => {
            let a: Composition = a.parse()?;
            if a.n() != *n {
                return Err(usage(format!("composition {a} does not sum to n = {n}")));
            }
            let beamforming = match scheme {
                SchemeName::Jap => false,
                SchemeName::Japb => true,
                _ => return Err(usage("exact round supports --scheme jap or japb")),
            };
            if *k == 0 || *k > a.len() {
                return Err(usage(format!("round {k} not in 1..={}", a.len())));
            }
            let t_k = if beamforming {
                japb_exponent(&a).per_round[k - 1]
            } else {
                jap_exponent(&a).per_round[k - 1]
            };
            for &q in q {
                let f = field(q)?;
                let history = round_history(&a, *k, f, seed, beamforming)?;
                let full_fits = ((q - 1) as u128)
                    .checked_pow((n * n) as u32)
                    .is_some_and(|p| p <= ENUMERATION_LIMIT);
                let use_full = match method {
                    Method::Full => true,
                    Method::Rows => false,
                    Method::Auto => full_fits,
                };
                let v = if use_full {
                    exact_round_probability(&a, *k, &history, beamforming)?
                } else {
                    exact_round_probability_by_rows(&a, *k, &history, beamforming)?
                };
                let pred = BigRational::one() / num::pow(int(q), t_k as usize);
                rows.push(ExactRow {
                    quantity: if beamforming { "round-japb" } else { "round-jap" }.into(),
                    q: f.q(),
                    params: format!(
                        "n={n};a={a};k={k};method={}",
                        if use_full { "full" } else { "rows" }
                    ),
                    value: exact(&v),
                    value_float: float(&v),
                    reference_kind: format!("q^-{t_k}"),
                    reference: exact(&pred),
                    reference_float: float(&pred),
                });
            }
        }
        ExactCommand::Span { k, len, q } => {
            if *k == 0 || k > len {
                return Err(usage(format!("need 1 <= k <= len, got k = {k}, len = {len}")));
            }
            for &q in q {
                let f = field(q)?;
                let basis = random_basis(f, *k, *len, seed)?;
                let s = span_fullness(&basis)?;
                let first = span_first_order(&basis)?;
                rows.push(ExactRow {
                    quantity: "span".into(),
                    q: f.q(),
                    params: format!("k={k};len={len};basis={}", join(&basis)),
                    value: exact(&s),
                    value_float: float(&s),
                    reference_kind: "first-order expansion".into(),
                    reference: exact(&first),
                    reference_float: float(&first),
                });
            }
        }
    }
    Ok(rows)
}

/// Matched slots `t_0, .., t_{k-1}` of a seeded run of the scheme.
fn round_history(a: &Composition, k: usize, f: PrimeField, seed: u64, beamforming: bool) -> Result<Vec<SlotUse>> {
    if k == 1 {
        return Ok(vec![SlotUse::plain(draw_matrix(a.n(), f, &mut split_rng(seed, 0), 0))]);
    }
    let mut stream = RandomStream::new(a.n(), f, seed, 0);
    let run = if beamforming {
        japb_run(a, &mut stream)?
    } else {
        jap_run(a, &mut stream)?
    };
    Ok(run.slots[..k].to_vec())
}

/// First `k` rows of a seeded random channel matrix, redrawn until
/// independent.
fn random_basis(f: PrimeField, k: usize, len: usize, seed: u64) -> Result<Vec<FieldVector>> {
    for attempt in 0..1000 {
        let m = draw_matrix(len, f, &mut split_rng(seed, attempt), 0);
        let basis: Vec<FieldVector> = (0..k)
            .map(|r| FieldVector::new(f, m.row(r).to_vec()))
            .collect::<std::result::Result<_, _>>()?;
        if rank(&basis)? == k {
            return Ok(basis);
        }
    }
    Err(usage(format!("no independent {k}-vector basis found over GF({})", f.q())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimizeRow {
    pub n: usize,
    pub k: usize,
    pub t: u64,
    pub representative: String,
    pub argmins: String,
    pub argmin_count: String,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub k: usize,
    pub dof: String,
    pub dof_float: f64,
    pub t: u64,
    pub argmin: String,
    pub unique: bool,
    /// Formatted like the published table: `18 [4,4]`, `2 [1,1,3]*`, `0 TDMA`.
    pub cell: String,
}

/// Best JAP-B scheme for every `n_min <= n <= n_max`, `1 <= K <= n - 1`.
pub fn table_rows(n_min: usize, n_max: usize) -> Result<Vec<TableRow>> {
    if n_min < 3 || n_min > n_max {
        return Err(usage(format!("table needs 3 <= n-min <= n-max, got {n_min}..{n_max}")));
    }
    let mut rows = Vec::new();
    for k in 1..n_max {
        for n in n_min.max(k + 1)..=n_max {
            let o = optimize_with(n, k, 1, &Budget::unlimited())?;
            let argmin = o.representative().to_string();
            let cell = if k == n - 1 {
                format!("{} TDMA", o.t)
            } else {
                format!("{} {}{}", o.t, argmin, if o.unique { "" } else { "*" })
            };
            let dof = Ratio::new(1, k as u64 + 1);
            rows.push(TableRow {
                n,
                k,
                dof: exact(&big(dof)),
                dof_float: float(&big(dof)),
                t: o.t,
                argmin,
                unique: o.unique,
                cell,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub n: usize,
    /// `ngjv`, `japb`, `child` or `tdma`.
    pub family: String,
    /// Sub-network size (`n` for parents).
    pub m: usize,
    /// Rounds of the (parent) JAP-B scheme; empty otherwise.
    pub k: Option<usize>,
    pub composition: String,
    pub dof: String,
    pub dof_float: f64,
    pub exponent: u64,
}

/// Points of the DOF/exponent trade-off on `n` users: NGJV, the best JAP-B
/// parent for each `K <= n - 2`, every child of a best JAP-B parent on
/// `3 <= m < n` users, and TDMA.
pub fn figure_rows(n: usize) -> Result<Vec<FigureRow>> {
    if n < 3 {
        return Err(usage(format!("figure needs n >= 3, got {n}")));
    }
    let point = |family: &str, m: usize, k: Option<usize>, comp: String, dof: Ratio<u64>, exponent: u64| FigureRow {
        n,
        family: family.into(),
        m,
        k,
        composition: comp,
        dof: exact(&big(dof)),
        dof_float: float(&big(dof)),
        exponent,
    };
    let mut rows = vec![point("ngjv", n, None, String::new(), Ratio::new(1, 2), (n * n) as u64)];
    for m in (3..=n).rev() {
        for k in 1..=m - 2 {
            let o = optimize_with(m, k, 1, &Budget::unlimited())?;
            let dof = Ratio::new(1, k as u64 + 1) * Ratio::new(m as u64, n as u64);
            let family = if m == n { "japb" } else { "child" };
            rows.push(point(family, m, Some(k), o.representative().to_string(), dof, o.t));
        }
    }
    rows.push(point("tdma", n, None, String::new(), Ratio::new(1, n as u64), 0));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub regime: String,
    pub param: String,
    pub n: usize,
    pub k: usize,
    pub exact_t: u64,
    /// Asymptote (Regime I) or bracket end points (Regime II).
    pub predicted_lower: String,
    pub predicted_upper: String,
    /// `T / asymptote` (Regime I) or `T / n` (Regime II).
    pub ratio: f64,
    pub child_m: Option<usize>,
    pub child_exponent: Option<u64>,
    pub child_beats_parent: Option<bool>,
}

/// Exact optimum at the regime's round count against the predicted
/// asymptote or bracket, with the matching child scheme.
pub fn regime_rows(params: RegimeParams, ns: &[usize]) -> Result<Vec<RegimeRow>> {
    let (regime, param) = match params {
        RegimeParams::I { alpha } => ("I", format!("alpha={alpha}")),
        RegimeParams::II { beta } => ("II", format!("beta={beta}")),
    };
    let mut rows = Vec::new();
    for &n in ns {
        let pred = regime_parent(params, n)?;
        let k = pred.rounds();
        if k > n {
            return Err(usage(format!("{param} needs {k} rounds, more than n = {n}")));
        }
        let t = optimize_with(n, k, 1, &Budget::unlimited())?.t;
        let (lower, upper, ratio) = match &pred {
            ParentPrediction::Asymptote { value, .. } => (value.clone(), value.clone(), float(&(int(t) / value))),
            ParentPrediction::Bracket { lower, upper, .. } => {
                (lower.clone(), upper.clone(), t as f64 / n as f64)
            }
        };
        let child = regime_child(params, n).ok();
        rows.push(RegimeRow {
            regime: regime.into(),
            param: param.clone(),
            n,
            k,
            exact_t: t,
            predicted_lower: exact(&lower),
            predicted_upper: exact(&upper),
            ratio,
            child_m: child.map(|c| c.m),
            child_exponent: child.map(|c| c.exponent),
            child_beats_parent: child.map(|c| c.exponent <= t),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub scheme: String,
    pub n: usize,
    pub q_values: String,
    pub mean_delays: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_q_minus_1: f64,
    pub intercept_q_minus_1: f64,
    pub constant: f64,
    pub predicted_exponent: u64,
}

fn fit_row(spec: &SchemeSpec, args: &crate::FitArgs, seed: u64, budget: Budget) -> Result<FitRow> {
    let sa = &args.scheme;
    let points: Vec<(u32, f64)> = if args.delay.is_empty() {
        let opts = McOptions {
            max_wait: args.max_wait,
            budget,
        };
        sa.q.iter()
            .map(|&q| {
                let s = monte_carlo(spec, sa.n, field(q)?, args.trials, seed, &opts)?;
                Ok((s.q, s.mean_delay))
            })
            .collect::<Result<_>>()?
    } else {
        if args.delay.len() != sa.q.len() {
            return Err(usage(format!(
                "{} --delay values for {} --q values",
                args.delay.len(),
                sa.q.len()
            )));
        }
        sa.q.iter()
            .zip(&args.delay)
            .map(|(&q, &d)| Ok((field(q)?.q(), d)))
            .collect::<Result<_>>()?
    };
    let fit = fit_exponent(&points)?;
    Ok(FitRow {
        scheme: spec.to_string(),
        n: sa.n,
        q_values: join(&points.iter().map(|p| p.0).collect::<Vec<_>>()),
        mean_delays: join(&points.iter().map(|p| p.1).collect::<Vec<_>>()),
        slope: fit.slope,
        intercept: fit.intercept,
        slope_q_minus_1: fit.slope_q_minus_1,
        intercept_q_minus_1: fit.intercept_q_minus_1,
        constant: fit.constant(),
        predicted_exponent: predicted_exponent(spec, sa.n),
    })
}
