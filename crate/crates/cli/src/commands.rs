//! One function per subcommand. Each renders its result in the requested
//! format and returns the exit code.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tunepriv::accountant::{compare_bounds, select_epsilon_fdp, select_epsilon_rdp_with, AccountantReport};
use tunepriv::audit::{run_audit, AuditReport, GameConfig};
use tunepriv::calibration::{sigma_for_gdp, sigma_for_rdp};
use tunepriv::discrete::{
    approx_tightness, pure_tightness, theorem4_campaign, three_symbol_pair, CampaignConfig, CampaignReport,
};
use tunepriv::rdp::{default_orders, RdpConversion};
use tunepriv::runcount::RunCountSpec;
use tunepriv::{DpSgdConfig, RunCountDist, TradeoffCurve};

use crate::error::{CliError, EXIT_INFINITE, EXIT_OK, EXIT_PROPERTY};
use crate::format::{csv, emit, g6, sig, table, to_json, Format};
use crate::spec::{parse_base, parse_xi};
use crate::{AccountantArgs, AuditArgs, CompareArgs, Method, Theorem4Args, TightnessArgs, Which};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), g6)
}

pub fn accountant(args: &AccountantArgs, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    let base = parse_base(&args.base)?;
    let dist = parse_xi(&args.xi)?;
    let report: AccountantReport<f64> = match args.method {
        Method::Fdp => select_epsilon_fdp(&base.curve()?, &dist, args.delta_h)?,
        Method::Rdp => {
            let cfg = base
                .dpsgd()
                .ok_or_else(|| CliError::usage("--method rdp needs a dpsgd:... base"))?;
            select_epsilon_rdp_with(&cfg, &dist, args.delta_h, args.conversion.into(), &default_orders())?
        }
    };
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv(
            &["eps_h", "delta_h", "eps_base", "log_ratio"],
            &[vec![
                g6(report.eps_h),
                g6(report.delta_h),
                g6(report.eps_base),
                g6(report.log_ratio),
            ]],
        ),
        Format::Text => {
            let mut s = format!(
                "eps_h      {}\ndelta_h    {}\neps_base   {}\nlog_ratio  {}\n",
                sig(report.eps_h, 8),
                sig(report.delta_h, 8),
                sig(report.eps_base, 8),
                sig(report.log_ratio, 8)
            );
            if let Some(a) = report.argmax_a {
                s.push_str(&format!("argmax_a   {}\n", sig(a, 8)));
            }
            if let Some((a, ap)) = report.orders {
                s.push_str(&format!("orders     {a} {ap}\n"));
            }
            s
        }
    };
    emit(&text, out)?;
    Ok(if report.is_finite() { EXIT_OK } else { EXIT_INFINITE })
}

/// One cell of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub eps_b: f64,
    pub tau: f64,
    pub run_count: String,
    pub eta: Option<f64>,
    pub nu: Option<f64>,
    pub mean_runs: f64,
    pub sigma: Option<f64>,
    pub eps_ours: Option<f64>,
    pub eps_prior: Option<f64>,
    pub eps_lower: Option<f64>,
    pub reason: Option<String>,
}

const COMPARE_HEADER: [&str; 8] = ["eps_b", "tau", "eta", "nu", "E_xi", "eps_ours", "eps_prior", "reason"];
const COMPARE_HEADER_AUDIT: [&str; 9] = [
    "eps_b",
    "tau",
    "eta",
    "nu",
    "E_xi",
    "eps_ours",
    "eps_prior",
    "eps_lower",
    "reason",
];

fn compare_cell(args: &CompareArgs, eps_b: f64, tau: f64, xi: &RunCountDist) -> CompareRow {
    let (eta, nu) = match xi.spec() {
        RunCountSpec::Tnb { eta, nu } => (Some(eta), Some(nu)),
        RunCountSpec::PointMass { .. } => (None, None),
    };
    let mut row = CompareRow {
        eps_b,
        tau,
        run_count: xi.spec().to_string(),
        eta,
        nu,
        mean_runs: xi.mean(),
        sigma: None,
        eps_ours: None,
        eps_prior: None,
        eps_lower: None,
        reason: None,
    };
    let mut reasons = Vec::new();
    match sigma_for_rdp(eps_b, args.delta_b, tau, args.n, RdpConversion::Improved)
        .and_then(|cfg| compare_bounds(&cfg, xi, args.delta_h).map(|b| (cfg, b)))
    {
        Ok((cfg, bounds)) => {
            row.sigma = Some(cfg.sigma);
            row.eps_ours = Some(bounds.eps_ours);
            row.eps_prior = bounds.eps_prior;
            if bounds.eps_prior.is_none() {
                reasons.push("prior bound covers only tnb run counts".to_string());
            }
        }
        Err(e) => reasons.push(e.to_string()),
    }
    if let Some(trials) = args.audit_trials {
        let audit = sigma_for_gdp(eps_b, args.delta_b, tau, args.n)
            .and_then(|cfg| GameConfig::new(cfg, xi.clone(), trials, args.seed))
            .and_then(|mut g| {
                g.delta = args.delta_h;
                run_audit(&g)
            });
        match audit {
            Ok(r) => row.eps_lower = Some(r.eps_lower),
            Err(e) => reasons.push(format!("audit: {e}")),
        }
    }
    if !reasons.is_empty() {
        // the reason column must not break the CSV
        row.reason = Some(reasons.join("; ").replace(',', ";"));
    }
    row
}

pub fn compare(args: &CompareArgs, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    let dists = args.xi.iter().map(|s| parse_xi(s)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &eps_b in &args.eps_b {
        for &tau in &args.tau {
            for xi in &dists {
                rows.push(compare_cell(args, eps_b, tau, xi));
            }
        }
    }
    let audit = args.audit_trials.is_some();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                g6(r.eps_b),
                g6(r.tau),
                opt(r.eta),
                opt(r.nu),
                g6(r.mean_runs),
                opt(r.eps_ours),
                opt(r.eps_prior),
            ];
            if audit {
                v.push(opt(r.eps_lower));
            }
            v.push(r.reason.clone().unwrap_or_default());
            v
        })
        .collect();
    let header: &[&str] = if audit { &COMPARE_HEADER_AUDIT } else { &COMPARE_HEADER };
    let text = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => csv(header, &cells),
        Format::Text => table(header, &cells),
    };
    emit(&text, out)?;
    Ok(EXIT_OK)
}

fn audit_config(args: &AuditArgs) -> Result<DpSgdConfig, CliError> {
    match (&args.base, args.eps_b) {
        (Some(b), None) => parse_base(b)?
            .dpsgd()
            .ok_or_else(|| CliError::usage("--base for audit must be dpsgd:sigma=..,tau=..,n=..")),
        (None, Some(e)) => Ok(sigma_for_gdp(e, args.delta, args.tau, args.n)?),
        _ => Err(CliError::usage("audit needs exactly one of --base or --eps-b")),
    }
}

pub fn audit(args: &AuditArgs, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    let config = audit_config(args)?;
    let dist = parse_xi(&args.xi)?;
    let mut game = GameConfig::new(config, dist.clone(), args.trials, args.seed)?;
    game.delta = args.delta;
    game.confidence = args.confidence;
    game.thresholds = args.thresholds;
    game.validate()?;
    let upper = select_epsilon_fdp(&TradeoffCurve::gaussian(config.gdp_mu()?)?, &dist, args.delta)?.eps_h;
    let report: AuditReport = run_audit(&game)?;

    let sweep_header = ["threshold", "fp", "fn", "fp_upper", "fn_upper", "eps_lower"];
    let sweep_rows: Vec<Vec<String>> = report
        .sweep
        .iter()
        .map(|r| {
            vec![
                g6(r.threshold),
                g6(r.fp),
                g6(r.fnr),
                g6(r.fp_upper),
                g6(r.fn_upper),
                g6(r.eps_lower),
            ]
        })
        .collect();
    if let Some(path) = &args.sweep {
        emit(&csv(&sweep_header, &sweep_rows), Some(path))?;
    }
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv(&sweep_header, &sweep_rows),
        Format::Text => format!(
            "sigma       {}\ntau         {}\nn           {}\ntrials      {}\nseed        {}\nthreshold   {}\nfp_upper    {}\nfn_upper    {}\neps_lower   {}\neps_upper   {}\n",
            sig(config.sigma, 8),
            config.tau,
            config.n_iters,
            report.trials,
            report.seed,
            g6(report.best_threshold),
            g6(report.fp_upper),
            g6(report.fn_upper),
            sig(report.eps_lower, 8),
            sig(upper, 8),
        ),
    };
    emit(&text, out)?;
    Ok(if report.eps_lower > upper {
        EXIT_PROPERTY
    } else {
        EXIT_OK
    })
}

pub fn tightness(args: &TightnessArgs, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    let pair = three_symbol_pair(args.b, args.d, args.eps)?;
    let dist = parse_xi(&args.xi)?;
    let text = match args.which {
        Which::Pure => {
            let t = pure_tightness(&pair, &dist, args.eps);
            match format {
                Format::Json => to_json(&t)?,
                Format::Csv | Format::Text => {
                    let rows: Vec<Vec<String>> = (0..t.alphabet.len())
                        .map(|i| {
                            vec![
                                t.alphabet[i].clone(),
                                g6(t.base_p[i]),
                                g6(t.base_p_prime[i]),
                                g6(t.tuned_q[i]),
                                g6(t.tuned_q_prime[i]),
                            ]
                        })
                        .collect();
                    let header = ["symbol", "p", "p_prime", "q", "q_prime"];
                    if format == Format::Csv {
                        csv(&header, &rows)
                    } else {
                        format!(
                            "{}\neps_base       {}\neps_tuned      {} (at {})\ngeneric_bound  {}\ngap            {}\n",
                            table(&header, &rows),
                            g6(t.eps_base),
                            g6(t.eps_tuned),
                            t.argmax_symbol,
                            g6(t.generic_bound),
                            g6(t.gap)
                        )
                    }
                }
            }
        }
        Which::Approx => {
            let t = approx_tightness(&pair, &dist, args.eps, args.delta)?;
            match format {
                Format::Json => to_json(&t)?,
                Format::Csv => csv(
                    &["delta", "eps_base", "eps_tuned", "eps_predicted", "alpha", "alpha_prime"],
                    &[vec![g6(t.delta), g6(t.eps_base), g6(t.eps_tuned), g6(t.eps_predicted), g6(t.alpha), g6(t.alpha_prime)]],
                ),
                Format::Text => format!(
                    "delta          {}\neps_base       {}\neps_tuned      {}\neps_predicted  {} (alpha {}, alpha' {})\n",
                    g6(t.delta),
                    g6(t.eps_base),
                    g6(t.eps_tuned),
                    g6(t.eps_predicted),
                    t.alpha,
                    t.alpha_prime
                ),
            }
        }
    };
    emit(&text, out)?;
    Ok(EXIT_OK)
}

pub fn theorem4(args: &Theorem4Args, format: Format, out: Option<&Path>) -> Result<i32, CliError> {
    let report: CampaignReport = theorem4_campaign(CampaignConfig {
        instances: args.instances,
        seed: args.seed,
    })?;
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut rows = vec![vec![
                "summary".into(),
                report.instances.to_string(),
                report.passed.to_string(),
                report.exact.to_string(),
            ]];
            rows.extend(report.failures.iter().map(|f| {
                vec![
                    format!("failure {}", f.index),
                    f.run_count.replace(',', ";"),
                    g6(f.outcome.grouped),
                    g6(f.outcome.refined),
                ]
            }));
            csv(&["row", "instances", "passed", "exact"], &rows)
        }
        Format::Text => {
            let mut s = format!(
                "instances  {}\npassed     {}\nexact      {}\n",
                report.instances, report.passed, report.exact
            );
            for f in &report.failures {
                s.push_str(&format!(
                    "FAIL #{}: {} alpha={} grouped={} refined={}\n",
                    f.index,
                    f.run_count,
                    f.alpha,
                    g6(f.outcome.grouped),
                    g6(f.outcome.refined)
                ));
            }
            s
        }
    };
    emit(&text, out)?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_PROPERTY })
}
