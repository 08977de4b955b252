//! Command-line surface: argument parsing, file IO and report emission.
//!
//! JSON is the canonical output; CSV is a flat projection for plotting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds_bp::bp_bounds;
use crate::bounds_msm::msm_arm_bounds;
use crate::error::{Error, Result};
use crate::estimation::{
    split_pipeline, term_estimates, Dataset, EstimationConfig, PipelineOutput, PolicySpec,
};
use crate::induced::{classify, induce_all, InducedBounds};
use crate::inference_ci::{im_jd_ci, theta_tilde, ImJdCi, ThetaEstimates};
use crate::interval::Interval;
use crate::law::{validate, ObservationalLaw, PTable, StratifiedIVLaw};
use crate::oracle::{ground_truth, observed_law, sample, sharp_bounds_lp, MsmDgp, ResponseTypeLaw, Target};
use crate::regime::Regime;
use crate::regimes::{regime_from_criterion, regime_value_bounds, Criterion, Scope};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "REGIME_BOUNDS_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "regime-bounds", version, about = "Bounds, superoptimal regimes and one-step estimators under unmeasured confounding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-stratum bounds, identification statuses and criterion decisions.
    Bounds(Flags),
    /// Sample a dataset with a ground-truth sidecar.
    Simulate(Flags),
    /// Learn a regime and estimate bounds on its value.
    Value(Flags),
    /// Imbens-Manski confidence intervals for estimated bounds.
    Ci(Flags),
    /// Compare closed-form bounds with the linear-programming oracle.
    OracleCheck(Flags),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeArg {
    L,
    #[default]
    Superoptimal,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Law file (stratified observed law or response-type law).
    #[arg(long)]
    pub law: Option<PathBuf>,
    /// Dataset CSV with header y,a,z,x1..xk.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Decision criterion, or `observed`.
    #[arg(long)]
    pub criterion: Option<String>,
    /// Regime JSON file {stratum: {a0, a1}}.
    #[arg(long)]
    pub regime: Option<PathBuf>,
    /// Sensitivity parameter Γ ≥ 1 (`inf` allowed).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub boot: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Estimation config JSON (epsilon, boot, folds, split, seed, alpha).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample size for `simulate`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Sign tolerance τ for identification statuses.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ScopeArg::Superoptimal)]
    pub scope: ScopeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Resolved settings for one command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub law: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub regime: Option<PathBuf>,
    pub seed: Option<u64>,
    pub alpha: f64,
    pub boot: usize,
    pub folds: usize,
    pub epsilon: f64,
    pub gamma: Option<f64>,
    pub criterion: Option<String>,
    pub scope: ScopeArg,
    pub tau: f64,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub estimation: EstimationConfig,
}

impl RunConfig {
    pub fn resolve(command: &str, f: &Flags) -> Result<RunConfig> {
        let mut est = match &f.config {
            Some(p) => EstimationConfig::from_json_str(&read(p)?)?,
            None => EstimationConfig::default(),
        };
        if let Some(v) = f.alpha {
            est.alpha = v;
        }
        if let Some(v) = f.boot {
            est.boot = v;
        }
        if let Some(v) = f.folds {
            est.folds = v;
        }
        if let Some(v) = f.seed {
            est.seed = v;
        }
        if let Some(v) = f.epsilon {
            est.epsilon = v;
        }
        est.validate()?;
        if let Some(g) = f.gamma {
            if !(g >= 1.0) {
                return Err(Error::InfeasibleGamma(format!("Γ = {g} must be ≥ 1")));
            }
        }
        if !(f.tau >= 0.0) {
            return Err(Error::InvalidInput(format!("tau {} must be ≥ 0", f.tau)));
        }
        let seed = f.seed.or(f.config.as_ref().map(|_| est.seed));
        Ok(RunConfig {
            command: command.into(),
            law: f.law.clone(),
            data: f.data.clone(),
            regime: f.regime.clone(),
            seed,
            alpha: est.alpha,
            boot: est.boot,
            folds: est.folds,
            epsilon: est.epsilon,
            gamma: f.gamma,
            criterion: f.criterion.clone(),
            scope: f.scope,
            tau: f.tau,
            n: f.n,
            out: f.out.clone(),
            format: f.format,
            estimation: est,
        })
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::InvalidInput(format!("{} needs --seed (or a config file with a seed)", self.command)))
    }

    fn scope(&self) -> Scope {
        match self.scope {
            ScopeArg::L => Scope::L,
            ScopeArg::Superoptimal => Scope::Superoptimal,
        }
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))
}

/// A law file in either accepted format.
#[derive(Clone, Debug, PartialEq)]
pub enum LawInput {
    ResponseType(ResponseTypeLaw),
    Observed(StratifiedIVLaw),
}

impl LawInput {
    pub fn from_json_str(s: &str) -> Result<LawInput> {
        let v: Value = serde_json::from_str(s)?;
        let rt = v.get("pz").is_some() || v.pointer("/strata/0/pi").is_some();
        if rt {
            Ok(LawInput::ResponseType(ResponseTypeLaw::from_json_str(s)?))
        } else {
            let law = StratifiedIVLaw::from_json_str(s)?;
            validate(&law)?;
            Ok(LawInput::Observed(law))
        }
    }

    pub fn load(p: &Path) -> Result<LawInput> {
        LawInput::from_json_str(&read(p)?)
    }

    pub fn observed(&self) -> StratifiedIVLaw {
        match self {
            LawInput::ResponseType(rt) => observed_law(rt),
            LawInput::Observed(l) => l.clone(),
        }
    }
}

fn iv(i: Interval) -> Value {
    json!([i.lo, i.up])
}

/// Output written by a command: canonical JSON and a CSV projection.
pub struct Report {
    pub json: Value,
    pub csv: String,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json") + "\n",
            Format::Csv => self.csv.clone(),
        }
    }
}

fn csv_row(out: &mut String, fields: &[String]) {
    let _ = writeln!(out, "{}", fields.join(","));
}

/// Exact-law bounds report.
pub fn bounds_report(law: &StratifiedIVLaw, gamma: Option<f64>, tau: f64, scope: Scope) -> Result<Report> {
    let obs: ObservationalLaw = validate(law)?;
    let arms: Vec<[Interval; 2]> = match gamma {
        None => law.strata.iter().map(|s| bp_bounds(&s.p)).collect(),
        Some(g) => obs.strata.iter().map(|o| msm_arm_bounds(o, g)).collect::<Result<_>>()?,
    };
    let ib = induce_all(&obs, &arms)?;
    bounds_report_from(&obs, &ib, gamma, tau, scope)
}

pub fn bounds_report_from(obs: &ObservationalLaw, ib: &InducedBounds, gamma: Option<f64>, tau: f64, scope: Scope) -> Result<Report> {
    let arms: Vec<[Interval; 2]> = ib.strata.iter().map(|s| s.arms).collect();
    let mut regimes = Vec::new();
    for c in Criterion::ALL {
        let g = regime_from_criterion(c, scope, ib)?;
        let v = regime_value_bounds(&g, obs, &arms)?;
        regimes.push((c.name(), g, v));
    }
    let mut strata = Vec::new();
    let mut csv = String::from("stratum,quantity,lo,up,status\n");
    let mut ey = [Interval::point(0.0); 2];
    let mut cate_a = [Interval::point(0.0); 2];
    let pa_marg = [0, 1].map(|a| obs.strata.iter().map(|s| s.weight * s.pa[a]).sum::<f64>());
    for st in &ib.strata {
        let cls = classify(st, tau)?;
        let w = st.obs.weight;
        for a in 0..2 {
            ey[a].lo += w * st.arms[a].lo;
            ey[a].up += w * st.arms[a].up;
            let wa = w * st.obs.pa[a] / pa_marg[a];
            cate_a[a].lo += wa * st.cate[a].lo;
            cate_a[a].up += wa * st.cate[a].up;
        }
        let decisions: serde_json::Map<String, Value> =
            regimes.iter().map(|(name, g, _)| (name.clone(), g.to_json()[st.label()].clone())).collect();
        strata.push(json!({
            "label": st.label(),
            "weight": w,
            "p_treated": st.obs.pa[1],
            "mu_a": st.obs.mu_a,
            "mu": st.obs.mu,
            "ey0": iv(st.arms[0]),
            "ey1": iv(st.arms[1]),
            "cate_l": iv(st.cate_l),
            "cate_given_a": [iv(st.cate[0]), iv(st.cate[1])],
            "ey_crossarm": [iv(st.value_crossarm[0]), iv(st.value_crossarm[1])],
            "phi": st.phi,
            "rho": st.rho,
            "omega": st.omega(),
            "clipped": st.clipped,
            "status_l": cls.l_status.kind,
            "status_given_a": [cls.a_status[0].kind, cls.a_status[1].kind],
            "decisions": decisions,
        }));
        let lab = st.label();
        let row = |q: &str, i: Interval, status: String| vec![lab.to_string(), q.to_string(), i.lo.to_string(), i.up.to_string(), status];
        let mut rows = vec![
            row("ey0", st.arms[0], String::new()),
            row("ey1", st.arms[1], String::new()),
            row("cate_l", st.cate_l, format!("{:?}", cls.l_status.kind)),
        ];
        for ap in 0..2 {
            rows.push(row(&format!("cate_a{ap}"), st.cate[ap], format!("{:?}", cls.a_status[ap].kind)));
            rows.push(row(&format!("ey{}_given_a{ap}", 1 - ap), st.value_crossarm[ap], String::new()));
        }
        for r in rows {
            csv_row(&mut csv, &r);
        }
    }
    let ate = ey[1].minus(&ey[0]);
    let ate_status = ate.status(tau).kind;
    let cate_status = cate_a.map(|c| c.status(tau).kind);
    for (q, i, st) in [
        ("ate", ate, format!("{ate_status:?}")),
        ("cate_a0", cate_a[0], format!("{:?}", cate_status[0])),
        ("cate_a1", cate_a[1], format!("{:?}", cate_status[1])),
    ] {
        csv_row(&mut csv, &["marginal".into(), q.into(), i.lo.to_string(), i.up.to_string(), st]);
    }
    let mut values = serde_json::Map::new();
    for (name, _, v) in &regimes {
        values.insert(name.clone(), iv(*v));
        csv_row(&mut csv, &["marginal".into(), format!("value_{name}"), v.lo.to_string(), v.up.to_string(), String::new()]);
    }
    let json = json!({
        "model": if gamma.is_some() { "msm" } else { "iv" },
        "gamma": gamma.map(|g| if g.is_infinite() { json!("inf") } else { json!(g) }),
        "tau": tau,
        "strata": strata,
        "ey0": iv(ey[0]),
        "ey1": iv(ey[1]),
        "ate": iv(ate),
        "ate_status": ate_status,
        "cate_given_a": [iv(cate_a[0]), iv(cate_a[1])],
        "cate_given_a_status": cate_status,
        "regime_values": values,
    });
    Ok(Report { json, csv })
}

fn pick_policy(cfg: &RunConfig) -> Result<PolicySpec> {
    match (&cfg.regime, cfg.criterion.as_deref()) {
        (Some(_), Some(_)) => Err(Error::InvalidInput("give either --regime or --criterion, not both".into())),
        (Some(p), None) => Ok(PolicySpec::Fixed(Regime::from_json_str(&read(p)?)?)),
        (None, Some("observed")) => Ok(PolicySpec::Observed),
        (None, Some(c)) => Ok(PolicySpec::Criterion { criterion: Criterion::parse(c)?, scope: cfg.scope() }),
        (None, None) => Err(Error::InvalidInput("value needs --criterion or --regime".into())),
    }
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let p = cfg.data.as_ref().ok_or_else(|| Error::InvalidInput(format!("{} needs --data", cfg.command)))?;
    Dataset::read_csv(p)
}

pub fn value_report(data: &Dataset, spec: &PolicySpec, est: &EstimationConfig) -> Result<Report> {
    let out: PipelineOutput = split_pipeline(data, spec, est)?;
    let mut csv = String::from("criterion,side,point,se,ci_lo,ci_up\n");
    for (side, e) in [("lower", out.lower), ("upper", out.upper)] {
        csv_row(&mut csv, &[out.policy.clone(), side.into(), e.point.to_string(), e.se.to_string(), e.ci_lo.to_string(), e.ci_up.to_string()]);
    }
    Ok(Report { json: serde_json::to_value(&out).expect("json"), csv })
}

/// Dataset bounds report: cross-fitted one-step estimates of every candidate
/// term, selected bounds with Wald intervals and Imbens-Manski intervals.
pub fn ci_report(data: &Dataset, est: &EstimationConfig) -> Result<Report> {
    let te = term_estimates(data, est)?;
    let mut out = serde_json::Map::new();
    let mut csv = String::from("target,theta_lo,theta_up,ci_lo,ci_up,c,margin_gap_lo,margin_gap_up\n");
    let mut cis: Vec<(String, ThetaEstimates, ImJdCi)> = Vec::new();
    for a in 0..2 {
        let th = ThetaEstimates {
            theta_l: te.est[a][0].to_vec(),
            se_l: te.se[a][0].to_vec(),
            theta_u: te.est[a][1].to_vec(),
            se_u: te.se[a][1].to_vec(),
            alpha: est.alpha,
        };
        let ci = im_jd_ci(&th)?;
        cis.push((format!("ey{a}"), th, ci));
    }
    // ATE: every (lower term of arm 1, upper term of arm 0) pair, and vice versa
    let pair = |a_hi: usize, s_hi: usize, a_lo: usize, s_lo: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut e = Vec::with_capacity(16);
        let mut se = Vec::with_capacity(16);
        for j in 0..4 {
            for k in 0..4 {
                let v: Vec<f64> = te.rows.iter().map(|r| r[a_hi][s_hi][j] - r[a_lo][s_lo][k]).collect();
                let b = crate::estimation::bootstrap_mean_ci(&v, est.boot, est.alpha, est.seed)?;
                e.push(b.point);
                se.push(b.se);
            }
        }
        Ok((e, se))
    };
    let (ate_l, ate_l_se) = pair(1, 0, 0, 1)?;
    let (ate_u, ate_u_se) = pair(1, 1, 0, 0)?;
    let th = ThetaEstimates { theta_l: ate_l, se_l: ate_l_se, theta_u: ate_u, se_u: ate_u_se, alpha: est.alpha };
    let ci = im_jd_ci(&th)?;
    cis.push(("ate".into(), th, ci));
    if data.k == 0 {
        // cross-arm values E(Y^a | A=1−a) for data without covariates
        let n = data.len() as f64;
        for a in 0..2usize {
            let rows: Vec<usize> = (0..data.len()).filter(|&i| data.a[i] as usize == a).collect();
            if rows.len() < 2 || rows.len() == data.len() {
                continue;
            }
            let na = rows.len() as f64;
            let mu = rows.iter().map(|&i| data.y[i] as f64).sum::<f64>() / na;
            let se_mu = (mu * (1.0 - mu) / na).sqrt();
            let pi_a = na / n;
            let base = cis[a].1.clone();
            let t = theta_tilde(&base, mu, se_mu, pi_a, 1.0 - pi_a)?;
            let ci = im_jd_ci(&t)?;
            cis.push((format!("ey{a}_given_a{}", 1 - a), t, ci));
        }
    }
    for (name, th, ci) in &cis {
        let lo = th.theta_l[ci.d_l];
        let up = th.theta_u[ci.d_u];
        out.insert(
            name.clone(),
            json!({
                "theta_l": th.theta_l, "se_l": th.se_l, "theta_u": th.theta_u, "se_u": th.se_u,
                "bounds": [lo, up],
                "ci": [ci.ci_lo, ci.ci_up], "c": ci.c, "d_l": ci.d_l, "d_u": ci.d_u,
                "margin_gap": [ci.margin_gap_l, ci.margin_gap_u],
            }),
        );
        csv_row(
            &mut csv,
            &[name.clone(), lo.to_string(), up.to_string(), ci.ci_lo.to_string(), ci.ci_up.to_string(), ci.c.to_string(), ci.margin_gap_l.to_string(), ci.margin_gap_u.to_string()],
        );
    }
    out.insert("alpha".into(), json!(est.alpha));
    out.insert("n".into(), json!(data.len()));
    Ok(Report { json: Value::Object(out), csv })
}

/// Largest tolerated gap between closed-form and LP bounds.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub label: String,
    pub target: String,
    pub closed_form: [f64; 2],
    pub lp: [f64; 2],
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Audit {
    pub entries: Vec<AuditEntry>,
    pub max_diff: f64,
    pub pass: bool,
}

/// Compare arm, l-CATE and (l, a′)-CATE bounds from `bounds` with the LP oracle.
pub fn audit_with(law: &StratifiedIVLaw, bounds: impl Fn(&PTable) -> [Interval; 2]) -> Result<Audit> {
    let obs = validate(law)?;
    let mut entries = Vec::new();
    for (s, st) in law.strata.iter().enumerate() {
        let arms = bounds(&st.p);
        let ib = crate::induced::induce(&obs.strata[s], arms)?;
        let checks = [
            ("ey0", Target::EY0, arms[0]),
            ("ey1", Target::EY1, arms[1]),
            ("cate_l", Target::Cate, ib.cate_l),
            ("cate_a0", Target::CateGivenA(0), ib.cate[0]),
            ("cate_a1", Target::CateGivenA(1), ib.cate[1]),
        ];
        for (name, t, cf) in checks {
            let lp = sharp_bounds_lp(law, t, s)?;
            entries.push(AuditEntry {
                label: st.label.clone(),
                target: name.into(),
                closed_form: [cf.lo, cf.up],
                lp: [lp.lo, lp.up],
                diff: cf.max_abs_diff(&lp),
            });
        }
    }
    let max_diff = entries.iter().map(|e| e.diff).fold(0.0, f64::max);
    Ok(Audit { pass: max_diff <= AUDIT_TOL, entries, max_diff })
}

pub fn audit(law: &StratifiedIVLaw) -> Result<Audit> {
    audit_with(law, bp_bounds)
}

fn default_out(name: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(name)
}

/// Truth sidecar path for a simulated dataset.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

/// Ground truth and oracle bounds of a response-type law.
pub fn rt_truth(rt: &ResponseTypeLaw) -> Result<Value> {
    let gt = ground_truth(rt, None)?;
    let law = observed_law(rt);
    let rep = bounds_report(&law, None, 0.0, Scope::Superoptimal)?;
    Ok(json!({ "model": "response_type", "law": rt, "truth": gt, "bounds": rep.json }))
}

/// Sidecar for the sensitivity-model design: truth on a grid of `l`.
pub fn msm_truth(dgp: &MsmDgp) -> Value {
    let grid: Vec<_> = (0..=40).map(|i| dgp.truth(-2.0 + 0.1 * i as f64)).collect();
    json!({ "model": "msm", "dgp": dgp, "truth_grid": grid })
}

/// Run one parsed command, returning the text for stdout (empty when written to a file).
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Bounds(f) => {
            let cfg = RunConfig::resolve("bounds", f)?;
            let report = match (&cfg.law, &cfg.data) {
                (Some(p), None) => bounds_report(&LawInput::load(p)?.observed(), cfg.gamma, cfg.tau, cfg.scope())?,
                (None, Some(_)) => ci_report(&load_data(&cfg)?, &cfg.estimation)?,
                _ => return Err(Error::InvalidInput("bounds needs exactly one of --law or --data".into())),
            };
            emit(&cfg, &report)
        }
        Command::Simulate(f) => {
            let cfg = RunConfig::resolve("simulate", f)?;
            let seed = cfg.require_seed()?;
            let n = cfg.n.ok_or_else(|| Error::InvalidInput("simulate needs --n".into()))?;
            let (data, truth) = match (&cfg.law, cfg.gamma) {
                (Some(p), None) => match LawInput::load(p)? {
                    LawInput::ResponseType(rt) => (sample(&rt, n, seed)?, rt_truth(&rt)?),
                    LawInput::Observed(_) => {
                        return Err(Error::InvalidInput("simulate needs a response-type law (with pi tables)".into()))
                    }
                },
                (None, Some(g)) => {
                    let dgp = MsmDgp::new(g)?;
                    (dgp.sample(n, seed)?.data, msm_truth(&dgp))
                }
                _ => return Err(Error::InvalidInput("simulate needs exactly one of --law or --gamma".into())),
            };
            let out = cfg.out.clone().unwrap_or_else(|| default_out("simulated.csv"));
            data.write_csv(&out)?;
            let side = sidecar_path(&out);
            std::fs::write(&side, serde_json::to_string_pretty(&truth).expect("json") + "\n")?;
            Ok(String::new())
        }
        Command::Value(f) => {
            let cfg = RunConfig::resolve("value", f)?;
            cfg.require_seed()?;
            let spec = pick_policy(&cfg)?;
            let report = value_report(&load_data(&cfg)?, &spec, &cfg.estimation)?;
            emit(&cfg, &report)
        }
        Command::Ci(f) => {
            let cfg = RunConfig::resolve("ci", f)?;
            cfg.require_seed()?;
            let report = ci_report(&load_data(&cfg)?, &cfg.estimation)?;
            emit(&cfg, &report)
        }
        Command::OracleCheck(f) => {
            let cfg = RunConfig::resolve("oracle-check", f)?;
            let p = cfg.law.as_ref().ok_or_else(|| Error::InvalidInput("oracle-check needs --law".into()))?;
            let law = LawInput::load(p)?.observed();
            let a = audit(&law)?;
            let mut csv = String::from("stratum,target,cf_lo,cf_up,lp_lo,lp_up,diff\n");
            for e in &a.entries {
                csv_row(
                    &mut csv,
                    &[e.label.clone(), e.target.clone(), e.closed_form[0].to_string(), e.closed_form[1].to_string(), e.lp[0].to_string(), e.lp[1].to_string(), e.diff.to_string()],
                );
            }
            let text = emit(&cfg, &Report { json: serde_json::to_value(&a).expect("json"), csv })?;
            if a.pass {
                Ok(text)
            } else {
                print!("{text}");
                Err(Error::Internal(format!("closed-form bounds differ from the LP oracle by {:.3e}", a.max_diff)))
            }
        }
    }
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<String> {
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn liability(lam: f64) -> StratifiedIVLaw {
        let p = [[[0.32, 0.02], [0.32, 0.17]], [[0.04, 0.67], [0.32, 0.14]]];
        StratifiedIVLaw::single(lam, p)
    }

    #[test]
    fn law_format_detection() {
        let rt = r#"{"strata":[{"label":"a","pi":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}],"pz":0.5}"#;
        assert!(matches!(LawInput::from_json_str(rt).unwrap(), LawInput::ResponseType(_)));
        let obs = liability(0.25).to_json_string();
        assert!(matches!(LawInput::from_json_str(&obs).unwrap(), LawInput::Observed(_)));
        assert!(matches!(LawInput::from_json_str("{\"strata\": 3}"), Err(Error::Schema { .. })));
    }

    #[test]
    fn bounds_report_is_deterministic() {
        let a = bounds_report(&liability(0.1), None, 0.0, Scope::Superoptimal).unwrap();
        let b = bounds_report(&liability(0.1), None, 0.0, Scope::Superoptimal).unwrap();
        assert_eq!(a.render(Format::Json), b.render(Format::Json));
        assert!(a.render(Format::Csv).starts_with("stratum,quantity,lo,up,status\n"));
    }

    #[test]
    fn corrupted_formula_fails_audit() {
        let law = liability(0.25);
        assert!(audit(&law).unwrap().pass);
        let bad = audit_with(&law, |p| {
            let mut b = bp_bounds(p);
            b[1].up = (b[1].up - 0.01).max(b[1].lo);
            b
        })
        .unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn unknown_criterion_is_input_error() {
        let f = Flags { criterion: Some("bogus".into()), seed: Some(1), ..Default::default() };
        let cfg = RunConfig::resolve("value", &f).unwrap();
        let e = pick_policy(&cfg).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
