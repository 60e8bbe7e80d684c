//! Run configuration, scenario presets and CSV emission behind the command
//! line tool.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::criteria::{
    advantage_scan, audit_case, biconditional_audit, commutation_audit, commutation_pairs,
    run_case, CaseConfig, CaseId, OutcomeMode, ProbeSpec, Scan, ScanGrid, Scenario,
};
use crate::error::{Error, Result};
use crate::estimation::{
    evaluate, optimize_probe, ErrorValue, Objective, OptimizerBudget, WeightMatrix,
};
use crate::fisher::qfim;
use crate::linalg::QubitState;
use crate::povm::{family_nonselective, family_selective, MeasurementFamily, Outcome};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Instance counts when `instances` is not configured.
pub const DEFAULT_CASE_INSTANCES: usize = 100;
pub const DEFAULT_CASE_II_INSTANCES: usize = 50;
pub const DEFAULT_AUDIT_INSTANCES: usize = 500;
pub const DEFAULT_COMMUTATION_PAIRS: usize = 50;
pub const DEFAULT_SEED: u64 = 20240601;

/// Reference point used by `qfi` and the commutation check when no value is given.
pub const REFERENCE_ALPHA: f64 = 0.4;
pub const REFERENCE_BETA: f64 = 0.1;

/// Shortest round-trip form, exponent notation outside `[1e-4, 1e15)`;
/// `inf`/`nan` spelled out.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else if v.is_finite() {
        format!("{v:e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_full(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        fmt_num(v)
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(out)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
}

/// Which state a `qfi` query evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    Or,
    Of,
    Branch(Outcome),
    Forgotten,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Or => "or",
            QueryMode::Of => "of",
            QueryMode::Branch(Outcome::First) => "branch1",
            QueryMode::Branch(Outcome::Second) => "branch2",
            QueryMode::Forgotten => "forgotten",
        }
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "or" => Ok(QueryMode::Or),
            "of" => Ok(QueryMode::Of),
            "branch1" => Ok(QueryMode::Branch(Outcome::First)),
            "branch2" => Ok(QueryMode::Branch(Outcome::Second)),
            "forgotten" => Ok(QueryMode::Forgotten),
            _ => Err(Error::Config(format!(
                "mode: '{s}' not one of or, of, branch1, branch2, forgotten"
            ))),
        }
    }
}

/// Parameter family for `qfi` and `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Scenario(Scenario),
    Case(CaseId),
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Scenario(s) => write!(f, "{s}"),
            FamilySpec::Case(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<Scenario>()
            .map(FamilySpec::Scenario)
            .or_else(|_| s.parse::<CaseId>().map(FamilySpec::Case))
            .map_err(|_| {
                Error::Config(format!(
                    "family: '{s}' not one of alpha-est, beta-est, theta-beta-est, I, II, III, IV"
                ))
            })
    }
}

/// Settings shared by all subcommands. Unset fields fall back to per-command
/// defaults; the textual form lists only the fields that are set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    /// Points on the swept axis.
    pub grid: Option<usize>,
    pub margin: Option<f64>,
    pub relative_margin: Option<f64>,
    pub budget: Option<OptimizerBudget>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub family: Option<FamilySpec>,
    /// `r,φ₁,φ₂`
    pub probe: Option<[f64; 3]>,
    pub mode: Option<QueryMode>,
    pub optimize: Option<bool>,
}

pub const CONFIG_KEYS: [&str; 14] = [
    "alpha",
    "beta",
    "theta",
    "grid",
    "margin",
    "relative_margin",
    "budget",
    "out",
    "seed",
    "instances",
    "family",
    "probe",
    "mode",
    "optimize",
];

impl RunConfig {
    /// Set one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
        };
        match key {
            "alpha" => self.alpha = Some(parse_list(key, value)?),
            "beta" => self.beta = Some(parse_num(key, value)?),
            "theta" => self.theta = Some(parse_num(key, value)?),
            "grid" => {
                let n = int(value)?;
                if n == 0 {
                    return Err(Error::Config("grid: needs at least one point".into()));
                }
                self.grid = Some(n)
            }
            "margin" => {
                let m = parse_num(key, value)?;
                if m < 0.0 {
                    return Err(Error::Config("margin: must be non-negative".into()));
                }
                self.margin = Some(m)
            }
            "relative_margin" => {
                let m = parse_num(key, value)?;
                if m < 0.0 {
                    return Err(Error::Config(
                        "relative_margin: must be non-negative".into(),
                    ));
                }
                self.relative_margin = Some(m)
            }
            "budget" => self.budget = Some(value.parse()?),
            "out" => self.out = Some(value.to_string()),
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| {
                    Error::Config(format!("seed: '{value}' is not a non-negative integer"))
                })?)
            }
            "instances" => self.instances = Some(int(value)?),
            "family" => self.family = Some(value.parse()?),
            "probe" => {
                let v = parse_list(key, value)?;
                if v.len() != 3 {
                    return Err(Error::Config("probe: expected r,phi1,phi2".into()));
                }
                QubitState::new(v[0], v[1], v[2])?;
                self.probe = Some([v[0], v[1], v[2]]);
            }
            "mode" => self.mode = Some(value.parse()?),
            "optimize" => {
                self.optimize = Some(match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(Error::Config(format!(
                            "optimize: '{value}' is not a boolean"
                        )))
                    }
                })
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parse `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    /// Overlay every field set in `other`.
    pub fn merge(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(
            alpha,
            beta,
            theta,
            grid,
            margin,
            relative_margin,
            budget,
            out,
            seed,
            instances,
            family,
            probe,
            mode,
            optimize
        );
    }

    pub fn to_text(&self) -> String {
        let mut lines = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                lines.push(format!("{k}={v}"));
            }
        };
        put("alpha", self.alpha.as_ref().map(|v| join(v)));
        put("beta", self.beta.map(fmt_num));
        put("theta", self.theta.map(fmt_num));
        put("grid", self.grid.map(|v| v.to_string()));
        put("margin", self.margin.map(fmt_num));
        put("relative_margin", self.relative_margin.map(fmt_num));
        put("budget", self.budget.map(|b| b.to_string()));
        put("out", self.out.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("instances", self.instances.map(|v| v.to_string()));
        put("family", self.family.map(|v| v.to_string()));
        put("probe", self.probe.map(|v| join(&v)));
        put("mode", self.mode.map(|v| v.as_str().to_string()));
        put("optimize", self.optimize.map(|v| v.to_string()));
        let mut s = lines.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    pub fn scan_grid(&self) -> ScanGrid {
        let d = ScanGrid::default();
        let budget = self.budget.unwrap_or(d.budget);
        ScanGrid {
            alphas: self.alpha.clone().unwrap_or(d.alphas),
            points: self.grid.unwrap_or(d.points),
            margin: self.margin.unwrap_or(d.margin),
            relative_margin: self.relative_margin.unwrap_or(d.relative_margin),
            budget,
        }
    }

    fn point_alpha(&self) -> f64 {
        self.alpha
            .as_ref()
            .and_then(|v| v.first().copied())
            .unwrap_or(REFERENCE_ALPHA)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// Text produced by a subcommand and whether the claim it tests held.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub text: String,
    /// `None` for commands that test no claim.
    pub claim: Option<bool>,
    pub summary: String,
}

fn manifest(command: &str, cfg: &RunConfig) -> String {
    let mut s = format!("# qmeasure {VERSION}\n# command: {command}\n");
    // the output path is left out so runs written to different files compare equal
    for line in cfg.to_text().lines().filter(|l| !l.starts_with("out=")) {
        let _ = writeln!(s, "# config: {line}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    OneA,
    OneB,
    Two,
}

impl Figure {
    pub fn scenario(self) -> Scenario {
        match self {
            Figure::OneA => Scenario::BetaEstimation,
            Figure::OneB => Scenario::AlphaEstimation,
            Figure::Two => Scenario::ThetaBetaEstimation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::OneA => "1a",
            Figure::OneB => "1b",
            Figure::Two => "2",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1a" => Ok(Figure::OneA),
            "1b" => Ok(Figure::OneB),
            "2" => Ok(Figure::Two),
            _ => Err(Error::Config(format!(
                "unknown figure '{s}', expected 1a, 1b or 2"
            ))),
        }
    }
}

pub const SCAN_HEADER: &str = "alpha,beta,theta,x,beta_over_alpha,alpha_over_beta,or_min,of_min,difference,or_r,or_phi1,or_phi2,of_r,of_phi1,of_phi2,status";

/// CSV body for a scan, rows in grid order.
pub fn scan_csv(scan: &Scan) -> String {
    let mut s = String::from(SCAN_HEADER);
    s.push('\n');
    for r in &scan.rows {
        let v = |e: ErrorValue| fmt_num(e.value());
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.alpha),
            fmt_num(r.beta),
            fmt_num(r.theta),
            fmt_num(r.x),
            fmt_num(r.beta_over_alpha()),
            fmt_num(r.alpha_over_beta()),
            v(r.or.best_value),
            v(r.of.best_value),
            r.difference.map(fmt_num).unwrap_or_default(),
            fmt_num(r.or.best_probe.r),
            fmt_num(r.or.best_probe.phi1),
            fmt_num(r.or.best_probe.phi2),
            fmt_num(r.of.best_probe.r),
            fmt_num(r.of.best_probe.phi1),
            fmt_num(r.of.best_probe.phi2),
            r.status
        );
    }
    s
}

fn scan_output(
    command: &str,
    scenario: Scenario,
    cfg: &RunConfig,
    gate: bool,
) -> Result<CommandOutput> {
    let grid = cfg.scan_grid();
    let scan = advantage_scan(scenario, &grid)?;
    let sm = &scan.summary;
    let held = sm.claim_holds();
    let mut text = manifest(command, cfg);
    let _ = writeln!(
        text,
        "# grid: scenario={} alpha={} points={} margin={} relative_margin={} budget={}",
        scenario,
        join(&grid.alphas),
        grid.points,
        fmt_num(grid.margin),
        fmt_num(grid.relative_margin),
        grid.budget
    );
    text.push_str(&scan_csv(&scan));
    let claim = match scenario {
        Scenario::AlphaEstimation => {
            "negative difference at large alpha, none at the smallest alpha"
        }
        _ => "difference never negative",
    };
    let summary = format!(
        "claim ({claim}): {} min_difference={} ok_rows={}/{} has_negative={} smallest_alpha_has_negative={}",
        if held { "held" } else { "violated" },
        fmt_num(sm.min_difference),
        sm.ok_rows,
        scan.rows.len(),
        sm.has_negative,
        sm.smallest_alpha_has_negative
    );
    let _ = writeln!(text, "# {summary}");
    Ok(CommandOutput {
        text,
        claim: if gate { Some(held) } else { None },
        summary,
    })
}

/// Regenerate the data behind one figure and test its qualitative claim.
pub fn cmd_figure(which: Figure, cfg: &RunConfig) -> Result<CommandOutput> {
    scan_output(
        &format!("figure {}", which.as_str()),
        which.scenario(),
        cfg,
        true,
    )
}

/// Scan a scenario chosen by `family` without gating on its claim.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<CommandOutput> {
    let scenario = match cfg.family {
        Some(FamilySpec::Scenario(s)) => s,
        Some(FamilySpec::Case(c)) => {
            return Err(Error::Config(format!(
                "sweep needs a single-parameter family, got case {c}"
            )))
        }
        None => Scenario::BetaEstimation,
    };
    scan_output("sweep", scenario, cfg, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckTarget {
    Case(CaseId),
    BiconditionalAudit,
    /// The stated commutation condition of the Case II forgotten family.
    Commutation,
}

impl FromStr for CheckTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem2-audit" => Ok(CheckTarget::BiconditionalAudit),
            "commutation" => Ok(CheckTarget::Commutation),
            other => other.parse().map(CheckTarget::Case).map_err(|_| {
                Error::Config(format!(
                    "unknown check '{s}', expected I, II, III, IV, theorem2-audit or commutation"
                ))
            }),
        }
    }
}

impl fmt::Display for CheckTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckTarget::Case(c) => write!(f, "{c}"),
            CheckTarget::BiconditionalAudit => f.write_str("theorem2-audit"),
            CheckTarget::Commutation => f.write_str("commutation"),
        }
    }
}

/// Run the criteria module over the configured instance set.
pub fn cmd_check(target: CheckTarget, cfg: &RunConfig) -> Result<CommandOutput> {
    let mut text = manifest(&format!("check {target}"), cfg);
    let seed = cfg.seed();
    let (held, summary) = match target {
        CheckTarget::Case(case) => {
            let n = cfg.instances.unwrap_or(match case {
                CaseId::II | CaseId::III => DEFAULT_CASE_II_INSTANCES,
                _ => DEFAULT_CASE_INSTANCES,
            });
            let audit = audit_case(case, seed, n)?;
            text.push_str("index,case,mode,alpha,beta,theta,r,phi1,phi2,achievable,invertible,conditioning,commutator,offdiag_ratio,max_uhlmann,claim\n");
            for (i, row) in audit.rows.iter().enumerate() {
                let c = &row.config;
                let p = c.probe_state()?;
                let v = &row.verdict;
                let _ = writeln!(
                    text,
                    "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.case,
                    c.mode.label(),
                    fmt_num(c.alpha),
                    fmt_num(c.beta),
                    fmt_num(c.theta),
                    fmt_num(p.r),
                    fmt_num(p.phi1),
                    fmt_num(p.phi2),
                    v.achievable,
                    v.qfim_invertible,
                    fmt_num(v.conditioning),
                    fmt_num(v.derivative_commutator_norm),
                    fmt_num(v.offdiag_ratio_imag),
                    fmt_num(v.max_uhlmann),
                    crate::criteria::case_claim(row)
                );
            }
            let claim = match case {
                CaseId::I | CaseId::IV => "QFIM singular",
                _ => "achievable; remembered branches invertible iff probe mixed",
            };
            (
                audit.holds(),
                format!(
                    "claim ({claim}): {}/{} instances",
                    audit.passed, audit.total
                ),
            )
        }
        CheckTarget::BiconditionalAudit => {
            let n = cfg.instances.unwrap_or(DEFAULT_AUDIT_INSTANCES);
            let audit = biconditional_audit(seed, n)?;
            text.push_str(
                "index,family,singular,commutator_relative,conditioning,offdiag_ratio,agree\n",
            );
            for (i, row) in audit.rows.iter().enumerate() {
                let v = &row.verdict;
                let _ = writeln!(
                    text,
                    "{i},{},{},{},{},{},{}",
                    row.label,
                    v.singular(),
                    fmt_num(v.commutator_relative),
                    fmt_num(v.conditioning),
                    fmt_num(v.offdiag_ratio_imag),
                    v.biconditional == Some(true)
                );
            }
            (
                audit.holds() && audit.rows.len() == n,
                format!(
                    "claim (singular iff commuting derivatives, given achievability): agreement {}/{} (singular {}, skipped unachievable {})",
                    audit.agree,
                    audit.rows.len(),
                    audit.singular,
                    audit.skipped
                ),
            )
        }
        CheckTarget::Commutation => {
            let n = cfg.instances.unwrap_or(DEFAULT_COMMUTATION_PAIRS);
            let alpha = cfg.point_alpha();
            let beta = cfg.beta.unwrap_or(REFERENCE_BETA);
            let r = cfg.probe.map(|p| p[0]).unwrap_or(0.8);
            let rows = commutation_audit(alpha, beta, r, &commutation_pairs(n))?;
            text.push_str("phi1,x2,commutator,commuting,stated_condition,axis_aligned\n");
            for row in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    fmt_num(row.phi1),
                    fmt_num(row.x2),
                    fmt_num(row.commutator),
                    row.commuting,
                    row.stated,
                    row.aligned
                );
            }
            let stated = rows.iter().filter(|r| r.commuting == r.stated).count();
            let aligned = rows.iter().filter(|r| r.commuting == r.aligned).count();
            (
                stated == rows.len(),
                format!(
                    "claim (commutator vanishes iff tan x2 = tan(phi1 - 2 x2)): {stated}/{} agree; sin(phi1 - x2) = 0 agrees {aligned}/{}",
                    rows.len(),
                    rows.len()
                ),
            )
        }
    };
    let summary = format!("{} {summary}", if held { "held" } else { "violated" });
    let _ = writeln!(text, "# {summary}");
    Ok(CommandOutput {
        text,
        claim: Some(held),
        summary,
    })
}

fn probe_of(cfg: &RunConfig) -> Result<QubitState> {
    match cfg.probe {
        Some([r, a, b]) => QubitState::new(r, a, b),
        None => Ok(QubitState::plus()),
    }
}

fn scenario_point(s: Scenario, cfg: &RunConfig) -> (MeasurementFamily, f64) {
    let alpha = cfg.point_alpha();
    let beta = cfg.beta.unwrap_or(REFERENCE_BETA);
    match s {
        Scenario::AlphaEstimation => (MeasurementFamily::alpha_estimation(beta), alpha),
        Scenario::BetaEstimation => (MeasurementFamily::beta_estimation(alpha), beta),
        Scenario::ThetaBetaEstimation => (
            MeasurementFamily::theta_beta_estimation(alpha),
            cfg.theta.unwrap_or(std::f64::consts::FRAC_PI_4),
        ),
    }
}

/// One line of full-precision numbers for a single configured point.
///
/// `or`/`of` print the error (and with `optimize`, the minimizing probe
/// `r φ₁ φ₂` after it); `branch1`/`branch2`/`forgotten` print the QFI, or the
/// QFIM row by row for the multiparameter cases.
pub fn cmd_qfi(cfg: &RunConfig) -> Result<String> {
    let family = cfg
        .family
        .unwrap_or(FamilySpec::Scenario(Scenario::AlphaEstimation));
    let mode = cfg.mode.unwrap_or(QueryMode::Of);
    let probe = probe_of(cfg)?;
    let (mf, x) = match family {
        FamilySpec::Scenario(s) => {
            let (mf, x) = scenario_point(s, cfg);
            (mf, vec![x])
        }
        FamilySpec::Case(case) => {
            let c = CaseConfig::new(
                case,
                cfg.point_alpha(),
                cfg.beta.unwrap_or(REFERENCE_BETA),
                cfg.theta.unwrap_or(0.0),
                ProbeSpec::State(probe),
                OutcomeMode::Forgotten,
            );
            (c.measurement_family(), c.point())
        }
    };
    mf.povm(&x)?;
    let w = WeightMatrix::identity(mf.dim());
    let objective = match mode {
        QueryMode::Or => Some(Objective::Or),
        QueryMode::Of => Some(Objective::Of),
        _ => None,
    };
    if let Some(obj) = objective {
        if cfg.optimize.unwrap_or(false) {
            let b = cfg.budget.unwrap_or_default();
            let o = optimize_probe(obj, &mf, &x, &w, &b)?;
            return Ok(format!(
                "{} {} {} {}",
                fmt_full(o.best_value.value()),
                fmt_full(o.best_probe.r),
                fmt_full(o.best_probe.phi1),
                fmt_full(o.best_probe.phi2)
            ));
        }
        let e = evaluate(obj, &mf, &probe, &x, &w)?;
        return Ok(fmt_full(e.value.value()));
    }
    let fam = match mode {
        QueryMode::Branch(o) => family_selective(&mf, &probe, o),
        _ => family_nonselective(&mf, &probe),
    };
    let rep = qfim(&fam, &x)?;
    let m = rep.dim();
    let entries: Vec<String> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| fmt_full(rep.qfim[(i, j)]))
        .collect();
    Ok(entries.join(" "))
}

/// Reproduce the verdict for a single case configuration (used by tests and
/// bindings).
pub fn case_line(cfg: &CaseConfig) -> Result<String> {
    let r = run_case(cfg)?;
    Ok(format!(
        "achievable={} invertible={} commutator={} conditioning={}",
        r.verdict.achievable,
        r.verdict.qfim_invertible,
        fmt_num(r.verdict.derivative_commutator_norm),
        fmt_num(r.verdict.conditioning)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = "alpha=0.1,0.3\nbeta=0.05\ngrid=7\nmargin=0.01\nbudget=5x5x5:10\nseed=3\nfamily=alpha-est\nprobe=1,1.5707963267948966,0\nmode=or\noptimize=true\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.alpha, Some(vec![0.1, 0.3]));
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.to_text(), text);
    }

    #[test]
    fn comments_and_errors() {
        let cfg = RunConfig::parse("# comment\n\n beta = 0.2 \n").unwrap();
        assert_eq!(cfg.beta, Some(0.2));
        assert!(RunConfig::parse("bogus=1").is_err());
        assert!(RunConfig::parse("beta").is_err());
        assert!(RunConfig::parse("grid=0").is_err());
        assert!(RunConfig::parse("beta=nan").is_err());
        assert!(RunConfig::parse("probe=2,0,0").is_err());
    }

    #[test]
    fn merge_overrides() {
        let mut base = RunConfig::parse("beta=0.2\ngrid=5").unwrap();
        let flags = RunConfig::parse("grid=9").unwrap();
        base.merge(&flags);
        assert_eq!(base.beta, Some(0.2));
        assert_eq!(base.grid, Some(9));
    }

    #[test]
    fn qfi_reference_values() {
        let mut cfg = RunConfig::parse("alpha=0.4\nbeta=0.1\nmode=or").unwrap();
        let v: f64 = cmd_qfi(&cfg).unwrap().parse().unwrap();
        assert!((v - 2.74947).abs() < 1e-5);
        cfg.set("mode", "of").unwrap();
        cfg.set("optimize", "true").unwrap();
        let line = cmd_qfi(&cfg).unwrap();
        let v: f64 = line.split(' ').next().unwrap().parse().unwrap();
        assert!((v - 10.978).abs() < 1e-3);
    }

    #[test]
    fn qfi_prints_full_precision() {
        let cfg = RunConfig::parse("family=beta-est\nalpha=0.4\nbeta=0.1\nmode=forgotten").unwrap();
        let line = cmd_qfi(&cfg).unwrap();
        let mantissa = line.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn qfim_line_for_case() {
        let cfg = RunConfig::parse(
            "family=IV\nalpha=0.4\nbeta=0.1\ntheta=0.3\nmode=forgotten\nprobe=0.7,1,0.3",
        )
        .unwrap();
        assert_eq!(cmd_qfi(&cfg).unwrap().split(' ').count(), 9);
    }

    #[test]
    fn boundary_point_is_an_error() {
        let cfg = RunConfig::parse("family=beta-est\nalpha=0.3\nbeta=0.7").unwrap();
        assert!(matches!(cmd_qfi(&cfg), Err(Error::InvalidPovm { .. })));
    }

    #[test]
    fn check_parsing() {
        assert_eq!(
            "II".parse::<CheckTarget>().unwrap(),
            CheckTarget::Case(CaseId::II)
        );
        assert_eq!(
            "commutation".parse::<CheckTarget>().unwrap(),
            CheckTarget::Commutation
        );
        assert!("V".parse::<CheckTarget>().is_err());
    }
}
