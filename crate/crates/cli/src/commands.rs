//! Subcommand definitions and their result tables.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use imprior_core::bernoulli::{
    intrinsic_moment_prior_density, log_bf10_intrinsic_moment, BernoulliNull, BinData,
    MomentPriorSpec,
};
use imprior_core::logit::{Allocation, LogitProblem, McmcConfig, ModelId, SelectionSession};
use imprior_core::numeric::RngStream;
use imprior_core::prob_from_log_bf10;
use imprior_core::studies::{
    cross_validation, default_t_plus, default_t_ranges, evidence_curve, learning_rate_sim,
    sensitivity_analysis, twoe_bernoulli, twoe_logit, twoe_two_props, RateModel, Regime, Truth,
    TwoeCurve, DEFAULT_ALT_GRID, DEFAULT_NULL_GRID, DEFAULT_T_PLUS_MAX,
};
use imprior_core::two_props::{
    default_hyper, log_bf10_intrinsic_moment2, posterior_means2, TwoPropData,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{bad_arg, CliError};
use crate::io::{builtin_survival_data, load_logit_problem, load_trial_tables, TrialTableRecord};
use crate::output::{log_sigmoid, Envelope, Format, Row, RowBuilder};

#[derive(Debug, Parser)]
#[command(
    name = "imprior",
    version,
    about = "Bayes factors and model selection with intrinsic moment priors"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Seed for every random stream used by the command.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bayes factor for a point null on one binomial proportion.
    BernBf(BernBf),
    /// Intrinsic moment prior density on a grid of (0, 1).
    BernPrior(BernPrior),
    /// Bayes factor for equality of two binomial proportions.
    TwopropBf(TwopropBf),
    /// Total weight of evidence on minimal data, by training size.
    Twoe(Twoe),
    /// P(M1 | y) for every y = 0..=n.
    EvidenceCurve(EvidenceCurveCmd),
    /// Simulated growth of log Bayes factors with sample size.
    LearningRate(LearningRate),
    /// P(M0 | y) across training sizes for a file of trial tables.
    Sensitivity(Sensitivity),
    /// Leave-one-out logarithmic scores for a file of trial tables.
    Crossval(Crossval),
    /// Posterior model probabilities for logistic regression.
    LogitSelect(LogitSelect),
    /// Total weight of evidence for logistic regression, by training size.
    LogitTwoe(LogitTwoe),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BernBf(_) => "bern-bf",
            Self::BernPrior(_) => "bern-prior",
            Self::TwopropBf(_) => "twoprop-bf",
            Self::Twoe(_) => "twoe",
            Self::EvidenceCurve(_) => "evidence-curve",
            Self::LearningRate(_) => "learning-rate",
            Self::Sensitivity(_) => "sensitivity",
            Self::Crossval(_) => "crossval",
            Self::LogitSelect(_) => "logit-select",
            Self::LogitTwoe(_) => "logit-twoe",
        }
    }

    pub fn run(&self, seed: u64) -> Result<Envelope, CliError> {
        let stream = RngStream::new(seed);
        let out = match self {
            Self::BernBf(c) => c.run()?,
            Self::BernPrior(c) => c.run()?,
            Self::TwopropBf(c) => c.run()?,
            Self::Twoe(c) => c.run()?,
            Self::EvidenceCurve(c) => c.run()?,
            Self::LearningRate(c) => c.run(stream)?,
            Self::Sensitivity(c) => c.run()?,
            Self::Crossval(c) => c.run()?,
            Self::LogitSelect(c) => c.run(stream)?,
            Self::LogitTwoe(c) => c.run(stream)?,
        };
        Ok(Envelope {
            command: self.name().to_string(),
            config: out.config,
            seed: stream,
            results: out.results,
            mc_se: out.mc_se,
            summary: out.summary,
        })
    }
}

struct Output {
    config: Value,
    results: Vec<Row>,
    mc_se: Option<Vec<f64>>,
    summary: Option<Row>,
}

impl Output {
    fn exact(config: Value, results: Vec<Row>) -> Self {
        Self {
            config,
            results,
            mc_se: None,
            summary: None,
        }
    }
}

/// Args serialized, then `extra` merged on top.
fn config_of<T: Serialize>(args: &T, extra: Value) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn bf_row(row: RowBuilder, log_bf10: f64) -> RowBuilder {
    row.num("log_bf10", log_bf10)
        .num("bf10", log_bf10.exp())
        .prob_with_log(
            "prob_m1",
            prob_from_log_bf10(log_bf10),
            log_sigmoid(log_bf10),
        )
        .prob_with_log(
            "prob_m0",
            prob_from_log_bf10(-log_bf10),
            log_sigmoid(-log_bf10),
        )
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn curve_rows(c: &TwoeCurve, key: &str) -> Vec<Row> {
    c.grid
        .iter()
        .zip(&c.twoe)
        .enumerate()
        .map(|(i, (&t, &v))| {
            let mut r = RowBuilder::new().put(key, t).num("twoe", v);
            if let Some(se) = &c.mc_se {
                r = r.num("mc_se", se[i]);
            }
            r.put("in_argmax_set", c.argmax_set.contains(&t)).build()
        })
        .collect()
}

fn curve_summary(c: &TwoeCurve) -> Row {
    RowBuilder::new()
        .put("t_star", c.t_star)
        .put("argmax_set", c.argmax_set.clone())
        .build()
}

#[derive(Debug, Args, Serialize)]
pub struct BernBf {
    #[arg(long)]
    pub y: u64,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0.5)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0)]
    pub h: u32,
    #[arg(long, default_value_t = 0)]
    pub t: u32,
}

impl BernBf {
    fn run(&self) -> Result<Output, CliError> {
        let data = BinData::new(self.y, self.n).map_err(bad_arg)?;
        let null = BernoulliNull::new(self.theta0).map_err(bad_arg)?;
        let spec = MomentPriorSpec::new(self.b, self.h, self.t).map_err(bad_arg)?;
        let l = log_bf10_intrinsic_moment(data, null, spec)?;
        let row = bf_row(RowBuilder::new().put("y", self.y).put("n", self.n), l).build();
        Ok(Output::exact(config_of(self, json!({})), vec![row]))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BernPrior {
    #[arg(long, default_value_t = 0.5)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    #[arg(long, default_value_t = 8)]
    pub t: u32,
    /// Interior grid points `i / (points + 1)`.
    #[arg(long, default_value_t = 99)]
    pub points: u32,
}

impl BernPrior {
    fn run(&self) -> Result<Output, CliError> {
        let null = BernoulliNull::new(self.theta0).map_err(bad_arg)?;
        let spec = MomentPriorSpec::new(self.b, self.h, self.t).map_err(bad_arg)?;
        if self.points == 0 {
            return Err(CliError::Usage("--points must be at least 1".into()));
        }
        let step = 1.0 / f64::from(self.points + 1);
        let rows = (1..=self.points)
            .map(|i| {
                let theta = f64::from(i) * step;
                let d = intrinsic_moment_prior_density(theta, null, spec)?;
                Ok(RowBuilder::new()
                    .num("theta", theta)
                    .num("density", d)
                    .num("log_density", d.ln())
                    .build())
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Output::exact(config_of(self, json!({})), rows))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TwopropBf {
    #[arg(long)]
    pub y1: u64,
    #[arg(long)]
    pub n1: u64,
    #[arg(long)]
    pub y2: u64,
    #[arg(long)]
    pub n2: u64,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    /// Total training size; defaults to the TWOE optimum for `h`.
    #[arg(long)]
    pub t_plus: Option<u64>,
}

impl TwopropBf {
    fn run(&self) -> Result<Output, CliError> {
        let data = TwoPropData::new(self.y1, self.n1, self.y2, self.n2).map_err(bad_arg)?;
        let t_plus = match self.t_plus {
            Some(t) => t,
            None => default_t_plus(self.h)?,
        };
        let hyper = default_hyper(self.n1, self.n2, self.h, t_plus).map_err(bad_arg)?;
        let l = log_bf10_intrinsic_moment2(&data, &hyper)?;
        let (m1, m2) = posterior_means2(&data, &hyper)?;
        let row = bf_row(RowBuilder::new(), l)
            .num("theta1_mean_m1", m1)
            .num("theta2_mean_m1", m2)
            .build();
        let config = config_of(self, json!({ "t_plus": t_plus, "hyper": hyper }));
        Ok(Output::exact(config, vec![row]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bernoulli,
    TwoProps,
}

#[derive(Debug, Args, Serialize)]
pub struct Twoe {
    #[arg(long, value_enum)]
    pub family: Family,
    /// `b` for the Bernoulli prior, `b0` for two proportions; defaults to 1
    /// and 1/2.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    #[arg(long, default_value_t = DEFAULT_T_PLUS_MAX)]
    pub t_max: u64,
}

impl Twoe {
    fn run(&self) -> Result<Output, CliError> {
        let (b, curve, key) = match self.family {
            Family::Bernoulli => {
                let b = self.b.unwrap_or(1.0);
                let t_max = u32::try_from(self.t_max)
                    .map_err(|_| CliError::Usage("--t-max too large".into()))?;
                MomentPriorSpec::new(b, self.h, 0).map_err(bad_arg)?;
                (b, twoe_bernoulli(b, self.h, t_max)?, "t")
            }
            Family::TwoProps => {
                let b = self.b.unwrap_or(0.5);
                if !(b > 0.0 && b.is_finite()) {
                    return Err(CliError::Usage(format!("--b must be positive, got {b}")));
                }
                if !self.t_max.is_multiple_of(2) {
                    return Err(CliError::Usage("--t-max must be even for two-props".into()));
                }
                (b, twoe_two_props(b, self.h, self.t_max)?, "t_plus")
            }
        };
        Ok(Output {
            config: config_of(self, json!({ "b": b })),
            results: curve_rows(&curve, key),
            mc_se: None,
            summary: Some(curve_summary(&curve)),
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvidenceCurveCmd {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0.5)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Prior settings as `h:t`; repeat for several curves.
    #[arg(long = "spec", default_values_t = ["0:0".to_string(), "1:8".to_string()])]
    pub specs: Vec<String>,
}

impl EvidenceCurveCmd {
    fn run(&self) -> Result<Output, CliError> {
        let null = BernoulliNull::new(self.theta0).map_err(bad_arg)?;
        if self.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let specs = self
            .specs
            .iter()
            .map(|s| {
                let (h, t) = parse_pair(s).map_err(CliError::Usage)?;
                let h =
                    u32::try_from(h).map_err(|_| CliError::Usage(format!("h too large: {h}")))?;
                let t =
                    u32::try_from(t).map_err(|_| CliError::Usage(format!("t too large: {t}")))?;
                MomentPriorSpec::new(self.b, h, t).map_err(bad_arg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let curves = evidence_curve(self.n, null, &specs)?;
        let rows = curves
            .iter()
            .flat_map(|c| {
                c.points.iter().map(|p| {
                    RowBuilder::new()
                        .put("h", c.spec.h)
                        .put("t", c.spec.t)
                        .put("y", p.y)
                        .num("ybar", p.ybar)
                        .num("log_bf10", p.log_bf10)
                        .prob_with_log("prob_m1", p.prob_m1, log_sigmoid(p.log_bf10))
                        .build()
                })
            })
            .collect();
        Ok(Output::exact(config_of(self, json!({})), rows))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LearningRate {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    /// Bernoulli null value.
    #[arg(long, default_value_t = 0.25)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Bernoulli training size; defaults to the TWOE optimum for `h`.
    #[arg(long)]
    pub t: Option<u32>,
    /// Bernoulli truth; defaults to the null value.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Two-proportion truths; both default to 0.3.
    #[arg(long, default_value_t = 0.3)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.3)]
    pub theta2: f64,
    /// Two-proportion total training size; defaults to the TWOE optimum.
    #[arg(long)]
    pub t_plus: Option<u64>,
    /// Sample sizes (per group for two proportions), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
}

impl LearningRate {
    fn run(&self, stream: RngStream) -> Result<Output, CliError> {
        let (model, truth, is_null) = match self.family {
            Family::Bernoulli => {
                let null = BernoulliNull::new(self.theta0).map_err(bad_arg)?;
                let t = match self.t {
                    Some(t) => t,
                    None => {
                        MomentPriorSpec::new(self.b, self.h, 0).map_err(bad_arg)?;
                        twoe_bernoulli(self.b, self.h, 60)?.t_star as u32
                    }
                };
                let spec = MomentPriorSpec::new(self.b, self.h, t).map_err(bad_arg)?;
                let theta = self.theta.unwrap_or(self.theta0);
                if !(0.0..=1.0).contains(&theta) {
                    return Err(CliError::Usage(format!("--theta out of range: {theta}")));
                }
                (
                    RateModel::Bernoulli { null, spec },
                    Truth::Bernoulli { theta },
                    theta == self.theta0,
                )
            }
            Family::TwoProps => {
                for v in [self.theta1, self.theta2] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CliError::Usage(format!("truth out of range: {v}")));
                    }
                }
                let t_plus = match self.t_plus {
                    Some(t) => t,
                    None => default_t_plus(self.h)?,
                };
                (
                    RateModel::TwoProps { h: self.h, t_plus },
                    Truth::TwoProps {
                        theta1: self.theta1,
                        theta2: self.theta2,
                    },
                    self.theta1 == self.theta2,
                )
            }
        };
        let grid = match &self.n_grid {
            Some(g) => g.clone(),
            None if is_null => DEFAULT_NULL_GRID.to_vec(),
            None => DEFAULT_ALT_GRID.to_vec(),
        };
        if self.replications == 0 {
            return Err(CliError::Usage("--replications must be at least 1".into()));
        }
        if grid.len() < 5 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
            return Err(CliError::Usage(
                "--n-grid needs at least 5 positive, increasing sizes".into(),
            ));
        }
        let study = learning_rate_sim(&model, truth, &grid, self.replications, stream)?;
        let rows = study
            .points
            .iter()
            .map(|p| {
                RowBuilder::new()
                    .put("n", p.n)
                    .num("median_log_bf", p.summary_log_bf)
                    .num("mean_log_bf", p.mean_log_bf)
                    .put("replications", p.replications)
                    .prob("avg_prob_null", p.avg_prob_null)
                    .build()
            })
            .collect();
        let f = &study.fit;
        let mut summary = RowBuilder::new()
            .put(
                "regime",
                match f.regime {
                    Regime::PolynomialInLogN => "polynomial-in-log-n",
                    Regime::LinearInN => "linear-in-n",
                },
            )
            .num("slope", f.slope)
            .num("intercept", f.intercept)
            .num("expected_slope", f.expected_slope)
            .num("ci95_lo", f.ci95.0)
            .num("ci95_hi", f.ci95.1);
        if let Some(k) = f.k_star {
            summary = summary.num("k_star", k);
        }
        // bootstrap interval expressed as a standard error of the slope
        let slope_se = (f.ci95.1 - f.ci95.0) / (2.0 * 1.959_963_984_540_054);
        Ok(Output {
            config: config_of(
                self,
                json!({ "model": model, "truth": truth, "n_grid": grid }),
            ),
            results: rows,
            mc_se: Some(vec![slope_se]),
            summary: Some(summary.build()),
        })
    }
}

fn parse_t_ranges(raw: &[String]) -> Result<Vec<(u64, u64)>, CliError> {
    raw.iter()
        .map(|s| parse_pair(s).map_err(CliError::Usage))
        .collect()
}

fn load_tables(path: &Path) -> Result<Vec<TrialTableRecord>, CliError> {
    let tables = load_trial_tables(path)?;
    if tables.is_empty() {
        return Err(CliError::Data {
            path: path.to_path_buf(),
            msg: "no tables to analyse".into(),
        });
    }
    Ok(tables)
}

fn table_row(r: RowBuilder, t: &TrialTableRecord) -> RowBuilder {
    r.put("id", t.id.clone())
        .put("y1", t.y1)
        .put("n1", t.n1)
        .put("y2", t.y2)
        .put("n2", t.n2)
}

#[derive(Debug, Args, Serialize)]
pub struct Sensitivity {
    /// CSV with header `id,y1,n1,y2,n2`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub h: Vec<u32>,
    /// One `lo:hi` range of total training sizes per `h`; defaults to
    /// `[t+*(h), t+*(h+1)]`.
    #[arg(long = "t-range")]
    pub t_ranges: Vec<String>,
}

impl Sensitivity {
    fn run(&self) -> Result<Output, CliError> {
        let tables = load_tables(&self.data)?;
        let ranges = if self.t_ranges.is_empty() {
            default_t_ranges(&self.h)?
        } else {
            let r = parse_t_ranges(&self.t_ranges)?;
            if r.len() != self.h.len() {
                return Err(CliError::Usage(format!(
                    "{} --t-range values for {} h values",
                    r.len(),
                    self.h.len()
                )));
            }
            if let Some((lo, hi)) = r.iter().find(|(lo, hi)| lo > hi) {
                return Err(CliError::Usage(format!("empty range {lo}:{hi}")));
            }
            r
        };
        let input: Vec<(String, TwoPropData)> =
            tables.iter().map(|t| (t.id.clone(), t.data())).collect();
        let report = sensitivity_analysis(&input, &self.h, &ranges)?;
        let by_id = |id: &str| tables.iter().find(|t| t.id == id).expect("known id");
        let rows = report
            .iter()
            .flat_map(|ts| {
                let t = by_id(&ts.id);
                ts.rows.iter().map(move |r| {
                    table_row(RowBuilder::new(), t)
                        .num("abs_freq_diff", ts.abs_freq_diff)
                        .put("h", r.h)
                        .put("t_plus_lo", r.t_plus_lo)
                        .put("t_plus_hi", r.t_plus_hi)
                        .prob("p_null_lo", r.p_null_lo)
                        .prob("p_null_hi", r.p_null_hi)
                        .prob("p_null_min", r.p_null_min)
                        .prob("p_null_max", r.p_null_max)
                        .build()
                })
            })
            .collect();
        let config = config_of(self, json!({ "t_ranges": ranges }));
        Ok(Output::exact(config, rows))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Crossval {
    /// CSV with header `id,y1,n1,y2,n2`.
    #[arg(long)]
    pub data: PathBuf,
    /// Orders to score; the first is the baseline for the differences.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub h: Vec<u32>,
    /// Total training size per `h`; defaults to `t+*(h)`.
    #[arg(long, value_delimiter = ',')]
    pub t_plus: Option<Vec<u64>>,
}

impl Crossval {
    fn run(&self) -> Result<Output, CliError> {
        if self.h.is_empty() {
            return Err(CliError::Usage("--h needs at least one value".into()));
        }
        let tables = load_tables(&self.data)?;
        let t_plus = match &self.t_plus {
            Some(t) if t.len() != self.h.len() => {
                return Err(CliError::Usage(format!(
                    "{} --t-plus values for {} h values",
                    t.len(),
                    self.h.len()
                )))
            }
            Some(t) => t.clone(),
            None => self
                .h
                .iter()
                .map(|&h| default_t_plus(h))
                .collect::<Result<_, _>>()?,
        };
        let mut rows = Vec::new();
        let mut improvements = vec![Vec::new(); self.h.len()];
        for t in &tables {
            if t.n1 + t.n2 == 0 {
                return Err(CliError::Data {
                    path: self.data.clone(),
                    msg: format!("table `{}` has no units", t.id),
                });
            }
            let cv = cross_validation(&t.data(), &self.h, &t_plus)?;
            for k in 0..self.h.len() {
                let f = &cv.forecasts[k];
                improvements[k].push(100.0 * cv.deltas[k]);
                rows.push(
                    table_row(RowBuilder::new(), t)
                        .put("h", self.h[k])
                        .put("t_plus", t_plus[k])
                        .num("score", cv.scores[k])
                        .num("delta", cv.deltas[k])
                        .num("improvement_pct", 100.0 * cv.deltas[k])
                        .prob("theta1_occ", f.theta1_occ)
                        .prob("theta1_non", f.theta1_non)
                        .prob("theta2_occ", f.theta2_occ)
                        .prob("theta2_non", f.theta2_non)
                        .build(),
                );
            }
        }
        let mut summary = RowBuilder::new();
        for (k, imp) in improvements.iter_mut().enumerate().skip(1) {
            imp.sort_by(f64::total_cmp);
            let m = imp.len();
            let median = if m % 2 == 1 {
                imp[m / 2]
            } else {
                0.5 * (imp[m / 2 - 1] + imp[m / 2])
            };
            summary = summary.num(&format!("median_improvement_pct_h{}", self.h[k]), median);
        }
        Ok(Output {
            config: config_of(self, json!({ "t_plus": t_plus })),
            results: rows,
            mc_se: None,
            summary: Some(summary.build()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// 40,000 retained draws per chain.
    Full,
    /// 4,000 retained draws; seconds instead of minutes.
    Smoke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationArg {
    Nearest,
    LargestRemainder,
}

impl From<AllocationArg> for Allocation {
    fn from(a: AllocationArg) -> Self {
        match a {
            AllocationArg::Nearest => Self::Nearest,
            AllocationArg::LargestRemainder => Self::LargestRemainder,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LogitSource {
    /// JSON with fields `n`, `y`, `Z`, `models` and optional `w_plus`;
    /// the bundled survival data when omitted.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Profile::Full)]
    pub profile: Profile,
    #[arg(long, value_enum, default_value_t = AllocationArg::Nearest)]
    pub allocation: AllocationArg,
}

impl LogitSource {
    fn load(&self) -> Result<(LogitProblem, Vec<ModelId>), CliError> {
        match &self.problem {
            Some(p) => load_logit_problem(p),
            None => Ok(builtin_survival_data()),
        }
    }

    fn config(&self, stream: RngStream) -> McmcConfig {
        let base = match self.profile {
            Profile::Full => McmcConfig::default(),
            Profile::Smoke => McmcConfig::smoke(),
        };
        base.with_seed(stream)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LogitSelect {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: LogitSource,
    /// Orders of the moment prior, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub h: Vec<u32>,
    /// Total training sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub t_plus: Vec<u64>,
}

impl LogitSelect {
    fn run(&self, stream: RngStream) -> Result<Output, CliError> {
        let (problem, models) = self.source.load()?;
        let config = self.source.config(stream);
        let session = SelectionSession::new(&problem, &models, &config)?;
        let mut rows = Vec::new();
        let mut se = Vec::new();
        for &h in &self.h {
            for &tp in &self.t_plus {
                let t = session.training(tp, self.source.allocation.into());
                for m in session.posterior(h, &t)? {
                    se.push(m.prob_se);
                    rows.push(
                        RowBuilder::new()
                            .put("h", h)
                            .put("t_plus", tp)
                            .put(
                                "t",
                                t.t.clone()
                                    .iter()
                                    .map(u64::to_string)
                                    .collect::<Vec<_>>()
                                    .join(";"),
                            )
                            .put("model", m.model.label())
                            .num("log_marginal", m.log_marginal)
                            .num("log_marginal_se", m.log_marginal_se)
                            .prob("prob", m.prob)
                            .num("prob_se", m.prob_se)
                            .build(),
                    );
                }
            }
        }
        Ok(Output {
            config: config_of(self, json!({ "mcmc": config, "problem": problem })),
            results: rows,
            mc_se: Some(se),
            summary: None,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LogitTwoe {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: LogitSource,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    /// Total training sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,4,8,12,16,20,24")]
    pub grid: Vec<u64>,
}

impl LogitTwoe {
    fn run(&self, stream: RngStream) -> Result<Output, CliError> {
        let (problem, _) = self.source.load()?;
        if self.grid.is_empty() {
            return Err(CliError::Usage("--grid needs at least one value".into()));
        }
        let config = self.source.config(stream);
        let curve = twoe_logit(
            &problem,
            self.h,
            &self.grid,
            self.source.allocation.into(),
            &config,
        )?;
        Ok(Output {
            config: config_of(self, json!({ "mcmc": config })),
            results: curve_rows(&curve, "t_plus"),
            mc_se: curve.mc_se.clone(),
            summary: Some(curve_summary(&curve)),
        })
    }
}
