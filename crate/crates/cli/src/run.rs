//! Runs a validated request and assembles the report.

use qgid::analysis::{
    gid_grid_test, mixture_precheck, nid_k_jet, nid_split, q_series, qgid_test, reconstruct_check,
    threshold_search, GridReport, PrecheckReport, QMethod, QSeries, SemigroupFamily, Settings,
    SplitReport, Threshold, ThresholdSearch,
};
use qgid::lst::poisson_mixture_pmf;
use qgid::recursions::{a_from_p, b_from_r, r_from_p, AReport, BReport};
use qgid::{LstSpec, SequenceReport, Verdict, Violation};
use serde::Serialize;

use crate::error::Result;
use crate::request::{AnalysisRequest, Command};

pub const REPORT_SCHEMA: &str = "qgid.report/v1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Command,
    pub spec: LstSpec,
    pub settings: Settings,
    pub semigroup: SemigroupFamily,
    pub result: Outcome,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Analyze(Box<AnalyzeOutcome>),
    Threshold(ThresholdOutcome),
    Split(SplitOutcome),
    Sweep(SweepOutcome),
    Precheck(PrecheckOutcome),
}

#[derive(Debug, Clone, Serialize)]
pub struct PmfOutcome {
    pub values: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KJetOutcome {
    pub verdict: Verdict,
    /// `(-1)^n K^{(n)}(λ)`.
    pub signed_derivatives: SequenceReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutcome {
    pub lambda: f64,
    pub holds: bool,
    /// Both methods agree on the verdict and the violation index.
    pub method_agreement: bool,
    pub q_series_verdict: Verdict,
    pub a_recursion_verdict: Verdict,
    pub k_jet: KJetOutcome,
    pub q_series: QSeries,
    pub pmf: PmfOutcome,
    pub a: AReport,
    pub r: SequenceReport,
    pub b: BReport,
    /// `max |b_{n+1} - a_n|`.
    pub b_a_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdOutcome {
    pub method: QMethod,
    pub search: ThresholdSearch,
    /// `null` when no finite threshold was found below the cap.
    pub lambda_star: Option<f64>,
    pub unbounded: bool,
    pub threshold: Threshold,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitEntry {
    pub p: f64,
    #[serde(flatten)]
    pub split: SplitReport,
    /// Geometric semigroup only: largest gap between `P` and the pgf rebuilt from `G`.
    pub reconstruction_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitOutcome {
    pub lambda: f64,
    pub all_pgf: bool,
    pub entries: Vec<SplitEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSplit {
    pub lambda: f64,
    pub p: f64,
    pub is_pgf: bool,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub lambda_grid: Vec<f64>,
    pub method_agreement: bool,
    pub q_series: GridReport,
    pub a_recursion: GridReport,
    pub splits: Vec<SweepSplit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecheckEntry {
    /// `null` for the mixture pgf itself, otherwise the split parameter.
    pub p: Option<f64>,
    pub pgf: Vec<f64>,
    pub report: PrecheckReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecheckOutcome {
    pub lambda: f64,
    pub m: usize,
    pub z_grid: Vec<f64>,
    pub holds: bool,
    pub entries: Vec<PrecheckEntry>,
}

impl Report {
    /// Named sequences for CSV export.
    pub fn sequences(&self) -> Vec<(String, &[f64])> {
        match &self.result {
            Outcome::Analyze(a) => vec![
                ("pmf".into(), &a.pmf.values[..]),
                ("q".into(), &a.q_series.q.values[..]),
                ("a".into(), &a.a.seq.values[..]),
                ("r".into(), &a.r.values[..]),
                ("b".into(), &a.b.seq.values[..]),
                ("k_signed".into(), &a.k_jet.signed_derivatives.values[..]),
            ],
            Outcome::Threshold(_) => Vec::new(),
            Outcome::Split(s) => s
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| (format!("split_{i}"), &e.split.seq.values[..]))
                .collect(),
            Outcome::Sweep(_) => Vec::new(),
            Outcome::Precheck(p) => p
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| (format!("pgf_{i}"), &e.pgf[..]))
                .collect(),
        }
    }
}

fn agree(x: &Verdict, y: &Verdict) -> bool {
    x.holds == y.holds && x.violation_index() == y.violation_index()
}

fn analyze(req: &AnalysisRequest, lambda: f64) -> Result<AnalyzeOutcome> {
    let s = &req.settings;
    let qv = qgid_test(&req.spec, lambda, QMethod::QSeries, s)?;
    let av = qgid_test(&req.spec, lambda, QMethod::ARecursion, s)?;
    let k = nid_k_jet(req.semigroup, &req.spec, lambda, s)?;
    let qs = q_series(&req.spec, lambda, s)?;
    let pmf = poisson_mixture_pmf(&req.spec, lambda, s.order)?;
    let a = a_from_p(pmf.probs(), s.tol)?;
    let r = r_from_p(pmf.probs(), s.tol)?;
    let b = b_from_r(&r.values, s.tol)?;
    let b_a_residual = a
        .seq
        .values
        .iter()
        .zip(b.seq.values.iter().skip(1))
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(AnalyzeOutcome {
        lambda,
        holds: qv.holds && av.holds,
        method_agreement: agree(&qv, &av),
        q_series_verdict: qv,
        a_recursion_verdict: av,
        k_jet: KJetOutcome {
            verdict: k.verdict,
            signed_derivatives: k.signed,
        },
        q_series: qs,
        pmf: PmfOutcome {
            mass: pmf.mass(),
            values: pmf.probs().to_vec(),
        },
        a,
        r,
        b,
        b_a_residual,
    })
}

fn split_entry(req: &AnalysisRequest, lambda: f64, p: f64) -> Result<SplitEntry> {
    let split = nid_split(req.semigroup, &req.spec, lambda, p, &req.settings)?;
    let reconstruction_residual = match req.semigroup {
        SemigroupFamily::Geometric => Some(reconstruct_check(&req.spec, lambda, p, &req.settings)?),
        SemigroupFamily::Classical => None,
    };
    Ok(SplitEntry {
        p,
        split,
        reconstruction_residual,
    })
}

/// Runs the analysis named by `req.command`.
pub fn run(req: &AnalysisRequest) -> Result<Report> {
    let s = &req.settings;
    let result = match req.command {
        Command::Analyze => Outcome::Analyze(Box::new(analyze(req, req.require_lambda()?)?)),
        Command::Threshold => {
            let method = QMethod::QSeries;
            let threshold = threshold_search(&req.spec, &req.search, method, s)?;
            let unbounded = matches!(threshold, Threshold::Unbounded { .. });
            Outcome::Threshold(ThresholdOutcome {
                method,
                search: req.search,
                lambda_star: (!unbounded).then(|| threshold.value()),
                unbounded,
                threshold,
            })
        }
        Command::Split => {
            let lambda = req.require_lambda()?;
            let entries = req
                .p_grid
                .iter()
                .map(|&p| split_entry(req, lambda, p))
                .collect::<Result<Vec<_>>>()?;
            Outcome::Split(SplitOutcome {
                lambda,
                all_pgf: entries.iter().all(|e| e.split.is_pgf),
                entries,
            })
        }
        Command::Sweep => {
            let grid = &req.lambda_grid;
            let q = gid_grid_test(&req.spec, grid, QMethod::QSeries, s)?;
            let a = gid_grid_test(&req.spec, grid, QMethod::ARecursion, s)?;
            let method_agreement = q.verdicts.iter().zip(&a.verdicts).all(|(x, y)| agree(x, y));
            let mut splits = Vec::with_capacity(grid.len() * req.p_grid.len());
            for &lambda in grid {
                for &p in &req.p_grid {
                    let g = nid_split(req.semigroup, &req.spec, lambda, p, s)?;
                    splits.push(SweepSplit {
                        lambda,
                        p,
                        is_pgf: g.is_pgf,
                        first_violation: g.seq.first_violation,
                    });
                }
            }
            Outcome::Sweep(SweepOutcome {
                lambda_grid: grid.clone(),
                method_agreement,
                q_series: q,
                a_recursion: a,
                splits,
            })
        }
        Command::Precheck => {
            let lambda = req.require_lambda()?;
            let mut targets = Vec::new();
            if req.p_grid.is_empty() {
                targets.push((None, req.spec.pgf_series(lambda, s.order)?.into_coeffs()));
            }
            for &p in &req.p_grid {
                let g = nid_split(req.semigroup, &req.spec, lambda, p, s)?;
                targets.push((Some(p), g.seq.values));
            }
            let entries = targets
                .into_iter()
                .map(|(p, pgf)| {
                    let report = mixture_precheck(&pgf, &req.z_grid, req.m, s.tol)?;
                    Ok(PrecheckEntry { p, pgf, report })
                })
                .collect::<Result<Vec<_>>>()?;
            Outcome::Precheck(PrecheckOutcome {
                lambda,
                m: req.m,
                z_grid: req.z_grid.clone(),
                holds: entries.iter().all(|e| e.report.holds),
                entries,
            })
        }
    };
    Ok(Report {
        schema: REPORT_SCHEMA,
        command: req.command,
        spec: req.spec.clone(),
        settings: *s,
        semigroup: req.semigroup,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::{parse_document, Overrides};

    fn request(command: Command, text: &str) -> AnalysisRequest {
        let doc = parse_document(text, "test").unwrap();
        AnalysisRequest::build(Some(command), doc, &Overrides::default()).unwrap()
    }

    #[test]
    fn analyze_exponential() {
        let req = request(
            Command::Analyze,
            r#"{"spec":{"family":"exponential","params":{"theta":1}},"lambda":1,"order":32}"#,
        );
        let Outcome::Analyze(a) = run(&req).unwrap().result else {
            panic!("wrong outcome")
        };
        assert!(a.holds && a.method_agreement && a.k_jet.verdict.holds);
        assert!(a.b_a_residual < 1e-14);
        assert!((a.pmf.values[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn threshold_ml_squared() {
        let req = request(
            Command::Threshold,
            r#"{"spec":{"family":"ml_squared","params":{"alpha":0.75}},"order":50}"#,
        );
        let Outcome::Threshold(t) = run(&req).unwrap().result else {
            panic!("wrong outcome")
        };
        let exact = 0.5f64.powf(1.0 / 0.75);
        assert!(!t.unbounded);
        assert!((t.lambda_star.unwrap() - exact).abs() < 1e-3);
    }

    #[test]
    fn split_and_precheck_for_exponential() {
        let text = r#"{"spec":{"family":"exponential","params":{"theta":1}},"lambda":1,"p_grid":[0.25,0.5],"order":24}"#;
        let Outcome::Split(s) = run(&request(Command::Split, text)).unwrap().result else {
            panic!("wrong outcome")
        };
        assert!(s.all_pgf);
        assert!(s
            .entries
            .iter()
            .all(|e| e.reconstruction_residual.unwrap() < 1e-12));
        let Outcome::Precheck(p) = run(&request(Command::Precheck, text)).unwrap().result else {
            panic!("wrong outcome")
        };
        assert_eq!(p.entries.len(), 2);
        assert!(p.holds);
    }

    #[test]
    fn sweep_ml_squared_is_downward_closed() {
        let req = request(
            Command::Sweep,
            r#"{"spec":{"family":"ml_squared","params":{"alpha":0.75}},"lambda_grid":[0.1,0.3,0.5,1.0],"p_grid":[0.5],"order":40}"#,
        );
        let Outcome::Sweep(s) = run(&req).unwrap().result else {
            panic!("wrong outcome")
        };
        assert!(s.method_agreement);
        assert!(s.q_series.monotone);
        assert_eq!(s.q_series.largest_passing, Some(0.3));
        assert_eq!(s.splits.len(), 4);
    }
}
