//! Oracle cross-check of a normalization run.

use serde::Serialize;

use super::{normalize, RewriteError, Stuck};
use crate::diagram::{evaluate, Diagram, EdgeIndex};
use crate::linalg::{fmt_complex, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarReport {
    pub coeff: String,
    pub sqrt2_exp: i32,
    pub value: String,
}

impl From<Scalar> for ScalarReport {
    fn from(s: Scalar) -> Self {
        Self { coeff: fmt_complex(s.coeff()), sqrt2_exp: s.sqrt2_exp(), value: fmt_complex(s.value()) }
    }
}

/// A dot left in the normal form. `output` is the diagram output reached by
/// following the wire upward through other dots, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualDot {
    pub node: String,
    pub gate: String,
    pub output: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub status: String,
    pub deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim_deviation: Option<f64>,
    pub scalar: ScalarReport,
    pub residual_dots: Vec<ResidualDot>,
    pub stuck: Vec<Stuck>,
    pub trace: Vec<String>,
    #[serde(skip)]
    pub normal_form: Diagram,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn human(&self) -> String {
        let mut s = format!("status: {}\n", self.status);
        s += &format!("deviation: {:e}\n", self.deviation);
        if let Some(c) = self.claim_deviation {
            s += &format!("claim deviation: {c:e}\n");
        }
        s += &format!("scalar: {}*2^({}/2) = {}\n", self.scalar.coeff, self.scalar.sqrt2_exp, self.scalar.value);
        if self.residual_dots.is_empty() {
            s += "residual dots: none\n";
        } else {
            s += "residual dots:\n";
            for r in &self.residual_dots {
                let at = r.output.map(|k| format!("output {k}")).unwrap_or_else(|| "interior".to_string());
                s += &format!("  {} {} on {at}\n", r.node, r.gate);
            }
        }
        for st in &self.stuck {
            s += &format!("stuck at {}: {}\n", st.locus.join(","), st.reason);
        }
        s += "trace:\n";
        for line in &self.trace {
            s += &format!("  {line}\n");
        }
        s
    }
}

fn output_above(d: &Diagram, idx: &EdgeIndex, e: &str) -> Option<usize> {
    let mut cur = e.to_string();
    loop {
        if let Some(k) = d.outputs.iter().position(|o| *o == cur) {
            return Some(k);
        }
        let (k, _) = idx.consumer_node(&cur)?;
        d.nodes[k].dot()?;
        cur = d.nodes[k].outs[0].clone();
    }
}

/// Dots of `d` in topological order.
pub fn residual_dots(d: &Diagram) -> Vec<ResidualDot> {
    let idx = d.edge_index();
    let order = d.topological_order().unwrap_or_else(|_| (0..d.nodes.len()).collect());
    order
        .into_iter()
        .filter_map(|k| {
            let n = &d.nodes[k];
            n.dot().map(|g| ResidualDot { node: n.id.clone(), gate: g.to_string(), output: output_above(d, &idx, &n.outs[0]) })
        })
        .collect()
}

/// Normalizes `d` and compares both sides with the oracle.
pub fn verify(d: &Diagram, tol: f64) -> Result<VerifyReport, RewriteError> {
    let eval = |x: &Diagram| evaluate(x).map_err(|e| RewriteError::Invalid(e.to_string()));
    let before = eval(d)?;
    let n = normalize(d)?;
    let after = eval(&n.diagram)?;
    let deviation = before.max_abs_diff(&after).map_err(|e| RewriteError::Invalid(e.to_string()))?;
    let ok = deviation <= tol && !n.budget_exhausted;
    Ok(VerifyReport {
        status: if ok { "pass" } else { "fail" }.to_string(),
        deviation,
        claim_deviation: None,
        scalar: n.diagram.scalar.into(),
        residual_dots: residual_dots(&n.diagram),
        stuck: n.stuck,
        trace: n.trace.lines(),
        normal_form: n.diagram,
    })
}

/// [`verify`] on `lhs`, additionally checking the claimed equality
/// `evaluate(lhs) = evaluate(rhs)`.
pub fn verify_equation(lhs: &Diagram, rhs: &Diagram, tol: f64) -> Result<VerifyReport, RewriteError> {
    let mut report = verify(lhs, tol)?;
    let a = evaluate(lhs).map_err(|e| RewriteError::Invalid(e.to_string()))?;
    let b = evaluate(rhs).map_err(|e| RewriteError::Invalid(e.to_string()))?;
    let claim = a.max_abs_diff(&b).unwrap_or(f64::INFINITY);
    report.claim_deviation = Some(claim);
    if claim > tol {
        report.status = "fail".to_string();
    }
    Ok(report)
}
