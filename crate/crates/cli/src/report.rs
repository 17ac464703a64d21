//! JSON schema of the per-level report.
//!
//! One object per level:
//!
//! | field | meaning |
//! |---|---|
//! | `n`, `d` | dimension and degree of the input polynomial |
//! | `level` | hierarchy level `ℓ` |
//! | `reduction` | `"even-homogenize"` or `"odd-lift"` |
//! | `solved_n`, `solved_d` | shape of the problem actually solved |
//! | `gamma` | scale of the odd lift (`1` otherwise); bounds are already divided by it |
//! | `nu_ell` | upper bound on the maximum |
//! | `nu_tilde` | lower bound, the objective averaged against `measure` |
//! | `eps`, `eps_valid` | guaranteed relative error and whether its hypotheses hold |
//! | `duality_gap`, `iterations` | solver diagnostics |
//! | `oracle_value` | local-search maximum, only with `--oracle` |
//! | `measure` | density on the solved sphere, `{n, terms, normalization_residual}` |
//! | `certificate` | `t - T'(x) = Σ w_i T_i(x)²`, only with `--certificate` |
//!
//! Floats carry 17 significant digits so every value parses back to the same
//! `f64`.

use serde_json::value::RawValue;
use serde::{Deserialize, Serialize, Serializer};
use sphereopt_core::{BoundsReport, ReductionKind, ReductionRecord, SosCertificate};

use crate::input::{PolyJson, TermJson};

fn raw_float(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub(crate) fn sig17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw_float(*v).serialize(s)
}

fn sig17_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    v.map(raw_float).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
    #[serde(serialize_with = "sig17")]
    pub normalization_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareJson {
    #[serde(serialize_with = "sig17")]
    pub weight: f64,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(serialize_with = "sig17")]
    pub t: f64,
    pub squares: Vec<SquareJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: usize,
    pub d: usize,
    pub level: usize,
    pub reduction: String,
    pub solved_n: usize,
    pub solved_d: usize,
    #[serde(serialize_with = "sig17")]
    pub gamma: f64,
    #[serde(serialize_with = "sig17")]
    pub nu_ell: f64,
    #[serde(serialize_with = "sig17")]
    pub nu_tilde: f64,
    #[serde(serialize_with = "sig17")]
    pub eps: f64,
    pub eps_valid: bool,
    #[serde(serialize_with = "sig17")]
    pub duality_gap: f64,
    pub iterations: usize,
    #[serde(serialize_with = "sig17_opt", skip_serializing_if = "Option::is_none", default)]
    pub oracle_value: Option<f64>,
    pub measure: MeasureJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<CertificateJson>,
}

pub fn reduction_name(kind: ReductionKind) -> &'static str {
    match kind {
        ReductionKind::EvenHomogenize => "even-homogenize",
        ReductionKind::OddLift => "odd-lift",
    }
}

impl Report {
    /// `report` must already be pulled back through `record`.
    pub fn new(
        report: &BoundsReport,
        record: &ReductionRecord,
        certificate: Option<&SosCertificate>,
    ) -> Self {
        let density = PolyJson::from_homo(&report.measure.density);
        Self {
            n: report.n,
            d: report.d,
            level: report.level,
            reduction: reduction_name(record.kind).to_string(),
            solved_n: record.lifted_n,
            solved_d: record.lifted_d,
            gamma: report.gamma,
            nu_ell: report.nu_ell,
            nu_tilde: report.nu_tilde,
            eps: report.eps,
            eps_valid: report.eps_valid,
            duality_gap: report.duality_gap,
            iterations: report.iterations,
            oracle_value: report.oracle_value,
            measure: MeasureJson {
                n: density.n,
                degree: report.measure.density.degree(),
                terms: density.terms,
                normalization_residual: report.measure.normalization_residual,
            },
            certificate: certificate.map(|c| CertificateJson {
                t: c.t,
                squares: c
                    .squares
                    .iter()
                    .map(|(w, p)| SquareJson {
                        weight: *w,
                        terms: PolyJson::from_homo(p).terms,
                    })
                    .collect(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "level {} (n = {}, d = {}, {}",
            self.level, self.n, self.d, self.reduction
        );
        if self.reduction == "odd-lift" {
            out += &format!(", gamma = {:.10}", self.gamma);
        }
        out += ")\n";
        out += &format!("  upper bound  nu_ell   = {:.12}\n", self.nu_ell);
        out += &format!("  lower bound  nu_tilde = {:.12}\n", self.nu_tilde);
        if let Some(v) = self.oracle_value {
            out += &format!("  oracle                = {v:.12}\n");
        }
        out += &format!(
            "  eps = {:.6}{}, gap = {:.2e}, {} iterations\n",
            self.eps,
            if self.eps_valid { "" } else { " (hypothesis not met)" },
            self.duality_gap,
            self.iterations
        );
        if let Some(c) = &self.certificate {
            out += &format!("  certificate: t = {:.12} with {} squares\n", c.t, c.squares.len());
        }
        out
    }
}
