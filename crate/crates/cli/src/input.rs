//! Reading polynomials from the text grammar or from JSON
//! (`{"n":3,"terms":[{"coeff":3.5,"exps":[2,1,0]}]}`).

use serde::{Deserialize, Serialize};
use sphereopt_core::{parse_poly, HomoPoly, Polynomial};

use crate::report::sig17;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(serialize_with = "sig17")]
    pub coeff: f64,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl PolyJson {
    pub fn from_homo(p: &HomoPoly) -> Self {
        Self {
            n: p.n(),
            terms: p
                .terms()
                .map(|(k, c)| TermJson {
                    coeff: c,
                    exps: k.exponents().to_vec(),
                })
                .collect(),
        }
    }
}

/// Parses `src` as JSON when it starts with `{`, otherwise with the text
/// grammar. An explicit `n` must agree with the JSON header and may widen a
/// text polynomial.
pub fn read_polynomial(src: &str, explicit_n: Option<usize>) -> Result<Polynomial, CliError> {
    let trimmed = src.trim_start();
    let poly = if trimmed.starts_with('{') {
        let doc: PolyJson =
            serde_json::from_str(trimmed).map_err(|e| CliError::Parse(format!("invalid JSON polynomial: {e}")))?;
        if let Some(n) = explicit_n {
            if n != doc.n {
                return Err(CliError::Parse(format!(
                    "--n {n} disagrees with the JSON header n = {}",
                    doc.n
                )));
            }
        }
        let mut p = Polynomial::new(doc.n);
        for term in doc.terms {
            if !term.coeff.is_finite() {
                return Err(CliError::Parse("non-finite coefficient".into()));
            }
            p.add_term(term.exps, term.coeff)
                .map_err(|e| CliError::Parse(e.to_string()))?;
        }
        p
    } else {
        parse_poly(src.trim(), explicit_n).map_err(|e| CliError::Parse(e.to_string()))?
    };
    if poly.n() == 0 {
        return Err(CliError::Parse(
            "polynomial has no variables; pass --n to fix the dimension".into(),
        ));
    }
    Ok(poly)
}
