//! Element files: `{"n": 2, "coeffs": [{"mask": 0, "re": 1.0, "im": 0.0}, ...]}`.
//! Omitted masks are zero. Floats are written with shortest round-trip
//! formatting, so reading back is exact.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordContext, Element};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::report::SCHEMA_VERSION;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoeffEntry {
    pub mask: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ElementFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n: usize,
    pub coeffs: Vec<CoeffEntry>,
}

impl ElementFile {
    /// Nonzero coefficients of `a`, in mask order.
    pub fn from_element(a: &Element) -> Self {
        let coeffs = a
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(mask, c)| CoeffEntry { mask, re: c.re, im: c.im })
            .collect();
        ElementFile {
            schema_version: SCHEMA_VERSION,
            n: a.n(),
            coeffs,
        }
    }

    pub fn to_element(&self, ctx: &Arc<CliffordContext>) -> Result<Element> {
        if ctx.n() != self.n {
            return Err(Error::ContextMismatch(ctx.n(), self.n));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); ctx.dim()];
        for e in &self.coeffs {
            if e.mask >= ctx.dim() {
                return Err(Error::Format(format!("mask {} out of range for n = {}", e.mask, self.n)));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Format(format!("non-finite coefficient at mask {}", e.mask)));
            }
            c[e.mask] += Complex64::new(e.re, e.im);
        }
        Element::from_coeffs(ctx, &c)
    }
}

pub fn element_to_json(a: &Element) -> String {
    serde_json::to_string_pretty(&ElementFile::from_element(a)).expect("plain data serializes")
}

/// Parse an element; the context is created from the file's `n`.
pub fn element_from_json(s: &str) -> Result<Element> {
    let file: ElementFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    let ctx = CliffordContext::new(file.n)?;
    file.to_element(&ctx)
}

pub fn density_from_json(s: &str) -> Result<Density> {
    Density::new(element_from_json(s)?)
}
